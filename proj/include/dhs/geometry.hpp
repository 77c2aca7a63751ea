#pragma once
#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "dhs/mesh.hpp"

namespace dhs {

enum class BackendKind { analytic_sphere, analytic_circle, mesh_surface, mesh_curve };

const char* to_string(BackendKind kind);

// one quadrature node with first- and second-order geometric data
struct SamplePoint {
    Eigen::VectorXd position;                       // in R^n
    Eigen::MatrixXd tangent;                        // n x m, orthonormal columns
    Eigen::MatrixXd normal;                         // n x (n-m), orthonormal columns
    std::vector<Eigen::MatrixXd> second_fundamental; // one m x m block per normal direction
    Eigen::VectorXd mean_curvature;                 // ambient vector, frame independent
    double quad_weight = 0.0;                       // includes the exp(-|x|^2/2) factor

    double xsq() const { return position.squaredNorm(); }
    double mean_curvature_norm() const { return mean_curvature.norm(); }
    double second_fundamental_norm_sq() const;
};

struct GeometryBackend {
    BackendKind kind;
    int m = 0; // intrinsic dimension
    int n = 0; // ambient dimension
    bool curvature_estimated = false;
    std::optional<double> sectional_curvature; // constant-curvature analytic kinds only
    std::vector<SamplePoint> samples;

    // discretization grid consumed by build_complex (absent for m >= 3)
    std::optional<SurfaceMesh> surface;
    std::optional<Polyline> curve;
    bool parametric_arc = false; // m = 1: cells measured by arc length instead of chords
    double measure_scale = 1.0;  // global factor applied to all discrete measures

    double weighted_volume() const;
};

// round sphere of the given radius (default sqrt(m), the drift-stationary one)
// embedded equatorially when ambient_n exceeds m+1.
//   m = 1: regular polygon grid with `resolution` vertices (>= 4)
//   m = 2: icosphere grid at subdivision level `resolution` (0..8)
//   m >= 3: cross-polytope sample set, no grid
GeometryBackend sphere_backend(int m, int ambient_n, int resolution, double radius = 0.0);

GeometryBackend backend_from_surface(const SurfaceMesh& mesh);
GeometryBackend backend_from_polyline(const Polyline& poly);

// dispatches on extension: .off/.obj surface, .poly/.xy/.txt polyline
GeometryBackend mesh_backend(const std::string& path);

// max_q |H + x_normal|; zero exactly on drift-stationary geometries
double shrinker_residual(const GeometryBackend& backend);

// tangential Hessian of |x|^2/2: T_ij = sum_a h^a_ij <e_a, x> + delta_ij,
// contracted in the scalar normal components
Eigen::MatrixXd hessian_half_xsq(const SamplePoint& q);
// same quantity via the ambient vector-valued second fundamental form
Eigen::MatrixXd hessian_half_xsq_ambient(const SamplePoint& q);

// sum_A |grad x^A|^2 = squared Frobenius norm of the tangent frame (= m)
double frame_gradient_identity(const SamplePoint& q);

} // namespace dhs
