#include <doctest.h>

#include <cmath>

#include "dhs/errors.hpp"
#include "dhs/geometry.hpp"

using namespace dhs;

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

void check_frames_orthonormal(const GeometryBackend& bk, double tol) {
    for (const auto& q : bk.samples) {
        Eigen::MatrixXd full(bk.n, bk.m + (bk.n - bk.m));
        full << q.tangent, q.normal;
        CHECK((full.transpose() * full - Eigen::MatrixXd::Identity(bk.n, bk.n)).cwiseAbs().maxCoeff() <= tol);
    }
}

} // namespace

TEST_CASE("round sphere backend carries exact shrinker geometry") {
    GeometryBackend bk = sphere_backend(2, 3, 2);
    CHECK(bk.kind == BackendKind::analytic_sphere);
    CHECK(!bk.curvature_estimated);
    REQUIRE(bk.sectional_curvature.has_value());
    CHECK(*bk.sectional_curvature == doctest::Approx(0.5).epsilon(1e-15));
    for (const auto& q : bk.samples) {
        CHECK(q.xsq() == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(q.mean_curvature.squaredNorm() == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(q.second_fundamental_norm_sq() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(2.0 * q.second_fundamental_norm_sq() - q.mean_curvature.squaredNorm() >= -1e-12);
    }
    check_frames_orthonormal(bk, 1e-12);
    CHECK(shrinker_residual(bk) <= 1e-13);
    // total weighted measure 4*pi*r^2*exp(-r^2/2) held exactly by the node weights
    CHECK(bk.weighted_volume() == doctest::Approx(8.0 * kPi * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("unit circle backend") {
    GeometryBackend bk = sphere_backend(1, 2, 64);
    CHECK(bk.kind == BackendKind::analytic_circle);
    CHECK(bk.parametric_arc);
    REQUIRE(bk.samples.size() == 64);
    for (const auto& q : bk.samples) {
        CHECK(q.xsq() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(q.mean_curvature.norm() == doctest::Approx(1.0).epsilon(1e-14));
    }
    check_frames_orthonormal(bk, 1e-12);
    CHECK(shrinker_residual(bk) <= 1e-14);
    CHECK(bk.weighted_volume() == doctest::Approx(2.0 * kPi * std::exp(-0.5)).epsilon(1e-13));
}

TEST_CASE("higher-dimensional sphere nodes form an exact quadrature set") {
    GeometryBackend bk = sphere_backend(3, 4, 0);
    REQUIRE(bk.samples.size() == 8);
    double r2 = 3.0;
    for (const auto& q : bk.samples) {
        CHECK(q.xsq() == doctest::Approx(r2).epsilon(1e-14));
        CHECK(q.mean_curvature.squaredNorm() == doctest::Approx(3.0).epsilon(1e-14));
        CHECK(q.second_fundamental_norm_sq() == doctest::Approx(1.0).epsilon(1e-14));
    }
    check_frames_orthonormal(bk, 1e-14);
    CHECK(shrinker_residual(bk) <= 1e-13);
    double exact = 2.0 * kPi * kPi * std::pow(std::sqrt(3.0), 3.0) * std::exp(-1.5);
    CHECK(bk.weighted_volume() == doctest::Approx(exact).epsilon(1e-12));

    // codimension > 1 embedding pads the normal bundle with flat directions
    GeometryBackend hi = sphere_backend(2, 5, 1);
    for (const auto& q : hi.samples) {
        CHECK(q.normal.cols() == 3);
        CHECK(q.second_fundamental[1].cwiseAbs().maxCoeff() == 0.0);
        CHECK(q.second_fundamental[2].cwiseAbs().maxCoeff() == 0.0);
    }
    check_frames_orthonormal(hi, 1e-12);
    CHECK(shrinker_residual(hi) <= 1e-13);

    CHECK_THROWS_AS(sphere_backend(0, 1, 4), DimensionError);
    CHECK_THROWS_AS(sphere_backend(2, 2, 4), DimensionError);
}

TEST_CASE("wrong radius leaves a unit shrinker residual") {
    GeometryBackend bk = sphere_backend(2, 3, 1, 1.0);
    CHECK(shrinker_residual(bk) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("tangential hessian of half |x|^2 vanishes on centered spheres") {
    for (const GeometryBackend& bk :
         {sphere_backend(1, 2, 32), sphere_backend(2, 3, 1), sphere_backend(4, 5, 0)}) {
        for (const auto& q : bk.samples) {
            Eigen::MatrixXd t_frame = hessian_half_xsq(q);
            Eigen::MatrixXd t_ambient = hessian_half_xsq_ambient(q);
            CHECK(t_frame.cwiseAbs().maxCoeff() <= 1e-10);
            CHECK((t_frame - t_ambient).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("flat slice through the origin has identity hessian") {
    SamplePoint q;
    q.position = Eigen::Vector2d(0.7, 0.0);
    q.tangent = Eigen::MatrixXd::Zero(2, 1);
    q.tangent(0, 0) = 1.0;
    q.normal = Eigen::MatrixXd::Zero(2, 1);
    q.normal(1, 0) = 1.0;
    q.second_fundamental = {Eigen::MatrixXd::Zero(1, 1)};
    q.mean_curvature = Eigen::VectorXd::Zero(2);
    q.quad_weight = 1.0;
    Eigen::MatrixXd t = hessian_half_xsq(q);
    CHECK(t(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("coordinate gradients sum to the dimension") {
    GeometryBackend bk = sphere_backend(2, 3, 2);
    for (const auto& q : bk.samples)
        CHECK(frame_gradient_identity(q) == doctest::Approx(2.0).epsilon(1e-12));
    GeometryBackend circ = sphere_backend(1, 2, 16);
    for (const auto& q : circ.samples)
        CHECK(frame_gradient_identity(q) == doctest::Approx(1.0).epsilon(1e-12));

    SamplePoint bent = bk.samples[5];
    bent.tangent(0, 0) += 1e-3;
    CHECK(std::abs(frame_gradient_identity(bent) - 2.0) >= 1e-4);
}

TEST_CASE("polyline curvature estimation on the regular 64-gon") {
    GeometryBackend bk = backend_from_polyline(regular_polygon(1.0, 64));
    CHECK(bk.curvature_estimated);
    for (const auto& q : bk.samples) {
        CHECK(q.mean_curvature.norm() == doctest::Approx(1.0).epsilon(5e-3));
        // estimated curvature points back toward the center
        CHECK(q.mean_curvature.dot(q.position) < 0.0);
    }
    check_frames_orthonormal(bk, 1e-12);
    CHECK(shrinker_residual(bk) <= 5e-3);
}

TEST_CASE("surface curvature estimation on the 2562-vertex icosphere") {
    GeometryBackend bk = backend_from_surface(icosphere(std::sqrt(2.0), 4));
    REQUIRE(bk.samples.size() == 2562);
    CHECK(bk.curvature_estimated);
    double mean_h2 = 0.0;
    for (const auto& q : bk.samples) {
        mean_h2 += q.second_fundamental_norm_sq();
        CHECK(2.0 * q.second_fundamental_norm_sq() - q.mean_curvature.squaredNorm() >= -1e-12);
    }
    mean_h2 /= static_cast<double>(bk.samples.size());
    CHECK(mean_h2 == doctest::Approx(1.0).epsilon(0.02));
    check_frames_orthonormal(bk, 1e-10);
    CHECK(shrinker_residual(bk) <= 0.05);
}

TEST_CASE("mesh residual decreases under refinement") {
    double coarse = shrinker_residual(backend_from_surface(icosphere(std::sqrt(2.0), 2)));
    double fine = shrinker_residual(backend_from_surface(icosphere(std::sqrt(2.0), 3)));
    CHECK(fine <= 0.5 * coarse); // observed order >= 1
    double ccoarse = shrinker_residual(backend_from_polyline(regular_polygon(1.0, 32)));
    double cfine = shrinker_residual(backend_from_polyline(regular_polygon(1.0, 64)));
    CHECK(cfine <= 0.5 * ccoarse);
}

TEST_CASE("file-dispatching backend loader") {
    SurfaceMesh mesh = icosphere(std::sqrt(2.0), 2);
    write_off("/tmp/dhs_geom_sphere.off", mesh);
    GeometryBackend bk = mesh_backend("/tmp/dhs_geom_sphere.off");
    CHECK(bk.kind == BackendKind::mesh_surface);
    CHECK(bk.samples.size() == mesh.vertices.size());
    std::remove("/tmp/dhs_geom_sphere.off");

    write_polyline("/tmp/dhs_geom_loop.xy", regular_polygon(1.0, 48));
    GeometryBackend loop = mesh_backend("/tmp/dhs_geom_loop.xy");
    CHECK(loop.kind == BackendKind::mesh_curve);
    std::remove("/tmp/dhs_geom_loop.xy");

    CHECK_THROWS_AS(mesh_backend("/tmp/dhs_geom.stl"), InputError);
}
