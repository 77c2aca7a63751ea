#pragma once

#include <Eigen/Sparse>
#include <string>
#include <utility>
#include <vector>

#include "dhs/geometry.hpp"

namespace dhs {

// discrete weighted de Rham complex over a backend's cell structure.
// d_p are pure incidence matrices; masses are diagonal, lumped, with the
// Gaussian factor exp(-|x|^2/2) sampled at the cell's representative point
// (vertex for p=0, edge midpoint for p=1, face circumcenter for p=2).
struct WeightedComplex {
    int m = 0;
    BackendKind kind = BackendKind::mesh_surface;
    std::string weight_description = "exp(-|x|^2/2)";
    std::vector<Eigen::SparseMatrix<double>> d;        // d_0 .. d_{m-1}
    std::vector<Eigen::VectorXd> mass;                 // diagonal of M_0 .. M_m
    std::vector<std::vector<Eigen::VectorXd>> points;  // cell representative per degree

    int cells(int p) const { return static_cast<int>(mass.at(p).size()); }
    Eigen::SparseMatrix<double> mass_matrix(int p) const;
};

// assembles the complex; analytic backends evaluate the weight on the exact
// manifold (cell points projected radially), mesh backends use raw positions
WeightedComplex build_complex(const GeometryBackend& backend);

// weak Hodge Laplacian pair: K_p = d_p^T M_{p+1} d_p + M_p d_{p-1} M_{p-1}^{-1} d_{p-1}^T M_p
std::pair<Eigen::SparseMatrix<double>, Eigen::SparseMatrix<double>>
hodge_laplacian(const WeightedComplex& cx, int p);

// drift Laplacian on vertex functions: L u = M_0^{-1} K_0 u (positive PSD sign)
Eigen::VectorXd drift_apply(const WeightedComplex& cx, const Eigen::VectorXd& u);

// vertex-lumped carre du champ Gamma(u,v); satisfies the exact discrete
// product rule L(uv) = u Lv + v Lu - 2 Gamma(u,v)
Eigen::VectorXd carre_du_champ(const WeightedComplex& cx, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& v);

// sum_c values[c] * M_p[c] * phi[c]^2 (weighted quadrature of a scalar field
// against the energy density of a discrete p-form)
double weighted_quadrature(const WeightedComplex& cx, int p, const Eigen::VectorXd& cell_values,
                           const Eigen::VectorXd& phi);

// MatrixMarket coordinate text, for external inspection
void write_matrix_market(const Eigen::SparseMatrix<double>& mat, const std::string& path);

} // namespace dhs
