#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

#include "dhs/complex.hpp"
#include "dhs/geometry.hpp"

namespace dhs {

struct Spectrum {
    int degree = 0;
    Eigen::VectorXd eigenvalues;  // nondecreasing
    Eigen::MatrixXd eigenforms;   // columns, orthonormal in the M inner product; empty for oracles
    Eigen::VectorXd residuals;    // ||K v - lambda M v|| / ((1 + |lambda|) ||M v||)
    std::vector<std::vector<int>> clusters; // 0-based index groups of equal eigenvalues
    bool analytic = false;
};

struct SolveOptions {
    double tol = 1e-9;
    std::uint64_t seed = 0x5d5c1ad5ull;
    int max_iterations = 400;
    int dense_cutoff = 2000; // below this, use the dense path
};

// smallest `count` eigenpairs of K v = lambda M v (K PSD, M PD diagonal-dominant);
// dense below options.dense_cutoff, shift-invert block iteration above it
Spectrum solve_spectrum(const Eigen::SparseMatrix<double>& K, const Eigen::SparseMatrix<double>& M,
                        int count, const SolveOptions& options = {});

// closed-form spectrum of the weighted Hodge Laplacian on the round sphere
// S^m(sqrt m): lambda_l = l(l+m-1)/m with harmonic multiplicities. Available
// for p in {0, m} (and every p when m = 1); other degrees are refused so the
// discrete solver cannot be silently bypassed.
Spectrum analytic_sphere_spectrum(int m, int p, int count);

// max_A || L x^A - x^A ||_M / || x^A ||_M over ambient coordinates
double coordinate_eigenfunction_check(const WeightedComplex& cx, const GeometryBackend& bk);

std::vector<std::vector<int>> multiplicity_clusters(const Eigen::VectorXd& eigenvalues,
                                                    double cluster_tol = -1.0);

// {degree, eigenvalues, residuals, clusters} with 1-based indices in clusters
std::string spectrum_to_json(const Spectrum& spectrum);

} // namespace dhs
