#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace dhs {

// Finite-dimensional commutator calculus on real symmetric matrices. These
// routines verify, in exact linear algebra, the operator inequalities and
// identities that the geometric eigenvalue bounds rest on.

// AB - BA. Square matrices of equal size; antisymmetry of the result is
// asserted when both inputs are symmetric.
Eigen::MatrixXd commutator(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// A self-adjoint operator together with a family of symmetric perturbers.
// Both are symmetrized on construction; the eigendecomposition of A is
// cached and its per-column residuals checked to 1e-12 relative to |A|_F.
struct OperatorPair {
    Eigen::MatrixXd A;
    std::vector<Eigen::MatrixXd> perturbers;
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // orthonormal columns

    OperatorPair(Eigen::MatrixXd a, std::vector<Eigen::MatrixXd> bs);

    int size() const { return static_cast<int>(values.size()); }
};

// Per-eigenvector commutator sums over the perturber family:
//   rho[i]  = sum_k <[A,B_k]u_i, B_k u_i>
//   gain[i] = sum_k |[A,B_k]u_i|^2
// for the first `count` eigenvectors. Both sums are invariant under
// orthogonal recombination of the B_k.
struct CommutatorTerms {
    Eigen::VectorXd rho;
    Eigen::VectorXd gain;
};
CommutatorTerms commutator_terms(const OperatorPair& pair, int count);

// Yang-type trace inequality: for any symmetric perturbers,
//   lhs = sum_{i<=k} (l_{k+1}-l_i)^2 rho_i  <=  sum_{i<=k} (l_{k+1}-l_i) gain_i = rhs.
// slack = rhs - lhs; nonnegative up to 1e-10*(1+|rhs|) rounding.
struct AhResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
};
AhResult ah_check(const OperatorPair& pair, int k);

// Sum-rule identity for a symmetric pair (L, G): with Lu_j = l_j u_j,
//   sum_{k: l_k != l_j} <[L,G]u_j,u_k>^2 / (l_k - l_j) = -1/2 <[[L,G],G]u_j,u_j>.
// Terms with l_k = l_j are skipped after asserting that their coupling
// vanishes (it does identically; numerically to 1e-10 relative). If a
// degenerate cluster shows coupling above tolerance the eigenbasis is
// re-adapted once by diagonalizing G inside each cluster; a second failure
// raises IdentityError. Returns |lhs - rhs| / (1 + |rhs|). j is 1-based.
double lpt_identity_residual(const Eigen::MatrixXd& L, const Eigen::MatrixXd& G, int j);

// Orthogonal recombination G'_A = sum_B G_B * rotation(B,A) such that the
// coupling matrix V'(k,A) = <[L,G'_A]u_i, u_{i+k}> vanishes for k < A.
// Computed by a QR factorization of the raw coupling matrix; the rotation is
// sign-normalized so the surviving diagonal couplings are nonnegative
// (re-running on already-triangular input then gives the identity).
// i is 1-based and needs n <= N - i. Rank deficiency is reported in
// `deficient` (1-based columns with no coupling mass), not as an error.
struct CouplingRotation {
    std::vector<Eigen::MatrixXd> rotated;
    Eigen::MatrixXd rotation;   // orthogonal n x n
    Eigen::MatrixXd coupling;   // V * rotation, zero above the diagonal
    std::vector<int> deficient;
};
CouplingRotation triangularize_coupling(const Eigen::MatrixXd& L,
                                        const std::vector<Eigen::MatrixXd>& gs, int i);

// Randomized batch verification. Each trial draws its own generator seeded
// from the root seed, so results are independent of the thread count.
struct TrialFailure {
    int trial = 0;
    std::string what;
    std::string dump;  // JSON with the offending matrices
};

struct BatchResult {
    std::string name;
    int trials = 0;
    double max_violation = 0.0;
    std::vector<TrialFailure> failures;

    bool ok() const { return failures.empty(); }
};

// Random (A, B_1..B_r) with N in [2, n_max], r <= 3, random k: slack must be
// >= -1e-10*(1+|rhs|).
BatchResult ah_batch(int trials, std::uint64_t seed, int n_max = 12, int threads = 1);

// Random symmetric pairs, every fourth trial with a degenerate spectrum;
// residual over every j must stay <= 1e-10.
BatchResult lpt_batch(int trials, std::uint64_t seed, int n_max = 12, int threads = 1);

// Random (L, G_1..G_n): verifies the zero pattern, the orthogonality of the
// rotation, and agreement of the returned coupling with one recomputed from
// the rotated family.
BatchResult triangularize_batch(int trials, std::uint64_t seed, int n_max = 12, int threads = 1);

// {"name":..., "trials":..., "max_violation":..., "failures":[...]}
std::string batch_summary_json(const BatchResult& result);

} // namespace dhs
