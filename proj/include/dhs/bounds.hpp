#pragma once
#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dhs/complex.hpp"
#include "dhs/geometry.hpp"
#include "dhs/spectrum.hpp"

namespace dhs {

// Curvature correction Phi(|h|^2, |H|^2) entering the Ricci estimate for p-forms.
// Zero for p = 0. Requires m|h|^2 - |H|^2 >= 0 (Cauchy-Schwarz); small negatives
// above -1e-12 are clamped, anything worse throws GeometryError.
double phi(double h_sq, double H_sq, int m, int p);

// Pointwise max of p|H||h| - Phi - |x|^2/4 over the backend's sample set,
// together with min |x|^2 (reported alongside for the constant-|x| specialization).
struct GeometricTerm {
    double g = 0.0;
    double min_xsq = 0.0;
    int m = 0;
    int p = 0;
};

GeometricTerm geometric_term(const GeometryBackend& backend, int p);

// Exact-integral right-hand side for index i (1-based):
//   D_i = 4 lambda_i + 2m - int |x|^2 |phi_i|^2 - 4 int <Ric phi_i, phi_i>
//         + 4 int <Hess(|x|^2/2) phi_i, phi_i>,
// all against the Gaussian-weighted measure, eigenform normalized to unit mass norm.
// Discrete spectra use quadrature over the complex's cell points; analytic spectra
// (no eigenforms) use the closed form below. For p >= 1 the curvature action is only
// available on constant-curvature analytic backends; otherwise CapabilityError
// directs the caller to rhs_geometric.
double rhs_exact(const Spectrum& spectrum, const GeometryBackend& backend,
                 const WeightedComplex& complex, int i);

// Closed form of the same quantity for constant-curvature analytic backends,
// where |x|^2 is constant and the curvature terms collapse to scalars.
double rhs_exact_closed_form(double lambda, const GeometryBackend& backend, int p);

// Geometric-max right-hand side: D_i = 4 lambda_i + 2m + 4 + 4G with G from
// geometric_term. Always available; dominates the exact form.
double rhs_geometric(double lambda, int m, int p, double g);

// Largest root of m sum (L - lambda_i)^2 = sum (L - lambda_i) D_i, an explicit
// upper bound on the next eigenvalue. lambdas must be nondecreasing. A discriminant
// below -1e-12 b^2 signals D inconsistent with any valid spectrum (InputError).
double yang_bound(const Eigen::VectorXd& lambdas, const Eigen::VectorXd& D, int m);

// Slack of the quadratic inequality at the observed lambda_{k+1}:
//   sum (lambda_{k+1} - lambda_i) D_i - m sum (lambda_{k+1} - lambda_i)^2.
double yang_check(const Eigen::VectorXd& spectrum, const Eigen::VectorXd& D, int m, int k);

// Consecutive-gap bound from the same quadratic:
//   2 [ ((2/m) mean + 2/m + (2/m) G)^2 - (1 + 4/m) var ]^{1/2}
// over lambda_1..lambda_k. Negative radicand beyond -1e-12 throws InputError.
// Note: the bracket equals (2/m)(mean + c) for the uniform constant c = 1 + G of
// D_i <= 4(lambda_i + c); callers holding a per-index D should pass G = c - 1 with
// c = max_i (D_i/4 - lambda_i), which is what bound_suite does.
double gap_bound(const Eigen::VectorXd& lambdas, int m, double g);

// Slack of sum_{l=1..m} (lambda_{i+l} - lambda_i) <= D_i (indices 1-based).
// Requires at least i+m spectrum entries.
double lp_check(const Eigen::VectorXd& spectrum, double D_i, int m, int i);

// Geometric-max form of the lp right-hand side (same formula as rhs_geometric).
double lp_bound(double lambda, int m, int p, double g);

// Cheng-Yang style growth bound mu_{k+1} <= (1 + 4/m) k^{2/m} mu_1 for the
// shifted eigenvalues mu_i = lambda_i + c. mu_1 <= 0 throws InputError.
double cheng_yang_bound(double mu_1, int m, int k);

// Classical Dirichlet-spectrum checks, audit only. Spectrum entries must be
// strictly positive. hp is +infinity when lambda_{k+1} ties an earlier eigenvalue.
struct ClassicalSlacks {
    double ppw = 0.0;
    double hp = 0.0;
    double yang = 0.0;
};

ClassicalSlacks classical_checks(const Eigen::VectorXd& spectrum, int m, int k);

enum class RhsMode { exact, geometric };

// D_1..D_count for the spectrum's degree under the requested mode.
std::vector<double> rhs_vector(const Spectrum& spectrum, const GeometryBackend& backend,
                               const WeightedComplex* complex, RhsMode mode, int count);

struct BoundRow {
    std::string inequality;
    int p = 0;
    int index = 0; // k or i, 1-based
    double bound = 0.0;
    double observed = 0.0;
    double slack = 0.0;
    bool pass = false;
    std::string mode; // "exact-integral", "geometric-max", or "audit"
};

struct BoundProvenance {
    int m = 0;
    int p = 0;
    std::string mode;
    double g = 0.0;       // geometric max term for this degree
    double min_xsq = 0.0;
    double uniform_c = 0.0; // max_i (D_i/4 - lambda_i) used for gap / growth rows
    double tolerance = 0.0;
    int curvature_term_factor = 4; // coefficient applied to the max term in D
    std::string c0 = "1+4/m";
};

struct BoundReport {
    std::vector<BoundRow> rows;
    BoundProvenance provenance;

    // audit rows never count against this
    bool all_pass() const;
};

struct SuiteOptions {
    RhsMode mode = RhsMode::exact;
    int k_max = 50;
    double tolerance = 1e-9;
    bool classical = false; // append audit rows when the spectrum allows them
};

// One row per (inequality, index): yang / gap / levitin-parnovski / cheng-yang,
// k and i up to k_max (clamped to what the spectrum supports), plus optional
// classical audit rows. complex may be null for analytic spectra.
BoundReport bound_suite(const Spectrum& spectrum, const GeometryBackend& backend,
                        const WeightedComplex* complex, const SuiteOptions& options = {});

} // namespace dhs
