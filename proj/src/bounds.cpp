#include "dhs/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dhs/errors.hpp"

namespace dhs {

namespace {

void check_degree(int m, int p, const char* where) {
    if (m < 1) throw DimensionError(std::string(where) + ": dimension must be positive");
    if (p < 0 || p > m)
        throw DimensionError(std::string(where) + ": degree " + std::to_string(p) +
                             " outside [0, " + std::to_string(m) + "]");
}

void check_sorted(const Eigen::VectorXd& lambdas, const char* where) {
    for (int i = 0; i + 1 < lambdas.size(); ++i)
        if (lambdas[i] > lambdas[i + 1] + 1e-12 * (1.0 + std::abs(lambdas[i])))
            throw InputError(std::string(where) + ": eigenvalues must be nondecreasing");
}

// Constant-curvature scalars needed by the exact-integral right-hand side for
// p >= 1: the Ricci action coefficient and the certified isotropic part of the
// |x|^2/2 Hessian. Throws CapabilityError when the backend cannot certify them.
struct ExactCurvature {
    double ric = 0.0; // int <Ric phi, phi> per unit mass norm
    double tau = 0.0; // Hess(|x|^2/2) = tau * Id, uniform over samples
};

ExactCurvature exact_curvature(const GeometryBackend& bk, int p) {
    ExactCurvature out;
    if (p == 0) return out;
    if (!bk.sectional_curvature || bk.curvature_estimated)
        throw CapabilityError(
            "Ricci action on p-forms needs a constant-curvature analytic backend; "
            "use rhs_geometric for estimated geometry");
    out.ric = *bk.sectional_curvature * p * (bk.m - p);

    double tau_min = std::numeric_limits<double>::infinity();
    double tau_max = -tau_min;
    for (const auto& q : bk.samples) {
        Eigen::MatrixXd T = hessian_half_xsq(q);
        double tau = T.trace() / bk.m;
        double dev = (T - tau * Eigen::MatrixXd::Identity(bk.m, bk.m)).cwiseAbs().maxCoeff();
        if (dev > 1e-8 * (1.0 + std::abs(tau)))
            throw CapabilityError(
                "anisotropic Hessian of |x|^2/2; its p-form action is not certified here, "
                "use rhs_geometric");
        tau_min = std::min(tau_min, tau);
        tau_max = std::max(tau_max, tau);
    }
    if (bk.samples.empty() || tau_max - tau_min > 1e-8)
        throw CapabilityError("Hessian of |x|^2/2 varies across samples; use rhs_geometric");
    out.tau = 0.5 * (tau_min + tau_max);
    return out;
}

double quadrature_rhs(const Spectrum& sp, const GeometryBackend& bk, const WeightedComplex& cx,
                      int i, const ExactCurvature& curv) {
    const int p = sp.degree;
    const Eigen::VectorXd& mass = cx.mass.at(p);
    if (sp.eigenforms.rows() != mass.size())
        throw InputError("eigenforms do not conform to the complex at this degree");
    Eigen::VectorXd phi = sp.eigenforms.col(i - 1);
    double norm = phi.dot(mass.cwiseProduct(phi));
    if (!(norm > 0.0)) throw InputError("eigenform has zero mass norm");

    const auto& pts = cx.points.at(p);
    Eigen::VectorXd xsq(mass.size());
    for (int c = 0; c < xsq.size(); ++c) xsq[c] = pts[c].squaredNorm();
    double xsq_int = weighted_quadrature(cx, p, xsq, phi) / norm;

    double lambda = sp.eigenvalues[i - 1];
    return 4.0 * lambda + 2.0 * bk.m - xsq_int - 4.0 * curv.ric + 4.0 * p * curv.tau;
}

double prefix_uniform_c(const std::vector<double>& D, const Eigen::VectorXd& lambdas, int k) {
    double c = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) c = std::max(c, 0.25 * D[i] - lambdas[i]);
    return c;
}

} // namespace

double phi(double h_sq, double H_sq, int m, int p) {
    check_degree(m, p, "phi");
    if (p == 0) return 0.0;
    double cs = m * h_sq - H_sq;
    if (cs < -1e-12)
        throw GeometryError("phi: m|h|^2 - |H|^2 = " + std::to_string(cs) +
                            " violates Cauchy-Schwarz");
    cs = std::max(cs, 0.0);
    double inner = std::sqrt(double(m - 1) * double(m - 2)) * std::sqrt(H_sq) - 2.0 * std::sqrt(cs);
    double bracket = (m - 5.0) / 4.0 * H_sq + h_sq - inner * inner / (4.0 * m * m);
    return -(double(p) * p * bracket + 0.5 * std::sqrt(double(p) * (p - 1)) * (H_sq + h_sq));
}

GeometricTerm geometric_term(const GeometryBackend& backend, int p) {
    check_degree(backend.m, p, "geometric_term");
    if (backend.samples.empty()) throw InputError("geometric_term: backend has no samples");
    GeometricTerm out;
    out.m = backend.m;
    out.p = p;
    out.g = -std::numeric_limits<double>::infinity();
    out.min_xsq = std::numeric_limits<double>::infinity();
    for (const auto& q : backend.samples) {
        double H = q.mean_curvature_norm();
        double h_sq = q.second_fundamental_norm_sq();
        double xsq = q.xsq();
        double val = p * H * std::sqrt(h_sq) - phi(h_sq, H * H, backend.m, p) - 0.25 * xsq;
        out.g = std::max(out.g, val);
        out.min_xsq = std::min(out.min_xsq, xsq);
    }
    return out;
}

double rhs_exact(const Spectrum& spectrum, const GeometryBackend& backend,
                 const WeightedComplex& complex, int i) {
    if (i < 1 || i > spectrum.eigenvalues.size())
        throw InputError("rhs_exact: index " + std::to_string(i) + " out of range");
    check_degree(backend.m, spectrum.degree, "rhs_exact");
    if (spectrum.eigenforms.cols() == 0)
        return rhs_exact_closed_form(spectrum.eigenvalues[i - 1], backend, spectrum.degree);
    ExactCurvature curv = exact_curvature(backend, spectrum.degree);
    return quadrature_rhs(spectrum, backend, complex, i, curv);
}

double rhs_exact_closed_form(double lambda, const GeometryBackend& backend, int p) {
    check_degree(backend.m, p, "rhs_exact_closed_form");
    if (backend.curvature_estimated || !backend.sectional_curvature)
        throw CapabilityError("closed-form right-hand side needs an analytic backend");
    if (backend.samples.empty()) throw InputError("backend has no samples");
    double xsq = backend.samples.front().xsq();
    for (const auto& q : backend.samples)
        if (std::abs(q.xsq() - xsq) > 1e-10 * (1.0 + xsq))
            throw CapabilityError("closed form needs constant |x|^2 over the manifold");
    ExactCurvature curv = exact_curvature(backend, p);
    return 4.0 * lambda + 2.0 * backend.m - xsq - 4.0 * curv.ric + 4.0 * p * curv.tau;
}

double rhs_geometric(double lambda, int m, int p, double g) {
    check_degree(m, p, "rhs_geometric");
    return 4.0 * lambda + 2.0 * m + 4.0 + 4.0 * g;
}

double yang_bound(const Eigen::VectorXd& lambdas, const Eigen::VectorXd& D, int m) {
    const int k = static_cast<int>(lambdas.size());
    if (k < 1) throw InputError("yang_bound: need at least one eigenvalue");
    if (D.size() != k) throw InputError("yang_bound: D length must match lambdas");
    if (m < 1) throw DimensionError("yang_bound: dimension must be positive");
    check_sorted(lambdas, "yang_bound");

    double a = double(m) * k;
    double b = 0.0, c = 0.0;
    for (int i = 0; i < k; ++i) {
        b += 2.0 * m * lambdas[i] + D[i];
        c += m * lambdas[i] * lambdas[i] + lambdas[i] * D[i];
    }
    double disc = b * b - 4.0 * a * c;
    if (disc < -1e-12 * b * b)
        throw InputError("yang_bound: negative discriminant, coefficients are infeasible");
    return (b + std::sqrt(std::max(disc, 0.0))) / (2.0 * a);
}

double yang_check(const Eigen::VectorXd& spectrum, const Eigen::VectorXd& D, int m, int k) {
    if (k < 1) throw InputError("yang_check: k must be >= 1");
    if (spectrum.size() < k + 1) throw InputError("yang_check: spectrum needs k+1 entries");
    if (D.size() < k) throw InputError("yang_check: D needs k entries");
    double top = spectrum[k];
    double slack = 0.0;
    for (int i = 0; i < k; ++i) {
        double gap = top - spectrum[i];
        slack += gap * D[i] - double(m) * gap * gap;
    }
    return slack;
}

double gap_bound(const Eigen::VectorXd& lambdas, int m, double g) {
    const int k = static_cast<int>(lambdas.size());
    if (k < 1) throw InputError("gap_bound: need at least one eigenvalue");
    if (m < 1) throw DimensionError("gap_bound: dimension must be positive");
    double mean = lambdas.mean();
    double B = (2.0 / m) * mean + 2.0 / m + (2.0 / m) * g;
    double var = (lambdas.array() - mean).square().sum() / k;
    double rad = B * B - (1.0 + 4.0 / m) * var;
    if (rad < -1e-12)
        throw InputError("gap_bound: negative radicand, coefficients are infeasible");
    return 2.0 * std::sqrt(std::max(rad, 0.0));
}

double lp_check(const Eigen::VectorXd& spectrum, double D_i, int m, int i) {
    if (i < 1) throw InputError("lp_check: index must be >= 1");
    if (spectrum.size() < i + m)
        throw InputError("lp_check: spectrum needs i+m entries, has " +
                         std::to_string(spectrum.size()));
    double sum = 0.0;
    for (int l = 1; l <= m; ++l) sum += spectrum[i - 1 + l] - spectrum[i - 1];
    return D_i - sum;
}

double lp_bound(double lambda, int m, int p, double g) { return rhs_geometric(lambda, m, p, g); }

double cheng_yang_bound(double mu_1, int m, int k) {
    if (m < 1) throw DimensionError("cheng_yang_bound: dimension must be positive");
    if (k < 1) throw InputError("cheng_yang_bound: k must be >= 1");
    if (!(mu_1 > 0.0)) throw InputError("cheng_yang_bound: mu_1 must be positive");
    return (1.0 + 4.0 / m) * std::pow(double(k), 2.0 / m) * mu_1;
}

ClassicalSlacks classical_checks(const Eigen::VectorXd& spectrum, int m, int k) {
    if (k < 1) throw InputError("classical_checks: k must be >= 1");
    if (spectrum.size() < k + 1)
        throw InputError("classical_checks: spectrum needs k+1 entries");
    for (int i = 0; i <= k; ++i)
        if (!(spectrum[i] > 0.0))
            throw InputError("classical_checks: entries must be strictly positive");

    ClassicalSlacks out;
    double top = spectrum[k];
    double sum = spectrum.head(k).sum();
    out.ppw = 4.0 / (double(m) * k) * sum - (top - spectrum[k - 1]);

    bool tied = false;
    double hp = 0.0;
    for (int i = 0; i < k; ++i) {
        if (top - spectrum[i] <= 0.0) {
            tied = true;
            break;
        }
        hp += spectrum[i] / (top - spectrum[i]);
    }
    out.hp = tied ? std::numeric_limits<double>::infinity() : hp - double(m) * k / 4.0;

    double yang = 0.0;
    for (int i = 0; i < k; ++i)
        yang += (top - spectrum[i]) * (top - (1.0 + 4.0 / m) * spectrum[i]);
    out.yang = -yang;
    return out;
}

std::vector<double> rhs_vector(const Spectrum& spectrum, const GeometryBackend& backend,
                               const WeightedComplex* complex, RhsMode mode, int count) {
    if (count < 0 || count > spectrum.eigenvalues.size())
        throw InputError("rhs_vector: count out of range");
    std::vector<double> D(count);
    if (mode == RhsMode::geometric) {
        GeometricTerm gt = geometric_term(backend, spectrum.degree);
        for (int i = 0; i < count; ++i)
            D[i] = rhs_geometric(spectrum.eigenvalues[i], backend.m, spectrum.degree, gt.g);
        return D;
    }
    if (spectrum.eigenforms.cols() == 0) {
        for (int i = 0; i < count; ++i)
            D[i] = rhs_exact_closed_form(spectrum.eigenvalues[i], backend, spectrum.degree);
        return D;
    }
    if (!complex) throw InputError("rhs_vector: exact mode on a discrete spectrum needs the complex");
    ExactCurvature curv = exact_curvature(backend, spectrum.degree);
    for (int i = 0; i < count; ++i)
        D[i] = quadrature_rhs(spectrum, backend, *complex, i + 1, curv);
    return D;
}

bool BoundReport::all_pass() const {
    for (const auto& row : rows)
        if (row.mode != "audit" && !row.pass) return false;
    return true;
}

BoundReport bound_suite(const Spectrum& spectrum, const GeometryBackend& backend,
                        const WeightedComplex* complex, const SuiteOptions& options) {
    const int m = backend.m;
    const int p = spectrum.degree;
    const int n = static_cast<int>(spectrum.eigenvalues.size());
    if (options.k_max < 1) throw InputError("bound_suite: k_max must be >= 1");
    if (n < 2) throw InputError("bound_suite: spectrum needs at least two eigenvalues");
    check_sorted(spectrum.eigenvalues, "bound_suite");

    const int kmax = std::min(options.k_max, n - 1);
    const int imax = std::min(options.k_max, n - m); // lp needs i+m entries
    const char* mode_tag = options.mode == RhsMode::exact ? "exact-integral" : "geometric-max";
    std::vector<double> D = rhs_vector(spectrum, backend, complex, options.mode, kmax);

    GeometricTerm gt = geometric_term(backend, p);
    BoundReport report;
    report.provenance.m = m;
    report.provenance.p = p;
    report.provenance.mode = mode_tag;
    report.provenance.g = gt.g;
    report.provenance.min_xsq = gt.min_xsq;
    report.provenance.uniform_c = prefix_uniform_c(D, spectrum.eigenvalues, kmax);
    report.provenance.tolerance = options.tolerance;

    auto push = [&](const std::string& ineq, int index, double bound, double observed,
                    const std::string& mode) {
        BoundRow row;
        row.inequality = ineq;
        row.p = p;
        row.index = index;
        row.bound = bound;
        row.observed = observed;
        row.slack = bound - observed;
        row.pass = row.slack >= -options.tolerance;
        row.mode = mode;
        report.rows.push_back(std::move(row));
    };

    Eigen::Map<const Eigen::VectorXd> lam(spectrum.eigenvalues.data(), n);
    Eigen::Map<const Eigen::VectorXd> Dv(D.data(), kmax);
    for (int k = 1; k <= kmax; ++k)
        push("yang", k, yang_bound(lam.head(k), Dv.head(k), m), lam[k], mode_tag);
    for (int k = 1; k <= kmax; ++k) {
        double c = prefix_uniform_c(D, spectrum.eigenvalues, k);
        push("gap", k, gap_bound(lam.head(k), m, c - 1.0), lam[k] - lam[k - 1], mode_tag);
    }
    for (int i = 1; i <= imax; ++i)
        push("levitin-parnovski", i, D[i - 1],
             D[i - 1] - lp_check(spectrum.eigenvalues, D[i - 1], m, i), mode_tag);
    for (int k = 1; k <= kmax; ++k) {
        double c = prefix_uniform_c(D, spectrum.eigenvalues, k);
        push("cheng-yang", k, cheng_yang_bound(lam[0] + c, m, k), lam[k] + c, mode_tag);
    }

    if (options.classical && spectrum.eigenvalues[0] > 0.0) {
        for (int k = 1; k <= kmax; ++k) {
            ClassicalSlacks cs = classical_checks(spectrum.eigenvalues, m, k);
            double sum = lam.head(k).sum();
            push("classical-ppw", k, 4.0 / (double(m) * k) * sum, lam[k] - lam[k - 1], "audit");
            push("classical-hile-protter", k, cs.hp + double(m) * k / 4.0, double(m) * k / 4.0,
                 "audit");
            push("classical-yang", k, cs.yang, 0.0, "audit");
        }
    }
    return report;
}

} // namespace dhs
