#include "dhs/spectrum.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "dhs/errors.hpp"
#include "dhs/rng.hpp"

namespace dhs {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

double binom_d(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

Eigen::VectorXd pair_residuals(const SpMat& K, const SpMat& M, const Eigen::VectorXd& vals,
                               const Eigen::MatrixXd& vecs, int count) {
    Eigen::VectorXd res(count);
    for (int i = 0; i < count; ++i) {
        Eigen::VectorXd mv = M * vecs.col(i);
        double denom = (1.0 + std::abs(vals[i])) * mv.norm();
        res[i] = denom > 0.0 ? (K * vecs.col(i) - vals[i] * mv).norm() / denom : 0.0;
    }
    return res;
}

void check_inputs(const SpMat& K, const SpMat& M, int count) {
    if (K.rows() != K.cols() || M.rows() != M.cols() || K.rows() != M.rows())
        throw DimensionError("solve_spectrum: K and M must be square and conforming");
    if (count < 1 || count > K.rows())
        throw InputError("solve_spectrum: count must be in [1, dimension]");
    double kmax = 0.0, asym = 0.0;
    SpMat diff = SpMat(K.transpose()) - K;
    for (int c = 0; c < K.outerSize(); ++c)
        for (SpMat::InnerIterator it(K, c); it; ++it) kmax = std::max(kmax, std::abs(it.value()));
    for (int c = 0; c < diff.outerSize(); ++c)
        for (SpMat::InnerIterator it(diff, c); it; ++it) asym = std::max(asym, std::abs(it.value()));
    if (asym > 1e-10 * (kmax + 1.0)) throw InputError("solve_spectrum: stiffness not symmetric");
    Eigen::SimplicialLDLT<SpMat> mchol(M);
    if (mchol.info() != Eigen::Success || mchol.vectorD().minCoeff() <= 0.0)
        throw InputError("solve_spectrum: mass matrix not positive definite");
}

} // namespace

std::vector<std::vector<int>> multiplicity_clusters(const Eigen::VectorXd& ev, double cluster_tol) {
    std::vector<std::vector<int>> out;
    if (ev.size() == 0) return out;
    double tol = cluster_tol;
    if (tol < 0.0) tol = 1e-6 * (ev.cwiseAbs().maxCoeff() + 1.0);
    out.push_back({0});
    for (int i = 1; i < ev.size(); ++i) {
        if (ev[i] - ev[i - 1] < tol)
            out.back().push_back(i);
        else
            out.push_back({i});
    }
    return out;
}

Spectrum solve_spectrum(const SpMat& K, const SpMat& M, int count, const SolveOptions& options) {
    check_inputs(K, M, count);
    const int n = static_cast<int>(K.rows());

    Spectrum sp;
    if (n < options.dense_cutoff) {
        Eigen::MatrixXd Kd(K), Md(M);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Kd, Md);
        if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed");
        sp.eigenvalues = es.eigenvalues().head(count);
        sp.eigenforms = es.eigenvectors().leftCols(count);
    } else {
        if (count > n / 10)
            throw InputError("solve_spectrum: iterative path supports counts up to 10% of dimension");
        // symmetric diagonal scaling: y-problem (D^{-1} K D^{-1}) y = lambda y with
        // D = sqrt(diag M); keeps the iteration well conditioned independent of the
        // mass scale. Lumped masses are diagonal by construction.
        Eigen::VectorXd mdiag = Eigen::VectorXd(M.diagonal());
        if (M.nonZeros() != n)
            throw InputError("solve_spectrum: iterative path requires a diagonal mass matrix");
        Eigen::VectorXd dinv = mdiag.cwiseSqrt().cwiseInverse();
        SpMat Ks = dinv.asDiagonal() * K * dinv.asDiagonal();
        const double sigma = -0.5; // K is PSD, so Ks - sigma I is PD
        SpMat shifted = Ks;
        for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
        Eigen::SimplicialLDLT<SpMat> op(shifted);
        if (op.info() != Eigen::Success)
            throw SolverError("shift-invert factorization failed");

        const int q = std::min(n, count + std::max(16, count / 4));
        Rng rng(options.seed);
        Eigen::MatrixXd X(n, q);
        for (int j = 0; j < q; ++j)
            for (int i = 0; i < n; ++i) X(i, j) = rng.normal();

        double worst = std::numeric_limits<double>::infinity();
        Eigen::VectorXd vals;
        for (int iter = 0; iter < options.max_iterations; ++iter) {
            const int b = static_cast<int>(X.cols());
            Eigen::MatrixXd V(n, 3 * b);
            V.leftCols(b) = X;
            V.middleCols(b, b) = op.solve(X);
            V.rightCols(b) = op.solve(V.middleCols(b, b));
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
            Eigen::MatrixXd B = qr.householderQ() * Eigen::MatrixXd::Identity(n, 3 * b);
            Eigen::MatrixXd A = B.transpose() * (Ks * B);
            A = 0.5 * (A + A.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(A);
            const int take = std::min<int>(q, static_cast<int>(B.cols()));
            X = B * ritz.eigenvectors().leftCols(take);
            vals = ritz.eigenvalues().head(take);
            if (take < count) continue;
            worst = 0.0;
            for (int i = 0; i < count; ++i)
                worst = std::max(worst, (Ks * X.col(i) - vals[i] * X.col(i)).norm() /
                                            (1.0 + std::abs(vals[i])));
            if (worst <= options.tol) break;
        }
        if (!(worst <= options.tol))
            throw SolverError("eigensolver did not converge: max scaled residual " +
                              std::to_string(worst));
        sp.eigenvalues = vals.head(count);
        sp.eigenforms = dinv.asDiagonal() * X.leftCols(count);
    }
    sp.residuals = pair_residuals(K, M, sp.eigenvalues, sp.eigenforms, count);
    sp.clusters = multiplicity_clusters(sp.eigenvalues);
    return sp;
}

Spectrum analytic_sphere_spectrum(int m, int p, int count) {
    if (m < 1) throw DimensionError("analytic_sphere_spectrum: m must be >= 1");
    if (p < 0 || p > m) throw DimensionError("analytic_sphere_spectrum: degree out of range");
    if (count < 1) throw InputError("analytic_sphere_spectrum: count must be >= 1");
    if (!(m == 1 || p == 0 || p == m))
        throw CapabilityError("closed-form spectrum unavailable for degree " + std::to_string(p) +
                              " on the " + std::to_string(m) + "-sphere; use the discrete solver");

    Spectrum sp;
    sp.degree = p;
    sp.analytic = true;
    sp.eigenvalues.resize(count);
    int filled = 0;
    for (int l = 0; filled < count; ++l) {
        double lam = static_cast<double>(l) * (l + m - 1) / m;
        // harmonic multiplicity: C(l+m, m) - C(l+m-2, m)
        long long mult = std::llround(binom_d(l + m, m) - binom_d(l + m - 2, m));
        std::vector<int> cluster;
        for (long long c = 0; c < mult && filled < count; ++c) {
            cluster.push_back(filled);
            sp.eigenvalues[filled++] = lam;
        }
        sp.clusters.push_back(std::move(cluster));
    }
    sp.residuals = Eigen::VectorXd::Zero(count);
    return sp;
}

double coordinate_eigenfunction_check(const WeightedComplex& cx, const GeometryBackend& bk) {
    const int nv = cx.cells(0);
    double worst = 0.0;
    for (int axis = 0; axis < bk.n; ++axis) {
        Eigen::VectorXd u(nv);
        for (int i = 0; i < nv; ++i) u[i] = bk.samples[i].position[axis];
        double unorm = std::sqrt(u.dot(cx.mass[0].cwiseProduct(u)));
        if (unorm == 0.0) continue; // padded ambient coordinate, identically zero
        Eigen::VectorXd res = drift_apply(cx, u) - u;
        worst = std::max(worst, std::sqrt(res.dot(cx.mass[0].cwiseProduct(res))) / unorm);
    }
    return worst;
}

std::string spectrum_to_json(const Spectrum& sp) {
    nlohmann::ordered_json j;
    j["degree"] = sp.degree;
    j["eigenvalues"] = std::vector<double>(sp.eigenvalues.data(),
                                           sp.eigenvalues.data() + sp.eigenvalues.size());
    j["residuals"] =
        std::vector<double>(sp.residuals.data(), sp.residuals.data() + sp.residuals.size());
    nlohmann::ordered_json clusters = nlohmann::ordered_json::array();
    for (const auto& c : sp.clusters) {
        nlohmann::ordered_json group = nlohmann::ordered_json::array();
        for (int idx : c) group.push_back(idx + 1);
        clusters.push_back(std::move(group));
    }
    j["clusters"] = std::move(clusters);
    return j.dump(2);
}

} // namespace dhs
