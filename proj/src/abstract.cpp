#include "dhs/abstract.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>
#include <utility>

#include <json.hpp>

#include "dhs/errors.hpp"
#include "dhs/rng.hpp"

namespace dhs {

namespace {

bool is_square(const Eigen::MatrixXd& m) { return m.rows() == m.cols(); }

bool is_symmetric(const Eigen::MatrixXd& m) {
    if (!is_square(m)) return false;
    double scale = 1.0 + m.cwiseAbs().maxCoeff();
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd random_matrix(Rng& rng, int n) {
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) m(r, c) = rng.normal();
    return m;
}

Eigen::MatrixXd random_symmetric(Rng& rng, int n) { return symmetrized(random_matrix(rng, n)); }

// symmetric matrix with a prescribed (possibly repeated) spectrum
Eigen::MatrixXd with_spectrum(Rng& rng, const Eigen::VectorXd& values) {
    int n = static_cast<int>(values.size());
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, n));
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    return symmetrized(q * values.asDiagonal() * q.transpose());
}

// contiguous groups of eigenvalues closer than tol
std::vector<std::pair<int, int>> eigen_clusters(const Eigen::VectorXd& values, double tol) {
    std::vector<std::pair<int, int>> out;
    int n = static_cast<int>(values.size());
    int start = 0;
    for (int k = 1; k <= n; ++k) {
        if (k == n || values[k] - values[k - 1] > tol) {
            out.emplace_back(start, k - start);
            start = k;
        }
    }
    return out;
}

// deterministic trial loop; slot writes keep results independent of scheduling
void run_trials(int trials, int threads, const std::function<void(int)>& body) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, std::max(1, std::min(trials, hw > 0 ? hw : 1)));
    if (threads <= 1) {
        for (int t = 0; t < trials; ++t) body(t);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (int t = w; t < trials; t += threads) body(t);
        });
    }
    for (auto& th : pool) th.join();
}

struct TrialSlot {
    double violation = 0.0;
    bool failed = false;
    std::string what;
    std::string dump;
};

BatchResult collect(std::string name, int trials, std::vector<TrialSlot>& slots) {
    BatchResult result;
    result.name = std::move(name);
    result.trials = trials;
    for (int t = 0; t < trials; ++t) {
        result.max_violation = std::max(result.max_violation, slots[t].violation);
        if (slots[t].failed)
            result.failures.push_back({t, std::move(slots[t].what), std::move(slots[t].dump)});
    }
    return result;
}

std::vector<std::uint64_t> trial_seeds(std::uint64_t seed, int trials) {
    Rng root(seed);
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(trials));
    for (auto& s : seeds) s = root.next_u64();
    return seeds;
}

void check_batch_args(int trials, int n_max, int n_min) {
    if (trials <= 0) throw InputError("batch: trials must be positive");
    if (n_max < n_min)
        throw InputError("batch: n_max must be at least " + std::to_string(n_min));
}

} // namespace

Eigen::MatrixXd commutator(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (!is_square(a) || !is_square(b) || a.rows() != b.rows())
        throw InputError("commutator: operands must be square matrices of equal size");
    Eigen::MatrixXd c = a * b - b * a;
    if (is_symmetric(a) && is_symmetric(b)) {
        double scale = 1.0 + a.norm() * b.norm();
        if ((c + c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw IdentityError("commutator: result of symmetric operands is not antisymmetric");
    }
    return c;
}

OperatorPair::OperatorPair(Eigen::MatrixXd a, std::vector<Eigen::MatrixXd> bs) {
    if (!is_square(a)) throw InputError("OperatorPair: A must be square");
    A = symmetrized(a);
    perturbers.reserve(bs.size());
    for (auto& b : bs) {
        if (b.rows() != A.rows() || b.cols() != A.cols())
            throw InputError("OperatorPair: perturber size differs from A");
        perturbers.push_back(symmetrized(b));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success) throw SolverError("OperatorPair: eigendecomposition failed");
    values = es.eigenvalues();
    vectors = es.eigenvectors();
    double tol = 1e-12 * (1.0 + A.norm());
    Eigen::MatrixXd resid = A * vectors - vectors * values.asDiagonal();
    for (int i = 0; i < size(); ++i) {
        if (resid.col(i).norm() > tol)
            throw SolverError("OperatorPair: eigenvector residual above tolerance");
    }
}

CommutatorTerms commutator_terms(const OperatorPair& pair, int count) {
    if (count < 1 || count > pair.size())
        throw InputError("commutator_terms: count out of range");
    CommutatorTerms terms;
    terms.rho = Eigen::VectorXd::Zero(count);
    terms.gain = Eigen::VectorXd::Zero(count);
    Eigen::MatrixXd u = pair.vectors.leftCols(count);
    for (const auto& b : pair.perturbers) {
        Eigen::MatrixXd cu = commutator(pair.A, b) * u;
        Eigen::MatrixXd bu = b * u;
        for (int i = 0; i < count; ++i) {
            terms.rho[i] += cu.col(i).dot(bu.col(i));
            terms.gain[i] += cu.col(i).squaredNorm();
        }
    }
    return terms;
}

AhResult ah_check(const OperatorPair& pair, int k) {
    if (k < 1 || k + 1 > pair.size())
        throw InputError("ah_check: need 1 <= k and k+1 <= N");
    CommutatorTerms terms = commutator_terms(pair, k);
    double top = pair.values[k];
    AhResult res;
    for (int i = 0; i < k; ++i) {
        double gap = top - pair.values[i];
        res.lhs += gap * gap * terms.rho[i];
        res.rhs += gap * terms.gain[i];
    }
    res.slack = res.rhs - res.lhs;
    return res;
}

double lpt_identity_residual(const Eigen::MatrixXd& l_in, const Eigen::MatrixXd& g_in, int j) {
    if (!is_square(l_in) || !is_square(g_in) || l_in.rows() != g_in.rows())
        throw InputError("lpt_identity_residual: operands must be square matrices of equal size");
    if (!is_symmetric(l_in) || !is_symmetric(g_in))
        throw InputError("lpt_identity_residual: operands must be symmetric");
    Eigen::MatrixXd l = symmetrized(l_in);
    Eigen::MatrixXd g = symmetrized(g_in);
    int n = static_cast<int>(l.rows());
    if (j < 1 || j > n) throw InputError("lpt_identity_residual: index out of range");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
    if (es.info() != Eigen::Success)
        throw SolverError("lpt_identity_residual: eigendecomposition failed");
    Eigen::VectorXd values = es.eigenvalues();
    Eigen::MatrixXd u = es.eigenvectors();
    Eigen::MatrixXd c = commutator(l, g);
    double gap_tol = 1e-8 * (1.0 + values.cwiseAbs().maxCoeff());

    for (int attempt = 0; attempt < 2; ++attempt) {
        Eigen::VectorXd uj = u.col(j - 1);
        Eigen::VectorXd cu = c * uj;
        Eigen::VectorXd coup = u.transpose() * cu;  // coup[k] = <[L,G]u_j, u_k>
        double coup_tol = 1e-10 * (1.0 + cu.norm());
        bool stray = false;
        double lhs = 0.0;
        for (int k = 0; k < n; ++k) {
            double gap = values[k] - values[j - 1];
            if (std::abs(gap) <= gap_tol) {
                if (std::abs(coup[k]) > coup_tol) stray = true;
            } else {
                lhs += coup[k] * coup[k] / gap;
            }
        }
        double rhs = -0.5 * uj.dot(c * (g * uj) - g * cu);
        if (!stray) return std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
        if (attempt == 0) {
            // adapt the basis inside each degenerate cluster: diagonalizing G
            // there makes the intra-cluster coupling vanish
            for (auto [start, len] : eigen_clusters(values, gap_tol)) {
                if (len < 2) continue;
                Eigen::MatrixXd block = u.middleCols(start, len).transpose() * g * u.middleCols(start, len);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> bs(symmetrized(block));
                if (bs.info() != Eigen::Success)
                    throw SolverError("lpt_identity_residual: cluster re-diagonalization failed");
                u.middleCols(start, len) = u.middleCols(start, len) * bs.eigenvectors();
            }
        }
    }
    throw IdentityError(
        "lpt_identity_residual: degenerate-cluster coupling above tolerance after re-diagonalization");
}

CouplingRotation triangularize_coupling(const Eigen::MatrixXd& l_in,
                                        const std::vector<Eigen::MatrixXd>& gs, int i) {
    if (!is_square(l_in) || !is_symmetric(l_in))
        throw InputError("triangularize_coupling: L must be square symmetric");
    if (gs.empty()) throw InputError("triangularize_coupling: need at least one G");
    Eigen::MatrixXd l = symmetrized(l_in);
    int big = static_cast<int>(l.rows());
    int n = static_cast<int>(gs.size());
    if (i < 1 || n > big - i)
        throw InputError("triangularize_coupling: need 1 <= i and n <= N - i");
    std::vector<Eigen::MatrixXd> family;
    family.reserve(gs.size());
    for (const auto& g : gs) {
        if (g.rows() != big || g.cols() != big)
            throw InputError("triangularize_coupling: G size differs from L");
        family.push_back(symmetrized(g));
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
    if (es.info() != Eigen::Success)
        throw SolverError("triangularize_coupling: eigendecomposition failed");
    Eigen::MatrixXd u = es.eigenvectors();
    Eigen::VectorXd ui = u.col(i - 1);

    Eigen::MatrixXd v(n, n);  // v(k-1, a-1) = <[L, G_a] u_i, u_{i+k}>
    for (int a = 0; a < n; ++a) {
        Eigen::VectorXd w = commutator(l, family[a]) * ui;
        for (int k = 1; k <= n; ++k) v(k - 1, a) = u.col(i - 1 + k).dot(w);
    }

    CouplingRotation out;
    if (n == 1) {
        out.rotation = Eigen::MatrixXd::Identity(1, 1);
        out.coupling = v;
        out.rotated = family;
    } else {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(v.transpose());
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int a = 0; a < n; ++a)
            if (r(a, a) < 0.0) q.col(a) *= -1.0;
        out.rotation = q;
        out.coupling = v * q;
        out.rotated.reserve(family.size());
        for (int a = 0; a < n; ++a) {
            Eigen::MatrixXd mixed = Eigen::MatrixXd::Zero(big, big);
            for (int b = 0; b < n; ++b) mixed += family[b] * q(b, a);
            out.rotated.push_back(std::move(mixed));
        }
    }

    double vtol = 1e-10 * (1.0 + v.norm());
    for (int k = 0; k < n; ++k)
        for (int a = k + 1; a < n; ++a)
            if (std::abs(out.coupling(k, a)) > vtol)
                throw IdentityError("triangularize_coupling: rotated coupling not triangular");
    for (int a = 0; a < n; ++a)
        if (std::abs(out.coupling(a, a)) <= vtol) out.deficient.push_back(a + 1);
    return out;
}

BatchResult ah_batch(int trials, std::uint64_t seed, int n_max, int threads) {
    check_batch_args(trials, n_max, 2);
    auto seeds = trial_seeds(seed, trials);
    std::vector<TrialSlot> slots(static_cast<std::size_t>(trials));
    run_trials(trials, threads, [&](int t) {
        TrialSlot& slot = slots[t];
        try {
            Rng rng(seeds[t]);
            int n = rng.uniform_int(2, n_max);
            int count = rng.uniform_int(1, 3);
            Eigen::MatrixXd a = random_symmetric(rng, n);
            std::vector<Eigen::MatrixXd> bs;
            for (int b = 0; b < count; ++b) bs.push_back(random_symmetric(rng, n));
            OperatorPair pair(a, bs);
            int k = rng.uniform_int(1, n - 1);
            AhResult res = ah_check(pair, k);
            double scale = 1.0 + std::abs(res.rhs);
            slot.violation = std::max(0.0, -res.slack) / scale;
            if (slot.violation > 1e-10) {
                slot.failed = true;
                slot.what = "trace inequality violated";
                nlohmann::json dump;
                dump["A"] = matrix_json(pair.A);
                dump["perturbers"] = nlohmann::json::array();
                for (const auto& b : pair.perturbers) dump["perturbers"].push_back(matrix_json(b));
                dump["k"] = k;
                dump["lhs"] = res.lhs;
                dump["rhs"] = res.rhs;
                dump["slack"] = res.slack;
                slot.dump = dump.dump();
            }
        } catch (const std::exception& e) {
            slot.failed = true;
            slot.violation = 1.0;
            slot.what = e.what();
        }
    });
    return collect("ah", trials, slots);
}

BatchResult lpt_batch(int trials, std::uint64_t seed, int n_max, int threads) {
    check_batch_args(trials, n_max, 2);
    auto seeds = trial_seeds(seed, trials);
    std::vector<TrialSlot> slots(static_cast<std::size_t>(trials));
    run_trials(trials, threads, [&](int t) {
        TrialSlot& slot = slots[t];
        try {
            Rng rng(seeds[t]);
            int n = rng.uniform_int(2, n_max);
            Eigen::MatrixXd l;
            if (t % 4 == 3) {
                // repeated eigenvalues exercise the degenerate-cluster path
                Eigen::VectorXd values(n);
                double current = rng.uniform(-3.0, 3.0);
                for (int k = 0; k < n; ++k) {
                    if (k % 2 == 0 && k > 0) current += 0.5 + rng.uniform();
                    values[k] = current;
                }
                l = with_spectrum(rng, values);
            } else {
                l = random_symmetric(rng, n);
            }
            Eigen::MatrixXd g = random_symmetric(rng, n);
            double worst = 0.0;
            for (int j = 1; j <= n; ++j)
                worst = std::max(worst, lpt_identity_residual(l, g, j));
            slot.violation = worst;
            if (worst > 1e-10) {
                slot.failed = true;
                slot.what = "sum-rule residual above tolerance";
                nlohmann::json dump;
                dump["L"] = matrix_json(l);
                dump["G"] = matrix_json(g);
                dump["residual"] = worst;
                slot.dump = dump.dump();
            }
        } catch (const std::exception& e) {
            slot.failed = true;
            slot.violation = 1.0;
            slot.what = e.what();
        }
    });
    return collect("lpt", trials, slots);
}

BatchResult triangularize_batch(int trials, std::uint64_t seed, int n_max, int threads) {
    check_batch_args(trials, n_max, 3);
    auto seeds = trial_seeds(seed, trials);
    std::vector<TrialSlot> slots(static_cast<std::size_t>(trials));
    run_trials(trials, threads, [&](int t) {
        TrialSlot& slot = slots[t];
        try {
            Rng rng(seeds[t]);
            int big = rng.uniform_int(3, n_max);
            int n = rng.uniform_int(1, std::min(3, big - 1));
            int i = rng.uniform_int(1, big - n);
            Eigen::MatrixXd l = random_symmetric(rng, big);
            std::vector<Eigen::MatrixXd> gs;
            for (int a = 0; a < n; ++a) gs.push_back(random_symmetric(rng, big));
            CouplingRotation rot = triangularize_coupling(l, gs, i);

            double scale = 1.0 + rot.coupling.norm();
            double orth = (rot.rotation.transpose() * rot.rotation -
                           Eigen::MatrixXd::Identity(n, n))
                              .cwiseAbs()
                              .maxCoeff();
            double pattern = 0.0;
            for (int k = 0; k < n; ++k)
                for (int a = k + 1; a < n; ++a)
                    pattern = std::max(pattern, std::abs(rot.coupling(k, a)));
            // recompute the coupling from the rotated family directly
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(l));
            Eigen::MatrixXd u = es.eigenvectors();
            double mismatch = 0.0;
            for (int a = 0; a < n; ++a) {
                Eigen::VectorXd w = commutator(symmetrized(l), rot.rotated[a]) * u.col(i - 1);
                for (int k = 1; k <= n; ++k)
                    mismatch = std::max(mismatch,
                                        std::abs(u.col(i - 1 + k).dot(w) - rot.coupling(k - 1, a)));
            }
            slot.violation = std::max({orth, pattern / scale, mismatch / scale});
            if (slot.violation > 1e-10) {
                slot.failed = true;
                slot.what = "triangularization check failed";
                nlohmann::json dump;
                dump["L"] = matrix_json(l);
                dump["gs"] = nlohmann::json::array();
                for (const auto& g : gs) dump["gs"].push_back(matrix_json(g));
                dump["i"] = i;
                dump["violation"] = slot.violation;
                slot.dump = dump.dump();
            }
        } catch (const std::exception& e) {
            slot.failed = true;
            slot.violation = 1.0;
            slot.what = e.what();
        }
    });
    return collect("triangularize", trials, slots);
}

std::string batch_summary_json(const BatchResult& result) {
    nlohmann::ordered_json summary;
    summary["name"] = result.name;
    summary["trials"] = result.trials;
    summary["max_violation"] = result.max_violation;
    summary["failures"] = nlohmann::ordered_json::array();
    for (const auto& f : result.failures) {
        nlohmann::ordered_json item;
        item["trial"] = f.trial;
        item["what"] = f.what;
        if (!f.dump.empty()) item["detail"] = nlohmann::ordered_json::parse(f.dump);
        summary["failures"].push_back(item);
    }
    return summary.dump(2) + "\n";
}

} // namespace dhs
