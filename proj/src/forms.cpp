#include "dhs/forms.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dhs/errors.hpp"

namespace dhs {

namespace {

long long binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

// sorts idx in place, returns permutation sign, 0 on repeated indices
int sort_sign(std::span<int> idx) {
    int sign = 1;
    for (std::size_t i = 1; i < idx.size(); ++i) {
        int v = idx[i];
        std::size_t j = i;
        while (j > 0 && idx[j - 1] > v) {
            idx[j] = idx[j - 1];
            --j;
            sign = -sign;
        }
        idx[j] = v;
    }
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (idx[i] == idx[i - 1]) return 0;
    return sign;
}

constexpr int kMaxIdx = 12;

} // namespace

AlternatingForm::AlternatingForm(int m, int p) : m_(m), p_(p) {
    if (m < 1 || m > 8) throw InputError("alternating form: dimension must be in [1,8]");
    if (p < 0 || p > m + 1) throw InputError("alternating form: degree out of range");
    data_.assign(static_cast<std::size_t>(binom(m, p)), 0.0);
}

int AlternatingForm::rank_of(std::span<const int> idx) const {
    // combinatorial number system: rank = sum_k C(idx[k], k+1)
    long long r = 0;
    for (int k = 0; k < p_; ++k) r += binom(idx[k], k + 1);
    return static_cast<int>(r);
}

void AlternatingForm::unrank(int rank, std::span<int> out) const {
    long long r = rank;
    for (int k = p_ - 1; k >= 0; --k) {
        int v = k; // smallest index with C(v, k+1) >= 0
        while (binom(v + 1, k + 1) <= r) ++v;
        out[k] = v;
        r -= binom(v, k + 1);
    }
}

double AlternatingForm::component(std::span<const int> idx) const {
    std::array<int, kMaxIdx> buf{};
    std::copy(idx.begin(), idx.end(), buf.begin());
    std::span<int> s(buf.data(), idx.size());
    int sign = sort_sign(s);
    if (sign == 0) return 0.0;
    return sign * data_[rank_of(std::span<const int>(s.data(), s.size()))];
}

void AlternatingForm::add_component(std::span<const int> idx, double value) {
    std::array<int, kMaxIdx> buf{};
    std::copy(idx.begin(), idx.end(), buf.begin());
    std::span<int> s(buf.data(), idx.size());
    int sign = sort_sign(s);
    if (sign == 0) return;
    data_[rank_of(std::span<const int>(s.data(), s.size()))] += sign * value;
}

double AlternatingForm::norm_sq() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return s;
}

AlternatingForm AlternatingForm::random_gaussian(int m, int p, Rng& rng) {
    AlternatingForm f(m, p);
    for (int r = 0; r < f.component_count(); ++r) f.canonical(r) = rng.normal();
    return f;
}

double inner(const AlternatingForm& a, const AlternatingForm& b) {
    if (a.dim() != b.dim() || a.degree() != b.degree())
        throw DimensionError("inner: mismatched forms");
    double s = 0.0;
    for (int r = 0; r < a.component_count(); ++r) s += a.canonical(r) * b.canonical(r);
    return s;
}

AlternatingForm interior_product(const AlternatingForm& phi, int j) {
    const int m = phi.dim(), p = phi.degree();
    if (j < 0 || j >= m) throw DimensionError("interior_product: index out of range");
    AlternatingForm out(m, p > 0 ? p - 1 : 0);
    if (p == 0) return out; // contraction of a scalar is zero
    std::array<int, kMaxIdx> tail{}, full{};
    for (int r = 0; r < out.component_count(); ++r) {
        out.unrank(r, std::span<int>(tail.data(), p - 1));
        full[0] = j;
        std::copy_n(tail.data(), p - 1, full.data() + 1);
        out.canonical(r) = phi.component(std::span<const int>(full.data(), p));
    }
    return out;
}

AlternatingForm basis_wedge(int i, const AlternatingForm& psi) {
    const int m = psi.dim(), p = psi.degree();
    if (i < 0 || i >= m) throw DimensionError("basis_wedge: index out of range");
    AlternatingForm out(m, p + 1);
    std::array<int, kMaxIdx> idx{}, sub{};
    for (int r = 0; r < out.component_count(); ++r) {
        out.unrank(r, std::span<int>(idx.data(), p + 1));
        // (w^i ^ psi)_{j0..jp} = sum_k (-1)^k delta(i, j_k) psi_{j0.. without j_k ..jp}
        double v = 0.0;
        for (int k = 0; k <= p; ++k) {
            if (idx[k] != i) continue;
            int t = 0;
            for (int q = 0; q <= p; ++q)
                if (q != k) sub[t++] = idx[q];
            double s = psi.component(std::span<const int>(sub.data(), p));
            v += (k % 2 == 0) ? s : -s;
        }
        out.canonical(r) = v;
    }
    return out;
}

AlternatingForm wedge_contract(const Eigen::MatrixXd& T, const AlternatingForm& phi) {
    const int m = phi.dim(), p = phi.degree();
    if (T.rows() != m || T.cols() != m) throw DimensionError("wedge_contract: tensor size mismatch");
    AlternatingForm out(m, p);
    if (p == 0) return out; // zero form by convention
    std::array<int, kMaxIdx> idx{}, mod{};
    for (int r = 0; r < out.component_count(); ++r) {
        out.unrank(r, std::span<int>(idx.data(), p));
        double v = 0.0;
        for (int k = 0; k < p; ++k) {
            std::copy_n(idx.data(), p, mod.data());
            for (int j = 0; j < m; ++j) {
                double t = T(j, idx[k]);
                if (t == 0.0) continue;
                mod[k] = j;
                v += t * phi.component(std::span<const int>(mod.data(), p));
            }
        }
        out.canonical(r) = v;
    }
    return out;
}

AlternatingForm wedge_contract_via_wedges(const Eigen::MatrixXd& T, const AlternatingForm& phi) {
    const int m = phi.dim(), p = phi.degree();
    if (T.rows() != m || T.cols() != m) throw DimensionError("wedge_contract_via_wedges: tensor size mismatch");
    AlternatingForm out(m, p);
    if (p == 0) return out;
    for (int j = 0; j < m; ++j) {
        AlternatingForm cut = interior_product(phi, j);
        for (int i = 0; i < m; ++i) {
            if (T(i, j) == 0.0) continue;
            AlternatingForm w = basis_wedge(i, cut);
            for (int r = 0; r < out.component_count(); ++r)
                out.canonical(r) += T(i, j) * w.canonical(r);
        }
    }
    return out;
}

double contraction_inner_direct(const Eigen::MatrixXd& T, const AlternatingForm& phi) {
    const int m = phi.dim(), p = phi.degree();
    if (T.rows() != m || T.cols() != m) throw DimensionError("contraction_inner_direct: tensor size mismatch");
    if (p == 0) return 0.0;
    // sum over canonical tails: the 1/(p-1)! normalization cancels the tail permutations
    AlternatingForm tails(m, p - 1);
    std::array<int, kMaxIdx> tail{}, full{};
    double total = 0.0;
    for (int r = 0; r < tails.component_count(); ++r) {
        tails.unrank(r, std::span<int>(tail.data(), p - 1));
        std::copy_n(tail.data(), p - 1, full.data() + 1);
        for (int j = 0; j < m; ++j) {
            full[0] = j;
            double pj = phi.component(std::span<const int>(full.data(), p));
            if (pj == 0.0) continue;
            for (int i1 = 0; i1 < m; ++i1) {
                double t = T(j, i1);
                if (t == 0.0) continue;
                full[0] = i1;
                total += t * pj * phi.component(std::span<const int>(full.data(), p));
                full[0] = j;
            }
        }
    }
    return total;
}

double contraction_bound_check(const Eigen::MatrixXd& T, const AlternatingForm& phi) {
    double tn = T.norm(); // Frobenius
    return phi.degree() * tn * phi.norm_sq() - inner(wedge_contract(T, phi), phi);
}

} // namespace dhs
