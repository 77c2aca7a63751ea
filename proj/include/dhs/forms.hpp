#pragma once
#include <Eigen/Dense>
#include <span>
#include <vector>

#include "dhs/rng.hpp"

namespace dhs {

// Alternating degree-p tensor on R^m, stored by strictly increasing index
// tuples (canonical components). Arbitrary index tuples are resolved by
// sorting with sign. Inner products use the 1/p! normalization, which over
// canonical components is a plain sum of products.
class AlternatingForm {
public:
    AlternatingForm(int m, int p);

    int dim() const { return m_; }
    int degree() const { return p_; }
    int component_count() const { return static_cast<int>(data_.size()); }

    double& canonical(int rank) { return data_[rank]; }
    double canonical(int rank) const { return data_[rank]; }

    // signed component for an arbitrary tuple of length p (0 on repeats)
    double component(std::span<const int> idx) const;
    void add_component(std::span<const int> idx, double value);

    // writes the strictly increasing tuple of canonical rank r into out
    void unrank(int rank, std::span<int> out) const;
    int rank_of(std::span<const int> increasing_idx) const;

    double norm_sq() const;

    static AlternatingForm random_gaussian(int m, int p, Rng& rng);

private:
    int m_ = 0, p_ = 0;
    std::vector<double> data_;
};

double inner(const AlternatingForm& a, const AlternatingForm& b);

// contraction with the basis vector e_j, degree drops by one
AlternatingForm interior_product(const AlternatingForm& phi, int j);

// exterior product with the basis covector w^i, degree rises by one
AlternatingForm basis_wedge(int i, const AlternatingForm& psi);

// slot-sum action of a two-tensor: (T phi)_{i1..ip} = sum_k sum_j T(j, i_k) phi_{i1..j@k..ip}
AlternatingForm wedge_contract(const Eigen::MatrixXd& T, const AlternatingForm& phi);

// same action assembled as sum_{i,j} T(i,j) w^i ^ interior(e_j) phi;
// agrees with wedge_contract for symmetric T
AlternatingForm wedge_contract_via_wedges(const Eigen::MatrixXd& T, const AlternatingForm& phi);

// <T phi, phi> evaluated directly: sum_{j,i1} T(j,i1) sum_{tail} phi_{j,tail} phi_{i1,tail}
double contraction_inner_direct(const Eigen::MatrixXd& T, const AlternatingForm& phi);

// p |T| |phi|^2 - <T phi, phi>  (|T| Frobenius); nonnegative for any T, phi
double contraction_bound_check(const Eigen::MatrixXd& T, const AlternatingForm& phi);

} // namespace dhs
