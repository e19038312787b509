#pragma once

#include <algorithm>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "kubolab/errors.hpp"
#include "kubolab/fock.hpp"

namespace kubolab {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Sparse complex matrix on a fixed-N Fock sector.
class ManyBodyOperator {
public:
  ManyBodyOperator() = default;
  ManyBodyOperator(BasisPtr basis, SparseMatrix m, bool hermitian = false)
      : basis_(std::move(basis)), m_(std::move(m)), hermitian_(hermitian) {
    if (!basis_) throw DomainError("operator without basis");
    auto n = static_cast<Eigen::Index>(basis_->dimension());
    if (m_.rows() != n || m_.cols() != n) throw DomainError("operator dimension does not match basis");
    m_.makeCompressed();
  }

  static ManyBodyOperator zero(BasisPtr basis) {
    auto n = static_cast<Eigen::Index>(basis->dimension());
    return {std::move(basis), SparseMatrix(n, n), true};
  }
  static ManyBodyOperator identity(BasisPtr basis) {
    auto n = static_cast<Eigen::Index>(basis->dimension());
    SparseMatrix id(n, n);
    id.setIdentity();
    return {std::move(basis), std::move(id), true};
  }
  /// Dense input; entries below `drop` in magnitude are not stored.
  static ManyBodyOperator from_dense(BasisPtr basis, const DenseMatrix& d, bool hermitian = false,
                                     double drop = 0.0) {
    SparseMatrix s = d.sparseView(cplx(1.0), drop);
    return {std::move(basis), std::move(s), hermitian};
  }

  const BasisPtr& basis() const { return basis_; }
  const SparseMatrix& matrix() const { return m_; }
  bool hermitian() const { return hermitian_; }
  Eigen::Index dimension() const { return m_.rows(); }
  DenseMatrix dense() const { return DenseMatrix(m_); }

  /// Sets the flag after checking ||M - M^*|| <= tol * max(1, ||M||).
  ManyBodyOperator& mark_hermitian(double tol = 1e-12) {
    if (hermitian_defect() > tol * std::max(1.0, m_.norm())) throw ValidationError("operator is not Hermitian");
    hermitian_ = true;
    return *this;
  }
  double hermitian_defect() const {
    SparseMatrix diff = m_ - SparseMatrix(m_.adjoint());
    return diff.norm();
  }

  ManyBodyOperator adjoint() const { return {basis_, SparseMatrix(m_.adjoint()), hermitian_}; }

  Vector apply(const Vector& v) const { return m_ * v; }

  cplx expectation(const Vector& psi) const { return psi.dot(m_ * psi); }

  /// Frobenius norm.
  double norm() const { return m_.norm(); }

  ManyBodyOperator operator+(const ManyBodyOperator& o) const {
    check_same(o);
    return {basis_, m_ + o.m_, hermitian_ && o.hermitian_};
  }
  ManyBodyOperator operator-(const ManyBodyOperator& o) const {
    check_same(o);
    return {basis_, m_ - o.m_, hermitian_ && o.hermitian_};
  }
  ManyBodyOperator operator*(const ManyBodyOperator& o) const {
    check_same(o);
    return {basis_, SparseMatrix(m_ * o.m_), false};
  }
  ManyBodyOperator scaled(cplx c) const { return {basis_, SparseMatrix(c * m_), hermitian_ && c.imag() == 0.0}; }

  void check_same(const ManyBodyOperator& o) const {
    if (!basis_ || !o.basis_ || !(basis_ == o.basis_ || *basis_ == *o.basis_))
      throw DomainError("operators live on different bases");
  }

private:
  BasisPtr basis_;
  SparseMatrix m_;
  bool hermitian_ = false;
};

inline ManyBodyOperator commutator(const ManyBodyOperator& a, const ManyBodyOperator& b) {
  a.check_same(b);
  return {a.basis(), SparseMatrix(a.matrix() * b.matrix() - b.matrix() * a.matrix()), false};
}

/// Creation (dagger) or annihilation operator on a flat mode index.
struct Ladder {
  int mode = 0;
  bool dagger = false;
};

/// c * (product of ladder operators, leftmost applied last).
struct Monomial {
  cplx coeff{1.0, 0.0};
  std::vector<Ladder> ops;
};

/// Applies a monomial to one occupation word in place; returns the sign or 0 if annihilated.
inline int apply_monomial(const std::vector<Ladder>& ops, std::span<std::uint64_t> w) {
  int sign = 1;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    bool occ = detail::test_bit(w, it->mode);
    if (occ == it->dagger) return 0;
    if (detail::count_below(w, it->mode) & 1) sign = -sign;
    detail::flip_bit(w, it->mode);
  }
  return sign;
}

/// Sum of number-conserving monomials restricted to the basis sector.
inline ManyBodyOperator sector_matrix(const BasisPtr& basis, const std::vector<Monomial>& terms) {
  const auto dim = basis->dimension();
  const int stride = basis->words_per_state();
  for (const auto& t : terms) {
    int balance = 0;
    for (const auto& op : t.ops) {
      if (op.mode < 0 || op.mode >= basis->num_modes()) throw DomainError("ladder operator mode outside basis");
      balance += op.dagger ? 1 : -1;
    }
    if (balance != 0) throw DomainError("monomial does not conserve particle number");
  }
  SparseMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::vector<std::pair<std::size_t, cplx>> column;
  std::vector<std::uint64_t> work(stride);
  std::vector<Eigen::Index> nnz_col(dim, 0);
  std::vector<Eigen::Index> rows;
  std::vector<cplx> vals;
  for (std::size_t j = 0; j < dim; ++j) {
    column.clear();
    auto src = basis->state(j);
    for (const auto& t : terms) {
      std::copy(src.begin(), src.end(), work.begin());
      int sign = apply_monomial(t.ops, work);
      if (sign == 0) continue;
      std::size_t i = basis->rank(work);
      column.emplace_back(i, t.coeff * static_cast<double>(sign));
    }
    std::sort(column.begin(), column.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t c = 0; c < column.size();) {
      std::size_t r = column[c].first;
      cplx v = 0;
      while (c < column.size() && column[c].first == r) v += column[c++].second;
      if (v != cplx(0.0)) {
        rows.push_back(static_cast<Eigen::Index>(r));
        vals.push_back(v);
        ++nnz_col[j];
      }
    }
  }
  m.reserve(static_cast<Eigen::Index>(vals.size()));
  std::size_t k = 0;
  for (std::size_t j = 0; j < dim; ++j) {
    m.startVec(static_cast<Eigen::Index>(j));
    for (Eigen::Index c = 0; c < nnz_col[j]; ++c, ++k) m.insertBack(rows[k], static_cast<Eigen::Index>(j)) = vals[k];
  }
  m.finalize();
  return {basis, std::move(m), false};
}

/// a*_p a_q on the sector, sign (-1)^{occupied modes strictly between p and q}.
inline ManyBodyOperator bilinear(const BasisPtr& basis, Mode creator, Mode annihilator) {
  const int p = basis->mode_index(creator);
  const int q = basis->mode_index(annihilator);
  const auto dim = basis->dimension();
  std::vector<Eigen::Triplet<cplx>> trips;
  std::vector<std::uint64_t> work(basis->words_per_state());
  for (std::size_t j = 0; j < dim; ++j) {
    auto w = basis->state(j);
    if (!detail::test_bit(w, q)) continue;
    if (p == q) {
      trips.emplace_back(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j), 1.0);
      continue;
    }
    if (detail::test_bit(w, p)) continue;
    double sign = (detail::count_between(w, p, q) & 1) ? -1.0 : 1.0;
    std::copy(w.begin(), w.end(), work.begin());
    detail::flip_bit(work, q);
    detail::flip_bit(work, p);
    trips.emplace_back(static_cast<Eigen::Index>(basis->rank(work)), static_cast<Eigen::Index>(j), sign);
  }
  auto n = static_cast<Eigen::Index>(dim);
  SparseMatrix m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return {basis, std::move(m), p == q};
}

/// Occupation n_{x,i}.
inline ManyBodyOperator number_operator(const BasisPtr& basis, Mode m) { return bilinear(basis, m, m); }

/// Total particle number N (diagonal, equals N * Id on the sector).
inline ManyBodyOperator total_number(const BasisPtr& basis) {
  auto op = ManyBodyOperator::zero(basis);
  for (int site = 0; site < basis->geometry().num_sites(); ++site)
    for (int i = 0; i < basis->internal_dof(); ++i) op = op + number_operator(basis, {site, i});
  return op;
}

/// Site density n_x = sum_i n_{x,i}.
inline ManyBodyOperator site_density(const BasisPtr& basis, int site) {
  auto op = ManyBodyOperator::zero(basis);
  for (int i = 0; i < basis->internal_dof(); ++i) op = op + number_operator(basis, {site, i});
  return op;
}

/// Bond current i t (a*_p a_q - a*_q a_p), Hermitian.
inline ManyBodyOperator bond_current(const BasisPtr& basis, Mode p, Mode q, double t = 1.0) {
  auto fwd = bilinear(basis, p, q);
  auto bwd = bilinear(basis, q, p);
  ManyBodyOperator j{basis, SparseMatrix(cplx(0.0, t) * (fwd.matrix() - bwd.matrix())), false};
  return j.mark_hermitian();
}

/// Bond kinetic operator a*_p a_q + a*_q a_p.
inline ManyBodyOperator bond_hopping(const BasisPtr& basis, Mode p, Mode q) {
  auto h = bilinear(basis, p, q) + bilinear(basis, q, p);
  return h.mark_hermitian();
}

}  // namespace kubolab
