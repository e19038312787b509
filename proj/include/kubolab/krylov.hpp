#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "kubolab/errors.hpp"
#include "kubolab/operator.hpp"

namespace kubolab::krylov {

using MatVec = std::function<void(const Vector&, Vector&)>;

inline MatVec matvec(const SparseMatrix& m) {
  return [&m](const Vector& x, Vector& y) { y.noalias() = m * x; };
}

inline Vector random_unit(Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = cplx(nd(rng), nd(rng));
  return v.normalized();
}

struct Eigenpairs {
  Eigen::VectorXd values;
  DenseMatrix vectors;  // columns
  int matvecs = 0;
};

/// Lowest `count` eigenpairs of a Hermitian operator by restarted Lanczos with full
/// reorthogonalisation; each pair is found in the orthogonal complement of the previous ones.
inline Eigenpairs lowest_eigenpairs(const MatVec& apply, Eigen::Index dim, int count, double tol,
                                    int cycle = 48, int max_cycles = 400, std::uint64_t seed = 0x5eed) {
  count = static_cast<int>(std::min<Eigen::Index>(count, dim));
  Eigenpairs out;
  out.values.resize(count);
  out.vectors.resize(dim, count);
  std::vector<Vector> found;
  auto orthogonalize = [&](Vector& v, const std::vector<Vector>& against) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : against) v -= u * u.dot(v);
  };
  Vector w(dim);
  for (int target = 0; target < count; ++target) {
    Vector start = random_unit(dim, seed + static_cast<std::uint64_t>(target));
    orthogonalize(start, found);
    start.normalize();
    double theta = 0.0;
    Vector x = start;
    bool converged = false;
    const Eigen::Index room = dim - static_cast<Eigen::Index>(found.size());
    for (int c = 0; c < max_cycles && !converged; ++c) {
      const int m = static_cast<int>(std::min<Eigen::Index>(cycle, room));
      std::vector<Vector> basis;
      std::vector<double> alpha, beta;
      basis.push_back(start);
      for (int j = 0; j < m; ++j) {
        apply(basis[j], w);
        ++out.matvecs;
        double a = basis[j].dot(w).real();
        alpha.push_back(a);
        orthogonalize(w, found);
        for (int pass = 0; pass < 2; ++pass)
          for (const auto& u : basis) w -= u * u.dot(w);
        double b = w.norm();
        if (j + 1 == m || b < 1e-14 * std::max(1.0, std::abs(a))) break;
        beta.push_back(b);
        basis.push_back(w / b);
      }
      const int n = static_cast<int>(alpha.size());
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i) t(i, i) = alpha[i];
      for (int i = 0; i + 1 < n; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      theta = es.eigenvalues()(0);
      x.setZero();
      for (int i = 0; i < n; ++i) x += basis[i] * es.eigenvectors()(i, 0);
      orthogonalize(x, found);
      x.normalize();
      apply(x, w);
      ++out.matvecs;
      theta = x.dot(w).real();
      double res = (w - theta * x).norm();
      if (res <= tol * std::max(1.0, std::abs(theta)) || n >= room) converged = true;
      start = x;
    }
    if (!converged) throw ConvergenceError("Lanczos did not converge");
    found.push_back(x);
    out.values(target) = theta;
    out.vectors.col(target) = x;
  }
  return out;
}

/// exp(-i tau H) v by a Lanczos (Krylov) approximation with a posteriori error control;
/// tau is split into substeps when the Krylov space would exceed `max_dim`.
inline Vector expmv(const MatVec& apply, const Vector& v, double tau, double tol = 1e-13, int max_dim = 40) {
  const double nv = v.norm();
  if (nv == 0.0 || tau == 0.0) return v;
  const Eigen::Index dim = v.size();
  std::vector<Vector> basis;
  std::vector<double> alpha, beta;
  basis.push_back(v / nv);
  Vector w(dim);
  const int mmax = static_cast<int>(std::min<Eigen::Index>(max_dim, dim));
  for (int j = 0; j < mmax; ++j) {
    apply(basis[j], w);
    double a = basis[j].dot(w).real();
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : basis) w -= u * u.dot(w);
    double b = w.norm();
    const int n = j + 1;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) t(i, i) = alpha[i];
    for (int i = 0; i + 1 < n; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    Eigen::VectorXcd phase = (es.eigenvalues().cast<cplx>() * cplx(0.0, -tau)).array().exp();
    Eigen::VectorXcd coeff = es.eigenvectors().cast<cplx>() *
                             (phase.asDiagonal() * es.eigenvectors().row(0).transpose().cast<cplx>());
    const bool exhausted = b < 1e-14 || n == dim;
    const double err = b * std::abs(coeff(n - 1));
    if (exhausted || err <= tol) {
      Vector out = Vector::Zero(dim);
      for (int i = 0; i < n; ++i) out += basis[i] * coeff(i);
      return nv * out;
    }
    if (n == mmax) break;
    beta.push_back(b);
    basis.push_back(w / b);
  }
  Vector half = expmv(apply, v, tau / 2, tol / 2, max_dim);
  return expmv(apply, half, tau / 2, tol / 2, max_dim);
}

/// Solves Q (H - shift) Q x = b on the complement of `ground` (b must be orthogonal to it)
/// by conjugate gradients; Q(H - E0)Q is positive definite there when the ground state is gapped.
inline Vector projected_cg(const MatVec& apply, double shift, const Vector& ground, const Vector& b,
                           double tol = 1e-13, int max_iter = 5000) {
  auto project = [&](Vector& v) { v -= ground * ground.dot(v); };
  Vector rhs = b;
  project(rhs);
  Vector x = Vector::Zero(b.size());
  Vector r = rhs, p = rhs, ap(b.size());
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) return x;
  double rr = r.squaredNorm();
  for (int it = 0; it < max_iter; ++it) {
    apply(p, ap);
    ap -= shift * p;
    project(ap);
    double alpha = rr / p.dot(ap).real();
    x += alpha * p;
    r -= alpha * ap;
    double rr_new = r.squaredNorm();
    if (std::sqrt(rr_new) <= tol * bnorm) return x;
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  throw ConvergenceError("projected CG did not converge");
}

}  // namespace kubolab::krylov
