#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include "kubolab/krylov.hpp"
#include "kubolab/operator.hpp"
#include "kubolab/switching.hpp"

namespace kubolab {

struct DiagonalizeOptions {
  Eigen::Index dense_cap = 1000;  // full dense decomposition up to this dimension
  int lowest = 2;                 // eigenpairs computed above the cap
  double lanczos_tol = 1e-11;
  std::uint64_t seed = 0x5eed;    // Lanczos start vectors
};

/// Eigen-decomposition of a Hermitian Hamiltonian on a Fock sector.
///
/// `complete` is false when only the lowest eigenpairs were computed (iterative path);
/// operations that need every eigenpair refuse such data.
struct SpectralData {
  BasisPtr basis;
  Eigen::VectorXd eigenvalues;  // ascending
  DenseMatrix eigenvectors;     // columns, orthonormal
  bool complete = true;
  double h_norm = 0.0;          // spectral norm (dense) or an upper bound (iterative)
  const SparseMatrix* hamiltonian = nullptr;  // for iterative follow-up work; may dangle if H is gone

  Eigen::Index dimension() const { return static_cast<Eigen::Index>(basis->dimension()); }
  double ground_energy() const { return eigenvalues(0); }
  /// E1 - E0, +infinity for a one-dimensional sector.
  double gap() const {
    if (dimension() == 1) return std::numeric_limits<double>::infinity();
    return eigenvalues(1) - eigenvalues(0);
  }
  Vector ground_vector() const { return eigenvectors.col(0); }
  double degeneracy_tolerance() const { return 1e-8 * std::max(1.0, h_norm); }
  bool degenerate_ground() const { return dimension() > 1 && gap() < degeneracy_tolerance(); }

  void require_complete(const char* what) const {
    if (!complete) throw PreconditionError(std::string(what) + " needs the full spectrum (dimension above dense cap)");
  }

  ManyBodyOperator ground_projector() const {
    Vector g = ground_vector();
    return ManyBodyOperator::from_dense(basis, g * g.adjoint(), true);
  }
};

inline double infinity_norm_bound(const SparseMatrix& m) {
  Eigen::VectorXd col = Eigen::VectorXd::Zero(m.cols());
  for (Eigen::Index j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it) col(j) += std::abs(it.value());
  return col.size() ? col.maxCoeff() : 0.0;
}

inline SpectralData diagonalize(const ManyBodyOperator& h, const DiagonalizeOptions& opt = {}) {
  if (h.hermitian_defect() > 1e-12 * std::max(1.0, h.norm())) throw PreconditionError("diagonalize: H is not Hermitian");
  SpectralData sd;
  sd.basis = h.basis();
  sd.hamiltonian = &h.matrix();
  const Eigen::Index dim = h.dimension();
  if (dim <= opt.dense_cap) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h.dense());
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
    sd.eigenvalues = es.eigenvalues();
    sd.eigenvectors = es.eigenvectors();
    sd.complete = true;
    sd.h_norm = dim ? std::max(std::abs(sd.eigenvalues(0)), std::abs(sd.eigenvalues(dim - 1))) : 0.0;
  } else {
    sd.h_norm = infinity_norm_bound(h.matrix());
    auto pairs = krylov::lowest_eigenpairs(krylov::matvec(h.matrix()), dim, opt.lowest, opt.lanczos_tol, 48, 400, opt.seed);
    sd.eigenvalues = pairs.values;
    sd.eigenvectors = pairs.vectors;
    sd.complete = false;
  }
  return sd;
}

struct GroundState {
  Vector vector;
  double energy = 0.0;
  double gap = 0.0;  // +infinity for a one-dimensional sector
};

/// Simple gapped ground state or a GapError.
inline GroundState ground_state(const SpectralData& sd, double degeneracy_tol = -1.0) {
  if (degeneracy_tol < 0.0) degeneracy_tol = sd.degeneracy_tolerance();
  if (sd.dimension() > 1 && sd.gap() < degeneracy_tol)
    throw GapError("gap assumption violated: ground state is degenerate (E1 - E0 = " + std::to_string(sd.gap()) + ")");
  return {sd.ground_vector(), sd.ground_energy(), sd.gap()};
}

inline GroundState ground_state(const ManyBodyOperator& h, double degeneracy_tol = -1.0,
                                const DiagonalizeOptions& opt = {}) {
  return ground_state(diagonalize(h, opt), degeneracy_tol);
}

/// L_H(A) = [H, A].
inline ManyBodyOperator liouvillian_apply(const ManyBodyOperator& h, const ManyBodyOperator& a) { return commutator(h, a); }

/// Dense matrix of A in the eigenbasis, U^* A U.
inline DenseMatrix to_eigenbasis(const SpectralData& sd, const ManyBodyOperator& a) {
  return sd.eigenvectors.adjoint() * (a.matrix() * sd.eigenvectors);
}

/// L_H^{-1} on the off-diagonal block: X_nm = B_nm / (E_n - E_m), zero on (near-)degenerate pairs.
/// B must carry no weight on degenerate pairs (relative tolerance `tol`).
inline ManyBodyOperator inverse_liouvillian(const SpectralData& sd, const ManyBodyOperator& b, double tol = 1e-10) {
  sd.require_complete("inverse_liouvillian");
  if (!(*b.basis() == *sd.basis)) throw DomainError("inverse_liouvillian: basis mismatch");
  DenseMatrix bp = to_eigenbasis(sd, b);
  const Eigen::Index n = bp.rows();
  const double deg = sd.degeneracy_tolerance();
  double diag_mass = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = sd.eigenvalues(i) - sd.eigenvalues(j);
      if (std::abs(w) <= deg) {
        diag_mass += std::norm(bp(i, j));
        bp(i, j) = 0.0;
      } else {
        bp(i, j) /= w;
      }
    }
  const double bnorm = b.norm();
  if (std::sqrt(diag_mass) > tol * std::max(bnorm, 1e-300) && bnorm > 0.0)
    throw PreconditionError("inverse_liouvillian: B has weight on the diagonal/degenerate block of H");
  DenseMatrix x = sd.eigenvectors * bp * sd.eigenvectors.adjoint();
  bool herm = (x - x.adjoint()).norm() <= 1e-12 * std::max(1.0, x.norm());
  return ManyBodyOperator::from_dense(sd.basis, x, herm);
}

/// -i lim int_{-inf}^0 e^{eta s} tr(e^{iHs}[V, rho0]e^{-iHs} A) ds for the ground state rho0,
/// evaluated in the eigenbasis as -sum_{n != m} [V,rho0]_nm A_mn / (E_n - E_m - i eta).
/// eta = 0 uses the exact spectral inverse. Real and imaginary parts are both returned.
inline cplx kubo_regularized(const SpectralData& sd, const ManyBodyOperator& v, const ManyBodyOperator& a, double eta) {
  if (eta < 0.0) throw DomainError("kubo_regularized: eta must be >= 0");
  sd.require_complete("kubo_regularized");
  const Vector g = sd.ground_vector();
  const Vector vg = sd.eigenvectors.adjoint() * (v.matrix() * g);                 // V_{n0}
  const Vector ag = sd.eigenvectors.adjoint() * (a.matrix() * g);                 // A_{n0}
  const Vector gv = sd.eigenvectors.adjoint() * (v.matrix().adjoint() * g);       // conj(V_{0n})
  const Vector ga = sd.eigenvectors.adjoint() * (a.matrix().adjoint() * g);       // conj(A_{0n})
  const double deg = sd.degeneracy_tolerance();
  cplx sum = 0.0;
  for (Eigen::Index n = 1; n < vg.size(); ++n) {
    const double w = sd.eigenvalues(n) - sd.eigenvalues(0);
    if (eta == 0.0 && std::abs(w) <= deg) continue;
    // pair (n,0): B_{n0} = V_{n0}; pair (0,n): B_{0n} = -V_{0n}
    sum += vg(n) * std::conj(ga(n)) / cplx(w, -eta);
    sum -= std::conj(gv(n)) * ag(n) / cplx(-w, -eta);
  }
  return -sum;
}

/// Fourier weight w(t): real, odd, integrable, with int w(t) e^{i omega t} dt = -i/omega for |omega| >= gap.
///
/// w(t) = -sgn(t)/2 + (1/pi) int_0^gap chi(omega) sin(omega t)/omega d omega, where chi is a C^infinity
/// cutoff equal to 1 at 0 and vanishing for |omega| >= gap (built from the bump switching profile).
/// The omega quadrature is fixed at construction and resolves sin(omega t) up to |t| = t_max.
class InverseLiouvillianWeight {
public:
  InverseLiouvillianWeight(double gap, double t_max) : gap_(gap) {
    if (!(gap > 0.0)) throw DomainError("gap parameter must be positive");
    const auto bump = bump_switch();
    const int panels = std::max(4, static_cast<int>(std::ceil(gap * t_max / 2.0)) + 4);
    const double h = gap / panels;
    constexpr int order = 30;
    const auto& abscissa = boost::math::quadrature::gauss<double, order>::abscissa();
    const auto& weights = boost::math::quadrature::gauss<double, order>::weights();
    for (int p = 0; p < panels; ++p) {
      const double mid = (p + 0.5) * h, half = 0.5 * h;
      for (std::size_t i = 0; i < abscissa.size(); ++i)
        for (int sgn : {1, -1}) {
          if (abscissa[i] == 0.0 && sgn < 0) continue;
          const double w = mid + sgn * half * abscissa[i];
          omega_.push_back(w);
          coeff_.push_back(half * weights[i] * (1.0 - bump(w / gap - 1.0)) / w);
        }
    }
  }
  double operator()(double t) const {
    if (t == 0.0) return 0.0;
    const double at = std::abs(t);
    double sum = 0.0;
    for (std::size_t i = 0; i < omega_.size(); ++i) sum += coeff_[i] * std::sin(omega_[i] * at);
    const double val = -0.5 + sum / M_PI;
    return t > 0 ? val : -val;
  }
  double gap() const { return gap_; }

private:
  double gap_;
  std::vector<double> omega_, coeff_;
};

struct WeightedInverseResult {
  ManyBodyOperator op;
  double quadrature_error = 0.0;  // max |i*hat w_T(omega) - 1/omega| over eigenvalue differences >= gap
  bool within_tolerance = false;
};

/// i int_{-T}^{T} w(t) e^{iHt} B e^{-iHt} dt by composite Gauss quadrature in time, applied in the eigenbasis.
/// Agrees with inverse_liouvillian on matrix elements with |E_n - E_m| >= gap_parameter.
inline WeightedInverseResult weighted_inverse_liouvillian(const SpectralData& sd, const ManyBodyOperator& b,
                                                          double gap_parameter, double time_cutoff,
                                                          double tolerance = 1e-6) {
  sd.require_complete("weighted_inverse_liouvillian");
  if (!(time_cutoff > 0.0)) throw DomainError("time cutoff must be positive");
  InverseLiouvillianWeight weight(gap_parameter, time_cutoff);
  // time nodes on [0, T]; w is odd so the integral over [-T, T] of w(t) e^{i omega t} is 2i int_0^T w sin
  const double span = sd.eigenvalues(sd.dimension() - 1) - sd.eigenvalues(0);
  const int panels = std::max(8, static_cast<int>(std::ceil(time_cutoff * std::max(span, gap_parameter) / 2.0)) + 8);
  const double h = time_cutoff / panels;
  constexpr int order = 20;
  const auto& abscissa = boost::math::quadrature::gauss<double, order>::abscissa();
  const auto& weights = boost::math::quadrature::gauss<double, order>::weights();
  std::vector<double> nodes, wts, wvals;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h, half = 0.5 * h;
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      for (int sgn : {1, -1}) {
        if (abscissa[i] == 0.0 && sgn < 0) continue;
        nodes.push_back(mid + sgn * half * abscissa[i]);
        wts.push_back(half * weights[i]);
      }
    }
  }
  for (double t : nodes) wvals.push_back(weight(t));
  auto transform = [&](double omega) {  // i * int_{-T}^{T} w(t) e^{i omega t} dt
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += wts[i] * wvals[i] * std::sin(omega * nodes[i]);
    return -2.0 * s;
  };
  DenseMatrix bp = to_eigenbasis(sd, b);
  const Eigen::Index n = bp.rows();
  std::vector<std::pair<double, double>> cache;
  auto lookup = [&](double omega) {
    for (const auto& [w, val] : cache)
      if (std::abs(w - omega) <= 1e-13 * std::max(1.0, std::abs(omega))) return val;
    double val = transform(omega);
    cache.emplace_back(omega, val);
    return val;
  };
  double err = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = sd.eigenvalues(i) - sd.eigenvalues(j);
      if (w == 0.0 || bp(i, j) == cplx(0.0)) {
        bp(i, j) = 0.0;
        continue;
      }
      const double f = w > 0 ? lookup(w) : -lookup(-w);
      if (std::abs(w) >= gap_parameter) err = std::max(err, std::abs(f - 1.0 / w) * std::abs(w));
      bp(i, j) *= f;
    }
  DenseMatrix x = sd.eigenvectors * bp * sd.eigenvectors.adjoint();
  WeightedInverseResult out{ManyBodyOperator::from_dense(sd.basis, x, false), err, err <= tolerance};
  return out;
}

}  // namespace kubolab
