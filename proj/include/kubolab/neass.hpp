#pragma once

#include <bit>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "kubolab/krylov.hpp"
#include "kubolab/lattice.hpp"
#include "kubolab/spectral.hpp"

namespace kubolab {

/// Solution x of (H - E0) x = Q V g on the complement of the ground vector g:
/// x = sum_{n != 0} V_{n0} / (E_n - E0) |n>.
inline Vector reduced_resolvent_action(const SpectralData& sd, const SparseMatrix& v, double tol = 1e-13) {
  const Vector g = sd.ground_vector();
  Vector vg = v * g;
  vg -= g * g.dot(vg);
  if (sd.complete) {
    Vector c = sd.eigenvectors.adjoint() * vg;
    c(0) = 0.0;
    const double deg = sd.degeneracy_tolerance();
    for (Eigen::Index n = 1; n < c.size(); ++n) {
      const double w = sd.eigenvalues(n) - sd.eigenvalues(0);
      if (std::abs(w) <= deg) {
        if (std::abs(c(n)) > 1e-10 * std::max(1.0, vg.norm())) throw GapError("ground state is degenerate");
        c(n) = 0.0;
      } else {
        c(n) /= w;
      }
    }
    return sd.eigenvectors * c;
  }
  if (!sd.hamiltonian) throw PreconditionError("reduced_resolvent_action: iterative data carries no Hamiltonian");
  return krylov::projected_cg(krylov::matvec(*sd.hamiltonian), sd.ground_energy(), g, vg, tol);
}

/// First-order NEASS generator S1 = -i|x><g| + i|g><x|, stored in rank-two form.
struct FirstOrderGenerator {
  Vector ground;
  Vector x;  // reduced resolvent applied to V g

  void apply(const Vector& in, Vector& out) const {
    out = cplx(0.0, -1.0) * x * ground.dot(in) + cplx(0.0, 1.0) * ground * x.dot(in);
  }
  /// Dense operator form; only for moderate dimensions.
  ManyBodyOperator to_operator(const BasisPtr& basis) const {
    DenseMatrix m = cplx(0.0, -1.0) * x * ground.adjoint() + cplx(0.0, 1.0) * ground * x.adjoint();
    return ManyBodyOperator::from_dense(basis, m, true);
  }
  double norm() const { return x.norm(); }  // spectral norm of S1
};

inline FirstOrderGenerator first_order_generator(const SpectralData& sd, const ManyBodyOperator& v) {
  if (!v.hermitian()) throw DomainError("build_S1: perturbation must be Hermitian");
  ground_state(sd);
  return {sd.ground_vector(), reduced_resolvent_action(sd, v.matrix())};
}

/// S1 with -i[S1, rho0] = -L^{-1}([V, rho0]); in the eigenbasis (S1)_{n0} = -i V_{n0}/(E_n - E0).
inline ManyBodyOperator build_S1(const SpectralData& sd, const ManyBodyOperator& v) {
  return first_order_generator(sd, v).to_operator(sd.basis);
}

/// First-order non-equilibrium almost-stationary state psi_eps = exp(-i eps S1) g.
struct Neass {
  ManyBodyOperator h0;
  ManyBodyOperator v;
  FirstOrderGenerator s1;
  double epsilon = 0.0;
  Vector psi;

  /// Pi_eps(A) = <psi_eps|A|psi_eps>.
  cplx expectation(const ManyBodyOperator& a) const { return a.expectation(psi); }
};

inline Vector neass_state(const FirstOrderGenerator& s1, double epsilon) {
  if (epsilon == 0.0 || s1.norm() == 0.0) return s1.ground;
  return krylov::expmv([&s1](const Vector& in, Vector& out) { s1.apply(in, out); }, s1.ground, epsilon, 1e-15);
}

inline Neass make_neass(const SpectralData& sd, const ManyBodyOperator& h0, const ManyBodyOperator& v, double epsilon) {
  h0.check_same(v);
  auto s1 = first_order_generator(sd, v);
  Vector psi = neass_state(s1, epsilon);
  return {h0, v, std::move(s1), epsilon, std::move(psi)};
}

/// sigma_{A,1} = tr(L^{-1}([rho0, V]) A). Dense data uses the spectral inverse Liouvillian;
/// iterative data uses sigma = -(<g|A|x> + <x'|A|g>) with x, x' the reduced resolvent on V g, V* g.
inline double kubo_coefficient_K1(const SpectralData& sd, const ManyBodyOperator& v, const ManyBodyOperator& a) {
  v.check_same(a);
  ground_state(sd);
  if (sd.complete) {
    auto rho = sd.ground_projector();
    auto x = inverse_liouvillian(sd, commutator(v, rho));
    cplx tr = (x.matrix() * a.matrix()).eval().diagonal().sum();
    return -tr.real();
  }
  const Vector g = sd.ground_vector();
  Vector x = reduced_resolvent_action(sd, v.matrix());
  Vector xa = v.hermitian() ? x : reduced_resolvent_action(sd, SparseMatrix(v.matrix().adjoint()));
  cplx s = g.dot(a.matrix() * x) + xa.dot(a.matrix() * g);
  return -s.real();
}

/// Evolution under the static perturbed Hamiltonian H0 + eps V by its exact eigen-decomposition.
class PerturbedEvolution {
 public:
  PerturbedEvolution(const ManyBodyOperator& h0, const ManyBodyOperator& v, double epsilon) {
    h0.check_same(v);
    DenseMatrix h = (h0.matrix() + epsilon * v.matrix()).toDense();
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
    if (es.info() != Eigen::Success) throw ConvergenceError("perturbed Hamiltonian diagonalisation failed");
    values_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
  }
  Vector evolve(const Vector& psi, double t) const {
    Vector c = vectors_.adjoint() * psi;
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::exp(cplx(0.0, -values_(i) * t));
    return vectors_ * c;
  }

 private:
  Eigen::VectorXd values_;
  DenseMatrix vectors_;
};

/// |<psi_eps(t)|A|psi_eps(t)> - <psi_eps|A|psi_eps>| with psi_eps(t) = exp(-i H_eps t) psi_eps.
inline double stationarity_defect(const Neass& n, const PerturbedEvolution& evo, const ManyBodyOperator& a, double t) {
  if (t == 0.0 || n.epsilon == 0.0) return 0.0;
  Vector pt = evo.evolve(n.psi, t);
  return std::abs(a.expectation(pt) - a.expectation(n.psi));
}

inline double stationarity_defect(const Neass& n, const ManyBodyOperator& a, double t) {
  if (t == 0.0 || n.epsilon == 0.0) return 0.0;
  return stationarity_defect(n, PerturbedEvolution(n.h0, n.v, n.epsilon), a, t);
}

/// Largest |(S1)_{ij}| over occupation-state pairs whose differing modes all sit at l1 distance >= r
/// from `region`, for r = 0, 1, ..., returned as a decay curve.
inline std::vector<double> s1_locality_profile(const FirstOrderGenerator& s1, const FockBasis& basis,
                                               const std::vector<int>& region) {
  const auto& geom = basis.geometry();
  const int s = basis.internal_dof();
  std::vector<int> site_distance(geom.num_sites(), 0);
  int rmax = 0;
  for (int x = 0; x < geom.num_sites(); ++x) {
    int d = std::numeric_limits<int>::max();
    for (int y : region) d = std::min(d, geom.distance(x, y));
    site_distance[x] = region.empty() ? 0 : d;
    rmax = std::max(rmax, site_distance[x]);
  }
  std::vector<double> curve(rmax + 1, 0.0);
  const auto dim = basis.dimension();
  const int words = basis.words_per_state();
  for (std::size_t i = 0; i < dim; ++i) {
    auto wi = basis.state(i);
    for (std::size_t j = 0; j < dim; ++j) {
      if (i == j) continue;
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      const double m = std::abs(cplx(0.0, -1.0) * s1.x(ii) * std::conj(s1.ground(jj)) +
                                cplx(0.0, 1.0) * s1.ground(ii) * std::conj(s1.x(jj)));
      if (m == 0.0) continue;
      auto wj = basis.state(j);
      int closest = rmax;
      for (int k = 0; k < words; ++k) {
        std::uint64_t diff = wi[k] ^ wj[k];
        while (diff) {
          const int mode = 64 * k + std::countr_zero(diff);
          diff &= diff - 1;
          closest = std::min(closest, site_distance[mode / s]);
        }
      }
      for (int r = 0; r <= closest; ++r) curve[r] = std::max(curve[r], m);
    }
  }
  return curve;
}

}  // namespace kubolab
