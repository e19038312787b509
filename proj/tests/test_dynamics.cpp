#include <gtest/gtest.h>

#include "kubolab/dynamics.hpp"
#include "kubolab/interactions.hpp"
#include "kubolab/spectral.hpp"

using namespace kubolab;

TEST(Dynamics, GroundStateIsStationaryWithoutDrive) {
  LatticeGeometry g(1, 4, Boundary::torus);
  auto b = enumerate_basis(g, 2, 4);
  auto h = build_example_hamiltonian(dimerized_chain(1.0, 0.3), b);
  auto gs = ground_state(h);
  auto v = potential_operator(sawtooth_potential(1), b);
  DrivingProtocol p(h, v, 0.0, 0.5, bump_switch());
  auto tr = propagate(p, gs.vector, {0.0, 3.0});
  for (const auto& psi : tr.states) EXPECT_NEAR(std::abs(gs.vector.dot(psi)), 1.0, 1e-10);
  EXPECT_LE(tr.max_norm_drift, 1e-10);
}

TEST(Dynamics, RejectsBadParameters) {
  LatticeGeometry g(1, 2, Boundary::cube);
  auto b = enumerate_basis(g, 1, 1);
  auto h = ManyBodyOperator::identity(b);
  EXPECT_THROW(DrivingProtocol(h, h, 0.1, 0.0, bump_switch()), DomainError);
  EXPECT_THROW(DrivingProtocol(h, h, 2.0, 0.5, bump_switch()), DomainError);
}

namespace {

DenseMatrix dense_exp(const DenseMatrix& h, double dt) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
  Vector phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::exp(cplx(0.0, -es.eigenvalues()(i) * dt));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Time-ordered product of dense exponentials (fourth-order two-exponential scheme) with n uniform steps.
Vector reference_solution(const DrivingProtocol& p, const Vector& psi0, double t_end, long n) {
  const DenseMatrix h0 = p.h0.dense(), v = p.v.dense();
  const double r3 = std::sqrt(3.0);
  const double c1 = 0.5 - r3 / 6.0, c2 = 0.5 + r3 / 6.0;
  const double a1 = (3.0 - 2.0 * r3) / 12.0, a2 = (3.0 + 2.0 * r3) / 12.0;
  Vector psi = psi0;
  const double t0 = p.start_time(), h = (t_end - t0) / n;
  for (long k = 0; k < n; ++k) {
    const double t = t0 + k * h, g1 = p.coupling(t + c1 * h), g2 = p.coupling(t + c2 * h);
    psi = dense_exp(0.5 * h0 + (a2 * g1 + a1 * g2) * v, h) * psi;
    psi = dense_exp(0.5 * h0 + (a1 * g1 + a2 * g2) * v, h) * psi;
  }
  return psi;
}

}  // namespace

TEST(Dynamics, MatchesDenseTimeOrderedReference) {
  LatticeGeometry g(1, 2, Boundary::cube);
  auto b = enumerate_basis(g, 1, 1);
  auto h = build_example_hamiltonian(nearest_neighbour_model(1, 1.0), b);
  auto v = potential_operator(linear_potential(1), b);
  auto gs = ground_state(h);
  DrivingProtocol p(h, v, 0.4, 0.5, bump_switch());
  PropagationOptions opt;
  opt.tol = 1e-11;
  auto tr = propagate(p, gs.vector, {1.0}, opt);
  Vector ref = reference_solution(p, gs.vector, 1.0, 10 * std::max<long>(tr.accepted_steps, 1));
  const double fidelity = std::norm(ref.dot(tr.states.back()));
  EXPECT_GE(fidelity, 1.0 - 1e-8);
}

TEST(Dynamics, ConservedChargeDrive) {
  LatticeGeometry g(1, 4, Boundary::torus);
  auto b = enumerate_basis(g, 2, 4);
  auto h = build_example_hamiltonian(dimerized_chain(1.0, 0.3), b);
  auto n = total_number(b);
  auto gs = ground_state(h);
  DrivingProtocol p(h, n, 0.5, 0.3, ramp_switch(2));
  auto tr = propagate(p, gs.vector, {0.0, 2.0});
  auto a = number_operator(b, Mode{g.index({1}), 0});
  const double ref = a.expectation(gs.vector).real();
  for (const auto& psi : tr.states) EXPECT_NEAR(a.expectation(psi).real(), ref, 1e-9);
}

TEST(Dynamics, HeisenbergExpectationTrivialCases) {
  LatticeGeometry g(1, 4, Boundary::torus);
  auto b = enumerate_basis(g, 2, 4);
  auto h = build_example_hamiltonian(dimerized_chain(1.0, 0.3), b);
  auto v = potential_operator(sawtooth_potential(1), b);
  auto gs = ground_state(h);
  auto a = number_operator(b, Mode{g.index({1}), 0});
  DrivingProtocol still(h, v, 0.0, 0.5, bump_switch());
  EXPECT_NEAR(heisenberg_expectation(still, gs.vector, a, 1.0).real(), a.expectation(gs.vector).real(), 1e-9);
  DrivingProtocol driven(h, v, 0.1, 0.5, bump_switch());
  double drift = 1.0;
  EXPECT_NEAR(heisenberg_expectation(driven, gs.vector, ManyBodyOperator::identity(b), 0.5, {}, &drift).real(), 1.0,
              1e-9);
  EXPECT_LE(drift, 1e-9);
  EXPECT_NEAR(heisenberg_expectation(driven, gs.vector, total_number(b), 0.5).real(), 4.0, 1e-8);
}

TEST(Dynamics, RejectsBadInputs) {
  LatticeGeometry g(1, 2, Boundary::cube);
  auto b = enumerate_basis(g, 1, 1);
  auto h = build_example_hamiltonian(nearest_neighbour_model(1, 1.0), b);
  DrivingProtocol p(h, h, 0.1, 0.5, bump_switch());
  Vector unnormalised = Vector::Ones(2);
  EXPECT_THROW(propagate(p, unnormalised, {0.0}), DomainError);
  Vector psi = unnormalised.normalized();
  EXPECT_THROW(propagate(p, psi, {-5.0}), DomainError);
}
