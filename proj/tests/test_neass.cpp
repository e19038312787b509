#include <cmath>

#include <gtest/gtest.h>

#include "kubolab/fit.hpp"
#include "kubolab/neass.hpp"

#include "helpers.hpp"

using namespace kubolab;
using fixtures::Chain;

namespace {

struct TwoLevel {
  BasisPtr basis = enumerate_basis(LatticeGeometry(1, 2, Boundary::cube), 1, 1);
  ManyBodyOperator h;
  ManyBodyOperator v;
  double delta = 1.3;
  cplx coupling{0.4, 0.3};

  TwoLevel() {
    DenseMatrix hm = DenseMatrix::Zero(2, 2), vm = DenseMatrix::Zero(2, 2);
    hm(1, 1) = delta;
    vm(1, 0) = coupling;
    vm(0, 1) = std::conj(coupling);
    h = ManyBodyOperator::from_dense(basis, hm, true);
    v = ManyBodyOperator::from_dense(basis, vm, true);
  }
};

double spectral_norm(const DenseMatrix& m) { return Eigen::JacobiSVD<DenseMatrix>(m).singularValues()(0); }

}  // namespace

TEST(S1, TwoLevelNorm) {
  TwoLevel t;
  auto sd = diagonalize(t.h);
  auto s1 = build_S1(sd, t.v);
  EXPECT_NEAR(spectral_norm(s1.dense()), std::abs(t.coupling) / t.delta, 1e-12);
  EXPECT_NEAR(first_order_generator(sd, t.v).norm(), std::abs(t.coupling) / t.delta, 1e-12);
}

TEST(S1, VanishesForConservedPerturbation) {
  Chain c;
  auto sd = diagonalize(c.h);
  EXPECT_LE(build_S1(sd, total_number(c.basis)).norm(), 1e-12);
}

TEST(S1, HermitianAndSolvesCommutatorEquation) {
  Chain c;
  auto sd = diagonalize(c.h);
  auto s1 = build_S1(sd, c.v);
  EXPECT_LE(s1.hermitian_defect(), 1e-12);
  auto rho = sd.ground_projector();
  auto lhs = commutator(s1, rho);
  DenseMatrix residual = cplx(0.0, -1.0) * lhs.dense() + inverse_liouvillian(sd, commutator(c.v, rho)).dense();
  EXPECT_LE(residual.norm(), 1e-10);
}

TEST(Neass, StateProperties) {
  Chain c;
  auto sd = diagonalize(c.h);
  auto gs = ground_state(sd);
  EXPECT_EQ(make_neass(sd, c.h, c.v, 0.0).psi, gs.vector);
  for (double eps : {1e-3, 0.1, 0.7}) EXPECT_NEAR(make_neass(sd, c.h, c.v, eps).psi.norm(), 1.0, 1e-13);
}

TEST(Neass, RankTwoClosedForm) {
  // S1 = -i|x><g| + i|g><x| rotates within span{g, x}: psi = cos(eps s) g - sin(eps s) x/s, s = |x|
  Chain c;
  auto sd = diagonalize(c.h);
  auto gen = first_order_generator(sd, c.v);
  const double s = gen.x.norm();
  for (double eps : {0.01, 0.3, 1.0}) {
    Vector expect = std::cos(eps * s) * gen.ground - std::sin(eps * s) * gen.x / s;
    EXPECT_LE((neass_state(gen, eps) - expect).norm(), 1e-12) << eps;
  }
}

TEST(Neass, FirstOrderExpansionExponent) {
  Chain c;
  auto sd = diagonalize(c.h);
  auto gs = ground_state(sd);
  auto a = number_operator(c.basis, c.mode(1, 0));
  const double sigma = kubo_coefficient_K1(sd, c.v, a);
  const double rho0 = a.expectation(gs.vector).real();
  std::vector<double> eps = logspace(-3, -1, 5), dev;
  for (double e : eps) dev.push_back(make_neass(sd, c.h, c.v, e).expectation(a).real() - rho0 - e * sigma);
  EXPECT_GE(loglog_fit(eps, dev).slope, 1.9);
}

TEST(Neass, StationarityDefect) {
  Chain c;
  auto sd = diagonalize(c.h);
  auto a = number_operator(c.basis, c.mode(1, 0));
  EXPECT_EQ(stationarity_defect(make_neass(sd, c.h, c.v, 0.0), a, 3.0), 0.0);
  EXPECT_EQ(stationarity_defect(make_neass(sd, c.h, c.v, 0.1), a, 0.0), 0.0);
  std::vector<double> eps = logspace(-3, -1, 5), d1, d5;
  for (double e : eps) {
    auto n = make_neass(sd, c.h, c.v, e);
    PerturbedEvolution evo(c.h, c.v, e);
    d1.push_back(stationarity_defect(n, evo, a, 1.0));
    d5.push_back(stationarity_defect(n, evo, a, 5.0));
  }
  EXPECT_GE(loglog_fit(eps, d1).slope, 1.9);
  EXPECT_GE(loglog_fit(eps, d5).slope, 1.9);
}

TEST(K1, TrivialValues) {
  Chain c;
  auto sd = diagonalize(c.h);
  auto a = number_operator(c.basis, c.mode(0, 0));
  EXPECT_NEAR(kubo_coefficient_K1(sd, potential_operator(constant_potential(1, 0.8), c.basis), a), 0.0, 1e-14);
  EXPECT_NEAR(kubo_coefficient_K1(sd, c.v, ManyBodyOperator::identity(c.basis)), 0.0, 1e-14);
}

TEST(K1, TwoLevelHandFormula) {
  // sigma_{V,1} = -2 |V_10|^2 / Delta, the static susceptibility of the ground energy
  TwoLevel t;
  auto sd = diagonalize(t.h);
  EXPECT_NEAR(kubo_coefficient_K1(sd, t.v, t.v), -2.0 * std::norm(t.coupling) / t.delta, 1e-14);
}

TEST(K1, AgreesWithRegularisedKuboAndIterativePath) {
  Chain c;
  auto sd = diagonalize(c.h);
  DiagonalizeOptions it;
  it.dense_cap = 10;
  auto sd_it = diagonalize(c.h, it);
  for (auto a : {number_operator(c.basis, c.mode(0, 0)), number_operator(c.basis, c.mode(1, 0)),
                 bond_hopping(c.basis, c.mode(0, 1), c.mode(1, 0))}) {
    const double k1 = kubo_coefficient_K1(sd, c.v, a);
    EXPECT_NEAR(k1, kubo_regularized(sd, c.v, a, 0.0).real(), 1e-12);
    EXPECT_NEAR(k1, kubo_coefficient_K1(sd_it, c.v, a), 1e-9);
  }
}

TEST(S1, LocalityProfileDecays) {
  LatticeGeometry g(1, 6, Boundary::torus);
  auto b = enumerate_basis(g, 2, 6);
  auto h = build_example_hamiltonian(dimerized_chain(1.0, 0.3), b);
  auto v = potential_operator(sawtooth_potential(1), b);
  auto sd = diagonalize(h);
  auto curve = s1_locality_profile(first_order_generator(sd, v), *b, {g.index({0})});
  ASSERT_GE(curve.size(), 3u);
  for (std::size_t r = 1; r < curve.size(); ++r) EXPECT_LE(curve[r], curve[r - 1]);
  EXPECT_LT(curve.back(), curve.front());
}
