#include <cmath>

#include <gtest/gtest.h>

#include "kubolab/interactions.hpp"
#include "kubolab/spectral.hpp"

using namespace kubolab;

TEST(Lattice, MetricExamples) {
  LatticeGeometry t1(1, 5, Boundary::torus), c1(1, 5, Boundary::cube), t2(2, 3, Boundary::torus);
  EXPECT_EQ(t1.distance(t1.index({-2}), t1.index({2})), 1);
  EXPECT_EQ(c1.distance(c1.index({-2}), c1.index({2})), 4);
  EXPECT_EQ(t2.distance(t2.index({-1, -1}), t2.index({1, 1})), 2);
  EXPECT_EQ(LatticeGeometry::box(2, 3, Boundary::cube).num_sites(), 125);
}

TEST(Lattice, MetricAxioms) {
  for (auto bc : {Boundary::cube, Boundary::torus}) {
    LatticeGeometry g(2, 4, bc);
    for (int x = 0; x < g.num_sites(); ++x)
      for (int y = 0; y < g.num_sites(); ++y) {
        EXPECT_EQ(g.distance(x, y), g.distance(y, x));
        for (int z = 0; z < g.num_sites(); ++z) EXPECT_LE(g.distance(x, z), g.distance(x, y) + g.distance(y, z));
      }
    EXPECT_EQ(g.distance(3, 3), 0);
  }
}

TEST(Basis, DimensionExamples) {
  EXPECT_EQ(enumerate_basis(LatticeGeometry::box(1, 1, Boundary::cube), 1, 1)->dimension(), 3u);
  EXPECT_EQ(enumerate_basis(LatticeGeometry::box(2, 1, Boundary::torus), 1, 2)->dimension(), 10u);
  EXPECT_EQ(enumerate_basis(LatticeGeometry(1, 4, Boundary::cube), 2, 8)->dimension(), 1u);
  EXPECT_THROW(enumerate_basis(LatticeGeometry(1, 2, Boundary::cube), 1, 3), DomainError);
}

TEST(Hamiltonian, ThreeSiteChainSpectrum) {
  auto b = enumerate_basis(LatticeGeometry(1, 3, Boundary::cube), 1, 1);
  auto sd = diagonalize(build_example_hamiltonian(nearest_neighbour_model(1, 1.0), b));
  EXPECT_NEAR(sd.eigenvalues(0), -std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(sd.eigenvalues(1), 0.0, 1e-12);
  EXPECT_NEAR(sd.eigenvalues(2), std::sqrt(2.0), 1e-12);
}

TEST(Hamiltonian, FourSiteRingSpectrum) {
  auto b = enumerate_basis(LatticeGeometry(1, 4, Boundary::torus), 1, 1);
  auto sd = diagonalize(build_example_hamiltonian(nearest_neighbour_model(1, 1.0), b));
  const double expect[] = {-2.0, 0.0, 0.0, 2.0};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(sd.eigenvalues(i), expect[i], 1e-12);
}

TEST(Hamiltonian, OnsiteAndChemicalPotentialShift) {
  auto b = enumerate_basis(LatticeGeometry(1, 4, Boundary::torus), 2, 3);
  auto p = dimerized_chain(1.0, 0.3, 0.2);
  auto base = diagonalize(build_example_hamiltonian(p, b));
  const double c = 0.7, mu = 0.25;
  p.onsite = [c](const Coord&) { return DenseMatrix(c * DenseMatrix::Identity(2, 2)); };
  p.mu = mu;
  auto shifted = diagonalize(build_example_hamiltonian(p, b));
  for (Eigen::Index i = 0; i < base.dimension(); ++i)
    EXPECT_NEAR(shifted.eigenvalues(i) - base.eigenvalues(i), (c - mu) * 3, 1e-10);
}

TEST(Hamiltonian, RejectsNonHermitianStencil) {
  ModelParameters p = nearest_neighbour_model(1, 1.0);
  p.kinetic.pop_back();
  auto b = enumerate_basis(LatticeGeometry(1, 4, Boundary::cube), 1, 1);
  EXPECT_THROW(build_example_hamiltonian(p, b), ValidationError);
}

TEST(Potential, OperatorExamples) {
  auto b = enumerate_basis(LatticeGeometry::box(2, 1, Boundary::cube), 1, 1);
  auto vd = potential_operator(linear_potential(1), b).dense();
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(vd(i, i).real(), i - 2.0);

  auto gt = LatticeGeometry::box(4, 1, Boundary::torus);
  EXPECT_DOUBLE_EQ(sawtooth_potential(1)(gt, {3}), 1.0);

  auto b2 = enumerate_basis(LatticeGeometry(1, 4, Boundary::torus), 2, 3);
  auto vc = potential_operator(constant_potential(1, 0.5), b2);
  EXPECT_NEAR((vc.dense() - 1.5 * DenseMatrix::Identity(vc.dimension(), vc.dimension())).norm(), 0.0, 1e-12);
}

TEST(Potential, LipschitzConstants) {
  EXPECT_DOUBLE_EQ(lipschitz_constant(linear_potential(1), {1, 2, 3, 4}), 1.0);
  EXPECT_DOUBLE_EQ(lipschitz_constant(sawtooth_potential(1), {1, 2, 3, 4, 5}), 1.0);
  EXPECT_DOUBLE_EQ(lipschitz_constant(sawtooth_potential(2, 1), {1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(lipschitz_constant(constant_potential(1, 0.0), {1, 2}), 0.0);
}

TEST(Potential, PointwiseLimits) {
  for (const auto& v : {linear_potential(1), sawtooth_potential(1)}) {
    auto lim = potential_limit_check(v, 2, {2, 3, 4, 5, 6, 7, 8});
    EXPECT_TRUE(lim.stabilized) << v.name;
    for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(lim.limit[i], i - 2.0);
  }
  LipschitzPotential shrinking{"x/k", 1, Boundary::cube,
                               [](const LatticeGeometry& g, const Coord& x) { return double(x[0]) / g.radius(); }};
  auto lim = potential_limit_check(shrinking, 1, {5, 10, 20, 40}, 0.3);
  EXPECT_TRUE(lim.stabilized);
  for (double x : lim.limit) EXPECT_LE(std::abs(x), 0.03);
}

TEST(InteractionNorm, OnsiteTermsHaveZeroNorm) {
  ModelParameters p;
  p.s = 1;
  p.mu = 0.8;
  auto phi = example_interaction(p, 1, Boundary::cube);
  EXPECT_DOUBLE_EQ(interaction_norm(phi, 1.0, 1, 3), 0.0);
}

TEST(InteractionNorm, NearestNeighbourHopping) {
  auto phi = example_interaction(nearest_neighbour_model(1, 1.0), 1, Boundary::cube);
  for (double a : {0.2, 0.5, 1.0, 1.5})
    EXPECT_NEAR(interaction_norm(phi, a, 1, 3), std::max(2.0, std::exp(a)), 1e-12) << a;
}

TEST(InteractionNorm, DecayRateThreshold) {
  const double b = 1.0;
  Interaction phi{1, 1, Boundary::cube, [b](const LatticeGeometry& g) {
                    ModelParameters p;
                    p.s = 1;
                    for (int r = 1; r < g.side(); ++r) p.two_body[r] = DenseMatrix::Constant(1, 1, cplx(std::exp(-b * r)));
                    return example_terms(p, g);
                  }};
  const double below4 = interaction_norm(phi, 0.5, 0, 4), below8 = interaction_norm(phi, 0.5, 0, 8);
  const double above4 = interaction_norm(phi, 1.5, 0, 4), above8 = interaction_norm(phi, 1.5, 0, 8);
  EXPECT_LT(below8 - below4, 0.05 * below4);
  EXPECT_GT(above8, 5.0 * above4);
}

TEST(CauchyDiagnostic, TranslationInvariantHoppingVanishes) {
  auto phi = example_interaction(dimerized_chain(1.0, 0.3, 0.2), 1, Boundary::cube);
  EXPECT_LE(cauchy_diagnostic(phi, 2, 3, 5, 1.0, 1), 1e-14);
  auto torus = example_interaction(nearest_neighbour_model(1, 1.0), 1, Boundary::torus);
  EXPECT_LE(cauchy_diagnostic(torus, 2, 3, 6, 1.0, 1), 1e-14);
  EXPECT_THROW(cauchy_diagnostic(phi, 4, 3, 5, 1.0, 1), DomainError);
}

TEST(CauchyDiagnostic, DecayingBoundaryFieldDecreases) {
  // on-site field exp(-k) everywhere: single-site supports have diameter 0, so n = 0
  Interaction phi{1, 1, Boundary::cube, [](const LatticeGeometry& g) {
                    ModelParameters p = nearest_neighbour_model(1, 1.0);
                    const double field = std::exp(-double(g.radius()));
                    p.onsite = [field](const Coord&) { return DenseMatrix(DenseMatrix::Constant(1, 1, cplx(field))); };
                    return example_terms(p, g);
                  }};
  double prev = 1e300;
  for (int k = 2; k <= 6; ++k) {
    const double c = cauchy_diagnostic(phi, 1, k, k + 1, 0.5, 0);
    EXPECT_LT(c, prev);
    EXPECT_GT(c, 0.0);
    prev = c;
  }
}

TEST(Model, DecayConstant) {
  auto p = dimerized_chain(1.0, 0.3, 0.2);
  const auto g = LatticeGeometry::box(3, 1, Boundary::cube);
  const double c = decay_constant(p, 1.0, g);
  EXPECT_NEAR(c, std::max({1.0, 0.3 * std::exp(1.0), 0.4 * std::exp(1.0)}), 1e-12);
}
