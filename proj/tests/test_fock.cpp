#include <bit>

#include <gtest/gtest.h>

#include "kubolab/car.hpp"
#include "kubolab/fock.hpp"
#include "kubolab/operator.hpp"

using namespace kubolab;

TEST(Car, PassesForAllModeCounts) {
  for (int m = 1; m <= 12; ++m) {
    auto rep = car_check(m);
    EXPECT_TRUE(rep.passed) << m << " modes: " << rep.first_failure;
  }
}

TEST(Car, BrokenSignRuleIsDetected) {
  EXPECT_FALSE(car_check(3, fullfock::SignRule::broken).passed);
}

TEST(Car, RejectsOutOfRange) {
  EXPECT_THROW(car_check(0), DomainError);
  EXPECT_THROW(car_check(13), ResourceError);
}

TEST(Basis, RankRoundTrip) {
  LatticeGeometry g(1, 5, Boundary::torus);
  auto b = enumerate_basis(g, 2, 4);
  EXPECT_EQ(b->dimension(), 210u);
  for (std::size_t i = 0; i < b->dimension(); ++i) EXPECT_EQ(b->rank(b->state(i)), i);
}

TEST(Basis, BilinearsMatchFullFock) {
  for (int modes = 1; modes <= 6; ++modes)
    for (int n = 0; n <= modes; ++n) {
      LatticeGeometry g(1, modes, Boundary::cube);
      auto b = enumerate_basis(g, 1, n);
      for (int p = 0; p < modes; ++p)
        for (int q = 0; q < modes; ++q) {
          auto op = bilinear(b, Mode{p, 0}, Mode{q, 0});
          EXPECT_EQ((op.dense() - fullfock_bilinear_in_sector(*b, p, q)).norm(), 0.0) << p << "," << q;
        }
    }
}

TEST(Basis, BilinearExamples) {
  LatticeGeometry g(1, 4, Boundary::cube);
  auto b = enumerate_basis(g, 1, 2);
  // |modes 0 and 2 occupied>: a*_3 a_0 hops past the occupied mode 2, sign -1
  std::uint64_t w = 0b0101;
  const auto j = static_cast<Eigen::Index>(b->rank(std::span<const std::uint64_t>(&w, 1)));
  std::uint64_t target = 0b1100;
  const auto i = static_cast<Eigen::Index>(b->rank(std::span<const std::uint64_t>(&target, 1)));
  EXPECT_EQ(bilinear(b, Mode{3, 0}, Mode{0, 0}).dense()(i, j), cplx(-1.0));
  EXPECT_EQ(number_operator(b, Mode{0, 0}).dense()(j, j), cplx(1.0));
  // a*_3 a_1 with mode 1 empty annihilates the state
  EXPECT_EQ(bilinear(b, Mode{3, 0}, Mode{1, 0}).dense().col(j).norm(), 0.0);
}

TEST(Basis, StatesHaveExactlyNParticles) {
  LatticeGeometry g(2, 3, Boundary::torus);
  auto b = enumerate_basis(g, 2, 5);
  EXPECT_EQ(b->dimension(), detail::binomial(18, 5));
  for (std::size_t i = 0; i < b->dimension(); ++i) EXPECT_EQ(std::popcount(b->state(i)[0]), 5);
}
