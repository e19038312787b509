#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "kubolab/switching.hpp"

using namespace kubolab;

TEST(Switching, BumpEndpointsAndSymmetry) {
  auto f = bump_switch();
  EXPECT_EQ(f(-1.0), 0.0);
  EXPECT_EQ(f(-3.0), 0.0);
  EXPECT_EQ(f(0.0), 1.0);
  EXPECT_EQ(f(2.0), 1.0);
  EXPECT_NEAR(f(-0.5), 0.5, 1e-15);
  for (double t : {-0.9, -0.75, -0.6, -0.1}) EXPECT_NEAR(f(t) + f(-1.0 - t), 1.0, 1e-14) << t;
}

TEST(Switching, BumpMatchesIndependentQuadrature) {
  auto f = bump_switch();
  auto density = [](double s) { return std::exp(-1.0 / ((s + 1.0) * (-s))); };
  boost::math::quadrature::tanh_sinh<double> q;
  const double total = q.integrate(density, -1.0, 0.0);
  for (double t : {-0.95, -0.8, -0.3, -0.05}) EXPECT_NEAR(f(t), q.integrate(density, -1.0, t) / total, 1e-13) << t;
}

TEST(Switching, MonotoneAndBounded) {
  for (const auto& f : {bump_switch(), ramp_switch(2), ramp_switch(3)}) {
    double prev = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double t = -1.0 + i / 400.0;
      const double v = f(t);
      EXPECT_GE(v, prev - 1e-15) << f.id << " t=" << t;
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      prev = v;
    }
  }
}

TEST(Switching, SmoothstepValues) {
  auto f = ramp_switch(2);
  EXPECT_EQ(f.id, "smoothstep2");
  EXPECT_NEAR(f(-1.0), 0.0, 1e-15);
  EXPECT_NEAR(f(0.0), 1.0, 1e-15);
  EXPECT_NEAR(f(-0.5), 0.5, 1e-15);
  EXPECT_NEAR(f.derivative(-1.0), 0.0, 1e-14);
  EXPECT_NEAR(f.derivative(0.0), 0.0, 1e-14);
  const double h = 1e-6;
  for (double t : {-0.7, -0.4})
    EXPECT_NEAR(f.derivative(t), (f(t + h) - f(t - h)) / (2 * h), 1e-8) << t;
}

TEST(Switching, LookupById) {
  EXPECT_EQ(switching_by_id("bump").id, "bump");
  EXPECT_EQ(switching_by_id("smoothstep3").id, "smoothstep3");
  EXPECT_THROW(switching_by_id("tanh"), DomainError);
  EXPECT_THROW(ramp_switch(1), DomainError);
}
