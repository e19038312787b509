#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kubolab/krylov.hpp"
#include "kubolab/operator.hpp"
#include "kubolab/switching.hpp"

namespace kubolab {

/// H_{eps,eta}(t) = H0 + eps f(eta t) V, switched on over [-1/eta, 0].
struct DrivingProtocol {
  ManyBodyOperator h0;
  ManyBodyOperator v;
  double epsilon = 0.0;
  double eta = 1.0;
  SwitchingFunction f = bump_switch();

  DrivingProtocol(ManyBodyOperator h0_, ManyBodyOperator v_, double epsilon_, double eta_, SwitchingFunction f_)
      : h0(std::move(h0_)), v(std::move(v_)), epsilon(epsilon_), eta(eta_), f(std::move(f_)) {
    h0.check_same(v);
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("adiabatic parameter eta must lie in (0, 1]");
    if (std::abs(epsilon) > 1.0) throw DomainError("perturbation strength |eps| must be <= 1");
  }

  double start_time() const { return -1.0 / eta; }
  /// Coefficient of V at physical time t.
  double coupling(double t) const { return epsilon * f(eta * t); }
};

struct PropagationOptions {
  double tol = 1e-9;             // local error per unit physical time
  double norm_drift_bound = 1e-9;
  double initial_step = 0.05;
  double min_step = 1e-10;
  double max_step = 0.5;
};

struct Trajectory {
  std::vector<double> times;     // physical times of the checkpoints
  std::vector<Vector> states;
  double max_norm_drift = 0.0;
  long accepted_steps = 0;
  long rejected_steps = 0;
};

namespace detail {

/// One commutator-free fourth-order Magnus step (two exponentials, Gauss nodes).
inline Vector cf4_step(const DrivingProtocol& p, const Vector& psi, double t, double h) {
  static const double r3 = std::sqrt(3.0);
  const double c1 = 0.5 - r3 / 6.0, c2 = 0.5 + r3 / 6.0;
  const double a1 = (3.0 - 2.0 * r3) / 12.0, a2 = (3.0 + 2.0 * r3) / 12.0;
  const double g1 = p.coupling(t + c1 * h), g2 = p.coupling(t + c2 * h);
  const auto& H = p.h0.matrix();
  const auto& V = p.v.matrix();
  auto combo = [&](double w1, double w2) {
    const double b = w1 * g1 + w2 * g2;  // H0 weight is w1 + w2 = 1/2
    return krylov::MatVec([&H, &V, b](const Vector& x, Vector& y) {
      y.noalias() = 0.5 * (H * x);
      if (b != 0.0) y.noalias() += b * (V * x);
    });
  };
  Vector first = krylov::expmv(combo(a2, a1), psi, h);
  return krylov::expmv(combo(a1, a2), first, h);
}

}  // namespace detail

/// Solves i d psi/dt = H_{eps,eta}(t) psi from t0 = -1/eta, recording psi at the requested physical times.
/// Step size is controlled by Richardson comparison of one step against two half steps.
inline Trajectory propagate(const DrivingProtocol& p, const Vector& psi0, std::vector<double> observe,
                            const PropagationOptions& opt = {}) {
  if (std::abs(psi0.norm() - 1.0) > 1e-12) throw DomainError("propagate: initial state must be normalised");
  std::sort(observe.begin(), observe.end());
  const double t0 = p.start_time();
  if (!observe.empty() && observe.front() < t0) throw DomainError("propagate: observation time before switch-on");
  Trajectory tr;
  Vector psi = psi0;
  double t = t0;
  double h = opt.initial_step;
  for (double target : observe) {
    while (t < target) {
      const bool last = t + h >= target;
      const double step = last ? target - t : h;
      Vector full = detail::cf4_step(p, psi, t, step);
      Vector half = detail::cf4_step(p, psi, t, 0.5 * step);
      half = detail::cf4_step(p, half, t + 0.5 * step, 0.5 * step);
      const double err = (half - full).norm() / 15.0;
      const double allowed = opt.tol * step;
      if (err <= allowed || step <= opt.min_step) {
        if (step <= opt.min_step && err > allowed) throw ConvergenceError("propagate: step size underflow");
        psi = std::move(half);
        t = last ? target : t + step;
        ++tr.accepted_steps;
        tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(psi.norm() - 1.0));
        if (tr.max_norm_drift > opt.norm_drift_bound)
          throw ConvergenceError("propagate: norm drift " + std::to_string(tr.max_norm_drift) + " above bound at t=" +
                                 std::to_string(t));
        double grow = err > 0.0 ? 0.9 * std::pow(allowed / err, 0.25) : 2.0;
        if (!last || step >= h) h = std::clamp(step * std::clamp(grow, 0.2, 2.0), opt.min_step, opt.max_step);
      } else {
        ++tr.rejected_steps;
        h = std::max(opt.min_step, step * std::clamp(0.9 * std::pow(allowed / err, 0.25), 0.1, 0.5));
      }
    }
    tr.times.push_back(target);
    tr.states.push_back(psi);
  }
  return tr;
}

/// rho0(U*[A]U) at rescaled time t, i.e. <psi(t/eta)|A|psi(t/eta)> with psi(-1/eta) = ground vector.
inline cplx heisenberg_expectation(const DrivingProtocol& p, const Vector& ground, const ManyBodyOperator& a,
                                   double t, const PropagationOptions& opt = {}, double* norm_drift = nullptr) {
  auto tr = propagate(p, ground, {t / p.eta}, opt);
  if (norm_drift) *norm_drift = tr.max_norm_drift;
  return a.expectation(tr.states.back());
}

}  // namespace kubolab
