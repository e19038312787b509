#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kubolab/dynamics.hpp"
#include "kubolab/fit.hpp"
#include "kubolab/format.hpp"
#include "kubolab/interactions.hpp"
#include "kubolab/neass.hpp"
#include "kubolab/spectral.hpp"

namespace kubolab {

struct ResponseValue {
  double sigma = 0.0;       // Sigma^{eps,eta,f}_A(t)
  double norm_drift = 0.0;
};

/// Sigma_A(t) = rho0(U_{t/eta,-1/eta}[A]) - rho0(A) for each requested rescaled time t >= 0, from one propagation.
inline std::vector<ResponseValue> total_response(const DrivingProtocol& p, const Vector& ground, const ManyBodyOperator& a,
                                                 const std::vector<double>& t_list, const PropagationOptions& opt = {}) {
  for (double t : t_list)
    if (t < 0.0) throw DomainError("total_response: measurement time must be >= 0");
  std::vector<double> physical;
  for (double t : t_list) physical.push_back(t / p.eta);
  auto tr = propagate(p, ground, physical, opt);
  const double ref = a.expectation(ground).real();
  std::vector<ResponseValue> out(t_list.size());
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    const auto pos = std::lower_bound(tr.times.begin(), tr.times.end(), physical[i]) - tr.times.begin();
    out[i] = {a.expectation(tr.states[pos]).real() - ref, tr.max_norm_drift};
  }
  return out;
}

inline double total_response(const DrivingProtocol& p, const Vector& ground, const ManyBodyOperator& a, double t,
                             const PropagationOptions& opt = {}) {
  return total_response(p, ground, a, std::vector<double>{t}, opt).front().sigma;
}

/// Maps eps to the adiabatic parameters probed; every value must lie in [|eps|^m, |eps|^{1/m}].
struct EtaRule {
  int m = 2;
  std::vector<double> powers = {0.5};  // eta = |eps|^power

  std::vector<double> etas(double eps) const {
    std::vector<double> out;
    for (double pw : powers) {
      double eta = std::min(1.0, std::pow(std::abs(eps), pw));
      check(eps, eta);
      out.push_back(eta);
    }
    return out;
  }
  bool admissible(double eps, double eta) const {
    const double a = std::abs(eps);
    const double lo = std::pow(a, m), hi = std::pow(a, 1.0 / m);
    return eta >= lo * (1.0 - 1e-12) && eta <= hi * (1.0 + 1e-12);
  }
  void check(double eps, double eta) const {
    if (m < 1) throw DomainError("eta window exponent m must be >= 1");
    if (!admissible(eps, eta))
      throw DomainError("eta = " + std::to_string(eta) + " outside the window [|eps|^m, |eps|^(1/m)] for eps = " +
                        std::to_string(eps));
  }
};

struct ResponseRow {
  double epsilon = 0.0;
  double eta = 0.0;
  std::string f_id;
  double t = 0.0;
  double sigma_obs = 0.0;
  double residual = 0.0;        // sigma_obs - eps sigma_{A,1}
  double tol_certificate = 0.0; // measured norm drift of the propagation
};

struct ResponseReport {
  std::vector<ResponseRow> rows;
  double sigma1 = 0.0;
  double sigma2_estimate = 0.0;
  double sigma2_error = 0.0;
  double sigma1_fit = 0.0;       // intercept of Sigma/eps against eps
  double sigma1_fit_error = 0.0;
  double exponent = 0.0;         // of sup over the eta window of |Sigma - eps sigma1|
  double exponent_error = 0.0;
  double exponent_threshold = 1.7;
  double tolerance = 0.0;
  bool complete = true;
  bool passed = false;
  std::vector<double> epsilons;
  std::vector<double> sup_deviation;
};

inline void write_csv(std::ostream& os, const ResponseReport& r) {
  os << "epsilon,eta,f_id,t,sigma_obs,residual,tol_certificate\n";
  for (const auto& row : r.rows)
    os << format_double(row.epsilon) << ',' << format_double(row.eta) << ',' << row.f_id << ',' << format_double(row.t)
       << ',' << format_double(row.sigma_obs) << ',' << format_double(row.residual) << ','
       << format_double(row.tol_certificate) << '\n';
}

struct SweepOptions {
  PropagationOptions propagation;
  double exponent_threshold = 1.7;
  double budget_seconds = std::numeric_limits<double>::infinity();
  int threads = 1;
};

namespace detail {

/// Runs tasks [0, n) on up to `threads` workers; results land in caller-owned slots, so order is fixed.
inline void run_tasks(std::size_t n, int threads, const std::function<void(std::size_t)>& task) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// Grid of Sigma over eps x eta(eps) x f x t with fits against the Kubo coefficient.
inline ResponseReport response_sweep(const ManyBodyOperator& h0, const ManyBodyOperator& v, const ManyBodyOperator& a,
                                     const std::vector<double>& eps_list, const EtaRule& eta_rule,
                                     const std::vector<SwitchingFunction>& f_list, const std::vector<double>& t_list,
                                     const SweepOptions& opt = {}) {
  if (eps_list.empty() || f_list.empty() || t_list.empty()) throw DomainError("response_sweep: empty grid");
  const auto start = std::chrono::steady_clock::now();
  auto sd = diagonalize(h0);
  auto gs = ground_state(sd);
  ResponseReport rep;
  rep.sigma1 = kubo_coefficient_K1(sd, v, a);
  rep.tolerance = opt.propagation.tol;
  rep.exponent_threshold = opt.exponent_threshold;

  struct Task {
    double eps, eta;
    std::size_t f;
  };
  std::vector<Task> tasks;
  for (double eps : eps_list)
    for (double eta : eta_rule.etas(eps))
      for (std::size_t f = 0; f < f_list.size(); ++f) tasks.push_back({eps, eta, f});
  std::vector<std::vector<ResponseValue>> results(tasks.size());
  std::vector<char> done(tasks.size(), 0);
  std::atomic<bool> out_of_budget{false};
  detail::run_tasks(tasks.size(), opt.threads, [&](std::size_t i) {
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out_of_budget || elapsed > opt.budget_seconds) {
      out_of_budget = true;
      return;
    }
    DrivingProtocol p(h0, v, tasks[i].eps, tasks[i].eta, f_list[tasks[i].f]);
    results[i] = total_response(p, gs.vector, a, t_list, opt.propagation);
    done[i] = 1;
  });
  rep.complete = !out_of_budget;

  std::vector<double> fit_x, fit_y;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!done[i]) continue;
    for (std::size_t k = 0; k < t_list.size(); ++k) {
      ResponseRow row{tasks[i].eps, tasks[i].eta, f_list[tasks[i].f].id, t_list[k], results[i][k].sigma, 0.0,
                      results[i][k].norm_drift};
      row.residual = row.sigma_obs - row.epsilon * rep.sigma1;
      rep.rows.push_back(row);
      if (tasks[i].eps != 0.0) {
        fit_x.push_back(row.epsilon);
        fit_y.push_back(row.sigma_obs / row.epsilon);
      }
    }
  }
  for (double eps : eps_list) {
    double sup = 0.0;
    bool any = false;
    for (const auto& row : rep.rows)
      if (row.epsilon == eps) sup = std::max(sup, std::abs(row.residual)), any = true;
    if (any && eps != 0.0) {
      rep.epsilons.push_back(eps);
      rep.sup_deviation.push_back(sup);
    }
  }
  if (fit_x.size() >= 2) {
    std::vector<double> distinct(fit_x);
    std::sort(distinct.begin(), distinct.end());
    if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() >= 2) {
      auto lf = linear_fit(fit_x, fit_y);
      rep.sigma1_fit = lf.intercept;
      rep.sigma1_fit_error = lf.intercept_error;
      rep.sigma2_estimate = lf.slope;
      rep.sigma2_error = lf.slope_error;
    }
  }
  if (rep.epsilons.size() >= 2) {
    auto ef = loglog_fit(rep.epsilons, rep.sup_deviation);
    rep.exponent = ef.slope;
    rep.exponent_error = ef.slope_error;
  }
  rep.passed = rep.complete && rep.epsilons.size() >= 2 && rep.exponent >= opt.exponent_threshold;
  return rep;
}

/// |Sigma(f1) - Sigma(f2)| at fixed eps, eta and t.
inline double switching_independence(const ManyBodyOperator& h0, const ManyBodyOperator& v, const ManyBodyOperator& a,
                                     double eps, double eta, const SwitchingFunction& f1, const SwitchingFunction& f2,
                                     double t, const Vector& ground, const PropagationOptions& opt = {}) {
  if (eps == 0.0 || f1.id == f2.id) return 0.0;
  const double s1 = total_response(DrivingProtocol(h0, v, eps, eta, f1), ground, a, t, opt);
  const double s2 = total_response(DrivingProtocol(h0, v, eps, eta, f2), ground, a, t, opt);
  return std::abs(s1 - s2);
}

/// Ground-state expectation and linear response coefficient of a fixed local observable on a growing family of boxes.
struct VolumeSample {
  int k = 0;
  std::size_t dimension = 0;
  double gap = 0.0;
  double rho0 = 0.0;    // rho0^{Lambda(k)}(A)
  double sigma1 = 0.0;  // sigma_{A,1} for the family's potential
};

struct VolumeSeries {
  std::vector<VolumeSample> samples;
  std::vector<double> rho0_differences;    // |rho0^{k+1} - rho0^{k}|
  std::vector<double> sigma1_differences;

  /// True when the last `count` rho0 differences are strictly decreasing.
  bool rho0_strictly_decreasing(std::size_t count = 3) const {
    if (rho0_differences.size() < count) return false;
    for (std::size_t i = rho0_differences.size() - count + 1; i < rho0_differences.size(); ++i)
      if (!(rho0_differences[i] < rho0_differences[i - 1])) return false;
    return true;
  }
  double last_sigma1_difference() const { return sigma1_differences.empty() ? 0.0 : sigma1_differences.back(); }
};

struct VolumeFamily {
  ModelParameters model;
  int d = 1;
  Boundary boundary = Boundary::cube;
  LipschitzPotential potential;
  std::function<int(const LatticeGeometry&)> particles;        // N on each box
  std::function<ManyBodyOperator(const BasisPtr&)> observable;  // fixed central local A
  DiagonalizeOptions diagonalize;
};

/// Linear response of a fixed local observable on Lambda(k) for each k, with Cauchy differences.
inline VolumeSeries finite_volume_convergence(const VolumeFamily& fam, const std::vector<int>& ks) {
  VolumeSeries out;
  for (int k : ks) {
    auto geom = LatticeGeometry::box(k, fam.d, fam.boundary);
    auto basis = enumerate_basis(geom, fam.model.s, fam.particles(geom));
    auto h = build_example_hamiltonian(fam.model, basis);
    auto sd = diagonalize(h, fam.diagonalize);
    auto gs = ground_state(sd);
    auto a = fam.observable(basis);
    auto v = potential_operator(fam.potential, basis);
    VolumeSample s;
    s.k = k;
    s.dimension = basis->dimension();
    s.gap = gs.gap;
    s.rho0 = a.expectation(gs.vector).real();
    s.sigma1 = kubo_coefficient_K1(sd, v, a);
    out.samples.push_back(s);
  }
  for (std::size_t i = 1; i < out.samples.size(); ++i) {
    out.rho0_differences.push_back(std::abs(out.samples[i].rho0 - out.samples[i - 1].rho0));
    out.sigma1_differences.push_back(std::abs(out.samples[i].sigma1 - out.samples[i - 1].sigma1));
  }
  return out;
}

}  // namespace kubolab
