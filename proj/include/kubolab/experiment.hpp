#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kubolab/config.hpp"
#include "kubolab/neass.hpp"
#include "kubolab/onebody.hpp"
#include "kubolab/plot.hpp"
#include "kubolab/response.hpp"

namespace kubolab {

struct RunOptions {
  std::string out_dir;                  // empty: the config's output directory
  int threads = 1;
  double budget_seconds = std::numeric_limits<double>::infinity();
  std::optional<std::uint64_t> seed;    // overrides the config seed
  bool plots = true;
};

struct RunResult {
  bool passed = false;
  bool complete = true;
  std::string csv;       // exact bytes of results.csv
  json summary;
  std::string svg;       // empty when no plot applies
};

/// The many-body problem a config describes on one geometry.
struct ManyBodySetup {
  BasisPtr basis;
  ManyBodyOperator h0;
  ManyBodyOperator v;
  ManyBodyOperator a;
};

namespace detail {

inline double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline LipschitzPotential config_potential(const PerturbationConfig& p, int d, Boundary boundary) {
  if (p.potential == "linear") return linear_potential(d, p.axis);
  if (p.potential == "sawtooth") return sawtooth_potential(d, p.axis);
  if (p.potential == "constant") return constant_potential(d, p.value, boundary);
  if (p.potential == "none") return constant_potential(d, 0.0, boundary);
  auto table = p.table;
  return {"table", d, boundary, [table](const LatticeGeometry& g, const Coord& x) { return table.at(g.index(x)); }};
}

inline Mode config_mode(const FockBasis& b, const SiteRef& r) { return Mode{b.geometry().index(r.site), r.orbital}; }

/// V = V_v + H1, each H1 entry c a*_p a_q contributing c a*_p a_q + conj(c) a*_q a_p (Re(c) n_p when p = q).
inline ManyBodyOperator config_perturbation(const PerturbationConfig& p, const LipschitzPotential& pot,
                                            const BasisPtr& basis) {
  auto v = potential_operator(pot, basis);
  for (const auto& t : p.local_terms) {
    const Mode m1 = config_mode(*basis, t.creator), m2 = config_mode(*basis, t.annihilator);
    if (m1.site == m2.site && m1.orbital == m2.orbital) {
      v = v + ManyBodyOperator{basis, SparseMatrix(t.coefficient.real() * number_operator(basis, m1).matrix()), true};
    } else {
      SparseMatrix m = t.coefficient * bilinear(basis, m1, m2).matrix() +
                       std::conj(t.coefficient) * bilinear(basis, m2, m1).matrix();
      v = v + ManyBodyOperator{basis, std::move(m), true};
    }
  }
  return v.mark_hermitian();
}

inline ManyBodyOperator config_observable(const ObservableConfig& o, const BasisPtr& basis) {
  if (o.type == "identity") return ManyBodyOperator::identity(basis);
  if (o.type == "total_number") return total_number(basis);
  const Mode p = config_mode(*basis, o.first);
  if (o.type == "density") return number_operator(basis, p);
  const Mode q = config_mode(*basis, o.second);
  if (o.type == "bond_current") return bond_current(basis, p, q);
  return bond_hopping(basis, p, q);
}

inline std::optional<LinearFit> safe_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  try {
    return loglog_fit(x, y);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

}  // namespace detail

inline ManyBodySetup build_setup(const ExperimentConfig& c, const LatticeGeometry& g,
                                 std::optional<LipschitzPotential> potential = std::nullopt) {
  const auto& m = c.model;
  auto basis = enumerate_basis(g, m.s, particle_number(m, g.num_sites()));
  auto h0 = build_example_hamiltonian(model_parameters(m), basis);
  auto pot = potential ? *potential : detail::config_potential(c.perturbation, m.d, g.boundary());
  auto v = detail::config_perturbation(c.perturbation, pot, basis);
  auto a = detail::config_observable(c.observable, basis);
  return {basis, std::move(h0), std::move(v), std::move(a)};
}

inline ManyBodySetup build_setup(const ExperimentConfig& c) {
  return build_setup(c, LatticeGeometry(c.model.d, c.model.side, c.model.boundary));
}

inline DiagonalizeOptions diagonalize_options(const ExperimentConfig& c, Eigen::Index dense_cap = 1000) {
  DiagonalizeOptions opt;
  opt.dense_cap = dense_cap;
  opt.seed = c.seed;
  return opt;
}

// ---------------------------------------------------------------------------
// kubo: regularised coefficient against eta

inline RunResult run_kubo(const ExperimentConfig& c, const RunOptions&) {
  auto su = build_setup(c);
  auto sd = diagonalize(su.h0, diagonalize_options(c));
  auto gs = ground_state(sd, c.gap_tolerance);
  const double sigma1 = kubo_coefficient_K1(sd, su.v, su.a);
  const cplx sigma0 = kubo_regularized(sd, su.v, su.a, 0.0);
  std::ostringstream csv;
  csv << "eta,sigma_re,sigma_im,deviation\n";
  std::vector<double> etas, devs;
  for (double eta : c.kubo.etas) {
    const cplx s = kubo_regularized(sd, su.v, su.a, eta);
    const double dev = std::abs(s - sigma0);
    csv << format_double(eta) << ',' << format_double(s.real()) << ',' << format_double(s.imag()) << ','
        << format_double(dev) << '\n';
    etas.push_back(eta);
    devs.push_back(dev);
  }
  auto fit = detail::safe_loglog(etas, devs);
  RunResult r;
  r.csv = csv.str();
  r.passed = fit && fit->slope >= c.kubo.slope_min && fit->slope <= c.kubo.slope_max;
  r.summary["results"] = {{"dimension", su.h0.dimension()},
                          {"gap", gs.gap},
                          {"rho0_A", su.a.expectation(gs.vector).real()},
                          {"sigma_A_1", sigma1},
                          {"sigma_eta0_re", sigma0.real()},
                          {"sigma_eta0_im", sigma0.imag()},
                          {"slope", fit ? fit->slope : 0.0},
                          {"slope_error", fit ? fit->slope_error : 0.0},
                          {"prefactor", fit ? std::exp(fit->intercept) : 0.0}};
  r.summary["thresholds"] = {{"slope_min", c.kubo.slope_min}, {"slope_max", c.kubo.slope_max}};
  r.summary["checks"] = {{"slope_in_range", r.passed}};
  PlotSeries ps{"|sigma(eta) - sigma(0)|", etas, devs, fit};
  std::ostringstream svg;
  write_svg(svg, {{"Kubo coefficient against eta", "eta", "deviation", true, {ps}}});
  r.svg = svg.str();
  return r;
}

// ---------------------------------------------------------------------------
// sweep: dynamical response over eps x eta x f x t

inline RunResult run_sweep(const ExperimentConfig& c, const RunOptions& ro) {
  auto su = build_setup(c);
  const auto& pr = c.protocol;
  std::vector<SwitchingFunction> fs;
  for (const auto& id : pr.switching) fs.push_back(switching_by_id(id));
  SweepOptions so;
  so.propagation.tol = pr.tolerance;
  so.exponent_threshold = c.sweep.exponent_min;
  so.budget_seconds = ro.budget_seconds;
  so.threads = ro.threads;
  auto rep = response_sweep(su.h0, su.v, su.a, pr.epsilons, EtaRule{pr.window_m, pr.eta_powers}, fs, pr.times, so);
  std::ostringstream csv;
  write_csv(csv, rep);

  // |Sigma(f_first) - Sigma(f)| for every other switching function, sup over eta and t
  std::vector<json> independence;
  std::vector<PlotSeries> series{{"sup |Sigma - eps sigma1|", rep.epsilons, rep.sup_deviation,
                                  detail::safe_loglog(rep.epsilons, rep.sup_deviation)}};
  bool indep_ok = true;
  for (std::size_t f = 1; f < fs.size(); ++f) {
    std::vector<double> xs, ys;
    for (double eps : pr.epsilons) {
      double sup = 0.0;
      bool any = false;
      for (const auto& r0 : rep.rows) {
        if (r0.epsilon != eps || r0.f_id != fs[0].id) continue;
        for (const auto& r1 : rep.rows)
          if (r1.epsilon == eps && r1.f_id == fs[f].id && r1.eta == r0.eta && r1.t == r0.t)
            sup = std::max(sup, std::abs(r0.sigma_obs - r1.sigma_obs)), any = true;
      }
      if (any) xs.push_back(eps), ys.push_back(sup);
    }
    auto fit = detail::safe_loglog(xs, ys);
    const bool ok = fit && fit->slope >= c.sweep.exponent_min;
    indep_ok = indep_ok && ok;
    independence.push_back({{"reference", fs[0].id},
                            {"other", fs[f].id},
                            {"exponent", fit ? fit->slope : 0.0},
                            {"exponent_error", fit ? fit->slope_error : 0.0},
                            {"passed", ok}});
    series.push_back({"sup |Sigma(" + fs[0].id + ") - Sigma(" + fs[f].id + ")|", xs, ys, fit});
  }
  RunResult r;
  r.csv = csv.str();
  r.complete = rep.complete;
  r.passed = rep.passed && indep_ok;
  r.summary["results"] = {{"sigma_A_1", rep.sigma1},
                          {"sigma1_fit", rep.sigma1_fit},
                          {"sigma1_fit_error", rep.sigma1_fit_error},
                          {"sigma2_estimate", rep.sigma2_estimate},
                          {"sigma2_error", rep.sigma2_error},
                          {"exponent", rep.exponent},
                          {"exponent_error", rep.exponent_error},
                          {"switching_independence", independence}};
  r.summary["thresholds"] = {{"exponent_min", c.sweep.exponent_min}, {"integrator_tolerance", rep.tolerance}};
  r.summary["checks"] = {{"response_exponent", rep.passed}, {"switching_independence", indep_ok}};
  std::ostringstream svg;
  write_svg(svg, {{"Total response against eps", "eps", "deviation", true, series}});
  r.svg = svg.str();
  return r;
}

// ---------------------------------------------------------------------------
// neass: first-order expansion and almost-stationarity

inline RunResult run_neass(const ExperimentConfig& c, const RunOptions& ro) {
  auto su = build_setup(c);
  auto sd = diagonalize(su.h0, diagonalize_options(c));
  auto gs = ground_state(sd, c.gap_tolerance);
  const double sigma1 = kubo_coefficient_K1(sd, su.v, su.a);
  const double rho0 = su.a.expectation(gs.vector).real();
  const auto& eps = c.neass.epsilons;
  const auto& times = c.neass.times;
  std::vector<double> expansion(eps.size(), 0.0);
  std::vector<std::vector<double>> defect(eps.size(), std::vector<double>(times.size(), 0.0));
  std::vector<char> done(eps.size(), 0);
  const auto t0 = std::chrono::steady_clock::now();
  detail::run_tasks(eps.size(), ro.threads, [&](std::size_t i) {
    if (detail::elapsed_since(t0) > ro.budget_seconds) return;
    auto n = make_neass(sd, su.h0, su.v, eps[i]);
    expansion[i] = std::abs(n.expectation(su.a).real() - rho0 - eps[i] * sigma1);
    PerturbedEvolution evo(su.h0, su.v, eps[i]);
    for (std::size_t k = 0; k < times.size(); ++k) defect[i][k] = stationarity_defect(n, evo, su.a, times[k]);
    done[i] = 1;
  });
  RunResult r;
  std::ostringstream csv;
  csv << "epsilon,t,expansion_deviation,stationarity_defect\n";
  std::vector<double> xs, ys;
  std::vector<std::vector<double>> dys(times.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!done[i]) {
      r.complete = false;
      continue;
    }
    xs.push_back(eps[i]);
    ys.push_back(expansion[i]);
    for (std::size_t k = 0; k < times.size(); ++k) {
      csv << format_double(eps[i]) << ',' << format_double(times[k]) << ',' << format_double(expansion[i]) << ','
          << format_double(defect[i][k]) << '\n';
      dys[k].push_back(defect[i][k]);
    }
  }
  auto efit = detail::safe_loglog(xs, ys);
  bool ok = efit && efit->slope >= c.neass.exponent_min;
  json per_time = json::array();
  std::vector<PlotSeries> series{{"|Pi_eps(A) - rho0(A) - eps sigma1|", xs, ys, efit}};
  for (std::size_t k = 0; k < times.size(); ++k) {
    auto f = detail::safe_loglog(xs, dys[k]);
    const bool tk = f && f->slope >= c.neass.exponent_min;
    ok = ok && tk;
    per_time.push_back({{"t", times[k]}, {"exponent", f ? f->slope : 0.0}, {"exponent_error", f ? f->slope_error : 0.0},
                        {"passed", tk}});
    series.push_back({"stationarity defect t = " + format_double(times[k]), xs, dys[k], f});
  }
  r.csv = csv.str();
  r.passed = ok && r.complete;
  r.summary["results"] = {{"dimension", su.h0.dimension()},
                          {"gap", gs.gap},
                          {"rho0_A", rho0},
                          {"sigma_A_1", sigma1},
                          {"expansion_exponent", efit ? efit->slope : 0.0},
                          {"expansion_exponent_error", efit ? efit->slope_error : 0.0},
                          {"stationarity", per_time}};
  r.summary["thresholds"] = {{"exponent_min", c.neass.exponent_min}};
  r.summary["checks"] = {{"exponents", ok}};
  std::ostringstream svg;
  write_svg(svg, {{"NEASS scaling against eps", "eps", "deviation", true, series}});
  r.svg = svg.str();
  return r;
}

// ---------------------------------------------------------------------------
// hall: DCF, Streda and TKNN at one flux and Fermi energy

inline RunResult run_hall(const ExperimentConfig& c, const RunOptions& ro) {
  const auto& hc = c.hall;
  HofstadterParameters hp{hc.p, hc.q, hc.staggered};
  const double mu = hc.mu ? *hc.mu : first_gap_mu(hp, hc.nk);
  const int chern = tknn_chern(hp, bands_below(hp, mu, hc.nk), hc.nk);
  const std::size_t n = hc.sizes.size();
  std::vector<double> dcf(n, 0.0), streda_value(n, 0.0);
  std::vector<char> done(n, 0), has_streda(n, 0);
  const auto t0 = std::chrono::steady_clock::now();
  detail::run_tasks(n, ro.threads, [&](std::size_t i) {
    if (detail::elapsed_since(t0) > ro.budget_seconds) return;
    const int L = hc.sizes[i];
    auto fp = fermi_projection(hofstadter(L, hc.boundary, hp), mu, c.gap_tolerance);
    dcf[i] = dcf_conductivity(fp, hc.window_fraction);
    if (hc.boundary == Boundary::torus) {
      streda_value[i] = streda(L, hp, mu, c.gap_tolerance).value;
      has_streda[i] = 1;
    }
    done[i] = 1;
  });
  RunResult r;
  std::vector<HallRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (!done[i]) {
      r.complete = false;
      continue;
    }
    rows.push_back({hc.sizes[i], hc.p, hc.q, mu, "dcf", dcf[i], hc.window_fraction});
    if (has_streda[i]) rows.push_back({hc.sizes[i], hc.p, hc.q, mu, "streda", streda_value[i], 0.0});
  }
  rows.push_back({0, hc.p, hc.q, mu, "tknn", static_cast<double>(chern), 0.0});
  std::ostringstream csv;
  write_hall_csv(csv, rows);
  r.csv = csv.str();

  // checks at the largest completed size
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < n; ++i)
    if (done[i] && (!last || hc.sizes[i] > hc.sizes[*last])) last = i;
  json checks;
  bool ok = r.complete && last.has_value();
  if (last) {
    const double d = dcf[*last];
    std::vector<double> values{d, static_cast<double>(chern)};
    if (has_streda[*last]) values.push_back(streda_value[*last]);
    if (chern == 0) {
      bool zero = true;
      for (double v : values) zero = zero && std::abs(v) <= hc.zero_tolerance;
      checks["all_near_zero"] = zero;
      ok = ok && zero;
    } else {
      const double target = chern;
      const bool dcf_ok = std::abs(d - target) <= hc.relative_tolerance * std::abs(target);
      const bool streda_ok = !has_streda[*last] || std::abs(streda_value[*last] - target) <= hc.relative_tolerance * std::abs(target);
      bool pairwise = true;
      for (std::size_t a = 0; a < values.size(); ++a)
        for (std::size_t b = a + 1; b < values.size(); ++b)
          pairwise = pairwise && std::abs(values[a] - values[b]) <=
                                     hc.pairwise_tolerance * std::max(std::abs(values[a]), std::abs(values[b]));
      checks["dcf_near_tknn"] = dcf_ok;
      checks["streda_near_tknn"] = streda_ok;
      checks["pairwise_agreement"] = pairwise;
      ok = ok && dcf_ok && streda_ok && pairwise;
    }
  }
  // |DCF(L) - C| along the sizes in the given order
  std::vector<double> xs, errs;
  bool monotone = true;
  for (std::size_t i = 0; i < n; ++i)
    if (done[i]) {
      const double e = std::abs(dcf[i] - chern);
      if (!errs.empty() && !(e < errs.back())) monotone = false;
      xs.push_back(hc.sizes[i]);
      errs.push_back(e);
    }
  r.passed = ok;
  r.summary["results"] = {{"mu", mu},
                          {"tknn", chern},
                          {"dcf", json(dcf)},
                          {"streda", json(streda_value)},
                          {"dcf_error_decreasing", monotone}};
  r.summary["thresholds"] = {{"relative_tolerance", hc.relative_tolerance},
                             {"pairwise_tolerance", hc.pairwise_tolerance},
                             {"zero_tolerance", hc.zero_tolerance}};
  r.summary["checks"] = checks;
  if (xs.size() >= 1) {
    std::ostringstream svg;
    write_svg(svg, {{"|DCF - TKNN| against side", "L", "error", false, {{"dcf", xs, errs, std::nullopt}}}});
    r.svg = svg.str();
  }
  return r;
}

// ---------------------------------------------------------------------------
// thermo: ground-state expectation and response on growing boxes, v_D on cubes and v_P on tori

inline RunResult run_thermo(const ExperimentConfig& c, const RunOptions& ro) {
  const auto& tc = c.thermo;
  const Boundary families[2] = {Boundary::cube, Boundary::torus};
  VolumeSeries series[2];
  std::vector<int> ks = tc.ks;
  std::sort(ks.begin(), ks.end());
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::vector<char>> done(2, std::vector<char>(ks.size(), 0));
  std::vector<std::vector<VolumeSample>> samples(2, std::vector<VolumeSample>(ks.size()));
  detail::run_tasks(2 * ks.size(), ro.threads, [&](std::size_t task) {
    const std::size_t fam = task % 2, i = task / 2;
    if (detail::elapsed_since(t0) > ro.budget_seconds) return;
    VolumeFamily vf;
    vf.model = model_parameters(c.model);
    vf.d = c.model.d;
    vf.boundary = families[fam];
    vf.potential = fam == 0 ? linear_potential(c.model.d, c.perturbation.axis)
                            : sawtooth_potential(c.model.d, c.perturbation.axis);
    const auto model = c.model;
    vf.particles = [model](const LatticeGeometry& g) { return particle_number(model, g.num_sites()); };
    const auto obs = c.observable;
    vf.observable = [obs](const BasisPtr& b) { return detail::config_observable(obs, b); };
    vf.diagonalize = diagonalize_options(c, tc.dense_cap);
    samples[fam][i] = finite_volume_convergence(vf, {ks[i]}).samples.front();
    done[fam][i] = 1;
  });
  RunResult r;
  for (int fam = 0; fam < 2; ++fam) {
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (!done[fam][i]) break;
      series[fam].samples.push_back(samples[fam][i]);
    }
    if (series[fam].samples.size() < ks.size()) r.complete = false;
    auto& s = series[fam];
    for (std::size_t i = 1; i < s.samples.size(); ++i) {
      s.rho0_differences.push_back(std::abs(s.samples[i].rho0 - s.samples[i - 1].rho0));
      s.sigma1_differences.push_back(std::abs(s.samples[i].sigma1 - s.samples[i - 1].sigma1));
    }
  }
  std::ostringstream csv;
  csv << "boundary,potential,k,dimension,gap,rho0,sigma1,rho0_difference,sigma1_difference\n";
  for (int fam = 0; fam < 2; ++fam) {
    const auto& s = series[fam];
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
      const auto& x = s.samples[i];
      csv << to_string(families[fam]) << ',' << (fam == 0 ? "linear" : "sawtooth") << ',' << x.k << ',' << x.dimension
          << ',' << format_double(x.gap) << ',' << format_double(x.rho0) << ',' << format_double(x.sigma1) << ','
          << (i ? format_double(s.rho0_differences[i - 1]) : "") << ','
          << (i ? format_double(s.sigma1_differences[i - 1]) : "") << '\n';
    }
  }
  r.csv = csv.str();

  const std::size_t count = static_cast<std::size_t>(std::max(1, tc.decreasing_count));
  const bool decreasing = series[0].rho0_strictly_decreasing(count);
  auto tail = [&](bool two) {
    double t = 0.0;
    for (const auto& s : series) {
      const auto& dv = s.sigma1_differences;
      if (dv.empty()) continue;
      t += two && dv.size() >= 2 ? std::max(dv[dv.size() - 1], dv[dv.size() - 2]) : dv.back();
    }
    return t;
  };
  const bool both = !series[0].samples.empty() && !series[1].samples.empty();
  const double gap_dp = both ? std::abs(series[0].samples.back().sigma1 - series[1].samples.back().sigma1) : 0.0;
  const double tail_two = tail(true), tail_last = tail(false);
  const bool agree = both && gap_dp <= tail_two;
  r.passed = r.complete && decreasing && agree;
  r.summary["results"] = {{"rho0_differences_cube", json(series[0].rho0_differences)},
                          {"rho0_differences_torus", json(series[1].rho0_differences)},
                          {"sigma1_differences_cube", json(series[0].sigma1_differences)},
                          {"sigma1_differences_torus", json(series[1].sigma1_differences)},
                          {"sigma1_difference_cube_torus", gap_dp},
                          {"cauchy_tail", tail_two},
                          {"cauchy_tail_last_difference", tail_last}};
  r.summary["thresholds"] = {{"decreasing_count", count},
                             {"tail_rule", "sum over both families of the larger of the last two Cauchy differences"}};
  r.summary["checks"] = {{"rho0_strictly_decreasing", decreasing},
                         {"potentials_agree_within_tail", agree},
                         {"potentials_agree_within_last_difference", both && gap_dp <= tail_last}};
  std::vector<PlotSeries> ps;
  for (int fam = 0; fam < 2; ++fam) {
    std::vector<double> x;
    for (std::size_t i = 1; i < series[fam].samples.size(); ++i) x.push_back(series[fam].samples[i].k);
    ps.push_back({"|d rho0| " + to_string(families[fam]), x, series[fam].rho0_differences, std::nullopt});
    ps.push_back({"|d sigma1| " + to_string(families[fam]), x, series[fam].sigma1_differences, std::nullopt});
  }
  std::ostringstream svg;
  write_svg(svg, {{"Cauchy differences against k", "k", "difference", false, ps}});
  r.svg = svg.str();
  return r;
}

// ---------------------------------------------------------------------------

/// Runs the experiment in memory; `write_outputs` puts it on disk.
inline RunResult run_experiment(ExperimentConfig c, const RunOptions& ro = {}) {
  if (ro.seed) c.seed = *ro.seed;
  RunResult r;
  if (c.kind == "kubo") r = run_kubo(c, ro);
  else if (c.kind == "sweep") r = run_sweep(c, ro);
  else if (c.kind == "neass") r = run_neass(c, ro);
  else if (c.kind == "hall") r = run_hall(c, ro);
  else if (c.kind == "thermo") r = run_thermo(c, ro);
  else throw ConfigError("kind", "unknown experiment kind '" + c.kind + "'");
  json summary;
  summary["kind"] = c.kind;
  summary["config"] = to_json(c);
  summary["complete"] = r.complete;
  summary["passed"] = r.passed;
  summary["results"] = r.summary["results"];
  summary["thresholds"] = r.summary["thresholds"];
  summary["checks"] = r.summary["checks"];
  r.summary = std::move(summary);
  if (!ro.plots) r.svg.clear();
  return r;
}

inline std::filesystem::path write_outputs(const RunResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ResourceError("cannot write " + (dir / name).string());
    out << text;
  };
  put("results.csv", r.csv);
  put("summary.json", r.summary.dump(2) + "\n");
  if (!r.svg.empty()) put("plots.svg", r.svg);
  return dir;
}

}  // namespace kubolab
