#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "kubolab/car.hpp"
#include "kubolab/config.hpp"
#include "kubolab/experiment.hpp"
#include "kubolab/neass.hpp"
#include "kubolab/onebody.hpp"

using namespace kubolab;
namespace fs = std::filesystem;

namespace {

const fs::path config_dir = KUBOLAB_CONFIG_DIR;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s criterion %d: %s | %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

ExperimentConfig shipped(const std::string& name) { return load_config((config_dir / (name + ".json")).string()); }

DenseMatrix scaled_random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  DenseMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cplx(nd(rng), nd(rng));
  return (m + m.adjoint()) / (2.0 * std::sqrt(static_cast<double>(n)));
}

void car_suite() {
  const auto t0 = Clock::now();
  bool ok = true;
  for (int m = 1; m <= 12; ++m) ok = ok && car_check(m).passed;
  double worst = 0.0;
  for (int modes = 1; modes <= 6; ++modes)
    for (int n = 0; n <= modes; ++n) {
      auto b = enumerate_basis(LatticeGeometry(1, modes, Boundary::cube), 1, n);
      for (int p = 0; p < modes; ++p)
        for (int q = 0; q < modes; ++q)
          worst = std::max(worst, (bilinear(b, Mode{p, 0}, Mode{q, 0}).dense() - fullfock_bilinear_in_sector(*b, p, q)).norm());
    }
  const double t = seconds_since(t0);
  report(1, ok && worst == 0.0 && t <= 60.0, "CAR on 1-12 modes, sector bilinears against full Fock on <= 6 modes",
         std::string("car ") + (ok ? "exact" : "broken") + ", max bilinear mismatch " + fmt("%.1e", worst) + ", " +
             fmt("%.1f", t) + " s");
}

void spectral_consistency() {
  std::mt19937_64 rng(20240611);
  const std::vector<std::pair<int, int>> sectors = {{4, 2}, {6, 3}, {7, 3}, {8, 3}, {8, 4}, {9, 3},
                                                    {10, 3}, {9, 4}, {11, 3}, {13, 2}, {20, 2}};
  double worst_residual = 0.0, worst_kubo = 0.0, min_gap = 1e300;
  int max_dim = 0, resampled = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto [modes, n] = sectors[trial % sectors.size()];
    auto b = enumerate_basis(LatticeGeometry(1, modes, Boundary::cube), 1, n);
    const auto dim = static_cast<Eigen::Index>(b->dimension());
    SpectralData sd;
    ManyBodyOperator h;
    do {
      h = ManyBodyOperator::from_dense(b, scaled_random_hermitian(dim, rng), true);
      sd = diagonalize(h);
      resampled += sd.gap() < 1e-2;
    } while (sd.gap() < 1e-2);
    auto v = ManyBodyOperator::from_dense(b, scaled_random_hermitian(dim, rng), true);
    auto a = ManyBodyOperator::from_dense(b, scaled_random_hermitian(dim, rng), true);
    auto bop = commutator(v, sd.ground_projector());
    auto x = inverse_liouvillian(sd, bop);
    worst_residual = std::max(worst_residual, (commutator(h, x) - bop).norm() / bop.norm());
    worst_kubo = std::max(worst_kubo, std::abs(kubo_regularized(sd, v, a, 0.0) - kubo_coefficient_K1(sd, v, a)));
    min_gap = std::min(min_gap, sd.gap());
    max_dim = std::max(max_dim, static_cast<int>(dim));
  }
  report(2, worst_residual <= 1e-10 && worst_kubo <= 1e-12,
         "inverse Liouvillian residual and kubo_regularized(0) = K1 on 50 random gapped instances",
         "max relative residual " + fmt("%.2e", worst_residual) + ", max |kubo(0) - K1| " + fmt("%.2e", worst_kubo) +
             ", dims <= " + std::to_string(max_dim) + ", min gap " + fmt("%.3f", min_gap) + ", resampled " +
             std::to_string(resampled));
}

RunResult timed_run(const ExperimentConfig& c, double& t) {
  const auto t0 = Clock::now();
  auto r = run_experiment(c);
  t = seconds_since(t0);
  return r;
}

void kubo_eta_limit() {
  double t = 0.0;
  auto r = timed_run(shipped("kubo_chain"), t);
  const auto& res = r.summary["results"];
  const double slope = res["slope"].get<double>();
  report(3, std::abs(slope - 1.0) <= 0.2 && t <= 60.0, "|sigma(eta) - sigma(0)| ~ eta on the 8-mode dimerized chain",
         "slope " + fmt("%.4f", slope) + ", sigma(0) " + fmt("%.6g", res["sigma_eta0_re"].get<double>() + 0.0) + ", " +
             fmt("%.2f", t) + " s");
}

void neass_criteria() {
  double t = 0.0;
  auto r = timed_run(shipped("neass_chain"), t);
  const auto& res = r.summary["results"];
  const double e = res["expansion_exponent"].get<double>();
  report(4, e >= 1.9 && t <= 120.0, "NEASS first-order expansion exponent",
         "exponent " + fmt("%.3f", e) + ", " + fmt("%.2f", t) + " s");
  bool ok = r.complete && res["stationarity"].size() == 2;
  std::string detail;
  for (const auto& row : res["stationarity"]) {
    const double x = row["exponent"].get<double>();
    ok = ok && x >= 1.9;
    detail += "t=" + fmt("%g", row["t"].get<double>()) + " exponent " + fmt("%.3f", x) + ", ";
  }
  report(5, ok && t <= 300.0, "NEASS stationarity defect exponent at t = 1 and t = 5", detail + fmt("%.2f", t) + " s");
}

void linear_response() {
  double t = 0.0;
  auto c = shipped("sweep_chain");
  auto r = timed_run(c, t);
  const auto& res = r.summary["results"];
  const double e = res["exponent"].get<double>();
  const auto& indep = res["switching_independence"];
  const double s = indep.empty() ? 0.0 : indep[0]["exponent"].get<double>();
  const double decades = std::log10(*std::max_element(c.protocol.epsilons.begin(), c.protocol.epsilons.end()) /
                                    *std::min_element(c.protocol.epsilons.begin(), c.protocol.epsilons.end()));
  report(6, r.complete && e >= 1.7 && s >= 1.7 && decades >= 1.0 - 1e-12 && t <= 1800.0,
         "total response against eps sigma1 at eta = sqrt(eps), and bump against smoothstep",
         "response exponent " + fmt("%.3f", e) + ", switching exponent " + fmt("%.3f", s) + ", " +
             fmt("%.1f", decades) + " decade(s), " + fmt("%.2f", t) + " s");
}

void naive_total_response() {
  std::vector<FermiProjection> projectors;
  const HofstadterParameters third{1, 3, 0.0};
  const double mu = first_gap_mu(third, 24);
  for (int L : {9, 12, 15}) projectors.push_back(fermi_projection(hofstadter(L, Boundary::torus, third), mu));
  projectors.push_back(fermi_projection(hofstadter(15, Boundary::torus, HofstadterParameters{0, 1, 1.0}), 0.0));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int rank : {1, 20, 48}) {
    DenseMatrix m(81, rank);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = cplx(nd(rng), nd(rng));
    DenseMatrix q = Eigen::HouseholderQR<DenseMatrix>(m).householderQ() * DenseMatrix::Identity(81, rank);
    projectors.push_back({LatticeGeometry(2, 9, Boundary::torus), 1, q * q.adjoint(), 0.0, 0.0, rank});
  }
  double worst = 0.0;
  for (const auto& fp : projectors) worst = std::max(worst, std::abs(naive_dk1(fp)));
  report(7, worst <= 1e-12, "naive total response vanishes",
         std::to_string(projectors.size()) + " projectors, max |value| " + fmt("%.2e", worst));
}

void hall_triangle() {
  double t1 = 0.0, t2 = 0.0;
  auto c = shipped("hall_flux_third");
  auto r = timed_run(c, t1);
  const auto& res = r.summary["results"];
  const std::size_t last = static_cast<std::size_t>(
      std::max_element(c.hall.sizes.begin(), c.hall.sizes.end()) - c.hall.sizes.begin());
  const int chern = res["tknn"].get<int>();
  const double dcf = res["dcf"][last].get<double>(), streda = res["streda"][last].get<double>();
  const std::vector<double> v{static_cast<double>(chern), dcf, streda};
  double pair = 0.0;
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = a + 1; b < v.size(); ++b)
      pair = std::max(pair, std::abs(v[a] - v[b]) / std::max(std::abs(v[a]), std::abs(v[b])));
  const bool topo = c.hall.sizes[last] == 15 && std::abs(c.hall.window_fraction - 1.0 / 3) < 1e-12 && chern == 1 &&
                    std::abs(dcf - 1.0) <= 0.05 && std::abs(streda - 1.0) <= 0.05 && pair <= 0.07;

  auto tc = shipped("hall_trivial");
  auto rt = timed_run(tc, t2);
  const auto& tr = rt.summary["results"];
  const double tz = std::max({std::abs(tr["tknn"].get<double>()), std::abs(tr["dcf"].back().get<double>()),
                              std::abs(tr["streda"].back().get<double>())});
  report(8, topo && tz <= 1e-2 && t1 + t2 <= 300.0, "Hall triangle at flux 1/3 and for the staggered insulator",
         "mu " + fmt("%.4f", res["mu"].get<double>()) + ", tknn " + std::to_string(chern) + ", dcf(L=" +
             std::to_string(c.hall.sizes[last]) + ") " + fmt("%.4f", dcf) + ", streda " + fmt("%.4f", streda) +
             ", max pairwise " + fmt("%.3f", pair) + "; trivial max |value| " + fmt("%.1e", tz) + ", " +
             fmt("%.1f", t1 + t2) + " s");
}

void thermodynamic_limit() {
  double t = 0.0;
  auto r = timed_run(shipped("thermo_chain"), t);
  const auto& res = r.summary["results"];
  const auto& d = res["rho0_differences_cube"];
  bool decreasing = d.size() >= 3;
  for (std::size_t i = d.size() >= 3 ? d.size() - 2 : 1; decreasing && i < d.size(); ++i)
    decreasing = d[i].get<double>() < d[i - 1].get<double>();
  const double gap = res["sigma1_difference_cube_torus"].get<double>();
  const double tail = res["cauchy_tail"].get<double>(), tail_last = res["cauchy_tail_last_difference"].get<double>();
  report(9, r.complete && decreasing && gap <= tail && t <= 900.0,
         "rho0 Cauchy differences decrease and v_D / v_P responses agree within the Cauchy tail",
         "last rho0 differences " + fmt("%.2e", d[d.size() - 3].get<double>()) + " > " +
             fmt("%.2e", d[d.size() - 2].get<double>()) + " > " + fmt("%.2e", d.back().get<double>()) +
             ", |sigma_D - sigma_P| " + fmt("%.3e", gap) + " vs tail " + fmt("%.3e", tail) +
             " (last-difference tail " + fmt("%.3e", tail_last) + (gap <= tail_last ? ", within" : ", exceeded") +
             "), " + fmt("%.1f", t) + " s");
}

void determinism() {
  bool same = true;
  std::string names;
  for (const char* name : {"kubo_chain", "sweep_chain", "hall_trivial"}) {
    auto c = shipped(name);
    auto a = run_experiment(c), b = run_experiment(c);
    same = same && !a.csv.empty() && a.csv == b.csv && a.summary.dump() == b.summary.dump();
    names += std::string(names.empty() ? "" : ", ") + name;
  }
  report(10, same, "identical config and seed give byte-identical CSV", names);
}

}  // namespace

int main() {
  car_suite();
  spectral_consistency();
  kubo_eta_limit();
  neass_criteria();
  linear_response();
  naive_total_response();
  hall_triangle();
  thermodynamic_limit();
  determinism();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
