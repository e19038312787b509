#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "kubolab/errors.hpp"
#include "kubolab/interactions.hpp"
#include "kubolab/onebody.hpp"
#include "kubolab/response.hpp"
#include "kubolab/switching.hpp"

namespace kubolab {

using json = nlohmann::ordered_json;

struct ConfigIssue {
  std::string path;
  std::string message;
};

class ConfigError : public ValidationError {
 public:
  ConfigError(std::string path, std::string message) : ConfigError(std::vector<ConfigIssue>{{std::move(path), std::move(message)}}) {}
  explicit ConfigError(std::vector<ConfigIssue> issues) : ValidationError(render(issues)), issues_(std::move(issues)) {}
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  static std::string render(const std::vector<ConfigIssue>& issues) {
    std::string out;
    for (const auto& i : issues) out += i.path + ": " + i.message + "\n";
    return out;
  }
  std::vector<ConfigIssue> issues_;
};

struct ComplexMatrixConfig {
  std::vector<std::vector<cplx>> rows;
};

struct KineticEntryConfig {
  Coord displacement;
  ComplexMatrixConfig matrix;
};

struct TwoBodyEntryConfig {
  int distance = 1;
  ComplexMatrixConfig matrix;
};

struct ModelConfig {
  std::string preset = "dimerized_chain";  // dimerized_chain | nearest_neighbour | custom
  int d = 1;
  int side = 4;
  Boundary boundary = Boundary::torus;
  int s = 2;
  std::optional<int> particles;
  std::optional<double> filling;
  double t1 = 1.0;
  double t2 = 0.3;
  double w = 0.0;
  double hopping = 1.0;
  double mu = 0.0;
  std::vector<KineticEntryConfig> kinetic;
  std::optional<ComplexMatrixConfig> onsite;
  std::vector<TwoBodyEntryConfig> two_body;
};

struct SiteRef {
  Coord site;
  int orbital = 0;
};

struct LocalTermConfig {
  SiteRef creator;
  SiteRef annihilator;
  cplx coefficient = 1.0;
};

struct PerturbationConfig {
  std::string potential = "sawtooth";  // linear | sawtooth | constant | table | none
  int axis = 0;
  double value = 0.0;
  std::vector<double> table;
  std::vector<LocalTermConfig> local_terms;
};

struct ObservableConfig {
  std::string type = "density";  // density | bond_current | bond_hopping | identity | total_number
  SiteRef first;
  SiteRef second;
};

struct ProtocolConfig {
  std::vector<double> epsilons;
  int window_m = 2;
  std::vector<double> eta_powers = {0.5};
  std::vector<std::string> switching = {"bump"};
  std::vector<double> times = {0.0};
  double tolerance = 1e-9;
};

struct KuboConfig {
  std::vector<double> etas = {1e-1, 1e-2, 1e-3, 1e-4};
  double slope_min = 0.8;
  double slope_max = 1.2;
};

struct NeassConfig {
  std::vector<double> epsilons;
  std::vector<double> times = {1.0, 5.0};
  double exponent_min = 1.9;
};

struct SweepConfig {
  double exponent_min = 1.7;
};

struct HallConfig {
  std::vector<int> sizes = {15};
  Boundary boundary = Boundary::torus;
  int p = 1;
  int q = 3;
  double staggered = 0.0;
  std::optional<double> mu;  // empty: middle of the gap above the lowest band
  double window_fraction = 1.0 / 3.0;
  int nk = 24;
  double relative_tolerance = 0.05;
  double pairwise_tolerance = 0.07;
  double zero_tolerance = 1e-2;
};

struct ThermoConfig {
  std::vector<int> ks = {1, 2, 3, 4};
  Eigen::Index dense_cap = 300;
  int decreasing_count = 3;
};

struct ExperimentConfig {
  std::string kind = "kubo";  // kubo | sweep | neass | hall | thermo
  std::uint64_t seed = 1;
  double gap_tolerance = 1e-8;
  std::string output = "out";
  ModelConfig model;
  PerturbationConfig perturbation;
  ObservableConfig observable;
  ProtocolConfig protocol;
  KuboConfig kubo;
  NeassConfig neass;
  SweepConfig sweep;
  HallConfig hall;
  ThermoConfig thermo;
};

namespace detail {

/// Reads typed fields while collecting issues with their JSON paths.
class ConfigReader {
 public:
  std::vector<ConfigIssue> issues;

  void error(const std::string& path, const std::string& msg) { issues.push_back({path, msg}); }

  const json* child(const json& obj, const std::string& key) const {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  template <class T>
  void read(const json& obj, const std::string& key, const std::string& path, T& out) {
    const json* v = child(obj, key);
    if (!v) return;
    read_value(*v, join(path, key), out);
  }

  template <class T>
  void read(const json& obj, const std::string& key, const std::string& path, std::optional<T>& out) {
    const json* v = child(obj, key);
    if (!v || v->is_null()) return;
    T tmp{};
    if (read_value(*v, join(path, key), tmp)) out = tmp;
  }

  static std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
  static std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

  bool read_value(const json& v, const std::string& path, double& out) {
    if (!v.is_number()) return error(path, "expected a number"), false;
    out = v.get<double>();
    return true;
  }
  bool read_value(const json& v, const std::string& path, int& out) {
    if (!v.is_number_integer()) return error(path, "expected an integer"), false;
    out = v.get<int>();
    return true;
  }
  bool read_value(const json& v, const std::string& path, long& out) {
    if (!v.is_number_integer()) return error(path, "expected an integer"), false;
    out = v.get<long>();
    return true;
  }
  bool read_value(const json& v, const std::string& path, std::uint64_t& out) {
    if (!v.is_number_integer() || v.get<long long>() < 0) return error(path, "expected a non-negative integer"), false;
    out = v.get<std::uint64_t>();
    return true;
  }
  bool read_value(const json& v, const std::string& path, std::string& out) {
    if (!v.is_string()) return error(path, "expected a string"), false;
    out = v.get<std::string>();
    return true;
  }
  bool read_value(const json& v, const std::string& path, Boundary& out) {
    std::string s;
    if (!read_value(v, path, s)) return false;
    if (s != "cube" && s != "torus") return error(path, "expected \"cube\" or \"torus\""), false;
    out = boundary_from_string(s);
    return true;
  }
  bool read_value(const json& v, const std::string& path, cplx& out) {
    if (v.is_number()) {
      out = v.get<double>();
      return true;
    }
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      out = cplx(v[0].get<double>(), v[1].get<double>());
      return true;
    }
    return error(path, "expected a number or [re, im]"), false;
  }
  template <class T>
  bool read_value(const json& v, const std::string& path, std::vector<T>& out) {
    if (!v.is_array()) return error(path, "expected an array"), false;
    out.clear();
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      T item{};
      ok = read_value(v[i], index(path, i), item) && ok;
      out.push_back(item);
    }
    return ok;
  }
  bool read_value(const json& v, const std::string& path, ComplexMatrixConfig& out) {
    return read_value(v, path, out.rows);
  }
  bool read_value(const json& v, const std::string& path, SiteRef& out) {
    if (!v.is_object()) return error(path, "expected an object with site and orbital"), false;
    read(v, "site", path, out.site);
    read(v, "orbital", path, out.orbital);
    if (!child(v, "site")) error(join(path, "site"), "missing");
    return true;
  }
  bool read_value(const json& v, const std::string& path, KineticEntryConfig& out) {
    if (!v.is_object()) return error(path, "expected an object"), false;
    read(v, "displacement", path, out.displacement);
    read(v, "matrix", path, out.matrix);
    return true;
  }
  bool read_value(const json& v, const std::string& path, TwoBodyEntryConfig& out) {
    if (!v.is_object()) return error(path, "expected an object"), false;
    read(v, "distance", path, out.distance);
    read(v, "matrix", path, out.matrix);
    return true;
  }
  bool read_value(const json& v, const std::string& path, LocalTermConfig& out) {
    if (!v.is_object()) return error(path, "expected an object"), false;
    read(v, "creator", path, out.creator);
    read(v, "annihilator", path, out.annihilator);
    read(v, "coefficient", path, out.coefficient);
    return true;
  }

  void unknown_keys(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
    if (!obj.is_object()) return;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool found = false;
      for (const char* k : known) found = found || it.key() == k;
      if (!found) error(join(path, it.key()), "unknown key");
    }
  }
};

inline json to_json(cplx c) {
  if (c.imag() == 0.0) return c.real();
  return json::array({c.real(), c.imag()});
}

inline json to_json(const ComplexMatrixConfig& m) {
  json rows = json::array();
  for (const auto& r : m.rows) {
    json row = json::array();
    for (auto c : r) row.push_back(to_json(c));
    rows.push_back(row);
  }
  return rows;
}

inline json to_json(const SiteRef& r) { return json{{"site", r.site}, {"orbital", r.orbital}}; }

inline std::optional<DenseMatrix> to_matrix(const ComplexMatrixConfig& m, int s) {
  if (static_cast<int>(m.rows.size()) != s) return std::nullopt;
  DenseMatrix out(s, s);
  for (int i = 0; i < s; ++i) {
    if (static_cast<int>(m.rows[i].size()) != s) return std::nullopt;
    for (int j = 0; j < s; ++j) out(i, j) = m.rows[i][j];
  }
  return out;
}

}  // namespace detail

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"kubo", "sweep", "neass", "hall", "thermo"};
  return kinds;
}

/// Model parameters of the many-body example Hamiltonian described by the model block.
inline ModelParameters model_parameters(const ModelConfig& m) {
  ModelParameters p;
  if (m.preset == "dimerized_chain") {
    p = dimerized_chain(m.t1, m.t2, m.w, m.mu);
  } else if (m.preset == "nearest_neighbour") {
    p = nearest_neighbour_model(m.d, m.hopping);
    p.mu = m.mu;
    if (m.w != 0.0) p.two_body[1] = DenseMatrix::Constant(1, 1, cplx(m.w));
  } else {
    p.s = m.s;
    p.mu = m.mu;
    for (const auto& k : m.kinetic) p.kinetic.push_back({k.displacement, *detail::to_matrix(k.matrix, m.s)});
    if (m.onsite) {
      DenseMatrix phi = *detail::to_matrix(*m.onsite, m.s);
      p.onsite = [phi](const Coord&) { return phi; };
    }
    for (const auto& w : m.two_body) p.two_body[w.distance] = *detail::to_matrix(w.matrix, m.s);
  }
  return p;
}

inline int particle_number(const ModelConfig& m, int sites) {
  if (m.particles) return *m.particles;
  return static_cast<int>(std::lround(m.filling.value_or(0.5) * sites * m.s));
}

namespace detail {

inline std::string join_path(const std::string& a, const std::string& b) { return ConfigReader::join(a, b); }

inline void check_site(ConfigReader& r, const SiteRef& ref, const std::string& path, const LatticeGeometry& g, int s) {
  if (static_cast<int>(ref.site.size()) != g.dim()) {
    r.error(join_path(path, "site"), "expected " + std::to_string(g.dim()) + " coordinates");
    return;
  }
  if (!g.contains(ref.site)) r.error(join_path(path, "site"), "outside the box");
  if (ref.orbital < 0 || ref.orbital >= s) r.error(join_path(path, "orbital"), "orbital out of range");
}

}  // namespace detail

/// Semantic checks that need the parsed configuration as a whole.
inline void validate_semantics(const ExperimentConfig& c, detail::ConfigReader& r) {
  using detail::check_site;
  const auto& m = c.model;
  bool kind_ok = false;
  for (const auto& k : experiment_kinds()) kind_ok = kind_ok || k == c.kind;
  if (!kind_ok) r.error("kind", "unknown experiment kind '" + c.kind + "'");
  if (!(c.gap_tolerance > 0.0)) r.error("gap_tolerance", "must be positive");

  if (c.kind == "hall") {
    const auto& h = c.hall;
    if (h.sizes.empty()) r.error("hall.sizes", "must not be empty");
    for (std::size_t i = 0; i < h.sizes.size(); ++i) {
      const int L = h.sizes[i];
      if (L < 2) r.error(detail::ConfigReader::index("hall.sizes", i), "side must be >= 2");
      else if (h.boundary == Boundary::torus && (static_cast<long>(h.p) * L) % h.q != 0)
        r.error(detail::ConfigReader::index("hall.sizes", i),
                "flux " + std::to_string(h.p) + "/" + std::to_string(h.q) + " needs q | p*L on the torus (L = " +
                    std::to_string(L) + ")");
    }
    if (h.q <= 0) r.error("hall.q", "must be positive");
    if (!(h.window_fraction > 0.0 && h.window_fraction <= 1.0)) r.error("hall.window_fraction", "must lie in (0, 1]");
    if (h.nk < 2) r.error("hall.nk", "must be >= 2");
    return;
  }

  if (m.preset != "dimerized_chain" && m.preset != "nearest_neighbour" && m.preset != "custom")
    r.error("model.preset", "unknown preset '" + m.preset + "'");
  if (m.d < 1 || m.d > 3) r.error("model.d", "dimension must be 1, 2 or 3");
  if (m.preset == "dimerized_chain" && m.d != 1) r.error("model.d", "dimerized_chain is one-dimensional");
  const int s = m.preset == "dimerized_chain" ? 2 : (m.preset == "nearest_neighbour" ? 1 : m.s);
  if (m.s != s) r.error("model.s", "preset '" + m.preset + "' has s = " + std::to_string(s));
  if (m.s < 1) r.error("model.s", "must be >= 1");
  if (m.side < 1) r.error("model.side", "must be >= 1");
  if (m.particles && m.filling) r.error("model.particles", "give either particles or filling, not both");
  if (m.filling && !(*m.filling >= 0.0 && *m.filling <= 1.0)) r.error("model.filling", "must lie in [0, 1]");
  if (m.preset == "custom") {
    for (std::size_t i = 0; i < m.kinetic.size(); ++i) {
      const auto path = detail::ConfigReader::index("model.kinetic", i);
      if (static_cast<int>(m.kinetic[i].displacement.size()) != m.d) r.error(path + ".displacement", "wrong length");
      if (!detail::to_matrix(m.kinetic[i].matrix, m.s)) r.error(path + ".matrix", "expected an s x s matrix");
    }
    if (m.onsite && !detail::to_matrix(*m.onsite, m.s)) r.error("model.onsite", "expected an s x s matrix");
    for (std::size_t i = 0; i < m.two_body.size(); ++i)
      if (!detail::to_matrix(m.two_body[i].matrix, m.s))
        r.error(detail::ConfigReader::index("model.two_body", i) + ".matrix", "expected an s x s matrix");
  }
  if (!r.issues.empty()) return;

  // Boxes used by the run: a single box, or Lambda(k) for each k of a thermo run.
  std::vector<LatticeGeometry> boxes;
  if (c.kind == "thermo") {
    if (c.thermo.ks.size() < 2) r.error("thermo.ks", "need at least two box sizes");
    for (int k : c.thermo.ks) {
      if (k < 0) r.error("thermo.ks", "k must be >= 0");
      else boxes.push_back(LatticeGeometry::box(k, m.d, Boundary::cube));
    }
  } else {
    boxes.push_back(LatticeGeometry(m.d, m.side, m.boundary));
  }
  for (const auto& g : boxes) {
    const int modes = g.num_sites() * m.s;
    const int n = particle_number(m, g.num_sites());
    if (n < 0 || n > modes)
      r.error(m.particles ? "model.particles" : "model.filling",
              "N = " + std::to_string(n) + " exceeds the " + std::to_string(modes) + " available modes");
    try {
      validate_parameters(model_parameters(m), g);
    } catch (const std::exception& e) {
      r.error("model", e.what());
    }
  }
  if (!r.issues.empty()) return;
  const auto& g0 = boxes.front();
  const auto& pert = c.perturbation;
  const std::vector<std::string> potentials = {"linear", "sawtooth", "constant", "table", "none"};
  if (std::find(potentials.begin(), potentials.end(), pert.potential) == potentials.end())
    r.error("perturbation.potential", "unknown potential '" + pert.potential + "'");
  if (pert.axis < 0 || pert.axis >= m.d) r.error("perturbation.axis", "axis out of range");
  if (pert.potential == "table" && static_cast<int>(pert.table.size()) != g0.num_sites())
    r.error("perturbation.table", "needs one value per site (" + std::to_string(g0.num_sites()) + ")");
  for (std::size_t i = 0; i < pert.local_terms.size(); ++i) {
    const auto path = detail::ConfigReader::index("perturbation.local_terms", i);
    check_site(r, pert.local_terms[i].creator, path + ".creator", g0, m.s);
    check_site(r, pert.local_terms[i].annihilator, path + ".annihilator", g0, m.s);
  }
  const auto& ob = c.observable;
  const std::vector<std::string> obs = {"density", "bond_current", "bond_hopping", "identity", "total_number"};
  if (std::find(obs.begin(), obs.end(), ob.type) == obs.end())
    r.error("observable.type", "unknown observable '" + ob.type + "'");
  else if (ob.type != "identity" && ob.type != "total_number")
    for (const auto& g : boxes) {
      check_site(r, ob.first, "observable.first", g, m.s);
      if (ob.type != "density") check_site(r, ob.second, "observable.second", g, m.s);
    }

  const auto& pr = c.protocol;
  if (pr.window_m < 1) r.error("protocol.window_m", "window exponent m must be >= 1");
  if (!(pr.tolerance > 0.0)) r.error("protocol.tolerance", "must be positive");
  for (std::size_t i = 0; i < pr.switching.size(); ++i) {
    try {
      switching_by_id(pr.switching[i]);
    } catch (const std::exception& e) {
      r.error(detail::ConfigReader::index("protocol.switching", i), e.what());
    }
  }
  for (std::size_t i = 0; i < pr.times.size(); ++i)
    if (pr.times[i] < 0.0) r.error(detail::ConfigReader::index("protocol.times", i), "must be >= 0");
  if (c.kind == "sweep") {
    if (pr.epsilons.empty()) r.error("protocol.epsilons", "must not be empty");
    if (pr.switching.empty()) r.error("protocol.switching", "must not be empty");
    if (pr.times.empty()) r.error("protocol.times", "must not be empty");
    EtaRule rule{pr.window_m, pr.eta_powers};
    for (std::size_t i = 0; i < pr.epsilons.size(); ++i) {
      const double eps = pr.epsilons[i];
      const auto path = detail::ConfigReader::index("protocol.epsilons", i);
      if (eps == 0.0 || std::abs(eps) > 1.0) {
        r.error(path, "need 0 < |eps| <= 1");
        continue;
      }
      for (double pw : pr.eta_powers)
        if (!rule.admissible(eps, std::min(1.0, std::pow(std::abs(eps), pw))))
          r.error("protocol.eta_powers", "eta = |eps|^" + format_double(pw) + " leaves the window [|eps|^m, |eps|^(1/m)]");
    }
  }
  if (c.kind == "kubo") {
    if (c.kubo.etas.size() < 2) r.error("kubo.etas", "need at least two values");
    for (std::size_t i = 0; i < c.kubo.etas.size(); ++i)
      if (!(c.kubo.etas[i] > 0.0)) r.error(detail::ConfigReader::index("kubo.etas", i), "must be positive");
  }
  if (c.kind == "neass") {
    if (c.neass.epsilons.size() < 2) r.error("neass.epsilons", "need at least two values");
    for (std::size_t i = 0; i < c.neass.epsilons.size(); ++i)
      if (c.neass.epsilons[i] == 0.0 || std::abs(c.neass.epsilons[i]) > 1.0)
        r.error(detail::ConfigReader::index("neass.epsilons", i), "need 0 < |eps| <= 1");
  }
}

inline ExperimentConfig parse_config(const json& j) {
  detail::ConfigReader r;
  ExperimentConfig c;
  if (!j.is_object()) throw ConfigError("", "top level must be an object");
  r.unknown_keys(j, "", {"kind", "seed", "gap_tolerance", "output", "model", "perturbation", "observable", "protocol",
                         "kubo", "neass", "sweep", "hall", "thermo"});
  r.read(j, "kind", "", c.kind);
  r.read(j, "seed", "", c.seed);
  r.read(j, "gap_tolerance", "", c.gap_tolerance);
  r.read(j, "output", "", c.output);
  if (const json* m = r.child(j, "model")) {
    r.unknown_keys(*m, "model", {"preset", "d", "side", "boundary", "s", "particles", "filling", "t1", "t2", "w",
                                 "hopping", "mu", "kinetic", "onsite", "two_body"});
    auto& mc = c.model;
    r.read(*m, "preset", "model", mc.preset);
    if (mc.preset == "nearest_neighbour") mc.s = 1;
    r.read(*m, "d", "model", mc.d);
    r.read(*m, "side", "model", mc.side);
    r.read(*m, "boundary", "model", mc.boundary);
    r.read(*m, "s", "model", mc.s);
    r.read(*m, "particles", "model", mc.particles);
    r.read(*m, "filling", "model", mc.filling);
    r.read(*m, "t1", "model", mc.t1);
    r.read(*m, "t2", "model", mc.t2);
    r.read(*m, "w", "model", mc.w);
    r.read(*m, "hopping", "model", mc.hopping);
    r.read(*m, "mu", "model", mc.mu);
    r.read(*m, "kinetic", "model", mc.kinetic);
    r.read(*m, "onsite", "model", mc.onsite);
    r.read(*m, "two_body", "model", mc.two_body);
  }
  if (const json* p = r.child(j, "perturbation")) {
    r.unknown_keys(*p, "perturbation", {"potential", "axis", "value", "table", "local_terms"});
    r.read(*p, "potential", "perturbation", c.perturbation.potential);
    r.read(*p, "axis", "perturbation", c.perturbation.axis);
    r.read(*p, "value", "perturbation", c.perturbation.value);
    r.read(*p, "table", "perturbation", c.perturbation.table);
    r.read(*p, "local_terms", "perturbation", c.perturbation.local_terms);
  }
  if (const json* o = r.child(j, "observable")) {
    r.unknown_keys(*o, "observable", {"type", "first", "second"});
    r.read(*o, "type", "observable", c.observable.type);
    r.read(*o, "first", "observable", c.observable.first);
    r.read(*o, "second", "observable", c.observable.second);
  }
  if (const json* p = r.child(j, "protocol")) {
    r.unknown_keys(*p, "protocol", {"epsilons", "window_m", "eta_powers", "switching", "times", "tolerance"});
    r.read(*p, "epsilons", "protocol", c.protocol.epsilons);
    r.read(*p, "window_m", "protocol", c.protocol.window_m);
    r.read(*p, "eta_powers", "protocol", c.protocol.eta_powers);
    r.read(*p, "switching", "protocol", c.protocol.switching);
    r.read(*p, "times", "protocol", c.protocol.times);
    r.read(*p, "tolerance", "protocol", c.protocol.tolerance);
  }
  if (const json* k = r.child(j, "kubo")) {
    r.unknown_keys(*k, "kubo", {"etas", "slope_min", "slope_max"});
    r.read(*k, "etas", "kubo", c.kubo.etas);
    r.read(*k, "slope_min", "kubo", c.kubo.slope_min);
    r.read(*k, "slope_max", "kubo", c.kubo.slope_max);
  }
  if (const json* n = r.child(j, "neass")) {
    r.unknown_keys(*n, "neass", {"epsilons", "times", "exponent_min"});
    r.read(*n, "epsilons", "neass", c.neass.epsilons);
    r.read(*n, "times", "neass", c.neass.times);
    r.read(*n, "exponent_min", "neass", c.neass.exponent_min);
  }
  if (const json* s = r.child(j, "sweep")) {
    r.unknown_keys(*s, "sweep", {"exponent_min"});
    r.read(*s, "exponent_min", "sweep", c.sweep.exponent_min);
  }
  if (const json* h = r.child(j, "hall")) {
    r.unknown_keys(*h, "hall", {"sizes", "boundary", "p", "q", "staggered", "mu", "window_fraction", "nk",
                                "relative_tolerance", "pairwise_tolerance", "zero_tolerance"});
    auto& hc = c.hall;
    r.read(*h, "sizes", "hall", hc.sizes);
    r.read(*h, "boundary", "hall", hc.boundary);
    r.read(*h, "p", "hall", hc.p);
    r.read(*h, "q", "hall", hc.q);
    r.read(*h, "staggered", "hall", hc.staggered);
    r.read(*h, "mu", "hall", hc.mu);
    r.read(*h, "window_fraction", "hall", hc.window_fraction);
    r.read(*h, "nk", "hall", hc.nk);
    r.read(*h, "relative_tolerance", "hall", hc.relative_tolerance);
    r.read(*h, "pairwise_tolerance", "hall", hc.pairwise_tolerance);
    r.read(*h, "zero_tolerance", "hall", hc.zero_tolerance);
  }
  if (const json* t = r.child(j, "thermo")) {
    r.unknown_keys(*t, "thermo", {"ks", "dense_cap", "decreasing_count"});
    r.read(*t, "ks", "thermo", c.thermo.ks);
    long cap = static_cast<long>(c.thermo.dense_cap);
    r.read(*t, "dense_cap", "thermo", cap);
    c.thermo.dense_cap = cap;
    r.read(*t, "decreasing_count", "thermo", c.thermo.decreasing_count);
  }
  if (r.issues.empty()) validate_semantics(c, r);
  if (!r.issues.empty()) throw ConfigError(r.issues);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("parse error: ") + e.what());
  }
  return parse_config(j);
}

/// Normalised echo: every field with defaults filled in, fixed key order.
inline json to_json(const ExperimentConfig& c) {
  using detail::to_json;
  json j;
  j["kind"] = c.kind;
  j["seed"] = c.seed;
  j["gap_tolerance"] = c.gap_tolerance;
  j["output"] = c.output;
  if (c.kind == "hall") {
    const auto& h = c.hall;
    j["hall"] = {{"sizes", h.sizes},
                 {"boundary", to_string(h.boundary)},
                 {"p", h.p},
                 {"q", h.q},
                 {"staggered", h.staggered},
                 {"mu", h.mu ? json(*h.mu) : json(nullptr)},
                 {"window_fraction", h.window_fraction},
                 {"nk", h.nk},
                 {"relative_tolerance", h.relative_tolerance},
                 {"pairwise_tolerance", h.pairwise_tolerance},
                 {"zero_tolerance", h.zero_tolerance}};
    return j;
  }
  const auto& m = c.model;
  json model = {{"preset", m.preset}, {"d", m.d}, {"side", m.side}, {"boundary", to_string(m.boundary)}, {"s", m.s}};
  if (m.particles) model["particles"] = *m.particles;
  else model["filling"] = m.filling.value_or(0.5);
  if (m.preset == "dimerized_chain") {
    model["t1"] = m.t1;
    model["t2"] = m.t2;
  } else if (m.preset == "nearest_neighbour") {
    model["hopping"] = m.hopping;
  } else {
    json kin = json::array();
    for (const auto& k : m.kinetic) kin.push_back({{"displacement", k.displacement}, {"matrix", to_json(k.matrix)}});
    model["kinetic"] = kin;
    if (m.onsite) model["onsite"] = to_json(*m.onsite);
    json tb = json::array();
    for (const auto& w : m.two_body) tb.push_back({{"distance", w.distance}, {"matrix", to_json(w.matrix)}});
    model["two_body"] = tb;
  }
  if (m.preset != "custom") model["w"] = m.w;
  model["mu"] = m.mu;
  j["model"] = model;

  const auto& p = c.perturbation;
  json pert = {{"potential", p.potential}, {"axis", p.axis}};
  if (p.potential == "constant") pert["value"] = p.value;
  if (p.potential == "table") pert["table"] = p.table;
  json lt = json::array();
  for (const auto& t : p.local_terms)
    lt.push_back({{"creator", to_json(t.creator)}, {"annihilator", to_json(t.annihilator)}, {"coefficient", to_json(t.coefficient)}});
  pert["local_terms"] = lt;
  j["perturbation"] = pert;

  json ob = {{"type", c.observable.type}};
  if (c.observable.type != "identity" && c.observable.type != "total_number") ob["first"] = to_json(c.observable.first);
  if (c.observable.type == "bond_current" || c.observable.type == "bond_hopping") ob["second"] = to_json(c.observable.second);
  j["observable"] = ob;

  if (c.kind == "sweep") {
    const auto& pr = c.protocol;
    j["protocol"] = {{"epsilons", pr.epsilons}, {"window_m", pr.window_m}, {"eta_powers", pr.eta_powers},
                     {"switching", pr.switching}, {"times", pr.times},     {"tolerance", pr.tolerance}};
    j["sweep"] = {{"exponent_min", c.sweep.exponent_min}};
  } else if (c.kind == "kubo") {
    j["kubo"] = {{"etas", c.kubo.etas}, {"slope_min", c.kubo.slope_min}, {"slope_max", c.kubo.slope_max}};
  } else if (c.kind == "neass") {
    j["neass"] = {{"epsilons", c.neass.epsilons}, {"times", c.neass.times}, {"exponent_min", c.neass.exponent_min}};
  } else if (c.kind == "thermo") {
    j["thermo"] = {{"ks", c.thermo.ks},
                   {"dense_cap", static_cast<long>(c.thermo.dense_cap)},
                   {"decreasing_count", c.thermo.decreasing_count}};
  }
  return j;
}

}  // namespace kubolab
