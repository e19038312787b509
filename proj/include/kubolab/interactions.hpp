#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "kubolab/operator.hpp"

namespace kubolab {

/// Ladder operator on a site given by coordinates; resolved to a flat mode per box.
struct SiteLadder {
  Coord site;
  int orbital = 0;
  bool dagger = false;
};

struct SiteMonomial {
  cplx coeff{1.0, 0.0};
  std::vector<SiteLadder> ops;
};

/// Phi(X): support X and a number-conserving, self-adjoint operator on it.
struct Term {
  std::vector<Coord> support;
  std::vector<SiteMonomial> monomials;
};

/// Interaction {Phi^{Lambda(k)}}: a term generator per box.
struct Interaction {
  int d = 1;
  int s = 1;
  Boundary boundary = Boundary::cube;
  std::function<std::vector<Term>(const LatticeGeometry&)> generator;

  LatticeGeometry geometry(int k) const { return LatticeGeometry::box(k, d, boundary); }
  std::vector<Term> terms(int k) const { return generator(geometry(k)); }
};

inline std::vector<Monomial> resolve(const FockBasis& basis, const std::vector<Term>& terms) {
  const auto& g = basis.geometry();
  std::vector<Monomial> out;
  for (const auto& t : terms)
    for (const auto& m : t.monomials) {
      Monomial flat{m.coeff, {}};
      for (const auto& op : m.ops) flat.ops.push_back({basis.mode_index(op.site, op.orbital), op.dagger});
      out.push_back(std::move(flat));
    }
  (void)g;
  return out;
}

/// Operator family member A^{Lambda} = sum_X Phi^{Lambda}(X) on the basis sector.
inline ManyBodyOperator assemble(const BasisPtr& basis, const std::vector<Term>& terms) {
  return sector_matrix(basis, resolve(*basis, terms));
}

namespace detail {

/// Exact operator norm of a local term on the full Fock space of its support modes.
inline double local_operator_norm(const std::vector<Coord>& support, int s, const std::vector<SiteMonomial>& monos) {
  std::map<Coord, int> local;
  for (const auto& x : support) local.emplace(x, 0);
  int idx = 0;
  for (auto& [x, i] : local) i = idx++;
  const int modes = static_cast<int>(local.size()) * s;
  if (modes > 12) throw ResourceError("term support too large for exact local norm");
  const Eigen::Index dim = Eigen::Index{1} << modes;
  DenseMatrix m = DenseMatrix::Zero(dim, dim);
  for (const auto& mono : monos) {
    std::vector<Ladder> ops;
    for (const auto& op : mono.ops) {
      auto it = local.find(op.site);
      if (it == local.end()) throw DomainError("monomial acts outside its term support");
      ops.push_back({it->second * s + op.orbital, op.dagger});
    }
    for (Eigen::Index w = 0; w < dim; ++w) {
      std::uint64_t word = static_cast<std::uint64_t>(w);
      int sign = apply_monomial(ops, std::span<std::uint64_t>(&word, 1));
      if (sign) m(static_cast<Eigen::Index>(word), w) += mono.coeff * static_cast<double>(sign);
    }
  }
  if ((m - m.adjoint()).norm() <= 1e-12 * std::max(1.0, m.norm())) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

struct SupportGroup {
  std::vector<int> sites;  // indices in the metric geometry
  double norm = 0.0;
};

/// Groups terms by support and evaluates ||Phi(X)|| for each X (summing terms with equal support).
inline std::vector<SupportGroup> group_norms(const std::vector<Term>& terms, int s, const LatticeGeometry& metric) {
  std::map<std::vector<Coord>, std::vector<SiteMonomial>> groups;
  for (const auto& t : terms) {
    auto key = t.support;
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    auto& dst = groups[key];
    dst.insert(dst.end(), t.monomials.begin(), t.monomials.end());
  }
  std::vector<SupportGroup> out;
  for (const auto& [support, monos] : groups) {
    SupportGroup g;
    for (const auto& x : support) g.sites.push_back(metric.index(x));
    g.norm = local_operator_norm(support, s, monos);
    out.push_back(std::move(g));
  }
  return out;
}

/// sup_{x,y} sum_{X ni x,y} diam(X)^n exp(a d(x,y)) ||Phi(X)||.
inline double weighted_norm(const std::vector<SupportGroup>& groups, const LatticeGeometry& metric, double a, int n) {
  const int sites = metric.num_sites();
  std::vector<double> acc(static_cast<std::size_t>(sites) * sites, 0.0);
  for (const auto& g : groups) {
    if (g.norm == 0.0) continue;
    const double diam = metric.diameter(g.sites);
    const double w = std::pow(diam, n) * g.norm;
    if (w == 0.0) continue;
    for (int x : g.sites)
      for (int y : g.sites) acc[static_cast<std::size_t>(x) * sites + y] += w * std::exp(a * metric.distance(x, y));
  }
  double best = 0.0;
  for (double v : acc) best = std::max(best, v);
  return best;
}

}  // namespace detail

/// ||Phi^{Lambda(k)}||_{a,n}.
inline double interaction_norm(const Interaction& phi, double a, int n, int k) {
  const auto geom = phi.geometry(k);
  return detail::weighted_norm(detail::group_norms(phi.generator(geom), phi.s, geom), geom, a, n);
}

/// ||(Phi^{Lambda(k1)} - Phi^{Lambda(k2)})|_{Lambda(M)}||_{a,n}, evaluated with the cube metric of Lambda(M).
inline double cauchy_diagnostic(const Interaction& phi, int M, int k1, int k2, double a, int n) {
  if (M < 0 || M > std::min(k1, k2)) throw DomainError("cauchy_diagnostic requires M <= min(k1, k2)");
  const auto window = LatticeGeometry::box(M, phi.d, Boundary::cube);
  auto restrict_terms = [&](int k, double sign) {
    std::vector<Term> out;
    for (auto t : phi.terms(k)) {
      bool inside = std::all_of(t.support.begin(), t.support.end(), [&](const Coord& x) { return window.contains(x); });
      if (!inside) continue;
      for (auto& m : t.monomials) m.coeff *= sign;
      out.push_back(std::move(t));
    }
    return out;
  };
  auto diff = restrict_terms(k1, 1.0);
  auto rhs = restrict_terms(k2, -1.0);
  diff.insert(diff.end(), rhs.begin(), rhs.end());
  return detail::weighted_norm(detail::group_norms(diff, phi.s, window), window, a, n);
}

// ---------------------------------------------------------------------------
// Example Hamiltonian H = sum a*_x T(x-y) a_y + sum a*_x phi(x) a_x + sum n_x W(d) n_y - mu N

struct StencilEntry {
  Coord displacement;
  DenseMatrix matrix;
};

struct ModelParameters {
  int s = 1;
  std::vector<StencilEntry> kinetic;                  // T on a finite stencil, zero elsewhere
  std::function<DenseMatrix(const Coord&)> onsite;    // phi(x); empty means 0
  std::map<int, DenseMatrix> two_body;                // W(distance); absent distances are 0
  double mu = 0.0;

  std::optional<DenseMatrix> kinetic_at(const Coord& r) const {
    for (const auto& e : kinetic)
      if (e.displacement == r) return e.matrix;
    return std::nullopt;
  }
};

/// Checks T(-x) = T(x)^*, Hermiticity of phi samples and of W, and matrix shapes.
inline void validate_parameters(const ModelParameters& p, const LatticeGeometry& geom) {
  auto shape_ok = [&](const DenseMatrix& m) { return m.rows() == p.s && m.cols() == p.s; };
  for (const auto& e : p.kinetic) {
    if (!shape_ok(e.matrix)) throw ValidationError("kinetic matrix has wrong shape");
    Coord neg = e.displacement;
    for (auto& c : neg) c = -c;
    auto back = p.kinetic_at(neg);
    DenseMatrix expect = e.matrix.adjoint();
    double defect = back ? (*back - expect).norm() : expect.norm();
    if (defect > 1e-12) throw ValidationError("kinetic stencil violates T(-x) = T(x)^*");
  }
  for (const auto& [dist, w] : p.two_body) {
    if (!shape_ok(w)) throw ValidationError("two-body matrix has wrong shape");
    if ((w - w.adjoint()).norm() > 1e-12) throw ValidationError("two-body matrix W is not self-adjoint");
  }
  if (p.onsite)
    for (int i = 0; i < geom.num_sites(); ++i) {
      auto m = p.onsite(geom.coord(i));
      if (!shape_ok(m)) throw ValidationError("onsite matrix has wrong shape");
      if ((m - m.adjoint()).norm() > 1e-12) throw ValidationError("onsite matrix phi is not self-adjoint");
    }
}

/// Smallest C with ||T(x)|| <= C exp(-b |x|) and ||W(r)|| <= C exp(-b r) on all lattice vectors of the box.
inline double decay_constant(const ModelParameters& p, double b, const LatticeGeometry& geom) {
  double c = 0.0;
  for (int i = 0; i < geom.num_sites(); ++i) {
    Coord r = geom.coord(i);
    int len = 0;
    for (int v : r) len += std::abs(v);
    if (auto t = p.kinetic_at(r)) {
      Eigen::JacobiSVD<DenseMatrix> svd(*t);
      c = std::max(c, svd.singularValues()(0) * std::exp(b * len));
    }
  }
  for (const auto& [dist, w] : p.two_body) {
    Eigen::JacobiSVD<DenseMatrix> svd(w);
    c = std::max(c, svd.singularValues()(0) * std::exp(b * dist));
  }
  return c;
}

/// Interaction of the example Hamiltonian on any box of the given family.
inline std::vector<Term> example_terms(const ModelParameters& p, const LatticeGeometry& geom) {
  std::vector<Term> out;
  const int n = geom.num_sites();
  const int s = p.s;
  for (int xi = 0; xi < n; ++xi) {
    Coord x = geom.coord(xi);
    for (int yi = 0; yi < n; ++yi) {
      Coord y = geom.coord(yi);
      auto t = p.kinetic_at(geom.difference(x, y));
      if (!t) continue;
      Term term;
      term.support = xi == yi ? std::vector<Coord>{x} : std::vector<Coord>{x, y};
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j)
          if ((*t)(i, j) != cplx(0.0)) term.monomials.push_back({(*t)(i, j), {{x, i, true}, {y, j, false}}});
      if (!term.monomials.empty()) out.push_back(std::move(term));
    }
    DenseMatrix onsite = p.onsite ? p.onsite(x) : DenseMatrix::Zero(s, s);
    onsite -= p.mu * DenseMatrix::Identity(s, s);
    Term term{{x}, {}};
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        if (onsite(i, j) != cplx(0.0)) term.monomials.push_back({onsite(i, j), {{x, i, true}, {x, j, false}}});
    if (!term.monomials.empty()) out.push_back(std::move(term));
  }
  if (!p.two_body.empty())
    for (int xi = 0; xi < n; ++xi)
      for (int yi = xi + 1; yi < n; ++yi) {
        auto it = p.two_body.find(geom.distance(xi, yi));
        if (it == p.two_body.end()) continue;
        Coord x = geom.coord(xi), y = geom.coord(yi);
        Term term{{x, y}, {}};
        for (int i = 0; i < s; ++i)
          for (int j = 0; j < s; ++j) {
            cplx w = 0.5 * it->second(i, j);
            if (w == cplx(0.0)) continue;
            term.monomials.push_back({w, {{x, i, true}, {x, i, false}, {y, j, true}, {y, j, false}}});
            term.monomials.push_back({w, {{y, i, true}, {y, i, false}, {x, j, true}, {x, j, false}}});
          }
        if (!term.monomials.empty()) out.push_back(std::move(term));
      }
  return out;
}

inline Interaction example_interaction(const ModelParameters& p, int d, Boundary boundary) {
  return Interaction{d, p.s, boundary, [p](const LatticeGeometry& g) { return example_terms(p, g); }};
}

inline ManyBodyOperator build_example_hamiltonian(const ModelParameters& p, const BasisPtr& basis) {
  if (basis->internal_dof() != p.s) throw ValidationError("model s does not match basis");
  validate_parameters(p, basis->geometry());
  auto h = assemble(basis, example_terms(p, basis->geometry()));
  if (h.hermitian_defect() > 1e-12 * std::max(1.0, h.norm()))
    throw ValidationError("kinetic term is not Hermitian on this box (check stencil against torus wrap)");
  h.mark_hermitian(1e-12);
  return h;
}

/// Dimerized chain with s = 2: intra-cell hopping t1, inter-cell hopping t2 (orbital 1 of x to orbital 0 of x+1),
/// optional nearest-neighbour density-density coupling w.
inline ModelParameters dimerized_chain(double t1, double t2, double w = 0.0, double mu = 0.0) {
  ModelParameters p;
  p.s = 2;
  DenseMatrix t0 = DenseMatrix::Zero(2, 2);
  t0(0, 1) = -t1;
  t0(1, 0) = -t1;
  DenseMatrix tp = DenseMatrix::Zero(2, 2);
  tp(0, 1) = -t2;  // a*_{x+1,0} a_{x,1}
  p.kinetic = {{{0}, t0}, {{1}, tp}, {{-1}, tp.adjoint()}};
  if (w != 0.0) p.two_body[1] = w * DenseMatrix::Ones(2, 2);
  p.mu = mu;
  return p;
}

/// Single-orbital nearest-neighbour hopping -t on a d-dimensional lattice.
inline ModelParameters nearest_neighbour_model(int d, double t) {
  ModelParameters p;
  p.s = 1;
  for (int axis = 0; axis < d; ++axis)
    for (int sgn : {1, -1}) {
      Coord r(d, 0);
      r[axis] = sgn;
      p.kinetic.push_back({r, DenseMatrix::Constant(1, 1, cplx(-t))});
    }
  return p;
}

// ---------------------------------------------------------------------------
// Lipschitz potentials

struct LipschitzPotential {
  std::string name;
  int d = 1;
  Boundary boundary = Boundary::cube;
  std::function<double(const LatticeGeometry&, const Coord&)> value;

  double operator()(const LatticeGeometry& g, const Coord& x) const { return value(g, x); }
};

/// v_D(x) = x_axis (cube geometry).
inline LipschitzPotential linear_potential(int d, int axis = 0) {
  if (axis < 0 || axis >= d) throw DomainError("potential axis out of range");
  return {"linear", d, Boundary::cube, [axis](const LatticeGeometry&, const Coord& x) { return double(x[axis]); }};
}

/// Saw-tooth v_P on the torus, k = floor(L/2): x on [-k/2, k/2] (closed), k - x above, -k - x below.
inline LipschitzPotential sawtooth_potential(int d, int axis = 0) {
  if (axis < 0 || axis >= d) throw DomainError("potential axis out of range");
  return {"sawtooth", d, Boundary::torus, [axis](const LatticeGeometry& g, const Coord& x) {
            const int k = g.radius();
            const int xi = x[axis];
            if (2 * std::abs(xi) <= k) return double(xi);
            return xi > 0 ? double(k - xi) : double(-k - xi);
          }};
}

inline LipschitzPotential constant_potential(int d, double c, Boundary b = Boundary::cube) {
  return {"constant", d, b, [c](const LatticeGeometry&, const Coord&) { return c; }};
}

inline ManyBodyOperator potential_operator(const LipschitzPotential& v, const BasisPtr& basis) {
  const auto& g = basis->geometry();
  const int s = basis->internal_dof();
  std::vector<double> per_mode(basis->num_modes());
  for (int site = 0; site < g.num_sites(); ++site) {
    double val = v(g, g.coord(site));
    for (int i = 0; i < s; ++i) per_mode[site * s + i] = val;
  }
  const auto dim = static_cast<Eigen::Index>(basis->dimension());
  SparseMatrix m(dim, dim);
  m.reserve(Eigen::VectorXi::Constant(dim, 1));
  for (Eigen::Index j = 0; j < dim; ++j) {
    double sum = 0.0;
    auto w = basis->state(static_cast<std::size_t>(j));
    for (std::size_t wi = 0; wi < w.size(); ++wi) {
      std::uint64_t bits = w[wi];
      while (bits) {
        sum += per_mode[wi * 64 + std::countr_zero(bits)];
        bits &= bits - 1;
      }
    }
    if (sum != 0.0) m.insert(j, j) = sum;
  }
  return {basis, std::move(m), true};
}

/// C_v = sup_k sup_{x != y} |v(x) - v(y)| / d(x, y) over the listed boxes.
inline double lipschitz_constant(const LipschitzPotential& v, const std::vector<int>& k_range) {
  if (k_range.empty()) throw DomainError("lipschitz_constant needs a nonempty k range");
  double c = 0.0;
  for (int k : k_range) {
    auto g = LatticeGeometry::box(k, v.d, v.boundary);
    std::vector<double> vals(g.num_sites());
    for (int i = 0; i < g.num_sites(); ++i) vals[i] = v(g, g.coord(i));
    for (int i = 0; i < g.num_sites(); ++i)
      for (int j = i + 1; j < g.num_sites(); ++j)
        c = std::max(c, std::abs(vals[i] - vals[j]) / g.distance(i, j));
  }
  return c;
}

struct PotentialLimit {
  bool stabilized = false;
  int from_k = -1;                 // smallest listed k from which the window values agree with the largest k
  std::vector<double> limit;       // v on Lambda(M) at the largest k, lexicographic site order
  double max_variation = 0.0;      // over k >= from_k
};

/// Checks that v^{Lambda(k)} restricted to Lambda(M) stops changing (within tol) along k_range.
inline PotentialLimit potential_limit_check(const LipschitzPotential& v, int M, std::vector<int> k_range,
                                            double tol = 1e-12) {
  std::sort(k_range.begin(), k_range.end());
  std::erase_if(k_range, [M](int k) { return k < M; });
  PotentialLimit out;
  if (k_range.empty()) return out;
  auto window = LatticeGeometry::box(M, v.d, Boundary::cube);
  auto sample = [&](int k) {
    auto g = LatticeGeometry::box(k, v.d, v.boundary);
    std::vector<double> vals(window.num_sites());
    for (int i = 0; i < window.num_sites(); ++i) vals[i] = v(g, window.coord(i));
    return vals;
  };
  out.limit = sample(k_range.back());
  out.from_k = k_range.back();
  for (auto it = k_range.rbegin() + 1; it != k_range.rend(); ++it) {
    auto vals = sample(*it);
    double var = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) var = std::max(var, std::abs(vals[i] - out.limit[i]));
    if (var > tol) break;
    out.from_k = *it;
    out.max_variation = std::max(out.max_variation, var);
  }
  out.stabilized = out.from_k < k_range.back();
  return out;
}

}  // namespace kubolab
