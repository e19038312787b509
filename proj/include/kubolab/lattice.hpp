#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "kubolab/errors.hpp"

namespace kubolab {

enum class Boundary { cube, torus };

inline std::string to_string(Boundary b) { return b == Boundary::cube ? "cube" : "torus"; }

inline Boundary boundary_from_string(const std::string& s) {
  if (s == "cube") return Boundary::cube;
  if (s == "torus") return Boundary::torus;
  throw DomainError("unknown boundary '" + s + "'");
}

using Coord = std::vector<int>;

/// Finite box of side L in Z^d with coordinates lo..lo+L-1 per axis, lo = -floor(L/2).
/// For L = 2k+1 this is Lambda(k) = {-k,...,k}^d.
class LatticeGeometry {
public:
  LatticeGeometry(int d, int side, Boundary boundary) : d_(d), side_(side), boundary_(boundary) {
    if (d < 1) throw DomainError("lattice dimension must be >= 1");
    if (side < 1) throw DomainError("lattice side must be >= 1");
    lo_ = -(side / 2);
    std::int64_t n = 1;
    for (int i = 0; i < d; ++i) {
      n *= side;
      if (n > (std::int64_t{1} << 30)) throw ResourceError("lattice too large");
    }
    sites_ = static_cast<int>(n);
  }

  /// Lambda(k) with side 2k+1.
  static LatticeGeometry box(int k, int d, Boundary boundary) {
    if (k < 0) throw DomainError("box radius must be >= 0");
    return LatticeGeometry(d, 2 * k + 1, boundary);
  }

  int dim() const { return d_; }
  int side() const { return side_; }
  Boundary boundary() const { return boundary_; }
  int num_sites() const { return sites_; }
  int lo() const { return lo_; }
  int hi() const { return lo_ + side_ - 1; }
  /// Radius k of the box Lambda(k); floor(L/2) for even sides.
  int radius() const { return side_ / 2; }

  bool contains(const Coord& x) const {
    if (static_cast<int>(x.size()) != d_) return false;
    for (int c : x)
      if (c < lo_ || c > hi()) return false;
    return true;
  }

  /// Lexicographic index, first coordinate slowest.
  int index(const Coord& x) const {
    if (!contains(x)) throw DomainError("site outside the box");
    int idx = 0;
    for (int c : x) idx = idx * side_ + (c - lo_);
    return idx;
  }

  Coord coord(int index) const {
    if (index < 0 || index >= sites_) throw DomainError("site index out of range");
    Coord x(d_);
    for (int i = d_ - 1; i >= 0; --i) {
      x[i] = index % side_ + lo_;
      index /= side_;
    }
    return x;
  }

  /// Per-axis distance: |delta| on the cube, min(|delta|, L-|delta|) on the torus.
  int axis_distance(int a, int b) const {
    int delta = std::abs(a - b);
    if (boundary_ == Boundary::torus && side_ - delta < delta) delta = side_ - delta;
    return delta;
  }

  /// l1 metric d^{Lambda}(x, y).
  int distance(const Coord& x, const Coord& y) const {
    if (!contains(x) || !contains(y)) throw DomainError("site outside the box");
    int sum = 0;
    for (int i = 0; i < d_; ++i) sum += axis_distance(x[i], y[i]);
    return sum;
  }

  int distance(int i, int j) const { return distance(coord(i), coord(j)); }

  /// Wrap an arbitrary coordinate into the box (torus) or report containment failure (cube).
  int wrap(int c) const {
    int off = ((c - lo_) % side_ + side_) % side_;
    return off + lo_;
  }

  /// x (-) y: plain difference on the cube, difference reduced into the box on the torus.
  Coord difference(const Coord& x, const Coord& y) const {
    Coord r(d_);
    for (int i = 0; i < d_; ++i) {
      r[i] = x[i] - y[i];
      if (boundary_ == Boundary::torus) r[i] = wrap(r[i]);
    }
    return r;
  }

  /// Largest distance between two members of the set (0 for singletons).
  int diameter(const std::vector<int>& sites) const {
    int diam = 0;
    for (std::size_t a = 0; a < sites.size(); ++a)
      for (std::size_t b = a + 1; b < sites.size(); ++b) {
        int dd = distance(sites[a], sites[b]);
        if (dd > diam) diam = dd;
      }
    return diam;
  }

  bool operator==(const LatticeGeometry& o) const {
    return d_ == o.d_ && side_ == o.side_ && boundary_ == o.boundary_;
  }

private:
  int d_;
  int side_;
  Boundary boundary_;
  int lo_ = 0;
  int sites_ = 1;
};

}  // namespace kubolab
