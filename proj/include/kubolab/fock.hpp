#pragma once

#include <bit>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "kubolab/errors.hpp"
#include "kubolab/lattice.hpp"

namespace kubolab {

/// Single-particle mode (site, internal index).
struct Mode {
  int site = 0;
  int orbital = 0;
};

namespace detail {

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

inline bool test_bit(std::span<const std::uint64_t> w, int p) { return (w[p >> 6] >> (p & 63)) & 1u; }
inline void flip_bit(std::span<std::uint64_t> w, int p) { w[p >> 6] ^= std::uint64_t{1} << (p & 63); }

/// Number of set bits at positions < p.
inline int count_below(std::span<const std::uint64_t> w, int p) {
  int c = 0;
  int full = p >> 6;
  for (int i = 0; i < full; ++i) c += std::popcount(w[i]);
  int rem = p & 63;
  if (rem) c += std::popcount(w[full] & ((std::uint64_t{1} << rem) - 1));
  return c;
}

/// Number of set bits strictly between positions a and b.
inline int count_between(std::span<const std::uint64_t> w, int a, int b) {
  if (a > b) std::swap(a, b);
  if (b - a <= 1) return 0;
  return count_below(w, b) - count_below(w, a + 1);
}

}  // namespace detail

/// Fixed-particle-number occupation basis over s * |Lambda| modes.
///
/// Modes are ordered by site (lexicographic coordinates) with the internal index fastest.
/// States are listed in colexicographic order of their occupied-mode sets, which for
/// single-word states is increasing integer order; the rank of a state is then its
/// combinatorial-number-system index, so lookup needs no hash table.
class FockBasis {
public:
  static constexpr std::uint64_t max_dimension = 60'000'000;

  FockBasis(LatticeGeometry geometry, int s, int particles)
      : geometry_(std::move(geometry)), s_(s), particles_(particles) {
    if (s < 1) throw DomainError("internal degrees of freedom s must be >= 1");
    modes_ = s_ * geometry_.num_sites();
    if (particles_ < 0 || particles_ > modes_) throw DomainError("particle number N out of range [0, s*|Lambda|]");
    stride_ = (modes_ + 63) / 64;
    if (stride_ == 0) stride_ = 1;
    std::uint64_t dim = detail::binomial(modes_, particles_);
    if (dim > max_dimension) throw ResourceError("Fock sector dimension too large");
    dim_ = static_cast<std::size_t>(dim);

    binom_.assign(static_cast<std::size_t>(modes_ + 1) * (particles_ + 2), 0);
    for (int n = 0; n <= modes_; ++n)
      for (int k = 0; k <= particles_ + 1; ++k) binom_[n * (particles_ + 2) + k] = detail::binomial(n, k);

    enumerate();
  }

  const LatticeGeometry& geometry() const { return geometry_; }
  int internal_dof() const { return s_; }
  int particles() const { return particles_; }
  int num_modes() const { return modes_; }
  double density() const { return static_cast<double>(particles_) / geometry_.num_sites(); }
  std::size_t dimension() const { return dim_; }
  int words_per_state() const { return stride_; }

  int mode_index(Mode m) const {
    if (m.site < 0 || m.site >= geometry_.num_sites() || m.orbital < 0 || m.orbital >= s_)
      throw DomainError("mode outside the basis");
    return m.site * s_ + m.orbital;
  }
  int mode_index(const Coord& x, int orbital) const { return mode_index(Mode{geometry_.index(x), orbital}); }

  std::span<const std::uint64_t> state(std::size_t i) const {
    return {words_.data() + i * stride_, static_cast<std::size_t>(stride_)};
  }

  bool occupied(std::size_t i, int mode) const { return detail::test_bit(state(i), mode); }

  /// Index of an occupation word, or npos if it has the wrong particle number.
  std::size_t rank(std::span<const std::uint64_t> w) const {
    std::uint64_t r = 0;
    int k = 0;
    for (int wi = 0; wi < stride_; ++wi) {
      std::uint64_t bits = w[wi];
      while (bits) {
        int p = wi * 64 + std::countr_zero(bits);
        bits &= bits - 1;
        ++k;
        if (k > particles_) return npos;
        r += binom_[p * (particles_ + 2) + k];
      }
    }
    if (k != particles_) return npos;
    return static_cast<std::size_t>(r);
  }

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  bool operator==(const FockBasis& o) const {
    return geometry_ == o.geometry_ && s_ == o.s_ && particles_ == o.particles_;
  }

private:
  void enumerate() {
    words_.assign(dim_ * stride_, 0);
    if (particles_ == 0) return;
    // positions of occupied modes, colex order: advance the lowest movable position
    std::vector<int> pos(particles_);
    for (int i = 0; i < particles_; ++i) pos[i] = i;
    for (std::size_t idx = 0; idx < dim_; ++idx) {
      std::span<std::uint64_t> w(words_.data() + idx * stride_, stride_);
      for (int p : pos) detail::flip_bit(w, p);
      int j = 0;
      while (j < particles_ && (j + 1 < particles_ ? pos[j] + 1 == pos[j + 1] : pos[j] + 1 == modes_)) ++j;
      if (j == particles_) break;
      ++pos[j];
      for (int i = 0; i < j; ++i) pos[i] = i;
    }
  }

  LatticeGeometry geometry_;
  int s_;
  int particles_;
  int modes_ = 0;
  int stride_ = 1;
  std::size_t dim_ = 0;
  std::vector<std::uint64_t> words_;
  std::vector<std::uint64_t> binom_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

inline BasisPtr enumerate_basis(const LatticeGeometry& geometry, int s, int particles) {
  return std::make_shared<const FockBasis>(geometry, s, particles);
}

}  // namespace kubolab
