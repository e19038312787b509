#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "kubolab/errors.hpp"
#include "kubolab/operator.hpp"

namespace kubolab {

/// Full-Fock-space ladder operators as exact signed partial permutations.
///
/// a_p maps the basis state |w> to sign * |w'> or to 0, so each operator is one
/// (target, sign) pair per column; products and anticommutators stay exact integers.
namespace fullfock {

struct Column {
  std::uint32_t target = 0;
  int sign = 0;  // 0: column is zero
};
using LadderTable = std::vector<Column>;

enum class SignRule {
  jordan_wigner,  // (-1)^{occupied modes below p}
  broken,         // negative control: no string
};

inline LadderTable ladder(int modes, int p, bool dagger, SignRule rule = SignRule::jordan_wigner) {
  const std::uint32_t dim = std::uint32_t{1} << modes;
  LadderTable op(dim);
  for (std::uint32_t w = 0; w < dim; ++w) {
    bool occ = (w >> p) & 1u;
    if (occ == dagger) continue;
    int below = std::popcount(w & ((std::uint32_t{1} << p) - 1));
    int sign = (rule == SignRule::jordan_wigner && (below & 1)) ? -1 : 1;
    op[w] = {w ^ (std::uint32_t{1} << p), sign};
  }
  return op;
}

/// Integer sparse column representation of a sum of partial permutations.
using SumColumn = std::vector<std::pair<std::uint32_t, int>>;

inline SumColumn anticommutator_column(const LadderTable& a, const LadderTable& b, std::uint32_t w) {
  SumColumn out;
  auto push = [&](std::uint32_t t, int s) {
    for (auto& e : out)
      if (e.first == t) {
        e.second += s;
        return;
      }
    out.emplace_back(t, s);
  };
  if (b[w].sign != 0) {
    const auto& ab = a[b[w].target];
    if (ab.sign != 0) push(ab.target, ab.sign * b[w].sign);
  }
  if (a[w].sign != 0) {
    const auto& ba = b[a[w].target];
    if (ba.sign != 0) push(ba.target, ba.sign * a[w].sign);
  }
  std::erase_if(out, [](const auto& e) { return e.second == 0; });
  return out;
}

inline bool is_scaled_identity_column(const SumColumn& c, std::uint32_t w, int scale) {
  if (scale == 0) return c.empty();
  return c.size() == 1 && c[0].first == w && c[0].second == scale;
}

}  // namespace fullfock

struct CarReport {
  bool passed = true;
  int modes = 0;
  long checked = 0;
  long failures = 0;
  std::string first_failure;
};

/// Verifies {a_p,a_q} = 0, {a*_p,a*_q} = 0 and {a_p,a*_q} = delta_pq Id on the full Fock space.
inline CarReport car_check(int modes, fullfock::SignRule rule = fullfock::SignRule::jordan_wigner) {
  if (modes < 1) throw DomainError("car_check needs at least one mode");
  if (modes > 12) throw ResourceError("car_check limited to 12 modes");
  using namespace fullfock;
  const std::uint32_t dim = std::uint32_t{1} << modes;
  std::vector<LadderTable> ann, cre;
  for (int p = 0; p < modes; ++p) {
    ann.push_back(ladder(modes, p, false, rule));
    cre.push_back(ladder(modes, p, true, rule));
  }
  CarReport rep;
  rep.modes = modes;
  auto check = [&](const LadderTable& a, const LadderTable& b, int scale, const char* what, int p, int q) {
    for (std::uint32_t w = 0; w < dim; ++w) {
      ++rep.checked;
      if (!is_scaled_identity_column(anticommutator_column(a, b, w), w, scale)) {
        if (rep.failures++ == 0)
          rep.first_failure = std::string(what) + " p=" + std::to_string(p) + " q=" + std::to_string(q) +
                              " state=" + std::to_string(w);
        rep.passed = false;
      }
    }
  };
  for (int p = 0; p < modes; ++p)
    for (int q = 0; q < modes; ++q) {
      check(ann[p], ann[q], 0, "{a_p,a_q}", p, q);
      check(cre[p], cre[q], 0, "{a*_p,a*_q}", p, q);
      check(ann[p], cre[q], p == q ? 1 : 0, "{a_p,a*_q}", p, q);
    }
  return rep;
}

/// Dense a*_p a_q on the full Fock space restricted to the N-particle words of `basis`.
/// Independent oracle for `bilinear`.
inline DenseMatrix fullfock_bilinear_in_sector(const FockBasis& basis, int p, int q) {
  const int modes = basis.num_modes();
  if (modes > 12) throw ResourceError("full-Fock oracle limited to 12 modes");
  auto cre = fullfock::ladder(modes, p, true);
  auto ann = fullfock::ladder(modes, q, false);
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  DenseMatrix out = DenseMatrix::Zero(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    auto w = static_cast<std::uint32_t>(basis.state(static_cast<std::size_t>(j))[0]);
    const auto& c1 = ann[w];
    if (c1.sign == 0) continue;
    const auto& c2 = cre[c1.target];
    if (c2.sign == 0) continue;
    std::uint64_t word = c2.target;
    auto i = basis.rank(std::span<const std::uint64_t>(&word, 1));
    out(static_cast<Eigen::Index>(i), j) = static_cast<double>(c1.sign * c2.sign);
  }
  return out;
}

}  // namespace kubolab
