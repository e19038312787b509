#pragma once

#include <random>

#include "kubolab/interactions.hpp"
#include "kubolab/spectral.hpp"

namespace kubolab::fixtures {

/// 4-cell dimerized chain (8 modes) on a torus at half filling.
struct Chain {
  LatticeGeometry geometry{1, 4, Boundary::torus};
  BasisPtr basis = enumerate_basis(geometry, 2, 4);
  ManyBodyOperator h = build_example_hamiltonian(dimerized_chain(1.0, 0.3), basis);
  ManyBodyOperator v = potential_operator(sawtooth_potential(1), basis);
  Mode mode(int cell, int orbital) const { return Mode{geometry.index({cell}), orbital}; }
};

inline DenseMatrix random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  DenseMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cplx(nd(rng), nd(rng));
  return 0.5 * (m + m.adjoint());
}

inline ManyBodyOperator random_operator(const BasisPtr& b, std::mt19937_64& rng) {
  return ManyBodyOperator::from_dense(b, random_hermitian(static_cast<Eigen::Index>(b->dimension()), rng), true);
}

}  // namespace kubolab::fixtures
