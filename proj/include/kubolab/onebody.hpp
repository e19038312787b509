#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "kubolab/errors.hpp"
#include "kubolab/format.hpp"
#include "kubolab/lattice.hpp"
#include "kubolab/operator.hpp"

namespace kubolab {

/// One-body lattice Hamiltonian on l^2(Lambda, C^s), s = 1 for the Hofstadter family.
struct OneBodyHamiltonian {
  LatticeGeometry geometry{2, 1, Boundary::torus};
  int s = 1;
  DenseMatrix matrix;
  int flux_p = 0;
  int flux_q = 1;
  double staggered = 0.0;

  Eigen::Index dimension() const { return matrix.rows(); }
  double flux() const { return static_cast<double>(flux_p) / flux_q; }
};

struct HofstadterParameters {
  int p = 0;
  int q = 1;
  double staggered = 0.0;  // on-site (-1)^{x1+x2} staggered
  double hopping = 1.0;
};

namespace detail {

inline void check_flux(const LatticeGeometry& g, int p, int q) {
  if (q <= 0) throw DomainError("flux denominator q must be positive");
  if (g.boundary() == Boundary::torus && (static_cast<long>(p) * g.side()) % q != 0)
    throw DomainError("flux " + std::to_string(p) + "/" + std::to_string(q) + " incompatible with torus side " +
                      std::to_string(g.side()) + " (q must divide p*L)");
}

/// Peierls phase exp(2 pi i phi x1) on the bond x -> x + e2.
inline cplx vertical_phase(double phi, int x1) { return std::polar(1.0, 2.0 * std::numbers::pi * phi * x1); }

}  // namespace detail

/// Nearest-neighbour hopping -t with Landau-gauge Peierls phases on vertical bonds and an optional staggered term,
/// on a d = 2 box of side L (torus: q must divide p L).
inline OneBodyHamiltonian hofstadter(int side, Boundary boundary, const HofstadterParameters& hp) {
  LatticeGeometry g(2, side, boundary);
  detail::check_flux(g, hp.p, hp.q);
  const double phi = static_cast<double>(hp.p) / hp.q;
  const int n = g.num_sites();
  DenseMatrix h = DenseMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    Coord x = g.coord(i);
    h(i, i) = hp.staggered * (((x[0] + x[1]) % 2 == 0) ? 1.0 : -1.0);
    for (int axis = 0; axis < 2; ++axis) {
      Coord y = x;
      y[axis] += 1;
      if (!g.contains(y)) {
        if (boundary == Boundary::cube) continue;
        y[axis] = g.wrap(y[axis]);
      }
      const int j = g.index(y);
      if (j == i) continue;
      cplx amp = -hp.hopping * (axis == 1 ? detail::vertical_phase(phi, x[0]) : cplx(1.0));
      h(j, i) += amp;
      h(i, j) += std::conj(amp);
    }
  }
  return {g, 1, std::move(h), hp.p, hp.q, hp.staggered};
}

/// Convenience overload on Lambda(k) (side 2k + 1).
inline OneBodyHamiltonian hofstadter(int k, int p, int q, double staggered, Boundary boundary = Boundary::torus) {
  return hofstadter(2 * k + 1, boundary, HofstadterParameters{p, q, staggered});
}

struct FermiProjection {
  LatticeGeometry geometry{2, 1, Boundary::torus};
  int s = 1;
  DenseMatrix P;
  double mu = 0.0;
  double gap_margin = 0.0;  // distance from mu to the nearest eigenvalue
  int rank = 0;             // eigenvalues below mu
};

inline FermiProjection fermi_projection(const OneBodyHamiltonian& h, double mu, double gap_tolerance = 1e-8) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h.matrix);
  if (es.info() != Eigen::Success) throw ConvergenceError("one-body diagonalisation failed");
  const auto& e = es.eigenvalues();
  FermiProjection out;
  out.geometry = h.geometry;
  out.s = h.s;
  out.mu = mu;
  out.gap_margin = (e.array() - mu).abs().minCoeff();
  if (out.gap_margin < gap_tolerance)
    throw GapError("Fermi energy " + std::to_string(mu) + " lies in the spectrum (margin " +
                   std::to_string(out.gap_margin) + ")");
  out.rank = static_cast<int>((e.array() < mu).count());
  const auto& u = es.eigenvectors();
  out.P = u.leftCols(out.rank) * u.leftCols(out.rank).adjoint();
  return out;
}

/// Diagonal of the position operator X_axis in unwrapped box coordinates, one entry per (site, orbital).
inline Eigen::VectorXd position_diagonal(const LatticeGeometry& g, int s, int axis) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(g.num_sites()) * s);
  for (int i = 0; i < g.num_sites(); ++i)
    for (int o = 0; o < s; ++o) x(i * s + o) = g.coord(i)[axis];
  return x;
}

/// [P, X] for diagonal X: entries P_ij (x_j - x_i).
inline DenseMatrix commutator_with_position(const DenseMatrix& p, const Eigen::VectorXd& x) {
  DenseMatrix c = p;
  for (Eigen::Index j = 0; j < c.cols(); ++j)
    for (Eigen::Index i = 0; i < c.rows(); ++i) c(i, j) *= (x(j) - x(i));
  return c;
}

/// Indices of (site, orbital) entries inside the central window of side lround(fraction L).
inline std::vector<Eigen::Index> central_window(const LatticeGeometry& g, int s, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("window fraction must lie in (0, 1]");
  const int w = std::max(1, static_cast<int>(std::lround(fraction * g.side())));
  const int lo = -(w / 2), hi = lo + w - 1;
  std::vector<Eigen::Index> out;
  for (int i = 0; i < g.num_sites(); ++i) {
    Coord x = g.coord(i);
    bool inside = true;
    for (int c : x) inside = inside && c >= lo && c <= hi;
    if (inside)
      for (int o = 0; o < s; ++o) out.push_back(static_cast<Eigen::Index>(i) * s + o);
  }
  return out;
}

/// 2 pi * i * (1/|W|) tr(1_W P [[P, X_a], [P, X_b]] 1_W): windowed double-commutator Hall conductivity.
inline double dcf_conductivity(const FermiProjection& fp, double window_fraction, int axis_a = 0, int axis_b = 1) {
  const auto win = central_window(fp.geometry, fp.s, window_fraction);
  if (fp.rank == 0) return 0.0;
  DenseMatrix c1 = commutator_with_position(fp.P, position_diagonal(fp.geometry, fp.s, axis_a));
  DenseMatrix c2 = commutator_with_position(fp.P, position_diagonal(fp.geometry, fp.s, axis_b));
  DenseMatrix dc = c1 * c2 - c2 * c1;
  cplx tr = 0.0;
  for (auto r : win) tr += (fp.P.row(r) * dc.col(r)).value();
  const double sites = static_cast<double>(win.size()) / fp.s;
  return 2.0 * std::numbers::pi * (cplx(0.0, 1.0) * tr / sites).real();
}

/// -i tr(P [X_1, X_2]), evaluated with full position matrices.
inline cplx naive_dk1(const FermiProjection& fp) {
  const auto x1 = position_diagonal(fp.geometry, fp.s, 0);
  const auto x2 = position_diagonal(fp.geometry, fp.s, 1);
  DenseMatrix X1 = x1.cast<cplx>().asDiagonal();
  DenseMatrix X2 = x2.cast<cplx>().asDiagonal();
  DenseMatrix comm = X1 * X2 - X2 * X1;
  return cplx(0.0, -1.0) * (fp.P * comm).trace();
}

/// X^{OD} = P X (1 - P) + (1 - P) X P.
inline DenseMatrix offdiagonal_position(const FermiProjection& fp, int axis) {
  const auto x = position_diagonal(fp.geometry, fp.s, axis);
  DenseMatrix X = x.cast<cplx>().asDiagonal();
  DenseMatrix Q = DenseMatrix::Identity(fp.P.rows(), fp.P.cols()) - fp.P;
  return fp.P * X * Q + Q * X * fp.P;
}

// ---------------------------------------------------------------------------
// Bloch description on the magnetic supercell

/// Supercell of a x b sites (a along x1) carrying the Landau-gauge and staggered structure.
struct BlochModel {
  HofstadterParameters params;
  int a = 1;
  int b = 1;

  explicit BlochModel(const HofstadterParameters& hp) : params(hp) {
    if (hp.q <= 0) throw DomainError("flux denominator q must be positive");
    const int g = std::gcd(std::abs(hp.p), hp.q);
    const int qr = hp.q / g;
    a = hp.staggered != 0.0 ? std::lcm(qr, 2) : qr;
    b = hp.staggered != 0.0 ? 2 : 1;
  }
  int bands() const { return a * b; }

  /// H(theta) with psi(R + cell) = e^{i theta} psi(R) across supercell boundaries.
  DenseMatrix hamiltonian(double th1, double th2) const {
    const double phi = static_cast<double>(params.p) / params.q;
    const int n = a * b;
    DenseMatrix h = DenseMatrix::Zero(n, n);
    auto idx = [&](int i, int j) { return i * b + j; };
    for (int i = 0; i < a; ++i)
      for (int j = 0; j < b; ++j) {
        const int src = idx(i, j);
        h(src, src) += params.staggered * (((i + j) % 2 == 0) ? 1.0 : -1.0);
        // x1 bond
        {
          int ti = i + 1;
          cplx ph = 1.0;
          if (ti == a) ti = 0, ph = std::polar(1.0, th1);
          cplx amp = -params.hopping * ph;
          h(idx(ti, j), src) += amp;
          h(src, idx(ti, j)) += std::conj(amp);
        }
        // x2 bond
        {
          int tj = j + 1;
          cplx ph = 1.0;
          if (tj == b) tj = 0, ph = std::polar(1.0, th2);
          cplx amp = -params.hopping * ph * detail::vertical_phase(phi, i);
          h(idx(i, tj), src) += amp;
          h(src, idx(i, tj)) += std::conj(amp);
        }
      }
    return h;
  }
};

/// Chern number of the selected bands by lattice field strengths (Fukui-Hatsugai-Suzuki) on an Nk x Nk mesh.
inline int tknn_chern(const HofstadterParameters& hp, const std::vector<int>& bands, int nk, double gap_tol = 1e-6) {
  if (nk < 2) throw DomainError("tknn_chern needs Nk >= 2");
  BlochModel model(hp);
  const int nb = model.bands();
  for (int bnd : bands)
    if (bnd < 0 || bnd >= nb) throw DomainError("band index out of range");
  std::vector<bool> selected(nb, false);
  for (int bnd : bands) selected[bnd] = true;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<DenseMatrix> frames(static_cast<std::size_t>(nk) * nk);
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < nk; ++j) {
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(model.hamiltonian(two_pi * i / nk, two_pi * j / nk));
      const auto& e = es.eigenvalues();
      for (int x = 0; x < nb; ++x)
        for (int y = 0; y < nb; ++y)
          if (selected[x] != selected[y] && std::abs(e(x) - e(y)) < gap_tol)
            throw GapError("band crossing between selected and unselected bands");
      DenseMatrix f(nb, static_cast<Eigen::Index>(bands.size()));
      int c = 0;
      for (int x = 0; x < nb; ++x)
        if (selected[x]) f.col(c++) = es.eigenvectors().col(x);
      frames[static_cast<std::size_t>(i) * nk + j] = std::move(f);
    }
  auto frame = [&](int i, int j) -> const DenseMatrix& {
    return frames[static_cast<std::size_t>((i % nk + nk) % nk) * nk + (j % nk + nk) % nk];
  };
  auto link = [&](int i, int j, int di, int dj) {
    cplx d = (frame(i, j).adjoint() * frame(i + di, j + dj)).determinant();
    return d / std::abs(d);
  };
  double total = 0.0;
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < nk; ++j) {
      cplx w = link(i, j, 1, 0) * link(i + 1, j, 0, 1) * std::conj(link(i, j + 1, 1, 0)) * std::conj(link(i, j, 0, 1));
      total += std::arg(w);
    }
  return static_cast<int>(std::lround(total / two_pi));
}

/// Eigenvalues of the Bloch Hamiltonian over an Nk x Nk mesh, grouped by band: (min, max) per band.
inline std::vector<std::pair<double, double>> band_ranges(const HofstadterParameters& hp, int nk) {
  BlochModel model(hp);
  std::vector<std::pair<double, double>> r(model.bands(), {1e300, -1e300});
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < nk; ++j) {
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(model.hamiltonian(two_pi * i / nk, two_pi * j / nk),
                                                    Eigen::EigenvaluesOnly);
      for (int x = 0; x < model.bands(); ++x) {
        r[x].first = std::min(r[x].first, es.eigenvalues()(x));
        r[x].second = std::max(r[x].second, es.eigenvalues()(x));
      }
    }
  return r;
}

/// Bands lying entirely below mu; throws when mu cuts a band.
inline std::vector<int> bands_below(const HofstadterParameters& hp, double mu, int nk) {
  std::vector<int> out;
  const auto ranges = band_ranges(hp, nk);
  for (std::size_t b = 0; b < ranges.size(); ++b) {
    if (ranges[b].second < mu) out.push_back(static_cast<int>(b));
    else if (ranges[b].first <= mu) throw GapError("Fermi energy lies inside band " + std::to_string(b));
  }
  return out;
}

/// Middle of the lowest spectral gap of the Bloch bands (overlapping or touching bands merged).
inline double first_gap_mu(const HofstadterParameters& hp, int nk, double min_width = 1e-6) {
  auto ranges = band_ranges(hp, nk);
  std::sort(ranges.begin(), ranges.end());
  double top = ranges.front().second;
  for (std::size_t b = 1; b < ranges.size(); ++b) {
    if (ranges[b].first - top > min_width) return 0.5 * (top + ranges[b].first);
    top = std::max(top, ranges[b].second);
  }
  throw GapError("band structure has no gap");
}

struct StredaResult {
  double value = 0.0;       // d(density)/d(flux per plaquette) = 2 pi sigma
  int count_minus = 0;
  int count_plus = 0;
  double flux_minus = 0.0;
  double flux_plus = 0.0;
  double gap_margin = 0.0;  // smallest distance from mu to either spectrum
};

/// Central difference of the number of states below mu per site between the fluxes (p/q) -+ 1/L on an L x L torus.
inline StredaResult streda(int side, const HofstadterParameters& hp, double mu, double gap_tolerance = 1e-8) {
  LatticeGeometry g(2, side, Boundary::torus);
  detail::check_flux(g, hp.p, hp.q);
  const long j = static_cast<long>(hp.p) * side / hp.q;  // flux quanta through the torus
  StredaResult out;
  out.gap_margin = std::numeric_limits<double>::infinity();
  auto count = [&](long quanta) {
    HofstadterParameters h2 = hp;
    h2.p = static_cast<int>(quanta);
    h2.q = side;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(hofstadter(side, Boundary::torus, h2).matrix, Eigen::EigenvaluesOnly);
    const double margin = (es.eigenvalues().array() - mu).abs().minCoeff();
    out.gap_margin = std::min(out.gap_margin, margin);
    if (margin < gap_tolerance) throw GapError("streda: mu lies in the spectrum at flux " + std::to_string(quanta) + "/" +
                                               std::to_string(side));
    return static_cast<int>((es.eigenvalues().array() < mu).count());
  };
  out.count_minus = count(j - 1);
  out.count_plus = count(j + 1);
  out.flux_minus = static_cast<double>(j - 1) / side;
  out.flux_plus = static_cast<double>(j + 1) / side;
  const double sites = static_cast<double>(side) * side;
  out.value = (out.count_plus - out.count_minus) / sites / (out.flux_plus - out.flux_minus);
  return out;
}

struct HallRow {
  int size = 0;
  int flux_p = 0;
  int flux_q = 1;
  double mu = 0.0;
  std::string method;
  double value = 0.0;
  double window_fraction = 0.0;
};

inline void write_hall_csv(std::ostream& os, const std::vector<HallRow>& rows) {
  os << "size,flux_p,flux_q,mu,method,value,window_fraction\n";
  for (const auto& r : rows)
    os << r.size << ',' << r.flux_p << ',' << r.flux_q << ',' << format_double(r.mu) << ',' << r.method << ','
       << format_double(r.value) << ',' << format_double(r.window_fraction) << '\n';
}

}  // namespace kubolab
