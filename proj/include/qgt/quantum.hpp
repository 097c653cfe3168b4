#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qgt/decomp.hpp"
#include "qgt/game.hpp"
#include "qgt/matrix.hpp"

namespace qgt {

/// Pure quantum strategy on the joint strategy space: unit amplitude vector
/// indexed like a JointDistribution.
struct PureState {
  std::vector<std::size_t> dims;
  std::vector<cplx> amp;

  StrategySpace space() const { return StrategySpace{dims}; }

  void validate() const {
    if (amp.size() != space().joint_count())
      throw std::invalid_argument("pure state: amplitude count mismatch");
    if (std::abs(vnorm(amp) - 1.0) > 1e-10)
      throw std::invalid_argument("pure state: not unit norm");
  }
};

/// Mixed quantum strategy: Hermitian, PSD (min eigenvalue >= -1e-9), trace-1
/// density matrix over the tensor product of the players' local spaces.
struct DensityState {
  std::vector<std::size_t> dims;
  Matrix rho;

  StrategySpace space() const { return StrategySpace{dims}; }
  std::size_t total_dim() const { return space().joint_count(); }
};

/// Full validation (trace, hermiticity, spectrum). Internal constructions
/// that are PSD by construction skip the eigenvalue pass.
inline DensityState make_density(std::vector<std::size_t> dims, Matrix rho) {
  DensityState st{std::move(dims), std::move(rho)};
  const std::size_t n = st.total_dim();
  if (st.rho.rows() != n || st.rho.cols() != n)
    throw std::invalid_argument("density: matrix size does not match dims");
  if (st.rho.hermiticity_defect() > 1e-12)
    throw std::invalid_argument("density: not Hermitian within 1e-12");
  if (std::abs(st.rho.trace().real() - 1.0) > 1e-10 ||
      std::abs(st.rho.trace().imag()) > 1e-10)
    throw std::invalid_argument("density: trace != 1");
  const double lmin = lambda_min(st.rho);
  if (lmin < -1e-9)
    throw std::invalid_argument("density: negative eigenvalue below tolerance");
  return st;
}

inline DensityState density_from_pure(const PureState& psi) {
  psi.validate();
  return DensityState{psi.dims, outer(psi.amp, psi.amp)};
}

/// Classical mixture rho(p) = sum_s p(s) |s><s|.
inline DensityState mixture_state(const JointDistribution& p) {
  p.validate();
  const std::size_t n = p.p.size();
  Matrix rho(n, n);
  for (std::size_t s = 0; s < n; ++s) rho(s, s) = p.p[s];
  return DensityState{p.shape, std::move(rho)};
}

/// Quantum superposition |psi(p)> = sum_s sqrt(p(s)) |s>.
inline PureState superposition_state(const JointDistribution& p) {
  p.validate();
  PureState psi{p.shape, std::vector<cplx>(p.p.size())};
  for (std::size_t s = 0; s < p.p.size(); ++s)
    psi.amp[s] = std::sqrt(std::max(p.p[s], 0.0));
  return psi;
}

/// Computational-basis measurement distribution p(s) = rho_ss. Entries in
/// [-1e-9, 0) are clipped; renormalization only happens when the clipped
/// vector would fail distribution validation, so exact inputs round-trip.
inline JointDistribution measure_diag(const DensityState& rho) {
  const std::size_t n = rho.total_dim();
  std::vector<double> p(n);
  double sum = 0.0;
  bool clean = true;
  for (std::size_t s = 0; s < n; ++s) {
    double v = rho.rho(s, s).real();
    if (v < 0.0) {
      if (v < -1e-9) throw std::invalid_argument("measure_diag: diagonal entry below -1e-9");
      v = 0.0;
      clean = false;
    }
    p[s] = v;
    sum += v;
  }
  if (!clean || std::abs(sum - 1.0) > 1e-12) {
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("measure_diag: diagonal does not sum to 1");
    for (double& v : p) v /= sum;
  }
  return JointDistribution{rho.dims, std::move(p)};
}

inline JointDistribution measure_diag(const PureState& psi) {
  std::vector<double> p(psi.amp.size());
  double sum = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) {
    p[s] = std::norm(psi.amp[s]);
    sum += p[s];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("measure_diag: state not normalized");
    for (double& v : p) v /= sum;
  }
  return JointDistribution{psi.dims, std::move(p)};
}

/// u_i(rho) = sum_s <s|rho|s> u_i(s); equals the classical expected utility
/// of the measurement distribution.
inline std::vector<double> quantum_utility(const Game& g, const DensityState& rho) {
  if (rho.dims != g.strategy_counts)
    throw std::invalid_argument("quantum_utility: dims do not match game");
  return expected_utility(g, measure_diag(rho));
}

inline std::vector<double> quantum_utility(const Game& g, const PureState& psi) {
  if (psi.dims != g.strategy_counts)
    throw std::invalid_argument("quantum_utility: dims do not match game");
  return expected_utility(g, measure_diag(psi));
}

/// One player's local CPTP operation in Kraus form. Square Kraus operators on
/// the player's own space (dimension changes are out of scope here).
struct LocalChannel {
  std::size_t player = 0;
  std::vector<Matrix> kraus;

  std::size_t local_dim() const { return kraus.empty() ? 0 : kraus.front().rows(); }

  double trace_preservation_defect() const {
    if (kraus.empty()) return 1.0;
    const std::size_t d = local_dim();
    Matrix sum(d, d);
    for (const Matrix& k : kraus) {
      if (k.rows() != d || k.cols() != d)
        throw std::invalid_argument("channel: Kraus operator shape mismatch");
      sum += k.adjoint() * k;
    }
    return sum.max_abs_diff(Matrix::identity(d));
  }
  void validate() const {
    if (trace_preservation_defect() > 1e-9)
      throw std::invalid_argument("channel: Kraus set is not trace preserving");
  }
};

inline LocalChannel unitary_channel(std::size_t player, const Matrix& u) {
  LocalChannel ch{player, {u}};
  ch.validate();
  return ch;
}

/// (Phi_i (x) I_{-i})(rho): applies the channel on player i's factor only.
inline DensityState apply_local(const DensityState& rho, const LocalChannel& ch) {
  const StrategySpace sp = rho.space();
  if (ch.player >= sp.counts.size())
    throw std::invalid_argument("apply_local: player index out of range");
  const std::size_t di = sp.counts[ch.player];
  if (ch.local_dim() != di)
    throw std::invalid_argument("apply_local: channel dimension mismatch");
  ch.validate();

  const std::size_t n = rho.total_dim();
  Matrix out(n, n);
  for (const Matrix& k : ch.kraus) {
    // out += (K (x) I) rho (K (x) I)^*
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t si = sp.coord(s, ch.player);
      for (std::size_t t = 0; t < n; ++t) {
        const std::size_t ti = sp.coord(t, ch.player);
        cplx acc = 0.0;
        for (std::size_t a = 0; a < di; ++a) {
          const cplx ksa = k(si, a);
          if (ksa == cplx{}) continue;
          const std::size_t sa = sp.replace(s, ch.player, a);
          for (std::size_t b = 0; b < di; ++b) {
            const cplx ktb = k(ti, b);
            if (ktb == cplx{}) continue;
            acc += ksa * rho.rho(sa, sp.replace(t, ch.player, b)) * std::conj(ktb);
          }
        }
        out(s, t) += acc;
      }
    }
  }
  return DensityState{rho.dims, std::move(out)};
}

/// Unitary on one player's factor of a pure state.
inline PureState apply_local_unitary(const PureState& psi, std::size_t player,
                                     const Matrix& u) {
  const StrategySpace sp = psi.space();
  const std::size_t di = sp.counts[player];
  if (u.rows() != di || u.cols() != di)
    throw std::invalid_argument("apply_local_unitary: dimension mismatch");
  PureState out{psi.dims, std::vector<cplx>(psi.amp.size())};
  for (std::size_t s = 0; s < psi.amp.size(); ++s) {
    const std::size_t si = sp.coord(s, player);
    cplx acc = 0.0;
    for (std::size_t b = 0; b < di; ++b) {
      const cplx uab = u(si, b);
      if (uab == cplx{}) continue;
      acc += uab * psi.amp[sp.replace(s, player, b)];
    }
    out.amp[s] = acc;
  }
  return out;
}

/// Reduced state of all players except `player` (partial trace over player).
inline Matrix partial_trace_out(const DensityState& rho, std::size_t player) {
  const StrategySpace sp = rho.space();
  const std::size_t di = sp.counts[player];
  const std::size_t rest = rho.total_dim() / di;

  // Enumerate joints with player's coordinate fixed to 0; their order gives a
  // consistent indexing of S_{-i}.
  std::vector<std::size_t> base;
  base.reserve(rest);
  for (std::size_t s = 0; s < rho.total_dim(); ++s)
    if (sp.coord(s, player) == 0) base.push_back(s);

  Matrix red(rest, rest);
  for (std::size_t x = 0; x < rest; ++x)
    for (std::size_t y = 0; y < rest; ++y) {
      cplx acc = 0.0;
      for (std::size_t a = 0; a < di; ++a)
        acc += rho.rho(sp.replace(base[x], player, a),
                       sp.replace(base[y], player, a));
      red(x, y) = acc;
    }
  return red;
}

/// The QCE=>CE proof channel: Kraus set {P_{t_i}}_{t_i != s_i} plus the
/// swapped projector (s_i <-> s_i') P_{s_i}.
inline LocalChannel swap_deviation(std::size_t player, std::size_t s_from,
                                   std::size_t s_to,
                                   const std::vector<std::size_t>& dims) {
  if (player >= dims.size())
    throw std::invalid_argument("swap_deviation: player out of range");
  const std::size_t d = dims[player];
  if (s_from >= d || s_to >= d)
    throw std::invalid_argument("swap_deviation: strategy index out of range");
  if (s_from == s_to)
    throw std::invalid_argument("swap_deviation: strategies must differ");

  LocalChannel ch;
  ch.player = player;
  for (std::size_t t = 0; t < d; ++t) {
    if (t == s_from) continue;
    Matrix p(d, d);
    p(t, t) = 1.0;
    ch.kraus.push_back(std::move(p));
  }
  Matrix swp(d, d);  // (s_from <-> s_to) P_{s_from} = |s_to><s_from|
  swp(s_to, s_from) = 1.0;
  ch.kraus.push_back(std::move(swp));
  return ch;
}

}  // namespace qgt
