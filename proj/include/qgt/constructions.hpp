#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgt/deviation.hpp"
#include "qgt/game.hpp"
#include "qgt/quantum.hpp"

namespace qgt {

// ---- epsilon family: additive incentive growing with tensor depth ----

struct EpsilonGameSpec {
  std::size_t depth = 1;
  double epsilon = 0.0;
  double predicted_old = 0.0;  // (sin^2 e + cos^4 e)^d
  double predicted_new = 0.0;  // (sin^2 e cos^2 e + cos^2 e)^d
};

/// Base-2 additive family: game (I2, J2), correlated equilibrium
/// P = [[sin^2 e, cos^2 e sin^2 e], [0, cos^4 e]], deviation rotation
/// U1 = [[cos e, -sin e], [sin e, cos e]]. Utilities tensorize, so the
/// depth-d instance is carried in factored form; the joint game and
/// distribution are materialized only while they fit the size caps.
struct EpsilonFamily {
  EpsilonGameSpec spec;
  Game base_game;
  JointDistribution base_dist;
  Matrix base_unitary;
  double base_old_simulated = 0.0;
  double base_new_simulated = 0.0;

  std::optional<Game> game;                 // 4^d <= cap
  std::optional<JointDistribution> dist;    // 4^d <= cap
  std::optional<Matrix> deviation_unitary;  // player 1's U1^{(x) d}

  double simulated_old() const { return std::pow(base_old_simulated, double(spec.depth)); }
  double simulated_new() const { return std::pow(base_new_simulated, double(spec.depth)); }
  double simulated_gain() const { return simulated_new() - simulated_old(); }
  double predicted_gain() const { return spec.predicted_new - spec.predicted_old; }
};

/// Solves d = 4 e^{-2} ln(1/e) for e by bisection; the left side is monotone
/// decreasing on (0, sqrt(e)) and spans (0, inf) on the unit interval.
inline double epsilon_for_depth(std::size_t d) {
  if (d == 0) throw std::invalid_argument("epsilon_for_depth: depth must be positive");
  double lo = 1e-6, hi = 1.0 - 1e-9;
  const auto g = [](double e) { return 4.0 * std::log(1.0 / e) / (e * e); };
  if (g(lo) < double(d)) throw std::invalid_argument("epsilon_for_depth: depth too large");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > double(d))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline EpsilonFamily epsilon_additive_family(std::size_t d,
                                             std::optional<double> epsilon = {}) {
  if (d == 0) throw std::invalid_argument("epsilon family: depth must be positive");
  if (d > 12)  // per-player size 2^d capped at 4096
    throw std::invalid_argument("epsilon family: depth cap exceeded");
  const double e = epsilon ? *epsilon : epsilon_for_depth(d);
  const double se = std::sin(e), ce = std::cos(e);

  EpsilonFamily f;
  f.spec.depth = d;
  f.spec.epsilon = e;
  f.spec.predicted_old = std::pow(se * se + ce * ce * ce * ce, double(d));
  f.spec.predicted_new = std::pow(se * se * ce * ce + ce * ce, double(d));

  DMat i2(2, 2), j2(2, 2);
  i2(0, 0) = 1.0;
  i2(1, 1) = 1.0;
  for (double& x : j2.a) x = 1.0;
  f.base_game = bimatrix_game(i2, j2, true);
  f.base_dist = make_distribution({2, 2}, {se * se, ce * ce * se * se, 0.0,
                                           ce * ce * ce * ce});
  f.base_unitary = Matrix(2, 2);
  f.base_unitary(0, 0) = ce;
  f.base_unitary(0, 1) = -se;
  f.base_unitary(1, 0) = se;
  f.base_unitary(1, 1) = ce;

  const PureState psi = superposition_state(f.base_dist);
  f.base_old_simulated = quantum_utility(f.base_game, psi)[0];
  f.base_new_simulated =
      quantum_utility(f.base_game, apply_local_unitary(psi, 0, f.base_unitary))[0];

  std::size_t joint = 1;
  for (std::size_t k = 0; k < 2 * d && joint <= kSizeCap; ++k) joint *= 2;
  if (joint <= kSizeCap) {
    Game gd = f.base_game;
    JointDistribution pd = f.base_dist;
    Matrix ud = f.base_unitary;
    for (std::size_t k = 1; k < d; ++k) {
      gd = tensor_game(gd, f.base_game);
      pd = tensor_dist(pd, f.base_dist);
      ud = kron(ud, f.base_unitary);
    }
    f.game = std::move(gd);
    f.dist = std::move(pd);
    f.deviation_unitary = std::move(ud);
  }
  return f;
}

// ---- cyclic family: multiplicative incentive 4(c-1)^2/c^2 per factor ----

struct CyclicGameSpec {
  std::size_t base_size = 3;
  std::size_t depth = 1;
  double predicted_ratio = 0.0;      // (4(c-1)^2/c^2)^d
  double predicted_old = 0.0;        // (1/(c-1))^d
  double predicted_new = 0.0;        // (4(c-1)/c^2)^d
  double exponent = 0.0;             // log_c(4(c-1)^2/c^2)
};

struct CyclicFamily {
  CyclicGameSpec spec;
  Game base_game;
  JointDistribution base_dist;
  Povm base_povm;

  std::optional<Game> game;               // c^{2d} <= cap
  std::optional<JointDistribution> dist;  // c^{2d} <= cap
  std::optional<Povm> povm;               // tensor power, c^d <= 64
};

/// c x c game (I, J) with p_ij = 0 when i - j = 1 (mod c) and 1/(c^2-c)
/// otherwise; the rank-one POVM with entries (2-c)/c and 2/c lifts the
/// utility from 1/(c-1) to 4(c-1)/c^2 per factor.
inline CyclicFamily cyclic_multiplicative_family(std::size_t c, std::size_t d) {
  if (c < 3) throw std::invalid_argument("cyclic family: base size must be >= 3");
  if (d == 0) throw std::invalid_argument("cyclic family: depth must be positive");
  double per_player = std::pow(double(c), double(d));
  if (per_player > double(kSizeCap))
    throw std::invalid_argument("cyclic family: size cap exceeded");

  CyclicFamily f;
  const double cd = static_cast<double>(c);
  f.spec.base_size = c;
  f.spec.depth = d;
  f.spec.predicted_ratio = std::pow(4.0 * (cd - 1.0) * (cd - 1.0) / (cd * cd), double(d));
  f.spec.predicted_old = std::pow(1.0 / (cd - 1.0), double(d));
  f.spec.predicted_new = std::pow(4.0 * (cd - 1.0) / (cd * cd), double(d));
  f.spec.exponent = std::log(4.0 * (cd - 1.0) * (cd - 1.0) / (cd * cd)) / std::log(cd);

  DMat ic(c, c), jc(c, c);
  for (std::size_t i = 0; i < c; ++i) ic(i, i) = 1.0;
  for (double& x : jc.a) x = 1.0;
  f.base_game = bimatrix_game(ic, jc, true);

  std::vector<double> p(c * c, 1.0 / (cd * cd - cd));
  for (std::size_t i = 0; i < c; ++i) p[i * c + (i + c - 1) % c] = 0.0;  // i - j = 1 mod c
  f.base_dist = make_distribution({c, c}, std::move(p));

  f.base_povm.elements.reserve(c);
  for (std::size_t i = 0; i < c; ++i) {
    std::vector<cplx> psi(c);
    for (std::size_t ip = 0; ip < c; ++ip)
      psi[ip] = ((ip + c - i) % c == 1) ? (2.0 - cd) / cd : 2.0 / cd;
    f.base_povm.elements.push_back(outer(psi, psi));
  }
  f.base_povm.validate(1e-12);

  if (per_player * per_player <= double(kSizeCap)) {
    Game gd = f.base_game;
    JointDistribution pd = f.base_dist;
    for (std::size_t k = 1; k < d; ++k) {
      gd = tensor_game(gd, f.base_game);
      pd = tensor_dist(pd, f.base_dist);
    }
    f.game = std::move(gd);
    f.dist = std::move(pd);
  }
  if (per_player <= 64.0) {
    Povm pw;
    const std::size_t nd = static_cast<std::size_t>(per_player);
    pw.elements.assign(nd, Matrix());
    for (std::size_t idx = 0; idx < nd; ++idx) {
      Matrix e = Matrix::identity(1);
      std::size_t rest = idx;
      std::vector<std::size_t> digits(d);
      for (std::size_t k = d; k-- > 0;) {
        digits[k] = rest % c;
        rest /= c;
      }
      for (std::size_t k = 0; k < d; ++k) e = kron(e, f.base_povm.elements[digits[k]]);
      pw.elements[idx] = std::move(e);
    }
    f.povm = std::move(pw);
  }
  return f;
}

// ---- Fourier counterexample (general-mapping extremes) ----

struct FourierInstance {
  std::size_t n = 0;
  std::vector<std::size_t> permutation;  // pi: S_2 -> S_1
  Game game;                             // u1 = [s1 == pi(s2)], u2 = 1
  std::vector<std::vector<double>> nash_factors;  // uniform x uniform
  PureState psi;                         // (F (x) I) |psi'>
  Matrix deviation;                      // inverse Fourier transform on player 1
};

/// The section-3.4 extreme instance: measuring |psi> gives the uniform Nash
/// equilibrium with payoff 1/n, while the inverse Fourier transform on player
/// 1's register recovers |psi'> and payoff 1.
inline FourierInstance fourier_counterexample(
    std::size_t n, std::optional<std::vector<std::size_t>> pi = {}) {
  if (n < 2 || n > 64) throw std::invalid_argument("fourier: n must be in [2, 64]");
  FourierInstance f;
  f.n = n;
  if (pi) {
    f.permutation = *pi;
    if (f.permutation.size() != n)
      throw std::invalid_argument("fourier: permutation size mismatch");
    std::vector<bool> seen(n, false);
    for (std::size_t x : f.permutation) {
      if (x >= n || seen[x]) throw std::invalid_argument("fourier: not a permutation");
      seen[x] = true;
    }
  } else {
    f.permutation.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.permutation[i] = i;
  }

  DMat u1(n, n), u2(n, n);
  for (std::size_t s2 = 0; s2 < n; ++s2) u1(f.permutation[s2], s2) = 1.0;
  for (double& x : u2.a) x = 1.0;
  f.game = bimatrix_game(u1, u2, true);

  f.nash_factors = {std::vector<double>(n, 1.0 / double(n)),
                    std::vector<double>(n, 1.0 / double(n))};

  // |psi'> = n^{-1/2} sum_{s2} |pi(s2), s2>;  |psi> = (F (x) I)|psi'>
  Matrix fourier(n, n);
  const double inv_sqrt_n = 1.0 / std::sqrt(double(n));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      const double ang = 2.0 * std::numbers::pi * double(x) * double(y) / double(n);
      fourier(x, y) = inv_sqrt_n * cplx(std::cos(ang), std::sin(ang));
    }

  PureState psi_prime{{n, n}, std::vector<cplx>(n * n, 0.0)};
  for (std::size_t s2 = 0; s2 < n; ++s2)
    psi_prime.amp[f.permutation[s2] * n + s2] = inv_sqrt_n;
  f.psi = apply_local_unitary(psi_prime, 0, fourier);
  f.deviation = fourier.adjoint();
  return f;
}

// ---- canonical games from the introduction and the load-balancing game ----

struct CanonicalGame {
  Game game;
  std::optional<JointDistribution> ce;
};

inline CanonicalGame load_balancing(std::size_t n) {
  if (n < 2) throw std::invalid_argument("load_balancing: need at least 2 servers");
  DMat u(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) u(i, j) = (i == j) ? 0.0 : 1.0;  // J - I
  CanonicalGame cg;
  cg.game = bimatrix_game(u, u, true);
  std::vector<double> p(n * n, 1.0 / double(n * n - n));
  for (std::size_t i = 0; i < n; ++i) p[i * n + i] = 0.0;
  cg.ce = make_distribution({n, n}, std::move(p));
  return cg;
}

inline CanonicalGame canonical(const std::string& name) {
  if (name == "traffic_light") {
    DMat u1(2, 2), u2(2, 2);
    u1(0, 0) = -100.0; u1(0, 1) = 1.0; u1(1, 0) = 0.0; u1(1, 1) = 0.0;
    u2(0, 0) = -100.0; u2(0, 1) = 0.0; u2(1, 0) = 1.0; u2(1, 1) = 0.0;
    CanonicalGame cg;
    cg.game = bimatrix_game(u1, u2);
    cg.ce = make_distribution({2, 2}, {0.0, 0.5, 0.5, 0.0});
    return cg;
  }
  if (name == "battle_of_sexes") {
    DMat u1(2, 2), u2(2, 2);
    u1(0, 0) = 2.0; u1(1, 1) = 4.0;
    u2(0, 0) = 4.0; u2(1, 1) = 2.0;
    CanonicalGame cg;
    cg.game = bimatrix_game(u1, u2);
    cg.ce = make_distribution({2, 2}, {0.5, 0.0, 0.0, 0.5});
    return cg;
  }
  if (name.rfind("load_balancing", 0) == 0) {
    // load_balancing or load_balancing:<n>
    std::size_t n = 2;
    const auto colon = name.find(':');
    if (colon != std::string::npos) n = std::stoul(name.substr(colon + 1));
    return load_balancing(n);
  }
  throw std::invalid_argument("canonical: unknown game name '" + name + "'");
}

}  // namespace qgt
