#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgt/matrix.hpp"

namespace qgt {

/// Joint-strategy index helpers. Joint strategies are indexed row-major over
/// player indices (player 1 most significant); lexicographic order of the
/// strategy tuple is the global tie-break everywhere.
struct StrategySpace {
  std::vector<std::size_t> counts;

  std::size_t joint_count() const {
    std::size_t n = 1;
    for (std::size_t c : counts) {
      if (c == 0) throw std::invalid_argument("empty strategy set");
      n *= c;
    }
    return n;
  }
  std::size_t stride(std::size_t player) const {
    std::size_t s = 1;
    for (std::size_t j = player + 1; j < counts.size(); ++j) s *= counts[j];
    return s;
  }
  std::size_t coord(std::size_t joint, std::size_t player) const {
    return (joint / stride(player)) % counts[player];
  }
  std::size_t replace(std::size_t joint, std::size_t player,
                      std::size_t strat) const {
    const std::size_t st = stride(player);
    const std::size_t old = (joint / st) % counts[player];
    return joint + (strat - old) * st;
  }
  std::vector<std::size_t> unpack(std::size_t joint) const {
    std::vector<std::size_t> s(counts.size());
    for (std::size_t i = counts.size(); i-- > 0;) {
      s[i] = joint % counts[i];
      joint /= counts[i];
    }
    return s;
  }
  std::size_t pack(const std::vector<std::size_t>& s) const {
    std::size_t joint = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) joint = joint * counts[i] + s[i];
    return joint;
  }
};

/// A k-player strategic game with dense utility tensors (row-major over the
/// joint strategy space).
struct Game {
  std::size_t players = 0;
  std::vector<std::size_t> strategy_counts;
  std::vector<std::vector<double>> utilities;  // one flat tensor per player
  bool normalized = false;

  StrategySpace space() const { return StrategySpace{strategy_counts}; }
  std::size_t joint_count() const { return space().joint_count(); }
  double utility(std::size_t player, std::size_t joint) const {
    return utilities[player][joint];
  }

  void validate() const {
    if (players == 0 || strategy_counts.size() != players ||
        utilities.size() != players)
      throw std::invalid_argument("game: inconsistent player count");
    const std::size_t n = joint_count();
    if (n > kSizeCap)
      throw std::invalid_argument("game: joint strategy space exceeds cap");
    for (const auto& u : utilities) {
      if (u.size() != n) throw std::invalid_argument("game: utility tensor shape mismatch");
      for (double x : u) {
        if (!std::isfinite(x)) throw std::invalid_argument("game: non-finite utility");
        if (normalized && (x < -1e-12 || x > 1.0 + 1e-12))
          throw std::invalid_argument("game: normalized flag set but utility outside [0,1]");
      }
    }
  }
};

/// Two-player bimatrix convenience constructor; u1/u2 indexed (row = player 1).
inline Game bimatrix_game(const DMat& u1, const DMat& u2, bool normalized = false) {
  if (u1.rows != u2.rows || u1.cols != u2.cols)
    throw std::invalid_argument("bimatrix: shape mismatch");
  Game g;
  g.players = 2;
  g.strategy_counts = {u1.rows, u1.cols};
  g.utilities = {u1.a, u2.a};
  g.normalized = normalized;
  g.validate();
  return g;
}

/// Probability distribution over a joint strategy space.
struct JointDistribution {
  std::vector<std::size_t> shape;
  std::vector<double> p;

  StrategySpace space() const { return StrategySpace{shape}; }

  void validate() const {
    if (p.size() != space().joint_count())
      throw std::invalid_argument("distribution: size does not match shape");
    double sum = 0.0;
    for (double x : p) {
      if (!(x >= -1e-12) || !std::isfinite(x))
        throw std::invalid_argument("distribution: negative or non-finite probability");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("distribution: probabilities sum to " +
                                  std::to_string(sum));
  }

  bool matches(const Game& g) const { return shape == g.strategy_counts; }

  /// Marginal distribution of one player's recommendation.
  std::vector<double> marginal(std::size_t player) const {
    const StrategySpace sp = space();
    std::vector<double> m(shape[player], 0.0);
    for (std::size_t s = 0; s < p.size(); ++s) m[sp.coord(s, player)] += p[s];
    return m;
  }

  /// Conditional distribution over the other players given player's
  /// recommendation; defined only where the marginal is positive.
  std::vector<double> conditional(std::size_t player, std::size_t strat) const {
    const StrategySpace sp = space();
    const std::vector<double> m = marginal(player);
    if (m[strat] <= 0.0)
      throw std::domain_error("conditional undefined: zero marginal");
    std::vector<double> cond;
    cond.reserve(p.size() / shape[player]);
    for (std::size_t s = 0; s < p.size(); ++s)
      if (sp.coord(s, player) == strat) cond.push_back(p[s] / m[strat]);
    return cond;
  }
};

inline JointDistribution make_distribution(std::vector<std::size_t> shape,
                                           std::vector<double> p) {
  JointDistribution d{std::move(shape), std::move(p)};
  d.validate();
  return d;
}

inline JointDistribution point_mass(const std::vector<std::size_t>& shape,
                                    const std::vector<std::size_t>& strat) {
  StrategySpace sp{shape};
  std::vector<double> p(sp.joint_count(), 0.0);
  p[sp.pack(strat)] = 1.0;
  return JointDistribution{shape, std::move(p)};
}

// ---- expected utility ----

inline std::vector<double> expected_utility(const Game& g,
                                            const JointDistribution& p) {
  if (!p.matches(g)) throw std::invalid_argument("expected_utility: shape mismatch");
  std::vector<double> u(g.players, 0.0);
  for (std::size_t i = 0; i < g.players; ++i)
    for (std::size_t s = 0; s < p.p.size(); ++s)
      u[i] += p.p[s] * g.utility(i, s);
  return u;
}

// ---- equilibrium verification ----

/// Best-deviation summary for one player (Def. of approximate CE: the gain of
/// the best deviation *function*, averaged over recommendations).
struct DeviationReport {
  std::size_t player = 0;
  std::vector<std::size_t> best_deviation;      // s_i -> s_i'
  double additive_gain = 0.0;                   // >= 0
  std::optional<double> multiplicative_gain;    // defined when baseline > 0
  // Worst single recommendation swap, for diagnostics / rejection messages.
  double max_pair_gain = 0.0;
  std::size_t worst_from = 0;
  std::size_t worst_to = 0;
};

struct EquilibriumVerdict {
  bool ok = false;
  std::vector<DeviationReport> reports;
};

namespace detail {

// value(i, s_i, t_i) = sum_{s_-i} p(s_i, s_-i) u_i(t_i, s_-i)
inline DMat deviation_values(const Game& g, const JointDistribution& p,
                             std::size_t player) {
  const StrategySpace sp = g.space();
  const std::size_t ni = g.strategy_counts[player];
  DMat val(ni, ni);
  for (std::size_t s = 0; s < p.p.size(); ++s) {
    const double ps = p.p[s];
    if (ps == 0.0) continue;
    const std::size_t si = sp.coord(s, player);
    for (std::size_t ti = 0; ti < ni; ++ti)
      val(si, ti) += ps * g.utility(player, sp.replace(s, player, ti));
  }
  return val;
}

inline DeviationReport report_from_values(const DMat& val, std::size_t player) {
  DeviationReport r;
  r.player = player;
  const std::size_t ni = val.rows;
  r.best_deviation.resize(ni);
  double base = 0.0, best = 0.0;
  r.max_pair_gain = -1.0;
  for (std::size_t si = 0; si < ni; ++si) {
    base += val(si, si);
    std::size_t arg = 0;
    for (std::size_t ti = 1; ti < ni; ++ti)
      if (val(si, ti) > val(si, arg)) arg = ti;  // ties: lexicographically first
    r.best_deviation[si] = arg;
    best += val(si, arg);
    for (std::size_t ti = 0; ti < ni; ++ti) {
      const double gain = val(si, ti) - val(si, si);
      if (gain > r.max_pair_gain) {
        r.max_pair_gain = gain;
        r.worst_from = si;
        r.worst_to = ti;
      }
    }
  }
  r.additive_gain = std::max(best - base, 0.0);
  if (base > 0.0) r.multiplicative_gain = best / base;
  return r;
}

}  // namespace detail

/// Correlated-equilibrium check: verdict true iff for every player i and all
/// s_i, s_i', sum_{s_-i} p(s_i,s_-i)[u_i(s_i',s_-i) - u_i(s_i,s_-i)] <= tol.
inline EquilibriumVerdict check_correlated(const Game& g,
                                           const JointDistribution& p,
                                           double tol) {
  if (!p.matches(g)) throw std::invalid_argument("check_correlated: shape mismatch");
  p.validate();
  EquilibriumVerdict v;
  v.ok = true;
  for (std::size_t i = 0; i < g.players; ++i) {
    DeviationReport r =
        detail::report_from_values(detail::deviation_values(g, p, i), i);
    if (r.max_pair_gain > tol) v.ok = false;
    v.reports.push_back(std::move(r));
  }
  return v;
}

/// Additive and multiplicative incentive of one player (Def. of approximate
/// CE). The multiplicative part is an explicit "undefined" at zero baseline.
struct Incentive {
  double additive = 0.0;
  std::optional<double> multiplicative;
};

inline Incentive classical_incentive(const Game& g, const JointDistribution& p,
                                     std::size_t player) {
  if (!p.matches(g)) throw std::invalid_argument("classical_incentive: shape mismatch");
  DeviationReport r =
      detail::report_from_values(detail::deviation_values(g, p, player), player);
  return Incentive{r.additive_gain, r.multiplicative_gain};
}

/// Nash check for a product distribution given by per-player factors. The
/// inequality is only quantified over recommendations in the support
/// (p_i(s_i) > 0), following the mixed-NE definition literally.
inline EquilibriumVerdict check_nash(const Game& g,
                                     const std::vector<std::vector<double>>& factors,
                                     double tol) {
  if (factors.size() != g.players)
    throw std::invalid_argument("check_nash: one factor per player required");
  for (std::size_t i = 0; i < g.players; ++i) {
    if (factors[i].size() != g.strategy_counts[i])
      throw std::invalid_argument("check_nash: factor shape mismatch");
    double sum = 0.0;
    for (double x : factors[i]) {
      if (x < -1e-12) throw std::invalid_argument("check_nash: negative probability");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("check_nash: factor does not sum to 1");
  }

  const StrategySpace sp = g.space();
  const std::size_t n = sp.joint_count();
  JointDistribution prod{g.strategy_counts, std::vector<double>(n, 1.0)};
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t i = 0; i < g.players; ++i)
      prod.p[s] *= factors[i][sp.coord(s, i)];

  EquilibriumVerdict v;
  v.ok = true;
  for (std::size_t i = 0; i < g.players; ++i) {
    DMat val = detail::deviation_values(g, prod, i);
    DeviationReport r = detail::report_from_values(val, i);
    r.max_pair_gain = -1.0;
    for (std::size_t si = 0; si < g.strategy_counts[i]; ++si) {
      if (factors[i][si] <= 0.0) continue;  // off-support: vacuous
      for (std::size_t ti = 0; ti < g.strategy_counts[i]; ++ti) {
        const double gain = val(si, ti) - val(si, si);
        if (gain > r.max_pair_gain) {
          r.max_pair_gain = gain;
          r.worst_from = si;
          r.worst_to = ti;
        }
      }
    }
    if (r.max_pair_gain > tol) v.ok = false;
    v.reports.push_back(std::move(r));
  }
  return v;
}

/// Every correlation is a CE of some game: utilities reward matching the
/// lexicographically first maximizer of p(s_i, .). The returned game is
/// certified against its input before being handed back.
inline Game game_from_correlation(const JointDistribution& p) {
  p.validate();
  const StrategySpace sp = p.space();
  const std::size_t k = sp.counts.size();
  const std::size_t n = sp.joint_count();

  Game g;
  g.players = k;
  g.strategy_counts = sp.counts;
  g.normalized = true;
  g.utilities.assign(k, std::vector<double>(n, 0.0));

  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t ni = sp.counts[i];
    // For each recommendation s_i, u_i(s_i, s_-i) = 1 iff s_-i is the
    // lexicographically first maximizer of p(s_i, .). Ascending joint index
    // order agrees with lexicographic order of the strategy tuple, and only
    // one joint per (s_i, maximizer) pair exists.
    for (std::size_t si = 0; si < ni; ++si) {
      std::size_t best_joint = n;
      double best_p = -1.0;
      for (std::size_t s = 0; s < n; ++s) {
        if (sp.coord(s, i) != si) continue;
        if (p.p[s] > best_p) {
          best_p = p.p[s];
          best_joint = s;
        }
      }
      g.utilities[i][best_joint] = 1.0;
    }
  }

  EquilibriumVerdict v = check_correlated(g, p, 1e-12);
  if (!v.ok) throw std::logic_error("game_from_correlation: certification failed");
  return g;
}

// ---- tensor products ----

inline Game tensor_game(const Game& g1, const Game& g2) {
  if (g1.players != g2.players)
    throw std::invalid_argument("tensor_game: player count mismatch");
  const std::size_t k = g1.players;
  Game g;
  g.players = k;
  g.strategy_counts.resize(k);
  for (std::size_t i = 0; i < k; ++i)
    g.strategy_counts[i] = g1.strategy_counts[i] * g2.strategy_counts[i];
  const StrategySpace sp{g.strategy_counts};
  const std::size_t n = sp.joint_count();
  if (n > kSizeCap) throw std::invalid_argument("tensor_game: size cap exceeded");
  g.normalized = g1.normalized && g2.normalized;
  g.utilities.assign(k, std::vector<double>(n, 0.0));

  const StrategySpace sp1 = g1.space(), sp2 = g2.space();
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t s1 = 0, s2 = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t ci = sp.coord(s, i);
      s1 = s1 * sp1.counts[i] + ci / g2.strategy_counts[i];
      s2 = s2 * sp2.counts[i] + ci % g2.strategy_counts[i];
    }
    for (std::size_t i = 0; i < k; ++i)
      g.utilities[i][s] = g1.utility(i, s1) * g2.utility(i, s2);
  }
  return g;
}

inline JointDistribution tensor_dist(const JointDistribution& p1,
                                     const JointDistribution& p2) {
  if (p1.shape.size() != p2.shape.size())
    throw std::invalid_argument("tensor_dist: player count mismatch");
  const std::size_t k = p1.shape.size();
  JointDistribution d;
  d.shape.resize(k);
  for (std::size_t i = 0; i < k; ++i) d.shape[i] = p1.shape[i] * p2.shape[i];
  const StrategySpace sp = d.space();
  const std::size_t n = sp.joint_count();
  if (n > kSizeCap) throw std::invalid_argument("tensor_dist: size cap exceeded");
  d.p.resize(n);
  const StrategySpace sp1 = p1.space(), sp2 = p2.space();
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t s1 = 0, s2 = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t ci = sp.coord(s, i);
      s1 = s1 * sp1.counts[i] + ci / p2.shape[i];
      s2 = s2 * sp2.counts[i] + ci % p2.shape[i];
    }
    d.p[s] = p1.p[s1] * p2.p[s2];
  }
  return d;
}

}  // namespace qgt
