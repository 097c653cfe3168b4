#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qgt/discrimination.hpp"
#include "qgt/game.hpp"
#include "qgt/quantum.hpp"

namespace qgt {

/// POVM on one player's local space: PSD elements summing to the identity.
struct Povm {
  std::vector<Matrix> elements;

  std::size_t dim() const { return elements.empty() ? 0 : elements.front().rows(); }

  double completeness_defect() const {
    if (elements.empty()) return 1.0;
    Matrix sum(dim(), dim());
    for (const Matrix& e : elements) sum += e;
    return sum.max_abs_diff(Matrix::identity(dim()));
  }
  void validate(double tol = 1e-9) const {
    if (completeness_defect() > tol)
      throw std::invalid_argument("povm: elements do not sum to identity");
    for (const Matrix& e : elements)
      if (lambda_min(e.hermitized()) < -tol)
        throw std::invalid_argument("povm: element not PSD");
  }
};

enum class IncentiveMode { additive, multiplicative };

/// Feasibility report for a dual candidate Y of the section-3.3.1 dual:
/// feasible iff lambda_min(Y - M_i) >= -1e-8 for all i.
struct DualCertificate {
  Matrix y;
  double bound_value = 0.0;
  std::vector<double> feasibility_residuals;
  bool feasible = false;
};

struct IncentiveResult {
  IncentiveMode mode = IncentiveMode::additive;
  double primal_value = 0.0;  // additive gain or multiplicative ratio
  double dual_bound = 0.0;
  double gap = 0.0;
  Povm povm;
  std::optional<LocalChannel> channel;
  Matrix dual_y;
  double baseline = 0.0;     // honest expected utility
  double new_utility = 0.0;  // utility after the optimal deviation
  bool converged = false;
  std::size_t iterations = 0;
};

namespace detail {

inline void require_real_01(const Matrix& a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx v = a(i, j);
      if (std::abs(v.imag()) > 1e-12 || v.real() < -1e-12 || v.real() > 1.0 + 1e-12)
        throw std::invalid_argument("payoff matrix must be real with entries in [0,1]");
    }
}

inline std::vector<double> sqrt_column(const Matrix& p, std::size_t j) {
  std::vector<double> c(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i)
    c[i] = std::sqrt(std::max(p(i, j).real(), 0.0));
  return c;
}

// M_i = sum_j a_ij |sqrt(p_j)><sqrt(p_j)|
inline std::vector<Matrix> povm_objective_ops(const Matrix& a, const Matrix& p) {
  const std::size_t n = a.rows();
  std::vector<Matrix> ms(n, Matrix::zero(n, n));
  for (std::size_t j = 0; j < n; ++j) {
    const std::vector<double> col = sqrt_column(p, j);
    for (std::size_t i = 0; i < n; ++i) {
      const double aij = a(i, j).real();
      if (aij == 0.0) continue;
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) ms[i](r, c) += aij * col[r] * col[c];
    }
  }
  return ms;
}

inline double payoff_inner(const Matrix& a, const Matrix& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j).real() * p(i, j).real();
  return s;
}

}  // namespace detail

/// Player 1's payoff on |psi(p)> after measuring with {E_i} in the (A, J)
/// game: sum_ij a_ij <sqrt(p_j)| E_i |sqrt(p_j)>.
inline double povm_deviation_utility(const Matrix& a, const Matrix& p,
                                     const Povm& e) {
  double v = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j).real();
      if (aij == 0.0) continue;
      std::vector<cplx> col(p.rows());
      const std::vector<double> sq = detail::sqrt_column(p, j);
      for (std::size_t r = 0; r < p.rows(); ++r) col[r] = sq[r];
      v += aij * vdot(col, matvec(e.elements[i], col)).real();
    }
  return v;
}

/// Additive objective of the section-3.3.1 primal at a given (A, P, POVM):
/// sum_ij a_ij (<sqrt(p_j)|E_i|sqrt(p_j)> - p_ij).
inline double povm_objective_value(const Matrix& a, const Matrix& p, const Povm& e) {
  return povm_deviation_utility(a, p, e) - detail::payoff_inner(a, p);
}

/// Checks a dual candidate Y against Dual(A, P): residuals lambda_min(Y-M_i),
/// bound Tr(Y) - <A,P> (additive) or Tr(Y)/<A,P> (multiplicative).
inline DualCertificate dual_check(const Matrix& a, const Matrix& p, const Matrix& y,
                                  IncentiveMode mode = IncentiveMode::additive) {
  const std::vector<Matrix> ms = detail::povm_objective_ops(a, p);
  DualCertificate cert;
  cert.y = y;
  cert.feasibility_residuals = dual_residuals(ms, y);
  cert.feasible = true;
  for (double r : cert.feasibility_residuals)
    if (r < -1e-8) cert.feasible = false;
  const double base = detail::payoff_inner(a, p);
  const double tr = y.trace().real();
  if (mode == IncentiveMode::additive) {
    cert.bound_value = tr - base;
  } else {
    if (base <= 0.0)
      throw std::invalid_argument("dual_check: multiplicative bound needs positive baseline");
    cert.bound_value = tr / base;
  }
  return cert;
}

struct SolveOptions {
  std::optional<double> gap_tol;  // absolute, on the utility scale; per-route default
  std::size_t max_iter = 300000;
};

/// Maximum quantum incentive on |psi(p)> for the game (A, J), optimized over
/// POVMs of the deviating player 1 (player 2's payoff is identically 1, so
/// only player 1 is optimized). P must be a correlated equilibrium of (A, J).
inline IncentiveResult max_povm_incentive(const Matrix& a, const Matrix& p,
                                          IncentiveMode mode,
                                          const SolveOptions& opt = {}) {
  if (!a.is_square() || a.rows() != p.rows() || !p.is_square())
    throw std::invalid_argument("max_povm_incentive: A and P must be square, same size");
  detail::require_real_01(a);
  const std::size_t n = a.rows();

  // CE precheck (tolerance 1e-9): the primal is meaningless off the polytope.
  DMat u1 = real_part(a);
  DMat ones(n, n);
  for (double& x : ones.a) x = 1.0;
  Game g = bimatrix_game(u1, ones);
  std::vector<double> probs(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) probs[i * n + j] = p(i, j).real();
  JointDistribution dist = make_distribution({n, n}, std::move(probs));
  EquilibriumVerdict ce = check_correlated(g, dist, 1e-9);
  if (!ce.ok) {
    const DeviationReport& r = ce.reports[0].max_pair_gain > ce.reports[1].max_pair_gain
                                   ? ce.reports[0]
                                   : ce.reports[1];
    throw std::invalid_argument(
        "max_povm_incentive: P is not a correlated equilibrium (player " +
        std::to_string(r.player + 1) + ", deviation " + std::to_string(r.worst_from) +
        " -> " + std::to_string(r.worst_to) + " gains " +
        std::to_string(r.max_pair_gain) + ")");
  }

  const double base = detail::payoff_inner(a, p);
  if (mode == IncentiveMode::multiplicative && base <= 1e-12)
    throw std::invalid_argument("max_povm_incentive: multiplicative mode with zero baseline");

  DiscriminationResult d = solve_discrimination(detail::povm_objective_ops(a, p),
                                                opt.gap_tol.value_or(1e-8),
                                                opt.max_iter);

  IncentiveResult r;
  r.mode = mode;
  r.povm = Povm{d.povm};
  r.dual_y = d.dual_y;
  r.baseline = base;
  r.new_utility = d.primal;
  r.converged = d.converged;
  r.iterations = d.iterations;
  if (mode == IncentiveMode::additive) {
    r.primal_value = d.primal - base;
    r.dual_bound = d.dual - base;
  } else {
    r.primal_value = d.primal / base;
    r.dual_bound = d.dual / base;
  }
  r.gap = r.dual_bound - r.primal_value;
  return r;
}

struct ClosedForm2x2 {
  double optimum = 0.0;
  Matrix p;
  Povm povm;
  Matrix dual_y;
};

/// The exact 2x2 solutions: additive optimum (sqrt(2)-1)/2 at p11* = sqrt(2)/4
/// with a* = sqrt(2)/2, multiplicative optimum 4/3 at P = [[2/5,2/5],[0,1/5]].
inline ClosedForm2x2 closed_form_2x2(IncentiveMode mode) {
  ClosedForm2x2 cf;
  if (mode == IncentiveMode::additive) {
    const double p11 = std::sqrt(2.0) / 4.0;
    cf.optimum = (std::sqrt(2.0) - 1.0) / 2.0;
    cf.p = Matrix(2, 2);
    cf.p(0, 0) = p11;
    cf.p(0, 1) = p11;
    cf.p(1, 1) = 1.0 - 2.0 * p11;
    Matrix e1(2, 2);
    const double off = std::sqrt(2.0 * p11 * (1.0 - 2.0 * p11));
    e1(0, 0) = 2.0 * p11;
    e1(0, 1) = -off;
    e1(1, 0) = -off;
    e1(1, 1) = 1.0 - 2.0 * p11;
    cf.povm = Povm{{e1, Matrix::identity(2) - e1}};
    cf.dual_y = Matrix(2, 2);
    cf.dual_y(0, 0) = 0.5;
    cf.dual_y(0, 1) = std::sqrt(p11 * (0.5 - p11));
    cf.dual_y(1, 0) = cf.dual_y(0, 1);
    cf.dual_y(1, 1) = p11;
  } else {
    cf.optimum = 4.0 / 3.0;
    cf.p = Matrix(2, 2);
    cf.p(0, 0) = 0.4;
    cf.p(0, 1) = 0.4;
    cf.p(1, 1) = 0.2;
    Matrix e1(2, 2);
    e1(0, 0) = 2.0 / 3.0;
    e1(0, 1) = -std::sqrt(2.0) / 3.0;
    e1(1, 0) = -std::sqrt(2.0) / 3.0;
    e1(1, 1) = 1.0 / 3.0;
    cf.povm = Povm{{e1, Matrix::identity(2) - e1}};
    cf.dual_y = Matrix(2, 2);
    cf.dual_y(0, 0) = 8.0 / 15.0;
    cf.dual_y(0, 1) = 2.0 * std::sqrt(2.0) / 15.0;
    cf.dual_y(1, 0) = cf.dual_y(0, 1);
    cf.dual_y(1, 1) = 4.0 / 15.0;
  }
  return cf;
}

/// The second additive optimizer obtained by the row/column symmetry, whose
/// average with the first one witnesses non-concavity of the primal.
inline ClosedForm2x2 closed_form_2x2_mirror() {
  ClosedForm2x2 cf = closed_form_2x2(IncentiveMode::additive);
  const double p11 = std::sqrt(2.0) / 4.0;
  cf.p = Matrix(2, 2);
  cf.p(0, 0) = 1.0 - 2.0 * p11;
  cf.p(1, 0) = p11;
  cf.p(1, 1) = p11;
  Matrix e1(2, 2);
  const double off = std::sqrt(2.0 * p11 * (1.0 - 2.0 * p11));
  e1(0, 0) = 2.0 * p11;
  e1(0, 1) = off;
  e1(1, 0) = off;
  e1(1, 1) = 1.0 - 2.0 * p11;
  cf.povm = Povm{{e1, Matrix::identity(2) - e1}};
  return cf;
}

namespace detail {

// Objective operators of the channel problem, reduced over the Choi/POVM
// correspondence: M_a[k,l] = sum_{s_-i} u_i(a, s_-i) rho[(k,s_-i),(l,s_-i)].
// Maximizing sum_a Tr(M_a E_a) over POVMs equals maximizing u_i(Phi_i(rho))
// over CPTP maps on player i's space.
inline std::vector<Matrix> channel_objective_ops(const Game& g,
                                                 const DensityState& rho,
                                                 std::size_t player) {
  const StrategySpace sp = rho.space();
  const std::size_t di = sp.counts[player];
  const std::size_t n = rho.total_dim();
  std::vector<Matrix> ms(di, Matrix::zero(di, di));
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t si = sp.coord(s, player);
    if (si != 0) continue;  // enumerate s_-i once via joints with coord 0
    for (std::size_t a = 0; a < di; ++a) {
      const double u = g.utility(player, sp.replace(s, player, a));
      if (u == 0.0) continue;
      for (std::size_t k = 0; k < di; ++k)
        for (std::size_t l = 0; l < di; ++l)
          ms[a](k, l) += u * rho.rho(sp.replace(s, player, k),
                                     sp.replace(s, player, l));
    }
  }
  return ms;
}

// Measure-and-prepare channel realizing a POVM: Kraus |a><phi_{a,r}| from the
// spectral decomposition E_a = sum_r |phi_{a,r}><phi_{a,r}|.
inline LocalChannel channel_from_povm(std::size_t player, const Povm& povm) {
  LocalChannel ch;
  ch.player = player;
  const std::size_t d = povm.dim();
  for (std::size_t a = 0; a < povm.elements.size(); ++a) {
    EighResult e = eigh(povm.elements[a].hermitized());
    for (std::size_t k = 0; k < d; ++k) {
      if (e.eigenvalues[k] <= 1e-14) continue;
      const double w = std::sqrt(e.eigenvalues[k]);
      const std::vector<cplx> phi = e.vectors.column(k);
      Matrix kr(d, d);
      for (std::size_t c = 0; c < d; ++c) kr(a, c) = w * std::conj(phi[c]);
      ch.kraus.push_back(std::move(kr));
    }
  }
  return ch;
}

}  // namespace detail

/// Maximum of u_i(Phi_i(rho)) over CPTP maps on player i's space, via the
/// Choi/POVM reduction. Returns the optimal channel (measure-and-prepare
/// form), the additive or multiplicative incentive, and a dual certificate
/// for the reduced problem. Local dimension capped at 16.
inline IncentiveResult max_channel_incentive(const Game& g, const DensityState& rho,
                                             std::size_t player,
                                             IncentiveMode mode = IncentiveMode::additive,
                                             const SolveOptions& opt_in = {}) {

  if (rho.dims != g.strategy_counts)
    throw std::invalid_argument("max_channel_incentive: dims do not match game");
  if (player >= g.players)
    throw std::invalid_argument("max_channel_incentive: player out of range");
  if (g.strategy_counts[player] > 16)
    throw std::invalid_argument("max_channel_incentive: local dimension cap (16) exceeded");

  const double base = quantum_utility(g, rho)[player];
  if (mode == IncentiveMode::multiplicative && base <= 1e-12)
    throw std::invalid_argument("max_channel_incentive: multiplicative mode with zero baseline");

  DiscriminationResult d =
      solve_discrimination(detail::channel_objective_ops(g, rho, player),
                           opt_in.gap_tol.value_or(1e-7), opt_in.max_iter);

  IncentiveResult r;
  r.mode = mode;
  r.povm = Povm{d.povm};
  r.channel = detail::channel_from_povm(player, r.povm);
  r.dual_y = d.dual_y;
  r.baseline = base;
  r.new_utility = d.primal;
  r.converged = d.converged;
  r.iterations = d.iterations;
  if (mode == IncentiveMode::additive) {
    r.primal_value = d.primal - base;
    r.dual_bound = d.dual - base;
  } else {
    r.primal_value = d.primal / base;
    r.dual_bound = d.dual / base;
  }
  r.gap = r.dual_bound - r.primal_value;
  return r;
}

struct QceVerdict {
  bool ok = false;
  std::vector<IncentiveResult> incentives;
};

/// Quantum correlated equilibrium check: true iff every player's certified
/// channel incentive (dual bound) is at most tol.
inline QceVerdict is_qce(const Game& g, const DensityState& rho, double tol,
                         const SolveOptions& opt = {}) {
  QceVerdict v;
  v.ok = true;
  for (std::size_t i = 0; i < g.players; ++i) {
    IncentiveResult r = max_channel_incentive(g, rho, i, IncentiveMode::additive, opt);
    if (r.dual_bound > tol) v.ok = false;
    v.incentives.push_back(std::move(r));
  }
  return v;
}

/// Caps from the general-mapping theorem: with eps_i = max(1/|S_i|, 1/|S_-i|),
/// the additive incentive is at most 1 - eps_i, the multiplicative at most
/// 1/eps_i, for any rho whose diagonal is a correlated equilibrium.
inline std::pair<double, double> general_mapping_bound(const Game& g,
                                                       std::size_t player) {
  if (!g.normalized)
    throw std::invalid_argument("general_mapping_bound: game must be [0,1]-normalized");
  const std::size_t si = g.strategy_counts[player];
  std::size_t srest = 1;
  for (std::size_t j = 0; j < g.players; ++j)
    if (j != player) srest *= g.strategy_counts[j];
  const double eps = std::max(1.0 / static_cast<double>(si),
                              1.0 / static_cast<double>(srest));
  return {1.0 - eps, 1.0 / eps};
}

}  // namespace qgt
