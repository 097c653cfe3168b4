#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qgt/decomp.hpp"
#include "qgt/matrix.hpp"

namespace qgt {

/// Solution of   max sum_i Tr(M_i E_i)  s.t.  {E_i} POVM   for Hermitian M_i,
/// with a dual certificate Y >= M_i for all i (so Tr(Y) upper-bounds every
/// feasible POVM's value, independent of how the primal was found).
struct DiscriminationResult {
  std::vector<Matrix> povm;
  Matrix dual_y;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;  // dual - primal, >= 0 up to roundoff
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline double povm_value(const std::vector<Matrix>& ms,
                         const std::vector<Matrix>& es) {
  double v = 0.0;
  for (std::size_t i = 0; i < ms.size(); ++i) v += (ms[i] * es[i]).trace().real();
  return v;
}

// Y0 = herm(sum_i M_i E_i) shifted up until Y >= M_i for all i.
inline Matrix feasible_dual(const std::vector<Matrix>& ms,
                            const std::vector<Matrix>& es) {
  const std::size_t d = ms.front().rows();
  Matrix y0(d, d);
  for (std::size_t i = 0; i < ms.size(); ++i) y0 += ms[i] * es[i];
  y0 = y0.hermitized();
  double shift = 0.0;
  for (const Matrix& m : ms) shift = std::max(shift, lambda_max(m - y0));
  if (shift > 0.0) y0 += shift * Matrix::identity(d);
  return y0;
}

}  // namespace detail

/// Reports the residuals lambda_min(Y - M_i); Y is dual feasible iff all
/// residuals are >= -1e-8 (weak duality then bounds every POVM value by TrY).
inline std::vector<double> dual_residuals(const std::vector<Matrix>& ms,
                                          const Matrix& y) {
  std::vector<double> r;
  r.reserve(ms.size());
  for (const Matrix& m : ms) r.push_back(lambda_min((y - m).hermitized()));
  return r;
}

/// Discrimination-form SDP solver.
///
/// Routes: exact positive-part solution for n = 2; exact argmax solution when
/// all M_i are diagonal in the computational basis; otherwise a fixed-point
/// primal iteration E_i <- L^{-1/2} M_i E_i M_i L^{-1/2}, L = sum M_j E_j M_j,
/// with the certificate recomputed from scratch each check. gap_tol is an
/// absolute tolerance on dual - primal.
inline DiscriminationResult solve_discrimination(std::vector<Matrix> ms,
                                                 double gap_tol = 1e-9,
                                                 std::size_t max_iter = 300000) {
  if (ms.empty()) throw std::invalid_argument("discrimination: no operators");
  const std::size_t d = ms.front().rows();
  const std::size_t n = ms.size();
  double scale = 0.0;
  for (Matrix& m : ms) {
    if (m.rows() != d || m.cols() != d || !m.is_square())
      throw std::invalid_argument("discrimination: operator shape mismatch");
    m = m.hermitized();
    scale = std::max(scale, m.max_abs());
  }

  DiscriminationResult res;
  res.povm.assign(n, Matrix::identity(d) * (1.0 / static_cast<double>(n)));

  if (scale <= 1e-300) {  // all-zero objective: anything is optimal
    res.dual_y = Matrix::zero(d, d);
    res.converged = true;
    return res;
  }

  // Constant shift making every operator PSD changes all POVM values by
  // shift*d and both optima equally; undo at the end.
  double shift = 0.0;
  for (const Matrix& m : ms) shift = std::max(shift, -lambda_min(m));
  if (shift > 0.0) {
    const Matrix sI = shift * Matrix::identity(d);
    for (Matrix& m : ms) m += sI;
  }

  const auto finish = [&](std::vector<Matrix> es, std::size_t iters,
                          bool converged_hint) {
    res.povm = std::move(es);
    res.dual_y = detail::feasible_dual(ms, res.povm);
    res.primal = detail::povm_value(ms, res.povm) - shift * static_cast<double>(d);
    res.dual = res.dual_y.trace().real() - shift * static_cast<double>(d);
    if (shift > 0.0) res.dual_y = res.dual_y - shift * Matrix::identity(d);
    res.gap = res.dual - res.primal;
    res.iterations = iters;
    res.converged = converged_hint && res.gap <= std::max(gap_tol, 1e-13 * scale);
    return res;
  };

  // n = 2: E1 = support projector of the positive part of M1 - M2 is exactly
  // optimal, with zero-gap dual Y = M2 + (M1 - M2)_+.
  if (n == 2) {
    const Matrix diff = (ms[0] - ms[1]).hermitized();
    EighResult e = eigh(diff, 1e-8 * std::max(1.0, diff.max_abs()));
    Matrix e1(d, d);
    for (std::size_t k = 0; k < d; ++k) {
      if (e.eigenvalues[k] <= 0.0) continue;
      const std::vector<cplx> c = e.vectors.column(k);
      e1 += outer(c, c);
    }
    std::vector<Matrix> es{e1, Matrix::identity(d) - e1};
    return finish(std::move(es), 1, true);
  }

  // All diagonal: classical assignment s -> argmax_i M_i(s,s) is optimal.
  double offdiag = 0.0;
  for (const Matrix& m : ms)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (i != j) offdiag = std::max(offdiag, std::abs(m(i, j)));
  if (offdiag <= 1e-14 * std::max(scale, 1.0)) {
    std::vector<Matrix> es(n, Matrix::zero(d, d));
    for (std::size_t s = 0; s < d; ++s) {
      std::size_t arg = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (ms[i](s, s).real() > ms[arg](s, s).real()) arg = i;
      es[arg](s, s) = 1.0;
    }
    return finish(std::move(es), 1, true);
  }

  // Fixed-point iteration. The renormalization by T^{-1/2} keeps the iterate
  // an exact POVM even when L is singular.
  std::vector<Matrix> es = res.povm;
  const std::size_t check_every = 10;
  double best_gap = 1e300;
  std::vector<Matrix> best_es = es;
  std::size_t stall = 0;
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    Matrix lam(d, d);
    std::vector<Matrix> me(n);
    for (std::size_t i = 0; i < n; ++i) {
      me[i] = ms[i] * es[i] * ms[i];
      lam += me[i];
    }
    const Matrix w = inverse_sqrt(lam.hermitized());
    Matrix t(d, d);
    for (std::size_t i = 0; i < n; ++i) {
      es[i] = (w * me[i] * w).hermitized();
      t += es[i];
    }
    const Matrix tw = inverse_sqrt(t.hermitized(), 1e-12);
    Matrix resid = Matrix::identity(d);
    for (std::size_t i = 0; i < n; ++i) {
      es[i] = (tw * es[i] * tw).hermitized();
      resid = resid - es[i];
    }
    // If the iterate collapsed onto a subspace, spread the missing identity
    // mass uniformly so the POVM constraint holds exactly.
    if (resid.max_abs() > 1e-13) {
      const Matrix fill = resid * (1.0 / static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i) es[i] += fill;
    }

    if ((it + 1) % check_every == 0 || it + 1 == max_iter) {
      const Matrix y = detail::feasible_dual(ms, es);
      const double primal = detail::povm_value(ms, es);
      const double gap = y.trace().real() - primal;
      if (gap < best_gap - 1e-15 * std::max(scale, 1.0)) {
        best_gap = gap;
        best_es = es;
        stall = 0;
      } else if (++stall > 400) {
        break;  // no longer improving; report the best certified iterate
      }
      if (gap <= gap_tol) return finish(std::move(es), it + 1, true);
    }
  }
  return finish(std::move(best_es), it, best_gap <= gap_tol);
}

}  // namespace qgt
