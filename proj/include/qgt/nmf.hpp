#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "qgt/matrix.hpp"

namespace qgt {

/// Nonnegative factorization P ~ C D with C m x r, D r x n. `certified_exact`
/// is set only when the max-norm residual is at most 1e-8; `normal_form`
/// means the columns of D sum to 1 (possible exactly when the columns of the
/// product do).
struct NonnegFactorization {
  DMat c;
  DMat d;
  double residual = 0.0;
  bool certified_exact = false;
  bool normal_form = false;
};

/// Rescales C's columns to unit l1 norm, absorbing the scales into D. The
/// product is preserved exactly; D becomes column stochastic iff the product
/// is column normalized (the normal-form fact).
inline void to_normal_form(DMat& c, DMat& d) {
  const std::size_t r = c.cols;
  for (std::size_t k = 0; k < r; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.rows; ++i) s += c(i, k);
    if (s <= 0.0) continue;  // dead component, leave as is
    for (std::size_t i = 0; i < c.rows; ++i) c(i, k) /= s;
    for (std::size_t j = 0; j < d.cols; ++j) d(k, j) *= s;
  }
}

namespace detail {

inline double nmf_residual(const DMat& p, const DMat& c, const DMat& d) {
  return p.max_abs_diff(c.mul(d));
}

// Lee-Seung multiplicative updates for the Frobenius objective.
inline void nmf_mu_descend(const DMat& p, DMat& c, DMat& d, std::size_t iters,
                           double target_residual) {
  const double delta = 1e-12;
  for (std::size_t it = 0; it < iters; ++it) {
    {
      const DMat ct = c.transpose();
      const DMat ctp = ct.mul(p);
      const DMat ctcd = ct.mul(c).mul(d);
      for (std::size_t k = 0; k < d.a.size(); ++k)
        d.a[k] *= ctp.a[k] / (ctcd.a[k] + delta);
    }
    {
      const DMat dt = d.transpose();
      const DMat pdt = p.mul(dt);
      const DMat cddt = c.mul(d.mul(dt));
      for (std::size_t k = 0; k < c.a.size(); ++k)
        c.a[k] *= pdt.a[k] / (cddt.a[k] + delta);
    }
    if ((it & 63) == 63 && nmf_residual(p, c, d) <= target_residual) return;
  }
}

}  // namespace detail

/// Heuristic search for an exact rank-r nonnegative factorization
/// (multiplicative-update descent with seeded random restarts; restart 0 is
/// the deterministic row/column factorization when r is large enough).
/// Absence of a certificate is a valid outcome; the result is returned only
/// when the residual certifies exactness (<= 1e-8).
inline std::optional<NonnegFactorization> nn_rank_upper(const DMat& p, std::size_t r,
                                                        std::size_t restarts = 8,
                                                        std::uint64_t seed = 0) {
  if (r == 0) throw std::invalid_argument("nn_rank_upper: r must be >= 1");
  if (p.min() < 0.0) throw std::invalid_argument("nn_rank_upper: matrix must be nonnegative");
  const std::size_t m = p.rows, n = p.cols;
  const double cert_tol = 1e-8;

  NonnegFactorization best;
  best.residual = 1e300;

  const auto consider = [&](DMat c, DMat d) {
    const double res = detail::nmf_residual(p, c, d);
    if (res < best.residual) {
      best.c = std::move(c);
      best.d = std::move(d);
      best.residual = res;
    }
  };

  // Trivial exact factorizations when r covers a full side.
  if (r >= n) {
    DMat c(m, r);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) c(i, j) = p(i, j);
    DMat d(r, n);
    for (std::size_t j = 0; j < n; ++j) d(j, j) = 1.0;
    consider(std::move(c), std::move(d));
  } else if (r >= m) {
    DMat c(m, r);
    for (std::size_t i = 0; i < m; ++i) c(i, i) = 1.0;
    DMat d(r, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) d(i, j) = p(i, j);
    consider(std::move(c), std::move(d));
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.05, 1.0);
  const double scale = std::sqrt((p.sum() + 1e-300) / double(m * n * r));
  for (std::size_t restart = 0; restart < restarts && best.residual > cert_tol;
       ++restart) {
    DMat c(m, r), d(r, n);
    for (double& x : c.a) x = uni(rng) * scale;
    for (double& x : d.a) x = uni(rng) * scale;
    detail::nmf_mu_descend(p, c, d, 20000, cert_tol * 0.5);
    consider(std::move(c), std::move(d));
  }

  if (best.residual > cert_tol) return std::nullopt;
  to_normal_form(best.c, best.d);
  best.certified_exact = true;
  // Column-stochastic D exactly when the product's columns sum to 1.
  best.normal_form = true;
  for (std::size_t j = 0; j < best.d.cols && best.normal_form; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < best.d.rows; ++k) s += best.d(k, j);
    if (std::abs(s - 1.0) > 1e-10) best.normal_form = false;
  }
  return best;
}

}  // namespace qgt
