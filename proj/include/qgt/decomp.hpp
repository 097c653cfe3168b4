#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qgt/matrix.hpp"

namespace qgt {

struct EighResult {
  std::vector<double> eigenvalues;  // ascending
  Matrix vectors;                   // orthonormal columns, vectors.col(k) <-> eigenvalues[k]
};

/// Hermitian eigendecomposition by cyclic Jacobi rotations. Deterministic,
/// no external numeric dependency, accurate at desk scale.
///
/// Rejects inputs whose hermiticity defect exceeds herm_tol.
inline EighResult eigh(const Matrix& m, double herm_tol = 1e-10) {
  if (!m.is_square()) throw std::invalid_argument("eigh: matrix not square");
  if (m.hermiticity_defect() > herm_tol)
    throw std::invalid_argument("eigh: matrix not Hermitian within tolerance");

  const std::size_t n = m.rows();
  Matrix a = m.hermitized();
  Matrix v = Matrix::identity(n);
  if (n <= 1) {
    EighResult r;
    r.eigenvalues.assign(n, n == 1 ? a(0, 0).real() : 0.0);
    r.vectors = v;
    return r;
  }

  const double scale = std::max(a.frobenius_norm(), 1e-300);
  const double stop = 1e-15 * scale;
  const std::size_t max_sweeps = 64;

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off <= stop) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double absapq = std::abs(apq);
        if (absapq <= 1e-300) continue;

        // Factor out the phase so the 2x2 block reduces to a real rotation:
        // U = diag(1, e^{-i phi}) . G with G the classic Jacobi rotation.
        const cplx phase = apq / absapq;  // e^{i phi}
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * absapq);
        double t;
        if (tau >= 0.0)
          t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
        else
          t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        // Column update B = A U with U = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
        // on columns (p, q), then row update A = U^* B, then V = V U.
        const cplx upq = s;
        const cplx uqp = -s * std::conj(phase);
        const cplx uqq = c * std::conj(phase);
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp + uqp * akq;
          a(k, q) = upq * akp + uqq * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk + std::conj(uqp) * aqk;
          a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp + uqp * vkq;
          v(k, q) = upq * vkp + uqq * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i).real();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return diag[x] < diag[y]; });

  EighResult r;
  r.eigenvalues.resize(n);
  r.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    r.eigenvalues[k] = diag[order[k]];
    for (std::size_t i = 0; i < n; ++i) r.vectors(i, k) = v(i, order[k]);
  }
  return r;
}

struct PsdVerdict {
  bool ok = false;
  double min_eigenvalue = 0.0;
};

/// True iff lambda_min(m) >= -tol for Hermitian m.
inline PsdVerdict psd_check(const Matrix& m, double tol) {
  EighResult e = eigh(m);
  PsdVerdict v;
  v.min_eigenvalue = e.eigenvalues.empty() ? 0.0 : e.eigenvalues.front();
  v.ok = v.min_eigenvalue >= -tol;
  return v;
}

struct SvdResult {
  Matrix u;                   // rows x rows, unitary
  std::vector<double> sigma;  // length min(rows, cols), nonincreasing
  Matrix v;                   // cols x cols, unitary
};

namespace detail {

// Fills columns [have, n) of u with an orthonormal completion (Gram-Schmidt
// against the existing columns, seeded from standard basis vectors).
inline void complete_basis(Matrix& u, std::size_t have) {
  const std::size_t n = u.rows();
  std::size_t next = have;
  for (std::size_t seed = 0; seed < n && next < n; ++seed) {
    std::vector<cplx> w(n, 0.0);
    w[seed] = 1.0;
    for (std::size_t pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < next; ++j) {
        cplx proj = 0.0;
        for (std::size_t i = 0; i < n; ++i) proj += std::conj(u(i, j)) * w[i];
        for (std::size_t i = 0; i < n; ++i) w[i] -= proj * u(i, j);
      }
    }
    const double nrm = vnorm(w);
    if (nrm < 1e-7) continue;  // seed nearly in span, try the next one
    for (std::size_t i = 0; i < n; ++i) u(i, next) = w[i] / nrm;
    ++next;
  }
  if (next < n) throw std::runtime_error("svd: basis completion failed");
}

}  // namespace detail

/// Singular value decomposition via eigh of the smaller Gram matrix, with a
/// deterministic phase convention (largest entry of each right singular
/// vector made real positive). ||m - U diag(sigma) V^*||_max <= 1e-9 * dim.
///
/// sigma_j is taken as ||m v_j|| rather than sqrt(lambda_j): the eigenvectors
/// of m^*m are accurate even when the eigenvalues hit the Gram formation
/// noise floor, so this keeps tiny singular values from being inflated to
/// sqrt(eps)*sigma_max.
inline SvdResult svd(const Matrix& m) {
  const std::size_t r = m.rows(), c = m.cols();
  if (r == 0 || c == 0) throw std::invalid_argument("svd: empty matrix");
  if (r < c) {
    SvdResult t = svd(m.adjoint());
    return SvdResult{t.v, t.sigma, t.u};
  }

  const std::size_t k = c;
  Matrix gram = m.adjoint() * m;  // c x c, Hermitian PSD
  EighResult e = eigh(gram.hermitized(), 1e-8 * std::max(1.0, gram.max_abs()));

  std::vector<std::vector<cplx>> vcols(k);
  std::vector<std::vector<cplx>> mv(k);
  std::vector<double> sig(k);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<cplx> vj = e.vectors.column(k - 1 - j);  // descending order
    std::size_t imax = 0;
    for (std::size_t i = 1; i < c; ++i)
      if (std::abs(vj[i]) > std::abs(vj[imax])) imax = i;
    if (std::abs(vj[imax]) > 0.0) {
      const cplx ph = std::conj(vj[imax]) / std::abs(vj[imax]);
      for (auto& z : vj) z *= ph;
    }
    mv[j] = matvec(m, vj);
    sig[j] = vnorm(mv[j]);
    vcols[j] = std::move(vj);
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

  SvdResult out;
  out.sigma.resize(k);
  out.v = Matrix(c, c);
  out.u = Matrix(r, r);
  for (std::size_t j = 0; j < k; ++j) {
    out.sigma[j] = sig[order[j]];
    out.v.set_column(j, vcols[order[j]]);
  }

  const double smax = out.sigma.empty() ? 0.0 : out.sigma.front();
  const double cutoff = smax * static_cast<double>(std::max(r, c)) * 1e-14;
  std::size_t have = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (out.sigma[j] <= cutoff) {
      out.sigma[j] = 0.0;
      continue;
    }
    std::vector<cplx> uj = mv[order[j]];
    for (auto& z : uj) z /= out.sigma[j];
    // The m v_j are mutually orthogonal up to roundoff; one Gram-Schmidt pass
    // removes the drift.
    for (std::size_t jj = 0; jj < have; ++jj) {
      cplx proj = 0.0;
      for (std::size_t i = 0; i < r; ++i) proj += std::conj(out.u(i, jj)) * uj[i];
      for (std::size_t i = 0; i < r; ++i) uj[i] -= proj * out.u(i, jj);
    }
    const double nrm = vnorm(uj);
    for (auto& z : uj) z /= nrm;
    out.u.set_column(have, uj);
    ++have;
  }
  detail::complete_basis(out.u, have);
  return out;
}

/// Numerical rank: number of singular values above max_sigma * dim * 1e-12,
/// unless the caller overrides the threshold.
inline std::size_t numerical_rank(const std::vector<double>& sigma,
                                  std::size_t rows, std::size_t cols,
                                  std::optional<double> threshold = {}) {
  if (sigma.empty()) return 0;
  const double smax = *std::max_element(sigma.begin(), sigma.end());
  const double thr = threshold.value_or(
      smax * static_cast<double>(std::max(rows, cols)) * 1e-12);
  std::size_t rank = 0;
  for (double s : sigma)
    if (s > thr) ++rank;
  return rank;
}

inline std::size_t numerical_rank(const Matrix& m,
                                  std::optional<double> threshold = {}) {
  return numerical_rank(svd(m).sigma, m.rows(), m.cols(), threshold);
}

struct SchmidtForm {
  std::vector<double> coefficients;  // nonincreasing, sum of squares 1
  Matrix left;                       // dimA x r, orthonormal columns
  Matrix right;                      // dimB x r, orthonormal columns
};

/// Schmidt decomposition of a bipartite unit vector:
/// v = sum_i coeff_i (left_i (x) right_i). Coefficient count equals the
/// numerical rank of the dimA x dimB reshape.
inline SchmidtForm schmidt(const std::vector<cplx>& v, std::size_t dim_a,
                           std::size_t dim_b) {
  if (v.size() != dim_a * dim_b)
    throw std::invalid_argument("schmidt: vector length != dimA*dimB");
  if (std::abs(vnorm(v) - 1.0) > 1e-10)
    throw std::invalid_argument("schmidt: input vector is not unit norm");

  Matrix m(dim_a, dim_b);
  for (std::size_t a = 0; a < dim_a; ++a)
    for (std::size_t b = 0; b < dim_b; ++b) m(a, b) = v[a * dim_b + b];

  SvdResult s = svd(m);
  const std::size_t rank = numerical_rank(s.sigma, dim_a, dim_b);

  SchmidtForm f;
  f.coefficients.assign(s.sigma.begin(), s.sigma.begin() + rank);
  f.left = Matrix(dim_a, rank);
  f.right = Matrix(dim_b, rank);
  for (std::size_t j = 0; j < rank; ++j) {
    f.left.set_column(j, s.u.column(j));
    std::vector<cplx> rj = s.v.column(j);
    for (auto& z : rj) z = std::conj(z);  // v(a,b) = sum sigma u(a) conj(v(b))
    f.right.set_column(j, rj);
  }
  return f;
}

// ---- Hermitian helper transforms built on eigh (used by the SDP engine) ----

inline double lambda_max(const Matrix& herm) {
  EighResult e = eigh(herm, 1e-8 * std::max(1.0, herm.max_abs()));
  return e.eigenvalues.empty() ? 0.0 : e.eigenvalues.back();
}

inline double lambda_min(const Matrix& herm) {
  EighResult e = eigh(herm, 1e-8 * std::max(1.0, herm.max_abs()));
  return e.eigenvalues.empty() ? 0.0 : e.eigenvalues.front();
}

/// f(m) = V f(Lambda) V^* for Hermitian m.
template <typename F>
inline Matrix hermitian_map(const Matrix& herm, F&& f) {
  EighResult e = eigh(herm, 1e-8 * std::max(1.0, herm.max_abs()));
  const std::size_t n = herm.rows();
  Matrix r(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fv = f(e.eigenvalues[k]);
    if (fv == 0.0) continue;
    const std::vector<cplx> col = e.vectors.column(k);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        r(i, j) += fv * col[i] * std::conj(col[j]);
  }
  return r;
}

inline Matrix positive_part(const Matrix& herm) {
  return hermitian_map(herm, [](double x) { return x > 0.0 ? x : 0.0; });
}

inline Matrix inverse_sqrt(const Matrix& herm_psd, double floor_rel = 1e-14) {
  const double lmax = std::max(lambda_max(herm_psd), 0.0);
  const double floor = std::max(lmax * floor_rel, 1e-300);
  return hermitian_map(herm_psd, [floor](double x) {
    return 1.0 / std::sqrt(std::max(x, floor));
  });
}

}  // namespace qgt
