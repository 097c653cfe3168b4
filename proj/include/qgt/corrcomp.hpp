#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgt/biclique.hpp"
#include "qgt/decomp.hpp"
#include "qgt/deviation.hpp"
#include "qgt/game.hpp"
#include "qgt/nmf.hpp"
#include "qgt/quantum.hpp"

namespace qgt {

/// A bivariate distribution viewed as a matrix (rows = first party's
/// alphabet, columns = second party's).
struct CorrelationMatrix {
  DMat p;

  void validate() const {
    double sum = 0.0;
    for (double v : p.a) {
      if (v < -1e-12) throw std::invalid_argument("correlation: negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("correlation: entries sum to " + std::to_string(sum));
  }

  JointDistribution as_distribution() const {
    return JointDistribution{{p.rows, p.cols}, p.a};
  }
};

inline CorrelationMatrix make_correlation(DMat p) {
  CorrelationMatrix c{std::move(p)};
  c.validate();
  return c;
}

/// size(p) = (ceil(log2 |X|) + ceil(log2 |Y|)) / 2  (shared-resource convention).
inline double size_of(const CorrelationMatrix& p) {
  const auto clog2 = [](std::size_t n) {
    std::size_t b = 0;
    while ((std::size_t(1) << b) < n) ++b;
    return static_cast<double>(b);
  };
  return 0.5 * (clog2(p.p.rows) + clog2(p.p.cols));
}

/// qcorr lower bound: (1/4) log2 rank(P).
inline double rank_lb_qcorr(const CorrelationMatrix& p) {
  const std::size_t r = numerical_rank(to_complex(p.p));
  return r == 0 ? 0.0 : 0.25 * std::log2(static_cast<double>(r));
}

/// Mutual information I(X;Y) in bits, with 0 log 0 = 0.
inline double mutual_information(const CorrelationMatrix& cp) {
  const DMat& p = cp.p;
  std::vector<double> px(p.rows, 0.0), py(p.cols, 0.0);
  for (std::size_t x = 0; x < p.rows; ++x)
    for (std::size_t y = 0; y < p.cols; ++y) {
      px[x] += p(x, y);
      py[y] += p(x, y);
    }
  double info = 0.0;
  for (std::size_t x = 0; x < p.rows; ++x)
    for (std::size_t y = 0; y < p.cols; ++y) {
      const double v = p(x, y);
      if (v <= 0.0) continue;
      info += v * std::log2(v / (px[x] * py[y]));
    }
  return info;
}

// ---- quantum generation protocol (Theorem qcorr upper bound) ----

/// Seed state sum_i sigma_i |i>|i> plus local unitaries; executing the
/// protocol (unitaries then computational measurement) outputs |Q(x,y)|^2.
struct QuantumProtocol {
  std::vector<double> sigma;  // nonincreasing, sum of squares 1
  Matrix u;                   // Alice's unitary (columns u_i)
  Matrix v;                   // Bob's unitary (columns conj(v_i))
  std::size_t seed_qubits_per_side = 0;

  /// Pre-measurement pure state on the two output registers.
  PureState final_state() const {
    const std::size_t m = u.rows(), n = v.rows();
    PureState psi{{m, n}, std::vector<cplx>(m * n, 0.0)};
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        cplx amp = 0.0;
        for (std::size_t i = 0; i < sigma.size(); ++i)
          amp += sigma[i] * u(x, i) * v(y, i);
        psi.amp[x * n + y] = amp;
      }
    return psi;
  }
  /// Output distribution by full enumeration.
  CorrelationMatrix simulate() const {
    const PureState psi = final_state();
    DMat p(u.rows(), v.rows());
    for (std::size_t k = 0; k < psi.amp.size(); ++k) p.a[k] = std::norm(psi.amp[k]);
    return CorrelationMatrix{std::move(p)};
  }
};

/// Theorem qcorr protocol synthesis from any Q with Q o conj(Q) = P: SVD of
/// Q, shared state sum sigma_i |ii>, Alice applies U, Bob applies conj(V).
/// Q is normalized to unit Frobenius norm if needed. Seed size is
/// ceil(log2 rank Q) qubits per side.
inline QuantumProtocol qcorr_ub_protocol(const Matrix& q_in) {
  Matrix q = q_in;
  const double fro = q.frobenius_norm();
  if (fro <= 1e-300) throw std::invalid_argument("qcorr_ub_protocol: zero matrix");
  if (std::abs(fro - 1.0) > 1e-12) q = q * (1.0 / fro);

  SvdResult s = svd(q);
  const std::size_t rank = numerical_rank(s.sigma, q.rows(), q.cols());
  if (rank == 0) throw std::invalid_argument("qcorr_ub_protocol: zero matrix");

  QuantumProtocol pr;
  pr.sigma.assign(s.sigma.begin(), s.sigma.begin() + rank);
  pr.u = s.u;
  pr.v = s.v.conjugate();
  std::size_t qb = 0;
  while ((std::size_t(1) << qb) < rank) ++qb;
  pr.seed_qubits_per_side = qb;
  return pr;
}

// ---- classical generation protocol (Theorem rcomm upper bound) ----

/// Shared seed i ~ q over [r]; Alice samples x from row sampler a_i, Bob
/// samples y from column sampler b_i. Exactness is verified by enumeration,
/// never by Monte Carlo.
struct ClassicalProtocol {
  std::vector<double> seed_distribution;  // q over [r]
  DMat row_samplers;                      // r x m, row i = a_i
  DMat col_samplers;                      // r x n, row i = b_i
  std::size_t seed_bits = 0;
  DMat target;                            // the product C*D the protocol reproduces

  CorrelationMatrix simulate() const {
    DMat p(row_samplers.cols, col_samplers.cols);
    for (std::size_t i = 0; i < seed_distribution.size(); ++i)
      for (std::size_t x = 0; x < p.rows; ++x)
        for (std::size_t y = 0; y < p.cols; ++y)
          p(x, y) += seed_distribution[i] * row_samplers(i, x) * col_samplers(i, y);
    return CorrelationMatrix{std::move(p)};
  }
};

/// Executable sampler from a certified exact factorization P = CD:
/// q_i = |c_i|_1 |d_i|_1, a_i and b_i the normalized column/row. Components
/// with zero mass are dropped. Distributional equality with the factorization
/// product is verified by full enumeration before returning.
inline ClassicalProtocol classical_protocol_from(const NonnegFactorization& f) {
  if (!f.certified_exact)
    throw std::invalid_argument("classical_protocol_from: factorization not certified exact");
  const std::size_t m = f.c.rows, r = f.c.cols, n = f.d.cols;

  ClassicalProtocol pr;
  pr.target = f.c.mul(f.d);
  for (std::size_t i = 0; i < r; ++i) {
    double cnorm = 0.0, dnorm = 0.0;
    for (std::size_t x = 0; x < m; ++x) cnorm += f.c(x, i);
    for (std::size_t y = 0; y < n; ++y) dnorm += f.d(i, y);
    const double qi = cnorm * dnorm;
    if (qi <= 0.0) continue;
    pr.seed_distribution.push_back(qi);
    const std::size_t row = pr.seed_distribution.size() - 1;
    pr.row_samplers.rows = row + 1;
    pr.row_samplers.cols = m;
    pr.row_samplers.a.resize((row + 1) * m);
    for (std::size_t x = 0; x < m; ++x) pr.row_samplers(row, x) = f.c(x, i) / cnorm;
    pr.col_samplers.rows = row + 1;
    pr.col_samplers.cols = n;
    pr.col_samplers.a.resize((row + 1) * n);
    for (std::size_t y = 0; y < n; ++y) pr.col_samplers(row, y) = f.d(i, y) / dnorm;
  }
  const std::size_t reff = pr.seed_distribution.size();
  std::size_t bits = 0;
  while ((std::size_t(1) << bits) < reff) ++bits;
  pr.seed_bits = bits;

  const double qsum =
      std::accumulate(pr.seed_distribution.begin(), pr.seed_distribution.end(), 0.0);
  if (std::abs(qsum - 1.0) > 1e-9)
    throw std::invalid_argument("classical_protocol_from: product is not a distribution");
  if (pr.simulate().p.max_abs_diff(pr.target) > 1e-10)
    throw std::logic_error("classical_protocol_from: enumeration check failed");
  return pr;
}

/// Nonnegative-rank lower bound: max of numerical rank and (up to 8x8) the
/// exact biclique cover number of the support. The tag names the bound that
/// fired.
struct NnRankLowerBound {
  std::size_t value = 0;
  std::string certificate;  // "biclique" or "rank"
  std::size_t rank = 0;
  std::optional<std::size_t> biclique;
};

inline NnRankLowerBound nn_rank_lower(const DMat& p) {
  NnRankLowerBound b;
  b.rank = numerical_rank(to_complex(p));
  b.value = b.rank;
  b.certificate = "rank";
  if (p.rows <= 8 && p.cols <= 8) {
    b.biclique = biclique_cover_number(p);
    if (*b.biclique >= b.rank) {
      b.value = *b.biclique;
      b.certificate = "biclique";
    }
  }
  return b;
}

// ---- instances ----

struct EuclideanInstance {
  Matrix q;              // Q(x,y) = c_x - c_y, rank 2
  CorrelationMatrix p;   // Q o Q normalized, zero diagonal
  double cited_nn_rank_lb = 0.0;  // Beasley-Laffey: rank_+(P) >= log2 N (cited)
};

inline EuclideanInstance euclidean_instance(const std::vector<double>& cs) {
  const std::size_t n = cs.size();
  if (n < 2) throw std::invalid_argument("euclidean_instance: need at least 2 points");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (cs[i] == cs[j])
        throw std::invalid_argument("euclidean_instance: points must be distinct");

  EuclideanInstance inst;
  inst.q = Matrix(n, n);
  DMat p(n, n);
  double norm1 = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      const double d = cs[x] - cs[y];
      inst.q(x, y) = d;
      p(x, y) = d * d;
      norm1 += d * d;
    }
  for (double& v : p.a) v /= norm1;
  inst.p = make_correlation(std::move(p));
  inst.cited_nn_rank_lb = std::log2(static_cast<double>(n));
  return inst;
}

struct HjmrInstance {
  CorrelationMatrix full;       // 2^n x 2^n
  DMat submatrix;               // (n+1) x (n+1) distinguished submatrix
  std::size_t submatrix_rank = 0;
};

/// The HJMR distribution p(x,y) = |{i: x_i = y_i}|/n * 2^{1-2n} on n-bit
/// strings; the submatrix over {0^n, 10^{n-1}, ..., 1^n} has rank n+1.
inline HjmrInstance hjmr_distribution(std::size_t n) {
  if (n < 1 || n > 10) throw std::invalid_argument("hjmr_distribution: n must be in [1, 10]");
  const std::size_t size = std::size_t(1) << n;
  HjmrInstance inst;
  DMat p(size, size);
  const double unit = std::ldexp(1.0, 1 - 2 * static_cast<int>(n)) / double(n);
  for (std::size_t x = 0; x < size; ++x)
    for (std::size_t y = 0; y < size; ++y) {
      const std::size_t agree = n - std::popcount(x ^ y);
      p(x, y) = double(agree) * unit;
    }
  inst.full = make_correlation(std::move(p));

  // indices 1^a 0^{n-a}, a = 0..n
  std::vector<std::size_t> idx(n + 1);
  for (std::size_t a = 0; a <= n; ++a)
    idx[a] = a == 0 ? 0 : (((std::size_t(1) << a) - 1) << (n - a));
  inst.submatrix = DMat(n + 1, n + 1);
  for (std::size_t a = 0; a <= n; ++a)
    for (std::size_t b = 0; b <= n; ++b)
      inst.submatrix(a, b) = inst.full.p(idx[a], idx[b]);
  inst.submatrix_rank = numerical_rank(to_complex(inst.submatrix));
  return inst;
}

// ---- conjecture experiment (section 4.1.1 family) ----

struct ConjectureSample {
  Matrix q;                  // Q = A B, zero diagonal, columns sum to 1
  DMat a;                    // rows a_i on the unit sphere of R^r
  DMat b;                    // least-norm solutions of the two constraint families
  std::size_t rank = 0;
  NnRankLowerBound nn_lower; // of Q o Q normalized
  double diag_max = 0.0;
  double colsum_defect = 0.0;
  std::size_t resamples = 0;
};

/// Samples (A, B) with rows a_i uniform on the sphere and each column b_j the
/// least-norm solution of <sum_i a_i, b_j> = 1, <a_j, b_j> = 0; resamples on
/// an ill-conditioned constraint pair. The least-norm choice is this
/// implementation's resolution of the paper's unspecified sampling rule.
inline ConjectureSample conjecture_sampler(std::size_t n, std::size_t r,
                                           std::uint64_t seed,
                                           std::size_t max_resamples = 64) {
  if (r < 2) throw std::invalid_argument("conjecture_sampler: r must be >= 2");
  if (n < 2) throw std::invalid_argument("conjecture_sampler: n must be >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  ConjectureSample out;
  for (std::size_t attempt = 0; attempt <= max_resamples; ++attempt) {
    DMat a(n, r);
    for (std::size_t i = 0; i < n; ++i) {
      double norm = 0.0;
      while (norm < 1e-12) {
        norm = 0.0;
        for (std::size_t k = 0; k < r; ++k) {
          a(i, k) = gauss(rng);
          norm += a(i, k) * a(i, k);
        }
        norm = std::sqrt(norm);
      }
      for (std::size_t k = 0; k < r; ++k) a(i, k) /= norm;
    }
    std::vector<double> asum(r, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < r; ++k) asum[k] += a(i, k);

    // b_j = least-norm solution of [asum; a_j] b = [1; 0] via the 2x2 normal
    // equations of the underdetermined system.
    DMat b(r, n);
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) {
      double g11 = 0.0, g12 = 0.0, g22 = 0.0;
      for (std::size_t k = 0; k < r; ++k) {
        g11 += asum[k] * asum[k];
        g12 += asum[k] * a(j, k);
        g22 += a(j, k) * a(j, k);
      }
      const double det = g11 * g22 - g12 * g12;
      if (std::abs(det) < 1e-10) {
        ok = false;  // sum parallel to a_j: constraints (nearly) inconsistent
        break;
      }
      const double alpha = g22 / det;   // solves G [alpha; beta] = [1; 0]
      const double beta = -g12 / det;
      for (std::size_t k = 0; k < r; ++k) b(k, j) = alpha * asum[k] + beta * a(j, k);
    }
    if (!ok) {
      ++out.resamples;
      continue;
    }

    out.a = std::move(a);
    out.b = std::move(b);
    const DMat qd = out.a.mul(out.b);
    out.q = to_complex(qd);
    for (std::size_t i = 0; i < n; ++i)
      out.diag_max = std::max(out.diag_max, std::abs(qd(i, i)));
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += qd(i, j);
      out.colsum_defect = std::max(out.colsum_defect, std::abs(s - 1.0));
    }
    out.rank = numerical_rank(out.q);

    DMat hk(n, n);
    double norm1 = 0.0;
    for (std::size_t k = 0; k < n * n; ++k) {
      hk.a[k] = qd.a[k] * qd.a[k];
      norm1 += hk.a[k];
    }
    hk.rows = n;
    hk.cols = n;
    for (double& v : hk.a) v /= norm1;
    if (n <= 8)
      out.nn_lower = nn_rank_lower(hk);
    else {
      out.nn_lower.rank = numerical_rank(to_complex(hk));
      out.nn_lower.value = out.nn_lower.rank;
      out.nn_lower.certificate = "rank";
    }
    return out;
  }
  throw std::runtime_error("conjecture_sampler: infeasible after max resamples");
}

// ---- untrusted local operation model ----

struct UntrustedVerdict {
  bool ok = false;
  std::vector<double> honest_payoffs;
  std::vector<IncentiveResult> incentives;  // per player, deviating alone
  double honest_execution_error = 0.0;
  std::size_t seed_dim = 0;
};

/// Equilibrium check for a generation protocol: the seed state plus one
/// prescribed local channel per player must reproduce the target CE; the
/// verdict is true iff no player can gain more than tol by replacing her own
/// local operation while the other players stay honest.
inline UntrustedVerdict check_untrusted_equilibrium(
    const Game& g, const DensityState& seed,
    const std::vector<LocalChannel>& local_ops, const JointDistribution& target,
    double tol, const SolveOptions& opt = {}) {
  if (local_ops.size() != g.players)
    throw std::invalid_argument("untrusted: one local operation per player required");
  if (seed.dims != g.strategy_counts)
    throw std::invalid_argument("untrusted: seed dims must match the game");

  DensityState honest = seed;
  for (std::size_t i = 0; i < g.players; ++i) {
    if (local_ops[i].player != i)
      throw std::invalid_argument("untrusted: local operation player index mismatch");
    honest = apply_local(honest, local_ops[i]);
  }
  UntrustedVerdict v;
  const JointDistribution measured = measure_diag(honest);
  double err = 0.0;
  for (std::size_t s = 0; s < measured.p.size(); ++s)
    err = std::max(err, std::abs(measured.p[s] - target.p[s]));
  v.honest_execution_error = err;
  if (err > 1e-9)
    throw std::invalid_argument(
        "untrusted: honest execution does not reproduce the target (error " +
        std::to_string(err) + ")");

  v.honest_payoffs = quantum_utility(g, honest);
  v.seed_dim = seed.total_dim();
  v.ok = true;
  for (std::size_t i = 0; i < g.players; ++i) {
    DensityState others = seed;
    for (std::size_t j = 0; j < g.players; ++j)
      if (j != i) others = apply_local(others, local_ops[j]);
    IncentiveResult r =
        max_channel_incentive(g, others, i, IncentiveMode::additive, opt);
    // Incentive is measured against the honest payoff; the optimizer's
    // baseline is the raw-seed payoff, so shift both bounds.
    const double shift = r.baseline - v.honest_payoffs[i];
    r.baseline = v.honest_payoffs[i];
    r.primal_value += shift;
    r.dual_bound += shift;
    if (r.dual_bound > tol) v.ok = false;
    v.incentives.push_back(std::move(r));
  }
  return v;
}

/// Diagonal seed + stochastic local maps encoding a classical protocol on a
/// game whose strategy counts are at least the protocol's alphabet sizes.
struct EmbeddedClassicalProtocol {
  DensityState seed;
  std::vector<LocalChannel> ops;
};

inline EmbeddedClassicalProtocol embed_classical_protocol(const ClassicalProtocol& pr,
                                                          const Game& g) {
  const std::size_t r = pr.seed_distribution.size();
  const std::size_t m = g.strategy_counts[0], n = g.strategy_counts[1];
  if (g.players != 2)
    throw std::invalid_argument("embed_classical_protocol: two-player games only");
  if (r > m || r > n || pr.row_samplers.cols != m || pr.col_samplers.cols != n)
    throw std::invalid_argument("embed_classical_protocol: alphabet mismatch");

  EmbeddedClassicalProtocol out;
  Matrix rho(m * n, m * n);
  for (std::size_t i = 0; i < r; ++i)
    rho(i * n + i, i * n + i) = pr.seed_distribution[i];
  out.seed = DensityState{{m, n}, std::move(rho)};

  // Stochastic channel "on seed value i, output a sample of the i-th
  // sampler": one Kraus sqrt(w(x|i)) |x><i| per (i, x) pair (a combined
  // per-output operator would not be trace preserving), identity on unused
  // seed levels.
  const auto stochastic = [](std::size_t player, const DMat& samplers,
                             std::size_t dim) {
    LocalChannel ch;
    ch.player = player;
    const std::size_t r0 = samplers.rows;
    for (std::size_t i = 0; i < r0; ++i)
      for (std::size_t x = 0; x < dim; ++x) {
        const double w = samplers(i, x);
        if (w <= 0.0) continue;
        Matrix k(dim, dim);
        k(x, i) = std::sqrt(w);
        ch.kraus.push_back(std::move(k));
      }
    for (std::size_t i = r0; i < dim; ++i) {
      Matrix k(dim, dim);
      k(i, i) = 1.0;
      ch.kraus.push_back(std::move(k));
    }
    ch.validate();
    return ch;
  };
  out.ops.push_back(stochastic(0, pr.row_samplers, m));
  out.ops.push_back(stochastic(1, pr.col_samplers, n));
  return out;
}

/// Seed state + unitary local channels realizing a quantum protocol on a
/// two-player game (protocol alphabets must match the strategy counts).
struct EmbeddedQuantumProtocol {
  DensityState seed;
  std::vector<LocalChannel> ops;
};

inline EmbeddedQuantumProtocol embed_quantum_protocol(const QuantumProtocol& pr,
                                                      const Game& g) {
  if (g.players != 2)
    throw std::invalid_argument("embed_quantum_protocol: two-player games only");
  const std::size_t m = g.strategy_counts[0], n = g.strategy_counts[1];
  if (pr.u.rows() != m || pr.v.rows() != n)
    throw std::invalid_argument("embed_quantum_protocol: alphabet mismatch");

  PureState seed{{m, n}, std::vector<cplx>(m * n, 0.0)};
  for (std::size_t i = 0; i < pr.sigma.size(); ++i) seed.amp[i * n + i] = pr.sigma[i];

  EmbeddedQuantumProtocol out;
  out.seed = density_from_pure(seed);
  out.ops.push_back(unitary_channel(0, pr.u));
  out.ops.push_back(unitary_channel(1, pr.v));
  return out;
}

// ---- separation report rows (CSV external interface) ----

struct SeparationRow {
  std::string instance;
  double size = 0.0;
  std::size_t rank = 0;
  double rank_lb = 0.0;             // (1/4) log2 rank
  std::size_t nnr_lb = 0;
  std::optional<std::size_t> nnr_ub;
  std::size_t qcorr_ub_qubits = 0;
  std::size_t rcorr_lb_bits = 0;    // ceil(log2 nnr_lb)
  std::string notes;
};

inline std::string separation_csv_header() {
  return "instance,size,rank,rank-lb,nnr-lb,nnr-ub,qcorr-ub(qubits),rcorr-lb(bits),notes";
}

inline std::string separation_csv_row(const SeparationRow& r) {
  std::string s = r.instance + "," + std::to_string(r.size) + "," +
                  std::to_string(r.rank) + "," + std::to_string(r.rank_lb) + "," +
                  std::to_string(r.nnr_lb) + ",";
  s += r.nnr_ub ? std::to_string(*r.nnr_ub) : std::string("-");
  s += "," + std::to_string(r.qcorr_ub_qubits) + "," + std::to_string(r.rcorr_lb_bits) +
       ",\"" + r.notes + "\"";
  return s;
}

inline std::size_t ceil_log2(std::size_t v) {
  std::size_t b = 0;
  while ((std::size_t(1) << b) < v) ++b;
  return b;
}

}  // namespace qgt
