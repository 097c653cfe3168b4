#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgt {

using cplx = std::complex<double>;

// Per-axis cap on tensor-product sizes (joint strategy spaces, kron results).
inline constexpr std::size_t kSizeCap = 4096;

/// Dense complex matrix, row major. Sized for desk-scale problems (dim <= 256
/// in the hot paths); no sparse formats, no blocking.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Matrix zero(std::size_t rows, std::size_t cols) {
    return Matrix(rows, cols);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return a_.empty(); }

  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const {
    return a_[i * cols_ + j];
  }

  std::vector<cplx>& data() { return a_; }
  const std::vector<cplx>& data() const { return a_; }

  Matrix operator+(const Matrix& o) const {
    check_same_shape(o);
    Matrix r(rows_, cols_);
    for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] + o.a_[k];
    return r;
  }
  Matrix operator-(const Matrix& o) const {
    check_same_shape(o);
    Matrix r(rows_, cols_);
    for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] - o.a_[k];
    return r;
  }
  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  Matrix operator*(const Matrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("matrix product: shape mismatch");
    Matrix r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = 0; k < cols_; ++k) {
        const cplx aik = a_[i * cols_ + k];
        if (aik == cplx{}) continue;
        const cplx* brow = &o.a_[k * o.cols_];
        cplx* rrow = &r.a_[i * o.cols_];
        for (std::size_t j = 0; j < o.cols_; ++j) rrow[j] += aik * brow[j];
      }
    }
    return r;
  }
  Matrix operator*(cplx s) const {
    Matrix r(rows_, cols_);
    for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] * s;
    return r;
  }
  Matrix operator*(double s) const { return *this * cplx(s, 0.0); }

  Matrix adjoint() const {
    Matrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        r(j, i) = std::conj((*this)(i, j));
    return r;
  }
  Matrix transpose() const {
    Matrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }
  Matrix conjugate() const {
    Matrix r(rows_, cols_);
    for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = std::conj(a_[k]);
    return r;
  }

  cplx trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }
  double frobenius_norm() const {
    double s = 0.0;
    for (const cplx& z : a_) s += std::norm(z);
    return std::sqrt(s);
  }
  double max_abs() const {
    double m = 0.0;
    for (const cplx& z : a_) m = std::max(m, std::abs(z));
    return m;
  }
  double max_abs_diff(const Matrix& o) const {
    check_same_shape(o);
    double m = 0.0;
    for (std::size_t k = 0; k < a_.size(); ++k)
      m = std::max(m, std::abs(a_[k] - o.a_[k]));
    return m;
  }

  bool is_square() const { return rows_ == cols_; }
  double hermiticity_defect() const {
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i; j < cols_; ++j)
        m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return m;
  }
  bool is_hermitian(double tol = 1e-12) const {
    return is_square() && hermiticity_defect() <= tol;
  }
  // Averages away the antisymmetric roundoff of a nominally Hermitian matrix.
  Matrix hermitized() const {
    Matrix r(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        r(i, j) = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
    return r;
  }

  std::vector<cplx> column(std::size_t j) const {
    std::vector<cplx> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }
  void set_column(std::size_t j, const std::vector<cplx>& c) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = c[i];
  }

 private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("matrix shape mismatch");
  }
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> a_;
};

inline Matrix operator*(double s, const Matrix& m) { return m * s; }
inline Matrix operator*(cplx s, const Matrix& m) { return m * s; }

/// Kronecker product; entry((i1,i2),(j1,j2)) = a(i1,j1) * b(i2,j2).
inline Matrix kron(const Matrix& a, const Matrix& b) {
  const std::size_t r = a.rows() * b.rows();
  const std::size_t c = a.cols() * b.cols();
  if (r > kSizeCap || c > kSizeCap)
    throw std::invalid_argument("kron: result exceeds size cap " +
                                std::to_string(kSizeCap));
  Matrix m(r, c);
  for (std::size_t i1 = 0; i1 < a.rows(); ++i1)
    for (std::size_t j1 = 0; j1 < a.cols(); ++j1) {
      const cplx v = a(i1, j1);
      if (v == cplx{}) continue;
      for (std::size_t i2 = 0; i2 < b.rows(); ++i2)
        for (std::size_t j2 = 0; j2 < b.cols(); ++j2)
          m(i1 * b.rows() + i2, j1 * b.cols() + j2) = v * b(i2, j2);
    }
  return m;
}

inline Matrix matrix_power_kron(const Matrix& a, std::size_t d) {
  Matrix r = Matrix::identity(1);
  for (std::size_t k = 0; k < d; ++k) r = kron(r, a);
  return r;
}

// ---- complex vector helpers ----

inline cplx vdot(const std::vector<cplx>& x, const std::vector<cplx>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("vdot: length mismatch");
  cplx s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

inline double vnorm(const std::vector<cplx>& x) {
  double s = 0.0;
  for (const cplx& z : x) s += std::norm(z);
  return std::sqrt(s);
}

inline std::vector<cplx> matvec(const Matrix& m, const std::vector<cplx>& x) {
  if (m.cols() != x.size()) throw std::invalid_argument("matvec: shape mismatch");
  std::vector<cplx> y(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

/// Rank-one outer product u v^*.
inline Matrix outer(const std::vector<cplx>& u, const std::vector<cplx>& v) {
  Matrix m(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * std::conj(v[j]);
  return m;
}

/// Dense real matrix, row major. Used where the data is genuinely real
/// (probabilities, payoff matrices, nonnegative factors).
struct DMat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  DMat() = default;
  DMat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  static DMat identity(std::size_t n) {
    DMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  DMat mul(const DMat& o) const {
    if (cols != o.rows) throw std::invalid_argument("DMat product: shape mismatch");
    DMat r(rows, o.cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t k = 0; k < cols; ++k) {
        const double v = a[i * cols + k];
        if (v == 0.0) continue;
        for (std::size_t j = 0; j < o.cols; ++j)
          r.a[i * o.cols + j] += v * o.a[k * o.cols + j];
      }
    return r;
  }
  DMat transpose() const {
    DMat r(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) r(j, i) = (*this)(i, j);
    return r;
  }
  double sum() const {
    double s = 0.0;
    for (double v : a) s += v;
    return s;
  }
  double max_abs_diff(const DMat& o) const {
    if (rows != o.rows || cols != o.cols)
      throw std::invalid_argument("DMat shape mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      m = std::max(m, std::abs(a[k] - o.a[k]));
    return m;
  }
  double min() const {
    double m = a.empty() ? 0.0 : a[0];
    for (double v : a) m = std::min(m, v);
    return m;
  }
};

inline Matrix to_complex(const DMat& m) {
  Matrix r(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) r(i, j) = m(i, j);
  return r;
}

inline DMat real_part(const Matrix& m) {
  DMat r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).real();
  return r;
}

}  // namespace qgt
