#pragma once

// Dense matrix helpers sized for this library's needs: ability dimensions are
// 1 to 3, so everything here favors clarity over asymptotics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mirtlink {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

  bool empty() const { return rows == 0 || cols == 0; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.v == b.v;
  }
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: shape mismatch");
  Matrix out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      for (int j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
  if (m.cols != static_cast<int>(x.size()))
    throw std::invalid_argument("matvec: shape mismatch");
  std::vector<double> out(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double acc = 0.0;
    for (int j = 0; j < m.cols; ++j) acc += m(i, j) * x[j];
    out[i] = acc;
  }
  return out;
}

inline Matrix transpose(const Matrix& m) {
  Matrix out(m.cols, m.rows);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
  return out;
}

inline double det(const Matrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("det: not square");
  switch (m.rows) {
    case 0:
      return 1.0;
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default:
      break;
  }
  // Gaussian elimination fallback for anything larger.
  Matrix a = m;
  double d = 1.0;
  for (int col = 0; col < a.cols; ++col) {
    int piv = col;
    for (int r = col + 1; r < a.rows; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) return 0.0;
    if (piv != col) {
      for (int j = 0; j < a.cols; ++j) std::swap(a(piv, j), a(col, j));
      d = -d;
    }
    d *= a(col, col);
    for (int r = col + 1; r < a.rows; ++r) {
      const double f = a(r, col) / a(col, col);
      for (int j = col; j < a.cols; ++j) a(r, j) -= f * a(col, j);
    }
  }
  return d;
}

// Gauss-Jordan with partial pivoting; throws on (near-)singular input.
inline Matrix inverse(const Matrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("inverse: not square");
  const int n = m.rows;
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) < 1e-300)
      throw std::runtime_error("inverse: singular matrix");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    const double p = a(col, col);
    for (int j = 0; j < n; ++j) {
      a(col, j) /= p;
      inv(col, j) /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

inline bool is_symmetric(const Matrix& m, double tol = 1e-9) {
  if (m.rows != m.cols) return false;
  for (int i = 0; i < m.rows; ++i)
    for (int j = i + 1; j < m.cols; ++j) {
      const double scale = std::max({1.0, std::abs(m(i, j)), std::abs(m(j, i))});
      if (std::abs(m(i, j) - m(j, i)) > tol * scale) return false;
    }
  return true;
}

// Eigenvalues of a symmetric matrix via cyclic Jacobi, ascending order.
inline std::vector<double> sym_eigenvalues(const Matrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("sym_eigenvalues: not square");
  const int n = m.rows;
  Matrix a = m;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t =
            (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// 2-norm condition number, sqrt of the eigenvalue ratio of AᵀA.
inline double condition_number(const Matrix& a) {
  const Matrix ata = matmul(transpose(a), a);
  const auto ev = sym_eigenvalues(ata);
  const double lo = ev.front();
  const double hi = ev.back();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(hi / lo);
}

// Lower-triangular Cholesky factor; throws unless positive definite.
inline Matrix cholesky(const Matrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("cholesky: not square");
  const int n = m.rows;
  Matrix l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = m(i, j);
      for (int k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
      if (i == j) {
        if (acc <= 0.0) throw std::runtime_error("cholesky: not positive definite");
        l(i, i) = std::sqrt(acc);
      } else {
        l(i, j) = acc / l(j, j);
      }
    }
  }
  return l;
}

}  // namespace mirtlink
