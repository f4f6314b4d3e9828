// Dense symmetric eigensolver (tridiagonalize + QL) and the eigendecomposition
// route for symmetric-definite Sylvester systems.

#include "dipl/numlin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dipl/errors.hpp"

namespace dipl {

namespace {

// Householder reduction of the symmetric matrix held in z to tridiagonal form
// with accumulated orthogonal transformations left in z. Classic tred2.
void tridiagonalize(Matrix& z, std::vector<double>& d, std::vector<double>& e) {
  const int n = z.rows();
  for (int i = n - 1; i > 0; --i) {
    const int l = i - 1;
    double h = 0.0;
    double scale = 0.0;
    if (l > 0) {
      for (int k = 0; k < i; ++k) scale += std::abs(z(i, k));
      if (scale == 0.0) {
        e[i] = z(i, l);
      } else {
        for (int k = 0; k < i; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j < i; ++j) {
          z(j, i) = z(i, j) / h;
          g = 0.0;
          for (int k = 0; k < j + 1; ++k) g += z(j, k) * z(i, k);
          for (int k = j + 1; k < i; ++k) g += z(k, j) * z(i, k);
          e[j] = g / h;
          f += e[j] * z(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j < i; ++j) {
          f = z(i, j);
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k < j + 1; ++k) z(j, k) -= f * e[k] + g * z(i, k);
        }
      }
    } else {
      e[i] = z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      for (int j = 0; j < i; ++j) {
        double g = 0.0;
        for (int k = 0; k < i; ++k) g += z(i, k) * z(k, j);
        for (int k = 0; k < i; ++k) z(k, j) -= g * z(k, i);
      }
    }
    d[i] = z(i, i);
    z(i, i) = 1.0;
    for (int j = 0; j < i; ++j) z(j, i) = z(i, j) = 0.0;
  }
}

// Implicit-shift QL on the tridiagonal (d, e), rotations applied to the
// columns of z. Classic tql2.
void ql_implicit(std::vector<double>& d, std::vector<double>& e, Matrix& z) {
  const int n = static_cast<int>(d.size());
  const double eps = std::numeric_limits<double>::epsilon();
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 50) throw NumericError("sym_eig: QL iteration failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

void sort_ascending(std::vector<double>& d, Matrix& z) {
  const int n = static_cast<int>(d.size());
  for (int i = 0; i < n - 1; ++i) {
    int min_idx = i;
    for (int j = i + 1; j < n; ++j)
      if (d[j] < d[min_idx]) min_idx = j;
    if (min_idx != i) {
      std::swap(d[i], d[min_idx]);
      for (int k = 0; k < n; ++k) std::swap(z(k, i), z(k, min_idx));
    }
  }
}

}  // namespace

SymEig sym_eig(const Matrix& s) {
  const int n = s.rows();
  if (n != s.cols()) throw InvalidInputError("sym_eig: matrix is not square");
  double max_abs = 0.0;
  double max_asym = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      max_abs = std::max(max_abs, std::abs(s(i, j)));
      max_asym = std::max(max_asym, std::abs(s(i, j) - s(j, i)));
    }
  if (max_asym > 1e-10 * std::max(1.0, max_abs))
    throw InvalidInputError("sym_eig: matrix is not symmetric");

  SymEig out;
  out.values.assign(n, 0.0);
  if (n == 0) {
    out.vectors = Matrix(0, 0);
    return out;
  }
  // Work on the symmetrized copy so tiny asymmetries cannot leak through.
  Matrix z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = 0.5 * (s(i, j) + s(j, i));

  std::vector<double> e(n, 0.0);
  tridiagonalize(z, out.values, e);
  ql_implicit(out.values, e, z);
  sort_ascending(out.values, z);
  out.vectors = std::move(z);
  return out;
}

Matrix solve_sylvester_factored(const SymEig& ea, const SymEig& eb, const Matrix& c) {
  const int d = static_cast<int>(ea.values.size());
  const int k = static_cast<int>(eb.values.size());
  if (c.rows() != d || c.cols() != k)
    throw InvalidInputError("solve_sylvester: right-hand side has wrong shape");
  // Eigenvalues are sorted, so the smallest pair sum decides solvability.
  const double min_sum = (d > 0 && k > 0) ? ea.values[0] + eb.values[0] : 0.0;
  if (d == 0 || k == 0) return Matrix(d, k);
  if (min_sum <= 1e-12)
    throw NumericError("solve_sylvester: singular system (smallest eigenvalue pair sum <= 1e-12)");

  Matrix t = multiply(transpose(ea.vectors), multiply(c, eb.vectors));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < k; ++j) t(i, j) /= ea.values[i] + eb.values[j];
  return multiply(ea.vectors, multiply(t, transpose(eb.vectors)));
}

Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
  return solve_sylvester_factored(sym_eig(a), sym_eig(b), c);
}

double frobenius_distance(const Matrix& x, const Matrix& y) {
  if (!x.same_shape(y)) throw InvalidInputError("frobenius_distance: shape mismatch");
  double s = 0.0;
  const auto& xd = x.data();
  const auto& yd = y.data();
  for (std::size_t i = 0; i < xd.size(); ++i) {
    const double diff = xd[i] - yd[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace dipl
