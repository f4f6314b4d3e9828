#include "dipl/matrix.hpp"

#include <cmath>

#include "dipl/errors.hpp"

namespace dipl {

Matrix::Matrix(int rows, int cols)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {
  if (rows < 0 || cols < 0) throw InvalidInputError("matrix dimensions must be non-negative");
}

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows < 0 || cols < 0) throw InvalidInputError("matrix dimensions must be non-negative");
  if (data_.size() != static_cast<std::size_t>(rows) * cols)
    throw InvalidInputError("matrix data length does not match rows*cols");
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Matrix::add_scaled(const Matrix& other, double factor) {
  if (!same_shape(other)) throw InvalidInputError("add_scaled: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += factor * other.data_[i];
}

void Matrix::scale(double factor) {
  for (double& v : data_) v *= factor;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InvalidInputError("multiply: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  const int n = a.rows(), m = b.cols(), inner = a.cols();
  for (int i = 0; i < n; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int k = 0; k < inner; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (int j = 0; j < m; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

std::vector<double> multiply(const Matrix& a, const std::vector<double>& x) {
  if (a.cols() != static_cast<int>(x.size()))
    throw InvalidInputError("multiply: vector length does not match columns");
  std::vector<double> y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x.data(), a.cols());
  return y;
}

std::vector<double> multiply_transposed(const Matrix& a, const std::vector<double>& x) {
  if (a.rows() != static_cast<int>(x.size()))
    throw InvalidInputError("multiply_transposed: vector length does not match rows");
  std::vector<double> y(a.cols(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* arow = a.row(i);
    for (int j = 0; j < a.cols(); ++j) y[j] += xi * arow[j];
  }
  return y;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.empty()) return bottom;
  if (bottom.empty()) return top;
  if (top.cols() != bottom.cols()) throw InvalidInputError("vstack: column counts differ");
  Matrix out(top.rows() + bottom.rows(), top.cols());
  std::copy(top.data().begin(), top.data().end(), out.data().begin());
  std::copy(bottom.data().begin(), bottom.data().end(),
            out.data().begin() + top.data().size());
  return out;
}

Matrix take_rows(const Matrix& a, const std::vector<int>& rows) {
  Matrix out(static_cast<int>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows()) throw InvalidInputError("take_rows: index out of range");
    std::copy(a.row(rows[i]), a.row(rows[i]) + a.cols(), out.row(static_cast<int>(i)));
  }
  return out;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

}  // namespace dipl
