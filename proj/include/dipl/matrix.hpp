#pragma once

#include <cstddef>
#include <vector>

namespace dipl {

/// Dense row-major matrix of 64-bit floats. The one numeric carrier used
/// everywhere: feature rows, prototype tables, projection matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);  // zero-initialized
  Matrix(int rows, int cols, std::vector<double> data);

  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  double* row(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }
  const double* row(int i) const { return data_.data() + static_cast<std::size_t>(i) * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;

  void add_scaled(const Matrix& other, double factor);  // this += factor * other
  void scale(double factor);

  bool operator==(const Matrix& other) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Matrix transpose(const Matrix& a);
Matrix multiply(const Matrix& a, const Matrix& b);
std::vector<double> multiply(const Matrix& a, const std::vector<double>& x);             // A x
std::vector<double> multiply_transposed(const Matrix& a, const std::vector<double>& x); // A^T x

Matrix vstack(const Matrix& top, const Matrix& bottom);
Matrix take_rows(const Matrix& a, const std::vector<int>& rows);

double frobenius_norm(const Matrix& a);

double dot(const double* a, const double* b, int n);
double squared_distance(const double* a, const double* b, int n);

}  // namespace dipl
