#pragma once

#include <vector>

#include "dipl/matrix.hpp"

namespace dipl {

/// Eigendecomposition of a symmetric matrix: S = vectors * diag(values) * vectors^T,
/// eigenvalues ascending, eigenvectors in the corresponding columns.
struct SymEig {
  std::vector<double> values;
  Matrix vectors;
};

/// Householder tridiagonalization followed by implicit-shift QL.
/// Requires a square input symmetric to within 1e-10 relative asymmetry.
/// Reconstruction and orthogonality residuals are well below 1e-10.
SymEig sym_eig(const Matrix& s);

/// Solves A X + X B = C for symmetric positive-definite A (d x d) and
/// symmetric positive-semidefinite B (k x k) through their eigendecompositions:
/// X = Qa * ((Qa^T C Qb) ./ (lam_a_i + lam_b_j)) * Qb^T.
/// Throws NumericError when min(lam_a_i + lam_b_j) <= 1e-12.
Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);

/// Same solve with the factorizations held by the caller; used where one side
/// stays fixed across many right-hand sides.
Matrix solve_sylvester_factored(const SymEig& ea, const SymEig& eb, const Matrix& c);

/// ||X - Y||_F for equal-shape matrices.
double frobenius_distance(const Matrix& x, const Matrix& y);

}  // namespace dipl
