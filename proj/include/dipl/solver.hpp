#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dipl/dataset.hpp"
#include "dipl/matrix.hpp"
#include "dipl/numlin.hpp"

namespace dipl {

// Per-sample candidate label sets over the pool's prototype table. An empty
// outer vector (or null pointer) means unrestricted; each inner set must be
// nonempty, sorted, and in range.
using Candidates = std::vector<std::vector<int>>;

/// Support of the row-minimum subgradient: the candidate labels whose loss
/// attains the (tolerance-relaxed) row minimum, each carrying weight 1/n.
struct MinimizerSet {
  std::vector<int> support;
  int n() const { return static_cast<int>(support.size()); }
  double weight() const { return 1.0 / static_cast<double>(support.size()); }
};

/// The linearized stationarity system: feature_gram * W + W * semantic_gram =
/// cross. feature_gram is symmetric positive-definite (ridge included),
/// semantic_gram symmetric positive-semidefinite.
struct SurrogateSystem {
  Matrix feature_gram;   // d x d
  Matrix semantic_gram;  // k x k
  Matrix cross;          // d x k
};

struct FitResult {
  Matrix projection;  // d x k
  FitTrace trace;
};

/// Observer hook called once per completed iteration with the record just
/// appended and the updated projection.
using IterationObserver = std::function<void(const IterationRecord&, const Matrix&)>;

/// Projection loss for one (feature, prototype) pair.
/// bidirectional: ||W^T x - y||^2 + ||x - W y||^2; the single-direction modes
/// keep the corresponding term only.
double projection_loss(const Matrix& w, const double* x, const double* y, LossMode mode);
double projection_loss(const Matrix& w, const std::vector<double>& x,
                       const std::vector<double>& y, LossMode mode);

/// n_unseen x q loss table under w; non-candidate entries hold +infinity so
/// restricted and unrestricted paths share the argmin/subgradient code.
Matrix loss_matrix(const Matrix& w, const UnseenView& pool, LossMode mode,
                   const Candidates* candidates = nullptr);

/// Equal weights over all entries within tie_tol of the row minimum.
MinimizerSet min_subgradient(const double* row, int q, double tie_tol);
MinimizerSet min_subgradient(const std::vector<double>& row, double tie_tol);

/// Assembles the Sylvester system of the linearized objective at mixing weight
/// alpha_t. Pool may be empty (or alpha_t == 0), in which case the pool terms
/// vanish exactly.
SurrogateSystem assemble_system(const SeenSet& seen, const UnseenView& pool,
                                const std::vector<MinimizerSet>& minimizers, double alpha_t,
                                double beta, LossMode mode);

/// Normalized objective: (1-alpha_t) * seen losses + alpha_t * sum of row
/// minima + beta * ||W||_F^2.
double objective(const Matrix& w, const SeenSet& seen, const UnseenView& pool, double alpha_t,
                 double beta, LossMode mode, const Candidates* candidates = nullptr);

/// Closed-form fit on the seen set alone (alpha_t = 0).
Matrix fit_inductive(const SeenSet& seen, double beta, LossMode mode);

/// The iterative transductive fit: initialize from the inductive solution,
/// then alternate subgradient weights and Sylvester solves with
/// alpha_t = decay^t * alpha until the pool argmin assignments stop moving and
/// the relative projection change falls under w_tol, or max_iters runs out.
/// With hp.transductive == false this reduces to fit_inductive and a
/// single-record trace.
FitResult fit(const SeenSet& seen, const UnseenView& pool, const Hyperparams& hp,
              const Candidates* candidates = nullptr, const IterationObserver& observer = {});
FitResult fit(const SeenSet& seen, const UnseenPool& pool, const Hyperparams& hp,
              const Candidates* candidates = nullptr, const IterationObserver& observer = {});

/// Argmin-loss label for one sample over the candidate prototypes; ties break
/// toward the smaller index.
int predict(const Matrix& w, const double* x, const Matrix& prototypes, LossMode mode,
            const std::vector<int>* candidates = nullptr);

/// All candidate labels ordered by increasing loss (ties by index).
std::vector<int> rank_labels(const Matrix& w, const double* x, const Matrix& prototypes,
                             LossMode mode, const std::vector<int>* candidates = nullptr);

/// Row-wise predict over a feature matrix.
std::vector<int> predict_all(const Matrix& w, const Matrix& features, const Matrix& prototypes,
                             LossMode mode, const Candidates* candidates = nullptr);

}  // namespace dipl
