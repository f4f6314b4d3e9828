#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dipl/matrix.hpp"

namespace dipl {

enum class LossMode { bidirectional, reverse_only, forward_only };
enum class MetricMode { per_sample, per_class };

std::string to_string(LossMode mode);
std::string to_string(MetricMode mode);
LossMode loss_mode_from_string(const std::string& s);
MetricMode metric_mode_from_string(const std::string& s);

/// Labeled training side: one feature row per sample, labels indexing the
/// prototype table (0-based), one prototype row per class.
struct SeenSet {
  Matrix features;          // n_seen x d
  std::vector<int> labels;  // length n_seen, values in [0, p)
  Matrix prototypes;        // p x k
};

/// What fitting is allowed to see of the test pool: features and candidate
/// prototypes only. Truth labels stay behind in UnseenPool.
struct UnseenView {
  const Matrix* features = nullptr;    // n_unseen x d
  const Matrix* prototypes = nullptr;  // q x k
  int count() const { return features ? features->rows() : 0; }
  int classes() const { return prototypes ? prototypes->rows() : 0; }
};

/// Unlabeled test pool. truth_labels exist for evaluation only; fitting code
/// receives fit_view(), which cannot reach them.
struct UnseenPool {
  Matrix features;
  Matrix prototypes;
  std::optional<std::vector<int>> truth_labels;

  UnseenView fit_view() const { return UnseenView{&features, &prototypes}; }
};

struct DimSummary {
  int d = 0;
  int k = 0;
  int p = 0;
  int q = 0;
  int n_seen = 0;
  int n_unseen = 0;
};

/// Cross-checks both sides and returns the shared dimensions. Throws
/// InvalidInputError on mismatched feature/semantic dimensions, empty
/// prototype tables, or out-of-range labels.
DimSummary validate(const SeenSet& seen, const UnseenView& pool);
DimSummary validate(const SeenSet& seen, const UnseenPool& pool);
void validate_seen(const SeenSet& seen);

/// Solver knobs. alpha and beta are the user-facing pair; the unnormalized
/// regularization weights of the raw objective are derived from them via
/// gamma_weight / lambda_weight below.
struct Hyperparams {
  double alpha = 0.5;      // transductive weight, in (0,1) when transductive
  double beta = 0.01;      // ridge weight
  double decay = 0.99;     // per-iteration decay of alpha_t
  int max_iters = 50;
  double w_tol = 1e-6;     // relative ||dW||_F stopping threshold
  double tie_tol = 1e-12;  // relative tolerance for row-minimum ties
  LossMode mode = LossMode::bidirectional;
  bool transductive = true;
  int candidate_top_m = 5;
  std::optional<int> superclass_r;
  MetricMode metric_mode = MetricMode::per_sample;
  std::uint64_t seed = 0;
};

// gamma = alpha_t / (1 - alpha_t) and lambda = beta * (1 + gamma): the weights
// of the unnormalized objective. The solver works with the normalized form
// throughout, so these exist for documentation and diagnostics.
double gamma_weight(double alpha_t);
double lambda_weight(double beta, double alpha_t);

enum class Termination { assignments_stable, w_converged, max_iters };
std::string to_string(Termination t);

struct IterationRecord {
  int t = 0;
  double alpha_t = 0.0;
  double objective = 0.0;     // normalized objective at the updated projection
  int assignment_changes = 0; // pool samples whose argmin label moved
  double w_delta = 0.0;       // ||W_next - W||_F
};

struct FitTrace {
  std::vector<IterationRecord> iterations;
  Termination termination = Termination::max_iters;
};

}  // namespace dipl
