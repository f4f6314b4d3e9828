#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dipl/dataset.hpp"

namespace dipl {

/// Fraction of correct predictions; per_class averages the within-class
/// accuracies instead of the raw sample count.
double multiway_accuracy(const std::vector<int>& preds, const std::vector<int>& truth,
                         MetricMode mode);

/// Fraction of samples whose true label appears among the first k entries of
/// its ranked prediction list.
double topk_accuracy(const std::vector<std::vector<int>>& ranked, const std::vector<int>& truth,
                     int k);

struct GzslReport {
  std::optional<double> acc_seen;
  std::optional<double> acc_unseen;
  double harmonic_mean = 0.0;
};

/// Joint-label-space evaluation: seen-truth and unseen-truth samples scored
/// separately, harmonic mean of the two accuracies. A side with no samples is
/// reported absent and forces the harmonic mean to 0.
GzslReport generalized_metrics(const std::vector<int>& preds, const std::vector<int>& truth,
                               const std::vector<std::uint8_t>& seen_mask, MetricMode mode);

struct CvCell {
  int grid_index = 0;
  int fold = 0;
  double accuracy = 0.0;
};

struct CvResult {
  int best_index = 0;
  Hyperparams best;
  std::vector<double> mean_accuracy;  // one entry per grid point
  std::vector<CvCell> table;
  std::vector<std::vector<int>> fold_classes;  // classes held out per fold
};

/// Class-wise cross-validation: each fold's classes become pseudo-unseen with
/// their samples as the unlabeled pool, the fit runs on the remaining classes,
/// and grid points are ranked by mean pool accuracy. Ties prefer smaller
/// alpha, then smaller superclass count.
CvResult cross_validate(const SeenSet& seen, const std::vector<Hyperparams>& grid, int folds,
                        std::uint64_t seed, MetricMode mode);

}  // namespace dipl
