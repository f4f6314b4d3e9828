#pragma once

#include <cstdint>
#include <vector>

#include "dipl/dataset.hpp"
#include "dipl/matrix.hpp"

namespace dipl {

/// Controls for synthetic data with known ground truth: prototypes kept at
/// least prototype_separation apart, features generated through a random
/// column-orthonormal projection plus gaussian noise, and a fixed bias
/// direction added to pool features to emulate the train/test domain gap.
struct SynthSpec {
  int d = 16;
  int k = 8;
  int p = 6;
  int q = 4;
  int samples_per_class = 20;
  double noise_sigma = 0.05;
  double prototype_separation = 4.0;
  double domain_shift = 0.0;
  int grouped = 0;  // 0 = ungrouped; otherwise number of prototype super-groups
  std::uint64_t seed = 0;
};

struct SynthData {
  SeenSet seen;
  UnseenPool pool;    // truth_labels always set
  Matrix true_projection;  // the d x k generator matrix
  std::vector<int> class_group;  // length p + q; group id per class (grouped mode)
};

/// Deterministic given spec.seed. Throws NumericError when the separation
/// constraint cannot be met within the retry budget.
SynthData generate(const SynthSpec& spec);

struct OracleResult {
  double objective = 0.0;
  std::vector<int> assignment;
};

/// Exhaustive search over all q^n_unseen label assignments of the pool: each
/// assignment gets its closed-form solve and the best normalized objective is
/// returned. This is the global optimum of the transductive objective at the
/// given alpha. Requires q^n_unseen <= 10^6; ties resolve to the
/// lexicographically smallest assignment.
OracleResult enumerate_oracle(const SeenSet& seen, const UnseenView& pool, double alpha,
                              double beta);
OracleResult enumerate_oracle(const SeenSet& seen, const UnseenPool& pool, double alpha,
                              double beta);

}  // namespace dipl
