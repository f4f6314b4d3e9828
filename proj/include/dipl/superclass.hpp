#pragma once

#include <cstdint>
#include <vector>

#include "dipl/dataset.hpp"
#include "dipl/matrix.hpp"
#include "dipl/solver.hpp"

namespace dipl {

struct KmeansResult {
  Matrix centers;               // r x k
  std::vector<int> assignment;  // length n, values in [0, r)
  double inertia = 0.0;
  std::vector<double> inertia_history;  // one entry per Lloyd iteration
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Deterministic given the seed;
/// stops at an assignment fixpoint or after 300 iterations. Empty clusters
/// are repaired by moving the farthest point out of the largest cluster.
KmeansResult kmeans(const Matrix& points, int r, std::uint64_t seed);

/// Clustering of all class prototypes, seen rows first, then pool rows.
struct SuperclassModel {
  Matrix centers;                    // r x k
  std::vector<int> class_to_cluster; // length p + q
  int r = 0;
  double inertia = 0.0;
};

/// Per-sample candidate label sets plus a flag for samples that fell back to
/// the full label set because their top clusters held no pool classes.
struct CandidateSets {
  Candidates sets;
  std::vector<std::uint8_t> fallback;
  int fallback_count() const {
    int c = 0;
    for (auto f : fallback) c += f != 0;
    return c;
  }
};

/// Ranks clusters per sample by projection loss against the cluster centers
/// under w_super and keeps pool classes belonging to the best top_m clusters.
CandidateSets build_candidate_sets(const Matrix& w_super, const UnseenView& pool,
                                   const SuperclassModel& model, int top_m, LossMode mode);

struct SuperclassFitResult {
  Matrix projection;
  FitTrace trace;
  SuperclassModel model;
  CandidateSets candidates;
  FitTrace super_trace;  // trace of the coarse fit over cluster centers
};

/// The four-step coarse-to-fine fit: cluster stacked prototypes, fit over the
/// cluster centers, derive per-sample candidate sets from the coarse
/// projection, then refit over the original prototypes with the subgradient
/// restricted to each sample's candidates.
SuperclassFitResult fit_with_superclasses(const SeenSet& seen, const UnseenView& pool,
                                          const Hyperparams& hp);
SuperclassFitResult fit_with_superclasses(const SeenSet& seen, const UnseenPool& pool,
                                          const Hyperparams& hp);

}  // namespace dipl
