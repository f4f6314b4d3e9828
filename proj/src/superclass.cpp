#include "dipl/superclass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dipl/errors.hpp"
#include "dipl/parallel.hpp"
#include "dipl/rng.hpp"

namespace dipl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> plus_plus_seeding(const Matrix& points, int r, Rng& rng) {
  const int n = points.rows();
  const int k = points.cols();
  std::vector<int> centers;
  centers.reserve(r);
  centers.push_back(rng.uniform_int(n));
  std::vector<double> dist2(n, kInf);
  while (static_cast<int>(centers.size()) < r) {
    const double* last = points.row(centers.back());
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      dist2[i] = std::min(dist2[i], squared_distance(points.row(i), last, k));
      total += dist2[i];
    }
    int pick;
    if (total <= 0.0) {
      pick = rng.uniform_int(n);  // all remaining points coincide with a center
    } else {
      const double threshold = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += dist2[i];
        if (acc >= threshold) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(pick);
  }
  return centers;
}

void update_centers(const Matrix& points, const std::vector<int>& assignment, Matrix& centers,
                    std::vector<int>& sizes) {
  const int r = centers.rows();
  const int k = centers.cols();
  std::fill(centers.data().begin(), centers.data().end(), 0.0);
  std::fill(sizes.begin(), sizes.end(), 0);
  for (int i = 0; i < points.rows(); ++i) {
    const int c = assignment[i];
    sizes[c] += 1;
    const double* x = points.row(i);
    double* center = centers.row(c);
    for (int j = 0; j < k; ++j) center[j] += x[j];
  }
  for (int c = 0; c < r; ++c) {
    if (sizes[c] == 0) continue;
    const double inv = 1.0 / static_cast<double>(sizes[c]);
    double* center = centers.row(c);
    for (int j = 0; j < k; ++j) center[j] *= inv;
  }
}

}  // namespace

KmeansResult kmeans(const Matrix& points, int r, std::uint64_t seed) {
  const int n = points.rows();
  const int k = points.cols();
  if (r <= 0) throw InvalidInputError("kmeans: cluster count must be positive");
  if (r > n) throw InvalidInputError("kmeans: more clusters than points");

  Rng rng(seed);
  const std::vector<int> seed_rows = plus_plus_seeding(points, r, rng);

  KmeansResult res;
  res.centers = take_rows(points, seed_rows);
  res.assignment.assign(n, 0);
  std::vector<int> sizes(r, 0);
  std::vector<int> prev(n, -1);

  constexpr int kMaxIters = 300;
  for (int iter = 0; iter < kMaxIters; ++iter) {
    // Assignment step; ties break toward the smaller cluster index.
    parallel_chunks(static_cast<std::size_t>(n), [&](std::size_t, std::size_t begin,
                                                     std::size_t end) {
      for (std::size_t ii = begin; ii < end; ++ii) {
        const int i = static_cast<int>(ii);
        const double* x = points.row(i);
        int best = 0;
        double best_d = squared_distance(x, res.centers.row(0), k);
        for (int c = 1; c < r; ++c) {
          const double d2 = squared_distance(x, res.centers.row(c), k);
          if (d2 < best_d) {
            best_d = d2;
            best = c;
          }
        }
        res.assignment[ii] = best;
      }
    });

    // Repair empty clusters with the farthest member of the largest cluster.
    std::fill(sizes.begin(), sizes.end(), 0);
    for (int i = 0; i < n; ++i) sizes[res.assignment[i]] += 1;
    for (int c = 0; c < r; ++c) {
      if (sizes[c] != 0) continue;
      int donor = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
      int moved = -1;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        if (res.assignment[i] != donor) continue;
        const double d2 = squared_distance(points.row(i), res.centers.row(donor), k);
        if (d2 > far_d) {
          far_d = d2;
          moved = i;
        }
      }
      res.assignment[moved] = c;
      sizes[donor] -= 1;
      sizes[c] += 1;
      std::copy(points.row(moved), points.row(moved) + k, res.centers.row(c));
    }

    const bool stable = std::equal(prev.begin(), prev.end(), res.assignment.begin());
    if (stable) break;
    prev = res.assignment;

    update_centers(points, res.assignment, res.centers, sizes);
    res.inertia = chunked_reduce<double>(
        static_cast<std::size_t>(n), [] { return 0.0; },
        [&](double& partial, std::size_t begin, std::size_t end) {
          for (std::size_t i = begin; i < end; ++i)
            partial += squared_distance(points.row(static_cast<int>(i)),
                                        res.centers.row(res.assignment[i]), k);
        },
        [](double& total, double partial) { total += partial; });
    res.inertia_history.push_back(res.inertia);
    res.iterations = iter + 1;
  }
  return res;
}

CandidateSets build_candidate_sets(const Matrix& w_super, const UnseenView& pool,
                                   const SuperclassModel& model, int top_m, LossMode mode) {
  if (top_m < 1) throw InvalidInputError("top_m must be >= 1");
  if (!pool.features || !pool.prototypes)
    throw InvalidInputError("build_candidate_sets: pool view is empty");
  const int n = pool.features->rows();
  const int q = pool.prototypes->rows();
  const int r = model.r;
  const int p = static_cast<int>(model.class_to_cluster.size()) - q;
  if (p < 0) throw InvalidInputError("superclass model does not cover the pool classes");
  const int keep = std::min(top_m, r);

  // Pool classes grouped by their cluster.
  std::vector<std::vector<int>> cluster_members(r);
  for (int j = 0; j < q; ++j) cluster_members[model.class_to_cluster[p + j]].push_back(j);

  UnseenView center_view{pool.features, &model.centers};
  const Matrix cluster_losses = loss_matrix(w_super, center_view, mode);

  CandidateSets out;
  out.sets.assign(n, {});
  out.fallback.assign(n, 0);
  parallel_chunks(static_cast<std::size_t>(n), [&](std::size_t, std::size_t begin,
                                                   std::size_t end) {
    std::vector<int> order(r);
    for (std::size_t ii = begin; ii < end; ++ii) {
      const int i = static_cast<int>(ii);
      const double* row = cluster_losses.row(i);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (row[a] != row[b]) return row[a] < row[b];
        return a < b;
      });
      std::vector<int>& set = out.sets[ii];
      for (int m = 0; m < keep; ++m)
        for (int j : cluster_members[order[m]]) set.push_back(j);
      if (set.empty()) {
        set.resize(q);
        std::iota(set.begin(), set.end(), 0);
        out.fallback[ii] = 1;
      } else {
        std::sort(set.begin(), set.end());
      }
    }
  });
  return out;
}

SuperclassFitResult fit_with_superclasses(const SeenSet& seen, const UnseenView& pool,
                                          const Hyperparams& hp) {
  const DimSummary dims = validate(seen, pool);
  if (!hp.superclass_r)
    throw InvalidInputError("fit_with_superclasses: superclass_r is not set");
  const int r = *hp.superclass_r;

  // 1. Cluster the stacked prototype table.
  const Matrix stacked = vstack(seen.prototypes, *pool.prototypes);
  const KmeansResult km = kmeans(stacked, r, hp.seed);

  SuperclassFitResult res;
  res.model.centers = km.centers;
  res.model.class_to_cluster = km.assignment;
  res.model.r = r;
  res.model.inertia = km.inertia;

  // 2. Coarse fit with every prototype replaced by its cluster center.
  SeenSet coarse_seen;
  coarse_seen.features = seen.features;
  coarse_seen.prototypes = km.centers;
  coarse_seen.labels.resize(seen.labels.size());
  for (std::size_t i = 0; i < seen.labels.size(); ++i)
    coarse_seen.labels[i] = km.assignment[seen.labels[i]];
  UnseenView coarse_pool{pool.features, &km.centers};
  Hyperparams coarse_hp = hp;
  coarse_hp.superclass_r.reset();
  const FitResult coarse = fit(coarse_seen, coarse_pool, coarse_hp);
  res.super_trace = coarse.trace;

  // 3. Candidate sets from the coarse projection's cluster ranking.
  res.candidates =
      build_candidate_sets(coarse.projection, pool, res.model, hp.candidate_top_m, hp.mode);

  // 4. Constrained fine fit over the original prototypes.
  (void)dims;
  const FitResult fine = fit(seen, pool, hp, &res.candidates.sets);
  res.projection = fine.projection;
  res.trace = fine.trace;
  return res;
}

SuperclassFitResult fit_with_superclasses(const SeenSet& seen, const UnseenPool& pool,
                                          const Hyperparams& hp) {
  return fit_with_superclasses(seen, pool.fit_view(), hp);
}

}  // namespace dipl
