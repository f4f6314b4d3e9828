#include "dipl/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "dipl/errors.hpp"
#include "dipl/rng.hpp"
#include "dipl/solver.hpp"
#include "dipl/superclass.hpp"

namespace dipl {

double multiway_accuracy(const std::vector<int>& preds, const std::vector<int>& truth,
                         MetricMode mode) {
  if (preds.size() != truth.size())
    throw InvalidInputError("multiway_accuracy: prediction/truth length mismatch");
  if (preds.empty()) throw InvalidInputError("multiway_accuracy: empty input");
  if (mode == MetricMode::per_sample) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(preds.size());
  }
  std::map<int, std::pair<std::size_t, std::size_t>> per_class;  // label -> (hits, count)
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto& [hits, count] = per_class[truth[i]];
    hits += preds[i] == truth[i];
    count += 1;
  }
  double sum = 0.0;
  for (const auto& [label, hc] : per_class)
    sum += static_cast<double>(hc.first) / static_cast<double>(hc.second);
  return sum / static_cast<double>(per_class.size());
}

double topk_accuracy(const std::vector<std::vector<int>>& ranked, const std::vector<int>& truth,
                     int k) {
  if (ranked.size() != truth.size())
    throw InvalidInputError("topk_accuracy: prediction/truth length mismatch");
  if (ranked.empty()) throw InvalidInputError("topk_accuracy: empty input");
  if (k < 1) throw InvalidInputError("topk_accuracy: k must be >= 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (static_cast<int>(ranked[i].size()) < k)
      throw InvalidInputError("topk_accuracy: ranked list shorter than k at sample " +
                              std::to_string(i));
    for (int m = 0; m < k; ++m)
      if (ranked[i][m] == truth[i]) {
        ++hits;
        break;
      }
  }
  return static_cast<double>(hits) / static_cast<double>(ranked.size());
}

GzslReport generalized_metrics(const std::vector<int>& preds, const std::vector<int>& truth,
                               const std::vector<std::uint8_t>& seen_mask, MetricMode mode) {
  if (preds.size() != truth.size() || preds.size() != seen_mask.size())
    throw InvalidInputError("generalized_metrics: length mismatch");
  std::vector<int> preds_s, truth_s, preds_u, truth_u;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (seen_mask[i]) {
      preds_s.push_back(preds[i]);
      truth_s.push_back(truth[i]);
    } else {
      preds_u.push_back(preds[i]);
      truth_u.push_back(truth[i]);
    }
  }
  GzslReport report;
  if (!preds_s.empty()) report.acc_seen = multiway_accuracy(preds_s, truth_s, mode);
  if (!preds_u.empty()) report.acc_unseen = multiway_accuracy(preds_u, truth_u, mode);
  if (report.acc_seen && report.acc_unseen) {
    const double sum = *report.acc_seen + *report.acc_unseen;
    report.harmonic_mean = sum > 0.0 ? 2.0 * (*report.acc_seen) * (*report.acc_unseen) / sum : 0.0;
  }
  return report;
}

namespace {

struct FoldData {
  SeenSet train;
  UnseenPool pool;  // truth_labels set, used for scoring only
};

FoldData make_fold(const SeenSet& seen, const std::vector<int>& held_out_classes) {
  const int p = seen.prototypes.rows();
  std::vector<std::uint8_t> held(p, 0);
  for (int c : held_out_classes) held[c] = 1;

  std::vector<int> train_classes;
  for (int c = 0; c < p; ++c)
    if (!held[c]) train_classes.push_back(c);

  std::vector<int> to_train(p, -1), to_fold(p, -1);
  for (std::size_t i = 0; i < train_classes.size(); ++i) to_train[train_classes[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < held_out_classes.size(); ++i)
    to_fold[held_out_classes[i]] = static_cast<int>(i);

  std::vector<int> train_rows, fold_rows;
  for (int i = 0; i < seen.features.rows(); ++i) {
    if (held[seen.labels[i]])
      fold_rows.push_back(i);
    else
      train_rows.push_back(i);
  }

  FoldData fold;
  fold.train.features = take_rows(seen.features, train_rows);
  fold.train.prototypes = take_rows(seen.prototypes, train_classes);
  fold.train.labels.reserve(train_rows.size());
  for (int i : train_rows) fold.train.labels.push_back(to_train[seen.labels[i]]);

  fold.pool.features = take_rows(seen.features, fold_rows);
  fold.pool.prototypes = take_rows(seen.prototypes, held_out_classes);
  std::vector<int> truth;
  truth.reserve(fold_rows.size());
  for (int i : fold_rows) truth.push_back(to_fold[seen.labels[i]]);
  fold.pool.truth_labels = std::move(truth);
  return fold;
}

}  // namespace

CvResult cross_validate(const SeenSet& seen, const std::vector<Hyperparams>& grid, int folds,
                        std::uint64_t seed, MetricMode mode) {
  validate_seen(seen);
  if (grid.empty()) throw InvalidInputError("cross_validate: empty hyperparameter grid");
  const int p = seen.prototypes.rows();
  if (folds < 2) throw InvalidInputError("cross_validate: folds must be >= 2");
  if (folds > p) throw InvalidInputError("cross_validate: more folds than seen classes");

  // Shuffled classes split into near-equal contiguous groups.
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = p - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(i + 1)]);

  CvResult res;
  res.fold_classes.resize(folds);
  for (int f = 0; f < folds; ++f) {
    const int begin = static_cast<int>(static_cast<std::int64_t>(f) * p / folds);
    const int end = static_cast<int>(static_cast<std::int64_t>(f + 1) * p / folds);
    res.fold_classes[f].assign(order.begin() + begin, order.begin() + end);
    std::sort(res.fold_classes[f].begin(), res.fold_classes[f].end());
  }

  res.mean_accuracy.assign(grid.size(), 0.0);
  for (int f = 0; f < folds; ++f) {
    const FoldData fold = make_fold(seen, res.fold_classes[f]);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      Hyperparams hp = grid[g];
      hp.seed = Rng::derive_seed(seed, static_cast<std::uint64_t>(f));
      if (hp.alpha == 0.0) hp.transductive = false;
      std::vector<int> preds;
      if (hp.superclass_r) {
        const SuperclassFitResult fitres = fit_with_superclasses(fold.train, fold.pool, hp);
        preds = predict_all(fitres.projection, fold.pool.features, fold.pool.prototypes, hp.mode,
                            &fitres.candidates.sets);
      } else {
        const FitResult fitres = fit(fold.train, fold.pool, hp);
        preds = predict_all(fitres.projection, fold.pool.features, fold.pool.prototypes, hp.mode);
      }
      const double acc = multiway_accuracy(preds, *fold.pool.truth_labels, mode);
      res.table.push_back(CvCell{static_cast<int>(g), f, acc});
      res.mean_accuracy[g] += acc;
    }
  }
  for (double& acc : res.mean_accuracy) acc /= static_cast<double>(folds);

  auto tie_key = [&](std::size_t g) {
    const Hyperparams& hp = grid[g];
    return std::make_pair(hp.alpha, hp.superclass_r ? *hp.superclass_r : -1);
  };
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (res.mean_accuracy[g] > res.mean_accuracy[best] ||
        (res.mean_accuracy[g] == res.mean_accuracy[best] && tie_key(g) < tie_key(best)))
      best = g;
  }
  res.best_index = static_cast<int>(best);
  res.best = grid[best];
  return res;
}

}  // namespace dipl
