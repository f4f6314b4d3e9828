#include <doctest.h>

#include "dipl/errors.hpp"
#include "dipl/metrics.hpp"
#include "dipl/synth.hpp"

using namespace dipl;

TEST_SUITE("metrics") {

TEST_CASE("multiway accuracy basics") {
  CHECK(multiway_accuracy({1, 2, 3}, {1, 2, 3}, MetricMode::per_sample) == 1.0);
  CHECK(multiway_accuracy({1, 2, 3}, {0, 0, 0}, MetricMode::per_sample) == 0.0);
  // truth [0,0,0,1], preds [0,0,0,0]: per-sample 3/4, per-class (1 + 0)/2
  CHECK(multiway_accuracy({0, 0, 0, 0}, {0, 0, 0, 1}, MetricMode::per_sample) ==
        doctest::Approx(0.75));
  CHECK(multiway_accuracy({0, 0, 0, 0}, {0, 0, 0, 1}, MetricMode::per_class) ==
        doctest::Approx(0.5));
  CHECK_THROWS_AS(multiway_accuracy({0}, {0, 1}, MetricMode::per_sample), InvalidInputError);
  CHECK_THROWS_AS(multiway_accuracy({}, {}, MetricMode::per_sample), InvalidInputError);
}

TEST_CASE("per-sample equals per-class on balanced classes") {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2};
  const std::vector<int> preds{0, 1, 1, 1, 2, 0};
  CHECK(multiway_accuracy(preds, truth, MetricMode::per_sample) ==
        doctest::Approx(multiway_accuracy(preds, truth, MetricMode::per_class)));
}

TEST_CASE("top-k accuracy") {
  const std::vector<std::vector<int>> ranked{{3, 1, 2}, {0, 3, 1}, {2, 0, 3}};
  const std::vector<int> truth{3, 1, 1};
  // Hand count: k=1 hits sample 0 only; k=2 the same; k=3 adds sample 1.
  CHECK(topk_accuracy(ranked, truth, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(topk_accuracy(ranked, truth, 2) == doctest::Approx(1.0 / 3.0));
  CHECK(topk_accuracy(ranked, truth, 3) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(topk_accuracy(ranked, truth, 4), InvalidInputError);
}

TEST_CASE("top-k accuracy is non-decreasing in k") {
  const std::vector<std::vector<int>> ranked{
      {0, 1, 2, 3, 4}, {4, 3, 2, 1, 0}, {2, 0, 1, 4, 3}, {1, 2, 0, 3, 4}};
  const std::vector<int> truth{2, 2, 2, 2};
  double prev = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const double acc = topk_accuracy(ranked, truth, k);
    CHECK(acc >= prev);
    prev = acc;
  }
}

TEST_CASE("generalized metrics harmonic mean matches the published row") {
  // acc_s=0.837, acc_u=0.689 -> hm ~ 0.756
  std::vector<int> preds, truth;
  std::vector<std::uint8_t> mask;
  // 1000 seen samples at 83.7% and 1000 unseen samples at 68.9%.
  for (int i = 0; i < 1000; ++i) {
    truth.push_back(0);
    preds.push_back(i < 837 ? 0 : 1);
    mask.push_back(1);
  }
  for (int i = 0; i < 1000; ++i) {
    truth.push_back(2);
    preds.push_back(i < 689 ? 2 : 0);
    mask.push_back(0);
  }
  const GzslReport report = generalized_metrics(preds, truth, mask, MetricMode::per_sample);
  CHECK(*report.acc_seen == doctest::Approx(0.837));
  CHECK(*report.acc_unseen == doctest::Approx(0.689));
  CHECK(report.harmonic_mean == doctest::Approx(0.756).epsilon(5e-4));
}

TEST_CASE("generalized metrics edge cases") {
  {
    const GzslReport report =
        generalized_metrics({0, 1}, {0, 1}, {1, 0}, MetricMode::per_sample);
    CHECK(report.harmonic_mean == doctest::Approx(1.0));
  }
  {
    // equal accuracies: hm equals them
    const GzslReport report =
        generalized_metrics({0, 9, 1, 9}, {0, 1, 1, 0}, {1, 1, 0, 0}, MetricMode::per_sample);
    CHECK(*report.acc_seen == doctest::Approx(0.5));
    CHECK(*report.acc_unseen == doctest::Approx(0.5));
    CHECK(report.harmonic_mean == doctest::Approx(0.5));
  }
  {
    // zero unseen accuracy forces hm = 0
    const GzslReport report =
        generalized_metrics({0, 9}, {0, 1}, {1, 0}, MetricMode::per_sample);
    CHECK(report.harmonic_mean == 0.0);
  }
  {
    // one side empty: absent accuracy, hm = 0
    const GzslReport report = generalized_metrics({0}, {0}, {1}, MetricMode::per_sample);
    CHECK(report.acc_seen.has_value());
    CHECK(!report.acc_unseen.has_value());
    CHECK(report.harmonic_mean == 0.0);
  }
}

TEST_CASE("cross-validation with a single grid point returns it") {
  const SynthSpec spec{.p = 6, .q = 2, .samples_per_class = 6, .seed = 3};
  const SynthData data = generate(spec);
  Hyperparams hp;
  hp.alpha = 0.3;
  const CvResult res = cross_validate(data.seen, {hp}, 3, 5, MetricMode::per_sample);
  CHECK(res.best_index == 0);
  CHECK(res.best.alpha == 0.3);
  CHECK(res.table.size() == 3);
  CHECK(res.fold_classes.size() == 3);
}

TEST_CASE("cross-validation prefers the better grid point") {
  // Clean, well-separated data: a sensible alpha must beat a degenerate
  // near-1 alpha that swamps the fold's supervision.
  SynthSpec spec;
  spec.p = 8;
  spec.q = 2;
  spec.samples_per_class = 8;
  spec.noise_sigma = 0.3;
  spec.seed = 11;
  const SynthData data = generate(spec);
  Hyperparams good;
  good.alpha = 0.3;
  good.max_iters = 15;
  Hyperparams bad;
  bad.alpha = 0.999;
  bad.max_iters = 15;
  const CvResult res =
      cross_validate(data.seen, {bad, good}, 4, 7, MetricMode::per_sample);
  CHECK(res.mean_accuracy[1] >= res.mean_accuracy[0]);
  if (res.mean_accuracy[1] > res.mean_accuracy[0]) CHECK(res.best_index == 1);
}

TEST_CASE("cross-validation tie-break prefers smaller alpha then smaller r") {
  // On perfectly separable data both points reach accuracy 1.0.
  const SynthSpec spec{.p = 6, .q = 2, .samples_per_class = 6, .seed = 13};
  const SynthData data = generate(spec);
  Hyperparams small_alpha;
  small_alpha.alpha = 0.2;
  small_alpha.max_iters = 10;
  Hyperparams large_alpha;
  large_alpha.alpha = 0.6;
  large_alpha.max_iters = 10;
  const CvResult res =
      cross_validate(data.seen, {large_alpha, small_alpha}, 3, 17, MetricMode::per_sample);
  if (res.mean_accuracy[0] == res.mean_accuracy[1]) CHECK(res.best.alpha == 0.2);
}

TEST_CASE("cross-validation rejects bad inputs") {
  const SynthSpec spec{.p = 4, .q = 2, .samples_per_class = 4, .seed = 19};
  const SynthData data = generate(spec);
  Hyperparams hp;
  CHECK_THROWS_AS(cross_validate(data.seen, {}, 2, 1, MetricMode::per_sample),
                  InvalidInputError);
  CHECK_THROWS_AS(cross_validate(data.seen, {hp}, 5, 1, MetricMode::per_sample),
                  InvalidInputError);
  CHECK_THROWS_AS(cross_validate(data.seen, {hp}, 1, 1, MetricMode::per_sample),
                  InvalidInputError);
}

}  // TEST_SUITE
