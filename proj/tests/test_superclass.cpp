#include <doctest.h>

#include <cmath>

#include "dipl/errors.hpp"
#include "dipl/numlin.hpp"
#include "dipl/rng.hpp"
#include "dipl/superclass.hpp"
#include "dipl/synth.hpp"

using namespace dipl;

namespace {

Matrix random_points(Rng& rng, int n, int k, double scale) {
  Matrix m(n, k);
  for (double& v : m.data()) v = scale * rng.normal();
  return m;
}

}  // namespace

TEST_SUITE("superclass") {

TEST_CASE("kmeans with r equal to the point count pins every point") {
  Rng rng(3);
  const Matrix points = random_points(rng, 6, 3, 1.0);
  const KmeansResult res = kmeans(points, 6, 1);
  CHECK(res.inertia == doctest::Approx(0.0).epsilon(1e-15));
  std::vector<bool> used(6, false);
  for (int c : res.assignment) used[c] = true;
  for (bool u : used) CHECK(u);
}

TEST_CASE("kmeans r=1 returns the global mean") {
  Rng rng(5);
  const Matrix points = random_points(rng, 10, 2, 2.0);
  const KmeansResult res = kmeans(points, 1, 9);
  for (int j = 0; j < 2; ++j) {
    double mean = 0.0;
    for (int i = 0; i < 10; ++i) mean += points(i, j);
    mean /= 10.0;
    CHECK(res.centers(0, j) == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("kmeans recovers two well-separated blobs") {
  Rng rng(7);
  Matrix points(20, 2);
  for (int i = 0; i < 10; ++i) {
    points(i, 0) = 0.01 * rng.normal();
    points(i, 1) = 0.01 * rng.normal();
    points(10 + i, 0) = 10.0 + 0.01 * rng.normal();
    points(10 + i, 1) = 10.0 + 0.01 * rng.normal();
  }
  const KmeansResult res = kmeans(points, 2, 13);
  // One center near (0,0), the other near (10,10).
  const int near_origin = std::abs(res.centers(0, 0)) < 5.0 ? 0 : 1;
  CHECK(std::abs(res.centers(near_origin, 0)) < 0.1);
  CHECK(std::abs(res.centers(1 - near_origin, 0) - 10.0) < 0.1);
  for (int i = 0; i < 10; ++i) {
    CHECK(res.assignment[i] == near_origin);
    CHECK(res.assignment[10 + i] == 1 - near_origin);
  }
}

TEST_CASE("kmeans inertia history is non-increasing") {
  Rng rng(11);
  const Matrix points = random_points(rng, 60, 4, 3.0);
  const KmeansResult res = kmeans(points, 5, 17);
  for (std::size_t i = 1; i < res.inertia_history.size(); ++i)
    CHECK(res.inertia_history[i] <= res.inertia_history[i - 1] + 1e-9);
}

TEST_CASE("kmeans centers sit at member means on convergence") {
  Rng rng(13);
  const Matrix points = random_points(rng, 40, 3, 2.0);
  const KmeansResult res = kmeans(points, 4, 19);
  Matrix means(4, 3);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 40; ++i) {
    counts[res.assignment[i]] += 1;
    for (int j = 0; j < 3; ++j) means(res.assignment[i], j) += points(i, j);
  }
  for (int c = 0; c < 4; ++c)
    for (int j = 0; j < 3; ++j)
      CHECK(means(c, j) / counts[c] == doctest::Approx(res.centers(c, j)).epsilon(1e-9));
}

TEST_CASE("kmeans is deterministic and validates inputs") {
  Rng rng(17);
  const Matrix points = random_points(rng, 12, 3, 1.0);
  const KmeansResult a = kmeans(points, 3, 23);
  const KmeansResult b = kmeans(points, 3, 23);
  CHECK(a.centers == b.centers);
  CHECK(a.assignment == b.assignment);
  CHECK_THROWS_AS(kmeans(points, 0, 1), InvalidInputError);
  CHECK_THROWS_AS(kmeans(points, 13, 1), InvalidInputError);
}

TEST_CASE("candidate sets cover everything when top_m = r") {
  const SynthSpec spec{.p = 4, .q = 3, .samples_per_class = 5, .seed = 29};
  const SynthData data = generate(spec);
  Hyperparams hp;
  hp.alpha = 0.5;
  hp.superclass_r = 4;
  hp.candidate_top_m = 4;
  const SuperclassFitResult res = fit_with_superclasses(data.seen, data.pool, hp);
  for (const auto& set : res.candidates.sets) CHECK(set == std::vector<int>{0, 1, 2});
  CHECK(res.candidates.fallback_count() == 0);
}

TEST_CASE("fallback fills candidate sets when top clusters hold no pool classes") {
  // Two clusters split so that cluster 1 holds every pool class; forcing
  // top_m=1 with samples nearest cluster 0 triggers the fallback.
  SuperclassModel model;
  model.r = 2;
  model.centers = Matrix(2, 2, {0, 0, 100, 100});
  model.class_to_cluster = {0, 1, 1};  // one seen class, two pool classes
  UnseenPool pool;
  pool.features = Matrix(1, 2, {0.1, 0.0});  // nearest cluster 0 under identity
  pool.prototypes = Matrix(2, 2, {0, 1, 1, 0});
  const CandidateSets sets = build_candidate_sets(Matrix::identity(2), pool.fit_view(), model, 1,
                                                  LossMode::bidirectional);
  CHECK(sets.sets[0] == std::vector<int>{0, 1});
  CHECK(sets.fallback_count() == 1);
}

TEST_CASE("full pipeline with singleton clusters equals the plain fit") {
  const SynthSpec spec{.p = 4, .q = 3, .samples_per_class = 6, .seed = 31};
  const SynthData data = generate(spec);
  Hyperparams hp;
  hp.alpha = 0.5;
  hp.superclass_r = 7;  // p + q distinct prototypes
  hp.candidate_top_m = 7;
  const SuperclassFitResult with_super = fit_with_superclasses(data.seen, data.pool, hp);
  const FitResult plain = fit(data.seen, data.pool, hp);
  CHECK(frobenius_distance(with_super.projection, plain.projection) <= 1e-6);
}

TEST_CASE("r=1 collapses to the plain fit") {
  const SynthSpec spec{.p = 3, .q = 2, .samples_per_class = 5, .seed = 37};
  const SynthData data = generate(spec);
  Hyperparams hp;
  hp.alpha = 0.4;
  hp.superclass_r = 1;
  hp.candidate_top_m = 1;
  const SuperclassFitResult with_super = fit_with_superclasses(data.seen, data.pool, hp);
  for (const auto& set : with_super.candidates.sets) CHECK(set == std::vector<int>{0, 1});
  const FitResult plain = fit(data.seen, data.pool, hp);
  CHECK(frobenius_distance(with_super.projection, plain.projection) <= 1e-9);
}

TEST_CASE("grouped prototypes: candidate sets exclude the wrong group") {
  SynthSpec spec;
  spec.p = 6;
  spec.q = 4;
  spec.samples_per_class = 10;
  spec.grouped = 2;
  spec.seed = 41;
  const SynthData data = generate(spec);
  Hyperparams hp;
  hp.alpha = 0.5;
  hp.superclass_r = 2;
  hp.candidate_top_m = 1;
  const SuperclassFitResult res = fit_with_superclasses(data.seen, data.pool, hp);

  int clean = 0;
  int total = 0;
  const auto& truth = *data.pool.truth_labels;
  for (std::size_t i = 0; i < res.candidates.sets.size(); ++i) {
    const int true_group = data.class_group[spec.p + truth[i]];
    bool excluded_wrong_group = true;
    for (int j : res.candidates.sets[i])
      if (data.class_group[spec.p + j] != true_group) excluded_wrong_group = false;
    clean += excluded_wrong_group;
    ++total;
  }
  CHECK(static_cast<double>(clean) / total >= 0.95);
}

TEST_CASE("superclass pipeline is deterministic") {
  const SynthSpec spec{.p = 5, .q = 3, .samples_per_class = 6, .seed = 43};
  const SynthData data = generate(spec);
  Hyperparams hp;
  hp.alpha = 0.5;
  hp.superclass_r = 3;
  hp.seed = 99;
  const SuperclassFitResult a = fit_with_superclasses(data.seen, data.pool, hp);
  const SuperclassFitResult b = fit_with_superclasses(data.seen, data.pool, hp);
  CHECK(a.projection == b.projection);
  CHECK(a.model.centers == b.model.centers);
  CHECK(a.model.class_to_cluster == b.model.class_to_cluster);
}

TEST_CASE("constrained fits never weight non-candidate labels") {
  const SynthSpec spec{.p = 4, .q = 3, .samples_per_class = 5, .seed = 47};
  const SynthData data = generate(spec);
  const Candidates candidates(data.pool.features.rows(), std::vector<int>{0, 2});
  Hyperparams hp;
  hp.alpha = 0.5;
  const FitResult res = fit(data.seen, data.pool.fit_view(), hp, &candidates);
  const Matrix losses =
      loss_matrix(res.projection, data.pool.fit_view(), hp.mode, &candidates);
  for (int i = 0; i < losses.rows(); ++i) {
    const MinimizerSet set = min_subgradient(losses.row(i), losses.cols(), hp.tie_tol);
    for (int j : set.support) CHECK((j == 0 || j == 2));
  }
}

}  // TEST_SUITE
