#include <doctest.h>

#include <cmath>

#include "dipl/errors.hpp"
#include "dipl/numlin.hpp"
#include "dipl/solver.hpp"
#include "dipl/synth.hpp"

using namespace dipl;

TEST_SUITE("synth") {

TEST_CASE("noiseless data reconstructs exactly") {
  SynthSpec spec;
  spec.noise_sigma = 0.0;
  spec.domain_shift = 0.0;
  spec.seed = 1;
  const SynthData data = generate(spec);
  for (int i = 0; i < data.seen.features.rows(); ++i) {
    const std::vector<double> y(data.seen.prototypes.row(data.seen.labels[i]),
                                data.seen.prototypes.row(data.seen.labels[i]) + spec.k);
    const auto rebuilt = multiply(data.true_projection, y);
    for (int j = 0; j < spec.d; ++j) CHECK(data.seen.features(i, j) == rebuilt[j]);
  }
}

TEST_CASE("generation is deterministic given the seed") {
  SynthSpec spec;
  spec.seed = 1234;
  const SynthData a = generate(spec);
  const SynthData b = generate(spec);
  CHECK(a.seen.features == b.seen.features);
  CHECK(a.pool.features == b.pool.features);
  CHECK(a.seen.prototypes == b.seen.prototypes);
  CHECK(a.pool.prototypes == b.pool.prototypes);
  CHECK(a.true_projection == b.true_projection);
  CHECK(*a.pool.truth_labels == *b.pool.truth_labels);
  SynthSpec other = spec;
  other.seed = 1235;
  const SynthData c = generate(other);
  CHECK(a.seen.features != c.seen.features);
}

TEST_CASE("prototype separation holds") {
  SynthSpec spec;
  spec.prototype_separation = 3.0;
  spec.seed = 5;
  const SynthData data = generate(spec);
  const Matrix all = vstack(data.seen.prototypes, data.pool.prototypes);
  for (int i = 0; i < all.rows(); ++i)
    for (int j = i + 1; j < all.rows(); ++j)
      CHECK(std::sqrt(squared_distance(all.row(i), all.row(j), all.cols())) >= 3.0);
}

TEST_CASE("wide separation with tiny noise classifies in semantic space") {
  SynthSpec spec;
  spec.prototype_separation = 10.0;
  spec.noise_sigma = 0.01;
  spec.seed = 9;
  const SynthData data = generate(spec);
  const Matrix wt = transpose(data.true_projection);
  auto nearest = [&](const double* x, const Matrix& prototypes) {
    std::vector<double> projected = multiply(wt, std::vector<double>(x, x + spec.d));
    int best = 0;
    double best_d = squared_distance(projected.data(), prototypes.row(0), spec.k);
    for (int c = 1; c < prototypes.rows(); ++c) {
      const double d2 = squared_distance(projected.data(), prototypes.row(c), spec.k);
      if (d2 < best_d) {
        best_d = d2;
        best = c;
      }
    }
    return best;
  };
  for (int i = 0; i < data.seen.features.rows(); ++i)
    CHECK(nearest(data.seen.features.row(i), data.seen.prototypes) == data.seen.labels[i]);
  for (int i = 0; i < data.pool.features.rows(); ++i)
    CHECK(nearest(data.pool.features.row(i), data.pool.prototypes) ==
          (*data.pool.truth_labels)[i]);
}

TEST_CASE("infeasible separation errors out") {
  // Grouped mode pins the within-group spread below the separation demand:
  // ten prototypes per group cannot fit pairwise >= 1 apart in a ~±2 window.
  SynthSpec spec;
  spec.k = 1;
  spec.d = 1;
  spec.p = 10;
  spec.q = 10;
  spec.grouped = 2;
  spec.prototype_separation = 1.0;
  spec.seed = 2;
  CHECK_THROWS_AS(generate(spec), NumericError);
}

TEST_CASE("spec validation") {
  SynthSpec spec;
  spec.k = 9;
  spec.d = 4;
  CHECK_THROWS_AS(generate(spec), InvalidInputError);
  spec = SynthSpec{};
  spec.noise_sigma = -1.0;
  CHECK_THROWS_AS(generate(spec), InvalidInputError);
}

TEST_CASE("oracle with a single sample enumerates both labels") {
  SynthSpec spec;
  spec.p = 2;
  spec.q = 2;
  spec.samples_per_class = 1;
  spec.d = 4;
  spec.k = 2;
  spec.seed = 21;
  SynthData data = generate(spec);
  // Keep one pool sample.
  UnseenPool pool;
  pool.features = take_rows(data.pool.features, {0});
  pool.prototypes = data.pool.prototypes;
  const OracleResult oracle = enumerate_oracle(data.seen, pool.fit_view(), 0.5, 0.01);
  CHECK(oracle.assignment.size() == 1);
  CHECK((oracle.assignment[0] == 0 || oracle.assignment[0] == 1));
  CHECK(std::isfinite(oracle.objective));
}

TEST_CASE("oracle objective is optimal over hard assignments") {
  SynthSpec spec;
  spec.d = 6;
  spec.k = 3;
  spec.p = 3;
  spec.q = 3;
  spec.samples_per_class = 2;
  spec.seed = 23;
  const SynthData data = generate(spec);  // pool has 6 samples, 3^6 = 729 assignments
  const double alpha = 0.5, beta = 0.01;
  const OracleResult oracle = enumerate_oracle(data.seen, data.pool.fit_view(), alpha, beta);

  // Evaluating the returned assignment reproduces the reported objective.
  std::vector<MinimizerSet> hard;
  for (int label : oracle.assignment) hard.push_back(MinimizerSet{{label}});
  const SurrogateSystem sys = assemble_system(data.seen, data.pool.fit_view(), hard, alpha, beta,
                                              LossMode::bidirectional);
  const Matrix w = solve_sylvester(sys.feature_gram, sys.semantic_gram, sys.cross);
  const double direct =
      objective(w, data.seen, data.pool.fit_view(), alpha, beta, LossMode::bidirectional);
  CHECK(oracle.objective == doctest::Approx(direct).epsilon(1e-9));

  // No other assignment beats it (exhaustive re-check through the solver path).
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> digits(6, 0);
  for (int index = 0; index < 729; ++index) {
    int rem = index;
    for (int i = 5; i >= 0; --i) {
      digits[i] = rem % 3;
      rem /= 3;
    }
    std::vector<MinimizerSet> sets;
    for (int label : digits) sets.push_back(MinimizerSet{{label}});
    const SurrogateSystem s = assemble_system(data.seen, data.pool.fit_view(), sets, alpha, beta,
                                              LossMode::bidirectional);
    const Matrix cand = solve_sylvester(s.feature_gram, s.semantic_gram, s.cross);
    best = std::min(best, objective(cand, data.seen, data.pool.fit_view(), alpha, beta,
                                    LossMode::bidirectional));
  }
  CHECK(oracle.objective <= best + 1e-9);
}

TEST_CASE("noiseless oracle recovers the truth assignment") {
  SynthSpec spec;
  spec.d = 6;
  spec.k = 3;
  spec.p = 3;
  spec.q = 3;
  spec.samples_per_class = 2;
  spec.noise_sigma = 0.0;
  spec.domain_shift = 0.0;
  spec.seed = 29;
  const SynthData data = generate(spec);
  const OracleResult oracle = enumerate_oracle(data.seen, data.pool.fit_view(), 0.5, 0.01);
  CHECK(oracle.assignment == *data.pool.truth_labels);
}

TEST_CASE("near-zero alpha matches the inductive argmin") {
  SynthSpec spec;
  spec.d = 6;
  spec.k = 3;
  spec.p = 3;
  spec.q = 3;
  spec.samples_per_class = 2;
  spec.seed = 31;
  const SynthData data = generate(spec);
  const OracleResult oracle = enumerate_oracle(data.seen, data.pool.fit_view(), 1e-6, 0.01);
  const Matrix w0 = fit_inductive(data.seen, 0.01, LossMode::bidirectional);
  const auto preds =
      predict_all(w0, data.pool.features, data.pool.prototypes, LossMode::bidirectional);
  CHECK(oracle.assignment == preds);
}

TEST_CASE("oracle never exceeds the converged fit objective") {
  for (int seed : {41, 42, 43}) {
    SynthSpec spec;
    spec.d = 6;
    spec.k = 3;
    spec.p = 3;
    spec.q = 3;
    spec.samples_per_class = 2;
    spec.noise_sigma = 0.4;
    spec.seed = static_cast<std::uint64_t>(seed);
    const SynthData data = generate(spec);
    Hyperparams hp;
    hp.alpha = 0.5;
    hp.decay = 1.0;
    const FitResult res = fit(data.seen, data.pool, hp);
    const OracleResult oracle =
        enumerate_oracle(data.seen, data.pool.fit_view(), hp.alpha, hp.beta);
    CHECK(oracle.objective <= res.trace.iterations.back().objective + 1e-9);
  }
}

TEST_CASE("oracle rejects oversized instances") {
  SynthSpec spec;
  spec.d = 4;
  spec.k = 2;
  spec.p = 2;
  spec.q = 8;
  spec.samples_per_class = 10;  // 8^80 assignments
  spec.seed = 3;
  const SynthData data = generate(spec);
  CHECK_THROWS_AS(enumerate_oracle(data.seen, data.pool.fit_view(), 0.5, 0.01),
                  InvalidInputError);
}

}  // TEST_SUITE
