#include "dipl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dipl/errors.hpp"
#include "dipl/numlin.hpp"
#include "dipl/parallel.hpp"
#include "dipl/rng.hpp"
#include "dipl/solver.hpp"

namespace dipl {

namespace {

constexpr int kRetriesPerPoint = 1000;

void check_spec(const SynthSpec& spec) {
  if (spec.k < 1 || spec.d < spec.k)
    throw InvalidInputError("synth: requires d >= k >= 1");
  if (spec.p < 1 || spec.q < 1 || spec.samples_per_class < 1)
    throw InvalidInputError("synth: class and sample counts must be >= 1");
  if (spec.noise_sigma < 0.0 || spec.domain_shift < 0.0)
    throw InvalidInputError("synth: noise and shift must be non-negative");
  if (spec.prototype_separation <= 0.0)
    throw InvalidInputError("synth: prototype separation must be positive");
  if (spec.grouped < 0 || spec.grouped > spec.p + spec.q)
    throw InvalidInputError("synth: invalid group count");
}

std::vector<double> gaussian_vector(Rng& rng, int n, double sigma) {
  std::vector<double> v(n);
  for (double& x : v) x = sigma * rng.normal();
  return v;
}

double min_distance_to_rows(const Matrix& rows, int filled, const std::vector<double>& point) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < filled; ++i)
    best = std::min(best, squared_distance(rows.row(i), point.data(), rows.cols()));
  return std::sqrt(best);
}

// Columns of a gaussian matrix orthonormalized by twice-iterated Gram-Schmidt.
Matrix random_orthonormal_columns(Rng& rng, int d, int k) {
  Matrix q(d, k);
  for (int j = 0; j < k; ++j) {
    std::vector<double> v;
    for (int attempt = 0;; ++attempt) {
      v = gaussian_vector(rng, d, 1.0);
      for (int pass = 0; pass < 2; ++pass)
        for (int prev = 0; prev < j; ++prev) {
          double proj = 0.0;
          for (int i = 0; i < d; ++i) proj += q(i, prev) * v[i];
          for (int i = 0; i < d; ++i) v[i] -= proj * q(i, prev);
        }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 1e-8) {
        for (double& x : v) x /= norm;
        break;
      }
      if (attempt >= kRetriesPerPoint)
        throw NumericError("synth: failed to draw an orthonormal basis");
    }
    for (int i = 0; i < d; ++i) q(i, j) = v[i];
  }
  return q;
}

}  // namespace

SynthData generate(const SynthSpec& spec) {
  check_spec(spec);
  Rng rng(spec.seed);
  const int total_classes = spec.p + spec.q;
  const int groups = spec.grouped;

  // Group anchors far apart relative to the within-group spread.
  Matrix anchors(groups, spec.k);
  if (groups > 0) {
    const double gap = 16.0 * spec.prototype_separation;
    for (int g = 0; g < groups; ++g) {
      bool placed = false;
      for (int attempt = 0; attempt < kRetriesPerPoint && !placed; ++attempt) {
        const std::vector<double> c = gaussian_vector(rng, spec.k, 0.75 * gap);
        if (min_distance_to_rows(anchors, g, c) >= gap) {
          std::copy(c.begin(), c.end(), anchors.row(g));
          placed = true;
        }
      }
      if (!placed) throw NumericError("synth: group separation infeasible");
    }
  }

  SynthData data;
  data.class_group.assign(total_classes, 0);

  // Prototype table, seen classes first, pairwise separation enforced.
  Matrix prototypes(total_classes, spec.k);
  const double spread =
      groups > 0 ? spec.prototype_separation
                 : spec.prototype_separation *
                       std::max(1.0, std::pow(static_cast<double>(total_classes),
                                              1.0 / static_cast<double>(spec.k)));
  for (int c = 0; c < total_classes; ++c) {
    const int group = groups > 0 ? c % groups : 0;
    data.class_group[c] = group;
    bool placed = false;
    for (int attempt = 0; attempt < kRetriesPerPoint && !placed; ++attempt) {
      std::vector<double> y =
          gaussian_vector(rng, spec.k, groups > 0 ? 0.75 * spread : spread);
      if (groups > 0)
        for (int j = 0; j < spec.k; ++j) y[j] += anchors(group, j);
      if (min_distance_to_rows(prototypes, c, y) >= spec.prototype_separation) {
        std::copy(y.begin(), y.end(), prototypes.row(c));
        placed = true;
      }
    }
    if (!placed) throw NumericError("synth: prototype separation infeasible after retries");
  }

  data.true_projection = random_orthonormal_columns(rng, spec.d, spec.k);
  const Matrix& w_star = data.true_projection;

  std::vector<double> shift_dir = gaussian_vector(rng, spec.d, 1.0);
  {
    double norm = 0.0;
    for (double x : shift_dir) norm += x * x;
    norm = std::sqrt(norm);
    if (norm <= 0.0) throw NumericError("synth: degenerate shift direction");
    for (double& x : shift_dir) x /= norm;
  }

  const int n_seen = spec.p * spec.samples_per_class;
  const int n_unseen = spec.q * spec.samples_per_class;
  data.seen.features = Matrix(n_seen, spec.d);
  data.seen.labels.reserve(n_seen);
  data.pool.features = Matrix(n_unseen, spec.d);
  std::vector<int> truth;
  truth.reserve(n_unseen);

  auto emit_sample = [&](Matrix& dst, int row, int class_row, bool shifted) {
    const std::vector<double> base = multiply(w_star, std::vector<double>(
        prototypes.row(class_row), prototypes.row(class_row) + spec.k));
    double* out = dst.row(row);
    for (int i = 0; i < spec.d; ++i) {
      out[i] = base[i] + spec.noise_sigma * rng.normal();
      if (shifted) out[i] += spec.domain_shift * shift_dir[i];
    }
  };

  int row = 0;
  for (int c = 0; c < spec.p; ++c)
    for (int s = 0; s < spec.samples_per_class; ++s, ++row) {
      emit_sample(data.seen.features, row, c, false);
      data.seen.labels.push_back(c);
    }
  row = 0;
  for (int c = 0; c < spec.q; ++c)
    for (int s = 0; s < spec.samples_per_class; ++s, ++row) {
      emit_sample(data.pool.features, row, spec.p + c, true);
      truth.push_back(c);
    }

  data.seen.prototypes = Matrix(spec.p, spec.k);
  for (int c = 0; c < spec.p; ++c)
    std::copy(prototypes.row(c), prototypes.row(c) + spec.k, data.seen.prototypes.row(c));
  data.pool.prototypes = Matrix(spec.q, spec.k);
  for (int c = 0; c < spec.q; ++c)
    std::copy(prototypes.row(spec.p + c), prototypes.row(spec.p + c) + spec.k,
              data.pool.prototypes.row(c));
  data.pool.truth_labels = std::move(truth);
  return data;
}

namespace {

// Loss sums evaluated through Gram matrices so the per-assignment cost does
// not depend on the sample count:
//   sum_i ||W^T x_i - y_i||^2 + ||x_i - W y_i||^2
//     = tr(W^T Sxx W) + tr(W^T W Syy) - 4 tr(W^T Sxy) + sum(||x||^2 + ||y||^2).
struct QuadraticLoss {
  Matrix sxx;  // d x d
  Matrix syy;  // k x k
  Matrix sxy;  // d x k
  double constant = 0.0;

  double eval(const Matrix& w) const {
    const int d = w.rows();
    const int k = w.cols();
    double value = constant;
    const Matrix t = multiply(sxx, w);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < k; ++j) value += w(i, j) * t(i, j);
    const Matrix g = multiply(transpose(w), w);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) value += g(a, b) * syy(a, b);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < k; ++j) value -= 4.0 * w(i, j) * sxy(i, j);
    return value;
  }
};

Matrix gram_full(const Matrix& rows) {
  const int d = rows.cols();
  Matrix g(d, d);
  for (int i = 0; i < rows.rows(); ++i) {
    const double* x = rows.row(i);
    for (int a = 0; a < d; ++a) {
      const double xa = x[a];
      if (xa == 0.0) continue;
      double* row = g.row(a);
      for (int b = 0; b < d; ++b) row[b] += xa * x[b];
    }
  }
  return g;
}

double sum_sq_rows(const Matrix& rows) {
  double s = 0.0;
  for (double v : rows.data()) s += v * v;
  return s;
}

}  // namespace

OracleResult enumerate_oracle(const SeenSet& seen, const UnseenView& pool, double alpha,
                              double beta) {
  const DimSummary dims = validate(seen, pool);
  if (alpha < 0.0 || alpha >= 1.0) throw InvalidInputError("enumerate_oracle: alpha in [0,1)");
  if (beta <= 0.0) throw InvalidInputError("enumerate_oracle: beta must be positive");
  if (dims.n_unseen < 1) throw InvalidInputError("enumerate_oracle: empty pool");

  constexpr std::uint64_t kMaxAssignments = 1000000;
  std::uint64_t total = 1;
  for (int i = 0; i < dims.n_unseen; ++i) {
    total *= static_cast<std::uint64_t>(dims.q);
    if (total > kMaxAssignments)
      throw InvalidInputError("enumerate_oracle: instance too large (q^n_unseen > 1e6)");
  }

  const double pool_weight = alpha;
  const double seen_weight = 1.0 - alpha;
  const int d = dims.d;
  const int k = dims.k;
  const int q = dims.q;
  const int n_u = dims.n_unseen;
  const Matrix& ux = *pool.features;
  const Matrix& uy = *pool.prototypes;

  // Assignment-independent pieces.
  Matrix feature_gram(d, d);
  feature_gram.add_scaled(gram_full(seen.features), seen_weight);
  feature_gram.add_scaled(gram_full(ux), pool_weight);
  for (int i = 0; i < d; ++i) feature_gram(i, i) += beta;
  const SymEig ea = sym_eig(feature_gram);

  QuadraticLoss seen_loss;
  seen_loss.sxx = gram_full(seen.features);
  seen_loss.syy = Matrix(k, k);
  seen_loss.sxy = Matrix(d, k);
  std::vector<std::int64_t> seen_counts(dims.p, 0);
  for (int label : seen.labels) seen_counts[label] += 1;
  for (int c = 0; c < dims.p; ++c) {
    if (seen_counts[c] == 0) continue;
    const double* y = seen.prototypes.row(c);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        seen_loss.syy(a, b) += static_cast<double>(seen_counts[c]) * y[a] * y[b];
  }
  for (int i = 0; i < seen.features.rows(); ++i) {
    const double* x = seen.features.row(i);
    const double* y = seen.prototypes.row(seen.labels[i]);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < k; ++b) seen_loss.sxy(a, b) += x[a] * y[b];
  }
  seen_loss.constant = sum_sq_rows(seen.features);
  for (int c = 0; c < dims.p; ++c)
    seen_loss.constant +=
        static_cast<double>(seen_counts[c]) * dot(seen.prototypes.row(c), seen.prototypes.row(c), k);

  const Matrix pool_sxx = gram_full(ux);
  const double pool_x_sq = sum_sq_rows(ux);
  const Matrix semantic_gram_seen = seen_loss.syy;  // reused below
  const Matrix cross_seen = seen_loss.sxy;

  struct Best {
    double objective = std::numeric_limits<double>::infinity();
    std::vector<int> assignment;
  };

  // Decode the assignment index with sample 0 as the most significant digit,
  // so ascending index order is lexicographic order.
  auto decode = [&](std::uint64_t index, std::vector<int>& digits) {
    for (int i = n_u - 1; i >= 0; --i) {
      digits[i] = static_cast<int>(index % q);
      index /= q;
    }
  };

  const ChunkLayout layout = chunk_layout(total, 1, 64);
  std::vector<Best> partials(layout.count);
  parallel_chunks(
      total,
      [&](std::size_t chunk_idx, std::size_t begin, std::size_t end) {
        Best& best = partials[chunk_idx];
        std::vector<int> digits(n_u, 0);
        std::vector<double> class_weight(q, 0.0);
        Matrix class_xsum(q, d);
        for (std::uint64_t index = begin; index < end; ++index) {
          decode(index, digits);
          std::fill(class_weight.begin(), class_weight.end(), 0.0);
          std::fill(class_xsum.data().begin(), class_xsum.data().end(), 0.0);
          for (int i = 0; i < n_u; ++i) {
            const int j = digits[i];
            class_weight[j] += 1.0;
            const double* x = ux.row(i);
            double* acc = class_xsum.row(j);
            for (int a = 0; a < d; ++a) acc[a] += x[a];
          }

          Matrix semantic_gram(k, k);
          semantic_gram.add_scaled(semantic_gram_seen, seen_weight);
          Matrix cross(d, k);
          cross.add_scaled(cross_seen, seen_weight);
          double pool_const = pool_x_sq;
          Matrix pool_sxy(d, k);
          Matrix pool_syy(k, k);
          for (int j = 0; j < q; ++j) {
            if (class_weight[j] == 0.0) continue;
            const double* y = uy.row(j);
            pool_const += class_weight[j] * dot(y, y, k);
            for (int a = 0; a < k; ++a)
              for (int b = 0; b < k; ++b) pool_syy(a, b) += class_weight[j] * y[a] * y[b];
            const double* xs = class_xsum.row(j);
            for (int a = 0; a < d; ++a)
              for (int b = 0; b < k; ++b) pool_sxy(a, b) += xs[a] * y[b];
          }
          semantic_gram.add_scaled(pool_syy, pool_weight);
          cross.add_scaled(pool_sxy, pool_weight);
          cross.scale(2.0);

          const Matrix w = solve_sylvester_factored(ea, sym_eig(semantic_gram), cross);

          QuadraticLoss pool_loss;
          pool_loss.sxx = pool_sxx;
          pool_loss.syy = pool_syy;
          pool_loss.sxy = pool_sxy;
          pool_loss.constant = pool_const;
          const double wn = frobenius_norm(w);
          const double value = seen_weight * seen_loss.eval(w) +
                               pool_weight * pool_loss.eval(w) + beta * wn * wn;
          if (value < best.objective) {
            best.objective = value;
            best.assignment.assign(digits.begin(), digits.end());
          }
        }
      },
      1);

  OracleResult result;
  result.objective = std::numeric_limits<double>::infinity();
  for (const Best& b : partials) {
    if (b.assignment.empty()) continue;
    if (b.objective < result.objective) {
      result.objective = b.objective;
      result.assignment = b.assignment;
    }
  }
  if (result.assignment.empty()) throw NumericError("enumerate_oracle: no assignment evaluated");
  return result;
}

OracleResult enumerate_oracle(const SeenSet& seen, const UnseenPool& pool, double alpha,
                              double beta) {
  return enumerate_oracle(seen, pool.fit_view(), alpha, beta);
}

}  // namespace dipl
