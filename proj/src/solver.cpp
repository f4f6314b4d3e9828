// Iterative solver for the bidirectional projection objective: linearize the
// sum-of-minimums term around the current projection, solve the resulting
// Sylvester system, repeat until the pool assignments settle.

#include "dipl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dipl/errors.hpp"
#include "dipl/parallel.hpp"

namespace dipl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_candidates(const Candidates& candidates, int n, int q) {
  if (static_cast<int>(candidates.size()) != n)
    throw InvalidInputError("candidate sets count does not match pool samples");
  for (int i = 0; i < n; ++i) {
    const auto& set = candidates[i];
    if (set.empty())
      throw InvalidInputError("empty candidate set for sample " + std::to_string(i));
    int prev = -1;
    for (int j : set) {
      if (j < 0 || j >= q) throw InvalidInputError("candidate label out of range");
      if (j <= prev) throw InvalidInputError("candidate set must be sorted and unique");
      prev = j;
    }
  }
}

double pair_loss(const double* x, const double* fx, const double* y, const double* ry, int d,
                 int k, LossMode mode) {
  double v = 0.0;
  if (mode != LossMode::reverse_only) v += squared_distance(fx, y, k);
  if (mode != LossMode::forward_only) v += squared_distance(x, ry, d);
  return v;
}

// Upper triangle of sum_i rows_i rows_i^T, accumulated chunk-by-chunk in a
// fixed order so the result is identical for any worker count.
Matrix gram_upper(const Matrix& rows) {
  const int d = rows.cols();
  const std::size_t n = static_cast<std::size_t>(rows.rows());
  return chunked_reduce<Matrix>(
      n, [&] { return Matrix(d, d); },
      [&](Matrix& partial, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const double* x = rows.row(static_cast<int>(i));
          for (int a = 0; a < d; ++a) {
            const double xa = x[a];
            if (xa == 0.0) continue;
            double* pa = partial.row(a);
            for (int b = a; b < d; ++b) pa[b] += xa * x[b];
          }
        }
      },
      [](Matrix& total, const Matrix& partial) { total.add_scaled(partial, 1.0); });
}

void mirror_lower(Matrix& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i + 1; j < m.cols(); ++j) m(j, i) = m(i, j);
}

void add_outer_upper(Matrix& m, const double* y, double weight, int k) {
  for (int a = 0; a < k; ++a) {
    const double ya = weight * y[a];
    if (ya == 0.0) continue;
    double* row = m.row(a);
    for (int b = a; b < k; ++b) row[b] += ya * y[b];
  }
}

double seen_loss_sum(const Matrix& w, const SeenSet& seen, LossMode mode) {
  const int d = seen.features.cols();
  const int k = seen.prototypes.cols();
  const Matrix forward =
      mode == LossMode::reverse_only ? Matrix() : multiply(seen.features, w);
  const Matrix reverse =
      mode == LossMode::forward_only ? Matrix() : multiply(seen.prototypes, transpose(w));
  return chunked_reduce<double>(
      static_cast<std::size_t>(seen.features.rows()), [] { return 0.0; },
      [&](double& partial, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const int row = static_cast<int>(i);
          const int label = seen.labels[row];
          partial += pair_loss(seen.features.row(row),
                               forward.empty() ? nullptr : forward.row(row),
                               seen.prototypes.row(label),
                               reverse.empty() ? nullptr : reverse.row(label), d, k, mode);
        }
      },
      [](double& total, double partial) { total += partial; });
}

double pool_min_sum(const Matrix& w, const UnseenView& pool, LossMode mode,
                    const Candidates* candidates) {
  const Matrix losses = loss_matrix(w, pool, mode, candidates);
  return chunked_reduce<double>(
      static_cast<std::size_t>(losses.rows()), [] { return 0.0; },
      [&](double& partial, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const double* row = losses.row(static_cast<int>(i));
          double best = kInf;
          for (int j = 0; j < losses.cols(); ++j) best = std::min(best, row[j]);
          partial += best;
        }
      },
      [](double& total, double partial) { total += partial; });
}

int argmin_row(const double* row, int q) {
  int best = 0;
  for (int j = 1; j < q; ++j)
    if (row[j] < row[best]) best = j;
  return best;
}

}  // namespace

double projection_loss(const Matrix& w, const double* x, const double* y, LossMode mode) {
  const int d = w.rows();
  const int k = w.cols();
  double v = 0.0;
  if (mode != LossMode::reverse_only) {
    // ||W^T x - y||^2
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      double fj = 0.0;
      for (int i = 0; i < d; ++i) fj += w(i, j) * x[i];
      const double diff = fj - y[j];
      s += diff * diff;
    }
    v += s;
  }
  if (mode != LossMode::forward_only) {
    // ||x - W y||^2
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      const double ri = dot(w.row(i), y, k);
      const double diff = x[i] - ri;
      s += diff * diff;
    }
    v += s;
  }
  return v;
}

double projection_loss(const Matrix& w, const std::vector<double>& x,
                       const std::vector<double>& y, LossMode mode) {
  if (static_cast<int>(x.size()) != w.rows() || static_cast<int>(y.size()) != w.cols())
    throw InvalidInputError("projection_loss: dimension mismatch");
  return projection_loss(w, x.data(), y.data(), mode);
}

Matrix loss_matrix(const Matrix& w, const UnseenView& pool, LossMode mode,
                   const Candidates* candidates) {
  if (!pool.features || !pool.prototypes)
    throw InvalidInputError("loss_matrix: pool view is empty");
  const int n = pool.features->rows();
  const int q = pool.prototypes->rows();
  const int d = w.rows();
  const int k = w.cols();
  if (pool.features->cols() != d || pool.prototypes->cols() != k)
    throw InvalidInputError("loss_matrix: dimension mismatch with projection");
  if (candidates && !candidates->empty()) validate_candidates(*candidates, n, q);
  const Candidates* cand = (candidates && !candidates->empty()) ? candidates : nullptr;

  const Matrix forward = mode == LossMode::reverse_only ? Matrix() : multiply(*pool.features, w);
  const Matrix reverse =
      mode == LossMode::forward_only ? Matrix() : multiply(*pool.prototypes, transpose(w));

  Matrix out(n, q);
  std::fill(out.data().begin(), out.data().end(), kInf);
  parallel_chunks(static_cast<std::size_t>(n), [&](std::size_t, std::size_t begin,
                                                   std::size_t end) {
    for (std::size_t ii = begin; ii < end; ++ii) {
      const int i = static_cast<int>(ii);
      const double* x = pool.features->row(i);
      const double* fx = forward.empty() ? nullptr : forward.row(i);
      double* out_row = out.row(i);
      auto eval = [&](int j) {
        out_row[j] = pair_loss(x, fx, pool.prototypes->row(j),
                               reverse.empty() ? nullptr : reverse.row(j), d, k, mode);
      };
      if (cand) {
        for (int j : (*cand)[i]) eval(j);
      } else {
        for (int j = 0; j < q; ++j) eval(j);
      }
    }
  });
  return out;
}

MinimizerSet min_subgradient(const double* row, int q, double tie_tol) {
  if (tie_tol < 0.0) throw InvalidInputError("tie tolerance must be non-negative");
  double best = kInf;
  for (int j = 0; j < q; ++j) best = std::min(best, row[j]);
  if (!std::isfinite(best))
    throw NumericError("min_subgradient: row has no finite loss");
  const double cut = best * (1.0 + tie_tol) + 1e-300;
  MinimizerSet set;
  for (int j = 0; j < q; ++j)
    if (row[j] <= cut) set.support.push_back(j);
  return set;
}

MinimizerSet min_subgradient(const std::vector<double>& row, double tie_tol) {
  return min_subgradient(row.data(), static_cast<int>(row.size()), tie_tol);
}

SurrogateSystem assemble_system(const SeenSet& seen, const UnseenView& pool,
                                const std::vector<MinimizerSet>& minimizers, double alpha_t,
                                double beta, LossMode mode) {
  if (alpha_t < 0.0 || alpha_t >= 1.0) throw InvalidInputError("alpha_t must lie in [0, 1)");
  if (beta <= 0.0) throw InvalidInputError("beta must be positive");
  const int d = seen.features.cols();
  const int k = seen.prototypes.cols();
  const int n_u = pool.count();
  const bool use_pool = alpha_t > 0.0 && n_u > 0;
  if (use_pool && static_cast<int>(minimizers.size()) != n_u)
    throw InvalidInputError("assemble_system: one minimizer set per pool sample required");
  const double seen_weight = 1.0 - alpha_t;

  SurrogateSystem sys{Matrix(d, d), Matrix(k, k), Matrix(d, k)};

  // Feature-side Gram.
  if (mode != LossMode::reverse_only) {
    sys.feature_gram.add_scaled(gram_upper(seen.features), seen_weight);
    if (use_pool) sys.feature_gram.add_scaled(gram_upper(*pool.features), alpha_t);
    mirror_lower(sys.feature_gram);
  }
  for (int i = 0; i < d; ++i) sys.feature_gram(i, i) += beta;

  // Semantic-side Gram. Per-class weights keep the cost at one outer product
  // per class; integer seen counts make the seen part order-independent.
  if (mode != LossMode::forward_only) {
    std::vector<std::int64_t> counts(seen.prototypes.rows(), 0);
    for (int label : seen.labels) counts[label] += 1;
    for (int c = 0; c < seen.prototypes.rows(); ++c)
      if (counts[c] > 0)
        add_outer_upper(sys.semantic_gram, seen.prototypes.row(c),
                        seen_weight * static_cast<double>(counts[c]), k);
    if (use_pool) {
      const int q = pool.classes();
      auto weights = chunked_reduce<std::vector<double>>(
          static_cast<std::size_t>(n_u), [&] { return std::vector<double>(q, 0.0); },
          [&](std::vector<double>& partial, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
              const MinimizerSet& set = minimizers[i];
              const double wgt = set.weight();
              for (int j : set.support) partial[j] += wgt;
            }
          },
          [](std::vector<double>& total, const std::vector<double>& partial) {
            for (std::size_t j = 0; j < total.size(); ++j) total[j] += partial[j];
          });
      for (int j = 0; j < q; ++j)
        if (weights[j] != 0.0)
          add_outer_upper(sys.semantic_gram, pool.prototypes->row(j), alpha_t * weights[j], k);
    }
    mirror_lower(sys.semantic_gram);
  }

  // Cross term; the bidirectional loss contributes it twice.
  const double cross_factor = mode == LossMode::bidirectional ? 2.0 : 1.0;
  {
    Matrix cross_seen = chunked_reduce<Matrix>(
        static_cast<std::size_t>(seen.features.rows()), [&] { return Matrix(d, k); },
        [&](Matrix& partial, std::size_t begin, std::size_t end) {
          for (std::size_t i = begin; i < end; ++i) {
            const int row = static_cast<int>(i);
            const double* x = seen.features.row(row);
            const double* y = seen.prototypes.row(seen.labels[row]);
            for (int a = 0; a < d; ++a) {
              const double xa = x[a];
              if (xa == 0.0) continue;
              double* pa = partial.row(a);
              for (int b = 0; b < k; ++b) pa[b] += xa * y[b];
            }
          }
        },
        [](Matrix& total, const Matrix& partial) { total.add_scaled(partial, 1.0); });
    sys.cross.add_scaled(cross_seen, cross_factor * seen_weight);
  }
  if (use_pool) {
    Matrix cross_pool = chunked_reduce<Matrix>(
        static_cast<std::size_t>(n_u), [&] { return Matrix(d, k); },
        [&](Matrix& partial, std::size_t begin, std::size_t end) {
          for (std::size_t i = begin; i < end; ++i) {
            const int row = static_cast<int>(i);
            const MinimizerSet& set = minimizers[row];
            const double wgt = set.weight();
            const double* x = pool.features->row(row);
            for (int j : set.support) {
              const double* y = pool.prototypes->row(j);
              for (int a = 0; a < d; ++a) {
                const double xa = wgt * x[a];
                if (xa == 0.0) continue;
                double* pa = partial.row(a);
                for (int b = 0; b < k; ++b) pa[b] += xa * y[b];
              }
            }
          }
        },
        [](Matrix& total, const Matrix& partial) { total.add_scaled(partial, 1.0); });
    sys.cross.add_scaled(cross_pool, cross_factor * alpha_t);
  }
  return sys;
}

double objective(const Matrix& w, const SeenSet& seen, const UnseenView& pool, double alpha_t,
                 double beta, LossMode mode, const Candidates* candidates) {
  if (alpha_t < 0.0 || alpha_t >= 1.0) throw InvalidInputError("alpha_t must lie in [0, 1)");
  const double norm = frobenius_norm(w);
  double total = beta * norm * norm;
  const double seen_weight = 1.0 - alpha_t;
  if (seen_weight > 0.0) total += seen_weight * seen_loss_sum(w, seen, mode);
  if (alpha_t > 0.0 && pool.count() > 0)
    total += alpha_t * pool_min_sum(w, pool, mode, candidates);
  return total;
}

Matrix fit_inductive(const SeenSet& seen, double beta, LossMode mode) {
  validate_seen(seen);
  SurrogateSystem sys = assemble_system(seen, UnseenView{}, {}, 0.0, beta, mode);
  Matrix w = solve_sylvester(sys.feature_gram, sys.semantic_gram, sys.cross);
  if (!w.all_finite()) throw NumericError("fit_inductive: projection has non-finite entries");
  return w;
}

FitResult fit(const SeenSet& seen, const UnseenView& pool, const Hyperparams& hp,
              const Candidates* candidates, const IterationObserver& observer) {
  const DimSummary dims = validate(seen, pool);
  if (hp.beta <= 0.0) throw InvalidInputError("beta must be positive");
  if (hp.max_iters < 1) throw InvalidInputError("max_iters must be >= 1");
  if (hp.decay <= 0.0 || hp.decay > 1.0) throw InvalidInputError("decay must lie in (0, 1]");
  if (hp.w_tol < 0.0) throw InvalidInputError("w_tol must be non-negative");
  const Candidates* cand = (candidates && !candidates->empty()) ? candidates : nullptr;
  if (cand) validate_candidates(*cand, dims.n_unseen, dims.q);

  FitResult res;
  res.projection = fit_inductive(seen, hp.beta, hp.mode);

  if (!hp.transductive) {
    IterationRecord rec;
    rec.t = 0;
    rec.alpha_t = 0.0;
    rec.objective = objective(res.projection, seen, pool, 0.0, hp.beta, hp.mode, cand);
    res.trace.iterations.push_back(rec);
    res.trace.termination = Termination::w_converged;
    if (observer) observer(rec, res.projection);
    return res;
  }

  if (!(hp.alpha > 0.0 && hp.alpha < 1.0))
    throw InvalidInputError("transductive fit requires alpha in (0, 1)");
  if (dims.n_unseen < 1) throw InvalidInputError("transductive fit requires a nonempty pool");

  std::vector<int> prev_assign;
  res.trace.termination = Termination::max_iters;
  for (int t = 0; t < hp.max_iters; ++t) {
    const double alpha_t = hp.alpha * std::pow(hp.decay, static_cast<double>(t));
    const Matrix losses = loss_matrix(res.projection, pool, hp.mode, cand);
    const int n_u = losses.rows();
    const int q = losses.cols();

    std::vector<MinimizerSet> minimizers(n_u);
    std::vector<int> assign(n_u);
    parallel_chunks(static_cast<std::size_t>(n_u),
                    [&](std::size_t, std::size_t begin, std::size_t end) {
                      for (std::size_t i = begin; i < end; ++i) {
                        const double* row = losses.row(static_cast<int>(i));
                        minimizers[i] = min_subgradient(row, q, hp.tie_tol);
                        assign[i] = argmin_row(row, q);
                      }
                    });

    int changed = n_u;
    if (!prev_assign.empty()) {
      changed = 0;
      for (int i = 0; i < n_u; ++i)
        if (assign[i] != prev_assign[i]) ++changed;
    }

    SurrogateSystem sys = assemble_system(seen, pool, minimizers, alpha_t, hp.beta, hp.mode);
    Matrix w_next = solve_sylvester(sys.feature_gram, sys.semantic_gram, sys.cross);
    if (!w_next.all_finite()) throw NumericError("fit: projection has non-finite entries");

    IterationRecord rec;
    rec.t = t;
    rec.alpha_t = alpha_t;
    rec.assignment_changes = changed;
    rec.w_delta = frobenius_distance(w_next, res.projection);
    rec.objective = objective(w_next, seen, pool, alpha_t, hp.beta, hp.mode, cand);
    res.trace.iterations.push_back(rec);

    const bool stable = !prev_assign.empty() && changed == 0;
    const bool w_small =
        rec.w_delta <= hp.w_tol * std::max(frobenius_norm(w_next), 1e-300);
    res.projection = std::move(w_next);
    prev_assign = std::move(assign);
    if (observer) observer(rec, res.projection);
    if (stable && w_small) {
      res.trace.termination = Termination::assignments_stable;
      break;
    }
  }
  return res;
}

FitResult fit(const SeenSet& seen, const UnseenPool& pool, const Hyperparams& hp,
              const Candidates* candidates, const IterationObserver& observer) {
  return fit(seen, pool.fit_view(), hp, candidates, observer);
}

int predict(const Matrix& w, const double* x, const Matrix& prototypes, LossMode mode,
            const std::vector<int>* candidates) {
  if (candidates && candidates->empty())
    throw InvalidInputError("predict: empty candidate set");
  const int q = prototypes.rows();
  if (q < 1) throw InvalidInputError("predict: no prototypes");
  int best = -1;
  double best_loss = kInf;
  auto consider = [&](int j) {
    const double loss = projection_loss(w, x, prototypes.row(j), mode);
    if (loss < best_loss) {
      best_loss = loss;
      best = j;
    }
  };
  if (candidates) {
    for (int j : *candidates) consider(j);
  } else {
    for (int j = 0; j < q; ++j) consider(j);
  }
  return best;
}

std::vector<int> rank_labels(const Matrix& w, const double* x, const Matrix& prototypes,
                             LossMode mode, const std::vector<int>* candidates) {
  std::vector<std::pair<double, int>> scored;
  auto add = [&](int j) {
    scored.emplace_back(projection_loss(w, x, prototypes.row(j), mode), j);
  };
  if (candidates) {
    if (candidates->empty()) throw InvalidInputError("rank_labels: empty candidate set");
    for (int j : *candidates) add(j);
  } else {
    for (int j = 0; j < prototypes.rows(); ++j) add(j);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<int> order;
  order.reserve(scored.size());
  for (const auto& [loss, j] : scored) order.push_back(j);
  return order;
}

std::vector<int> predict_all(const Matrix& w, const Matrix& features, const Matrix& prototypes,
                             LossMode mode, const Candidates* candidates) {
  UnseenView view{&features, &prototypes};
  const Matrix losses =
      loss_matrix(w, view, mode, (candidates && !candidates->empty()) ? candidates : nullptr);
  std::vector<int> out(features.rows());
  parallel_chunks(static_cast<std::size_t>(features.rows()),
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      const double* row = losses.row(static_cast<int>(i));
                      out[i] = argmin_row(row, losses.cols());
                    }
                  });
  return out;
}

}  // namespace dipl
