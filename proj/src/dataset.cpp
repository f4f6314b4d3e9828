#include "dipl/dataset.hpp"

#include "dipl/errors.hpp"

namespace dipl {

std::string to_string(LossMode mode) {
  switch (mode) {
    case LossMode::bidirectional: return "bidirectional";
    case LossMode::reverse_only: return "reverse_only";
    case LossMode::forward_only: return "forward_only";
  }
  return "bidirectional";
}

std::string to_string(MetricMode mode) {
  return mode == MetricMode::per_class ? "per_class" : "per_sample";
}

LossMode loss_mode_from_string(const std::string& s) {
  if (s == "bidirectional") return LossMode::bidirectional;
  if (s == "reverse_only") return LossMode::reverse_only;
  if (s == "forward_only") return LossMode::forward_only;
  throw InvalidInputError("unknown loss mode: " + s);
}

MetricMode metric_mode_from_string(const std::string& s) {
  if (s == "per_sample") return MetricMode::per_sample;
  if (s == "per_class") return MetricMode::per_class;
  throw InvalidInputError("unknown metric mode: " + s);
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::assignments_stable: return "assignments_stable";
    case Termination::w_converged: return "w_converged";
    case Termination::max_iters: return "max_iters";
  }
  return "max_iters";
}

void validate_seen(const SeenSet& seen) {
  if (seen.features.rows() < 1) throw InvalidInputError("seen set has no samples");
  if (seen.features.cols() < 1) throw InvalidInputError("feature dimension must be >= 1");
  if (seen.prototypes.rows() < 1) throw InvalidInputError("seen set has no classes");
  if (seen.prototypes.cols() < 1) throw InvalidInputError("semantic dimension must be >= 1");
  if (static_cast<int>(seen.labels.size()) != seen.features.rows())
    throw InvalidInputError("seen labels length does not match sample count");
  for (int label : seen.labels)
    if (label < 0 || label >= seen.prototypes.rows())
      throw InvalidInputError("seen label out of prototype range");
  if (!seen.features.all_finite() || !seen.prototypes.all_finite())
    throw InvalidInputError("seen set contains non-finite values");
}

DimSummary validate(const SeenSet& seen, const UnseenView& pool) {
  validate_seen(seen);
  DimSummary dims;
  dims.d = seen.features.cols();
  dims.k = seen.prototypes.cols();
  dims.p = seen.prototypes.rows();
  dims.n_seen = seen.features.rows();
  if (!pool.features || !pool.prototypes) return dims;
  if (pool.prototypes->rows() < 1) throw InvalidInputError("no unseen classes");
  if (pool.features->rows() > 0 && pool.features->cols() != dims.d)
    throw InvalidInputError("unseen feature dimension does not match seen");
  if (pool.prototypes->cols() != dims.k)
    throw InvalidInputError("unseen prototype dimension does not match seen");
  if (!pool.features->all_finite() || !pool.prototypes->all_finite())
    throw InvalidInputError("unseen pool contains non-finite values");
  dims.q = pool.prototypes->rows();
  dims.n_unseen = pool.features->rows();
  return dims;
}

DimSummary validate(const SeenSet& seen, const UnseenPool& pool) {
  DimSummary dims = validate(seen, pool.fit_view());
  if (pool.truth_labels) {
    if (static_cast<int>(pool.truth_labels->size()) != pool.features.rows())
      throw InvalidInputError("truth label count does not match unseen samples");
    for (int label : *pool.truth_labels)
      if (label < 0 || label >= pool.prototypes.rows())
        throw InvalidInputError("truth label out of prototype range");
  }
  return dims;
}

double gamma_weight(double alpha_t) {
  if (alpha_t < 0.0 || alpha_t >= 1.0)
    throw InvalidInputError("alpha_t must lie in [0, 1)");
  return alpha_t / (1.0 - alpha_t);
}

double lambda_weight(double beta, double alpha_t) {
  return beta * (1.0 + gamma_weight(alpha_t));
}

}  // namespace dipl
