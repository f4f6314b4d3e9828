#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dipl/dataset.hpp"
#include "dipl/matrix.hpp"

namespace dipl {

/// CSV matrix: UTF-8, no header, one row per line, comma-separated decimal
/// doubles. Ragged rows and non-finite values are rejected with the offending
/// line number.
Matrix load_matrix(const std::string& path);

/// Writes with 17 significant digits so a save/load round trip is exact.
void save_matrix(const std::string& path, const Matrix& m);

/// Label files hold one 0-based integer per line.
std::vector<int> load_labels(const std::string& path);
void save_labels(const std::string& path, const std::vector<int>& labels);

/// Ranked-prediction rows: comma-separated integers, one row per sample.
/// Rows may differ in length (candidate-restricted predictions).
std::vector<std::vector<int>> load_int_rows(const std::string& path);
void save_int_rows(const std::string& path, const std::vector<std::vector<int>>& rows);

/// Dataset manifest: file paths are resolved relative to the manifest's
/// directory. The optional seen-test pair feeds the generalized setting.
struct Manifest {
  std::string seen_features;
  std::string seen_labels;
  std::string seen_prototypes;
  std::string unseen_features;
  std::string unseen_prototypes;
  std::optional<std::string> unseen_labels;
  std::optional<std::string> seen_test_features;
  std::optional<std::string> seen_test_labels;
  bool normalize = false;
  std::map<std::string, std::string> metadata;
};

Manifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const Manifest& manifest);

struct Dataset {
  SeenSet seen;
  UnseenPool pool;
  std::optional<Matrix> seen_test_features;
  std::optional<std::vector<int>> seen_test_labels;
  bool normalized = false;
};

/// Loads every file referenced by the manifest, applies row normalization
/// when requested (manifest flag or force_normalize), and validates the
/// dimensions before returning.
Dataset load_dataset(const Manifest& manifest, bool force_normalize = false);

/// In-place L2 normalization of each row; zero rows are left untouched.
void l2_normalize_rows(Matrix& m);

}  // namespace dipl
