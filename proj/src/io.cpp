#include "dipl/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dipl/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dipl {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double parse_double(std::string_view field, const std::string& path, int line) {
  // Trim spaces and a trailing carriage return.
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() &&
         (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
    field.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError(path + ":" + std::to_string(line) + ": cannot parse value '" +
                     std::string(field) + "'");
  if (!std::isfinite(value))
    throw ParseError(path + ":" + std::to_string(line) + ": non-finite value");
  return value;
}

}  // namespace

Matrix load_matrix(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<double> values;
  int cols = -1;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (pos >= text.size()) break;  // trailing newline
      throw ParseError(path + ":" + std::to_string(line_no) + ": blank line inside matrix");
    }
    int field_count = 0;
    std::size_t fpos = 0;
    while (true) {
      std::size_t comma = line.find(',', fpos);
      const std::string_view field =
          comma == std::string_view::npos ? line.substr(fpos) : line.substr(fpos, comma - fpos);
      values.push_back(parse_double(field, path, line_no));
      ++field_count;
      if (comma == std::string_view::npos) break;
      fpos = comma + 1;
    }
    if (cols == -1) {
      cols = field_count;
    } else if (field_count != cols) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": ragged row (" +
                       std::to_string(field_count) + " fields, expected " + std::to_string(cols) +
                       ")");
    }
  }
  if (cols <= 0 || values.empty()) throw ParseError(path + ": empty matrix");
  const int rows = static_cast<int>(values.size()) / cols;
  return Matrix(rows, cols, std::move(values));
}

void save_matrix(const std::string& path, const Matrix& m) {
  std::FILE* out = std::fopen(path.c_str(), "wb");
  if (!out) throw ParseError(path + ": cannot open for writing");
  char buf[64];
  for (int i = 0; i < m.rows(); ++i) {
    const double* row = m.row(i);
    for (int j = 0; j < m.cols(); ++j) {
      const int len = std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
      if (j > 0) std::fputc(',', out);
      std::fwrite(buf, 1, static_cast<std::size_t>(len), out);
    }
    std::fputc('\n', out);
  }
  if (std::fclose(out) != 0) throw ParseError(path + ": write failed");
}

std::vector<int> load_labels(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<int> labels;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (pos >= text.size()) break;
      throw ParseError(path + ":" + std::to_string(line_no) + ": blank line inside labels");
    }
    int value = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc() || ptr != line.data() + line.size())
      throw ParseError(path + ":" + std::to_string(line_no) + ": cannot parse label '" +
                       std::string(line) + "'");
    labels.push_back(value);
  }
  if (labels.empty()) throw ParseError(path + ": empty label file");
  return labels;
}

void save_labels(const std::string& path, const std::vector<int>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  for (int label : labels) out << label << '\n';
  if (!out) throw ParseError(path + ": write failed");
}

std::vector<std::vector<int>> load_int_rows(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<std::vector<int>> rows;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (pos >= text.size()) break;
      throw ParseError(path + ":" + std::to_string(line_no) + ": blank line");
    }
    std::vector<int> row;
    std::size_t fpos = 0;
    while (true) {
      std::size_t comma = line.find(',', fpos);
      const std::string_view field =
          comma == std::string_view::npos ? line.substr(fpos) : line.substr(fpos, comma - fpos);
      int value = 0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError(path + ":" + std::to_string(line_no) + ": cannot parse integer '" +
                         std::string(field) + "'");
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      fpos = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": empty file");
  return rows;
}

void save_int_rows(const std::string& path, const std::vector<std::vector<int>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out << ',';
      out << row[j];
    }
    out << '\n';
  }
  if (!out) throw ParseError(path + ": write failed");
}

namespace {

std::string require_string(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key) || !j[key].is_string())
    throw ParseError(path + ": manifest missing string field '" + key + "'");
  return j[key].get<std::string>();
}

std::string resolve(const fs::path& base, const std::string& rel) {
  fs::path p(rel);
  if (p.is_absolute()) return p.string();
  return (base / p).string();
}

}  // namespace

Manifest load_manifest(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  Manifest m;
  m.seen_features = resolve(base, require_string(j, "seen_features", path));
  m.seen_labels = resolve(base, require_string(j, "seen_labels", path));
  m.seen_prototypes = resolve(base, require_string(j, "seen_prototypes", path));
  m.unseen_features = resolve(base, require_string(j, "unseen_features", path));
  m.unseen_prototypes = resolve(base, require_string(j, "unseen_prototypes", path));
  if (j.contains("unseen_labels"))
    m.unseen_labels = resolve(base, require_string(j, "unseen_labels", path));
  if (j.contains("seen_test_features"))
    m.seen_test_features = resolve(base, require_string(j, "seen_test_features", path));
  if (j.contains("seen_test_labels"))
    m.seen_test_labels = resolve(base, require_string(j, "seen_test_labels", path));
  if (j.contains("normalize")) {
    if (!j["normalize"].is_boolean()) throw ParseError(path + ": 'normalize' must be boolean");
    m.normalize = j["normalize"].get<bool>();
  }
  if (j.contains("metadata")) {
    for (const auto& [key, value] : j["metadata"].items())
      m.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  return m;
}

void save_manifest(const std::string& path, const Manifest& manifest) {
  // Paths are written as given; callers pass paths relative to the manifest.
  json j;
  j["seen_features"] = manifest.seen_features;
  j["seen_labels"] = manifest.seen_labels;
  j["seen_prototypes"] = manifest.seen_prototypes;
  j["unseen_features"] = manifest.unseen_features;
  j["unseen_prototypes"] = manifest.unseen_prototypes;
  if (manifest.unseen_labels) j["unseen_labels"] = *manifest.unseen_labels;
  if (manifest.seen_test_features) j["seen_test_features"] = *manifest.seen_test_features;
  if (manifest.seen_test_labels) j["seen_test_labels"] = *manifest.seen_test_labels;
  j["normalize"] = manifest.normalize;
  if (!manifest.metadata.empty()) j["metadata"] = manifest.metadata;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << j.dump(2) << '\n';
  if (!out) throw ParseError(path + ": write failed");
}

void l2_normalize_rows(Matrix& m) {
  for (int i = 0; i < m.rows(); ++i) {
    double* row = m.row(i);
    double norm = 0.0;
    for (int j = 0; j < m.cols(); ++j) norm += row[j] * row[j];
    norm = std::sqrt(norm);
    if (norm <= 0.0) continue;
    for (int j = 0; j < m.cols(); ++j) row[j] /= norm;
  }
}

Dataset load_dataset(const Manifest& manifest, bool force_normalize) {
  Dataset data;
  data.seen.features = load_matrix(manifest.seen_features);
  data.seen.labels = load_labels(manifest.seen_labels);
  data.seen.prototypes = load_matrix(manifest.seen_prototypes);
  data.pool.features = load_matrix(manifest.unseen_features);
  data.pool.prototypes = load_matrix(manifest.unseen_prototypes);
  if (manifest.unseen_labels) data.pool.truth_labels = load_labels(*manifest.unseen_labels);
  if (manifest.seen_test_features) {
    data.seen_test_features = load_matrix(*manifest.seen_test_features);
    if (!manifest.seen_test_labels)
      throw ParseError("manifest has seen_test_features but no seen_test_labels");
    data.seen_test_labels = load_labels(*manifest.seen_test_labels);
  }

  data.normalized = manifest.normalize || force_normalize;
  if (data.normalized) {
    l2_normalize_rows(data.seen.features);
    l2_normalize_rows(data.seen.prototypes);
    l2_normalize_rows(data.pool.features);
    l2_normalize_rows(data.pool.prototypes);
    if (data.seen_test_features) l2_normalize_rows(*data.seen_test_features);
  }

  validate(data.seen, data.pool);
  if (data.seen_test_features) {
    if (data.seen_test_features->cols() != data.seen.features.cols())
      throw InvalidInputError("seen test feature dimension does not match seen");
    if (static_cast<int>(data.seen_test_labels->size()) != data.seen_test_features->rows())
      throw InvalidInputError("seen test label count does not match samples");
    for (int label : *data.seen_test_labels)
      if (label < 0 || label >= data.seen.prototypes.rows())
        throw InvalidInputError("seen test label out of range");
  }
  return data;
}

}  // namespace dipl
