#pragma once

// Dataset ingestion, label coding, min-max normalization and seeded
// train/test splitting.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "celm/error.hpp"
#include "celm/network.hpp"

namespace celm::data {

struct NormStats {
  Vector min;
  Vector max;

  bool operator==(const NormStats& o) const { return min == o.min && max == o.max; }
};

struct Dataset {
  Matrix features;              // t x M
  std::vector<ClassId> labels;  // 1..N
  std::size_t n_classes = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;  // class_names[c-1] is the source label of class c
  std::optional<NormStats> norm_stats;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
  Vector sample(std::size_t i) const { return features.row(static_cast<Eigen::Index>(i)).transpose(); }

  /// Rows picked by index, in the given order.
  Dataset subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.labels.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(rows[r]));
      out.labels.push_back(labels[rows[r]]);
    }
    out.n_classes = n_classes;
    out.feature_names = feature_names;
    out.class_names = class_names;
    out.norm_stats = norm_stats;
    return out;
  }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(n_classes, 0);
    for (ClassId c : labels) ++counts[static_cast<std::size_t>(c - 1)];
    return counts;
  }
};

inline CodedLabel code_labels(ClassId c, std::size_t n_classes) {
  return CodedLabel::from_class(c, n_classes);
}

struct CsvOptions {
  // Negative values count from the end; -1 is the last column.
  int label_column = -1;
  // nullopt: treat the first line as a header when any feature field fails
  // to parse as a number.
  std::optional<bool> header;
  // When non-empty, labels must come from this list (e.g. a test file read
  // with the training file's mapping).
  std::vector<std::string> known_classes;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string_view rest(line);
  while (true) {
    const auto comma = rest.find(',');
    fields.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return fields;
}

inline std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Parses comma-separated text. Labels map to 1..N in order of first
/// appearance (or through CsvOptions::known_classes).
inline Dataset parse_csv(std::istream& in, const CsvOptions& opts = {}) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    rows.push_back(detail::split_fields(line));
    line_numbers.push_back(line_no);
  }
  if (rows.empty()) throw ParseError("empty CSV input");

  const std::size_t width = rows.front().size();
  if (width < 2) throw ParseError("CSV needs at least one feature and one label column", line_numbers[0], 1);
  const int lc = opts.label_column < 0 ? static_cast<int>(width) + opts.label_column : opts.label_column;
  if (lc < 0 || static_cast<std::size_t>(lc) >= width) {
    throw ParseError("label column out of range", line_numbers[0], 1);
  }
  const auto label_col = static_cast<std::size_t>(lc);

  bool has_header = false;
  if (opts.header) {
    has_header = *opts.header;
  } else {
    for (std::size_t c = 0; c < width; ++c) {
      if (c != label_col && !detail::parse_double(rows.front()[c])) has_header = true;
    }
  }

  Dataset ds;
  const std::size_t first = has_header ? 1 : 0;
  for (std::size_t c = 0; c < width; ++c) {
    if (c == label_col) continue;
    ds.feature_names.push_back(has_header ? rows.front()[c] : "x" + std::to_string(ds.feature_names.size() + 1));
  }
  if (rows.size() <= first) throw ParseError("CSV has a header but no data rows");

  const auto n_rows = rows.size() - first;
  ds.features.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(width - 1));
  ds.class_names = opts.known_classes;
  std::map<std::string, ClassId> class_ids;
  for (std::size_t i = 0; i < ds.class_names.size(); ++i) {
    class_ids.emplace(ds.class_names[i], static_cast<ClassId>(i + 1));
  }
  const bool fixed_classes = !opts.known_classes.empty();

  for (std::size_t r = first; r < rows.size(); ++r) {
    const auto& fields = rows[r];
    if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()),
                       line_numbers[r], std::min(fields.size(), width) + 1);
    }
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_col) continue;
      const auto v = detail::parse_double(fields[c]);
      if (!v) throw ParseError("non-numeric feature '" + fields[c] + "'", line_numbers[r], c + 1);
      ds.features(static_cast<Eigen::Index>(r - first), col++) = *v;
    }
    const std::string& name = fields[label_col];
    auto it = class_ids.find(name);
    if (it == class_ids.end()) {
      if (fixed_classes) throw ParseError("unknown label '" + name + "'", line_numbers[r], label_col + 1);
      ds.class_names.push_back(name);
      it = class_ids.emplace(name, static_cast<ClassId>(ds.class_names.size())).first;
    }
    ds.labels.push_back(it->second);
  }
  ds.n_classes = ds.class_names.size();
  return ds;
}

inline Dataset load_csv(const std::string& path, const CsvOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file '" + path + "'");
  try {
    return parse_csv(in, opts);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

/// Per-feature min/max of the training data.
inline NormStats normalize_fit(const Dataset& train) {
  if (train.size() == 0) throw DomainError("normalize_fit: empty dataset");
  return {train.features.colwise().minCoeff().transpose(), train.features.colwise().maxCoeff().transpose()};
}

/// Affine map of [min,max] onto [-1,1]; constant features become 0.
inline Dataset normalize_apply(const Dataset& ds, const NormStats& stats) {
  if (stats.min.size() != ds.features.cols()) {
    throw ContractViolation("normalize_apply: statistics dimension differs from dataset");
  }
  Dataset out = ds;
  for (Eigen::Index c = 0; c < ds.features.cols(); ++c) {
    const double lo = stats.min(c);
    const double range = stats.max(c) - lo;
    if (range > 0.0) {
      out.features.col(c) = ((ds.features.col(c).array() - lo) * (2.0 / range) - 1.0).matrix();
    } else {
      out.features.col(c).setZero();
    }
  }
  out.norm_stats = stats;
  return out;
}

struct SplitSpec {
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 1;
  bool stratified = true;

  bool operator==(const SplitSpec&) const = default;
};

namespace detail {

// Proportional allocation of `total` over `available`: floors first, then
// one extra each to the largest classes (ties to the lowest id), capped by
// what each class has.
inline std::vector<std::size_t> allocate(std::size_t total, const std::vector<std::size_t>& available,
                                         std::size_t population) {
  std::vector<std::size_t> take(available.size(), 0);
  if (population == 0 || total == 0) return take;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < available.size(); ++c) {
    take[c] = std::min(available[c], total * available[c] / population);
    assigned += take[c];
  }
  std::vector<std::size_t> order(available.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return available[a] > available[b]; });
  while (assigned < total) {
    bool progressed = false;
    for (auto c : order) {
      if (assigned == total) break;
      if (take[c] < available[c]) {
        ++take[c];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) break;
  }
  return take;
}

}  // namespace detail

/// Seeded disjoint train/test split. Stratified splits allocate each class
/// proportionally; both halves keep the shuffled order.
inline std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
  if (spec.n_train + spec.n_test > ds.size()) {
    throw DomainError("split: requested " + std::to_string(spec.n_train + spec.n_test) + " rows from a dataset of " +
                      std::to_string(ds.size()));
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> perm(ds.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  if (!spec.stratified) {
    train_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(spec.n_train));
    test_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(spec.n_train),
                     perm.begin() + static_cast<std::ptrdiff_t>(spec.n_train + spec.n_test));
  } else {
    const auto counts = ds.class_counts();
    const auto train_take = detail::allocate(spec.n_train, counts, ds.size());
    std::vector<std::size_t> remaining(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c) remaining[c] = counts[c] - train_take[c];
    const auto test_take = detail::allocate(spec.n_test, remaining, ds.size() - spec.n_train);
    std::vector<std::size_t> seen_train(counts.size(), 0);
    std::vector<std::size_t> seen_test(counts.size(), 0);
    for (auto r : perm) {
      const auto c = static_cast<std::size_t>(ds.labels[r] - 1);
      if (seen_train[c] < train_take[c]) {
        ++seen_train[c];
        train_rows.push_back(r);
      } else if (seen_test[c] < test_take[c]) {
        ++seen_test[c];
        test_rows.push_back(r);
      }
    }
  }
  return {ds.subset(train_rows), ds.subset(test_rows)};
}

inline void to_json(nlohmann::json& j, const NormStats& s) {
  j = nlohmann::json{{"min", std::vector<double>(s.min.data(), s.min.data() + s.min.size())},
                     {"max", std::vector<double>(s.max.data(), s.max.data() + s.max.size())}};
}

inline void from_json(const nlohmann::json& j, NormStats& s) {
  const auto lo = j.at("min").get<std::vector<double>>();
  const auto hi = j.at("max").get<std::vector<double>>();
  s.min = Eigen::Map<const Vector>(lo.data(), static_cast<Eigen::Index>(lo.size()));
  s.max = Eigen::Map<const Vector>(hi.data(), static_cast<Eigen::Index>(hi.size()));
}

inline void to_json(nlohmann::json& j, const SplitSpec& s) {
  j = nlohmann::json{{"n_train", s.n_train}, {"n_test", s.n_test}, {"seed", s.seed}, {"stratified", s.stratified}};
}

inline void from_json(const nlohmann::json& j, SplitSpec& s) {
  s.n_train = j.at("n_train").get<std::size_t>();
  s.n_test = j.at("n_test").get<std::size_t>();
  s.seed = j.value("seed", std::uint64_t{1});
  s.stratified = j.value("stratified", true);
}

}  // namespace celm::data
