#pragma once

#include <string>
#include <vector>

#include "celm/error.hpp"
#include "celm/network.hpp"

namespace celm::metrics {

struct ClassAccuracy {
  ClassId label = 0;
  std::size_t correct = 0;
  std::size_t total = 0;

  double percent() const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total); }
  bool operator==(const ClassAccuracy&) const = default;
};

inline void check_lengths(const std::vector<ClassId>& pred, const std::vector<ClassId>& truth) {
  if (pred.empty() || truth.empty()) throw DomainError("accuracy: empty input");
  if (pred.size() != truth.size()) throw ContractViolation("accuracy: prediction and truth lengths differ");
}

/// eta_o: percentage of all samples classified correctly.
inline double overall_accuracy(const std::vector<ClassId>& pred, const std::vector<ClassId>& truth) {
  check_lengths(pred, truth);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i] ? 1 : 0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(truth.size());
}

inline std::vector<ClassAccuracy> per_class_accuracy(const std::vector<ClassId>& pred,
                                                     const std::vector<ClassId>& truth, std::size_t n_classes) {
  check_lengths(pred, truth);
  std::vector<ClassAccuracy> out(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) out[c].label = static_cast<ClassId>(c + 1);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 1 || static_cast<std::size_t>(truth[i]) > n_classes) {
      throw DomainError("accuracy: class id outside 1..N");
    }
    auto& slot = out[static_cast<std::size_t>(truth[i] - 1)];
    ++slot.total;
    if (pred[i] == truth[i]) ++slot.correct;
  }
  return out;
}

/// eta_a: mean of per-class accuracies over the classes present in truth.
/// Absent classes are skipped and reported through `warnings`.
inline double average_accuracy(const std::vector<ClassId>& pred, const std::vector<ClassId>& truth,
                               std::size_t n_classes, std::vector<std::string>* warnings = nullptr) {
  const auto classes = per_class_accuracy(pred, truth, n_classes);
  double sum = 0.0;
  std::size_t represented = 0;
  for (const auto& c : classes) {
    if (c.total == 0) {
      if (warnings) warnings->push_back("class " + std::to_string(c.label) + " absent from truth; excluded from eta_a");
      continue;
    }
    sum += c.percent();
    ++represented;
  }
  return sum / static_cast<double>(represented);
}

}  // namespace celm::metrics
