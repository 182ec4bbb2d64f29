#pragma once

// Stimulus appraisal for the classifier: novelty, uncertainty, conflict and
// surprise of a labelled sample, and the learning strategy they select.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "celm/error.hpp"
#include "celm/network.hpp"

namespace celm {

struct CollativeSnapshot {
  double novelty = 0.0;
  double uncertainty = 0.0;
  double conflict = 0.0;
  double surprise = 0.0;
  ClassId predicted_class = 0;  // 0 when the network is empty
  ClassId true_class = 0;

  bool operator==(const CollativeSnapshot&) const = default;
};

enum class StrategyChoice { AddNeuron, DeleteNeuron, UpdateParams };

inline std::string_view to_string(StrategyChoice s) {
  switch (s) {
    case StrategyChoice::AddNeuron:
      return "add";
    case StrategyChoice::DeleteNeuron:
      return "delete";
    case StrategyChoice::UpdateParams:
      return "update";
  }
  return "?";
}

inline StrategyChoice strategy_from_string(std::string_view s) {
  if (s == "add") return StrategyChoice::AddNeuron;
  if (s == "delete") return StrategyChoice::DeleteNeuron;
  if (s == "update") return StrategyChoice::UpdateParams;
  throw DomainError("unknown strategy '" + std::string(s) + "'");
}

// Which quantity feeds the class posterior used by the uncertainty measure.
//   HingeError:      p = (e_c + 1) / 2 with e the truncated hinge error.
//   TruncatedOutput: p = (clamp(y_hat_c, -1, 1) + 1) / 2.
enum class PosteriorSource { HingeError, TruncatedOutput };

inline std::string_view to_string(PosteriorSource s) {
  return s == PosteriorSource::HingeError ? "hinge_error" : "truncated_output";
}

inline PosteriorSource posterior_source_from_string(std::string_view s) {
  if (s == "hinge_error") return PosteriorSource::HingeError;
  if (s == "truncated_output") return PosteriorSource::TruncatedOutput;
  throw DomainError("unknown posterior source '" + std::string(s) + "'");
}

struct CelmThresholds {
  double novelty_add = 0.3;
  double uncertainty = 0.2;
  double surprise = 0.5;
  double conflict = 0.2;
  double novelty_del = 0.5;
  // Separate surprise threshold for deletion; shares `surprise` when unset.
  std::optional<double> surprise_del;

  double deletion_surprise() const { return surprise_del.value_or(surprise); }

  /// Throws when a threshold leaves [0,1]; returns a warning for each value
  /// outside its recommended range.
  std::vector<std::string> validate() const {
    struct Check {
      const char* name;
      double value;
      double lo;
      double hi;
    };
    std::vector<Check> checks = {{"novelty_add", novelty_add, 0.1, 0.5},
                                 {"uncertainty", uncertainty, 0.1, 0.3},
                                 {"surprise", surprise, 0.2, 0.9},
                                 {"conflict", conflict, 0.1, 0.3},
                                 {"novelty_del", novelty_del, 0.1, 0.8}};
    if (surprise_del) checks.push_back({"surprise_del", *surprise_del, 0.2, 0.9});
    std::vector<std::string> warnings;
    for (const auto& c : checks) {
      if (!(c.value >= 0.0 && c.value <= 1.0)) {
        throw DomainError(std::string("threshold ") + c.name + " must lie in [0,1]");
      }
      if (c.value < c.lo || c.value > c.hi) {
        warnings.push_back(std::string("threshold ") + c.name + "=" + std::to_string(c.value) +
                           " outside recommended range [" + std::to_string(c.lo) + ", " +
                           std::to_string(c.hi) + "]");
      }
    }
    return warnings;
  }

  bool operator==(const CelmThresholds&) const = default;
};

/// One minus the mean kernel activation; 1 for an empty network.
inline double novelty(const Vector& x, const NetworkState& net) {
  if (net.empty()) return 1.0;
  double potential = 0.0;
  for (const auto& n : net.neurons) potential += rbf_activation(x, n);
  return 1.0 - potential / static_cast<double>(net.size());
}

inline double uncertainty(const Vector& e, ClassId c_hat) {
  return 1.0 - posterior(e(c_hat - 1));
}

inline double uncertainty_from_output(const Vector& y_hat, ClassId c_hat) {
  const double clipped = std::min(std::max(y_hat(c_hat - 1), -1.0), 1.0);
  return 1.0 - posterior(clipped);
}

/// Indices (0-based) of the largest and second-largest outputs, ties to the
/// lowest index.
inline std::pair<Eigen::Index, Eigen::Index> top_two(const Vector& y_hat) {
  const Eigen::Index first = predict_class(y_hat) - 1;
  Eigen::Index second = first == 0 ? 1 : 0;
  for (Eigen::Index j = 0; j < y_hat.size(); ++j) {
    if (j != first && y_hat(j) > y_hat(second)) second = j;
  }
  return {first, second};
}

inline double conflict(const Vector& y_hat) {
  if (y_hat.size() < 2) throw ContractViolation("conflict: need at least two outputs");
  const auto [first, second] = top_two(y_hat);
  const double a = y_hat(first);
  const double b = y_hat(second);
  if (!(a * b > 0.0)) return 0.0;
  return 1.0 - std::abs(a - b) / std::abs(a + b);
}

inline double surprise(const Vector& e, ClassId c, ClassId c_hat) {
  if (c == c_hat) return 0.0;
  return std::abs(e(c - 1) * e(c_hat - 1));
}

inline CollativeSnapshot appraise(const Vector& x, const CodedLabel& y, const NetworkState& net,
                                  PosteriorSource source = PosteriorSource::HingeError) {
  if (static_cast<std::size_t>(x.size()) != net.input_dim) {
    throw ContractViolation("appraise: input dimension " + std::to_string(x.size()) +
                            " differs from network input_dim " + std::to_string(net.input_dim));
  }
  if (y.size() != net.n_classes) {
    throw ContractViolation("appraise: label length differs from network class count");
  }
  CollativeSnapshot s;
  s.true_class = y.class_id();
  if (net.empty()) {
    s.novelty = 1.0;
    s.uncertainty = 1.0;
    return s;
  }
  const Vector h = hidden_row(x, net);
  const Vector y_hat = net.weights.transpose() * h;
  const Vector e = hinge_error(y_hat, y);
  s.predicted_class = predict_class(y_hat);
  s.novelty = 1.0 - h.mean();
  s.uncertainty = source == PosteriorSource::HingeError
                      ? uncertainty(e, s.predicted_class)
                      : uncertainty_from_output(y_hat, s.predicted_class);
  s.conflict = conflict(y_hat);
  s.surprise = surprise(e, s.true_class, s.predicted_class);
  return s;
}

/// Addition is tested first; deletion only when addition does not fire.
inline StrategyChoice select_strategy(const CollativeSnapshot& s, const CelmThresholds& th) {
  if (s.novelty > th.novelty_add && s.uncertainty > th.uncertainty && s.surprise > th.surprise) {
    return StrategyChoice::AddNeuron;
  }
  if (s.surprise > th.deletion_surprise() && s.conflict > th.conflict &&
      s.novelty < th.novelty_del) {
    return StrategyChoice::DeleteNeuron;
  }
  return StrategyChoice::UpdateParams;
}

}  // namespace celm
