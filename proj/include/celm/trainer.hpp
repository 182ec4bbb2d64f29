#pragma once

// Sequential C-ELM training: every sample is appraised, then drives exactly
// one of neuron addition, neuron deletion or an RLS parameter update.

#include <chrono>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "celm/curiosity.hpp"
#include "celm/data.hpp"
#include "celm/error.hpp"
#include "celm/network.hpp"
#include "celm/solver.hpp"

namespace celm {

struct CelmConfig {
  CelmThresholds thresholds;
  double impact_min = 0.5;
  double impact_max = 3.0;
  double ridge = solver::kDefaultRidge;
  double sv_tol = solver::kDefaultSvTol;
  std::uint64_t seed = 1;
  bool delete_by_predicted = true;
  bool shuffle = false;
  std::optional<std::size_t> max_neurons;
  PosteriorSource posterior = PosteriorSource::TruncatedOutput;
  // Check the normal-equations residual after every structural change.
  bool verify_structure = false;

  std::vector<std::string> validate() const {
    auto warnings = thresholds.validate();
    if (!(impact_min > 0.0) || !(impact_max >= impact_min)) {
      throw DomainError("impact range must satisfy 0 < impact_min <= impact_max");
    }
    if (!(ridge >= 0.0)) throw DomainError("ridge must be non-negative");
    if (!(sv_tol > 0.0)) throw DomainError("sv_tol must be positive");
    if (max_neurons && *max_neurons < 1) throw DomainError("max_neurons must be at least 1");
    return warnings;
  }

  bool operator==(const CelmConfig&) const = default;
};

struct StepLog {
  std::size_t index = 0;
  CollativeSnapshot snapshot;
  StrategyChoice chosen = StrategyChoice::UpdateParams;
  // What actually ran; differs from `chosen` when a structural change had
  // to fall back to a parameter update.
  StrategyChoice applied = StrategyChoice::UpdateParams;
  std::size_t k_before = 0;
  std::size_t k_after = 0;
  std::string note;

  bool operator==(const StepLog&) const = default;
};

struct TrainReport {
  CelmConfig config;
  std::vector<StepLog> steps;
  std::size_t additions = 0;
  std::size_t deletions = 0;
  std::size_t updates = 0;
  std::size_t final_k = 0;
  double wall_time_ms = 0.0;
  std::vector<std::string> warnings;
};

inline constexpr double kStructuralResidualTol = 1e-6;

class Trainer {
 public:
  Trainer(std::size_t input_dim, std::size_t n_classes, CelmConfig config)
      : config_(std::move(config)), net_(input_dim, n_classes), rng_(config_.seed) {
    if (input_dim == 0) throw ContractViolation("Trainer: input dimension must be positive");
    if (n_classes < 2) throw ContractViolation("Trainer: need at least two classes");
    warnings_ = config_.validate();
  }

  const NetworkState& network() const { return net_; }
  const CelmConfig& config() const { return config_; }
  const std::optional<solver::RlsState>& rls() const { return rls_; }
  std::size_t history_size() const { return inputs_.size(); }
  const std::vector<std::string>& warnings() const { return warnings_; }
  double last_structural_residual() const { return last_residual_; }

  Matrix history_inputs() const {
    Matrix x(static_cast<Eigen::Index>(inputs_.size()), static_cast<Eigen::Index>(net_.input_dim));
    for (std::size_t t = 0; t < inputs_.size(); ++t) x.row(static_cast<Eigen::Index>(t)) = inputs_[t].transpose();
    return x;
  }

  Matrix history_targets() const { return targets_matrix(targets_.size()); }

  void append_sample(const Vector& x, ClassId c) {
    if (static_cast<std::size_t>(x.size()) != net_.input_dim) {
      throw ContractViolation("sample has dimension " + std::to_string(x.size()) + ", expected " +
                              std::to_string(net_.input_dim));
    }
    if (c < 1 || static_cast<std::size_t>(c) > net_.n_classes) {
      throw ContractViolation("class id " + std::to_string(c) + " outside 1.." + std::to_string(net_.n_classes));
    }
    inputs_.push_back(x);
    targets_.push_back(data::code_labels(c, net_.n_classes));
  }

  /// Installs fixed neurons and solves the output weights over a boot chunk,
  /// which joins the history. Used for the plain-ELM baseline.
  void preseed(std::vector<HiddenNeuron> neurons, const Matrix& boot_inputs, const std::vector<ClassId>& boot_labels) {
    if (neurons.empty()) throw ContractViolation("preseed: need at least one neuron");
    if (boot_inputs.rows() != static_cast<Eigen::Index>(boot_labels.size()) || boot_labels.empty()) {
      throw ContractViolation("preseed: boot chunk must be non-empty and consistent");
    }
    for (const auto& n : neurons) {
      if (static_cast<std::size_t>(n.center.size()) != net_.input_dim || !(n.impact > 0.0)) {
        throw ContractViolation("preseed: invalid neuron");
      }
    }
    for (Eigen::Index t = 0; t < boot_inputs.rows(); ++t) {
      append_sample(boot_inputs.row(t).transpose(), boot_labels[static_cast<std::size_t>(t)]);
    }
    net_.neurons = std::move(neurons);
    rebuild_weights();
  }

  /// New neuron centred on x with label c; the sample must already be in the
  /// history. Returns false when max_neurons forbids growth.
  bool add_neuron(const Vector& x, ClassId c) {
    if (config_.max_neurons && net_.size() >= *config_.max_neurons) return false;
    std::uniform_real_distribution<double> impact(config_.impact_min, config_.impact_max);
    net_.neurons.push_back(HiddenNeuron{x, impact(rng_), c});
    rebuild_weights();
    return true;
  }

  /// Removes the neuron labelled target_class that fires most strongly for x.
  /// Returns false when no such neuron exists or the network would empty.
  bool delete_neuron(ClassId target_class, const Vector& x) {
    if (net_.size() <= 1) return false;
    std::optional<std::size_t> victim;
    double best = -1.0;
    for (std::size_t k = 0; k < net_.size(); ++k) {
      if (net_.neurons[k].label != target_class) continue;
      const double a = rbf_activation(x, net_.neurons[k]);
      if (a > best) {
        best = a;
        victim = k;
      }
    }
    if (!victim) return false;
    net_.neurons.erase(net_.neurons.begin() + static_cast<std::ptrdiff_t>(*victim));
    rebuild_weights();
    return true;
  }

  /// RLS step on the current sample (already in the history).
  void update_params(const Vector& x, const CodedLabel& y) {
    if (net_.empty()) throw EmptyNetworkError();
    if (!rls_) {
      // No usable P (singular at the last rebuild): fall back to the batch
      // solve over the whole history, which already holds this sample.
      rebuild_weights();
      return;
    }
    const Vector h = hidden_row(x, net_);
    try {
      rls_ = solver::rls_step(*rls_, h, y);
    } catch (const RlsBreakdown&) {
      reinit_rls_excluding_last();
      if (!rls_) {
        rebuild_weights();
        return;
      }
      try {
        rls_ = solver::rls_step(*rls_, h, y);
      } catch (const RlsBreakdown&) {
        throw NumericError("RLS update broke down twice at history size " + std::to_string(inputs_.size()));
      }
    }
    net_.weights = rls_->weights;
  }

  StepLog train_step(const Vector& x, ClassId c) {
    append_sample(x, c);
    const CodedLabel& y = targets_.back();
    StepLog log;
    log.index = inputs_.size() - 1;
    log.k_before = net_.size();
    log.snapshot = appraise(x, y, net_, config_.posterior);
    // An empty network always grows: its appraisal carries zero surprise,
    // which the strict addition test would never accept.
    log.chosen = net_.empty() ? StrategyChoice::AddNeuron : select_strategy(log.snapshot, config_.thresholds);
    log.applied = log.chosen;

    switch (log.chosen) {
      case StrategyChoice::AddNeuron:
        if (!add_neuron(x, c)) {
          log.note = "max_neurons reached; parameter update applied";
          log.applied = StrategyChoice::UpdateParams;
        }
        break;
      case StrategyChoice::DeleteNeuron: {
        const ClassId target = config_.delete_by_predicted ? log.snapshot.predicted_class : c;
        if (!delete_neuron(target, x)) {
          log.note = net_.size() <= 1 ? "deletion would empty the network; parameter update applied"
                                      : "no neuron carries the target class; parameter update applied";
          log.applied = StrategyChoice::UpdateParams;
        }
        break;
      }
      case StrategyChoice::UpdateParams:
        break;
    }
    if (log.applied == StrategyChoice::UpdateParams) {
      if (net_.empty()) {
        // Only reachable when growth is forbidden before the first neuron.
        throw EmptyNetworkError();
      }
      update_params(x, y);
    }
    log.k_after = net_.size();
    return log;
  }

 private:
  Matrix targets_matrix(std::size_t rows) const {
    Matrix y(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(net_.n_classes));
    for (std::size_t t = 0; t < rows; ++t) y.row(static_cast<Eigen::Index>(t)) = targets_[t].values().transpose();
    return y;
  }

  Matrix hidden_over(std::size_t rows) const {
    Matrix h(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(net_.size()));
    for (std::size_t t = 0; t < rows; ++t) h.row(static_cast<Eigen::Index>(t)) = hidden_row(inputs_[t], net_).transpose();
    return h;
  }

  // Batch solve over the full history after a structural change; P is
  // re-initialized from the same data and carries the minimal-norm weights.
  void rebuild_weights() {
    const Matrix h = hidden_over(inputs_.size());
    const Matrix y = targets_matrix(inputs_.size());
    net_.weights = solver::pinv_solve(h, y, config_.sv_tol);
    try {
      auto state = solver::rls_init(h, y, config_.ridge);
      state.weights = net_.weights;
      rls_ = std::move(state);
    } catch (const SingularityError&) {
      rls_.reset();
    }
    if (config_.verify_structure) {
      last_residual_ = solver::normal_residual(h, net_.weights, y);
      const double bound = kStructuralResidualTol * (1.0 + (h.transpose() * y).norm());
      if (!(last_residual_ <= bound)) {
        throw NumericError("normal-equations residual " + std::to_string(last_residual_) + " exceeds " +
                           std::to_string(bound));
      }
    }
  }

  void reinit_rls_excluding_last() {
    const std::size_t rows = inputs_.size() - 1;
    if (rows == 0) {
      rls_.reset();
      return;
    }
    try {
      rls_ = solver::rls_init(hidden_over(rows), targets_matrix(rows), config_.ridge);
    } catch (const SingularityError&) {
      rls_.reset();
    }
  }

  CelmConfig config_;
  NetworkState net_;
  std::mt19937_64 rng_;
  std::optional<solver::RlsState> rls_;
  std::vector<Vector> inputs_;
  std::vector<CodedLabel> targets_;
  std::vector<std::string> warnings_;
  double last_residual_ = 0.0;
};

struct FitResult {
  NetworkState network;
  TrainReport report;
};

namespace detail {

inline std::vector<std::size_t> stream_order(std::size_t n, const CelmConfig& config) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (config.shuffle) {
    // Separate stream from the trainer's impact draws.
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

inline void tally(TrainReport& report, const StepLog& log) {
  switch (log.applied) {
    case StrategyChoice::AddNeuron:
      ++report.additions;
      break;
    case StrategyChoice::DeleteNeuron:
      ++report.deletions;
      break;
    case StrategyChoice::UpdateParams:
      ++report.updates;
      break;
  }
  if (!log.note.empty()) report.warnings.push_back("step " + std::to_string(log.index) + ": " + log.note);
}

}  // namespace detail

/// Folds train_step over the stream, starting from zero hidden neurons.
inline FitResult fit(const data::Dataset& stream, const CelmConfig& config) {
  if (stream.size() == 0) throw DomainError("fit: empty training stream");
  const auto start = std::chrono::steady_clock::now();
  Trainer trainer(stream.dim(), stream.n_classes, config);
  TrainReport report;
  report.config = config;
  report.warnings = trainer.warnings();
  report.steps.reserve(stream.size());
  for (auto i : detail::stream_order(stream.size(), config)) {
    auto log = trainer.train_step(stream.sample(i), stream.labels[i]);
    detail::tally(report, log);
    report.steps.push_back(std::move(log));
  }
  report.final_k = trainer.network().size();
  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {trainer.network(), std::move(report)};
}

/// Thresholds no appraisal can exceed (surprise <= 1 with strict '>'), so
/// only parameter updates ever run.
inline CelmThresholds degenerate_thresholds() {
  CelmThresholds th;
  th.surprise = 1.0;
  th.surprise_del = 1.0;
  return th;
}

/// Plain RBF-ELM baseline through the same trainer: `hidden` centres drawn
/// from the stream, weights solved on a boot chunk of `boot` samples (0 means
/// `hidden`), the rest streamed through RLS updates under degenerate
/// thresholds.
inline FitResult fit_elm_baseline(const data::Dataset& stream, CelmConfig config, std::size_t hidden,
                                  std::size_t boot = 0) {
  if (stream.size() == 0) throw DomainError("fit_elm_baseline: empty training stream");
  if (hidden == 0) throw DomainError("fit_elm_baseline: need at least one hidden neuron");
  const auto start = std::chrono::steady_clock::now();
  config.thresholds = degenerate_thresholds();
  hidden = std::min(hidden, stream.size());
  boot = std::min(std::max(boot, hidden), stream.size());
  const auto order = detail::stream_order(stream.size(), config);

  std::mt19937_64 rng(config.seed ^ 0x5bd1e995ULL);
  std::vector<std::size_t> centre_rows(stream.size());
  std::iota(centre_rows.begin(), centre_rows.end(), 0);
  std::shuffle(centre_rows.begin(), centre_rows.end(), rng);
  std::uniform_real_distribution<double> impact(config.impact_min, config.impact_max);
  std::vector<HiddenNeuron> neurons;
  for (std::size_t k = 0; k < hidden; ++k) {
    const auto r = centre_rows[k];
    neurons.push_back(HiddenNeuron{stream.sample(r), impact(rng), stream.labels[r]});
  }

  Trainer trainer(stream.dim(), stream.n_classes, config);
  Matrix boot_inputs(static_cast<Eigen::Index>(boot), static_cast<Eigen::Index>(stream.dim()));
  std::vector<ClassId> boot_labels;
  for (std::size_t t = 0; t < boot; ++t) {
    boot_inputs.row(static_cast<Eigen::Index>(t)) = stream.features.row(static_cast<Eigen::Index>(order[t]));
    boot_labels.push_back(stream.labels[order[t]]);
  }
  trainer.preseed(std::move(neurons), boot_inputs, boot_labels);

  TrainReport report;
  report.config = config;
  for (std::size_t t = boot; t < order.size(); ++t) {
    auto log = trainer.train_step(stream.sample(order[t]), stream.labels[order[t]]);
    detail::tally(report, log);
    report.steps.push_back(std::move(log));
  }
  report.final_k = trainer.network().size();
  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {trainer.network(), std::move(report)};
}

inline std::vector<ClassId> predict_all(const NetworkState& net, const data::Dataset& ds) {
  std::vector<ClassId> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(predict_class(predict_raw(ds.sample(i), net)));
  return out;
}

// JSON --------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const CelmThresholds& th) {
  j = nlohmann::json{{"novelty_add", th.novelty_add},
                     {"uncertainty", th.uncertainty},
                     {"surprise", th.surprise},
                     {"conflict", th.conflict},
                     {"novelty_del", th.novelty_del}};
  j["surprise_del"] = th.surprise_del ? nlohmann::json(*th.surprise_del) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, CelmThresholds& th) {
  const CelmThresholds d;
  th.novelty_add = j.value("novelty_add", d.novelty_add);
  th.uncertainty = j.value("uncertainty", d.uncertainty);
  th.surprise = j.value("surprise", d.surprise);
  th.conflict = j.value("conflict", d.conflict);
  th.novelty_del = j.value("novelty_del", d.novelty_del);
  if (j.contains("surprise_del") && !j.at("surprise_del").is_null()) {
    th.surprise_del = j.at("surprise_del").get<double>();
  } else {
    th.surprise_del.reset();
  }
}

inline void to_json(nlohmann::json& j, const CelmConfig& c) {
  j = nlohmann::json{{"thresholds", c.thresholds},
                     {"impact_min", c.impact_min},
                     {"impact_max", c.impact_max},
                     {"ridge", c.ridge},
                     {"sv_tol", c.sv_tol},
                     {"seed", c.seed},
                     {"delete_by_predicted", c.delete_by_predicted},
                     {"shuffle", c.shuffle},
                     {"posterior", to_string(c.posterior)},
                     {"verify_structure", c.verify_structure}};
  j["max_neurons"] = c.max_neurons ? nlohmann::json(*c.max_neurons) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, CelmConfig& c) {
  const CelmConfig d;
  c.thresholds = j.contains("thresholds") ? j.at("thresholds").get<CelmThresholds>() : d.thresholds;
  c.impact_min = j.value("impact_min", d.impact_min);
  c.impact_max = j.value("impact_max", d.impact_max);
  c.ridge = j.value("ridge", d.ridge);
  c.sv_tol = j.value("sv_tol", d.sv_tol);
  c.seed = j.value("seed", d.seed);
  c.delete_by_predicted = j.value("delete_by_predicted", d.delete_by_predicted);
  c.shuffle = j.value("shuffle", d.shuffle);
  c.posterior = posterior_source_from_string(j.value("posterior", std::string(to_string(d.posterior))));
  c.verify_structure = j.value("verify_structure", d.verify_structure);
  if (j.contains("max_neurons") && !j.at("max_neurons").is_null()) {
    c.max_neurons = j.at("max_neurons").get<std::size_t>();
  } else {
    c.max_neurons.reset();
  }
  c.validate();
}

inline void to_json(nlohmann::json& j, const StepLog& s) {
  j = nlohmann::json{{"index", s.index},
                     {"novelty", s.snapshot.novelty},
                     {"uncertainty", s.snapshot.uncertainty},
                     {"conflict", s.snapshot.conflict},
                     {"surprise", s.snapshot.surprise},
                     {"predicted", s.snapshot.predicted_class},
                     {"truth", s.snapshot.true_class},
                     {"strategy", to_string(s.chosen)},
                     {"applied", to_string(s.applied)},
                     {"k_before", s.k_before},
                     {"k_after", s.k_after}};
  if (!s.note.empty()) j["note"] = s.note;
}

inline void from_json(const nlohmann::json& j, StepLog& s) {
  s.index = j.at("index").get<std::size_t>();
  s.snapshot.novelty = j.at("novelty").get<double>();
  s.snapshot.uncertainty = j.at("uncertainty").get<double>();
  s.snapshot.conflict = j.at("conflict").get<double>();
  s.snapshot.surprise = j.at("surprise").get<double>();
  s.snapshot.predicted_class = j.at("predicted").get<ClassId>();
  s.snapshot.true_class = j.at("truth").get<ClassId>();
  s.chosen = strategy_from_string(j.at("strategy").get<std::string>());
  s.applied = strategy_from_string(j.at("applied").get<std::string>());
  s.k_before = j.at("k_before").get<std::size_t>();
  s.k_after = j.at("k_after").get<std::size_t>();
  s.note = j.value("note", std::string());
}

inline void to_json(nlohmann::json& j, const TrainReport& r) {
  j = nlohmann::json{{"config", r.config},         {"steps", r.steps},       {"additions", r.additions},
                     {"deletions", r.deletions},   {"updates", r.updates},   {"final_k", r.final_k},
                     {"wall_time_ms", r.wall_time_ms}, {"warnings", r.warnings}};
}

inline void from_json(const nlohmann::json& j, TrainReport& r) {
  r.config = j.at("config").get<CelmConfig>();
  r.steps = j.at("steps").get<std::vector<StepLog>>();
  r.additions = j.at("additions").get<std::size_t>();
  r.deletions = j.at("deletions").get<std::size_t>();
  r.updates = j.at("updates").get<std::size_t>();
  r.final_k = j.at("final_k").get<std::size_t>();
  r.wall_time_ms = j.at("wall_time_ms").get<double>();
  r.warnings = j.value("warnings", std::vector<std::string>{});
}

}  // namespace celm
