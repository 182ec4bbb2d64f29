#pragma once

// Single-hidden-layer feed-forward network with Gaussian RBF hidden units.
// Class ids are 1-based throughout the public API.

#include <Eigen/Dense>
#include <cmath>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "celm/error.hpp"

namespace celm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ClassId = int;

struct HiddenNeuron {
  Vector center;
  double impact = 1.0;
  ClassId label = 1;

  bool operator==(const HiddenNeuron& o) const {
    return center == o.center && impact == o.impact && label == o.label;
  }
};

/// Target vector with +1 at the true class and -1 elsewhere.
class CodedLabel {
 public:
  static CodedLabel from_class(ClassId c, std::size_t n_classes) {
    if (c < 1 || static_cast<std::size_t>(c) > n_classes) {
      throw DomainError("class id " + std::to_string(c) + " outside 1.." +
                        std::to_string(n_classes));
    }
    Vector v = Vector::Constant(static_cast<Eigen::Index>(n_classes), -1.0);
    v(c - 1) = 1.0;
    return CodedLabel(std::move(v), c);
  }

  static CodedLabel from_values(const Vector& v) {
    ClassId hot = 0;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (v(j) == 1.0) {
        if (hot != 0) throw DomainError("coded label has more than one +1 entry");
        hot = static_cast<ClassId>(j + 1);
      } else if (v(j) != -1.0) {
        throw DomainError("coded label entries must be -1 or +1");
      }
    }
    if (hot == 0) throw DomainError("coded label has no +1 entry");
    return CodedLabel(v, hot);
  }

  const Vector& values() const { return values_; }
  ClassId class_id() const { return class_id_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  bool operator==(const CodedLabel& o) const { return values_ == o.values_; }

 private:
  CodedLabel(Vector v, ClassId c) : values_(std::move(v)), class_id_(c) {}
  Vector values_;
  ClassId class_id_;
};

struct NetworkState {
  std::size_t input_dim = 0;
  std::size_t n_classes = 0;
  std::vector<HiddenNeuron> neurons;
  Matrix weights;  // K x N

  NetworkState() = default;
  NetworkState(std::size_t m, std::size_t n)
      : input_dim(m), n_classes(n), weights(0, static_cast<Eigen::Index>(n)) {}

  std::size_t size() const { return neurons.size(); }
  bool empty() const { return neurons.empty(); }

  bool operator==(const NetworkState& o) const {
    return input_dim == o.input_dim && n_classes == o.n_classes && neurons == o.neurons &&
           weights.rows() == o.weights.rows() && weights.cols() == o.weights.cols() &&
           weights == o.weights;
  }
};

// exp(-b * ||x - a||^2)
inline double rbf_activation(const Vector& x, const HiddenNeuron& neuron) {
  if (x.size() != neuron.center.size()) {
    throw ContractViolation("rbf_activation: input has dimension " +
                            std::to_string(x.size()) + ", center has " +
                            std::to_string(neuron.center.size()));
  }
  return std::exp(-neuron.impact * (x - neuron.center).squaredNorm());
}

inline Vector hidden_row(const Vector& x, const NetworkState& net) {
  if (net.empty()) throw EmptyNetworkError();
  Vector h(static_cast<Eigen::Index>(net.size()));
  for (std::size_t k = 0; k < net.size(); ++k) {
    h(static_cast<Eigen::Index>(k)) = rbf_activation(x, net.neurons[k]);
  }
  return h;
}

/// Hidden-layer output matrix for a batch of inputs stored row-wise.
inline Matrix hidden_matrix(const Matrix& inputs, const NetworkState& net) {
  if (net.empty()) throw EmptyNetworkError();
  Matrix h(inputs.rows(), static_cast<Eigen::Index>(net.size()));
  for (Eigen::Index t = 0; t < inputs.rows(); ++t) {
    const Vector x = inputs.row(t).transpose();
    for (std::size_t k = 0; k < net.size(); ++k) {
      h(t, static_cast<Eigen::Index>(k)) = rbf_activation(x, net.neurons[k]);
    }
  }
  return h;
}

inline Vector predict_raw(const Vector& x, const NetworkState& net) {
  const Vector h = hidden_row(x, net);
  return net.weights.transpose() * h;
}

/// Argmax with ties going to the lowest index.
inline ClassId predict_class(const Vector& y_hat) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < y_hat.size(); ++j) {
    if (y_hat(j) > y_hat(best)) best = j;
  }
  return static_cast<ClassId>(best + 1);
}

/// Truncated hinge-loss error per output.
inline Vector hinge_error(const Vector& y_hat, const CodedLabel& y) {
  const Vector& target = y.values();
  if (y_hat.size() != target.size()) {
    throw ContractViolation("hinge_error: output and label lengths differ");
  }
  Vector e(y_hat.size());
  for (Eigen::Index j = 0; j < y_hat.size(); ++j) {
    if (y_hat(j) * target(j) > 1.0) {
      e(j) = 0.0;
    } else {
      e(j) = std::min(std::max(y_hat(j) - target(j), -1.0), 1.0);
    }
  }
  return e;
}

inline double posterior(double e_j) { return (e_j + 1.0) / 2.0; }

inline void to_json(nlohmann::json& j, const HiddenNeuron& n) {
  j = nlohmann::json{{"center", std::vector<double>(n.center.data(), n.center.data() + n.center.size())},
                     {"impact", n.impact},
                     {"label", n.label}};
}

inline void from_json(const nlohmann::json& j, HiddenNeuron& n) {
  const auto c = j.at("center").get<std::vector<double>>();
  n.center = Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
  n.impact = j.at("impact").get<double>();
  n.label = j.at("label").get<ClassId>();
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index cols_if_empty) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, cols_if_empty);
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != cols) {
      throw ContractViolation("ragged matrix in JSON");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

inline void to_json(nlohmann::json& j, const NetworkState& net) {
  j = nlohmann::json{{"input_dim", net.input_dim},
                     {"n_classes", net.n_classes},
                     {"neurons", net.neurons},
                     {"weights", matrix_to_json(net.weights)}};
}

inline void from_json(const nlohmann::json& j, NetworkState& net) {
  net.input_dim = j.at("input_dim").get<std::size_t>();
  net.n_classes = j.at("n_classes").get<std::size_t>();
  net.neurons = j.at("neurons").get<std::vector<HiddenNeuron>>();
  net.weights = matrix_from_json(j.at("weights"), static_cast<Eigen::Index>(net.n_classes));
  if (static_cast<std::size_t>(net.weights.rows()) != net.neurons.size()) {
    throw ContractViolation("weights row count must equal the number of neurons");
  }
  for (const auto& n : net.neurons) {
    if (static_cast<std::size_t>(n.center.size()) != net.input_dim) {
      throw ContractViolation("neuron center dimension differs from input_dim");
    }
  }
}

}  // namespace celm
