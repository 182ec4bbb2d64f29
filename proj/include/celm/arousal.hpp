#pragma once

// Curiosity-arousal toolkit: Wundt hedonic curve, Shannon entropy and
// attention spread. None of this depends on the classifier.

#include <cmath>
#include <numeric>
#include <span>
#include <string_view>

#include "celm/error.hpp"

namespace celm::arousal {

struct WundtParams {
  double r_max = 1.0;
  double p_max = 1.0;
  double rho_r = 10.0;
  double rho_p = 10.0;
  double r_min = 0.25;
  double p_min = 0.75;

  bool slopes_valid() const { return rho_r > 0.0 && rho_p > 0.0; }
  // Reward switches on before punishment, giving an inverted U.
  bool rise_then_fall() const { return slopes_valid() && r_min < p_min; }
};

struct SpreadParams {
  double sigma0 = 1.0;
  double k_b = 0.0;
  double k_f = 0.0;
  double t_f = 0.5;
};

enum class InterestZone { Boredom, Curiosity, Anxiety };

inline std::string_view to_string(InterestZone z) {
  switch (z) {
    case InterestZone::Boredom:
      return "boredom";
    case InterestZone::Curiosity:
      return "curiosity";
    case InterestZone::Anxiety:
      return "anxiety";
  }
  return "?";
}

namespace detail {
inline double logistic(double peak, double slope, double onset, double s) {
  return peak / (1.0 + std::exp(-slope * (s - onset)));
}
}  // namespace detail

/// Hedonic value of a stimulation level: reward sigmoid minus punishment
/// sigmoid.
inline double wundt_hedonic(double stimulation, const WundtParams& p) {
  if (!std::isfinite(stimulation)) {
    throw DomainError("wundt_hedonic: stimulation must be finite");
  }
  if (!p.slopes_valid()) {
    throw DomainError("wundt_hedonic: slopes must be positive");
  }
  const double reward = detail::logistic(p.r_max, p.rho_r, p.r_min, stimulation);
  const double punish = detail::logistic(p.p_max, p.rho_p, p.p_min, stimulation);
  return reward - punish;
}

inline constexpr double kProbabilitySumTolerance = 1e-9;

/// Entropy in bits, with 0*log2(0) taken as 0.
inline double shannon_entropy(std::span<const double> probs) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw DomainError("shannon_entropy: probabilities must be finite and non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw DomainError("shannon_entropy: probabilities must sum to 1");
  }
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

/// Entropy scaled by log2(n) into [0,1] so it can serve as a stimulation level.
inline double normalized_entropy(std::span<const double> probs) {
  if (probs.size() < 2) {
    throw DomainError("normalized_entropy: need at least two outcomes");
  }
  return shannon_entropy(probs) / std::log2(static_cast<double>(probs.size()));
}

/// Spread of the attention Gaussian: grows with boredom time and with the
/// squared gap between the success rate and the failure threshold.
inline double attention_spread(double boredom_time, double success_rate,
                               const SpreadParams& p) {
  if (!std::isfinite(boredom_time) || !std::isfinite(success_rate) || boredom_time < 0.0) {
    throw DomainError("attention_spread: inputs must be finite with boredom_time >= 0");
  }
  const double gap = p.t_f - success_rate;
  return p.sigma0 + p.k_b * boredom_time + p.k_f * gap * gap;
}

inline constexpr double kZoneGridStep = 1e-3;
inline constexpr double kDefaultZoneEps = 0.1;

/// Stimulation maximizing the hedonic value on the fixed 1e-3 grid over
/// [0,1]; the first maximum wins.
inline double wundt_argmax(const WundtParams& p) {
  constexpr int steps = 1000;
  double best_s = 0.0;
  double best_h = wundt_hedonic(0.0, p);
  for (int k = 1; k <= steps; ++k) {
    const double s = k * kZoneGridStep;
    const double h = wundt_hedonic(s, p);
    if (h > best_h) {
      best_h = h;
      best_s = s;
    }
  }
  return best_s;
}

inline InterestZone interest_zone(double stimulation, const WundtParams& p,
                                  double zone_eps = kDefaultZoneEps) {
  if (!p.rise_then_fall()) {
    throw DomainError("interest_zone: parameters must satisfy r_min < p_min");
  }
  if (!(zone_eps > 0.0)) {
    throw DomainError("interest_zone: zone_eps must be positive");
  }
  const double h = wundt_hedonic(stimulation, p);
  if (h >= zone_eps) return InterestZone::Curiosity;
  const double peak = wundt_argmax(p);
  if (stimulation < peak) return InterestZone::Boredom;
  if (stimulation > peak) return InterestZone::Anxiety;
  return InterestZone::Curiosity;
}

}  // namespace celm::arousal
