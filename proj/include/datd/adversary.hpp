#pragma once

// Reporting behaviour for data sources and oracle nodes. The high-value
// attacker is indistinguishable from an honest entity on low-value tasks and
// shaves the price it reports on high-value ones.

#include "datd/error.hpp"
#include "datd/rng.hpp"

namespace datd {

enum class BehaviorKind { honest, high_value_attacker };

enum class TamperDirection { down, symmetric };

struct BehaviorProfile {
  BehaviorKind kind = BehaviorKind::honest;
  /// Maximum relative tamper; reports move by u * truth, u ~ U(0, range).
  double tamper_range = 0.5;
  /// Tasks worth strictly more than this are high-value.
  double high_value_threshold = 100.0;
  /// Relative standard deviation of a data source's honest reporting error.
  double noise_fraction = 0.01;
  TamperDirection direction = TamperDirection::down;
};

/// Throws invalid-argument on a negative tamper range or noise fraction.
void validate(const BehaviorProfile& profile);

inline bool is_high_value(const BehaviorProfile& profile, double task_value) {
  return task_value > profile.high_value_threshold;
}

/// Relative multiplier applied to a report on a high-value task: 1 - u for
/// downward tampering, 1 - u or 1 + u with equal probability for symmetric.
/// Consumes exactly two draws.
double tamper_factor(const BehaviorProfile& profile, RngStream& rng);

/// A data source's price report for one task.
double report(const BehaviorProfile& profile, double truth, double task_value,
              RngStream& rng);

/// What an oracle node submits given its first-stage estimate. Nodes relay
/// honestly unless they attack a high-value task.
double node_report(const BehaviorProfile& profile, double first_td_estimate,
                   double task_value, RngStream& rng);

}  // namespace datd
