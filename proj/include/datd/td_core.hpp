#pragma once

// Truth discovery mathematics: the classic history-weighted engine and the
// dynamically adjusted (DATD) engine that blends historical credibility with
// an estimate of next-round credibility and scales credibility changes by
// task value.
//
// Every function here is pure. Rounds take a ledger by const reference and
// hand back an updated copy, so a failed round never leaves a half-written
// ledger behind.

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "datd/error.hpp"

namespace datd {

struct EntityId {
  std::uint32_t value = 0;
  auto operator<=>(const EntityId&) const = default;
};

/// One source's report for one task. `value` is ignored when `present` is
/// false.
struct Observation {
  EntityId source;
  double value = 0.0;
  bool present = true;
};

/// Per-entity scalars, iterated in ascending entity-id order.
using PerEntity = std::map<EntityId, double>;

struct LedgerEntry {
  double credibility = 0.5;
  double cpec = 0.0;
  std::uint64_t participation_count = 0;
  std::uint64_t tasks_seen = 0;
};

class CredibilityLedger {
 public:
  using Map = std::map<EntityId, LedgerEntry>;

  bool contains(EntityId id) const { return entries_.contains(id); }
  /// Throws unknown-entity.
  const LedgerEntry& at(EntityId id) const;
  /// Inserts a fresh entry (cpec 0, credibility 0.5) when missing.
  LedgerEntry& ensure(EntityId id) { return entries_[id]; }
  void set(EntityId id, const LedgerEntry& entry) { entries_[id] = entry; }

  std::size_t size() const { return entries_.size(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

 private:
  Map entries_;
};

struct TDConfig {
  double gamma = 0.5;
  double deviation_floor = 1e-12;
  int max_iterations = 50;
  double truth_tolerance = 1e-9;
  bool single_pass = true;
};

/// Throws invalid-argument unless gamma is in [0,1], the floor and tolerance
/// are positive and max_iterations >= 1.
void validate(const TDConfig& config);

struct SourceBreakdown {
  double raw_deviation = 0.0;
  double normalized_deviation = 0.0;
  double log_distance = 0.0;
  double pec = 0.0;
  double estimated_next_credibility = 0.0;
  double aggregation_weight = 0.0;
};

struct RoundBreakdown {
  /// Present sources only.
  std::map<EntityId, SourceBreakdown> sources;
  double rms_deviation = 0.0;
  /// Truth aggregated with historical credibility alone (the Estimate pass).
  double provisional_truth = 0.0;
};

struct TruthEstimate {
  double value = 0.0;
  int iterations_used = 1;
  RoundBreakdown breakdown;
};

struct RoundResult {
  TruthEstimate estimate;
  CredibilityLedger ledger;
};

// ---- Building blocks ----

/// Weighted mean of present observations. Throws empty-round or
/// degenerate-weights.
double aggregate(std::span<const Observation> observations,
                 const PerEntity& weights);

/// |x_s - truth| for each present source.
PerEntity raw_deviations(std::span<const Observation> observations,
                         double truth);

/// Clamps each deviation below by `floor` and divides by the sum. When every
/// deviation is at or below the floor the result is uniform 1/n.
PerEntity normalize_deviations(const PerEntity& raw, double floor);

/// Root mean square of the normalized deviations.
double rms_deviation(const PerEntity& normalized);

/// log2(rms) - log2(normalized). Positive when the source sits closer to the
/// truth than the typical source. Throws log-domain on non-positive input.
double log_distance(double normalized, double rms);

/// Potential economic contribution of one source in one task.
inline double pec(double log_distance, double task_value) {
  return log_distance * task_value;
}

/// Fraction of tasks seen in which the entity took part. Throws no-tasks.
double participation_rate(std::uint64_t participation_count,
                          std::uint64_t tasks_seen);

/// Logistic function with results clamped into the open unit interval, so
/// that saturated inputs still yield a usable positive weight.
double sigmoid(double x);

/// sigmoid(participation * cpec / task_value). `cpec` must already include
/// the current round's contribution.
double update_credibility(double participation, double cpec,
                          double task_value);

/// One Estimate pass: aggregate with historical credibility, score every
/// present source against that provisional truth and return the credibility
/// each would receive. The ledger is not modified. Throws unknown-entity if a
/// present source has no ledger entry.
PerEntity estimate_next_credibility(std::span<const Observation> observations,
                                    const CredibilityLedger& ledger,
                                    double task_value,
                                    double deviation_floor = 1e-12);

/// gamma * r + (1 - gamma) * r_next for every entity in `next_credibility`.
PerEntity aggregation_weights(const CredibilityLedger& ledger,
                              const PerEntity& next_credibility, double gamma);

// ---- Rounds ----

/// Full DATD round. Sources missing from the ledger are registered with a
/// fresh entry before the round starts.
RoundResult run_datd_round(std::span<const Observation> observations,
                           const CredibilityLedger& ledger, double task_value,
                           const TDConfig& config);

/// Classic truth discovery: aggregate with historical credibility only and
/// update credibility with task value held at 1. Equivalent to a single-pass
/// DATD round with gamma = 1 and unit task value.
RoundResult run_baseline_round(std::span<const Observation> observations,
                               const CredibilityLedger& ledger,
                               const TDConfig& config);

}  // namespace datd
