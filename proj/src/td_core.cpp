#include "datd/td_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace datd {

namespace {

// Credibility is kept inside (0,1) even when the logistic saturates in
// double precision. The upper bound leaves room for gamma-blends to stay
// below 1 after rounding.
constexpr double kMinCredibility = std::numeric_limits<double>::min();
constexpr double kMaxCredibility = 1.0 - 0x1p-40;

struct Scores {
  PerEntity raw;
  PerEntity normalized;
  double rms = 0.0;
  PerEntity distance;
};

void check_observations(std::span<const Observation> observations) {
  std::size_t present = 0;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& obs = observations[i];
    for (std::size_t j = i + 1; j < observations.size(); ++j) {
      if (observations[j].source == obs.source) {
        throw Error(ErrorCode::invalid_argument,
                    "duplicate source " + std::to_string(obs.source.value));
      }
    }
    if (obs.present) {
      if (!std::isfinite(obs.value)) {
        throw Error(ErrorCode::invalid_argument,
                    "non-finite value from source " +
                        std::to_string(obs.source.value));
      }
      ++present;
    }
  }
  if (present == 0) throw Error(ErrorCode::empty_round);
}

void check_task_value(double task_value) {
  if (!(task_value > 0.0) || !std::isfinite(task_value)) {
    throw Error(ErrorCode::invalid_argument, "task value must be positive");
  }
}

Scores score(std::span<const Observation> observations, double truth,
             double floor) {
  Scores s;
  s.raw = raw_deviations(observations, truth);
  s.normalized = normalize_deviations(s.raw, floor);
  s.rms = rms_deviation(s.normalized);
  const double first = s.normalized.begin()->second;
  const bool uniform = std::all_of(
      s.normalized.begin(), s.normalized.end(),
      [&](const auto& kv) { return kv.second == first; });
  for (const auto& [id, sigma] : s.normalized) {
    s.distance[id] = uniform ? 0.0 : log_distance(sigma, s.rms);
  }
  return s;
}

PerEntity historical_weights(std::span<const Observation> observations,
                             const CredibilityLedger& ledger) {
  PerEntity weights;
  for (const auto& obs : observations) {
    if (obs.present) weights[obs.source] = ledger.at(obs.source).credibility;
  }
  return weights;
}

// Credibility each present source would hold after this task, scored
// against `truth`. Participation counts include the current task.
PerEntity next_credibility_at(std::span<const Observation> observations,
                              const CredibilityLedger& ledger,
                              double task_value, double truth, double floor) {
  const Scores s = score(observations, truth, floor);
  PerEntity next;
  for (const auto& [id, d] : s.distance) {
    const auto& entry = ledger.at(id);
    const double rate =
        participation_rate(entry.participation_count + 1, entry.tasks_seen + 1);
    next[id] = update_credibility(rate, entry.cpec + pec(d, task_value),
                                  task_value);
  }
  return next;
}

// Applies one committed update to every published entity.
CredibilityLedger commit(std::span<const Observation> observations,
                         const CredibilityLedger& ledger, const Scores& s,
                         double task_value) {
  CredibilityLedger out = ledger;
  for (const auto& obs : observations) {
    LedgerEntry& entry = out.ensure(obs.source);
    ++entry.tasks_seen;
    if (!obs.present) continue;
    ++entry.participation_count;
    entry.cpec += pec(s.distance.at(obs.source), task_value);
    entry.credibility = update_credibility(
        participation_rate(entry.participation_count, entry.tasks_seen),
        entry.cpec, task_value);
  }
  return out;
}

void fill_scores(RoundBreakdown& breakdown, const Scores& s,
                 double task_value) {
  breakdown.rms_deviation = s.rms;
  for (const auto& [id, raw] : s.raw) {
    auto& src = breakdown.sources[id];
    src.raw_deviation = raw;
    src.normalized_deviation = s.normalized.at(id);
    src.log_distance = s.distance.at(id);
    src.pec = pec(src.log_distance, task_value);
  }
}

CredibilityLedger registered(std::span<const Observation> observations,
                             const CredibilityLedger& ledger) {
  CredibilityLedger out = ledger;
  for (const auto& obs : observations) out.ensure(obs.source);
  return out;
}

}  // namespace

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::empty_round: return "empty-round";
    case ErrorCode::degenerate_weights: return "degenerate-weights";
    case ErrorCode::log_domain: return "log-domain";
    case ErrorCode::no_tasks: return "no-tasks";
    case ErrorCode::unknown_entity: return "unknown-entity";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::no_sources: return "no-sources";
    case ErrorCode::phase_violation: return "phase-violation";
    case ErrorCode::duplicate_commit: return "duplicate-commit";
    case ErrorCode::duplicate_reveal: return "duplicate-reveal";
    case ErrorCode::no_commitment: return "no-commitment";
    case ErrorCode::unknown_node: return "unknown-node";
    case ErrorCode::round_failed: return "round-failed";
    case ErrorCode::undefined_ratio: return "undefined-ratio";
    case ErrorCode::no_such_node: return "no-such-node";
    case ErrorCode::config_error: return "config-error";
  }
  return "unknown";
}

const LedgerEntry& CredibilityLedger::at(EntityId id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw Error(ErrorCode::unknown_entity, std::to_string(id.value));
  }
  return it->second;
}

void validate(const TDConfig& config) {
  if (!(config.gamma >= 0.0 && config.gamma <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "gamma must lie in [0,1]");
  }
  if (!(config.deviation_floor > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "deviation floor must be > 0");
  }
  if (!(config.truth_tolerance > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "truth tolerance must be > 0");
  }
  if (config.max_iterations < 1) {
    throw Error(ErrorCode::invalid_argument, "max iterations must be >= 1");
  }
}

double aggregate(std::span<const Observation> observations,
                 const PerEntity& weights) {
  // Reduce in ascending entity-id order regardless of input order.
  PerEntity values;
  for (const auto& obs : observations) {
    if (obs.present) values[obs.source] = obs.value;
  }
  if (values.empty()) throw Error(ErrorCode::empty_round);

  double numerator = 0.0;
  double denominator = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& [id, value] : values) {
    auto it = weights.find(id);
    if (it == weights.end()) {
      throw Error(ErrorCode::unknown_entity,
                  "no weight for source " + std::to_string(id.value));
    }
    lo = std::min(lo, value);
    hi = std::max(hi, value);
    numerator += it->second * value;
    denominator += it->second;
  }
  if (!(denominator > 0.0)) throw Error(ErrorCode::degenerate_weights);
  // Rounding may push the quotient a hair outside the convex hull.
  return std::clamp(numerator / denominator, lo, hi);
}

PerEntity raw_deviations(std::span<const Observation> observations,
                         double truth) {
  PerEntity out;
  for (const auto& obs : observations) {
    if (obs.present) out[obs.source] = std::abs(obs.value - truth);
  }
  return out;
}

PerEntity normalize_deviations(const PerEntity& raw, double floor) {
  if (raw.empty()) throw Error(ErrorCode::empty_round);
  const double n = static_cast<double>(raw.size());
  const bool all_below = std::all_of(raw.begin(), raw.end(), [&](const auto& kv) {
    return kv.second <= floor;
  });
  PerEntity out;
  if (all_below) {
    for (const auto& [id, _] : raw) out[id] = 1.0 / n;
    return out;
  }
  double total = 0.0;
  for (const auto& [_, sigma] : raw) total += std::max(sigma, floor);
  for (const auto& [id, sigma] : raw) out[id] = std::max(sigma, floor) / total;
  return out;
}

double rms_deviation(const PerEntity& normalized) {
  if (normalized.empty()) throw Error(ErrorCode::empty_round);
  double squares = 0.0;
  for (const auto& [_, sigma] : normalized) squares += sigma * sigma;
  return std::sqrt(squares / static_cast<double>(normalized.size()));
}

double log_distance(double normalized, double rms) {
  if (!(normalized > 0.0) || !(rms > 0.0)) throw Error(ErrorCode::log_domain);
  if (normalized == rms) return 0.0;
  return std::log2(rms) - std::log2(normalized);
}

double participation_rate(std::uint64_t participation_count,
                          std::uint64_t tasks_seen) {
  if (tasks_seen == 0) throw Error(ErrorCode::no_tasks);
  return static_cast<double>(participation_count) /
         static_cast<double>(tasks_seen);
}

double sigmoid(double x) {
  // Branch on sign so the exponential never overflows.
  const double y = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                            : std::exp(x) / (1.0 + std::exp(x));
  return std::clamp(y, kMinCredibility, kMaxCredibility);
}

double update_credibility(double participation, double cpec,
                          double task_value) {
  return sigmoid(participation * cpec / task_value);
}

PerEntity estimate_next_credibility(std::span<const Observation> observations,
                                    const CredibilityLedger& ledger,
                                    double task_value,
                                    double deviation_floor) {
  check_observations(observations);
  check_task_value(task_value);
  const double provisional =
      aggregate(observations, historical_weights(observations, ledger));
  return next_credibility_at(observations, ledger, task_value, provisional,
                             deviation_floor);
}

PerEntity aggregation_weights(const CredibilityLedger& ledger,
                              const PerEntity& next_credibility, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "gamma must lie in [0,1]");
  }
  PerEntity weights;
  for (const auto& [id, next] : next_credibility) {
    weights[id] = gamma * ledger.at(id).credibility + (1.0 - gamma) * next;
  }
  return weights;
}

RoundResult run_datd_round(std::span<const Observation> observations,
                           const CredibilityLedger& ledger, double task_value,
                           const TDConfig& config) {
  validate(config);
  check_observations(observations);
  check_task_value(task_value);
  const CredibilityLedger working = registered(observations, ledger);

  RoundResult result;
  RoundBreakdown& breakdown = result.estimate.breakdown;

  double truth = aggregate(observations, historical_weights(observations, working));
  breakdown.provisional_truth = truth;

  PerEntity next;
  PerEntity weights;
  int iterations = 0;
  for (;;) {
    next = next_credibility_at(observations, working, task_value, truth,
                               config.deviation_floor);
    weights = aggregation_weights(working, next, config.gamma);
    const double updated = aggregate(observations, weights);
    ++iterations;
    const bool converged = std::abs(updated - truth) <=
                           config.truth_tolerance * std::max(1.0, std::abs(updated));
    truth = updated;
    if (config.single_pass || converged || iterations >= config.max_iterations) {
      break;
    }
  }

  const Scores final_scores = score(observations, truth, config.deviation_floor);
  fill_scores(breakdown, final_scores, task_value);
  for (auto& [id, src] : breakdown.sources) {
    src.estimated_next_credibility = next.at(id);
    src.aggregation_weight = weights.at(id);
  }
  result.estimate.value = truth;
  result.estimate.iterations_used = iterations;
  result.ledger = commit(observations, working, final_scores, task_value);
  return result;
}

RoundResult run_baseline_round(std::span<const Observation> observations,
                               const CredibilityLedger& ledger,
                               const TDConfig& config) {
  validate(config);
  check_observations(observations);
  const CredibilityLedger working = registered(observations, ledger);
  constexpr double kUnitValue = 1.0;

  RoundResult result;
  RoundBreakdown& breakdown = result.estimate.breakdown;
  const PerEntity weights = historical_weights(observations, working);
  const double truth = aggregate(observations, weights);
  breakdown.provisional_truth = truth;

  const Scores scores = score(observations, truth, config.deviation_floor);
  fill_scores(breakdown, scores, kUnitValue);
  result.ledger = commit(observations, working, scores, kUnitValue);
  // Classic TD has no look-ahead; report the committed credibility instead.
  for (auto& [id, src] : breakdown.sources) {
    src.estimated_next_credibility = result.ledger.at(id).credibility;
    src.aggregation_weight = weights.at(id);
  }
  result.estimate.value = truth;
  result.estimate.iterations_used = 1;
  return result;
}

}  // namespace datd
