#include "datd/worked_example.hpp"

#include <array>
#include <cmath>

namespace datd {

WorkedExample worked_example() {
  constexpr std::array<double, 5> kPrior{0.8, 0.8, 0.8, 0.95, 0.95};
  constexpr std::array<double, 5> kReport{1.0, 1.0, 1.0, 0.5, 0.4};
  WorkedExample ex;
  ex.task_value = 8.0;
  ex.config.gamma = 0.5;
  ex.config.single_pass = true;
  for (std::uint32_t i = 0; i < kPrior.size(); ++i) {
    const EntityId id{i + 1};
    ex.observations.push_back({id, kReport[i], true});
    // Nine earlier tasks, all attended.
    ex.ledger.set(id, LedgerEntry{kPrior[i], 2.5, 9, 9});
  }
  return ex;
}

std::vector<ExampleCheck> check_worked_example(double tolerance) {
  const WorkedExample ex = worked_example();
  const RoundResult result =
      run_datd_round(ex.observations, ex.ledger, ex.task_value, ex.config);
  const RoundBreakdown& b = result.estimate.breakdown;

  std::vector<ExampleCheck> out;
  auto add = [&](std::string name, double expected, double actual) {
    out.push_back({std::move(name), expected, actual,
                   std::abs(expected - actual) <= tolerance});
  };
  constexpr std::array<double, 5> kNext{0.617, 0.617, 0.617, 0.598, 0.480};
  constexpr std::array<double, 5> kLog{0.265, 0.265, 0.265, -0.015, -0.464};
  constexpr std::array<double, 5> kCred{0.641, 0.641, 0.641, 0.574, 0.462};

  add("provisional_truth", 0.757, b.provisional_truth);
  for (std::uint32_t i = 0; i < 5; ++i) {
    add("r_next[" + std::to_string(i + 1) + "]", kNext[i],
        b.sources.at(EntityId{i + 1}).estimated_next_credibility);
  }
  add("w[5]", 0.715, b.sources.at(EntityId{5}).aggregation_weight);
  add("final_truth", 0.774, result.estimate.value);
  for (std::uint32_t i = 0; i < 5; ++i) {
    add("d[" + std::to_string(i + 1) + "]", kLog[i],
        b.sources.at(EntityId{i + 1}).log_distance);
  }
  for (std::uint32_t i = 0; i < 5; ++i) {
    add("r_updated[" + std::to_string(i + 1) + "]", kCred[i],
        result.ledger.at(EntityId{i + 1}).credibility);
  }
  return out;
}

}  // namespace datd
