#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "datd/td_core.hpp"
#include "datd/worked_example.hpp"

using namespace datd;

namespace {

std::vector<Observation> obs(const std::vector<double>& values) {
  std::vector<Observation> out;
  for (std::uint32_t i = 0; i < values.size(); ++i) out.push_back({EntityId{i + 1}, values[i], true});
  return out;
}

PerEntity per(const std::vector<double>& values) {
  PerEntity out;
  for (std::uint32_t i = 0; i < values.size(); ++i) out[EntityId{i + 1}] = values[i];
  return out;
}

const std::vector<double> kReports{1.0, 1.0, 1.0, 0.5, 0.4};

}  // namespace

TEST(Aggregate, PriorWeights) {
  EXPECT_NEAR(aggregate(obs(kReports), per({0.8, 0.8, 0.8, 0.95, 0.95})), 0.757, 0.001);
}

TEST(Aggregate, BlendedWeights) {
  EXPECT_NEAR(aggregate(obs(kReports), per({0.7085, 0.7085, 0.7085, 0.774, 0.715})), 0.774,
              0.001);
}

TEST(Aggregate, ConstantValuesExact) {
  EXPECT_EQ(aggregate(obs({42.0, 42.0, 42.0}), per({0.1, 0.7, 0.33})), 42.0);
}

TEST(Aggregate, AbsentIgnored) {
  auto o = obs({1.0, 3.0, 100.0});
  o[2].present = false;
  EXPECT_DOUBLE_EQ(aggregate(o, per({1.0, 1.0, 0.5})), 2.0);
}

TEST(Aggregate, Errors) {
  auto o = obs({1.0});
  o[0].present = false;
  try {
    aggregate(o, per({1.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_round);
  }
  try {
    aggregate(obs({1.0, 2.0}), per({0.0, 0.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_weights);
  }
}

TEST(RawDeviations, Examples) {
  EXPECT_NEAR(raw_deviations(obs({0.4}), 0.774).at(EntityId{1}), 0.374, 1e-12);
  EXPECT_EQ(raw_deviations(obs({0.5}), 0.5).at(EntityId{1}), 0.0);
  EXPECT_NEAR(raw_deviations(obs({1.0}), 0.757).at(EntityId{1}), 0.243, 1e-12);
}

TEST(NormalizeDeviations, WorkedScenario) {
  const PerEntity n = normalize_deviations(per({0.226, 0.226, 0.226, 0.274, 0.374}), 1e-12);
  const std::vector<double> expected{0.1704, 0.1704, 0.1704, 0.2066, 0.2821};
  for (std::uint32_t i = 0; i < 5; ++i) EXPECT_NEAR(n.at(EntityId{i + 1}), expected[i], 0.001);
}

TEST(NormalizeDeviations, SingleAndZero) {
  EXPECT_EQ(normalize_deviations(per({0.3}), 1e-12).at(EntityId{1}), 1.0);
  const PerEntity z = normalize_deviations(per({0, 0, 0}), 1e-12);
  for (const auto& [id, v] : z) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(RmsDeviation, Examples) {
  EXPECT_NEAR(rms_deviation(per({0.1704, 0.1704, 0.1704, 0.2066, 0.2821})), 0.2046, 0.001);
  EXPECT_DOUBLE_EQ(rms_deviation(per({0.25, 0.25, 0.25, 0.25})), 0.25);
  EXPECT_EQ(rms_deviation(per({1.0})), 1.0);
}

TEST(LogDistance, Examples) {
  EXPECT_NEAR(log_distance(0.1704, 0.2046), 0.265, 0.005);
  EXPECT_NEAR(log_distance(0.2821, 0.2046), -0.464, 0.005);
  EXPECT_EQ(log_distance(0.3, 0.3), 0.0);
  EXPECT_THROW(log_distance(0.0, 0.3), Error);
  EXPECT_THROW(log_distance(0.3, -1.0), Error);
}

TEST(Pec, Examples) {
  EXPECT_DOUBLE_EQ(pec(-0.464, 8), -3.712);
  EXPECT_EQ(pec(0.0, 5000), 0.0);
  EXPECT_DOUBLE_EQ(pec(0.265, 8), 2.12);
}

TEST(ParticipationRate, Examples) {
  EXPECT_EQ(participation_rate(1, 1), 1.0);
  EXPECT_EQ(participation_rate(0, 5), 0.0);
  EXPECT_EQ(participation_rate(3, 4), 0.75);
  try {
    participation_rate(0, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_tasks);
  }
}

TEST(UpdateCredibility, Examples) {
  EXPECT_NEAR(update_credibility(1.0, 2.5 - 3.712, 8), 0.462, 0.001);
  EXPECT_NEAR(update_credibility(1.0, 2.5 + 2.12, 8), 0.641, 0.001);
  EXPECT_EQ(update_credibility(1.0, 0.0, 8), 0.5);
  EXPECT_EQ(sigmoid(0.0), 0.5);
}

TEST(UpdateCredibility, Saturation) {
  EXPECT_GT(sigmoid(-1e6), 0.0);
  EXPECT_LT(sigmoid(1e6), 1.0);
  EXPECT_LT(sigmoid(-3.0), sigmoid(-2.0));
}

TEST(EstimateNextCredibility, WorkedScenario) {
  const WorkedExample ex = worked_example();
  const PerEntity next = estimate_next_credibility(ex.observations, ex.ledger, ex.task_value);
  const std::vector<double> expected{0.617, 0.617, 0.617, 0.598, 0.480};
  for (std::uint32_t i = 0; i < 5; ++i) EXPECT_NEAR(next.at(EntityId{i + 1}), expected[i], 0.001);
}

TEST(EstimateNextCredibility, IdenticalReports) {
  CredibilityLedger ledger;
  for (std::uint32_t i = 1; i <= 3; ++i) ledger.set(EntityId{i}, {0.7, 4.0, 2, 2});
  const PerEntity next = estimate_next_credibility(obs({5.0, 5.0, 5.0}), ledger, 8.0);
  for (const auto& [id, r] : next) EXPECT_DOUBLE_EQ(r, sigmoid(4.0 / 8.0));
}

TEST(EstimateNextCredibility, UnknownEntity) {
  CredibilityLedger ledger;
  try {
    estimate_next_credibility(obs({1.0}), ledger, 8.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_entity);
  }
}

TEST(AggregationWeights, Examples) {
  CredibilityLedger ledger;
  ledger.set(EntityId{1}, {0.95, 0, 1, 1});
  EXPECT_NEAR(aggregation_weights(ledger, per({0.480}), 0.5).at(EntityId{1}), 0.715, 0.001);
  EXPECT_EQ(aggregation_weights(ledger, per({0.3}), 1.0).at(EntityId{1}), 0.95);
  EXPECT_EQ(aggregation_weights(ledger, per({0.617}), 0.0).at(EntityId{1}), 0.617);
}

TEST(DatdRound, WorkedScenario) {
  for (const auto& c : check_worked_example(0.001)) {
    EXPECT_TRUE(c.pass) << c.name << " expected " << c.expected << " got " << c.actual;
  }
}

TEST(DatdRound, SingleSource) {
  CredibilityLedger ledger;
  ledger.set(EntityId{1}, {0.6, 3.0, 4, 4});
  const RoundResult r = run_datd_round(obs({17.5}), ledger, 10.0, TDConfig{});
  EXPECT_EQ(r.estimate.value, 17.5);
  EXPECT_EQ(r.estimate.breakdown.sources.at(EntityId{1}).log_distance, 0.0);
  EXPECT_DOUBLE_EQ(r.ledger.at(EntityId{1}).credibility, sigmoid(1.0 * 3.0 / 10.0));
}

TEST(DatdRound, AbsentSourceOnlyAgesParticipation) {
  CredibilityLedger ledger;
  for (std::uint32_t i = 1; i <= 3; ++i) ledger.set(EntityId{i}, {0.5, 1.0, 1, 1});
  auto o = obs({1.0, 2.0, 3.0});
  o[2].present = false;
  const RoundResult r = run_datd_round(o, ledger, 5.0, TDConfig{});
  const LedgerEntry& e = r.ledger.at(EntityId{3});
  EXPECT_EQ(e.tasks_seen, 2u);
  EXPECT_EQ(e.participation_count, 1u);
  EXPECT_EQ(e.cpec, 1.0);
  EXPECT_EQ(e.credibility, 0.5);
  EXPECT_FALSE(r.estimate.breakdown.sources.contains(EntityId{3}));
}

TEST(DatdRound, RegistersUnknownSources) {
  const RoundResult r = run_datd_round(obs({1.0, 2.0}), CredibilityLedger{}, 5.0, TDConfig{});
  EXPECT_EQ(r.ledger.size(), 2u);
  EXPECT_DOUBLE_EQ(r.estimate.value, 1.5);
}

TEST(DatdRound, RejectsBadInput) {
  auto dup = obs({1.0, 2.0});
  dup[1].source = dup[0].source;
  EXPECT_THROW(run_datd_round(dup, CredibilityLedger{}, 5.0, TDConfig{}), Error);
  EXPECT_THROW(run_datd_round(obs({NAN}), CredibilityLedger{}, 5.0, TDConfig{}), Error);
  auto none = obs({1.0});
  none[0].present = false;
  try {
    run_datd_round(none, CredibilityLedger{}, 5.0, TDConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_round);
  }
  TDConfig bad;
  bad.gamma = 1.5;
  EXPECT_THROW(validate(bad), Error);
}

TEST(DatdRound, IteratedStaysConvexAndConverges) {
  const WorkedExample ex = worked_example();
  TDConfig cfg = ex.config;
  cfg.single_pass = false;
  const RoundResult r = run_datd_round(ex.observations, ex.ledger, ex.task_value, cfg);
  EXPECT_GE(r.estimate.value, 0.4);
  EXPECT_LE(r.estimate.value, 1.0);
  EXPECT_GE(r.estimate.iterations_used, 1);
  EXPECT_LE(r.estimate.iterations_used, cfg.max_iterations);
}

TEST(BaselineRound, Examples) {
  const WorkedExample ex = worked_example();
  EXPECT_NEAR(run_baseline_round(ex.observations, ex.ledger, TDConfig{}).estimate.value, 0.757,
              0.001);
  EXPECT_EQ(run_baseline_round(obs({3.25, 3.25}), CredibilityLedger{}, TDConfig{}).estimate.value,
            3.25);
}

TEST(ErrorNames, KebabCase) {
  EXPECT_EQ(error_name(ErrorCode::empty_round), "empty-round");
  EXPECT_EQ(error_name(ErrorCode::no_such_node), "no-such-node");
  EXPECT_EQ(std::string(Error(ErrorCode::log_domain, "x").what()), "log-domain: x");
}
