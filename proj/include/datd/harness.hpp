#pragma once

// Scenario generation and paired execution of the baseline and DATD schemes
// over identical task streams and identical adversary draws.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "datd/adversary.hpp"
#include "datd/protocol.hpp"

namespace datd {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct ScenarioConfig {
  int n_sources = 20;
  int n_nodes = 20;
  double alpha = 0.4;  // fraction of malicious sources
  double beta = 0.3;   // fraction of malicious nodes
  double gamma = 0.5;
  double omega = 0.5;  // tamper range
  double tau = 0.1;    // probability a task is high-value
  int n_tasks = 100;
  Range truth_range{0.0, 100.0};
  Range low_value_range{1.0, 100.0};
  Range high_value_range{100.0, 10000.0};
  std::uint64_t seed = 1;

  double noise_fraction = 0.01;
  TamperDirection direction = TamperDirection::down;
  /// All attackers share one tamper draw per task.
  bool coordinated = false;
  /// Every node receives identical source reports instead of querying each
  /// source independently.
  bool shared_source_view = false;
  /// Probability a source skips a task.
  double dropout = 0.0;
  double high_value_threshold = 100.0;
  /// Run each round as a single Estimate pass instead of iterating the
  /// truth to convergence.
  bool single_pass = true;
  /// Node whose first-stage ledger is exported in histories.
  std::uint32_t trace_node = 0;
};

/// Throws config-error on out-of-domain values.
void validate(const ScenarioConfig& config);

/// Entity counts of the malicious populations (rounded to nearest).
int malicious_source_count(const ScenarioConfig& config);
int malicious_node_count(const ScenarioConfig& config);

std::vector<Task> generate_tasks(const ScenarioConfig& config);

/// Deterministic role assignment: a seeded shuffle picks the malicious
/// entities in each population.
struct Roles {
  std::set<EntityId> malicious_sources;
  std::set<EntityId> malicious_nodes;
};
Roles assign_roles(const ScenarioConfig& config);

/// Reports of every data source for one task as received by `node`.
/// Depends only on (seed, task, source, node), never on the scheme under
/// test; with a shared source view the node is ignored.
std::vector<Observation> source_reports(const ScenarioConfig& config,
                                        const Roles& roles, const Task& task,
                                        EntityId node);

/// Value a node submits given its first-stage estimate.
double node_submission(const ScenarioConfig& config, const Roles& roles,
                       const Task& task, EntityId node, double estimate);

constexpr std::size_t kSchemeCount = 2;
constexpr std::size_t index_of(Scheme s) { return s == Scheme::datd ? 1 : 0; }
constexpr std::array<Scheme, kSchemeCount> kSchemes{Scheme::baseline, Scheme::datd};

enum class Stage { first, second };
std::string_view stage_name(Stage stage);

struct SchemeMetrics {
  bool ran = false;
  bool failed = false;
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double deviation = std::numeric_limits<double>::quiet_NaN();
  double economic_loss = std::numeric_limits<double>::quiet_NaN();
  /// NaN when either population has no present member.
  double weight_ratio = std::numeric_limits<double>::quiet_NaN();
};

struct TaskMetrics {
  TaskId task_id = 0;
  double task_value = 0.0;
  bool is_high_value = false;
  double ground_truth = 0.0;
  std::array<SchemeMetrics, kSchemeCount> schemes;

  const SchemeMetrics& of(Scheme s) const { return schemes[index_of(s)]; }
};

struct CredibilityRow {
  TaskId task_id = 0;
  Stage stage = Stage::second;
  EntityId entity;
  bool is_malicious = false;
  Scheme scheme = Scheme::datd;
  double credibility = 0.0;
  double cpec = 0.0;
};

struct WeightRow {
  TaskId task_id = 0;
  Stage stage = Stage::second;
  EntityId entity;
  Scheme scheme = Scheme::datd;
  double weight = 0.0;
};

enum class SchemeSelection { baseline, datd, both };

struct PairedRun {
  ScenarioConfig config;
  Roles roles;
  std::vector<Task> tasks;
  std::vector<TaskMetrics> metrics;
  std::vector<CredibilityRow> credibility;
  std::vector<WeightRow> weights;
  std::array<std::vector<RoundRecord>, kSchemeCount> records;
  std::array<CredibilityLedger, kSchemeCount> contract_ledgers;
  std::array<std::vector<DeliveryRecord>, kSchemeCount> deliveries;
};

PairedRun run_paired(const ScenarioConfig& config,
                     SchemeSelection selection = SchemeSelection::both);

/// Mean aggregation weight of honest present entities over the mean of
/// malicious present ones. Throws undefined-ratio if either side is empty.
double weight_ratio(const RoundBreakdown& breakdown,
                    const std::set<EntityId>& honest,
                    const std::set<EntityId>& malicious);

struct RunSummary {
  int tasks = 0;
  int high_value_tasks = 0;
  double total_deviation = 0.0;
  double rmse = 0.0;
  double total_loss = 0.0;
  double high_value_deviation = 0.0;
  double high_value_loss = 0.0;
};

/// Aggregates over rows where the scheme ran and succeeded.
RunSummary summarize(const std::vector<TaskMetrics>& metrics, Scheme scheme);

/// Mean committed cpec of honest and of malicious nodes in a contract ledger.
struct CpecSplit {
  double honest = 0.0;
  double malicious = 0.0;
};
CpecSplit cpec_split(const CredibilityLedger& ledger,
                     const std::set<EntityId>& malicious_nodes);

enum class SweepParam { beta, omega, gamma, tau };
std::string_view param_name(SweepParam param);
/// Throws config-error on an unknown name.
SweepParam parse_param(std::string_view name);
void set_param(ScenarioConfig& config, SweepParam param, double value);

struct SweepRow {
  SweepParam param = SweepParam::gamma;
  double value = 0.0;
  Scheme scheme = Scheme::datd;
  int seeds = 0;
  double total_deviation_mean = 0.0;
  double total_deviation_sd = 0.0;
  double rmse_mean = 0.0;
  double total_loss_mean = 0.0;
  double total_deviation_p10 = 0.0;
  double total_deviation_p50 = 0.0;
  double total_deviation_p90 = 0.0;
};

/// For each value, runs `n_seeds` paired replicas (seeds config.seed + k)
/// and reports per-scheme aggregates. Rows are ordered by value, then
/// baseline before datd.
std::vector<SweepRow> sweep(const ScenarioConfig& config, SweepParam param,
                            const std::vector<double>& values, int n_seeds);

struct FirstTdTrace {
  EntityId node;
  std::vector<TaskId> task_ids;
  std::array<std::vector<double>, kSchemeCount> deviation;
};

/// Per-task |truth - estimate| of one node's first-stage round under both
/// schemes. Throws no-such-node.
FirstTdTrace first_td_trace(const ScenarioConfig& config, std::uint32_t node_id);

/// Linear-interpolated quantile of an unsorted sample, q in [0,1].
double quantile(std::vector<double> sample, double q);

}  // namespace datd
