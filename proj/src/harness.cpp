#include "datd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

namespace datd {

namespace {

// Purpose tags for seed derivation.
enum Tag : std::uint64_t {
  kTaskTag = 1,
  kRoleTag = 2,
  kSourceTag = 3,
  kNodeTag = 4,
  kPresenceTag = 5,
  kKeyTag = 6,
  kCoordinatedTag = 7,
};

void check_range(const Range& r, const char* name) {
  if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw Error(ErrorCode::config_error, std::string(name) + " is not well-ordered");
  }
}

BehaviorProfile profile_for(const ScenarioConfig& config, bool malicious) {
  BehaviorProfile p;
  p.kind = malicious ? BehaviorKind::high_value_attacker : BehaviorKind::honest;
  p.tamper_range = config.omega;
  p.high_value_threshold = config.high_value_threshold;
  p.noise_fraction = config.noise_fraction;
  p.direction = config.direction;
  return p;
}

std::set<EntityId> pick(std::uint64_t seed, std::uint64_t population, int n,
                        int count) {
  std::vector<std::uint32_t> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0u);
  RngStream rng(derive_seed(seed, {kRoleTag, population}));
  for (std::size_t i = ids.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(ids[i - 1], ids[j]);
  }
  std::set<EntityId> out;
  for (int i = 0; i < count; ++i) out.insert(EntityId{ids[static_cast<std::size_t>(i)]});
  return out;
}

PublicKey node_key(std::uint64_t seed, std::uint32_t node) {
  RngStream rng(derive_seed(seed, {kKeyTag, node}));
  PublicKey key(32);
  for (std::size_t i = 0; i < key.size(); i += 8) {
    std::uint64_t word = rng.next_u64();
    for (std::size_t b = 0; b < 8; ++b) key[i + b] = static_cast<std::uint8_t>(word >> (8 * b));
  }
  return key;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::config_error, msg); };
  if (c.n_sources < 1) fail("n_sources must be positive");
  if (c.n_nodes < 1) fail("n_nodes must be positive");
  if (c.n_tasks < 0) fail("n_tasks must be non-negative");
  if (!(c.alpha >= 0.0 && c.alpha < 1.0)) fail("alpha must lie in [0,1)");
  if (!(c.beta >= 0.0 && c.beta < 1.0)) fail("beta must lie in [0,1)");
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) fail("gamma must lie in [0,1]");
  if (!(c.omega >= 0.0)) fail("omega must be >= 0");
  if (!(c.tau >= 0.0 && c.tau <= 1.0)) fail("tau must lie in [0,1]");
  if (!(c.noise_fraction >= 0.0)) fail("noise_fraction must be >= 0");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) fail("dropout must lie in [0,1)");
  check_range(c.truth_range, "truth_range");
  check_range(c.low_value_range, "low_value_range");
  check_range(c.high_value_range, "high_value_range");
  if (!(c.truth_range.lo >= 0.0)) fail("truth_range must be non-negative");
  if (!(c.low_value_range.lo > 0.0)) fail("low_value_range must be positive");
  if (c.trace_node >= static_cast<std::uint32_t>(c.n_nodes)) fail("trace_node out of range");
}

int malicious_source_count(const ScenarioConfig& c) {
  return static_cast<int>(std::lround(c.alpha * c.n_sources));
}

int malicious_node_count(const ScenarioConfig& c) {
  return static_cast<int>(std::lround(c.beta * c.n_nodes));
}

std::vector<Task> generate_tasks(const ScenarioConfig& config) {
  validate(config);
  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(config.n_tasks));
  std::vector<EntityId> sources;
  for (int s = 0; s < config.n_sources; ++s) sources.push_back(EntityId{static_cast<std::uint32_t>(s)});
  for (int i = 0; i < config.n_tasks; ++i) {
    const auto id = static_cast<TaskId>(i + 1);
    RngStream rng(derive_seed(config.seed, {kTaskTag, id}));
    Task t;
    t.id = id;
    t.ground_truth = rng.uniform(config.truth_range.lo, config.truth_range.hi);
    const bool high = rng.bernoulli(config.tau);
    const Range& r = high ? config.high_value_range : config.low_value_range;
    t.value = rng.uniform(r.lo, r.hi);
    t.sources = sources;
    tasks.push_back(std::move(t));
  }
  return tasks;
}

Roles assign_roles(const ScenarioConfig& config) {
  Roles roles;
  roles.malicious_sources = pick(config.seed, 0, config.n_sources, malicious_source_count(config));
  roles.malicious_nodes = pick(config.seed, 1, config.n_nodes, malicious_node_count(config));
  return roles;
}

std::vector<Observation> source_reports(const ScenarioConfig& config,
                                        const Roles& roles, const Task& task,
                                        EntityId node) {
  const std::uint64_t view = config.shared_source_view ? 0 : node.value + 1;
  std::vector<Observation> out;
  out.reserve(task.sources.size());
  for (EntityId s : task.sources) {
    const bool malicious = roles.malicious_sources.contains(s);
    const BehaviorProfile profile = profile_for(config, malicious);
    RngStream own(derive_seed(config.seed, {kSourceTag, s.value, task.id, view}));
    RngStream shared(derive_seed(config.seed, {kCoordinatedTag, task.id}));
    const bool use_shared = config.coordinated && malicious &&
                            is_high_value(profile, task.value);
    const double value =
        report(profile, task.ground_truth, task.value, use_shared ? shared : own);
    RngStream presence(derive_seed(config.seed, {kPresenceTag, s.value, task.id}));
    out.push_back({s, value, !presence.bernoulli(config.dropout)});
  }
  return out;
}

double node_submission(const ScenarioConfig& config, const Roles& roles,
                       const Task& task, EntityId node, double estimate) {
  const bool malicious = roles.malicious_nodes.contains(node);
  const BehaviorProfile profile = profile_for(config, malicious);
  RngStream rng(derive_seed(config.seed, {kNodeTag, node.value, task.id}));
  if (config.coordinated && malicious) {
    rng = RngStream(derive_seed(config.seed, {kCoordinatedTag, task.id, 1}));
  }
  return node_report(profile, estimate, task.value, rng);
}

std::string_view stage_name(Stage stage) {
  return stage == Stage::first ? "first" : "second";
}

double weight_ratio(const RoundBreakdown& breakdown,
                    const std::set<EntityId>& honest,
                    const std::set<EntityId>& malicious) {
  std::vector<double> h;
  std::vector<double> m;
  for (const auto& [id, src] : breakdown.sources) {
    if (honest.contains(id)) h.push_back(src.aggregation_weight);
    if (malicious.contains(id)) m.push_back(src.aggregation_weight);
  }
  if (h.empty() || m.empty()) throw Error(ErrorCode::undefined_ratio);
  return mean(h) / mean(m);
}

PairedRun run_paired(const ScenarioConfig& config, SchemeSelection selection) {
  validate(config);
  PairedRun run;
  run.config = config;
  run.roles = assign_roles(config);
  run.tasks = generate_tasks(config);

  std::set<EntityId> honest_nodes;
  for (int n = 0; n < config.n_nodes; ++n) {
    EntityId id{static_cast<std::uint32_t>(n)};
    if (!run.roles.malicious_nodes.contains(id)) honest_nodes.insert(id);
  }

  TDConfig td;
  td.gamma = config.gamma;
  td.single_pass = config.single_pass;

  for (const Task& t : run.tasks) {
    TaskMetrics m;
    m.task_id = t.id;
    m.task_value = t.value;
    m.is_high_value = t.value > config.high_value_threshold;
    m.ground_truth = t.ground_truth;
    run.metrics.push_back(m);
  }

  const EntityId trace{config.trace_node};
  for (Scheme scheme : kSchemes) {
    if (selection == SchemeSelection::baseline && scheme != Scheme::baseline) continue;
    if (selection == SchemeSelection::datd && scheme != Scheme::datd) continue;
    const std::size_t k = index_of(scheme);

    std::vector<OracleNode> nodes;
    for (int n = 0; n < config.n_nodes; ++n) {
      const auto id = static_cast<std::uint32_t>(n);
      nodes.push_back(OracleNode{EntityId{id}, node_key(config.seed, id), {}});
    }
    OracleNetwork network(std::move(nodes), scheme, td);

    for (std::size_t i = 0; i < run.tasks.size(); ++i) {
      const Task& task = run.tasks[i];
      RoundRecord record = network.run_task(
          task,
          [&](EntityId node) { return source_reports(config, run.roles, task, node); },
          [&](EntityId node, double estimate) {
            return node_submission(config, run.roles, task, node, estimate);
          });

      SchemeMetrics& sm = run.metrics[i].schemes[k];
      sm.ran = true;
      sm.failed = record.failed;
      if (!record.failed) {
        sm.estimate = *record.final_truth;
        sm.deviation = std::abs(task.ground_truth - sm.estimate);
        sm.economic_loss = sm.deviation * task.value;
        try {
          sm.weight_ratio = weight_ratio(*record.second_stage, honest_nodes,
                                         run.roles.malicious_nodes);
        } catch (const Error&) {
          // Missing datum; left as NaN.
        }
        for (const auto& [id, src] : record.second_stage->sources) {
          run.weights.push_back({task.id, Stage::second, id, scheme, src.aggregation_weight});
        }
      }
      for (const auto& [id, src] : record.first_stage.at(trace).sources) {
        run.weights.push_back({task.id, Stage::first, id, scheme, src.aggregation_weight});
      }
      for (const auto& [id, entry] : network.node(trace).source_ledger) {
        run.credibility.push_back({task.id, Stage::first, id,
                                   run.roles.malicious_sources.contains(id), scheme,
                                   entry.credibility, entry.cpec});
      }
      for (const auto& [id, entry] : network.contract_ledger()) {
        run.credibility.push_back({task.id, Stage::second, id,
                                   run.roles.malicious_nodes.contains(id), scheme,
                                   entry.credibility, entry.cpec});
      }
      run.records[k].push_back(std::move(record));
    }
    run.contract_ledgers[k] = network.contract_ledger();
    run.deliveries[k] = network.deliveries();
  }
  return run;
}

RunSummary summarize(const std::vector<TaskMetrics>& metrics, Scheme scheme) {
  RunSummary s;
  double squares = 0.0;
  for (const auto& m : metrics) {
    const SchemeMetrics& sm = m.of(scheme);
    if (!sm.ran || sm.failed) continue;
    ++s.tasks;
    s.total_deviation += sm.deviation;
    squares += sm.deviation * sm.deviation;
    s.total_loss += sm.economic_loss;
    if (m.is_high_value) {
      ++s.high_value_tasks;
      s.high_value_deviation += sm.deviation;
      s.high_value_loss += sm.economic_loss;
    }
  }
  s.rmse = s.tasks > 0 ? std::sqrt(squares / s.tasks) : 0.0;
  return s;
}

CpecSplit cpec_split(const CredibilityLedger& ledger,
                     const std::set<EntityId>& malicious_nodes) {
  std::vector<double> h;
  std::vector<double> m;
  for (const auto& [id, entry] : ledger) {
    (malicious_nodes.contains(id) ? m : h).push_back(entry.cpec);
  }
  return {mean(h), mean(m)};
}

std::string_view param_name(SweepParam param) {
  switch (param) {
    case SweepParam::beta: return "beta";
    case SweepParam::omega: return "omega";
    case SweepParam::gamma: return "gamma";
    case SweepParam::tau: return "tau";
  }
  return "";
}

SweepParam parse_param(std::string_view name) {
  for (SweepParam p : {SweepParam::beta, SweepParam::omega, SweepParam::gamma, SweepParam::tau}) {
    if (param_name(p) == name) return p;
  }
  throw Error(ErrorCode::config_error, "unknown sweep parameter '" + std::string(name) + "'");
}

void set_param(ScenarioConfig& config, SweepParam param, double value) {
  switch (param) {
    case SweepParam::beta: config.beta = value; break;
    case SweepParam::omega: config.omega = value; break;
    case SweepParam::gamma: config.gamma = value; break;
    case SweepParam::tau: config.tau = value; break;
  }
}

double quantile(std::vector<double> sample, double q) {
  if (sample.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(sample.begin(), sample.end());
  const double pos = q * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[hi] - sample[lo]);
}

std::vector<SweepRow> sweep(const ScenarioConfig& config, SweepParam param,
                            const std::vector<double>& values, int n_seeds) {
  if (n_seeds < 1) throw Error(ErrorCode::config_error, "seeds must be positive");
  std::vector<SweepRow> rows;
  for (double value : values) {
    ScenarioConfig base = config;
    set_param(base, param, value);
    validate(base);

    // Replicas are independent; results are collected in seed order.
    std::vector<std::future<std::array<RunSummary, kSchemeCount>>> jobs;
    for (int k = 0; k < n_seeds; ++k) {
      ScenarioConfig replica = base;
      replica.seed = base.seed + static_cast<std::uint64_t>(k);
      jobs.push_back(std::async(std::launch::async, [replica] {
        const PairedRun run = run_paired(replica);
        return std::array<RunSummary, kSchemeCount>{
            summarize(run.metrics, Scheme::baseline),
            summarize(run.metrics, Scheme::datd)};
      }));
    }
    std::array<std::vector<RunSummary>, kSchemeCount> results;
    for (auto& job : jobs) {
      const auto summaries = job.get();
      for (std::size_t k = 0; k < kSchemeCount; ++k) results[k].push_back(summaries[k]);
    }

    for (Scheme scheme : kSchemes) {
      const auto& rs = results[index_of(scheme)];
      std::vector<double> dev;
      std::vector<double> rmse;
      std::vector<double> loss;
      for (const auto& r : rs) {
        dev.push_back(r.total_deviation);
        rmse.push_back(r.rmse);
        loss.push_back(r.total_loss);
      }
      SweepRow row;
      row.param = param;
      row.value = value;
      row.scheme = scheme;
      row.seeds = n_seeds;
      row.total_deviation_mean = mean(dev);
      row.total_deviation_sd = stddev(dev);
      row.rmse_mean = mean(rmse);
      row.total_loss_mean = mean(loss);
      row.total_deviation_p10 = quantile(dev, 0.1);
      row.total_deviation_p50 = quantile(dev, 0.5);
      row.total_deviation_p90 = quantile(dev, 0.9);
      rows.push_back(row);
    }
  }
  return rows;
}

FirstTdTrace first_td_trace(const ScenarioConfig& config, std::uint32_t node_id) {
  if (node_id >= static_cast<std::uint32_t>(config.n_nodes)) {
    throw Error(ErrorCode::no_such_node, std::to_string(node_id));
  }
  const PairedRun run = run_paired(config);
  FirstTdTrace trace;
  trace.node = EntityId{node_id};
  for (const Task& t : run.tasks) trace.task_ids.push_back(t.id);
  for (Scheme scheme : kSchemes) {
    const std::size_t k = index_of(scheme);
    for (std::size_t i = 0; i < run.tasks.size(); ++i) {
      const double estimate = run.records[k][i].first_td_estimates.at(trace.node);
      trace.deviation[k].push_back(std::abs(run.tasks[i].ground_truth - estimate));
    }
  }
  return trace;
}

}  // namespace datd
