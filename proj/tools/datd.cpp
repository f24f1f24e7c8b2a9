// datd: command-line driver for paired scenario runs, parameter sweeps,
// the worked-example check and single-node first-stage traces.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "datd/harness.hpp"
#include "datd/report.hpp"
#include "datd/worked_example.hpp"

namespace fs = std::filesystem;
using namespace datd;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr int kUsageError = 2;
constexpr int kIoError = 1;

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> tasks;
  std::optional<double> alpha, beta, gamma, omega, tau;
  std::string out;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "key = value scenario file or run manifest")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Scenario seed");
    app.add_option("--tasks", tasks, "Number of tasks")->check(CLI::PositiveNumber);
    app.add_option("--alpha", alpha, "Fraction of malicious sources");
    app.add_option("--beta", beta, "Fraction of malicious nodes");
    app.add_option("--gamma", gamma, "Discount factor");
    app.add_option("--omega", omega, "Tamper range");
    app.add_option("--tau", tau, "High-value task probability");
    app.add_option("--out", out, "Output directory (default: $DATD_OUT_DIR or ./out)");
  }

  ScenarioConfig resolve() const {
    ScenarioConfig c;
    if (!config_path.empty()) load_config(config_path, c);
    if (seed) c.seed = *seed;
    if (tasks) c.n_tasks = *tasks;
    if (alpha) c.alpha = *alpha;
    if (beta) c.beta = *beta;
    if (gamma) c.gamma = *gamma;
    if (omega) c.omega = *omega;
    if (tau) c.tau = *tau;
    validate(c);
    return c;
  }

  fs::path out_dir() const {
    if (!out.empty()) return out;
    if (const char* env = std::getenv("DATD_OUT_DIR"); env && *env) return env;
    return "out";
  }
};

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoFailure("cannot create output directory " + dir.string());
  }
}

void write(const fs::path& dir, std::string_view stem, const Table& table,
           std::vector<std::string>& outputs) {
  try {
    write_table(dir, stem, table);
  } catch (const std::runtime_error& e) {
    throw IoFailure(e.what());
  }
  outputs.push_back(std::string(stem) + ".csv");
  outputs.push_back(std::string(stem) + ".dat");
}

std::string join_args(int argc, char** argv) {
  std::ostringstream out;
  for (int i = 0; i < argc; ++i) out << (i ? " " : "") << argv[i];
  return out.str();
}

int cmd_run(const ScenarioFlags& flags, const std::string& scheme,
            const std::string& command) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioConfig config = flags.resolve();
  const SchemeSelection selection = scheme == "datd"       ? SchemeSelection::datd
                                    : scheme == "baseline" ? SchemeSelection::baseline
                                                           : SchemeSelection::both;
  const PairedRun run = run_paired(config, selection);

  const fs::path dir = flags.out_dir();
  prepare_dir(dir);
  std::vector<std::string> outputs;
  write(dir, "per_task", per_task_table(run), outputs);
  write(dir, "credibility", credibility_table(run), outputs);
  write(dir, "weights", weights_table(run), outputs);

  RunManifest manifest;
  manifest.config = config;
  manifest.command = command;
  manifest.scheme = scheme;
  manifest.out_dir = dir.string();
  manifest.tool_version = kVersion;
  manifest.outputs = outputs;
  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_manifest(dir / "manifest.json", manifest);
  } catch (const std::runtime_error& e) {
    throw IoFailure(e.what());
  }

  for (Scheme s : kSchemes) {
    if (selection != SchemeSelection::both &&
        (selection == SchemeSelection::datd) != (s == Scheme::datd)) {
      continue;
    }
    const RunSummary sum = summarize(run.metrics, s);
    std::printf("%-8s tasks=%d high_value=%d total_deviation=%.6g rmse=%.6g total_loss=%.6g\n",
                std::string(scheme_name(s)).c_str(), sum.tasks, sum.high_value_tasks,
                sum.total_deviation, sum.rmse, sum.total_loss);
  }
  std::printf("wrote %s\n", dir.string().c_str());
  return 0;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    ScenarioConfig probe;
    // Reuse the config parser for strict number syntax.
    apply_setting(probe, "gamma", item);
    values.push_back(probe.gamma);
  }
  return values;
}

int cmd_sweep(const ScenarioFlags& flags, const std::string& param_text,
              const std::string& values_text, int seeds) {
  const ScenarioConfig config = flags.resolve();
  const SweepParam param = parse_param(param_text);
  const std::vector<double> values = parse_values(values_text);
  if (values.empty()) throw Error(ErrorCode::config_error, "--values is empty");
  const std::vector<SweepRow> rows = sweep(config, param, values, seeds);

  const fs::path dir = flags.out_dir();
  prepare_dir(dir);
  std::vector<std::string> outputs;
  write(dir, "sweep", sweep_table(rows), outputs);
  for (const auto& r : rows) {
    std::printf("%s=%-6g %-8s mean_total_deviation=%.6g sd=%.6g\n",
                std::string(param_name(r.param)).c_str(), r.value,
                std::string(scheme_name(r.scheme)).c_str(), r.total_deviation_mean,
                r.total_deviation_sd);
  }
  std::printf("wrote %s\n", (dir / "sweep.csv").string().c_str());
  return 0;
}

int cmd_table2() {
  const auto checks = check_worked_example(0.001);
  bool all = true;
  std::printf("%-16s %10s %10s  %s\n", "quantity", "expected", "computed", "result");
  for (const auto& c : checks) {
    std::printf("%-16s %10.3f %10.5f  %s\n", c.name.c_str(), c.expected, c.actual,
                c.pass ? "pass" : "FAIL");
    all = all && c.pass;
  }
  std::printf("%s\n", all ? "all values within 0.001" : "mismatch");
  return all ? 0 : 1;
}

int cmd_trace(const ScenarioFlags& flags, std::uint32_t node) {
  const ScenarioConfig config = flags.resolve();
  const FirstTdTrace trace = first_td_trace(config, node);
  Table t;
  t.header = {"task_id", "node", "deviation_datd", "deviation_baseline"};
  for (std::size_t i = 0; i < trace.task_ids.size(); ++i) {
    t.rows.push_back({std::to_string(trace.task_ids[i]), std::to_string(node),
                      format_number(trace.deviation[index_of(Scheme::datd)][i]),
                      format_number(trace.deviation[index_of(Scheme::baseline)][i])});
  }
  const fs::path dir = flags.out_dir();
  prepare_dir(dir);
  std::vector<std::string> outputs;
  write(dir, "trace", t, outputs);
  std::printf("wrote %s\n", (dir / "trace.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Paired simulation of dynamically adjusted truth discovery for oracles"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ScenarioFlags run_flags;
  std::string scheme = "both";
  CLI::App* run = app.add_subcommand("run", "Run one scenario under both schemes");
  run_flags.attach(*run);
  run->add_option("--scheme", scheme, "datd, baseline or both")
      ->check(CLI::IsMember({"datd", "baseline", "both"}));

  ScenarioFlags sweep_flags;
  std::string param;
  std::string values;
  int seeds = 20;
  CLI::App* sw = app.add_subcommand("sweep", "Sweep one parameter over seeded replicas");
  sweep_flags.attach(*sw);
  sw->add_option("--param", param, "beta, omega, gamma or tau")
      ->required()
      ->check(CLI::IsMember({"beta", "omega", "gamma", "tau"}));
  sw->add_option("--values", values, "Comma-separated values")->required();
  sw->add_option("--seeds", seeds, "Replicas per value")->check(CLI::PositiveNumber);

  CLI::App* t2 = app.add_subcommand("table2", "Check the five-source worked example");

  ScenarioFlags trace_flags;
  std::uint32_t node = 0;
  CLI::App* tr = app.add_subcommand("trace", "Per-task first-stage deviation of one node");
  trace_flags.attach(*tr);
  tr->add_option("--node", node, "Node id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*run) return cmd_run(run_flags, scheme, join_args(argc, argv));
    if (*sw) return cmd_sweep(sweep_flags, param, values, seeds);
    if (*t2) return cmd_table2();
    if (*tr) return cmd_trace(trace_flags, node);
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }
  return kUsageError;
}
