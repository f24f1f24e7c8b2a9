#include "datd/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace datd {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::config_error,
              "bad value '" + std::string(value) + "' for " + std::string(key));
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    bad_value(key, text);
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
  text = trim(text);
  Int v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) bad_value(key, text);
  return v;
}

Range parse_range(std::string_view key, std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) bad_value(key, text);
  return {parse_double(key, text.substr(0, comma)),
          parse_double(key, text.substr(comma + 1))};
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  bad_value(key, text);
}

std::string format_range(const Range& r) {
  return format_number(r.lo) + "," + format_number(r.hi);
}

std::string flag(bool b) { return b ? "1" : "0"; }

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

Table per_task_table(const PairedRun& run) {
  Table t;
  t.header = {"task_id", "task_value", "is_high_value", "truth",
              "estimate_datd", "estimate_baseline", "deviation_datd",
              "deviation_baseline", "loss_datd", "loss_baseline",
              "weight_ratio_datd", "weight_ratio_baseline"};
  for (const auto& m : run.metrics) {
    const auto& d = m.of(Scheme::datd);
    const auto& b = m.of(Scheme::baseline);
    t.rows.push_back({std::to_string(m.task_id), format_number(m.task_value),
                      flag(m.is_high_value), format_number(m.ground_truth),
                      format_number(d.estimate), format_number(b.estimate),
                      format_number(d.deviation), format_number(b.deviation),
                      format_number(d.economic_loss), format_number(b.economic_loss),
                      format_number(d.weight_ratio), format_number(b.weight_ratio)});
  }
  return t;
}

Table credibility_table(const PairedRun& run) {
  Table t;
  t.header = {"task_id", "stage", "entity_id", "is_malicious", "scheme",
              "credibility", "cpec"};
  for (const auto& r : run.credibility) {
    t.rows.push_back({std::to_string(r.task_id), std::string(stage_name(r.stage)),
                      std::to_string(r.entity.value), flag(r.is_malicious),
                      std::string(scheme_name(r.scheme)),
                      format_number(r.credibility), format_number(r.cpec)});
  }
  return t;
}

Table weights_table(const PairedRun& run) {
  Table t;
  t.header = {"task_id", "stage", "entity_id", "scheme", "weight"};
  for (const auto& r : run.weights) {
    t.rows.push_back({std::to_string(r.task_id), std::string(stage_name(r.stage)),
                      std::to_string(r.entity.value),
                      std::string(scheme_name(r.scheme)), format_number(r.weight)});
  }
  return t;
}

Table sweep_table(const std::vector<SweepRow>& rows) {
  Table t;
  t.header = {"param", "value", "scheme", "seeds", "total_deviation_mean",
              "total_deviation_sd", "rmse_mean", "total_loss_mean",
              "total_deviation_p10", "total_deviation_p50", "total_deviation_p90"};
  for (const auto& r : rows) {
    t.rows.push_back({std::string(param_name(r.param)), format_number(r.value),
                      std::string(scheme_name(r.scheme)), std::to_string(r.seeds),
                      format_number(r.total_deviation_mean),
                      format_number(r.total_deviation_sd), format_number(r.rmse_mean),
                      format_number(r.total_loss_mean),
                      format_number(r.total_deviation_p10),
                      format_number(r.total_deviation_p50),
                      format_number(r.total_deviation_p90)});
  }
  return t;
}

void write_csv(std::ostream& out, const Table& table) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
}

void write_dat(std::ostream& out, const Table& table) {
  out << '#';
  for (const auto& h : table.header) out << ' ' << h;
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ' ';
      out << (row[i].empty() ? "NaN" : row[i]);
    }
    out << '\n';
  }
}

void write_table(const std::filesystem::path& dir, std::string_view stem,
                 const Table& table) {
  const std::string base(stem);
  std::ofstream csv(dir / (base + ".csv"), std::ios::binary);
  std::ofstream dat(dir / (base + ".dat"), std::ios::binary);
  if (!csv || !dat) {
    throw std::runtime_error("cannot open output files for " + base + " in " + dir.string());
  }
  write_csv(csv, table);
  write_dat(dat, table);
  if (!csv.flush() || !dat.flush()) {
    throw std::runtime_error("write failed for " + base);
  }
}

void apply_setting(ScenarioConfig& c, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "n_sources") c.n_sources = parse_int<int>(key, value);
  else if (key == "n_nodes") c.n_nodes = parse_int<int>(key, value);
  else if (key == "alpha") c.alpha = parse_double(key, value);
  else if (key == "beta") c.beta = parse_double(key, value);
  else if (key == "gamma") c.gamma = parse_double(key, value);
  else if (key == "omega") c.omega = parse_double(key, value);
  else if (key == "tau") c.tau = parse_double(key, value);
  else if (key == "n_tasks") c.n_tasks = parse_int<int>(key, value);
  else if (key == "truth_range") c.truth_range = parse_range(key, value);
  else if (key == "low_value_range") c.low_value_range = parse_range(key, value);
  else if (key == "high_value_range") c.high_value_range = parse_range(key, value);
  else if (key == "seed") c.seed = parse_int<std::uint64_t>(key, value);
  else if (key == "noise_fraction") c.noise_fraction = parse_double(key, value);
  else if (key == "direction") {
    if (value == "down") c.direction = TamperDirection::down;
    else if (value == "symmetric") c.direction = TamperDirection::symmetric;
    else bad_value(key, value);
  }
  else if (key == "coordinated") c.coordinated = parse_bool(key, value);
  else if (key == "shared_source_view") c.shared_source_view = parse_bool(key, value);
  else if (key == "dropout") c.dropout = parse_double(key, value);
  else if (key == "high_value_threshold") c.high_value_threshold = parse_double(key, value);
  else if (key == "single_pass") c.single_pass = parse_bool(key, value);
  else if (key == "trace_node") c.trace_node = parse_int<std::uint32_t>(key, value);
  else throw Error(ErrorCode::config_error, "unknown key '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> config_settings(const ScenarioConfig& c) {
  return {
      {"n_sources", std::to_string(c.n_sources)},
      {"n_nodes", std::to_string(c.n_nodes)},
      {"alpha", format_number(c.alpha)},
      {"beta", format_number(c.beta)},
      {"gamma", format_number(c.gamma)},
      {"omega", format_number(c.omega)},
      {"tau", format_number(c.tau)},
      {"n_tasks", std::to_string(c.n_tasks)},
      {"truth_range", format_range(c.truth_range)},
      {"low_value_range", format_range(c.low_value_range)},
      {"high_value_range", format_range(c.high_value_range)},
      {"seed", std::to_string(c.seed)},
      {"noise_fraction", format_number(c.noise_fraction)},
      {"direction", c.direction == TamperDirection::down ? "down" : "symmetric"},
      {"coordinated", c.coordinated ? "true" : "false"},
      {"shared_source_view", c.shared_source_view ? "true" : "false"},
      {"dropout", format_number(c.dropout)},
      {"high_value_threshold", format_number(c.high_value_threshold)},
      {"single_pass", c.single_pass ? "true" : "false"},
      {"trace_node", std::to_string(c.trace_node)},
  };
}

void load_config(const std::filesystem::path& path, ScenarioConfig& config) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::config_error, path.string() + ": " + e.what());
    }
    if (!doc.contains("config") || !doc["config"].is_object()) {
      throw Error(ErrorCode::config_error, path.string() + ": no config object");
    }
    for (const auto& [key, value] : doc["config"].items()) {
      if (!value.is_string()) {
        throw Error(ErrorCode::config_error, "config value for " + key + " must be a string");
      }
      apply_setting(config, key, value.get<std::string>());
    }
    return;
  }

  std::istringstream lines(text);
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::config_error,
                  path.string() + ":" + std::to_string(number) + ": expected key = value");
    }
    apply_setting(config, view.substr(0, eq), view.substr(eq + 1));
  }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  nlohmann::ordered_json doc;
  doc["tool"] = "datd";
  doc["tool_version"] = m.tool_version;
  doc["command"] = m.command;
  doc["scheme"] = m.scheme;
  doc["out_dir"] = m.out_dir;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [key, value] : config_settings(m.config)) config[key] = value;
  doc["config"] = config;
  doc["outputs"] = m.outputs;
  doc["wall_seconds"] = m.wall_seconds;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << doc.dump(2) << '\n';
  if (!out.flush()) throw std::runtime_error("cannot write manifest " + path.string());
}

}  // namespace datd
