#include "selfdec/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "selfdec/error.hpp"
#include "selfdec/experiment_registry.hpp"

namespace selfdec {
namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kConfig, "config error at " + where + ": " + what);
}

const detail::ExperimentEntry* find_entry(const std::string& name) {
  for (const auto& e : detail::experiment_registry()) {
    if (name == e.name) return &e;
  }
  return nullptr;
}

void append_cell(std::string& line, double x) {
  line += ',';
  if (!std::isnan(x)) line += format_double(x);
}

/// CSV-quotes a label when it contains a comma or quote.
std::string csv_label(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : detail::experiment_registry()) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

Json ExperimentConfig::canonical() const {
  return {{"experiment", experiment},
          {"seed", seed},
          {"n_samples", n_samples},
          {"significance", significance},
          {"truncation", {{"horizon", truncation.horizon}, {"tail_tol", truncation.tail_tol}}},
          {"params", params},
          {"output", {{"max_rows", max_rows}}}};
}

ExperimentConfig parse_config(const Json& j) {
  const std::string w = "config";
  check_keys(j, {"experiment", "seed", "n_samples", "significance", "truncation", "params", "output"}, w);
  ExperimentConfig c;
  if (!j.contains("experiment") || !j.at("experiment").is_string()) {
    config_error(w + ".experiment", "missing or not a string");
  }
  c.experiment = j.at("experiment").get<std::string>();
  const auto* entry = find_entry(c.experiment);
  if (!entry) {
    std::string known;
    for (const auto& n : experiment_names()) known += (known.empty() ? "" : ", ") + n;
    config_error(w + ".experiment", "unknown experiment '" + c.experiment + "' (known: " + known + ")");
  }
  c.seed = get_uint_or(j, "seed", 0, w);
  const auto n = get_uint_or(j, "n_samples", c.n_samples, w);
  if (n < 100 || n > 100'000'000) config_error(w + ".n_samples", "must lie in [100, 1e8]");
  c.n_samples = static_cast<std::size_t>(n);
  c.significance = get_number_or(j, "significance", c.significance, w);
  if (c.significance != 0.01 && c.significance != 0.001) {
    config_error(w + ".significance", "must be 0.01 or 0.001");
  }
  if (j.contains("truncation")) c.truncation = truncation_from_json(j.at("truncation"), w + ".truncation");
  if (j.contains("params")) {
    if (!j.at("params").is_object()) config_error(w + ".params", "expected an object");
    c.params = j.at("params");
  }
  if (j.contains("output")) {
    const Json& o = j.at("output");
    check_keys(o, {"dir", "max_rows"}, w + ".output");
    if (o.contains("dir")) {
      if (!o.at("dir").is_string() || o.at("dir").get<std::string>().empty()) {
        config_error(w + ".output.dir", "expected a non-empty string");
      }
      c.out_dir = o.at("dir").get<std::string>();
    }
    c.max_rows = static_cast<std::size_t>(get_uint_or(o, "max_rows", c.max_rows, w + ".output"));
  }
  entry->validate(c);
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void SampleTable::add(const std::string& comparison, std::size_t index,
                      const std::vector<double>& values) {
  require(values.size() == columns_.size(), "sample row width does not match the columns");
  std::string line = csv_label(comparison);
  line += ',';
  line += std::to_string(index);
  for (double v : values) append_cell(line, v);
  line += '\n';
  body_ += line;
  ++rows_;
}

std::string SampleTable::render() const {
  std::string out = "comparison,index";
  for (const auto& c : columns_) out += "," + c;
  out += '\n';
  return out + body_;
}

bool ExperimentResult::verdict() const {
  return std::all_of(reports.begin(), reports.end(), [](const StatReport& r) { return r.verdict(); });
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto* entry = find_entry(config.experiment);
  if (!entry) throw Error(ErrorCode::kConfig, "unknown experiment '" + config.experiment + "'");
  entry->validate(config);
  ExperimentResult result;
  entry->run(config, result);
  const std::string fp = fingerprint(config.canonical());
  for (auto& r : result.reports) {
    r.seed = config.seed;
    r.fingerprint = fp;
  }
  return result;
}

Artifacts render_artifacts(const ExperimentConfig& config, const ExperimentResult& result) {
  Artifacts a;
  a.samples_csv = result.samples.render();

  Json reports = Json::array();
  for (const auto& r : result.reports) {
    reports.push_back(to_json(r));
  }
  const Json canonical = config.canonical();
  Json report = {{"experiment", config.experiment},
                 {"seed", config.seed},
                 {"fingerprint", fingerprint(canonical)},
                 {"config", canonical},
                 {"reports", reports},
                 {"summary", result.summary},
                 {"verdict", result.verdict() ? "pass" : "fail"}};
  a.report_json = report.dump(2) + "\n";

  std::string cdf = "comparison,x,F_a,F_b\n";
  std::string ecf = "comparison,u,ecf_re,ecf_im,cf_re,cf_im\n";
  const auto grid = default_cf_grid();
  for (const auto& c : result.comparisons) {
    if (c.a.empty() || c.b.empty()) continue;
    std::vector<double> sa = c.a, sb = c.b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    std::vector<double> pooled;
    pooled.reserve(sa.size() + sb.size());
    std::merge(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(pooled));
    const std::string label = csv_label(c.name);
    constexpr std::size_t kPoints = 200;
    for (std::size_t k = 0; k <= kPoints; ++k) {
      const double x = pooled[k * (pooled.size() - 1) / kPoints];
      const auto fa = static_cast<double>(std::upper_bound(sa.begin(), sa.end(), x) - sa.begin()) /
                      static_cast<double>(sa.size());
      const auto fb = static_cast<double>(std::upper_bound(sb.begin(), sb.end(), x) - sb.begin()) /
                      static_cast<double>(sb.size());
      cdf += label + "," + format_double(x) + "," + format_double(fa) + "," + format_double(fb) + "\n";
    }
    for (double u : grid) {
      const auto e = empirical_cf(c.a, u);
      const auto f = c.cf ? evaluate_cf(*c.cf, u) : empirical_cf(c.b, u);
      ecf += label + "," + format_double(u) + "," + format_double(e.real()) + "," +
             format_double(e.imag()) + "," + format_double(f.real()) + "," +
             format_double(f.imag()) + "\n";
    }
  }
  a.cdf_csv = std::move(cdf);
  a.ecf_csv = std::move(ecf);
  return a;
}

void write_artifacts(const Artifacts& artifacts, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory '" + dir + "': " + ec.message());
  auto put = [&](const char* name, const std::string& content) {
    const fs::path p = fs::path(dir) / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + p.string() + "'");
  };
  put("samples.csv", artifacts.samples_csv);
  put("report.json", artifacts.report_json);
  put("cdf.csv", artifacts.cdf_csv);
  put("ecf.csv", artifacts.ecf_csv);
}

}  // namespace selfdec
