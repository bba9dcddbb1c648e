#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "selfdec/serialize.hpp"

namespace selfdec {

/// One experiment run, validated in full (including `params`) before any
/// sampling starts. Errors are Error(kConfig) naming the offending field.
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::size_t n_samples = 100'000;
  double significance = 0.001;
  TruncationPolicy truncation{};
  Json params = Json::object();
  std::string out_dir = "out";
  /// Cap on samples.csv rows written per comparison.
  std::size_t max_rows = 100'000;

  /// The config as recorded in report.json: every field that affects the
  /// numbers, with the effective seed, and without the output location.
  Json canonical() const;
};

const std::vector<std::string>& experiment_names();

ExperimentConfig parse_config(const Json& j);
/// Parses JSON text; syntax errors become kConfig.
ExperimentConfig parse_config_text(const std::string& text);
/// Reads and parses a config file; unreadable files are kIo.
ExperimentConfig load_config(const std::string& path);

/// Two samples compared by KS, kept for the plot-ready CDF/CF grids. `cf`
/// holds the analytic characteristic function of `b` when one is known.
struct Comparison {
  std::string name;
  std::vector<double> a;
  std::vector<double> b;
  std::optional<CharacteristicFn> cf;
};

/// samples.csv body: "comparison,index," then experiment-specific columns.
/// NaN cells are written empty.
class SampleTable {
 public:
  SampleTable() = default;
  explicit SampleTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t rows() const noexcept { return rows_; }
  /// `values` must have one entry per column.
  void add(const std::string& comparison, std::size_t index, const std::vector<double>& values);
  std::string render() const;

 private:
  std::vector<std::string> columns_;
  std::string body_;
  std::size_t rows_ = 0;
};

struct ExperimentResult {
  std::vector<StatReport> reports;
  std::vector<Comparison> comparisons;
  SampleTable samples;
  Json summary = Json::object();

  /// Every report's verdict passes.
  bool verdict() const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

struct Artifacts {
  std::string samples_csv;
  std::string report_json;
  std::string cdf_csv;
  std::string ecf_csv;
};

Artifacts render_artifacts(const ExperimentConfig& config, const ExperimentResult& result);

/// Creates `dir` if needed and writes the four files. Failures are kIo.
void write_artifacts(const Artifacts& artifacts, const std::string& dir);

}  // namespace selfdec
