#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nel/dataset.hpp"
#include "nel/engine.hpp"

namespace nel::tools {

/// Everything that determines an experiment's outputs.
struct RunManifest {
  /// CSV path; empty when the built-in generator is used.
  std::string data_path;
  bool synthetic = false;
  SynthConfig synth;
  std::vector<Variant> variants{Variant::IGMM, Variant::I2GMM, Variant::AI2GMM};
  int sweeps = 1000;
  int preinference_sweeps = 100;
  double outlier_fraction = 0.2;
  std::optional<int> burn_in;
  double alpha = 1.0;
  double gamma = 1.0;
  SplitSchedule schedule;
  int repetitions = 5;
  std::uint64_t seed = 1;
  bool normalize = true;
  std::string out_dir = "nel_out";
  int jobs = 1;

  NELConfig engine_config(Variant v, std::uint64_t chain_seed) const;
  void validate() const;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

struct CellResult {
  Variant variant = Variant::AI2GMM;
  int observed_count = 0;
  int repetition = 0;
  std::uint64_t chain_seed = 0;
  double mean_f1 = 0.0;
  std::vector<double> per_class_f1;
  /// Novel columns matched by more than one unobserved class.
  std::vector<int> shared_novel_columns;
  int num_classes = 0;
  int num_components = 0;
  int map_sweep = -1;
  long restriction_violations = 0;
  double seconds = 0.0;
};

struct AggregateRow {
  Variant variant = Variant::AI2GMM;
  int observed_count = 0;
  int repetitions = 0;
  double mean_f1 = 0.0;
  double mean_classes = 0.0;
  double mean_components = 0.0;
  double mean_seconds = 0.0;
};

struct MetricsReport {
  std::vector<CellResult> cells;
  std::vector<AggregateRow> aggregates;
};

/// Arithmetic means per (variant, observed count), in grid order.
std::vector<AggregateRow> aggregate(const std::vector<CellResult>& cells);

/// Timing fields are written only when `with_timings` is set, so that the
/// report proper is a deterministic function of the manifest.
nlohmann::json to_json(const MetricsReport& r, bool with_timings);
MetricsReport report_from_json(const nlohmann::json& j);

/// Data prepared once per experiment: points (normalized when requested),
/// dense truth ids and their names.
struct PreparedData {
  Dataset data;
  std::vector<std::string> class_names;
  std::optional<ZScore> zscore;
};
PreparedData prepare_data(const RunManifest& m);

struct CellSpec {
  Variant variant;
  int observed_count;
  int repetition;
};

/// Grid cells in output order: repetition, then observed count, then variant.
std::vector<CellSpec> grid(const RunManifest& m, int num_classes);

std::uint64_t split_seed(const RunManifest& m, int repetition);
std::uint64_t chain_seed(const RunManifest& m, const CellSpec& cell);

struct CellRun {
  CellResult result;
  RunResult run;
  SplitView view;
};

/// Runs one grid cell; a pure function of (manifest, data, cell).
CellRun run_cell(const RunManifest& m, const PreparedData& data, const CellSpec& cell);

struct ExperimentOutcome {
  MetricsReport report;
  std::vector<std::string> failures;
};

/// Runs the full grid with up to m.jobs worker threads and writes every
/// artifact under m.out_dir. Cells that throw are recorded as failures and a
/// FAILED marker is written next to the partial results.
ExperimentOutcome run_experiment(const RunManifest& m);

}  // namespace nel::tools
