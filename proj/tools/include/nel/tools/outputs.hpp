#pragma once

#include <string>
#include <vector>

#include "nel/engine.hpp"
#include "nel/tools/experiment.hpp"

namespace nel::tools {

/// Writes `content` to a temporary sibling and renames it into place.
/// Throws Error when the path is not writable.
void write_file_atomic(const std::string& path, const std::string& content);

/// point_index,class_id,component_id,outcome_kind (empty for labeled points).
std::string assignments_csv(const RunResult& r);

/// observed_count,variant,repetition,mean_f1
std::string plot_data_csv(const MetricsReport& r);

std::string cell_dir_name(const CellSpec& cell);

/// Manifest plus every default the engine resolves for dimension `dim`.
nlohmann::json manifest_echo(const RunManifest& m, int dim);

/// Report, plot data, manifest echo, label mapping and timings.
void write_summary(const std::string& out_dir, const RunManifest& m, int dim,
                   const MetricsReport& r, const std::vector<std::string>& class_names);

}  // namespace nel::tools
