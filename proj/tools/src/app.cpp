#include "nel/tools/app.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nel/errors.hpp"
#include "nel/tools/csv.hpp"
#include "nel/tools/experiment.hpp"
#include "nel/tools/outputs.hpp"

namespace nel::tools {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<Variant> parse_models(const std::string& text) {
  std::vector<Variant> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "all") {
      out = {Variant::IGMM, Variant::I2GMM, Variant::AI2GMM};
      continue;
    }
    try {
      out.push_back(parse_variant(item));
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("--model: no variant given");
  return out;
}

std::vector<int> parse_schedule(const std::string& text) {
  if (text == "auto") return {};
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("--observed-schedule: '" + item + "' is not an integer");
    }
  }
  return out;
}

bool parse_on_off(const std::string& v) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw UsageError("--normalize expects on or off");
}

struct CommonFlags {
  std::string model = "all";
  std::string normalize = "on";
  std::optional<int> burn_in;
};

void add_engine_flags(CLI::App* cmd, RunManifest& m, CommonFlags& f) {
  cmd->add_option("--model", f.model, "igmm, i2gmm, ai2gmm or all (comma list allowed)");
  cmd->add_option("--sweeps", m.sweeps, "Gibbs sweeps per run")->capture_default_str();
  cmd->add_option("--preinference-sweeps", m.preinference_sweeps,
                  "Gibbs sweeps of the labeled-only pre-inference stage")
      ->capture_default_str();
  cmd->add_option("--outlier-frac", m.outlier_fraction,
                  "Fraction of labeled points per class exempt from the restriction")
      ->capture_default_str();
  cmd->add_option("--burn-in", f.burn_in, "Sweeps discarded before MAP selection (default sweeps/2)");
  cmd->add_option("--seed", m.seed, "Master seed")->capture_default_str();
  cmd->add_option("--normalize", f.normalize, "on or off: z-score every feature")
      ->capture_default_str();
}

void add_synth_flags(CLI::App* cmd, SynthConfig& s) {
  cmd->add_option("--synth-classes", s.n_classes)->capture_default_str();
  cmd->add_option("--synth-components", s.n_components)->capture_default_str();
  cmd->add_option("--synth-points", s.n_points)->capture_default_str();
  cmd->add_option("--synth-dim", s.dim)->capture_default_str();
  cmd->add_option("--synth-seed", s.seed)->capture_default_str();
}

void finish_common(RunManifest& m, const CommonFlags& f) {
  m.variants = parse_models(f.model);
  m.normalize = parse_on_off(f.normalize);
  m.burn_in = f.burn_in;
}

int cmd_experiment(RunManifest m, std::ostream& out, std::ostream& err) {
  const ExperimentOutcome res = run_experiment(m);
  for (const auto& a : res.report.aggregates) {
    out << to_string(a.variant) << " observed=" << a.observed_count
        << " mean_f1=" << format_double(a.mean_f1) << " classes=" << a.mean_classes
        << " components=" << a.mean_components << "\n";
  }
  if (!res.failures.empty()) {
    for (const auto& f : res.failures) err << "failed: " << f << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}

int cmd_run(RunManifest m, std::ostream& out) {
  namespace fs = std::filesystem;
  if (m.variants.size() != 1) throw UsageError("run: --model must name a single variant");
  CsvData csv = read_csv(m.data_path);
  const LabelMapping map = map_labels(csv.labels);
  if (m.normalize) normalize_zscore(csv.points);
  const NELConfig cfg = m.engine_config(m.variants.front(), m.seed);
  const RunResult r = run_nel(csv.points, map.ids, cfg);

  fs::create_directories(m.out_dir);
  const fs::path dir(m.out_dir);
  write_file_atomic((dir / "assignments.csv").string(), assignments_csv(r));
  nlohmann::json mapping = nlohmann::json::array();
  for (std::size_t k = 0; k < map.names.size(); ++k) {
    mapping.push_back({{"id", k}, {"label", map.names[k]}});
  }
  write_file_atomic((dir / "label_mapping.json").string(), mapping.dump(2) + "\n");
  write_file_atomic((dir / "manifest.json").string(),
                    manifest_echo(m, static_cast<int>(csv.points.rows())).dump(2) + "\n");
  nlohmann::json summary = {
      {"num_classes", r.num_classes},
      {"num_components", r.num_components},
      {"map_sweep", r.map_sweep},
      {"restriction_violations", r.restriction_violations},
      {"kappa_clamps", r.kappa_clamps},
      {"final_hypers",
       {{"mu0", std::vector<double>(r.final_hypers.mu0.data(),
                                    r.final_hypers.mu0.data() + r.final_hypers.mu0.size())},
        {"kappa0", r.final_hypers.kappa0},
        {"kappa1", r.final_hypers.kappa1},
        {"m", r.final_hypers.m}}},
      {"log_posterior_trace", r.log_posterior_trace},
      {"notes", r.notes}};
  write_file_atomic((dir / "run.json").string(), summary.dump(2) + "\n");
  write_file_atomic((dir / "timings.json").string(),
                    nlohmann::json({{"seconds", r.runtime_seconds}}).dump(2) + "\n");
  out << "classes=" << r.num_classes << " components=" << r.num_components << "\n";
  return kOk;
}

int cmd_synth(const SynthConfig& s, const std::string& path, std::ostream& out) {
  const Dataset ds = generate_synthetic(s);
  std::vector<std::string> labels;
  for (int k : ds.class_label) labels.push_back("c" + std::to_string(k));
  write_file_atomic(path, format_csv(ds.points, &labels));
  out << "wrote " << ds.size() << " points to " << path << "\n";
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Non-exhaustive learning with infinite Gaussian mixture models", "nel"};
  app.require_subcommand(1);

  RunManifest exp;
  CommonFlags exp_flags;
  std::string exp_schedule = "auto";
  auto* experiment = app.add_subcommand("experiment", "Run the variant x observed-count x repetition grid");
  experiment->add_option("--data", exp.data_path, "Labeled CSV dataset");
  experiment->add_flag("--synthetic", exp.synthetic, "Use the built-in two-layer generator");
  add_synth_flags(experiment, exp.synth);
  add_engine_flags(experiment, exp, exp_flags);
  experiment->add_option("--repeats", exp.repetitions, "Repetitions per cell")->capture_default_str();
  experiment->add_option("--observed-schedule", exp_schedule, "Comma list of observed-class counts or auto")
      ->capture_default_str();
  experiment->add_option("--labeled-frac", exp.schedule.labeled_fraction,
                         "Fraction of each class placed in the labeled pool")
      ->capture_default_str();
  experiment->add_option("--out", exp.out_dir, "Output directory")->capture_default_str();
  experiment->add_option("--jobs", exp.jobs, "Parallel grid cells")->capture_default_str();

  RunManifest single;
  CommonFlags run_flags;
  run_flags.model = "ai2gmm";
  single.out_dir = "nel_run";
  auto* run = app.add_subcommand("run", "Run one chain on a CSV with partial labels");
  run->add_option("--data", single.data_path, "CSV dataset; empty label cells are unlabeled")->required();
  add_engine_flags(run, single, run_flags);
  run->add_option("--out", single.out_dir, "Output directory")->capture_default_str();

  SynthConfig synth;
  std::string synth_out;
  auto* gen = app.add_subcommand("synth", "Write a synthetic dataset as CSV");
  add_synth_flags(gen, synth);
  gen->add_option("--out", synth_out, "Destination CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (*experiment) {
      finish_common(exp, exp_flags);
      exp.schedule.observed_counts = parse_schedule(exp_schedule);
      return cmd_experiment(exp, out, err);
    }
    if (*run) {
      finish_common(single, run_flags);
      return cmd_run(single, out);
    }
    return cmd_synth(synth, synth_out, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

}  // namespace nel::tools
