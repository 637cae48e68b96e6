#include "nel/tools/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "nel/errors.hpp"
#include "nel/metrics.hpp"
#include "nel/tools/csv.hpp"
#include "nel/tools/outputs.hpp"

namespace nel::tools {

using nlohmann::json;

NELConfig RunManifest::engine_config(Variant v, std::uint64_t seed_) const {
  NELConfig c;
  c.variant = v;
  c.sweeps = sweeps;
  c.preinference_sweeps = preinference_sweeps;
  c.outlier_fraction = outlier_fraction;
  c.burn_in = burn_in;
  c.seed = seed_;
  c.alpha = alpha;
  c.gamma = gamma;
  return c;
}

void RunManifest::validate() const {
  if (synthetic == !data_path.empty()) {
    throw InvalidArgument("manifest: give exactly one of a data path or the synthetic generator");
  }
  if (variants.empty()) throw InvalidArgument("manifest: no model variant selected");
  if (repetitions < 1) throw InvalidArgument("manifest: repetitions must be >= 1");
  if (jobs < 1) throw InvalidArgument("manifest: jobs must be >= 1");
  if (out_dir.empty()) throw InvalidArgument("manifest: empty output directory");
  if (synthetic) synth.validate();
  engine_config(variants.front(), seed).validate(synthetic ? synth.dim : 1);
}

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  const auto r = static_cast<Eigen::Index>(j.size());
  const auto c = r ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = j.at(i).at(k).get<double>();
  }
  return m;
}

}  // namespace

json to_json(const RunManifest& m) {
  json j;
  j["data_path"] = m.data_path;
  j["synthetic"] = m.synthetic;
  const int d = m.synth.dim;
  j["synth"] = {
      {"n_classes", m.synth.n_classes},
      {"n_components", m.synth.n_components},
      {"n_points", m.synth.n_points},
      {"dim", d},
      {"gamma", m.synth.gamma},
      {"alpha", m.synth.alpha},
      {"mu0", m.synth.mu0.size() ? std::vector<double>(m.synth.mu0.data(), m.synth.mu0.data() + d)
                                 : std::vector<double>(static_cast<std::size_t>(d), 0.0)},
      {"psi0", matrix_json(m.synth.psi0.size() ? m.synth.psi0 : Matrix::Identity(d, d))},
      {"kappa0", m.synth.kappa0},
      {"m", m.synth.m},
      {"kappa1", m.synth.kappa1},
      {"seed", m.synth.seed},
      {"max_retries", m.synth.max_retries},
  };
  json variants = json::array();
  for (Variant v : m.variants) variants.push_back(to_string(v));
  j["variants"] = variants;
  j["sweeps"] = m.sweeps;
  j["preinference_sweeps"] = m.preinference_sweeps;
  j["outlier_fraction"] = m.outlier_fraction;
  j["burn_in"] = m.burn_in ? json(*m.burn_in) : json(nullptr);
  j["alpha"] = m.alpha;
  j["gamma"] = m.gamma;
  j["labeled_fraction"] = m.schedule.labeled_fraction;
  j["observed_schedule"] = m.schedule.observed_counts.empty()
                               ? json("auto")
                               : json(m.schedule.observed_counts);
  j["repetitions"] = m.repetitions;
  j["seed"] = m.seed;
  j["normalize"] = m.normalize;
  j["out_dir"] = m.out_dir;
  j["jobs"] = m.jobs;
  return j;
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.data_path = j.at("data_path").get<std::string>();
  m.synthetic = j.at("synthetic").get<bool>();
  const json& s = j.at("synth");
  m.synth.n_classes = s.at("n_classes").get<int>();
  m.synth.n_components = s.at("n_components").get<int>();
  m.synth.n_points = s.at("n_points").get<int>();
  m.synth.dim = s.at("dim").get<int>();
  m.synth.gamma = s.at("gamma").get<double>();
  m.synth.alpha = s.at("alpha").get<double>();
  const auto mu0 = s.at("mu0").get<std::vector<double>>();
  m.synth.mu0 = Eigen::Map<const Vector>(mu0.data(), static_cast<Eigen::Index>(mu0.size()));
  m.synth.psi0 = matrix_from_json(s.at("psi0"));
  m.synth.kappa0 = s.at("kappa0").get<double>();
  m.synth.m = s.at("m").get<double>();
  m.synth.kappa1 = s.at("kappa1").get<double>();
  m.synth.seed = s.at("seed").get<std::uint64_t>();
  m.synth.max_retries = s.at("max_retries").get<int>();
  m.variants.clear();
  for (const auto& v : j.at("variants")) m.variants.push_back(parse_variant(v.get<std::string>()));
  m.sweeps = j.at("sweeps").get<int>();
  m.preinference_sweeps = j.at("preinference_sweeps").get<int>();
  m.outlier_fraction = j.at("outlier_fraction").get<double>();
  if (!j.at("burn_in").is_null()) m.burn_in = j.at("burn_in").get<int>();
  m.alpha = j.at("alpha").get<double>();
  m.gamma = j.at("gamma").get<double>();
  m.schedule.labeled_fraction = j.at("labeled_fraction").get<double>();
  const json& sched = j.at("observed_schedule");
  if (!sched.is_string()) m.schedule.observed_counts = sched.get<std::vector<int>>();
  m.repetitions = j.at("repetitions").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.normalize = j.at("normalize").get<bool>();
  m.out_dir = j.at("out_dir").get<std::string>();
  m.jobs = j.at("jobs").get<int>();
  return m;
}

std::vector<AggregateRow> aggregate(const std::vector<CellResult>& cells) {
  std::vector<AggregateRow> rows;
  std::map<std::pair<int, int>, std::size_t> index;
  for (const auto& c : cells) {
    const auto key = std::make_pair(c.observed_count, static_cast<int>(c.variant));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      AggregateRow r;
      r.variant = c.variant;
      r.observed_count = c.observed_count;
      rows.push_back(r);
    }
    AggregateRow& r = rows[it->second];
    ++r.repetitions;
    r.mean_f1 += c.mean_f1;
    r.mean_classes += c.num_classes;
    r.mean_components += c.num_components;
    r.mean_seconds += c.seconds;
  }
  for (auto& r : rows) {
    r.mean_f1 /= r.repetitions;
    r.mean_classes /= r.repetitions;
    r.mean_components /= r.repetitions;
    r.mean_seconds /= r.repetitions;
  }
  return rows;
}

json to_json(const MetricsReport& r, bool with_timings) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    json j = {{"variant", to_string(c.variant)},
              {"observed_count", c.observed_count},
              {"repetition", c.repetition},
              {"chain_seed", c.chain_seed},
              {"mean_f1", c.mean_f1},
              {"per_class_f1", c.per_class_f1},
              {"shared_novel_columns", c.shared_novel_columns},
              {"num_classes", c.num_classes},
              {"num_components", c.num_components},
              {"map_sweep", c.map_sweep},
              {"restriction_violations", c.restriction_violations}};
    if (with_timings) j["seconds"] = c.seconds;
    cells.push_back(j);
  }
  json aggs = json::array();
  for (const auto& a : r.aggregates) {
    json j = {{"variant", to_string(a.variant)},
              {"observed_count", a.observed_count},
              {"repetitions", a.repetitions},
              {"mean_f1", a.mean_f1},
              {"mean_classes", a.mean_classes},
              {"mean_components", a.mean_components}};
    if (with_timings) j["mean_seconds"] = a.mean_seconds;
    aggs.push_back(j);
  }
  return {{"cells", cells}, {"aggregates", aggs}};
}

MetricsReport report_from_json(const json& j) {
  MetricsReport r;
  for (const auto& c : j.at("cells")) {
    CellResult x;
    x.variant = parse_variant(c.at("variant").get<std::string>());
    x.observed_count = c.at("observed_count").get<int>();
    x.repetition = c.at("repetition").get<int>();
    x.chain_seed = c.at("chain_seed").get<std::uint64_t>();
    x.mean_f1 = c.at("mean_f1").get<double>();
    x.per_class_f1 = c.at("per_class_f1").get<std::vector<double>>();
    x.shared_novel_columns = c.at("shared_novel_columns").get<std::vector<int>>();
    x.num_classes = c.at("num_classes").get<int>();
    x.num_components = c.at("num_components").get<int>();
    x.map_sweep = c.at("map_sweep").get<int>();
    x.restriction_violations = c.at("restriction_violations").get<long>();
    if (c.contains("seconds")) x.seconds = c.at("seconds").get<double>();
    r.cells.push_back(std::move(x));
  }
  for (const auto& a : j.at("aggregates")) {
    AggregateRow x;
    x.variant = parse_variant(a.at("variant").get<std::string>());
    x.observed_count = a.at("observed_count").get<int>();
    x.repetitions = a.at("repetitions").get<int>();
    x.mean_f1 = a.at("mean_f1").get<double>();
    x.mean_classes = a.at("mean_classes").get<double>();
    x.mean_components = a.at("mean_components").get<double>();
    if (a.contains("mean_seconds")) x.mean_seconds = a.at("mean_seconds").get<double>();
    r.aggregates.push_back(x);
  }
  return r;
}

PreparedData prepare_data(const RunManifest& m) {
  PreparedData p;
  if (m.synthetic) {
    p.data = generate_synthetic(m.synth);
    for (int k = 0; k < m.synth.n_classes; ++k) p.class_names.push_back("c" + std::to_string(k));
  } else {
    CsvData csv = read_csv(m.data_path);
    if (!csv.has_label_column) {
      throw DataError("experiment: '" + m.data_path + "' has no label column");
    }
    LabelMapping map = map_labels(csv.labels);
    for (std::size_t i = 0; i < map.ids.size(); ++i) {
      if (map.ids[i] < 0) {
        throw DataError("experiment: row " + std::to_string(i + 1) +
                        " has no label; experiments need ground truth for every point");
      }
    }
    p.data.points = std::move(csv.points);
    p.data.class_label = std::move(map.ids);
    p.class_names = std::move(map.names);
  }
  if (m.normalize) p.zscore = normalize_zscore(p.data.points);
  return p;
}

std::vector<CellSpec> grid(const RunManifest& m, int num_classes) {
  std::vector<CellSpec> cells;
  const auto counts = m.schedule.resolve(num_classes);
  for (int rep = 0; rep < m.repetitions; ++rep) {
    for (int count : counts) {
      for (Variant v : m.variants) cells.push_back({v, count, rep});
    }
  }
  return cells;
}

std::uint64_t split_seed(const RunManifest& m, int repetition) {
  return derive_seed(m.seed, 2 * static_cast<std::uint64_t>(repetition));
}

std::uint64_t chain_seed(const RunManifest& m, const CellSpec& cell) {
  const std::uint64_t rep_seed =
      derive_seed(m.seed, 2 * static_cast<std::uint64_t>(cell.repetition) + 1);
  return derive_seed(rep_seed, static_cast<std::uint64_t>(cell.observed_count) * 8 +
                                   static_cast<std::uint64_t>(cell.variant));
}

CellRun run_cell(const RunManifest& m, const PreparedData& data, const CellSpec& cell) {
  const Split split = make_split(data.data.class_label,
                                 SplitSchedule{m.schedule.labeled_fraction, {cell.observed_count}},
                                 split_seed(m, cell.repetition));
  CellRun out;
  out.view = split.views.front();
  const std::uint64_t seed = chain_seed(m, cell);
  out.run = run_nel(data.data.points, out.view.labels, m.engine_config(cell.variant, seed));

  // Truth ids aligned with the prediction: observed classes keep their dense
  // ids, the rest follow in truth-id order.
  const int num_classes = static_cast<int>(split.class_order.size());
  std::vector<int> remap(static_cast<std::size_t>(num_classes), -1);
  for (int j = 0; j < cell.observed_count; ++j) remap[out.view.observed_classes[j]] = j;
  int next = cell.observed_count;
  for (auto& r : remap) {
    if (r < 0) r = next++;
  }
  std::vector<int> truth(data.data.class_label.size());
  for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = remap[data.data.class_label[i]];
  std::vector<int> observed(static_cast<std::size_t>(cell.observed_count));
  for (int j = 0; j < cell.observed_count; ++j) observed[j] = j;

  const F1Result f1 = mean_f1(build_confusion(truth, out.run.point_class, observed,
                                              out.view.evaluation));
  CellResult& c = out.result;
  c.variant = cell.variant;
  c.observed_count = cell.observed_count;
  c.repetition = cell.repetition;
  c.chain_seed = seed;
  c.mean_f1 = f1.mean;
  c.per_class_f1 = f1.per_class;
  c.shared_novel_columns = f1.shared_columns;
  c.num_classes = out.run.num_classes;
  c.num_components = out.run.num_components;
  c.map_sweep = out.run.map_sweep;
  c.restriction_violations = out.run.restriction_violations;
  c.seconds = out.run.runtime_seconds;
  return out;
}

ExperimentOutcome run_experiment(const RunManifest& m) {
  m.validate();
  const PreparedData data = prepare_data(m);
  const int num_classes =
      1 + *std::max_element(data.data.class_label.begin(), data.data.class_label.end());
  const auto cells = grid(m, num_classes);

  namespace fs = std::filesystem;
  fs::create_directories(fs::path(m.out_dir) / "cells");
  const fs::path marker = fs::path(m.out_dir) / "FAILED";
  if (fs::exists(marker)) fs::remove(marker);

  std::vector<std::optional<CellResult>> results(cells.size());
  std::vector<std::string> failures;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        CellRun run = run_cell(m, data, cells[i]);
        const fs::path dir = fs::path(m.out_dir) / "cells" / cell_dir_name(cells[i]);
        fs::create_directories(dir);
        write_file_atomic((dir / "assignments.csv").string(), assignments_csv(run.run));
        MetricsReport one;
        one.cells.push_back(run.result);
        write_file_atomic((dir / "cell.json").string(),
                          to_json(one, false)["cells"][0].dump(2) + "\n");
        results[i] = run.result;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        failures.push_back(cell_dir_name(cells[i]) + ": " + e.what());
      }
    }
  };
  const int n_threads = std::min<int>(m.jobs, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ExperimentOutcome out;
  for (auto& r : results) {
    if (r) out.report.cells.push_back(std::move(*r));
  }
  out.report.aggregates = aggregate(out.report.cells);
  std::sort(failures.begin(), failures.end());
  out.failures = failures;
  write_summary(m.out_dir, m, data.data.dim(), out.report, data.class_names);
  if (!failures.empty()) {
    std::string text;
    for (const auto& f : failures) text += f + "\n";
    write_file_atomic(marker.string(), text);
  }
  return out;
}

}  // namespace nel::tools
