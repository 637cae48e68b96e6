#include "nel/tools/outputs.hpp"

#include <filesystem>
#include <fstream>

#include "nel/errors.hpp"
#include "nel/tools/csv.hpp"

namespace nel::tools {

using nlohmann::json;

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write '" + tmp.string() + "'");
    f << content;
    f.flush();
    if (!f) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

std::string assignments_csv(const RunResult& r) {
  std::string s = "point_index,class_id,component_id,outcome_kind\n";
  for (std::size_t i = 0; i < r.point_class.size(); ++i) {
    s += std::to_string(i) + ',' + std::to_string(r.point_class[i]) + ',' +
         std::to_string(r.point_component[i]) + ',';
    if (r.outcome[i]) s += to_string(*r.outcome[i]);
    s += '\n';
  }
  return s;
}

std::string plot_data_csv(const MetricsReport& r) {
  std::string s = "observed_count,variant,repetition,mean_f1\n";
  for (const auto& c : r.cells) {
    s += std::to_string(c.observed_count) + ',' + to_string(c.variant) + ',' +
         std::to_string(c.repetition) + ',' + format_double(c.mean_f1) + '\n';
  }
  return s;
}

std::string cell_dir_name(const CellSpec& cell) {
  return to_string(cell.variant) + "_m" + std::to_string(cell.observed_count) + "_r" +
         std::to_string(cell.repetition);
}

json manifest_echo(const RunManifest& m, int dim) {
  json j = to_json(m);
  const NELConfig c = m.engine_config(m.variants.front(), m.seed);
  const HyperState h = c.initial_hypers(dim);
  const HyperPriorConfig p = c.prior_config(dim);
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  auto mat = [&](const Matrix& a) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) rows.push_back(vec(a.row(i).transpose()));
    return rows;
  };
  j["resolved"] = {
      {"dim", dim},
      {"burn_in", c.effective_burn_in()},
      {"observed_schedule", m.schedule.observed_counts.empty() ? json("auto") : json(m.schedule.observed_counts)},
      {"hypers", {{"mu0", vec(h.mu0)}, {"psi0", mat(h.psi0)}, {"kappa0", h.kappa0},
                  {"kappa1", h.kappa1}, {"m", h.m}}},
      {"hyper_prior", {{"mu_p", vec(p.mu_p)}, {"sigma0", mat(p.sigma0)}, {"c1", p.c1},
                       {"c2", p.c2}, {"alpha0", p.alpha0}, {"beta0", p.beta0},
                       {"alpha1", p.alpha1}, {"beta1", p.beta1}}},
      {"sigma_form", c.sigma_form == SigmaForm::Verbatim ? "verbatim" : "posterior_maximizer"},
  };
  return j;
}

void write_summary(const std::string& out_dir, const RunManifest& m, int dim,
                   const MetricsReport& r, const std::vector<std::string>& class_names) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_file_atomic((dir / "report.json").string(), to_json(r, false).dump(2) + "\n");
  write_file_atomic((dir / "plot_data.csv").string(), plot_data_csv(r));
  write_file_atomic((dir / "manifest.json").string(), manifest_echo(m, dim).dump(2) + "\n");
  json mapping = json::array();
  for (std::size_t k = 0; k < class_names.size(); ++k) {
    mapping.push_back({{"id", k}, {"label", class_names[k]}});
  }
  write_file_atomic((dir / "label_mapping.json").string(), mapping.dump(2) + "\n");
  write_file_atomic((dir / "timings.json").string(), to_json(r, true).dump(2) + "\n");
}

}  // namespace nel::tools
