#pragma once

// CSV and manifest output. CSV follows RFC 4180 quoting with LF line endings;
// floats are written with 17 significant digits so files round-trip exactly.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bayesid/errors.hpp"
#include "bayesid/pipeline.hpp"

namespace bayesid {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_escape(fields[i]);
    }
    out_ << '\n';
    if (!out_) throw IoError("write failed on " + path_.string());
  }

  void close() {
    out_.close();
    if (out_.fail()) throw IoError("close failed on " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

inline const std::vector<std::string>& trace_header() {
  static const std::vector<std::string> h{
      "k",        "hyper",     "residual2", "reg2",          "psi",
      "objective", "norm_lik", "norm_prior", "norm_post",    "norm_evid_direct",
      "norm_evid_bayes", "aic", "bic",       "aicc",          "aic2",
      "bic2",     "aicc2",     "eb",        "inner_iters",   "flags"};
  return h;
}

inline void write_trace_csv(const std::filesystem::path& path, const SweepTrace& trace) {
  CsvWriter w(path);
  w.row(trace_header());
  for (const auto& r : trace.records) {
    w.row({std::to_string(r.k), format_double(r.hyper), format_double(r.residual2),
           format_double(r.reg2), format_double(r.psi), format_double(r.objective),
           format_double(r.norms.lik), format_double(r.norms.prior), format_double(r.norms.post),
           format_double(r.norms.evid_direct), format_double(r.norms.evid_bayes),
           format_double(r.metrics.aic), format_double(r.metrics.bic),
           format_optional(r.metrics.aicc), format_double(r.metrics.aic2),
           format_double(r.metrics.bic2), format_optional(r.metrics.aicc2),
           format_optional(r.metrics.eb), std::to_string(r.inner_iterations), r.flags.str()});
  }
  w.close();
}

inline std::string state_name(Eigen::Index j) { return "x" + std::to_string(j + 1); }

/// One row per (term, state column): label, column, true value, estimate, error bar.
inline void write_coefficients_csv(const std::filesystem::path& path, const IdentifiedModel& model,
                                   const std::optional<Matrix>& xi_true) {
  CsvWriter w(path);
  w.row({"term", "column", "true", "estimate", "sigma"});
  for (Eigen::Index j = 0; j < model.xi.cols(); ++j) {
    for (Eigen::Index l = 0; l < model.xi.rows(); ++l) {
      w.row({model.labels[static_cast<std::size_t>(l)], state_name(j),
             xi_true ? format_double((*xi_true)(l, j)) : std::string(),
             format_double(model.xi(l, j)),
             model.sigma ? format_double((*model.sigma)(l, j)) : std::string()});
    }
  }
  w.close();
}

/// Time series with named column blocks, e.g. {"x", X}, {"xdot", D}.
inline void write_series_csv(const std::filesystem::path& path, const Vector& t,
                             const std::vector<std::pair<std::string, const Matrix*>>& blocks) {
  CsvWriter w(path);
  std::vector<std::string> header{"t"};
  for (const auto& [name, M] : blocks)
    for (Eigen::Index j = 0; j < M->cols(); ++j) header.push_back(name + std::to_string(j + 1));
  w.row(header);
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    std::vector<std::string> row{format_double(t[i])};
    for (const auto& [name, M] : blocks)
      for (Eigen::Index j = 0; j < M->cols(); ++j) row.push_back(format_double((*M)(i, j)));
    w.row(row);
  }
  w.close();
}

inline void write_trajectory_csv(const std::filesystem::path& path, const TimeSeries& truth,
                                 const TimeSeries& pred) {
  if (truth.X.rows() != pred.X.rows()) throw InvalidArgument("trajectory: series lengths differ");
  const Matrix diff = pred.X - truth.X;
  write_series_csv(path, truth.t, {{"true_x", &truth.X}, {"pred_x", &pred.X}, {"diff_x", &diff}});
}

inline nlohmann::ordered_json config_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["system"] = std::string(system_name(cfg.system));
  j["params"] = params_to_vector(cfg.params);
  j["x0"] = std::vector<double>(cfg.x0.data(), cfg.x0.data() + cfg.x0.size());
  j["T"] = cfg.T;
  j["dt"] = cfg.dt;
  j["noise"] = std::string(noise_name(cfg.noise.family));
  j["eps"] = cfg.noise.scale;
  j["seed"] = cfg.noise.seed;
  j["alphabet"] = alphabet_name(cfg.library);
  j["algo"] = std::string(algorithm_name(cfg.algo));
  j["grid"] = cfg.resolved_grid();
  j["eval_point"] = std::string(eval_point_name(cfg.eval));
  j["rtol"] = cfg.integrator.rtol;
  j["atol"] = cfg.integrator.atol;
  j["alpha_eps"] = cfg.alpha_eps;
  j["alpha_xi"] = cfg.alpha_xi;
  j["e_xi"] = cfg.e_xi;
  j["inner_tol"] = cfg.fit.tol;
  j["inner_max_iter"] = cfg.fit.max_iter;
  j["lasso_tol"] = cfg.lasso_tol;
  j["lasso_max_iter"] = cfg.lasso_max_iter;
  j["stlsq_max_iter"] = cfg.stlsq_max_iter;
  if (cfg.select_index) j["select_index"] = *cfg.select_index;
  return j;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed on " + path.string());
}

/// Manifest of a run: resolved configuration, per-column selections, outputs.
inline nlohmann::ordered_json run_manifest(const RunConfig& cfg, const IdentifiedModel* model,
                                           const std::vector<std::string>& files) {
  nlohmann::ordered_json j;
  j["config"] = config_json(cfg);
  if (model) {
    nlohmann::ordered_json cols = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < model->columns(); ++c) {
      const auto& tr = model->traces[c];
      nlohmann::ordered_json col;
      col["column"] = state_name(static_cast<Eigen::Index>(c));
      col["optimum_index"] = tr.optimum;
      col["hyper"] = model->chosen_hyper[c];
      col["flagged"] = static_cast<bool>(model->flagged[c]);
      std::size_t breakdowns = 0;
      for (const auto& r : tr.records) breakdowns += r.flags.numerical() ? 1 : 0;
      col["breakdown_iterations"] = breakdowns;
      cols.push_back(col);
    }
    j["columns"] = cols;
  }
  j["files"] = files;
  return j;
}

struct ReportFiles {
  std::vector<std::string> names;
};

/// Writes traces, coefficients and (if given) the trajectory comparison into
/// `dir`; the manifest lists them. `extra` manifest fields are merged in.
inline ReportFiles report(const std::filesystem::path& dir, const RunConfig& cfg,
                          const IdentifiedModel& model, const std::optional<Matrix>& xi_true,
                          const TimeSeries* truth = nullptr, const TimeSeries* pred = nullptr,
                          const nlohmann::ordered_json& extra = {}) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  ReportFiles files;
  for (std::size_t c = 0; c < model.columns(); ++c) {
    const std::string name = "trace_" + state_name(static_cast<Eigen::Index>(c)) + ".csv";
    write_trace_csv(dir / name, model.traces[c]);
    files.names.push_back(name);
  }
  write_coefficients_csv(dir / "coefficients.csv", model, xi_true);
  files.names.push_back("coefficients.csv");
  if (truth && pred) {
    write_trajectory_csv(dir / "trajectory.csv", *truth, *pred);
    files.names.push_back("trajectory.csv");
  }
  auto manifest = run_manifest(cfg, &model, files.names);
  for (const auto& [k, v] : extra.items()) manifest[k] = v;
  write_json(dir / "manifest.json", manifest);
  return files;
}

}  // namespace bayesid
