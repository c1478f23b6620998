// bayesid command-line front end: simulate, identify, resim, report-all.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <bayesid/bayesid.hpp>

namespace fs = std::filesystem;
using namespace bayesid;

namespace {

// Flag values as given on the command line, keyed like config-file settings.
struct FlagSet {
  std::map<std::string, std::string> values;
  std::string out = "out";
  std::string config;

  void attach(CLI::App* app) {
    static const std::vector<std::pair<std::string, std::string>> flags = {
        {"system", "lorenz | vance | shilnikov"},
        {"T", "final time"},
        {"dt", "sampling step"},
        {"eps", "noise scale"},
        {"noise", "gaussian | laplace"},
        {"seed", "noise seed"},
        {"alphabet", "poly1 | poly2 | poly2c | poly3 | poly3c"},
        {"algo", "ls | ridge | lasso | stlsq | jmap | vba"},
        {"grid", "start:stop:count, log-spaced and descending"},
        {"eval-point", "truth | estimate"},
    };
    for (const auto& [name, help] : flags) app->add_option("--" + name, values[name], help);
    app->add_option("--out", out, "output directory")->capture_default_str();
    app->add_option("--config", config, "key = value settings file; flags take precedence");
  }

  RunConfig resolve(const CLI::App* app) const {
    Settings s;
    if (!config.empty()) s = load_settings(config);
    for (const auto& [name, v] : values) {
      if (app->count("--" + name) > 0) s[detail::normalize_key(name)] = v;
    }
    RunConfig cfg;
    apply_settings(cfg, s);
    cfg.validate();
    return cfg;
  }

  fs::path out_dir(const CLI::App* app) const {
    if (app->count("--out") == 0 && !config.empty()) {
      const auto s = load_settings(config);
      if (auto it = s.find("out"); it != s.end()) return it->second;
    }
    return out;
  }
};

nlohmann::ordered_json column_summary(const IdentifiedModel& m) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < m.columns(); ++c) j.push_back(m.traces[c].optimum);
  return j;
}

void print_model(const IdentifiedModel& m) {
  for (Eigen::Index j = 0; j < m.xi.cols(); ++j) {
    std::printf("x%ld' =", static_cast<long>(j + 1));
    bool any = false;
    for (Eigen::Index l = 0; l < m.xi.rows(); ++l) {
      if (m.xi(l, j) == 0.0) continue;
      if (std::abs(m.xi(l, j)) < 1e-8 && m.sigma) continue;  // Bayesian estimates are never exactly zero
      std::printf(" %+.6g %s", m.xi(l, j), m.labels[static_cast<std::size_t>(l)].c_str());
      any = true;
    }
    std::printf("%s   [optimum %zu of %zu]\n", any ? "" : " 0", m.traces[static_cast<std::size_t>(j)].optimum,
                m.traces[static_cast<std::size_t>(j)].records.size());
  }
}

void run_simulate(const RunConfig& cfg, const fs::path& dir) {
  const auto data = generate_data(cfg);
  fs::create_directories(dir);
  write_series_csv(dir / "series.csv", data.clean.t,
                   {{"x", &data.clean.X}, {"y", &data.X_noisy}, {"xdot", &data.Xdot}});
  write_json(dir / "manifest.json", run_manifest(cfg, nullptr, {"series.csv"}));
  std::printf("wrote %ld samples to %s\n", static_cast<long>(data.clean.t.size()), (dir / "series.csv").c_str());
}

void run_identify(const RunConfig& cfg, const fs::path& dir, bool with_resim) {
  const auto res = identify(cfg);
  print_model(res.model);
  if (!with_resim) {
    report(dir, cfg, res.model, res.data.xi_true);
    std::printf("report written to %s\n", dir.c_str());
    return;
  }
  const auto pred = resimulate(res.model, cfg.x0, cfg.T, cfg.dt, cfg.integrator);
  nlohmann::ordered_json extra;
  extra["resim"] = {{"blew_up", pred.blew_up},
                    {"blowup_time", pred.blew_up ? nlohmann::ordered_json(pred.blowup_time) : nullptr},
                    {"divergence_time_10pct", divergence_time(res.data.clean, pred.series, 0.1)}};
  report(dir, cfg, res.model, res.data.xi_true, &res.data.clean, &pred.series, extra);
  std::printf("divergence time (10%% of range): %.6g%s\n", extra["resim"]["divergence_time_10pct"].get<double>(),
              pred.blew_up ? "  (resimulation blew up)" : "");
  std::printf("report written to %s\n", dir.c_str());
}

void run_report_all(RunConfig cfg, const fs::path& dir, bool grid_given) {
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (auto algo : {Algorithm::ls, Algorithm::ridge, Algorithm::lasso, Algorithm::stlsq, Algorithm::jmap,
                    Algorithm::vba}) {
    cfg.algo = algo;
    if (!grid_given) cfg.grid.clear();
    const std::string name(algorithm_name(algo));
    std::printf("== %s\n", name.c_str());
    const auto res = identify(cfg);
    print_model(res.model);
    const auto pred = resimulate(res.model, cfg.x0, cfg.T, cfg.dt, cfg.integrator);
    const double tdiv = divergence_time(res.data.clean, pred.series, 0.1);
    nlohmann::ordered_json extra;
    extra["resim"] = {{"blew_up", pred.blew_up}, {"divergence_time_10pct", tdiv}};
    report(dir / name, cfg, res.model, res.data.xi_true, &res.data.clean, &pred.series, extra);
    summary.push_back({{"algo", name},
                       {"max_abs_error", (res.model.xi - res.data.xi_true).cwiseAbs().maxCoeff()},
                       {"optimum", column_summary(res.model)},
                       {"divergence_time_10pct", tdiv}});
  }
  write_json(dir / "summary.json", summary);
  std::printf("reports written under %s\n", dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse and Bayesian identification of polynomial dynamical systems"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* app;
    FlagSet flags;
  };
  std::map<std::string, Sub> subs;
  const std::vector<std::pair<std::string, std::string>> names = {
      {"simulate", "integrate a system, add noise, write the series"},
      {"identify", "identify the model and write traces and coefficients"},
      {"resim", "identify, then re-integrate the identified model against the truth"},
      {"report-all", "run every algorithm and write one report directory each"},
  };
  for (const auto& [name, help] : names) {
    auto& s = subs[name];
    s.app = app.add_subcommand(name, help);
    s.flags.attach(s.app);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [name, s] : subs) {
      if (!s.app->parsed()) continue;
      const RunConfig cfg = s.flags.resolve(s.app);
      const fs::path dir = s.flags.out_dir(s.app);
      if (name == "simulate") {
        run_simulate(cfg, dir);
      } else if (name == "identify") {
        run_identify(cfg, dir, false);
      } else if (name == "resim") {
        run_identify(cfg, dir, true);
      } else {
        bool grid_given = s.app->count("--grid") > 0;
        if (!grid_given && !s.flags.config.empty()) grid_given = load_settings(s.flags.config).count("grid") > 0;
        run_report_all(cfg, dir, grid_given);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
