// Command-line front end for the rpls shared library. All numerical work
// happens behind the C API; this file only maps flags onto config keys and
// reports errors.
//
// Exit codes: 0 success, 1 runtime/data error, 2 usage/config error.
//
// --config FILE reads flat key=value lines (keys are the long option names
// without dashes). Precedence: command-line flags, then config file, then
// built-in defaults.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rpls/rpls.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigDeleter {
  void operator()(rpls_config* cfg) const { rpls_config_free(cfg); }
};
using ConfigPtr = std::unique_ptr<rpls_config, ConfigDeleter>;

struct DatasetDeleter {
  void operator()(rpls_dataset* ds) const { rpls_dataset_free(ds); }
};
using DatasetPtr = std::unique_ptr<rpls_dataset, DatasetDeleter>;

struct ModelDeleter {
  void operator()(rpls_model* m) const { rpls_model_free(m); }
};
using ModelPtr = std::unique_ptr<rpls_model, ModelDeleter>;

[[noreturn]] void die(rpls_status status) {
  std::cerr << "error (" << rpls_status_name(status) << "): " << rpls_last_error() << "\n";
  std::exit(kExitRuntime);
}

void require_ok(rpls_status status) {
  if (status != RPLS_OK) die(status);
}

void set_key(rpls_config* cfg, const std::string& key, const std::string& value) {
  require_ok(rpls_config_set(cfg, key.c_str(), value.c_str()));
}

// std::to_string truncates small doubles to 0.000000
std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ----------------------------------------------------------------------
// flat key=value config files with flags-beat-config precedence

template <typename T>
void assign_from_string(T& target, const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if constexpr (std::is_same_v<T, bool>) {
      if (value == "true" || value == "1" || value == "yes") {
        target = true;
        return;
      }
      if (value == "false" || value == "0" || value == "no") {
        target = false;
        return;
      }
      throw std::invalid_argument(value);
    } else if constexpr (std::is_same_v<T, std::string>) {
      target = value;
      return;
    } else if constexpr (std::is_floating_point_v<T>) {
      target = std::stod(value, &used);
    } else if constexpr (std::is_unsigned_v<T>) {
      target = static_cast<T>(std::stoull(value, &used));
    } else {
      target = static_cast<T>(std::stoll(value, &used));
    }
    if (used != value.size()) throw std::invalid_argument(value);
  } catch (const std::exception&) {
    throw UsageError("config value for '" + key + "' is not valid: '" + value + "'");
  }
}

// One subcommand's bindings: config key -> (option, setter).
class ConfigBindings {
 public:
  template <typename T>
  CLI::Option* add_option(CLI::App* cmd, const std::string& name, T& var,
                          const std::string& desc) {
    CLI::Option* opt = cmd->add_option(name, var, desc);
    bind(name, opt, var);
    return opt;
  }

  CLI::Option* add_flag(CLI::App* cmd, const std::string& name, bool& var,
                        const std::string& desc) {
    CLI::Option* opt = cmd->add_flag(name, var, desc);
    bind(name, opt, var);
    return opt;
  }

  void attach_config_option(CLI::App* cmd) {
    cmd->add_option("--config", path_,
                    "Flat key=value config file; command-line flags take precedence");
  }

  void apply() const {
    if (path_.empty()) return;
    std::ifstream in(path_);
    if (!in) throw UsageError("cannot open config file " + path_);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto begin = line.find_first_not_of(" \t\r");
      if (begin == std::string::npos || line[begin] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw UsageError(path_ + ":" + std::to_string(line_no) + ": expected key=value");
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      const auto it = entries_.find(key);
      if (it == entries_.end())
        throw UsageError(path_ + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
      if (it->second.option->count() == 0) it->second.apply(key, value);
    }
  }

 private:
  struct Entry {
    CLI::Option* option;
    std::function<void(const std::string&, const std::string&)> apply;
  };

  template <typename T>
  void bind(const std::string& name, CLI::Option* opt, T& var) {
    std::string key = name;
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    entries_[key] = Entry{opt, [&var](const std::string& k, const std::string& v) {
                            assign_from_string(var, k, v);
                          }};
  }

  std::map<std::string, Entry> entries_;
  std::string path_;
};

// ----------------------------------------------------------------------

// Shared flags for the commands that fit models from a dataset.
struct CommonOptions {
  std::string manifest;
  std::string phenotypes;
  std::string responses;
  std::string method = "riemannian";
  std::string input_kind = "matrix";
  std::string group_response = "group";
  std::string network_map;
  std::string out_dir = ".";
  bool regularize = false;
  std::uint64_t seed = 0;
  int workers = 1;
  double frechet_tol = 1e-6;
  double frechet_step = 1.0;
  int frechet_max_iter = 200;
  double nipals_tol = 1e-10;
  int nipals_max_iter = 500;
};

void add_common_options(CLI::App* cmd, ConfigBindings& cfg, CommonOptions& opts,
                        bool responses_required) {
  auto* manifest = cfg.add_option(cmd, "--manifest", opts.manifest,
                                  "Manifest file: one 'subject_id path' line per subject");
  manifest->required();
  auto* pheno = cfg.add_option(cmd, "--phenotypes", opts.phenotypes,
                               "Delimited phenotype table with a header row");
  auto* resp = cfg.add_option(cmd, "--responses", opts.responses,
                              "Comma-separated response column names, e.g. age,group");
  if (responses_required) {
    pheno->required();
    resp->required();
  }
  cfg.add_option(cmd, "--method", opts.method, "riemannian, raw, or fisher")
      ->capture_default_str();
  cfg.add_option(cmd, "--input-kind", opts.input_kind, "matrix (R x R) or timeseries (T x R)")
      ->check(CLI::IsMember({"matrix", "timeseries"}))
      ->capture_default_str();
  cfg.add_flag(cmd, "--regularize", opts.regularize, "Add the identity to each matrix (F + I)");
  cfg.add_option(cmd, "--group-response", opts.group_response,
                 "Response treated as the binary group for classification metrics")
      ->capture_default_str();
  cfg.add_option(cmd, "--network-map", opts.network_map,
                 "ROI-to-network map (roi_label network per line)");
  cfg.add_option(cmd, "--out", opts.out_dir, "Output directory")->capture_default_str();
  cfg.add_option(cmd, "--seed", opts.seed, "Random seed")->capture_default_str();
  cfg.add_option(cmd, "--workers", opts.workers,
                 "Worker threads (results do not depend on this)")
      ->envname("RPLS_WORKERS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cfg.add_option(cmd, "--frechet-tol", opts.frechet_tol, "Fréchet mean gradient tolerance")
      ->capture_default_str();
  cfg.add_option(cmd, "--frechet-step", opts.frechet_step, "Fréchet mean initial step size")
      ->capture_default_str();
  cfg.add_option(cmd, "--frechet-max-iter", opts.frechet_max_iter, "Fréchet mean iteration cap")
      ->capture_default_str();
  cfg.add_option(cmd, "--nipals-tol", opts.nipals_tol, "NIPALS inner-loop tolerance")
      ->capture_default_str();
  cfg.add_option(cmd, "--nipals-max-iter", opts.nipals_max_iter, "NIPALS inner-loop iteration cap")
      ->capture_default_str();
  cfg.attach_config_option(cmd);
}

ConfigPtr build_config(const CommonOptions& opts) {
  ConfigPtr cfg(rpls_config_create());
  set_key(cfg.get(), "method", opts.method);
  set_key(cfg.get(), "input_kind", opts.input_kind);
  set_key(cfg.get(), "responses", opts.responses);
  set_key(cfg.get(), "group_response", opts.group_response);
  set_key(cfg.get(), "regularize", opts.regularize ? "true" : "false");
  set_key(cfg.get(), "seed", std::to_string(opts.seed));
  set_key(cfg.get(), "workers", std::to_string(opts.workers));
  set_key(cfg.get(), "frechet_tolerance", format_value(opts.frechet_tol));
  set_key(cfg.get(), "frechet_step", format_value(opts.frechet_step));
  set_key(cfg.get(), "frechet_max_iterations", std::to_string(opts.frechet_max_iter));
  set_key(cfg.get(), "nipals_tolerance", format_value(opts.nipals_tol));
  set_key(cfg.get(), "nipals_max_iterations", std::to_string(opts.nipals_max_iter));
  return cfg;
}

void validate_common(const CommonOptions& opts) {
  for (const std::string* path : {&opts.manifest, &opts.phenotypes, &opts.network_map}) {
    if (!path->empty() && !std::filesystem::exists(*path))
      throw UsageError("file does not exist: " + *path);
  }
  if (opts.workers < 1) throw UsageError("--workers must be positive");
}

DatasetPtr load_dataset(const CommonOptions& opts, const rpls_config* cfg) {
  rpls_dataset* ds = nullptr;
  require_ok(rpls_dataset_load(opts.manifest.c_str(),
                               opts.phenotypes.empty() ? nullptr : opts.phenotypes.c_str(), cfg,
                               &ds));
  return DatasetPtr(ds);
}

std::string out_path(const std::string& out_dir, const std::string& name) {
  std::filesystem::create_directories(out_dir);
  return (std::filesystem::path(out_dir) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian partial least squares for functional connectivity matrices"};
  app.require_subcommand(1);

  // fit -----------------------------------------------------------------
  CommonOptions fit_opts;
  ConfigBindings fit_cfg;
  int fit_components = 2;
  CLI::App* fit = app.add_subcommand("fit", "Fit a model and write coefficient matrices");
  add_common_options(fit, fit_cfg, fit_opts, true);
  fit_cfg.add_option(fit, "--components", fit_components, "Number of latent components")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // cv ------------------------------------------------------------------
  CommonOptions cv_opts;
  ConfigBindings cv_cfg;
  int cv_folds = 10;
  int cv_max_components = 10;
  CLI::App* cv = app.add_subcommand("cv", "Cross-validate the number of components");
  add_common_options(cv, cv_cfg, cv_opts, true);
  cv_cfg.add_option(cv, "--folds", cv_folds, "Number of folds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cv_cfg.add_option(cv, "--max-components", cv_max_components, "Evaluate K = 1..max")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // vip -----------------------------------------------------------------
  CommonOptions vip_opts;
  ConfigBindings vip_cfg;
  int vip_components = 2;
  int vip_permutations = 200;
  double vip_alpha = 0.05;
  bool vip_smoothed = false;
  CLI::App* vip = app.add_subcommand("vip", "Permutation test of the VIP statistic");
  add_common_options(vip, vip_cfg, vip_opts, true);
  vip_cfg.add_option(vip, "--components", vip_components, "Number of latent components")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  vip_cfg.add_option(vip, "--permutations", vip_permutations, "Permutations per predictor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  vip_cfg.add_option(vip, "--alpha", vip_alpha, "FDR significance level")
      ->check(CLI::Range(1e-12, 1.0))
      ->capture_default_str();
  vip_cfg.add_flag(vip, "--smoothed-pvalues", vip_smoothed,
                   "Report (count+1)/(H+1) instead of count/H");

  // predict ---------------------------------------------------------------
  ConfigBindings predict_cfg;
  std::string predict_model;
  std::string predict_manifest;
  std::string predict_input_kind = "matrix";
  std::string predict_out = ".";
  CLI::App* predict = app.add_subcommand("predict", "Predict responses for new subjects");
  predict_cfg.add_option(predict, "--model", predict_model, "Model file written by fit")
      ->required();
  predict_cfg.add_option(predict, "--manifest", predict_manifest,
                         "Manifest of subjects to predict")
      ->required();
  predict_cfg.add_option(predict, "--input-kind", predict_input_kind, "matrix or timeseries")
      ->check(CLI::IsMember({"matrix", "timeseries"}))
      ->capture_default_str();
  predict_cfg.add_option(predict, "--out", predict_out, "Output directory")
      ->capture_default_str();
  predict_cfg.attach_config_option(predict);

  // simulate ---------------------------------------------------------------
  ConfigBindings sim_cfg;
  int sim_dim = 10, sim_subjects = 100, sim_latent = 2, sim_response_dim = 2, sim_active = 0;
  double sim_loading_scale = 1.0, sim_noise = 0.05;
  std::uint64_t sim_seed = 0;
  std::string sim_out = ".";
  CLI::App* simulate =
      app.add_subcommand("simulate", "Generate a synthetic dataset with truth record");
  sim_cfg.add_option(simulate, "--dim", sim_dim, "Matrix dimension R")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  sim_cfg.add_option(simulate, "--subjects", sim_subjects, "Number of subjects")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim_cfg.add_option(simulate, "--latent", sim_latent, "True number of latent components")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim_cfg.add_option(simulate, "--response-dim", sim_response_dim, "Number of response variables")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim_cfg.add_option(simulate, "--loading-scale", sim_loading_scale,
                     "Scale of the predictor loadings")
      ->capture_default_str();
  sim_cfg.add_option(simulate, "--noise", sim_noise, "Tangent-space noise scale")
      ->capture_default_str();
  sim_cfg.add_option(simulate, "--active-coords", sim_active,
                     "Sparse loadings: active coordinates per component (0 = dense)")
      ->capture_default_str();
  sim_cfg.add_option(simulate, "--seed", sim_seed, "Random seed")->capture_default_str();
  sim_cfg.add_option(simulate, "--out", sim_out, "Output directory")->capture_default_str();
  sim_cfg.attach_config_option(simulate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (fit->parsed()) {
      fit_cfg.apply();
      validate_common(fit_opts);
      ConfigPtr cfg = build_config(fit_opts);
      set_key(cfg.get(), "components", std::to_string(fit_components));
      DatasetPtr ds = load_dataset(fit_opts, cfg.get());
      rpls_model* model = nullptr;
      require_ok(rpls_fit(ds.get(), cfg.get(), &model));
      ModelPtr model_ptr(model);
      std::filesystem::create_directories(fit_opts.out_dir);
      require_ok(rpls_model_write_outputs(
          model, fit_opts.out_dir.c_str(),
          fit_opts.network_map.empty() ? nullptr : fit_opts.network_map.c_str()));
      std::cout << "model and coefficient matrices written to " << fit_opts.out_dir << "\n";
      return kExitOk;
    }

    if (cv->parsed()) {
      cv_cfg.apply();
      validate_common(cv_opts);
      ConfigPtr cfg = build_config(cv_opts);
      set_key(cfg.get(), "folds", std::to_string(cv_folds));
      set_key(cfg.get(), "max_components", std::to_string(cv_max_components));
      DatasetPtr ds = load_dataset(cv_opts, cfg.get());
      if (cv_folds < 2 || cv_folds > rpls_dataset_size(ds.get()))
        throw UsageError("--folds " + std::to_string(cv_folds) + " must lie in [2, n_subjects = " +
                         std::to_string(rpls_dataset_size(ds.get())) + "]");
      const std::string report = out_path(cv_opts.out_dir, "cv_report.txt");
      require_ok(rpls_cross_validate_compare(ds.get(), cfg.get(), report.c_str()));
      std::cout << "cross-validation report written to " << report << "\n";
      return kExitOk;
    }

    if (vip->parsed()) {
      vip_cfg.apply();
      validate_common(vip_opts);
      ConfigPtr cfg = build_config(vip_opts);
      set_key(cfg.get(), "components", std::to_string(vip_components));
      set_key(cfg.get(), "permutations", std::to_string(vip_permutations));
      set_key(cfg.get(), "alpha", format_value(vip_alpha));
      set_key(cfg.get(), "smoothed_pvalues", vip_smoothed ? "true" : "false");
      if (vip_permutations < 1) throw UsageError("--permutations must be positive");
      DatasetPtr ds = load_dataset(vip_opts, cfg.get());
      rpls_vip_result* result = nullptr;
      require_ok(rpls_vip(ds.get(), cfg.get(), &result));
      const std::string report = out_path(vip_opts.out_dir, "vip_report.txt");
      const rpls_status status = rpls_vip_write_report(
          result, vip_opts.network_map.empty() ? nullptr : vip_opts.network_map.c_str(),
          report.c_str());
      const int significant = rpls_vip_significant_count(result);
      rpls_vip_free(result);
      require_ok(status);
      std::cout << "vip report written to " << report << " (" << significant
                << " significant connections)\n";
      return kExitOk;
    }

    if (predict->parsed()) {
      predict_cfg.apply();
      if (!std::filesystem::exists(predict_model))
        throw UsageError("file does not exist: " + predict_model);
      if (!std::filesystem::exists(predict_manifest))
        throw UsageError("file does not exist: " + predict_manifest);
      ConfigPtr cfg(rpls_config_create());
      set_key(cfg.get(), "input_kind", predict_input_kind);
      rpls_model* model = nullptr;
      require_ok(rpls_model_load(predict_model.c_str(), &model));
      ModelPtr model_ptr(model);
      rpls_dataset* ds = nullptr;
      require_ok(rpls_dataset_load(predict_manifest.c_str(), nullptr, cfg.get(), &ds));
      DatasetPtr ds_ptr(ds);
      const std::string path = out_path(predict_out, "predictions.tsv");
      require_ok(rpls_model_write_predictions(model, ds, path.c_str()));
      std::cout << "predictions written to " << path << "\n";
      return kExitOk;
    }

    if (simulate->parsed()) {
      sim_cfg.apply();
      if (sim_dim < 2) throw UsageError("--dim must be at least 2");
      ConfigPtr cfg(rpls_config_create());
      set_key(cfg.get(), "sim_dim", std::to_string(sim_dim));
      set_key(cfg.get(), "sim_subjects", std::to_string(sim_subjects));
      set_key(cfg.get(), "sim_latent", std::to_string(sim_latent));
      set_key(cfg.get(), "sim_response_dim", std::to_string(sim_response_dim));
      set_key(cfg.get(), "sim_loading_scale", format_value(sim_loading_scale));
      set_key(cfg.get(), "sim_noise", format_value(sim_noise));
      set_key(cfg.get(), "sim_active_coords", std::to_string(sim_active));
      set_key(cfg.get(), "seed", std::to_string(sim_seed));
      require_ok(rpls_simulate(cfg.get(), sim_out.c_str()));
      std::cout << "synthetic dataset written to " << sim_out << "\n";
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  return kExitUsage;
}
