#include "rpls/rpls.h"

#include <cstring>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "pipeline.hpp"

namespace {

thread_local std::string g_last_error;

rpls_status status_from_code(rpls::ErrorCode code) {
  using rpls::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidInput: return RPLS_ERROR_INVALID_INPUT;
    case ErrorCode::NotPositiveDefinite: return RPLS_ERROR_NOT_POSITIVE_DEFINITE;
    case ErrorCode::BaseMismatch: return RPLS_ERROR_BASE_MISMATCH;
    case ErrorCode::InvalidComponents: return RPLS_ERROR_INVALID_COMPONENTS;
    case ErrorCode::DegenerateResponse: return RPLS_ERROR_DEGENERATE_RESPONSE;
    case ErrorCode::NonConvergence: return RPLS_ERROR_NON_CONVERGENCE;
    case ErrorCode::RankDeficiency: return RPLS_ERROR_RANK_DEFICIENCY;
    case ErrorCode::DegenerateModel: return RPLS_ERROR_DEGENERATE_MODEL;
    case ErrorCode::EmptyInput: return RPLS_ERROR_EMPTY_INPUT;
    case ErrorCode::ConstantSignal: return RPLS_ERROR_CONSTANT_SIGNAL;
    case ErrorCode::OutOfDomain: return RPLS_ERROR_OUT_OF_DOMAIN;
    case ErrorCode::ParseError: return RPLS_ERROR_PARSE;
    case ErrorCode::IoError: return RPLS_ERROR_IO;
  }
  return RPLS_ERROR_INTERNAL;
}

template <typename Fn>
rpls_status guarded(Fn&& fn) {
  try {
    fn();
    return RPLS_OK;
  } catch (const rpls::Error& e) {
    g_last_error = e.what();
    return status_from_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RPLS_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return RPLS_ERROR_INTERNAL;
  }
}

rpls_status invalid_argument(const char* message) {
  g_last_error = message;
  return RPLS_ERROR_INVALID_INPUT;
}

}  // namespace

struct rpls_config {
  std::map<std::string, std::string> values;

  std::string get(const std::string& key, const std::string& fallback) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(it->second);
      return v;
    } catch (const std::exception&) {
      rpls::fail(rpls::ErrorCode::InvalidInput,
                 "config key '" + key + "' has non-numeric value '" + it->second + "'");
    }
  }

  long long get_int(const std::string& key, long long fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(it->second);
      return v;
    } catch (const std::exception&) {
      rpls::fail(rpls::ErrorCode::InvalidInput,
                 "config key '" + key + "' has non-integer value '" + it->second + "'");
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    const std::string& v = it->second;
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    rpls::fail(rpls::ErrorCode::InvalidInput,
               "config key '" + key + "' has non-boolean value '" + v + "'");
  }
};

struct rpls_dataset {
  rpls::StudyDataset data;
};

struct rpls_model {
  rpls::StudyModel model;
};

struct rpls_cv_result {
  rpls::CvResult cv;
  rpls::StudyConfig study_cfg;
  std::vector<std::string> response_names;
};

struct rpls_vip_result {
  rpls::StudyVip vip;
  std::uint64_t seed = 0;
  int dim = 0;
};

namespace {

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(csv);
  while (std::getline(in, field, ',')) {
    const auto begin = field.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    const auto end = field.find_last_not_of(" \t");
    out.push_back(field.substr(begin, end - begin + 1));
  }
  return out;
}

rpls::StudyConfig study_config(const rpls_config& cfg) {
  rpls::StudyConfig sc;
  const std::string methods = cfg.get("method", "riemannian");
  const std::vector<std::string> parts = split_csv(methods);
  if (parts.size() != 1)
    rpls::fail(rpls::ErrorCode::InvalidInput,
               "this operation needs exactly one method (got '" + methods + "')");
  sc.method = rpls::method_from_string(parts[0]);
  sc.regularize = cfg.get_bool("regularize", false);
  sc.n_components = static_cast<int>(cfg.get_int("components", 2));
  sc.frechet.tolerance = cfg.get_double("frechet_tolerance", 1e-6);
  sc.frechet.initial_step = cfg.get_double("frechet_step", 1.0);
  sc.frechet.max_iterations = static_cast<int>(cfg.get_int("frechet_max_iterations", 200));
  sc.nipals.tolerance = cfg.get_double("nipals_tolerance", 1e-10);
  sc.nipals.max_iterations = static_cast<int>(cfg.get_int("nipals_max_iterations", 500));
  sc.group_response = cfg.get("group_response", "group");
  sc.classification_threshold = cfg.get_double("classification_threshold", 0.5);
  return sc;
}

std::vector<int> candidate_components(const rpls_config& cfg) {
  const int k_max = static_cast<int>(cfg.get_int("max_components", 10));
  if (k_max < 1) rpls::fail(rpls::ErrorCode::InvalidInput, "max_components must be positive");
  std::vector<int> ks(k_max);
  for (int i = 0; i < k_max; ++i) ks[i] = i + 1;
  return ks;
}

rpls::VipConfig vip_config(const rpls_config& cfg) {
  rpls::VipConfig vc;
  vc.permutations = static_cast<int>(cfg.get_int("permutations", 200));
  vc.alpha = cfg.get_double("alpha", 0.05);
  vc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  vc.smoothed_p_values = cfg.get_bool("smoothed_pvalues", false);
  vc.workers = static_cast<int>(cfg.get_int("workers", 1));
  return vc;
}

rpls_status copy_vector(const rpls::Vector& v, double* out, size_t out_len) {
  if (!out) return invalid_argument("null output buffer");
  if (out_len < static_cast<size_t>(v.size())) return invalid_argument("output buffer too small");
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i];
  return RPLS_OK;
}

rpls::Matrix matrix_from_buffer(const double* data, int dim) {
  rpls::Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = data[static_cast<size_t>(i) * dim + j];
  return m;
}

void matrix_to_buffer(const rpls::Matrix& m, double* out) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out[static_cast<size_t>(i) * m.cols() + j] = m(i, j);
}

}  // namespace

extern "C" {

const char* rpls_status_name(rpls_status status) {
  switch (status) {
    case RPLS_OK: return "ok";
    case RPLS_ERROR_INVALID_INPUT: return "invalid input";
    case RPLS_ERROR_NOT_POSITIVE_DEFINITE: return "not positive definite";
    case RPLS_ERROR_BASE_MISMATCH: return "base mismatch";
    case RPLS_ERROR_INVALID_COMPONENTS: return "invalid component count";
    case RPLS_ERROR_DEGENERATE_RESPONSE: return "degenerate response";
    case RPLS_ERROR_NON_CONVERGENCE: return "non-convergence";
    case RPLS_ERROR_RANK_DEFICIENCY: return "rank deficiency";
    case RPLS_ERROR_DEGENERATE_MODEL: return "degenerate model";
    case RPLS_ERROR_EMPTY_INPUT: return "empty input";
    case RPLS_ERROR_CONSTANT_SIGNAL: return "constant signal";
    case RPLS_ERROR_OUT_OF_DOMAIN: return "out of domain";
    case RPLS_ERROR_PARSE: return "parse error";
    case RPLS_ERROR_IO: return "io error";
    case RPLS_ERROR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* rpls_last_error(void) { return g_last_error.c_str(); }

const char* rpls_version(void) { return "0.1.0"; }

rpls_config* rpls_config_create(void) { return new rpls_config(); }

void rpls_config_free(rpls_config* cfg) { delete cfg; }

rpls_status rpls_config_set(rpls_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return invalid_argument("null config/key/value");
  cfg->values[key] = value;
  return RPLS_OK;
}

rpls_status rpls_dataset_load(const char* manifest_path, const char* phenotype_path,
                              const rpls_config* cfg, rpls_dataset** out) {
  if (!manifest_path || !cfg || !out) return invalid_argument("null argument");
  return guarded([&] {
    const std::string kind_name = cfg->get("input_kind", "matrix");
    rpls::InputKind kind;
    if (kind_name == "matrix")
      kind = rpls::InputKind::ConnectivityMatrix;
    else if (kind_name == "timeseries")
      kind = rpls::InputKind::TimeSeries;
    else
      rpls::fail(rpls::ErrorCode::InvalidInput,
                 "input_kind must be 'matrix' or 'timeseries', got '" + kind_name + "'");
    const std::string pheno = phenotype_path ? phenotype_path : "";
    const std::vector<std::string> responses = split_csv(cfg->get("responses", ""));
    if (!pheno.empty() && responses.empty())
      rpls::fail(rpls::ErrorCode::InvalidInput, "a phenotype table needs a 'responses' list");
    auto ds = std::make_unique<rpls_dataset>();
    ds->data = rpls::load_dataset(manifest_path, pheno, responses, kind);
    *out = ds.release();
  });
}

void rpls_dataset_free(rpls_dataset* ds) { delete ds; }

int rpls_dataset_size(const rpls_dataset* ds) { return ds ? ds->data.size() : 0; }

int rpls_dataset_dim(const rpls_dataset* ds) { return ds ? ds->data.dim : 0; }

int rpls_dataset_response_count(const rpls_dataset* ds) {
  return ds ? static_cast<int>(ds->data.response_names.size()) : 0;
}

const char* rpls_dataset_subject_id(const rpls_dataset* ds, int index) {
  if (!ds || index < 0 || index >= ds->data.size()) return nullptr;
  return ds->data.subjects[index].subject_id.c_str();
}

rpls_status rpls_simulate(const rpls_config* cfg, const char* out_dir) {
  if (!cfg || !out_dir) return invalid_argument("null argument");
  return guarded([&] {
    rpls::SimulateStudyConfig sim;
    sim.dim = static_cast<int>(cfg->get_int("sim_dim", 10));
    sim.n_subjects = static_cast<int>(cfg->get_int("sim_subjects", 100));
    sim.latent = static_cast<int>(cfg->get_int("sim_latent", 2));
    sim.response_dim = static_cast<int>(cfg->get_int("sim_response_dim", 2));
    sim.loading_scale = cfg->get_double("sim_loading_scale", 1.0);
    sim.noise_scale = cfg->get_double("sim_noise", 0.05);
    sim.active_coords = static_cast<int>(cfg->get_int("sim_active_coords", 0));
    sim.seed = static_cast<std::uint64_t>(cfg->get_int("seed", 0));
    rpls::simulate_study(sim, out_dir);
  });
}

rpls_status rpls_fit(const rpls_dataset* ds, const rpls_config* cfg, rpls_model** out) {
  if (!ds || !cfg || !out) return invalid_argument("null argument");
  return guarded([&] {
    auto model = std::make_unique<rpls_model>();
    model->model = rpls::fit_study(ds->data, study_config(*cfg));
    *out = model.release();
  });
}

void rpls_model_free(rpls_model* model) { delete model; }

rpls_status rpls_model_save(const rpls_model* model, const char* path) {
  if (!model || !path) return invalid_argument("null argument");
  return guarded([&] { rpls::save_study_model(model->model, path); });
}

rpls_status rpls_model_load(const char* path, rpls_model** out) {
  if (!path || !out) return invalid_argument("null argument");
  return guarded([&] {
    auto model = std::make_unique<rpls_model>();
    model->model = rpls::load_study_model(path);
    *out = model.release();
  });
}

int rpls_model_components(const rpls_model* model) {
  return model ? model->model.fold.model.n_components : 0;
}

int rpls_model_dim(const rpls_model* model) { return model ? model->model.dim : 0; }

int rpls_model_response_count(const rpls_model* model) {
  return model ? static_cast<int>(model->model.response_names.size()) : 0;
}

rpls_status rpls_model_predict(const rpls_model* model, const rpls_dataset* ds, double* out,
                               size_t out_len) {
  if (!model || !ds || !out) return invalid_argument("null argument");
  return guarded([&] {
    const rpls::Matrix pred = rpls::predict_study(model->model, ds->data);
    const size_t needed = static_cast<size_t>(pred.rows()) * static_cast<size_t>(pred.cols());
    if (out_len < needed) rpls::fail(rpls::ErrorCode::InvalidInput, "output buffer too small");
    for (Eigen::Index i = 0; i < pred.rows(); ++i)
      for (Eigen::Index j = 0; j < pred.cols(); ++j)
        out[static_cast<size_t>(i) * pred.cols() + j] = pred(i, j);
  });
}

rpls_status rpls_model_write_predictions(const rpls_model* model, const rpls_dataset* ds,
                                         const char* path) {
  if (!model || !ds || !path) return invalid_argument("null argument");
  return guarded([&] {
    const rpls::Matrix pred = rpls::predict_study(model->model, ds->data);
    std::vector<std::string> ids;
    ids.reserve(ds->data.subjects.size());
    for (const auto& s : ds->data.subjects) ids.push_back(s.subject_id);
    rpls::write_predictions(ids, model->model.response_names, pred, path);
  });
}

rpls_status rpls_model_write_outputs(const rpls_model* model, const char* out_dir,
                                     const char* network_map_path) {
  if (!model || !out_dir) return invalid_argument("null argument");
  return guarded([&] {
    if (network_map_path && *network_map_path) {
      const rpls::NetworkMap map = rpls::load_network_map(network_map_path);
      rpls::write_fit_outputs(model->model, out_dir, &map);
    } else {
      rpls::write_fit_outputs(model->model, out_dir, nullptr);
    }
  });
}

rpls_status rpls_cross_validate(const rpls_dataset* ds, const rpls_config* cfg,
                                rpls_cv_result** out) {
  if (!ds || !cfg || !out) return invalid_argument("null argument");
  return guarded([&] {
    auto result = std::make_unique<rpls_cv_result>();
    result->study_cfg = study_config(*cfg);
    result->response_names = ds->data.response_names;
    result->cv = rpls::cv_study(ds->data, result->study_cfg, candidate_components(*cfg),
                                static_cast<int>(cfg->get_int("folds", 10)),
                                static_cast<std::uint64_t>(cfg->get_int("seed", 0)));
    *out = result.release();
  });
}

void rpls_cv_free(rpls_cv_result* cv) { delete cv; }

int rpls_cv_chosen_components(const rpls_cv_result* cv) {
  return cv ? cv->cv.chosen_components : 0;
}

rpls_status rpls_cv_write_report(const rpls_cv_result* cv, const char* path) {
  if (!cv || !path) return invalid_argument("null argument");
  return guarded([&] { rpls::write_cv_report(cv->cv, cv->study_cfg, cv->response_names, path); });
}

rpls_status rpls_cross_validate_compare(const rpls_dataset* ds, const rpls_config* cfg,
                                        const char* report_path) {
  if (!ds || !cfg || !report_path) return invalid_argument("null argument");
  return guarded([&] {
    const std::vector<std::string> names = split_csv(cfg->get("method", "riemannian"));
    if (names.empty()) rpls::fail(rpls::ErrorCode::InvalidInput, "no methods named");
    const int folds = static_cast<int>(cfg->get_int("folds", 10));
    const auto seed = static_cast<std::uint64_t>(cfg->get_int("seed", 0));
    std::vector<std::pair<rpls::Method, rpls::CvResult>> results;
    for (const std::string& name : names) {
      rpls_config single = *cfg;
      single.values["method"] = name;
      rpls::StudyConfig sc = study_config(single);
      results.emplace_back(sc.method,
                           rpls::cv_study(ds->data, sc, candidate_components(*cfg), folds, seed));
    }
    rpls::write_cv_comparison_report(results, ds->data.response_names, folds, seed, report_path);
  });
}

rpls_status rpls_vip(const rpls_dataset* ds, const rpls_config* cfg, rpls_vip_result** out) {
  if (!ds || !cfg || !out) return invalid_argument("null argument");
  return guarded([&] {
    auto result = std::make_unique<rpls_vip_result>();
    const rpls::VipConfig vc = vip_config(*cfg);
    result->vip = rpls::vip_study(ds->data, study_config(*cfg), vc);
    result->seed = vc.seed;
    result->dim = ds->data.dim;
    *out = result.release();
  });
}

void rpls_vip_free(rpls_vip_result* vip) { delete vip; }

int rpls_vip_coordinate_count(const rpls_vip_result* vip) {
  return vip ? static_cast<int>(vip->vip.report.vip.size()) : 0;
}

int rpls_vip_significant_count(const rpls_vip_result* vip) {
  return vip ? vip->vip.report.significant_count() : 0;
}

rpls_status rpls_vip_scores(const rpls_vip_result* vip, double* out, size_t out_len) {
  if (!vip) return invalid_argument("null handle");
  return copy_vector(vip->vip.report.vip, out, out_len);
}

rpls_status rpls_vip_p_values(const rpls_vip_result* vip, double* out, size_t out_len) {
  if (!vip) return invalid_argument("null handle");
  return copy_vector(vip->vip.report.p_values, out, out_len);
}

rpls_status rpls_vip_q_values(const rpls_vip_result* vip, double* out, size_t out_len) {
  if (!vip) return invalid_argument("null handle");
  return copy_vector(vip->vip.report.q_values, out, out_len);
}

rpls_status rpls_vip_write_report(const rpls_vip_result* vip, const char* network_map_path,
                                  const char* path) {
  if (!vip || !path) return invalid_argument("null argument");
  return guarded([&] {
    std::vector<std::string> labels;
    if (network_map_path && *network_map_path) {
      const rpls::NetworkMap map = rpls::load_network_map(network_map_path);
      if (map.dim() != vip->dim)
        rpls::fail(rpls::ErrorCode::InvalidInput, "network map ROI count does not match the data");
      labels = map.roi_labels;
    } else {
      for (int i = 0; i < vip->dim; ++i) labels.push_back("roi" + std::to_string(i + 1));
    }
    rpls::write_vip_report(vip->vip, labels, vip->seed, path);
  });
}

rpls_status rpls_spd_distance(const double* a, const double* b, int dim, double* out) {
  if (!a || !b || !out || dim < 1) return invalid_argument("null buffer or bad dimension");
  return guarded([&] {
    *out = rpls::distance(rpls::SpdMatrix(matrix_from_buffer(a, dim)),
                          rpls::SpdMatrix(matrix_from_buffer(b, dim)));
  });
}

rpls_status rpls_spd_exp(const double* base, const double* tangent, int dim, double* out) {
  if (!base || !tangent || !out || dim < 1) return invalid_argument("null buffer or bad dimension");
  return guarded([&] {
    const rpls::SpdMatrix base_point(matrix_from_buffer(base, dim));
    const rpls::TangentSym u(matrix_from_buffer(tangent, dim), base_point);
    matrix_to_buffer(rpls::exp_map(base_point, u).matrix(), out);
  });
}

rpls_status rpls_spd_log(const double* base, const double* point, int dim, double* out) {
  if (!base || !point || !out || dim < 1) return invalid_argument("null buffer or bad dimension");
  return guarded([&] {
    const rpls::SpdMatrix base_point(matrix_from_buffer(base, dim));
    const rpls::SpdMatrix target(matrix_from_buffer(point, dim));
    matrix_to_buffer(rpls::log_map(base_point, target).matrix(), out);
  });
}

rpls_status rpls_spd_frechet_mean(const double* stacked, int n, int dim, double tolerance,
                                  double step, int max_iterations, double* out_mean,
                                  int* out_converged) {
  if (!stacked || !out_mean || n < 1 || dim < 1)
    return invalid_argument("null buffer or bad dimensions");
  return guarded([&] {
    std::vector<rpls::SpdMatrix> samples;
    samples.reserve(n);
    for (int i = 0; i < n; ++i)
      samples.push_back(rpls::SpdMatrix(
          matrix_from_buffer(stacked + static_cast<size_t>(i) * dim * dim, dim)));
    rpls::FrechetConfig cfg;
    cfg.tolerance = tolerance;
    cfg.initial_step = step;
    cfg.max_iterations = max_iterations;
    const rpls::FrechetResult result = rpls::frechet_mean(samples, cfg);
    matrix_to_buffer(result.mean.matrix(), out_mean);
    if (out_converged) *out_converged = result.converged ? 1 : 0;
  });
}

}  // extern "C"
