#include "pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace rpls {

namespace fs = std::filesystem;
using nlohmann::json;

Method method_from_string(const std::string& name) {
  if (name == "riemannian") return Method::Riemannian;
  if (name == "raw") return Method::RawCorrelations;
  if (name == "fisher") return Method::FisherCorrelations;
  fail(ErrorCode::InvalidInput, "unknown method '" + name + "' (expected riemannian, raw, or fisher)");
}

const char* method_name(Method method) {
  switch (method) {
    case Method::Riemannian: return "riemannian";
    case Method::RawCorrelations: return "raw";
    case Method::FisherCorrelations: return "fisher";
  }
  return "unknown";
}

FeatureSpace feature_space(Method method, int dim) {
  FeatureSpace space;
  if (method == Method::Riemannian) {
    space.spec = ManifoldSpec::spd(dim);
    const int d = vec_dim(dim);
    space.coord_pairs.reserve(d);
    space.diagonal_mask.reserve(d);
    for (int k = 0; k < d; ++k) {
      const auto [i, j] = vec_coord_pair(k, dim);
      space.coord_pairs.emplace_back(i, j);
      space.diagonal_mask.push_back(i == j);
    }
  } else {
    const int d = dim * (dim - 1) / 2;
    space.spec = ManifoldSpec::euclidean(d);
    space.coord_pairs.reserve(d);
    space.diagonal_mask.assign(d, false);
    for (int k = 0; k < d; ++k) space.coord_pairs.push_back(vec_coord_pair(k + dim, dim));
  }
  return space;
}

std::vector<ManifoldPoint> predictor_points(const StudyDataset& ds, Method method, bool regularize_flag) {
  if (ds.subjects.empty()) fail(ErrorCode::EmptyInput, "dataset has no subjects");
  std::vector<ManifoldPoint> points;
  points.reserve(ds.subjects.size());
  for (const SubjectRecord& rec : ds.subjects) {
    switch (method) {
      case Method::Riemannian: {
        try {
          if (regularize_flag)
            points.push_back(regularize(rec.connectivity));
          else
            points.push_back(SpdMatrix(rec.connectivity));
        } catch (const Error& e) {
          if (e.code() == ErrorCode::NotPositiveDefinite && !regularize_flag)
            fail(ErrorCode::NotPositiveDefinite,
                 "subject " + rec.subject_id +
                     ": connectivity matrix is not positive definite (consider --regularize)");
          throw;
        }
        break;
      }
      case Method::RawCorrelations:
        points.push_back(Vector(upper_triangle_features(rec.connectivity)));
        break;
      case Method::FisherCorrelations:
        points.push_back(Vector(upper_triangle_features(fisher_transform(rec.connectivity))));
        break;
    }
  }
  return points;
}

namespace {

int group_column_index(const std::vector<std::string>& response_names, const std::string& group) {
  if (group.empty()) return -1;
  for (std::size_t i = 0; i < response_names.size(); ++i)
    if (response_names[i] == group) return static_cast<int>(i);
  return -1;
}

CvConfig make_cv_config(const StudyConfig& cfg, const std::vector<std::string>& response_names) {
  CvConfig cv;
  cv.frechet = cfg.frechet;
  cv.nipals = cfg.nipals;
  cv.group_column = group_column_index(response_names, cfg.group_response);
  cv.classification_threshold = cfg.classification_threshold;
  return cv;
}

}  // namespace

StudyModel fit_study(const StudyDataset& ds, const StudyConfig& cfg) {
  if (!ds.has_responses()) fail(ErrorCode::InvalidInput, "fit requires response columns");
  if (ds.size() < 2) fail(ErrorCode::InvalidInput, "fit requires at least two subjects");

  const std::vector<ManifoldPoint> points = predictor_points(ds, cfg.method, cfg.regularize);
  const FeatureSpace space = feature_space(cfg.method, ds.dim);

  std::vector<int> all(ds.size());
  std::iota(all.begin(), all.end(), 0);

  StudyModel model;
  model.method = cfg.method;
  model.regularized = cfg.method == Method::Riemannian && cfg.regularize;
  model.dim = ds.dim;
  model.response_names = ds.response_names;
  model.fold = fit_fold(points, ds.responses_matrix(), space.spec, all,
                        make_cv_config(cfg, ds.response_names), cfg.n_components);
  return model;
}

Matrix predict_study(const StudyModel& model, const StudyDataset& ds) {
  if (ds.dim != model.dim)
    fail(ErrorCode::InvalidInput, "prediction data dimension " + std::to_string(ds.dim) +
                                      " does not match the model's " + std::to_string(model.dim));
  const std::vector<ManifoldPoint> points = predictor_points(ds, model.method, model.regularized);
  std::vector<int> all(ds.size());
  std::iota(all.begin(), all.end(), 0);
  return predict_fold(model.fold, points, all, model.fold.model.n_components).raw;
}

CvResult cv_study(const StudyDataset& ds, const StudyConfig& cfg,
                  const std::vector<int>& candidate_components, int folds, std::uint64_t seed) {
  if (!ds.has_responses()) fail(ErrorCode::InvalidInput, "cross-validation requires response columns");
  const std::vector<ManifoldPoint> points = predictor_points(ds, cfg.method, cfg.regularize);
  const FeatureSpace space = feature_space(cfg.method, ds.dim);
  CvConfig cv = make_cv_config(cfg, ds.response_names);
  cv.candidate_components = candidate_components;
  cv.folds = folds;
  cv.seed = seed;
  return cross_validate(points, ds.responses_matrix(), space.spec, cv);
}

StudyVip vip_study(const StudyDataset& ds, const StudyConfig& cfg, const VipConfig& vip_cfg) {
  StudyVip out;
  out.space = feature_space(cfg.method, ds.dim);
  out.n_components = cfg.n_components;

  const StudyModel model = fit_study(ds, cfg);
  const std::vector<ManifoldPoint> points = predictor_points(ds, cfg.method, cfg.regularize);
  const Matrix x_lin = linearise(points, model.fold.model.mean_x, out.space.spec);

  Matrix y_std = ds.responses_matrix();
  y_std.rowwise() -= model.fold.response_means.transpose();
  y_std.array().rowwise() /= model.fold.response_scales.transpose().array();

  out.report = vip_permutation_test(x_lin, y_std, cfg.n_components, cfg.nipals,
                                    out.space.diagonal_mask, vip_cfg);
  return out;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

constexpr int kModelVersion = 1;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) fail(ErrorCode::ParseError, "model file: expected matrix");
  const std::size_t n_cols = rows[0].size();
  Matrix m(rows.size(), n_cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != n_cols) fail(ErrorCode::ParseError, "model file: ragged matrix");
    for (std::size_t j = 0; j < n_cols; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const json& arr) {
  Vector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

json manifold_spec_to_json(const ManifoldSpec& spec) {
  return json{{"kind", spec.kind == ManifoldSpec::Kind::SpdAffineInvariant ? "spd" : "euclidean"},
              {"dim", spec.dim}};
}

ManifoldSpec manifold_spec_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int dim = j.at("dim").get<int>();
  if (kind == "spd") return ManifoldSpec::spd(dim);
  if (kind == "euclidean") return ManifoldSpec::euclidean(dim);
  fail(ErrorCode::ParseError, "model file: unknown manifold kind '" + kind + "'");
}

json point_to_json(const ManifoldPoint& p, const ManifoldSpec& spec) {
  if (spec.kind == ManifoldSpec::Kind::SpdAffineInvariant) return matrix_to_json(as_spd(p).matrix());
  return vector_to_json(as_euclidean(p));
}

ManifoldPoint point_from_json(const json& j, const ManifoldSpec& spec) {
  if (spec.kind == ManifoldSpec::Kind::SpdAffineInvariant) return SpdMatrix(matrix_from_json(j));
  return vector_from_json(j);
}

}  // namespace

void save_study_model(const StudyModel& model, const std::string& path) {
  const RplsModel& core = model.fold.model;
  json j;
  j["format"] = "rpls-model";
  j["version"] = kModelVersion;
  j["method"] = method_name(model.method);
  j["regularized"] = model.regularized;
  j["dim"] = model.dim;
  j["response_names"] = model.response_names;
  j["response_means"] = vector_to_json(model.fold.response_means);
  j["response_scales"] = vector_to_json(model.fold.response_scales);
  j["n_components"] = core.n_components;
  j["x_manifold"] = manifold_spec_to_json(core.x_manifold);
  j["y_manifold"] = manifold_spec_to_json(core.y_manifold);
  j["mean_x"] = point_to_json(core.mean_x, core.x_manifold);
  j["mean_y"] = point_to_json(core.mean_y, core.y_manifold);
  j["pls"] = json{{"weights_x", matrix_to_json(core.pls.weights_x)},
                  {"weights_y", matrix_to_json(core.pls.weights_y)},
                  {"loadings_x", matrix_to_json(core.pls.loadings_x)},
                  {"loadings_y", matrix_to_json(core.pls.loadings_y)},
                  {"inner_coefficients", vector_to_json(core.pls.inner_coefficients)},
                  {"x_means", vector_to_json(core.pls.x_means)},
                  {"y_means", vector_to_json(core.pls.y_means)},
                  {"u_init_columns", core.pls.u_init_columns}};
  j["beta"] = json{{"coefficients", matrix_to_json(core.beta.coefficients)},
                   {"x_means", vector_to_json(core.beta.x_means)},
                   {"y_means", vector_to_json(core.beta.y_means)},
                   {"y_scales", vector_to_json(core.beta.y_scales)}};
  j["frechet_x"] = json{{"converged", core.frechet_x.converged},
                        {"iterations", core.frechet_x.iterations},
                        {"gradient_norm", core.frechet_x.gradient_norm}};
  j["frechet_y"] = json{{"converged", core.frechet_y.converged},
                        {"iterations", core.frechet_y.iterations},
                        {"gradient_norm", core.frechet_y.gradient_norm}};

  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write model file " + path);
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::IoError, "failed writing model file " + path);
}

StudyModel load_study_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open model file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, path + ": invalid model file: " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "rpls-model")
      fail(ErrorCode::ParseError, path + ": not an rpls model file");
    if (j.at("version").get<int>() != kModelVersion)
      fail(ErrorCode::ParseError, path + ": unsupported model file version " +
                                      std::to_string(j.at("version").get<int>()));

    StudyModel model;
    model.method = method_from_string(j.at("method").get<std::string>());
    model.regularized = j.at("regularized").get<bool>();
    model.dim = j.at("dim").get<int>();
    model.response_names = j.at("response_names").get<std::vector<std::string>>();
    model.fold.response_means = vector_from_json(j.at("response_means"));
    model.fold.response_scales = vector_from_json(j.at("response_scales"));

    RplsModel& core = model.fold.model;
    core.x_manifold = manifold_spec_from_json(j.at("x_manifold"));
    core.y_manifold = manifold_spec_from_json(j.at("y_manifold"));
    core.mean_x = point_from_json(j.at("mean_x"), core.x_manifold);
    core.mean_y = point_from_json(j.at("mean_y"), core.y_manifold);
    core.n_components = j.at("n_components").get<int>();

    const json& pls = j.at("pls");
    core.pls.n_components = core.n_components;
    core.pls.weights_x = matrix_from_json(pls.at("weights_x"));
    core.pls.weights_y = matrix_from_json(pls.at("weights_y"));
    core.pls.loadings_x = matrix_from_json(pls.at("loadings_x"));
    core.pls.loadings_y = matrix_from_json(pls.at("loadings_y"));
    core.pls.inner_coefficients = vector_from_json(pls.at("inner_coefficients"));
    core.pls.x_means = vector_from_json(pls.at("x_means"));
    core.pls.y_means = vector_from_json(pls.at("y_means"));
    core.pls.u_init_columns = pls.at("u_init_columns").get<std::vector<int>>();

    const json& beta = j.at("beta");
    core.beta.coefficients = matrix_from_json(beta.at("coefficients"));
    core.beta.x_means = vector_from_json(beta.at("x_means"));
    core.beta.y_means = vector_from_json(beta.at("y_means"));
    core.beta.y_scales = vector_from_json(beta.at("y_scales"));

    core.frechet_x = FrechetSummary{j.at("frechet_x").at("converged").get<bool>(),
                                    j.at("frechet_x").at("iterations").get<int>(),
                                    j.at("frechet_x").at("gradient_norm").get<double>()};
    core.frechet_y = FrechetSummary{j.at("frechet_y").at("converged").get<bool>(),
                                    j.at("frechet_y").at("iterations").get<int>(),
                                    j.at("frechet_y").at("gradient_norm").get<double>()};

    if (core.x_manifold.kind == ManifoldSpec::Kind::SpdAffineInvariant) {
      const SpdMatrix& mu = as_spd(core.mean_x);
      for (int k = 0; k < core.n_components; ++k)
        core.x_loadings_tangent.push_back(unvec_at(mu, Vector(core.pls.loadings_x.col(k))));
    }
    if (core.y_manifold.kind == ManifoldSpec::Kind::SpdAffineInvariant) {
      const SpdMatrix& mu = as_spd(core.mean_y);
      for (int k = 0; k < core.n_components; ++k)
        core.y_loadings_tangent.push_back(unvec_at(mu, Vector(core.pls.loadings_y.col(k))));
    }
    return model;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, path + ": malformed model file: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// report writers

namespace {

// Coefficients of one response as a symmetric matrix indexed by ROI pairs.
Matrix coefficient_matrix(const StudyModel& model, int response) {
  const RplsModel& core = model.fold.model;
  const Vector col = core.beta.coefficients.col(response);
  if (model.method == Method::Riemannian) {
    const SpdMatrix& mu = as_spd(core.mean_x);
    return unvec_at(mu, col).matrix();
  }
  return matrix_from_upper_triangle(col, model.dim, 0.0);
}

// 0/1 mask of the top quarter of |values| over the considered entries.
Matrix top_quartile_mask(const Matrix& values, bool consider_diagonal) {
  const Eigen::Index n = values.rows();
  std::vector<double> magnitudes;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      if (i == j && !consider_diagonal) continue;
      magnitudes.push_back(std::abs(values(i, j)));
    }
  Matrix mask = Matrix::Zero(n, n);
  if (magnitudes.empty()) return mask;
  std::sort(magnitudes.begin(), magnitudes.end(), std::greater<double>());
  const std::size_t keep = std::max<std::size_t>(1, (magnitudes.size() + 3) / 4);
  const double cutoff = magnitudes[keep - 1];
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      if (i == j && !consider_diagonal) continue;
      if (std::abs(values(i, j)) >= cutoff && cutoff > 0.0) {
        mask(i, j) = 1.0;
        mask(j, i) = 1.0;
      }
    }
  return mask;
}

std::string sanitize_name(const std::string& name) {
  std::string out = name;
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  return out;
}

void write_cv_rows(std::ofstream& out, const CvResult& cv) {
  out << "K\trmse_mean\trmse_se\tr2_mean\tr2_se\taccuracy_mean\taccuracy_se"
      << "\tsensitivity_mean\tsensitivity_se\tspecificity_mean\tspecificity_se"
      << "\tfolds_used\tincluded\n";
  auto cell = [](const CvCell& c) {
    if (c.folds == 0) return std::string("nan\tnan");
    return format_double(c.mean) + "\t" + format_double(c.se);
  };
  for (const CvRow& row : cv.rows) {
    out << row.n_components << '\t' << cell(row.rmse) << '\t' << cell(row.r2) << '\t'
        << cell(row.accuracy) << '\t' << cell(row.sensitivity) << '\t' << cell(row.specificity)
        << '\t' << row.folds_used << '\t' << (row.included ? 1 : 0) << '\n';
  }
}

std::string one_se_note(const CvResult& cv) {
  int best = -1;
  for (std::size_t i = 0; i < cv.rows.size(); ++i) {
    if (!cv.rows[i].included) continue;
    if (best < 0 || cv.rows[i].rmse.mean < cv.rows[best].rmse.mean) best = static_cast<int>(i);
  }
  if (best < 0) return "# no candidate succeeded";
  std::ostringstream note;
  note << "# chosen K = " << cv.chosen_components << ": smallest K with mean RMSE within one SE of the minimum ("
       << format_double(cv.rows[best].rmse.mean) << " at K = " << cv.rows[best].n_components
       << ", threshold " << format_double(cv.rows[best].rmse.mean + cv.rows[best].rmse.se) << ")";
  return note.str();
}

}  // namespace

void write_fit_outputs(const StudyModel& model, const std::string& out_dir, const NetworkMap* map) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  save_study_model(model, (dir / "model.json").string());

  if (map && map->dim() != model.dim)
    fail(ErrorCode::InvalidInput, "network map covers " + std::to_string(map->dim()) +
                                      " ROIs but the data has " + std::to_string(model.dim));

  for (std::size_t r = 0; r < model.response_names.size(); ++r) {
    const std::string stem = sanitize_name(model.response_names[r]);
    const Matrix coef = coefficient_matrix(model, static_cast<int>(r));
    save_matrix_file((dir / ("beta_" + stem + ".txt")).string(), coef);
    // Diagonal entries are excluded from the influence ranking on the
    // Riemannian arm (diagonal rule); the flat arms have none to begin with.
    save_matrix_file((dir / ("beta_top25_" + stem + ".txt")).string(),
                     top_quartile_mask(coef, false));

    if (map) {
      const Vector col = model.fold.model.beta.coefficients.col(r);
      const Matrix net = network_average(col, *map, false);
      save_matrix_file((dir / ("network_avg_" + stem + ".txt")).string(), net);
      save_matrix_file((dir / ("network_top25_" + stem + ".txt")).string(),
                       top_quartile_mask(net, true));
    }
  }
  if (map) {
    std::ofstream names((dir / "network_names.txt").string());
    if (!names) fail(ErrorCode::IoError, "cannot write network_names.txt");
    for (const std::string& n : map->network_names()) names << n << '\n';
  }
}

void write_cv_report(const CvResult& cv, const StudyConfig& cfg,
                     const std::vector<std::string>& response_names, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write cv report " + path);
  out << "# cross-validation report\n";
  out << "# method: " << method_name(cfg.method) << "\n";
  out << "# folds: " << cv.folds << "  seed: " << cv.seed << "\n";
  out << "# responses:";
  for (const std::string& r : response_names) out << ' ' << r;
  out << "\n# rmse and r2 are on the standardized response scale\n";
  write_cv_rows(out, cv);
  out << one_se_note(cv) << '\n';
  if (!out) fail(ErrorCode::IoError, "failed writing cv report " + path);
}

void write_cv_comparison_report(const std::vector<std::pair<Method, CvResult>>& results,
                                const std::vector<std::string>& response_names, int folds,
                                std::uint64_t seed, const std::string& path) {
  if (results.empty()) fail(ErrorCode::EmptyInput, "no cv results to report");
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write cv report " + path);
  out << "# cross-validation comparison (shared fold seed " << seed << ", " << folds << " folds)\n";
  out << "# responses:";
  for (const std::string& r : response_names) out << ' ' << r;
  out << "\n# rmse and r2 are on the standardized response scale\n";
  for (const auto& [method, cv] : results) {
    out << "\n## method: " << method_name(method) << "\n";
    write_cv_rows(out, cv);
    out << one_se_note(cv) << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "failed writing cv report " + path);
}

void write_vip_report(const StudyVip& vip, const std::vector<std::string>& roi_labels,
                      std::uint64_t seed, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write vip report " + path);
  const VipReport& rep = vip.report;
  out << "# vip permutation report\n";
  out << "# components: " << vip.n_components << "  permutations: " << rep.permutations
      << "  alpha: " << format_double(rep.alpha) << "  seed: " << seed << "\n";
  out << "# significant connections: " << rep.significant_count() << "\n";
  out << "coordinate\troi_i\troi_j\tvip\tp_value\tq_value\tsignificant\tmasked\tfailed_permutations\n";
  auto label = [&](int roi) {
    if (roi < static_cast<int>(roi_labels.size())) return roi_labels[roi];
    return "roi" + std::to_string(roi + 1);
  };
  for (Eigen::Index k = 0; k < rep.vip.size(); ++k) {
    const auto [i, j] = vip.space.coord_pairs[k];
    out << k << '\t' << label(i) << '\t' << label(j) << '\t' << format_double(rep.vip[k]) << '\t'
        << format_double(rep.p_values[k]) << '\t' << format_double(rep.q_values[k]) << '\t'
        << (rep.significant[k] ? 1 : 0) << '\t' << (rep.diagonal_mask[k] ? 1 : 0) << '\t'
        << rep.failed_permutations[k] << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "failed writing vip report " + path);
}

void write_predictions(const std::vector<std::string>& subject_ids,
                       const std::vector<std::string>& response_names, const Matrix& predictions,
                       const std::string& path) {
  if (static_cast<Eigen::Index>(subject_ids.size()) != predictions.rows())
    fail(ErrorCode::InvalidInput, "write_predictions: row count mismatch");
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write predictions " + path);
  out << "subject_id";
  for (const std::string& r : response_names) out << '\t' << r;
  out << '\n';
  for (std::size_t i = 0; i < subject_ids.size(); ++i) {
    out << subject_ids[i];
    for (Eigen::Index j = 0; j < predictions.cols(); ++j)
      out << '\t' << format_double(predictions(i, j));
    out << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "failed writing predictions " + path);
}

void simulate_study(const SimulateStudyConfig& cfg, const std::string& out_dir) {
  if (cfg.dim < 2) fail(ErrorCode::InvalidInput, "simulate: dim must be at least 2");
  if (cfg.response_dim < 1) fail(ErrorCode::InvalidInput, "simulate: response_dim must be positive");

  SyntheticConfig synth;
  synth.n_samples = cfg.n_subjects;
  synth.latent = cfg.latent;
  synth.loading_scale = cfg.loading_scale;
  synth.noise_scale = cfg.noise_scale;
  synth.seed = cfg.seed;
  synth.active_coords = cfg.active_coords;

  const ManifoldSpec x_spec = ManifoldSpec::spd(cfg.dim);
  const ManifoldSpec y_spec = ManifoldSpec::euclidean(cfg.response_dim);
  const SyntheticData data = generate_synthetic(x_spec, y_spec, synth);

  const fs::path dir(out_dir);
  fs::create_directories(dir / "matrices");

  int width = 1;
  for (int v = cfg.n_subjects; v >= 10; v /= 10) ++width;

  std::ofstream manifest((dir / "manifest.txt").string());
  std::ofstream phenotypes((dir / "phenotypes.tsv").string());
  if (!manifest || !phenotypes) fail(ErrorCode::IoError, "cannot write dataset under " + out_dir);

  phenotypes << "subject_id";
  for (int j = 0; j < cfg.response_dim; ++j) phenotypes << "\ty" << (j + 1);
  phenotypes << '\n';

  for (int i = 0; i < cfg.n_subjects; ++i) {
    std::ostringstream id;
    id << "sim";
    const std::string digits = std::to_string(i + 1);
    for (int z = static_cast<int>(digits.size()); z < width; ++z) id << '0';
    id << digits;

    const std::string rel = "matrices/" + id.str() + ".txt";
    save_matrix_file((dir / rel).string(), as_spd(data.x[i]).matrix());
    manifest << id.str() << '\t' << rel << '\n';

    phenotypes << id.str();
    const Vector& y = as_euclidean(data.y[i]);
    for (Eigen::Index j = 0; j < y.size(); ++j) phenotypes << '\t' << format_double(y[j]);
    phenotypes << '\n';
  }
  if (!manifest || !phenotypes) fail(ErrorCode::IoError, "failed writing dataset under " + out_dir);

  json truth;
  truth["format"] = "rpls-synthetic-truth";
  truth["version"] = 1;
  truth["dim"] = cfg.dim;
  truth["n_subjects"] = cfg.n_subjects;
  truth["latent"] = cfg.latent;
  truth["response_dim"] = cfg.response_dim;
  truth["loading_scale"] = cfg.loading_scale;
  truth["noise_scale"] = cfg.noise_scale;
  truth["active_coords"] = cfg.active_coords;
  truth["seed"] = cfg.seed;
  truth["mean_x"] = matrix_to_json(as_spd(data.truth.mean_x).matrix());
  truth["mean_y"] = vector_to_json(as_euclidean(data.truth.mean_y));
  truth["x_loadings_coords"] = matrix_to_json(data.truth.x_loadings_coords);
  truth["y_loadings_coords"] = matrix_to_json(data.truth.y_loadings_coords);
  truth["scores_x"] = matrix_to_json(data.truth.scores_x);
  truth["scores_y"] = matrix_to_json(data.truth.scores_y);
  truth["inner_coefficients"] = vector_to_json(data.truth.inner_coefficients);
  truth["planted_coords"] = data.truth.planted_coords;

  std::ofstream truth_out((dir / "truth.json").string());
  if (!truth_out) fail(ErrorCode::IoError, "cannot write truth record");
  truth_out << truth.dump(2) << '\n';
  if (!truth_out) fail(ErrorCode::IoError, "failed writing truth record");
}

}  // namespace rpls
