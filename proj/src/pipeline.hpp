#pragma once

#include <string>
#include <utility>
#include <vector>

#include "data_io.hpp"
#include "inference.hpp"
#include "model_selection.hpp"

namespace rpls {

// The three predictor arms: SPD matrices under the affine-invariant geometry,
// or the upper triangle of the raw / Fisher-transformed correlations as flat
// Euclidean features.
enum class Method { Riemannian, RawCorrelations, FisherCorrelations };

Method method_from_string(const std::string& name);
const char* method_name(Method method);

// Coordinate system of one method arm: the manifold spec, the ROI pair behind
// each coordinate, and which coordinates describe diagonal (self-connection)
// entries and are therefore a-priori uninformative.
struct FeatureSpace {
  ManifoldSpec spec;
  std::vector<std::pair<int, int>> coord_pairs;
  std::vector<bool> diagonal_mask;
};

FeatureSpace feature_space(Method method, int dim);

// Subject connectivity matrices mapped into the method arm's space.
// regularize (F + I) applies to the Riemannian arm only.
std::vector<ManifoldPoint> predictor_points(const StudyDataset& ds, Method method, bool regularize);

struct StudyConfig {
  Method method = Method::Riemannian;
  bool regularize = false;
  int n_components = 2;
  FrechetConfig frechet;
  NipalsConfig nipals;
  std::string group_response = "group";
  double classification_threshold = 0.5;
};

// A fitted study pipeline: the Riemannian PLS core plus the raw-unit response
// scaling recorded from the training data.
struct StudyModel {
  Method method = Method::Riemannian;
  bool regularized = false;
  int dim = 0;
  std::vector<std::string> response_names;
  FoldModel fold;  // model + response means/scales
};

StudyModel fit_study(const StudyDataset& ds, const StudyConfig& cfg);

// Raw-unit predictions for every subject in the dataset.
Matrix predict_study(const StudyModel& model, const StudyDataset& ds);

CvResult cv_study(const StudyDataset& ds, const StudyConfig& cfg,
                  const std::vector<int>& candidate_components, int folds, std::uint64_t seed);

struct StudyVip {
  VipReport report;
  FeatureSpace space;
  int n_components = 0;
};

StudyVip vip_study(const StudyDataset& ds, const StudyConfig& cfg, const VipConfig& vip_cfg);

// Versioned JSON model file; loading an unknown version fails loudly.
void save_study_model(const StudyModel& model, const std::string& path);
StudyModel load_study_model(const std::string& path);

// Per-response coefficient matrices, top-quartile masks, and (when a network
// map is given) network-averaged matrices with their own masks.
void write_fit_outputs(const StudyModel& model, const std::string& out_dir, const NetworkMap* map);

void write_cv_report(const CvResult& cv, const StudyConfig& cfg,
                     const std::vector<std::string>& response_names, const std::string& path);
// Several method arms side by side (shared fold seed).
void write_cv_comparison_report(const std::vector<std::pair<Method, CvResult>>& results,
                                const std::vector<std::string>& response_names, int folds,
                                std::uint64_t seed, const std::string& path);

void write_vip_report(const StudyVip& vip, const std::vector<std::string>& roi_labels,
                      std::uint64_t seed, const std::string& path);

void write_predictions(const std::vector<std::string>& subject_ids,
                       const std::vector<std::string>& response_names, const Matrix& predictions,
                       const std::string& path);

struct SimulateStudyConfig {
  int dim = 10;
  int n_subjects = 100;
  int latent = 2;
  int response_dim = 2;
  double loading_scale = 1.0;
  double noise_scale = 0.05;
  int active_coords = 0;
  std::uint64_t seed = 0;
};

// Writes a loadable dataset (matrix files, manifest, phenotype table) plus a
// truth record with the generating quantities.
void simulate_study(const SimulateStudyConfig& cfg, const std::string& out_dir);

}  // namespace rpls
