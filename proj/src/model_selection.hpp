#pragma once

#include <cstdint>
#include <vector>

#include "rpls_model.hpp"

namespace rpls {

struct FoldIndices {
  std::vector<int> train;
  std::vector<int> test;
};

// Random partition of 0..n-1 into folds whose sizes differ by at most one.
std::vector<FoldIndices> kfold_split(int n, int folds, std::uint64_t seed);

// Same, but each label stratum is dealt across folds so class balance is
// preserved (used when a binary group response is present).
std::vector<FoldIndices> stratified_kfold_split(const std::vector<int>& labels, int folds,
                                                std::uint64_t seed);

// Pooled root mean square error over all entries.
double rmse(const Matrix& y_true, const Matrix& y_pred);

// 1 - SSE/SST pooled over all entries, SST about the training means.
double r_squared(const Matrix& y_true, const Matrix& y_pred, const Vector& y_train_means);

struct ClassificationMetrics {
  double accuracy = 0.0;
  double sensitivity = 0.0;  // positive class = 1
  double specificity = 0.0;
  bool sensitivity_defined = false;
  bool specificity_defined = false;
};

ClassificationMetrics classification_metrics(const std::vector<int>& labels, const Vector& scores,
                                             double threshold);

struct CvConfig {
  std::vector<int> candidate_components;
  int folds = 10;
  std::uint64_t seed = 0;
  FrechetConfig frechet;
  NipalsConfig nipals;
  // Column of the response matrix holding a binary group variable; enables
  // stratified folds and classification metrics. -1 disables.
  int group_column = -1;
  double classification_threshold = 0.5;
};

struct CvCell {
  double mean = 0.0;
  double se = 0.0;
  int folds = 0;
};

struct CvRow {
  int n_components = 0;
  bool included = false;  // at least half the folds succeeded
  int folds_used = 0;
  CvCell rmse;
  CvCell r2;
  CvCell accuracy;
  CvCell sensitivity;
  CvCell specificity;
};

struct CvResult {
  std::vector<CvRow> rows;
  int chosen_components = 0;
  int folds = 0;
  std::uint64_t seed = 0;
  bool has_classification = false;
};

// One training fold fitted end to end: Fréchet mean, response
// standardization, and the PLS fit all come from the training rows only.
struct FoldModel {
  RplsModel model;
  Vector response_means;   // raw units, training rows
  Vector response_scales;  // raw units, training rows
};

FoldModel fit_fold(const std::vector<ManifoldPoint>& x, const Matrix& responses,
                   const ManifoldSpec& x_spec, const std::vector<int>& train, const CvConfig& cfg,
                   int n_components);

// Predictions for the given rows, on the standardized scale and in raw units,
// truncated to the leading n_components.
struct FoldPredictions {
  Matrix standardized;
  Matrix raw;
};
FoldPredictions predict_fold(const FoldModel& fold_model, const std::vector<ManifoldPoint>& x,
                             const std::vector<int>& rows, int n_components);

// k-fold cross-validation over the candidate component counts with the
// within-one-standard-error selection rule on RMSE. Responses are
// standardized per training fold, and RMSE/R^2 are reported on that scale.
// Folds whose fit fails are skipped; a candidate K is excluded when more than
// half its folds failed.
CvResult cross_validate(const std::vector<ManifoldPoint>& x, const Matrix& responses,
                        const ManifoldSpec& x_spec, const CvConfig& cfg);

}  // namespace rpls
