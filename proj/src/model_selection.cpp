#include "model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "rng.hpp"

namespace rpls {

namespace {

constexpr double kScaleTol = 1e-12;

std::vector<FoldIndices> folds_from_assignment(const std::vector<int>& fold_of, int folds) {
  std::vector<FoldIndices> out(folds);
  const int n = static_cast<int>(fold_of.size());
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < folds; ++f) {
      if (fold_of[i] == f)
        out[f].test.push_back(i);
      else
        out[f].train.push_back(i);
    }
  }
  return out;
}

double sample_se(const std::vector<double>& values) {
  const int n = static_cast<int>(values.size());
  if (n <= 1) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
}

CvCell aggregate(const std::vector<double>& values) {
  CvCell cell;
  cell.folds = static_cast<int>(values.size());
  if (values.empty()) return cell;
  double mean = 0.0;
  for (double v : values) mean += v;
  cell.mean = mean / cell.folds;
  cell.se = sample_se(values);
  return cell;
}

}  // namespace

std::vector<FoldIndices> kfold_split(int n, int folds, std::uint64_t seed) {
  if (folds < 2 || folds > n)
    fail(ErrorCode::InvalidInput, "kfold_split: folds must lie in [2, n]");
  Rng rng(derive_seed(seed, 0x666f6c64ULL, 0));
  const std::vector<int> perm = random_permutation(n, rng);
  std::vector<int> fold_of(n);
  const int base = n / folds;
  const int extra = n % folds;
  int pos = 0;
  for (int f = 0; f < folds; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    for (int i = 0; i < size; ++i) fold_of[perm[pos++]] = f;
  }
  return folds_from_assignment(fold_of, folds);
}

std::vector<FoldIndices> stratified_kfold_split(const std::vector<int>& labels, int folds,
                                                std::uint64_t seed) {
  const int n = static_cast<int>(labels.size());
  if (folds < 2 || folds > n)
    fail(ErrorCode::InvalidInput, "stratified_kfold_split: folds must lie in [2, n]");
  std::map<int, std::vector<int>> strata;
  for (int i = 0; i < n; ++i) strata[labels[i]].push_back(i);

  Rng rng(derive_seed(seed, 0x73747261ULL, 0));
  std::vector<int> fold_of(n);
  // A continuous dealing cursor across strata keeps overall fold sizes within
  // one of each other.
  int cursor = 0;
  for (auto& [label, members] : strata) {
    for (int i = static_cast<int>(members.size()) - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
      std::swap(members[i], members[j]);
    }
    for (int idx : members) fold_of[idx] = cursor++ % folds;
  }
  return folds_from_assignment(fold_of, folds);
}

double rmse(const Matrix& y_true, const Matrix& y_pred) {
  if (y_true.rows() != y_pred.rows() || y_true.cols() != y_pred.cols())
    fail(ErrorCode::InvalidInput, "rmse: shape mismatch");
  if (y_true.size() == 0) fail(ErrorCode::InvalidInput, "rmse: empty input");
  return std::sqrt((y_true - y_pred).squaredNorm() / static_cast<double>(y_true.size()));
}

double r_squared(const Matrix& y_true, const Matrix& y_pred, const Vector& y_train_means) {
  if (y_true.rows() != y_pred.rows() || y_true.cols() != y_pred.cols())
    fail(ErrorCode::InvalidInput, "r_squared: shape mismatch");
  if (y_train_means.size() != y_true.cols())
    fail(ErrorCode::InvalidInput, "r_squared: means length mismatch");
  const double sse = (y_true - y_pred).squaredNorm();
  const double sst = (y_true.rowwise() - y_train_means.transpose()).squaredNorm();
  if (sst <= kScaleTol)
    fail(ErrorCode::DegenerateResponse, "r_squared: response has no variance about the training means");
  return 1.0 - sse / sst;
}

ClassificationMetrics classification_metrics(const std::vector<int>& labels, const Vector& scores,
                                             double threshold) {
  const int n = static_cast<int>(labels.size());
  if (n == 0 || scores.size() != n)
    fail(ErrorCode::InvalidInput, "classification_metrics: label/score length mismatch");
  int tp = 0, tn = 0, fp = 0, fn = 0;
  for (int i = 0; i < n; ++i) {
    const bool truth = labels[i] != 0;
    const bool pred = scores[i] > threshold;
    if (truth && pred) ++tp;
    else if (truth && !pred) ++fn;
    else if (!truth && pred) ++fp;
    else ++tn;
  }
  ClassificationMetrics m;
  m.accuracy = static_cast<double>(tp + tn) / n;
  if (tp + fn > 0) {
    m.sensitivity = static_cast<double>(tp) / (tp + fn);
    m.sensitivity_defined = true;
  } else {
    m.sensitivity = std::numeric_limits<double>::quiet_NaN();
  }
  if (tn + fp > 0) {
    m.specificity = static_cast<double>(tn) / (tn + fp);
    m.specificity_defined = true;
  } else {
    m.specificity = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

FoldModel fit_fold(const std::vector<ManifoldPoint>& x, const Matrix& responses,
                   const ManifoldSpec& x_spec, const std::vector<int>& train, const CvConfig& cfg,
                   int n_components) {
  if (train.size() < 2) fail(ErrorCode::InvalidInput, "fit_fold: need at least two training rows");
  const Eigen::Index q = responses.cols();

  Matrix y_train(train.size(), q);
  std::vector<ManifoldPoint> x_train;
  x_train.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    y_train.row(i) = responses.row(train[i]);
    x_train.push_back(x[train[i]]);
  }

  FoldModel fm;
  fm.response_means = y_train.colwise().mean();
  fm.response_scales.resize(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    const double ss = (y_train.col(j).array() - fm.response_means[j]).square().sum();
    const double sd = std::sqrt(ss / std::max<Eigen::Index>(1, y_train.rows() - 1));
    if (sd <= kScaleTol)
      fail(ErrorCode::DegenerateResponse,
           "fit_fold: response column " + std::to_string(j) + " is constant on the training rows");
    fm.response_scales[j] = sd;
  }

  Matrix y_std = (y_train.rowwise() - fm.response_means.transpose());
  y_std.array().rowwise() /= fm.response_scales.transpose().array();

  std::vector<ManifoldPoint> y_points;
  y_points.reserve(train.size());
  for (Eigen::Index i = 0; i < y_std.rows(); ++i) y_points.push_back(Vector(y_std.row(i)));

  RplsConfig rcfg;
  rcfg.n_components = n_components;
  rcfg.frechet = cfg.frechet;
  rcfg.nipals = cfg.nipals;
  fm.model = tnipals_fit(x_train, y_points, x_spec, ManifoldSpec::euclidean(static_cast<int>(q)), rcfg);
  return fm;
}

FoldPredictions predict_fold(const FoldModel& fold_model, const std::vector<ManifoldPoint>& x,
                             const std::vector<int>& rows, int n_components) {
  std::vector<ManifoldPoint> x_rows;
  x_rows.reserve(rows.size());
  for (int r : rows) x_rows.push_back(x[r]);

  const Matrix coords = linearise(x_rows, fold_model.model.mean_x, fold_model.model.x_manifold);
  const BetaPls beta = beta_pls(fold_model.model.pls, n_components);
  Matrix std_pred = pls_predict(beta, coords);
  // Back onto the standardized response scale: the linearised block was
  // centered at the (Euclidean) mean of the standardized training responses.
  std_pred.rowwise() += as_euclidean(fold_model.model.mean_y).transpose();

  FoldPredictions out;
  out.raw = std_pred;
  out.raw.array().rowwise() *= fold_model.response_scales.transpose().array();
  out.raw.rowwise() += fold_model.response_means.transpose();
  out.standardized = std::move(std_pred);
  return out;
}

CvResult cross_validate(const std::vector<ManifoldPoint>& x, const Matrix& responses,
                        const ManifoldSpec& x_spec, const CvConfig& cfg) {
  const int n = static_cast<int>(x.size());
  if (n < 2) fail(ErrorCode::InvalidInput, "cross_validate: need at least two samples");
  if (responses.rows() != n) fail(ErrorCode::InvalidInput, "cross_validate: response row count mismatch");
  if (cfg.candidate_components.empty())
    fail(ErrorCode::InvalidInput, "cross_validate: no candidate component counts");
  if (cfg.folds < 2 || cfg.folds > n)
    fail(ErrorCode::InvalidInput, "cross_validate: folds must lie in [2, n]");
  if (cfg.group_column >= static_cast<int>(responses.cols()))
    fail(ErrorCode::InvalidInput, "cross_validate: group column out of range");

  int k_max = 0;
  for (int k : cfg.candidate_components) {
    if (k < 1) fail(ErrorCode::InvalidInput, "cross_validate: component counts must be positive");
    k_max = std::max(k_max, k);
  }
  const int largest_test = (n + cfg.folds - 1) / cfg.folds;
  if (k_max > std::min(x_spec.embedding_dim(), n - largest_test))
    fail(ErrorCode::InvalidInput,
         "cross_validate: largest candidate exceeds min(embedding dim, smallest training fold)");

  std::vector<FoldIndices> folds;
  if (cfg.group_column >= 0) {
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = responses(i, cfg.group_column) > 0.5 ? 1 : 0;
    folds = stratified_kfold_split(labels, cfg.folds, cfg.seed);
  } else {
    folds = kfold_split(n, cfg.folds, cfg.seed);
  }

  struct FoldEval {
    bool ok = false;
    FoldModel model;
  };
  std::vector<FoldEval> fitted(cfg.folds);
  for (int f = 0; f < cfg.folds; ++f) {
    try {
      fitted[f].model = fit_fold(x, responses, x_spec, folds[f].train, cfg, k_max);
      fitted[f].ok = true;
    } catch (const Error&) {
      fitted[f].ok = false;  // fold skipped
    }
  }

  CvResult result;
  result.folds = cfg.folds;
  result.seed = cfg.seed;
  result.has_classification = cfg.group_column >= 0;

  std::vector<int> candidates = cfg.candidate_components;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  for (int k : candidates) {
    CvRow row;
    row.n_components = k;
    std::vector<double> rmse_vals, r2_vals, acc_vals, sens_vals, spec_vals;
    for (int f = 0; f < cfg.folds; ++f) {
      if (!fitted[f].ok) continue;
      const FoldModel& fm = fitted[f].model;
      const std::vector<int>& test = folds[f].test;
      FoldPredictions pred;
      try {
        pred = predict_fold(fm, x, test, k);
      } catch (const Error&) {
        continue;
      }

      Matrix y_test(test.size(), responses.cols());
      for (std::size_t i = 0; i < test.size(); ++i) y_test.row(i) = responses.row(test[i]);
      Matrix y_test_std = y_test.rowwise() - fm.response_means.transpose();
      y_test_std.array().rowwise() /= fm.response_scales.transpose().array();

      rmse_vals.push_back(rmse(y_test_std, pred.standardized));
      try {
        r2_vals.push_back(r_squared(y_test_std, pred.standardized, Vector(Vector::Zero(responses.cols()))));
      } catch (const Error&) {
        // test fold with no variance about the training means; R^2 undefined
      }
      if (cfg.group_column >= 0) {
        std::vector<int> labels(test.size());
        for (std::size_t i = 0; i < test.size(); ++i)
          labels[i] = y_test(i, cfg.group_column) > 0.5 ? 1 : 0;
        const ClassificationMetrics cm = classification_metrics(
            labels, Vector(pred.raw.col(cfg.group_column)), cfg.classification_threshold);
        acc_vals.push_back(cm.accuracy);
        if (cm.sensitivity_defined) sens_vals.push_back(cm.sensitivity);
        if (cm.specificity_defined) spec_vals.push_back(cm.specificity);
      }
    }
    row.folds_used = static_cast<int>(rmse_vals.size());
    // excluded when more than half the folds failed
    row.included = (cfg.folds - row.folds_used) * 2 <= cfg.folds;
    row.rmse = aggregate(rmse_vals);
    row.r2 = aggregate(r2_vals);
    row.accuracy = aggregate(acc_vals);
    row.sensitivity = aggregate(sens_vals);
    row.specificity = aggregate(spec_vals);
    result.rows.push_back(row);
  }

  // Within-one-standard-error rule on RMSE: the smallest K whose mean error
  // is within one SE of the best mean error.
  int best_idx = -1;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    if (!result.rows[i].included) continue;
    if (best_idx < 0 || result.rows[i].rmse.mean < result.rows[best_idx].rmse.mean)
      best_idx = static_cast<int>(i);
  }
  if (best_idx < 0)
    fail(ErrorCode::NonConvergence, "cross_validate: every candidate failed on more than half the folds");
  const double threshold = result.rows[best_idx].rmse.mean + result.rows[best_idx].rmse.se;
  for (const CvRow& row : result.rows) {
    if (row.included && row.rmse.mean <= threshold) {
      result.chosen_components = row.n_components;
      break;
    }
  }
  return result;
}

}  // namespace rpls
