#pragma once

#include <string>
#include <vector>

#include "spd_geometry.hpp"

namespace rpls {

// One subject: an R x R connectivity matrix plus named numeric responses.
// The matrix is validated symmetric at load time; whether it must be positive
// definite depends on the method arm (the Riemannian arm enforces it, the
// upper-triangle arms do not).
struct SubjectRecord {
  std::string subject_id;
  Matrix connectivity;
  Vector responses;
};

struct StudyDataset {
  std::vector<SubjectRecord> subjects;
  std::vector<std::string> response_names;
  int dim = 0;

  int size() const { return static_cast<int>(subjects.size()); }
  bool has_responses() const { return !response_names.empty(); }
  Matrix responses_matrix() const;
};

// ROI -> resting-state-network assignment, in ROI index order.
struct NetworkMap {
  std::vector<std::string> roi_labels;
  std::vector<std::string> network_of_roi;

  int dim() const { return static_cast<int>(roi_labels.size()); }
  std::vector<std::string> network_names() const;  // first-appearance order
};

// Pearson correlation matrix between the columns of a T x R time-series
// matrix. A constant column is an error (its correlations are undefined).
Matrix correlation_from_timeseries(const Matrix& ts);

// F + I: shifts every eigenvalue up by one, turning a rank-deficient
// correlation matrix into an SPD one.
SpdMatrix regularize(const Matrix& correlation);

// atanh applied to the off-diagonal entries; the diagonal is zeroed since it
// is excluded from downstream feature vectors.
Matrix fisher_transform(const Matrix& correlation);

// Row-major upper triangle (excluding the diagonal), length R(R-1)/2.
Vector upper_triangle_features(const Matrix& m);
Matrix matrix_from_upper_triangle(const Vector& v, int dim, double diagonal);

// Network-block means of per-pair coefficient values. Accepts either vec
// coordinates (length R(R+1)/2, diagonal-first order) or upper-triangle
// features (length R(R-1)/2). Entry (a, b) averages the values over ROI pairs
// (i, j) with {network(i), network(j)} = {a, b}; self-pairs (i, i) enter the
// diagonal blocks only when include_self_connections is set, since those
// coordinates are flagged uninformative by the diagonal rule.
Matrix network_average(const Vector& coefficients, const NetworkMap& map,
                       bool include_self_connections = false);

// Whitespace-delimited numeric matrix files; '#' starts a comment line.
// Values are written with 17 significant digits so a round trip is exact.
Matrix load_matrix_file(const std::string& path);
void save_matrix_file(const std::string& path, const Matrix& m);
std::string format_double(double v);

enum class InputKind { ConnectivityMatrix, TimeSeries };

// Loads subjects from a manifest (subject_id  path, one per line; paths are
// relative to the manifest) and a delimited phenotype table with a header
// row. The subject id sets must match exactly. phenotype_path may be empty
// when no responses are needed (prediction inputs).
StudyDataset load_dataset(const std::string& manifest_path, const std::string& phenotype_path,
                          const std::vector<std::string>& response_names, InputKind kind);

// ROI label + network name per line, R lines in ROI order.
NetworkMap load_network_map(const std::string& path);

}  // namespace rpls
