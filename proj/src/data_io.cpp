#include "data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace rpls {

namespace fs = std::filesystem;

namespace {

constexpr double kVarianceTol = 1e-24;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool is_comment_or_blank(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t[0] == '#';
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  if (delim == ' ') {
    // whitespace-delimited: collapse runs of spaces/tabs
    std::istringstream in(line);
    while (in >> field) out.push_back(field);
    return out;
  }
  std::istringstream in(line);
  while (std::getline(in, field, delim)) out.push_back(trim(field));
  return out;
}

char sniff_delimiter(const std::string& header) {
  if (header.find('\t') != std::string::npos) return '\t';
  if (header.find(',') != std::string::npos) return ',';
  return ' ';
}

double parse_double(const std::string& field, const std::string& path, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::ParseError,
         path + ":" + std::to_string(line_no) + ": cannot parse numeric value '" + field + "'");
  }
}

}  // namespace

Matrix StudyDataset::responses_matrix() const {
  Matrix out(subjects.size(), response_names.size());
  for (std::size_t i = 0; i < subjects.size(); ++i) out.row(i) = subjects[i].responses;
  return out;
}

std::vector<std::string> NetworkMap::network_names() const {
  std::vector<std::string> names;
  for (const std::string& n : network_of_roi)
    if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
  return names;
}

Matrix correlation_from_timeseries(const Matrix& ts) {
  const Eigen::Index t = ts.rows();
  const Eigen::Index r = ts.cols();
  if (t < 3) fail(ErrorCode::InvalidInput, "correlation: need at least three time points");
  if (!ts.allFinite()) fail(ErrorCode::InvalidInput, "correlation: non-finite entries");

  Matrix centered = ts.rowwise() - ts.colwise().mean();
  Vector ss(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    ss[j] = centered.col(j).squaredNorm();
    if (ss[j] <= kVarianceTol)
      fail(ErrorCode::ConstantSignal,
           "correlation: column " + std::to_string(j) + " has zero variance");
  }
  Matrix corr(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    corr(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < r; ++j) {
      const double c = centered.col(i).dot(centered.col(j)) / std::sqrt(ss[i] * ss[j]);
      corr(i, j) = c;
      corr(j, i) = c;
    }
  }
  return corr;
}

SpdMatrix regularize(const Matrix& correlation) {
  if (correlation.rows() != correlation.cols())
    fail(ErrorCode::InvalidInput, "regularize: matrix is not square");
  const Matrix shifted = correlation + Matrix::Identity(correlation.rows(), correlation.cols());
  return SpdMatrix(shifted);  // throws NotPositiveDefinite if the shift was not enough
}

Matrix fisher_transform(const Matrix& correlation) {
  const Eigen::Index r = correlation.rows();
  if (r != correlation.cols()) fail(ErrorCode::InvalidInput, "fisher_transform: matrix is not square");
  Matrix out = Matrix::Zero(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j) {
      if (i == j) continue;
      const double v = correlation(i, j);
      if (!(v > -1.0 && v < 1.0))
        fail(ErrorCode::OutOfDomain, "fisher_transform: off-diagonal entry outside (-1, 1)");
      out(i, j) = std::atanh(v);
    }
  return out;
}

Vector upper_triangle_features(const Matrix& m) {
  const Eigen::Index r = m.rows();
  if (r != m.cols()) fail(ErrorCode::InvalidInput, "upper_triangle_features: matrix is not square");
  Vector v(r * (r - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = i + 1; j < r; ++j) v[k++] = m(i, j);
  return v;
}

Matrix matrix_from_upper_triangle(const Vector& v, int dim, double diagonal) {
  if (v.size() != static_cast<Eigen::Index>(dim) * (dim - 1) / 2)
    fail(ErrorCode::InvalidInput, "matrix_from_upper_triangle: length does not match dimension");
  Matrix m = Matrix::Constant(dim, dim, diagonal);
  Eigen::Index k = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      m(i, j) = v[k];
      m(j, i) = v[k];
      ++k;
    }
  return m;
}

Matrix network_average(const Vector& coefficients, const NetworkMap& map,
                       bool include_self_connections) {
  const int r = map.dim();
  if (r < 1) fail(ErrorCode::InvalidInput, "network_average: empty network map");
  const bool with_diagonal = coefficients.size() == vec_dim(r);
  if (!with_diagonal && coefficients.size() != static_cast<Eigen::Index>(r) * (r - 1) / 2)
    fail(ErrorCode::InvalidInput, "network_average: coefficient length does not match the map");

  const std::vector<std::string> names = map.network_names();
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);

  const int n_nets = static_cast<int>(names.size());
  Matrix sums = Matrix::Zero(n_nets, n_nets);
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(n_nets, n_nets);

  auto add_pair = [&](int i, int j, double value) {
    const int a = index.at(map.network_of_roi[i]);
    const int b = index.at(map.network_of_roi[j]);
    sums(a, b) += value;
    counts(a, b) += 1;
    if (a != b) {
      sums(b, a) += value;
      counts(b, a) += 1;
    }
  };

  for (Eigen::Index k = 0; k < coefficients.size(); ++k) {
    int i, j;
    if (with_diagonal) {
      std::tie(i, j) = vec_coord_pair(static_cast<int>(k), r);
      if (i == j && !include_self_connections) continue;
    } else {
      // upper-triangle order, no diagonal
      std::tie(i, j) = vec_coord_pair(static_cast<int>(k) + r, r);
    }
    add_pair(i, j, coefficients[k]);
  }

  Matrix out = Matrix::Zero(n_nets, n_nets);
  for (int a = 0; a < n_nets; ++a)
    for (int b = 0; b < n_nets; ++b)
      if (counts(a, b) > 0) out(a, b) = sums(a, b) / counts(a, b);
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Matrix load_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open matrix file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::vector<double> row;
    std::string field;
    while (fields >> field) row.push_back(parse_double(field, path, line_no));
    if (!rows.empty() && rows.front().size() != row.size())
      fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": ragged row (expected " +
                                      std::to_string(rows.front().size()) + " values, got " +
                                      std::to_string(row.size()) + ")");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::EmptyInput, path + ": no numeric rows");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void save_matrix_file(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write matrix file " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "failed writing matrix file " + path);
}

namespace {

struct PhenotypeTable {
  std::vector<std::string> ids;
  Matrix values;  // ids.size() x response_names.size()
};

PhenotypeTable load_phenotypes(const std::string& path, const std::vector<std::string>& response_names) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open phenotype table " + path);
  std::string header;
  int line_no = 0;
  do {
    if (!std::getline(in, header)) fail(ErrorCode::EmptyInput, path + ": empty phenotype table");
    ++line_no;
  } while (is_comment_or_blank(header));

  const char delim = sniff_delimiter(header);
  const std::vector<std::string> columns = split_fields(header, delim);
  if (columns.empty()) fail(ErrorCode::ParseError, path + ": empty header row");

  std::vector<int> wanted(response_names.size(), -1);
  for (std::size_t r = 0; r < response_names.size(); ++r) {
    for (std::size_t c = 1; c < columns.size(); ++c)
      if (columns[c] == response_names[r]) wanted[r] = static_cast<int>(c);
    if (wanted[r] < 0)
      fail(ErrorCode::ParseError,
           path + ": response column '" + response_names[r] + "' not found in header");
  }

  PhenotypeTable table;
  std::vector<std::vector<double>> rows;
  std::set<std::string> seen_ids;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const std::vector<std::string> fields = split_fields(line, delim);
    if (fields.size() != columns.size())
      fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": expected " +
                                      std::to_string(columns.size()) + " fields, got " +
                                      std::to_string(fields.size()));
    if (!seen_ids.insert(fields[0]).second)
      fail(ErrorCode::ParseError,
           path + ":" + std::to_string(line_no) + ": duplicate subject id '" + fields[0] + "'");
    table.ids.push_back(fields[0]);
    std::vector<double> row(response_names.size());
    for (std::size_t r = 0; r < response_names.size(); ++r) {
      const std::string& field = fields[wanted[r]];
      if (field.empty())
        fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) +
                                        ": missing value for '" + response_names[r] + "'");
      row[r] = parse_double(field, path, line_no);
    }
    rows.push_back(std::move(row));
  }
  if (table.ids.empty()) fail(ErrorCode::EmptyInput, path + ": phenotype table has no data rows");

  table.values.resize(rows.size(), response_names.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) table.values(i, j) = rows[i][j];
  return table;
}

std::string join_ids(const std::set<std::string>& ids) {
  std::string out;
  for (const std::string& id : ids) {
    if (!out.empty()) out += ", ";
    out += id;
  }
  return out;
}

}  // namespace

StudyDataset load_dataset(const std::string& manifest_path, const std::string& phenotype_path,
                          const std::vector<std::string>& response_names, InputKind kind) {
  std::ifstream in(manifest_path);
  if (!in) fail(ErrorCode::IoError, "cannot open manifest " + manifest_path);
  const fs::path root = fs::path(manifest_path).parent_path();

  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    std::istringstream fields(line);
    std::string id, rel_path;
    if (!(fields >> id >> rel_path))
      fail(ErrorCode::ParseError,
           manifest_path + ":" + std::to_string(line_no) + ": expected 'subject_id path'");
    if (!seen_ids.insert(id).second)
      fail(ErrorCode::ParseError,
           manifest_path + ":" + std::to_string(line_no) + ": duplicate subject id '" + id + "'");
    entries.emplace_back(id, rel_path);
  }
  if (entries.empty()) fail(ErrorCode::EmptyInput, manifest_path + ": no subjects listed");

  StudyDataset ds;
  ds.response_names = response_names;

  std::map<std::string, Vector> responses_by_id;
  if (!phenotype_path.empty()) {
    const PhenotypeTable table = load_phenotypes(phenotype_path, response_names);
    std::set<std::string> manifest_ids, table_ids;
    for (const auto& [id, _] : entries) manifest_ids.insert(id);
    for (const std::string& id : table.ids) table_ids.insert(id);
    if (manifest_ids != table_ids) {
      std::set<std::string> only_manifest, only_table;
      std::set_difference(manifest_ids.begin(), manifest_ids.end(), table_ids.begin(),
                          table_ids.end(), std::inserter(only_manifest, only_manifest.begin()));
      std::set_difference(table_ids.begin(), table_ids.end(), manifest_ids.begin(),
                          manifest_ids.end(), std::inserter(only_table, only_table.begin()));
      fail(ErrorCode::ParseError,
           "subject ids differ between manifest and phenotype table; only in manifest: {" +
               join_ids(only_manifest) + "}; only in phenotypes: {" + join_ids(only_table) + "}");
    }
    for (std::size_t i = 0; i < table.ids.size(); ++i)
      responses_by_id[table.ids[i]] = table.values.row(i);
  }

  for (const auto& [id, rel_path] : entries) {
    fs::path file(rel_path);
    if (file.is_relative()) file = root / file;
    Matrix loaded = load_matrix_file(file.string());
    Matrix connectivity;
    if (kind == InputKind::TimeSeries) {
      connectivity = correlation_from_timeseries(loaded);
    } else {
      if (loaded.rows() != loaded.cols())
        fail(ErrorCode::ParseError, file.string() + ": connectivity matrix is not square (" +
                                        std::to_string(loaded.rows()) + "x" +
                                        std::to_string(loaded.cols()) + ")");
      const double scale = std::max(1.0, loaded.cwiseAbs().maxCoeff());
      const double skew = (loaded - loaded.transpose()).cwiseAbs().maxCoeff();
      if (skew > 1e-10 * scale)
        fail(ErrorCode::ParseError, file.string() + ": connectivity matrix is not symmetric");
      connectivity = 0.5 * (loaded + loaded.transpose());
    }
    if (ds.dim == 0) ds.dim = static_cast<int>(connectivity.rows());
    if (connectivity.rows() != ds.dim)
      fail(ErrorCode::ParseError, file.string() + ": dimension " +
                                      std::to_string(connectivity.rows()) +
                                      " differs from the first subject's " + std::to_string(ds.dim));
    SubjectRecord rec;
    rec.subject_id = id;
    rec.connectivity = std::move(connectivity);
    if (!phenotype_path.empty()) rec.responses = responses_by_id.at(id);
    ds.subjects.push_back(std::move(rec));
  }
  return ds;
}

NetworkMap load_network_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open network map " + path);
  NetworkMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const char delim = line.find('\t') != std::string::npos ? '\t'
                       : line.find(',') != std::string::npos ? ','
                                                             : ' ';
    std::vector<std::string> fields;
    if (delim == ' ') {
      std::istringstream ss(line);
      std::string f;
      while (ss >> f) fields.push_back(f);
    } else {
      fields = split_fields(line, delim);
    }
    if (fields.size() != 2)
      fail(ErrorCode::ParseError,
           path + ":" + std::to_string(line_no) + ": expected 'roi_label network_name'");
    map.roi_labels.push_back(fields[0]);
    map.network_of_roi.push_back(fields[1]);
  }
  if (map.roi_labels.empty()) fail(ErrorCode::EmptyInput, path + ": empty network map");
  return map;
}

}  // namespace rpls
