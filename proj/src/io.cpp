#include "stochinf/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace stochinf {

namespace {

using nlohmann::json;

[[noreturn]] void io_fail(const std::filesystem::path& path,
                          const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

// Next non-comment, non-blank line; false at end of stream.
bool next_data_line(std::istream& in, std::string* line) {
  while (std::getline(in, *line)) {
    std::size_t pos = line->find_first_not_of(" \t\r\n");
    if (pos == std::string::npos) continue;
    if ((*line)[pos] == '%') continue;
    return true;
  }
  return false;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

void write_matrix_market(const std::filesystem::path& path, const Matrix& M) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open for writing");
  out << "%%MatrixMarket matrix array real general\n";
  out << M.rows() << " " << M.cols() << "\n";
  char buf[64];
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", M(i, j));
      out << buf << "\n";
    }
  }
  if (!out) io_fail(path, "write failed");
}

Matrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open for reading");

  std::string header;
  if (!std::getline(in, header)) io_fail(path, "empty file");
  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") io_fail(path, "missing MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") io_fail(path, "unsupported object '" + object + "'");
  if (field != "real" && field != "double" && field != "integer") {
    io_fail(path, "unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    io_fail(path, "unsupported symmetry '" + symmetry + "'");
  }
  const bool symmetric = symmetry == "symmetric";

  std::string line;
  if (!next_data_line(in, &line)) io_fail(path, "missing size line");
  std::istringstream ss(line);

  if (format == "array") {
    Eigen::Index rows = 0, cols = 0;
    if (!(ss >> rows >> cols) || rows < 0 || cols < 0) {
      io_fail(path, "bad array size line");
    }
    if (symmetric && rows != cols) io_fail(path, "symmetric but not square");
    Matrix M(rows, cols);
    // Array data is column-major; symmetric storage holds each column from
    // the diagonal down.
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = symmetric ? j : 0; i < rows; ++i) {
        if (!next_data_line(in, &line)) io_fail(path, "truncated array data");
        double v = 0.0;
        std::istringstream vs(line);
        if (!(vs >> v)) io_fail(path, "bad value '" + line + "'");
        M(i, j) = v;
        if (symmetric) M(j, i) = v;
      }
    }
    return M;
  }

  if (format == "coordinate") {
    Eigen::Index rows = 0, cols = 0;
    long long nnz = 0;
    if (!(ss >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
      io_fail(path, "bad coordinate size line");
    }
    if (symmetric && rows != cols) io_fail(path, "symmetric but not square");
    Matrix M = Matrix::Zero(rows, cols);
    for (long long e = 0; e < nnz; ++e) {
      if (!next_data_line(in, &line)) io_fail(path, "truncated coordinates");
      Eigen::Index i = 0, j = 0;
      double v = 0.0;
      std::istringstream es(line);
      if (!(es >> i >> j >> v) || i < 1 || i > rows || j < 1 || j > cols) {
        io_fail(path, "bad coordinate entry '" + line + "'");
      }
      M(i - 1, j - 1) = v;
      if (symmetric) M(j - 1, i - 1) = v;
    }
    return M;
  }

  io_fail(path, "unsupported format '" + format + "'");
}

namespace {

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_entry(const json& entry, const std::filesystem::path& dir,
                         const std::filesystem::path& manifest,
                         const std::string& key) {
  if (entry.is_string()) {
    return read_matrix_market(dir / entry.get<std::string>());
  }
  if (!entry.is_array()) {
    io_fail(manifest, "entry '" + key + "' must be a path or a nested array");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(entry.size());
  Eigen::Index cols = -1;
  Matrix M;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = entry[static_cast<std::size_t>(i)];
    if (!row.is_array()) {
      io_fail(manifest, "entry '" + key + "' row " + std::to_string(i) +
                            " is not an array");
    }
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      M.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      io_fail(manifest, "entry '" + key + "' has ragged rows");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      const json& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number()) {
        io_fail(manifest, "entry '" + key + "' has a non-numeric value");
      }
      M(i, j) = v.get<double>();
    }
  }
  if (rows == 0) M.resize(0, 0);
  return M;
}

std::vector<Matrix> matrix_list_from_entry(const json& entry,
                                           const std::filesystem::path& dir,
                                           const std::filesystem::path& manifest,
                                           const std::string& key) {
  if (!entry.is_array()) {
    io_fail(manifest, "entry '" + key + "' must be a list");
  }
  std::vector<Matrix> out;
  for (std::size_t t = 0; t < entry.size(); ++t) {
    out.push_back(matrix_from_entry(entry[t], dir, manifest,
                                    key + "[" + std::to_string(t) + "]"));
  }
  return out;
}

void check_meta(const json& doc, const char* key, Eigen::Index actual,
                const std::filesystem::path& manifest) {
  if (!doc.contains(key)) return;
  const auto& v = doc.at(key);
  if (!v.is_number_integer() || v.get<Eigen::Index>() != actual) {
    io_fail(manifest, std::string("metadata '") + key +
                          "' disagrees with the matrices (" +
                          std::to_string(actual) + ")");
  }
}

}  // namespace

SystemManifest load_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) io_fail(manifest_path, "cannot open for reading");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    io_fail(manifest_path, std::string("JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) io_fail(manifest_path, "top level is not an object");

  const std::filesystem::path dir = manifest_path.parent_path();
  for (const char* key : {"A", "B", "C"}) {
    if (!doc.contains(key)) {
      io_fail(manifest_path, std::string("missing entry '") + key + "'");
    }
  }

  Matrix A = matrix_from_entry(doc.at("A"), dir, manifest_path, "A");
  Matrix B = matrix_from_entry(doc.at("B"), dir, manifest_path, "B");
  Matrix C = matrix_from_entry(doc.at("C"), dir, manifest_path, "C");
  Matrix D;
  if (doc.contains("D") && !doc.at("D").is_null()) {
    D = matrix_from_entry(doc.at("D"), dir, manifest_path, "D");
  } else {
    D = Matrix::Zero(C.rows(), B.cols());
  }
  std::vector<Matrix> Nx;
  if (doc.contains("Nx") && !doc.at("Nx").is_null()) {
    Nx = matrix_list_from_entry(doc.at("Nx"), dir, manifest_path, "Nx");
  }
  if (Nx.empty()) Nx.push_back(Matrix::Zero(A.rows(), A.cols()));
  std::vector<Matrix> Nu;
  if (doc.contains("Nu") && !doc.at("Nu").is_null()) {
    Nu = matrix_list_from_entry(doc.at("Nu"), dir, manifest_path, "Nu");
  }

  SystemManifest out;
  out.name = doc.value("name", std::string{});
  out.provenance = doc.value("provenance", std::string{});
  try {
    out.system = StochasticSystem(std::move(A), std::move(Nx), std::move(Nu),
                                  std::move(B), std::move(C), std::move(D));
  } catch (const std::invalid_argument& e) {
    io_fail(manifest_path, e.what());
  }
  check_meta(doc, "n", out.system.n(), manifest_path);
  check_meta(doc, "m", out.system.m(), manifest_path);
  check_meta(doc, "p", out.system.p(), manifest_path);
  check_meta(doc, "noise_terms",
             static_cast<Eigen::Index>(out.system.noise_count()),
             manifest_path);
  return out;
}

void save_manifest(const std::filesystem::path& manifest_path,
                   const StochasticSystem& sys, const std::string& name,
                   const std::string& provenance, bool inline_arrays) {
  sys.validate();
  json doc;
  doc["name"] = name;
  if (!provenance.empty()) doc["provenance"] = provenance;
  doc["n"] = sys.n();
  doc["m"] = sys.m();
  doc["p"] = sys.p();
  doc["noise_terms"] = sys.noise_count();

  const std::filesystem::path dir = manifest_path.parent_path();
  const std::string stem = manifest_path.stem().string();
  auto emit = [&](const std::string& key, const Matrix& M) -> json {
    if (inline_arrays) return matrix_to_json(M);
    const std::string file = stem + "_" + key + ".mtx";
    write_matrix_market(dir / file, M);
    return file;
  };

  doc["A"] = emit("A", sys.A);
  json nx = json::array();
  for (std::size_t t = 0; t < sys.Nx.size(); ++t) {
    nx.push_back(emit("Nx" + std::to_string(t), sys.Nx[t]));
  }
  doc["Nx"] = std::move(nx);
  json nu = json::array();
  for (std::size_t t = 0; t < sys.Nu.size(); ++t) {
    nu.push_back(emit("Nu" + std::to_string(t), sys.Nu[t]));
  }
  doc["Nu"] = std::move(nu);
  doc["B"] = emit("B", sys.B);
  doc["C"] = emit("C", sys.C);
  doc["D"] = emit("D", sys.D);

  std::ofstream out(manifest_path);
  if (!out) io_fail(manifest_path, "cannot open for writing");
  out << doc.dump(2) << "\n";
  if (!out) io_fail(manifest_path, "write failed");
}

std::string report_json(const NormReport& report, int indent) {
  json doc;
  doc["norm"] = report.norm;
  doc["gamma_lo"] = report.gamma_lo;
  doc["gamma_hi"] = report.gamma_hi;
  doc["tol"] = report.tol;
  doc["det_hinf"] = report.det_hinf;
  json hist = json::array();
  for (const auto& e : report.bracket_history) {
    hist.push_back({{"gamma", e.gamma},
                    {"status", to_string(e.status)},
                    {"newton_iters", e.newton_iters},
                    {"residual", e.residual}});
  }
  doc["bracket_history"] = std::move(hist);
  doc["timings"] = json(report.timings);
  return doc.dump(indent);
}

}  // namespace stochinf
