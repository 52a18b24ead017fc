#pragma once

#include <filesystem>
#include <string>

#include "stochinf/hinf.hpp"

namespace stochinf {

// MatrixMarket array format, real general: one value per line in column-major
// order, 17 significant digits, so write followed by read reproduces every
// double bit-exactly.
void write_matrix_market(const std::filesystem::path& path, const Matrix& M);

// Accepts array and coordinate formats with real or integer fields, general
// or symmetric storage (symmetric lower triangles are expanded). Pattern and
// complex fields are rejected. Errors carry the offending path.
Matrix read_matrix_market(const std::filesystem::path& path);

struct SystemManifest {
  std::string name;
  std::string provenance;
  StochasticSystem system;
};

// Manifest document: {"name", "provenance", "n", "m", "p", "noise_terms",
// "A", "Nx", "Nu", "B", "C", "D"}. Every matrix entry is either a nested
// row-major array of numbers or a string naming a MatrixMarket file relative
// to the manifest's directory; "Nx" and "Nu" are lists of such entries.
// "Nu" and "D" may be omitted (no input noise, D = 0); an omitted or empty
// "Nx" becomes a single zero term, since the system type always carries at
// least one. Dimension fields, when present, are checked against the parsed
// matrices.
SystemManifest load_manifest(const std::filesystem::path& manifest_path);

// Inverse of load_manifest. With inline_arrays everything lands in the one
// JSON document; otherwise each matrix goes to "<stem>_<entry>.mtx" beside
// the manifest and is referenced by that relative name.
void save_manifest(const std::filesystem::path& manifest_path,
                   const StochasticSystem& sys, const std::string& name,
                   const std::string& provenance = "",
                   bool inline_arrays = false);

// NormReport serialization with fixed keys: norm, gamma_lo, gamma_hi, tol,
// det_hinf, bracket_history (objects with gamma, status, newton_iters,
// residual), timings. indent < 0 gives the compact single-line form.
std::string report_json(const NormReport& report, int indent = 2);

}  // namespace stochinf
