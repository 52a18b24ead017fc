#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>

#include <json.hpp>

#include "stochinf/io.hpp"
#include "stochinf/problems.hpp"
#include "support/oracles.hpp"

using namespace stochinf;
namespace fs = std::filesystem;

namespace {

// Fresh directory per test case, removed on destruction.
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("stochinf_io_" + std::to_string(std::rand()) +
            std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

void write_text(const fs::path& p, const std::string& body) {
  std::ofstream out(p);
  out << body;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("matrix market round trip is bit exact") {
  TempDir dir;
  std::mt19937 gen(11);
  Matrix M = oracle::randn(gen, 5, 3);
  M(0, 0) = 1.0 / 3.0;
  M(1, 0) = -1e-308;          // subnormal territory
  M(2, 1) = 6.02214076e23;
  M(3, 2) = 0.0;
  M(4, 2) = -0.1;

  const fs::path file = dir.path / "m.mtx";
  write_matrix_market(file, M);
  const Matrix back = read_matrix_market(file);
  REQUIRE(back.rows() == 5);
  REQUIRE(back.cols() == 3);
  CHECK((back - M).norm() == 0.0);

  const std::string text = slurp(file);
  CHECK(text.find("%%MatrixMarket matrix array real general") == 0);
}

TEST_CASE("matrix market coordinate, integer and symmetric forms parse") {
  TempDir dir;

  const fs::path coord = dir.path / "coord.mtx";
  write_text(coord,
             "%%MatrixMarket matrix coordinate real general\n"
             "% a comment line\n"
             "\n"
             "3 2 3\n"
             "1 1 2.5\n"
             "3 2 -1.0\n"
             "2 1 4\n");
  Matrix M = read_matrix_market(coord);
  REQUIRE(M.rows() == 3);
  REQUIRE(M.cols() == 2);
  CHECK(M(0, 0) == 2.5);
  CHECK(M(1, 0) == 4.0);
  CHECK(M(2, 1) == -1.0);
  CHECK(M(0, 1) == 0.0);

  const fs::path integer = dir.path / "int.mtx";
  write_text(integer,
             "%%MatrixMarket matrix array integer general\n"
             "2 2\n"
             "1\n-7\n0\n3\n");
  Matrix I = read_matrix_market(integer);
  CHECK(I(0, 0) == 1.0);
  CHECK(I(1, 0) == -7.0);
  CHECK(I(1, 1) == 3.0);

  const fs::path sym = dir.path / "sym.mtx";
  write_text(sym,
             "%%MatrixMarket matrix coordinate real symmetric\n"
             "3 3 4\n"
             "1 1 2\n"
             "2 1 5\n"
             "3 1 -1\n"
             "3 3 7\n");
  Matrix S = read_matrix_market(sym);
  CHECK(S(0, 1) == 5.0);  // mirrored from the stored lower triangle
  CHECK(S(1, 0) == 5.0);
  CHECK(S(0, 2) == -1.0);
  CHECK(S(1, 1) == 0.0);
  CHECK(S(2, 2) == 7.0);

  const fs::path symarr = dir.path / "symarr.mtx";
  write_text(symarr,
             "%%MatrixMarket matrix array real symmetric\n"
             "2 2\n"
             "1.5\n2.5\n3.5\n");
  Matrix SA = read_matrix_market(symarr);
  CHECK(SA(0, 0) == 1.5);
  CHECK(SA(1, 0) == 2.5);
  CHECK(SA(0, 1) == 2.5);
  CHECK(SA(1, 1) == 3.5);
}

TEST_CASE("matrix market errors name the offending file") {
  TempDir dir;
  const fs::path missing = dir.path / "nope.mtx";
  try {
    read_matrix_market(missing);
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("nope.mtx") != std::string::npos);
  }

  const fs::path banner = dir.path / "banner.mtx";
  write_text(banner, "%%NotMarket stuff\n2 2\n1\n2\n3\n4\n");
  CHECK_THROWS_AS(read_matrix_market(banner), std::runtime_error);

  const fs::path truncated = dir.path / "short.mtx";
  write_text(truncated, "%%MatrixMarket matrix array real general\n3 3\n1\n2\n");
  CHECK_THROWS_AS(read_matrix_market(truncated), std::runtime_error);

  const fs::path pattern = dir.path / "pattern.mtx";
  write_text(pattern,
             "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n");
  CHECK_THROWS_AS(read_matrix_market(pattern), std::runtime_error);

  const fs::path complex_field = dir.path / "cplx.mtx";
  write_text(complex_field,
             "%%MatrixMarket matrix array complex general\n1 1\n1.0 2.0\n");
  CHECK_THROWS_AS(read_matrix_market(complex_field), std::runtime_error);

  const fs::path junk = dir.path / "junk.mtx";
  write_text(junk, "%%MatrixMarket matrix array real general\n2 1\n1.0\nbeef\n");
  CHECK_THROWS_AS(read_matrix_market(junk), std::runtime_error);
}

TEST_CASE("manifest inline round trip") {
  TempDir dir;
  const StochasticSystem sys = random_general_system(4, 2, 2, 2, 31);
  const fs::path file = dir.path / "sys.json";
  save_manifest(file, sys, "general-31", "unit test", /*inline_arrays=*/true);

  // Everything must live in the one document.
  int entries = 0;
  for (const auto& e : fs::directory_iterator(dir.path)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);

  const SystemManifest m = load_manifest(file);
  CHECK(m.name == "general-31");
  CHECK(m.provenance == "unit test");
  CHECK((m.system.A - sys.A).norm() == 0.0);
  REQUIRE(m.system.Nx.size() == 2);
  REQUIRE(m.system.Nu.size() == 2);
  CHECK((m.system.Nx[1] - sys.Nx[1]).norm() == 0.0);
  CHECK((m.system.Nu[0] - sys.Nu[0]).norm() == 0.0);
  CHECK((m.system.B - sys.B).norm() == 0.0);
  CHECK((m.system.C - sys.C).norm() == 0.0);
  CHECK((m.system.D - sys.D).norm() == 0.0);
}

TEST_CASE("manifest sidecar files round trip") {
  TempDir dir;
  const StochasticSystem sys = random_system(3, 2, 1, 77);
  const fs::path file = dir.path / "plant.json";
  save_manifest(file, sys, "plant-77");

  CHECK(fs::exists(dir.path / "plant_A.mtx"));
  CHECK(fs::exists(dir.path / "plant_Nx0.mtx"));
  CHECK(fs::exists(dir.path / "plant_B.mtx"));
  CHECK(fs::exists(dir.path / "plant_C.mtx"));

  const SystemManifest m = load_manifest(file);
  CHECK((m.system.A - sys.A).norm() == 0.0);
  CHECK((m.system.Nx[0] - sys.Nx[0]).norm() == 0.0);
  CHECK((m.system.B - sys.B).norm() == 0.0);

  // Relative references must resolve from the manifest directory, not the
  // process working directory: load via a dotted path from elsewhere.
  const SystemManifest again =
      load_manifest(dir.path / "." / ".." / dir.path.filename() / "plant.json");
  CHECK((again.system.A - sys.A).norm() == 0.0);
}

TEST_CASE("hand written manifest defaults") {
  TempDir dir;
  const fs::path file = dir.path / "min.json";
  write_text(file, R"({
  "name": "minimal",
  "A": [[-1.0, 0.0], [0.5, -2.0]],
  "B": [[1.0], [0.0]],
  "C": [[1.0, 1.0]]
})");
  const SystemManifest m = load_manifest(file);
  CHECK(m.name == "minimal");
  CHECK(m.provenance.empty());
  CHECK(m.system.n() == 2);
  CHECK(m.system.m() == 1);
  CHECK(m.system.p() == 1);
  REQUIRE(m.system.Nx.size() == 1);  // omitted Nx becomes one zero term
  CHECK(m.system.Nx[0].norm() == 0.0);
  CHECK(m.system.Nu.empty());
  CHECK(m.system.D.rows() == 1);
  CHECK(m.system.D.cols() == 1);
  CHECK(m.system.D.norm() == 0.0);
  CHECK(m.system.A(1, 0) == 0.5);
}

TEST_CASE("manifest validation failures") {
  TempDir dir;

  const fs::path no_a = dir.path / "no_a.json";
  write_text(no_a, R"({"name": "x", "B": [[1.0]], "C": [[1.0]]})");
  CHECK_THROWS_AS(load_manifest(no_a), std::runtime_error);

  const fs::path bad_dims = dir.path / "dims.json";
  write_text(bad_dims, R"({
  "name": "x", "n": 3,
  "A": [[-1.0, 0.0], [0.0, -1.0]],
  "B": [[1.0], [1.0]],
  "C": [[1.0, 0.0]]
})");
  try {
    load_manifest(bad_dims);
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("dims.json") != std::string::npos);
  }

  const fs::path ragged = dir.path / "ragged.json";
  write_text(ragged, R"({
  "name": "x",
  "A": [[-1.0, 0.0], [0.0]],
  "B": [[1.0], [1.0]],
  "C": [[1.0, 0.0]]
})");
  CHECK_THROWS_AS(load_manifest(ragged), std::runtime_error);

  const fs::path not_json = dir.path / "broken.json";
  write_text(not_json, "{\"name\": \"x\",");
  CHECK_THROWS_AS(load_manifest(not_json), std::runtime_error);

  const fs::path missing_ref = dir.path / "ref.json";
  write_text(missing_ref, R"({
  "name": "x",
  "A": "ghost.mtx",
  "B": [[1.0]],
  "C": [[1.0]]
})");
  try {
    load_manifest(missing_ref);
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("ghost.mtx") != std::string::npos);
  }

  const fs::path mismatched = dir.path / "mismatch.json";
  write_text(mismatched, R"({
  "name": "x",
  "A": [[-1.0, 0.0], [0.0, -1.0]],
  "B": [[1.0], [1.0]],
  "C": [[1.0]]
})");
  CHECK_THROWS_AS(load_manifest(mismatched), std::runtime_error);
}

TEST_CASE("report json carries exactly the documented keys") {
  NormReport r;
  r.norm = 1.25;
  r.gamma_lo = 1.2;
  r.gamma_hi = 1.3;
  r.tol = 1e-4;
  r.det_hinf = 1.1;
  r.bracket_history.push_back(BracketEntry{1.2, NewtonStatus::StabilityLost,
                                           7, 3.5e-3});
  r.bracket_history.push_back(BracketEntry{1.3, NewtonStatus::Converged,
                                           5, 1e-12});
  r.timings["stability_s"] = 0.001;
  r.timings["total_s"] = 0.5;

  const nlohmann::json doc = nlohmann::json::parse(report_json(r));
  std::set<std::string> keys;
  for (auto it = doc.begin(); it != doc.end(); ++it) keys.insert(it.key());
  CHECK(keys == std::set<std::string>{"norm", "gamma_lo", "gamma_hi", "tol",
                                      "det_hinf", "bracket_history",
                                      "timings"});

  CHECK(doc["norm"].get<double>() == 1.25);
  CHECK(doc["det_hinf"].get<double>() == 1.1);
  REQUIRE(doc["bracket_history"].size() == 2);
  const auto& entry = doc["bracket_history"][0];
  std::set<std::string> ekeys;
  for (auto it = entry.begin(); it != entry.end(); ++it) ekeys.insert(it.key());
  CHECK(ekeys == std::set<std::string>{"gamma", "status", "newton_iters",
                                       "residual"});
  CHECK(entry["status"].get<std::string>() == "StabilityLost");
  CHECK(doc["bracket_history"][1]["status"].get<std::string>() == "Converged");
  CHECK(doc["timings"]["total_s"].get<double>() == 0.5);

  // Compact form is a single line.
  const std::string compact = report_json(r, -1);
  CHECK(compact.find('\n') == std::string::npos);
}
