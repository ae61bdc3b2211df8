#include "specquant/gas_library.hpp"
#include "specquant/spectra_csv.hpp"
#include "test_support.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace specquant {
namespace {

using testing::expect_error;

TEST(GasLibrary, ReferenceNorms) {
  const auto lib = synthesize_library(1, testing::small_grid());
  const std::vector<std::pair<std::string, double>> expected{
      {"N2O", 1166.4}, {"CO", 569.1}, {"H2O", 371.2}, {"NO", 219.7}, {"CH4", 162.0},
      {"HCl", 160.7},  {"HF", 126.9}, {"C2H6", 103.1}, {"HBr", 30.5}};
  ASSERT_EQ(lib.size(), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) {
    EXPECT_EQ(lib.gas(k).name, expected[k].first);
    EXPECT_DOUBLE_EQ(lib.gas(k).norm, expected[k].second);
    EXPECT_NEAR(lib.gas(k).shape.values().norm(), 1.0, 1e-12);
    EXPECT_TRUE((lib.gas(k).shape.values().array() >= 0.0).all());
  }
  EXPECT_EQ(lib.index_of("HF"), 6u);
  EXPECT_EQ(lib.index_of("Xe"), lib.size());
}

TEST(GasLibrary, DeterministicPerSeed) {
  const auto a = synthesize_library(5, testing::small_grid());
  const auto b = synthesize_library(5, testing::small_grid());
  const auto c = synthesize_library(6, testing::small_grid());
  EXPECT_EQ(a.shapes(), b.shapes());
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.fingerprint(), c.fingerprint());
}

TEST(GasLibrary, OverlapIsSymmetricWithUnitDiagonal) {
  const auto lib = synthesize_library(1, std::make_shared<const WavelengthGrid>(WavelengthGrid::default_mid_ir()));
  const Matrix o = overlap_matrix(lib);
  EXPECT_TRUE(o.isApprox(o.transpose(), 1e-14));
  for (Eigen::Index k = 0; k < o.rows(); ++k) EXPECT_NEAR(o(k, k), 1.0, 1e-12);
  // oracle: explicit dot products
  for (Eigen::Index j = 0; j < o.rows(); ++j) {
    for (Eigen::Index k = 0; k < o.cols(); ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < lib.grid()->size(); ++i) {
        dot += lib.gas(j).shape.values()(i) * lib.gas(k).shape.values()(i);
      }
      EXPECT_NEAR(o(j, k), dot, 1e-12);
    }
  }
  const auto ch4 = static_cast<Eigen::Index>(lib.index_of("CH4"));
  const auto hcl = static_cast<Eigen::Index>(lib.index_of("HCl"));
  double largest = 0.0;
  Eigen::Index bj = 0, bk = 0;
  for (Eigen::Index j = 0; j < o.rows(); ++j) {
    for (Eigen::Index k = j + 1; k < o.cols(); ++k) {
      if (o(j, k) > largest) largest = o(j, k), bj = j, bk = k;
    }
  }
  EXPECT_EQ(bj, ch4);
  EXPECT_EQ(bk, hcl);
}

TEST(GasLibrary, BuildRejectsBadDefinitions) {
  auto g = testing::small_grid();
  GasDefinition ok{"A", {5.0}, {0.05}, {1.0}, 10.0};
  auto bad_center = ok;
  bad_center.line_centers_um = {20.0};
  expect_error(ErrorCode::kConfiguration, [&] { build_library(g, {bad_center}); });
  auto bad_norm = ok;
  bad_norm.target_norm = 0.0;
  expect_error(ErrorCode::kConfiguration, [&] { build_library(g, {bad_norm}); });
  expect_error(ErrorCode::kConfiguration, [&] { build_library(g, {ok, ok}); });
  auto unnamed = ok;
  unnamed.name.clear();
  expect_error(ErrorCode::kConfiguration, [&] { build_library(g, {unnamed}); });
}

TEST(GasLibrary, SaveLoadRoundTrip) {
  const auto lib = synthesize_library(2, testing::small_grid());
  testing::TempDir dir("lib");
  save_library(lib, dir.path());
  const auto back = load_library(dir.path());
  EXPECT_EQ(back.names(), lib.names());
  EXPECT_EQ(back.norms(), lib.norms());
  EXPECT_EQ(back.shapes(), lib.shapes());
  EXPECT_EQ(back.fingerprint(), lib.fingerprint());
  EXPECT_EQ(load_library(dir / "library.csv").fingerprint(), lib.fingerprint());
}

TEST(GasLibrary, RawColumnsTakeTheirMagnitude) {
  auto g = testing::small_grid(5);
  SpectraTable t{g, {"X"}, {Spectrum(g, (Vector(5) << 0, 3, 4, 0, 0).finished())}};
  testing::TempDir dir("raw");
  write_spectra_csv(dir / "raw.csv", t);
  const auto lib = load_library(dir / "raw.csv");
  EXPECT_DOUBLE_EQ(lib.gas(0).norm, 5.0);
  EXPECT_NEAR(lib.gas(0).shape.values()(2), 0.8, 1e-15);
}

TEST(GasLibrary, LoadErrors) {
  auto g = testing::small_grid(5);
  testing::TempDir dir("bad");
  SpectraTable zero{g, {"Z"}, {Spectrum(g, Vector::Zero(5))}};
  write_spectra_csv(dir / "zero.csv", zero);
  expect_error(ErrorCode::kDegenerateGas, [&] { load_library(dir / "zero.csv"); });

  SpectraTable t{g, {"X"}, {Spectrum(g, (Vector(5) << 0, 3, 4, 0, 0).finished())}};
  write_spectra_csv(dir / "x.csv", t);
  std::ofstream(dir / "x.json") << R"({"norms": {"Y": 2.0}})";
  expect_error(ErrorCode::kSchema, [&] { load_library(dir / "x.csv"); });
  std::ofstream(dir / "x.json") << R"({"norms": {"X": 7.0}})";
  expect_error(ErrorCode::kSchema, [&] { load_library(dir / "x.csv"); });
  std::ofstream(dir / "x.json") << R"({"norms": )";
  expect_error(ErrorCode::kParse, [&] { load_library(dir / "x.csv"); });
  std::ofstream(dir / "x.json") << R"({"other": 1})";
  expect_error(ErrorCode::kSchema, [&] { load_library(dir / "x.csv"); });
}

TEST(GasLibrary, LinesStayInsideTheGrid) {
  const WavelengthGrid grid = WavelengthGrid::default_mid_ir();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const auto& def : default_gas_profile(seed, grid)) {
      for (double c : def.line_centers_um) {
        EXPECT_GE(c, grid.front());
        EXPECT_LE(c, grid.back());
      }
    }
  }
}

}  // namespace
}  // namespace specquant
