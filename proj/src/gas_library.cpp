#include "specquant/gas_library.hpp"

#include "specquant/error.hpp"
#include "specquant/fingerprint.hpp"
#include "specquant/rng.hpp"
#include "specquant/spectra_csv.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <set>

namespace specquant {

namespace {

struct ProfileGas {
  const char* name;
  double norm;       // M^-1 cm^-1
  double band_low;   // fraction of the grid span
  double band_high;
};

// Extinction norms of the nine-gas mixture set, descending. CH4 and HCl share
// part of their band so that their nearly equal norms couple two components.
constexpr ProfileGas kDefaultGases[] = {
    {"N2O", 1166.4, 0.00, 0.11}, {"CO", 569.1, 0.11, 0.22},  {"H2O", 371.2, 0.22, 0.33},
    {"NO", 219.7, 0.33, 0.44},   {"CH4", 162.0, 0.44, 0.58}, {"HCl", 160.7, 0.51, 0.65},
    {"HF", 126.9, 0.65, 0.76},   {"C2H6", 103.1, 0.76, 0.88}, {"HBr", 30.5, 0.88, 1.00},
};

constexpr int kMinLines = 5;
constexpr int kMaxLines = 40;
constexpr double kSpillFraction = 0.15;  // share of lines placed anywhere in the window
constexpr double kSpillStrength = 0.3;
constexpr double kMinHwhmFraction = 0.001;  // of the grid span
constexpr double kMaxHwhmFraction = 0.003;
constexpr double kMaxCrossOverlap = 0.1;
constexpr double kCoupledOverlapLow = 0.12;
constexpr double kCoupledOverlapHigh = 0.28;
constexpr double kMinOutsideFraction = 0.6;
constexpr int kMaxAttempts = 10000;

Vector render(const GasDefinition& def, const WavelengthGrid& grid) {
  const auto& pts = grid.points();
  Vector values = Vector::Zero(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t l = 0; l < def.line_centers_um.size(); ++l) {
    const double c = def.line_centers_um[l];
    const double w = def.line_hwhm_um[l];
    const double s = def.line_strengths[l];
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const double d = pts[j] - c;
      values(static_cast<Eigen::Index>(j)) += s * w * w / (d * d + w * w);
    }
  }
  return values;
}

void validate_definition(const GasDefinition& def, const WavelengthGrid& grid) {
  const auto n = def.line_centers_um.size();
  if (def.name.empty()) throw Error(ErrorCode::kConfiguration, "gas definition without a name");
  if (n == 0 || def.line_hwhm_um.size() != n || def.line_strengths.size() != n) {
    throw Error(ErrorCode::kConfiguration,
                "gas " + def.name + ": line lists must be non-empty and of equal length");
  }
  for (std::size_t l = 0; l < n; ++l) {
    const double c = def.line_centers_um[l];
    if (!(c >= grid.front() && c <= grid.back())) {
      throw Error(ErrorCode::kConfiguration, "gas " + def.name + ": line center " +
                                                 std::to_string(c) + " um outside the grid span");
    }
    if (!(def.line_hwhm_um[l] > 0.0) || !(def.line_strengths[l] > 0.0)) {
      throw Error(ErrorCode::kConfiguration,
                  "gas " + def.name + ": line widths and strengths must be positive");
    }
  }
  if (!(def.target_norm > 0.0) || !std::isfinite(def.target_norm)) {
    throw Error(ErrorCode::kConfiguration, "gas " + def.name + ": target norm must be positive");
  }
}

GasDefinition draw_gas(const ProfileGas& gas, std::uint64_t stream, const WavelengthGrid& grid) {
  std::mt19937_64 engine(stream);
  const double span = grid.back() - grid.front();
  std::uniform_int_distribution<int> line_count(kMinLines, kMaxLines);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GasDefinition def;
  def.name = gas.name;
  def.target_norm = gas.norm;
  const int lines = line_count(engine);
  for (int l = 0; l < lines; ++l) {
    const bool spill = unit(engine) < kSpillFraction;
    const double lo = spill ? 0.0 : gas.band_low;
    const double hi = spill ? 1.0 : gas.band_high;
    const double center = grid.front() + span * (lo + (hi - lo) * unit(engine));
    const double hwhm =
        span * kMinHwhmFraction * std::pow(kMaxHwhmFraction / kMinHwhmFraction, unit(engine));
    const double strength = std::pow(10.0, -unit(engine)) * (spill ? kSpillStrength : 1.0);
    def.line_centers_um.push_back(std::clamp(center, grid.front(), grid.back()));
    def.line_hwhm_um.push_back(hwhm);
    def.line_strengths.push_back(strength);
  }
  return def;
}

bool profile_acceptable(const std::vector<GasDefinition>& defs, const WavelengthGrid& grid) {
  for (const auto& a : defs) {
    for (const auto& b : defs) {
      if (&a != &b && strength_fraction_outside(a, b) < kMinOutsideFraction) return false;
    }
  }
  const Vector& w = grid.weights(Weighting::kUnit);
  std::vector<Vector> shapes;
  shapes.reserve(defs.size());
  for (const auto& d : defs) shapes.push_back(normalized(render(d, grid), w));
  for (std::size_t j = 0; j < shapes.size(); ++j) {
    for (std::size_t k = j + 1; k < shapes.size(); ++k) {
      const double overlap = shapes[j].dot(shapes[k]);
      const bool coupled = defs[j].name == "CH4" && defs[k].name == "HCl";
      if (coupled) {
        if (overlap < kCoupledOverlapLow || overlap > kCoupledOverlapHigh) return false;
      } else if (std::abs(overlap) >= kMaxCrossOverlap) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

double strength_fraction_outside(const GasDefinition& gas, const GasDefinition& other) {
  const auto strongest = std::max_element(other.line_strengths.begin(), other.line_strengths.end()) -
                         other.line_strengths.begin();
  const double center = other.line_centers_um[static_cast<std::size_t>(strongest)];
  const double reach = 3.0 * other.line_hwhm_um[static_cast<std::size_t>(strongest)];
  double total = 0.0;
  double outside = 0.0;
  for (std::size_t l = 0; l < gas.line_centers_um.size(); ++l) {
    total += gas.line_strengths[l];
    if (std::abs(gas.line_centers_um[l] - center) > reach) outside += gas.line_strengths[l];
  }
  return total > 0.0 ? outside / total : 0.0;
}

GasLibrary::GasLibrary(GridPtr grid, std::vector<GasEntry> gases)
    : grid_(std::move(grid)), gases_(std::move(gases)) {
  if (!grid_) throw Error(ErrorCode::kConfiguration, "gas library without a grid");
  if (gases_.empty()) throw Error(ErrorCode::kConfiguration, "gas library is empty");
  std::set<std::string> seen;
  for (const auto& g : gases_) {
    if (!seen.insert(g.name).second) {
      throw Error(ErrorCode::kConfiguration, "duplicate gas name '" + g.name + "'");
    }
    require_same_grid(grid_, g.shape.grid(), "gas library");
    const double n2 = g.shape.values().squaredNorm();
    if (std::abs(n2 - 1.0) > 1e-10) {
      throw Error(ErrorCode::kConfiguration, "gas " + g.name + " shape is not unit norm");
    }
    if (!(g.norm > 0.0) || !std::isfinite(g.norm)) {
      throw Error(ErrorCode::kConfiguration, "gas " + g.name + " norm must be positive");
    }
  }
  std::stable_sort(gases_.begin(), gases_.end(),
                   [](const GasEntry& a, const GasEntry& b) { return a.norm > b.norm; });

  const auto k = static_cast<Eigen::Index>(gases_.size());
  const auto m = static_cast<Eigen::Index>(grid_->size());
  shapes_.resize(k, m);
  norms_.resize(k);
  Fingerprint fp;
  fp.add(std::span<const double>(grid_->points()));
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& g = gases_[static_cast<std::size_t>(i)];
    shapes_.row(i) = g.shape.values().transpose();
    norms_(i) = g.norm;
    fp.add(g.name).add(g.norm).add(std::span<const double>(g.shape.values().data(), g.shape.size()));
  }
  fingerprint_ = fp.hex();
}

std::vector<std::string> GasLibrary::names() const {
  std::vector<std::string> out;
  out.reserve(gases_.size());
  for (const auto& g : gases_) out.push_back(g.name);
  return out;
}

std::size_t GasLibrary::index_of(const std::string& name) const {
  for (std::size_t k = 0; k < gases_.size(); ++k) {
    if (gases_[k].name == name) return k;
  }
  return gases_.size();
}

std::vector<GasDefinition> default_gas_profile(std::uint64_t seed, const WavelengthGrid& grid) {
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<GasDefinition> defs;
    std::uint64_t g = 0;
    for (const auto& gas : kDefaultGases) {
      defs.push_back(draw_gas(gas, rng::key(seed, rng::kLibrary, static_cast<std::uint64_t>(attempt), g++),
                              grid));
    }
    if (profile_acceptable(defs, grid)) return defs;
  }
  throw Error(ErrorCode::kConfiguration,
              "could not draw a default gas profile meeting the overlap constraints on this grid");
}

GasLibrary build_library(GridPtr grid, const std::vector<GasDefinition>& profile) {
  if (!grid) throw Error(ErrorCode::kConfiguration, "build_library: no grid");
  std::vector<GasEntry> entries;
  const Vector& w = grid->weights(Weighting::kUnit);
  for (const auto& def : profile) {
    validate_definition(def, *grid);
    entries.push_back({def.name, Spectrum(grid, normalized(render(def, *grid), w)), def.target_norm});
  }
  return GasLibrary(std::move(grid), std::move(entries));
}

GasLibrary synthesize_library(std::uint64_t seed, GridPtr grid) {
  if (!grid) throw Error(ErrorCode::kConfiguration, "synthesize_library: no grid");
  return build_library(grid, default_gas_profile(seed, *grid));
}

Matrix overlap_matrix(const GasLibrary& lib) {
  const RowMatrix& s = lib.shapes();
  return s * s.transpose();
}

void save_library(const GasLibrary& lib, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  SpectraTable table{lib.grid(), lib.names(), {}};
  for (const auto& g : lib.gases()) table.spectra.push_back(g.shape);
  write_spectra_csv(dir / "library.csv", table);

  nlohmann::json meta;
  meta["format"] = "specquant-library/1";
  meta["fingerprint"] = lib.fingerprint();
  meta["order"] = lib.names();
  for (const auto& g : lib.gases()) meta["norms"][g.name] = g.norm;
  std::ofstream out(dir / "library.json", std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "library.json").string());
  out << meta.dump(2) << '\n';
}

GasLibrary load_library(const std::filesystem::path& path) {
  std::filesystem::path csv = path;
  std::filesystem::path sidecar;
  if (std::filesystem::is_directory(path)) {
    csv = path / "library.csv";
    sidecar = path / "library.json";
  } else {
    sidecar = std::filesystem::path(path).replace_extension(".json");
  }
  const SpectraTable table = read_spectra_csv(csv);

  std::optional<nlohmann::json> norms;
  if (std::filesystem::exists(sidecar)) {
    std::ifstream in(sidecar, std::ios::binary);
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, sidecar.string() + ": " + e.what());
    }
    if (!meta.contains("norms") || !meta["norms"].is_object()) {
      throw Error(ErrorCode::kSchema, sidecar.string() + ": missing 'norms' object");
    }
    norms = meta["norms"];
    std::set<std::string> csv_names(table.names.begin(), table.names.end());
    std::set<std::string> meta_names;
    for (auto it = norms->begin(); it != norms->end(); ++it) meta_names.insert(it.key());
    if (csv_names != meta_names) {
      throw Error(ErrorCode::kSchema,
                  "library metadata names do not match the CSV columns in " + csv.string());
    }
  }

  std::vector<GasEntry> entries;
  const Vector& w = table.grid->weights(Weighting::kUnit);
  for (std::size_t c = 0; c < table.names.size(); ++c) {
    const auto& name = table.names[c];
    const Vector& raw = table.spectra[c].values();
    const double raw_norm = raw.norm();
    if (!(raw_norm > 0.0)) {
      throw Error(ErrorCode::kDegenerateGas, "gas '" + name + "' has an all-zero spectrum");
    }
    double gas_norm = raw_norm;
    if (norms) {
      const auto& entry = (*norms)[name];
      if (!entry.is_number()) {
        throw Error(ErrorCode::kSchema, "norm for gas '" + name + "' is not a number");
      }
      const double listed = entry.get<double>();
      if (std::abs(raw_norm - 1.0) <= 1e-9) {
        gas_norm = listed;  // shape-only column
      } else if (std::abs(listed - raw_norm) > 1e-9 * raw_norm) {
        throw Error(ErrorCode::kSchema, "norm for gas '" + name +
                                            "' disagrees with the magnitude of its column");
      }
    }
    entries.push_back({name, Spectrum(table.grid, normalized(raw, w)), gas_norm});
  }
  return GasLibrary(table.grid, std::move(entries));
}

}  // namespace specquant
