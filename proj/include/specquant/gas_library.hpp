#pragma once

#include "specquant/spectral_core.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace specquant {

/// Line list for one absorbing species; the rendered spectrum is a sum of
/// Lorentzian lines normalized to unit norm, with `target_norm` recorded
/// separately as the extinction magnitude (M^-1 cm^-1).
struct GasDefinition {
  std::string name;
  std::vector<double> line_centers_um;
  std::vector<double> line_hwhm_um;
  std::vector<double> line_strengths;
  double target_norm = 1.0;
};

struct GasEntry {
  std::string name;
  Spectrum shape;  // unit norm under unit weighting
  double norm;
};

/// K normalized extinction spectra on a shared grid, ordered by descending norm.
class GasLibrary {
 public:
  GasLibrary(GridPtr grid, std::vector<GasEntry> gases);

  const GridPtr& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return gases_.size(); }
  const GasEntry& gas(std::size_t k) const { return gases_.at(k); }
  const std::vector<GasEntry>& gases() const noexcept { return gases_; }
  std::vector<std::string> names() const;
  /// Index of `name`, or size() when absent.
  std::size_t index_of(const std::string& name) const;

  /// K x M matrix of unit-norm shapes.
  const RowMatrix& shapes() const noexcept { return shapes_; }
  const Vector& norms() const noexcept { return norms_; }

  std::string fingerprint() const { return fingerprint_; }

 private:
  GridPtr grid_;
  std::vector<GasEntry> gases_;
  RowMatrix shapes_;
  Vector norms_;
  std::string fingerprint_;
};

/// Nine-gas reference profile with fixed norms; line positions are drawn from `seed`.
std::vector<GasDefinition> default_gas_profile(std::uint64_t seed, const WavelengthGrid& grid);

/// Renders the definitions on the grid. Throws kConfiguration for line
/// centers outside the grid span, bad line parameters, or duplicate names.
GasLibrary build_library(GridPtr grid, const std::vector<GasDefinition>& profile);

/// default_gas_profile() + build_library().
GasLibrary synthesize_library(std::uint64_t seed, GridPtr grid);

/// Entry (j,k) = <e_j|e_k> under unit weighting.
Matrix overlap_matrix(const GasLibrary& lib);

/// Writes `library.csv` (unit-norm shapes) and `library.json`
/// (`{"norms": {...}, ...}`) into `dir`.
void save_library(const GasLibrary& lib, const std::filesystem::path& dir);

/// Accepts a library directory, or a CSV path with a sibling `.json` sidecar.
/// Raw columns are normalized on load and their magnitude becomes the norm;
/// columns that are already unit-norm take the sidecar norm.
GasLibrary load_library(const std::filesystem::path& path);

/// Fraction of `gas` line strength whose centers lie outside the strongest
/// line (+-3 HWHM) of `other`.
double strength_fraction_outside(const GasDefinition& gas, const GasDefinition& other);

}  // namespace specquant
