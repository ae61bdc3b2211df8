#pragma once

#include "specquant/linalg.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace specquant {

/// How spectra are integrated against each other: plain dot product, or
/// trapezoidal quadrature over the wavelength grid (the functional flavor).
enum class Weighting { kUnit, kTrapezoidal };

enum class SpacingMode { kUniform, kExplicit };

/// Strictly increasing, positive, finite sampling grid in micrometres.
class WavelengthGrid {
 public:
  explicit WavelengthGrid(std::vector<double> points_um,
                          SpacingMode mode = SpacingMode::kExplicit);

  static WavelengthGrid uniform(double min_um, double max_um, std::size_t count);
  /// 1,000 points over 2.5-14 um.
  static WavelengthGrid default_mid_ir();

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<double>& points() const noexcept { return points_; }
  double front() const noexcept { return points_.front(); }
  double back() const noexcept { return points_.back(); }
  SpacingMode spacing_mode() const noexcept { return mode_; }

  /// Quadrature weights for the requested weighting (all ones for kUnit).
  const Vector& weights(Weighting weighting) const noexcept;

  bool operator==(const WavelengthGrid& other) const noexcept { return points_ == other.points_; }

 private:
  std::vector<double> points_;
  SpacingMode mode_;
  Vector unit_weights_;
  Vector trapezoid_weights_;
};

using GridPtr = std::shared_ptr<const WavelengthGrid>;

bool same_grid(const GridPtr& a, const GridPtr& b) noexcept;
/// Throws kDimension when the grids differ.
void require_same_grid(const GridPtr& a, const GridPtr& b, const char* context);

/// A real-valued function sampled on a grid (absorbance or extinction).
class Spectrum {
 public:
  Spectrum(GridPtr grid, Vector values);

  const GridPtr& grid() const noexcept { return grid_; }
  const Vector& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

 private:
  GridPtr grid_;
  Vector values_;
};

/// sum_j w_j f(l_j) g(l_j)
double inner_product(const Spectrum& f, const Spectrum& g, Weighting weighting = Weighting::kUnit);
double norm(const Spectrum& f, Weighting weighting = Weighting::kUnit);

/// Raw-array forms used by the kernels; sizes must agree.
double weighted_dot(std::span<const double> f, std::span<const double> g,
                    std::span<const double> w);

/// Scale to unit norm. Values already within 1e-14 of unit norm are returned
/// unchanged, which makes the operation idempotent bit-for-bit.
Vector normalized(const Vector& values, const Vector& weights);

std::string grid_description(const WavelengthGrid& grid);

}  // namespace specquant
