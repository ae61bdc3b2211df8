#include "specquant/spectral_core.hpp"

#include "specquant/error.hpp"

#include <cmath>
#include <sstream>

namespace specquant {

WavelengthGrid::WavelengthGrid(std::vector<double> points_um, SpacingMode mode)
    : points_(std::move(points_um)), mode_(mode) {
  if (points_.size() < 2) {
    throw Error(ErrorCode::kConfiguration, "wavelength grid needs at least 2 points");
  }
  for (std::size_t j = 0; j < points_.size(); ++j) {
    if (!std::isfinite(points_[j]) || points_[j] <= 0.0) {
      throw Error(ErrorCode::kConfiguration,
                  "wavelength grid point " + std::to_string(j) + " is not finite and positive");
    }
    if (j > 0 && !(points_[j] > points_[j - 1])) {
      throw Error(ErrorCode::kConfiguration,
                  "wavelength grid is not strictly increasing at point " + std::to_string(j));
    }
  }
  const auto m = static_cast<Eigen::Index>(points_.size());
  unit_weights_ = Vector::Ones(m);
  trapezoid_weights_ = Vector::Zero(m);
  for (Eigen::Index j = 0; j + 1 < m; ++j) {
    const double half = 0.5 * (points_[j + 1] - points_[j]);
    trapezoid_weights_(j) += half;
    trapezoid_weights_(j + 1) += half;
  }
}

WavelengthGrid WavelengthGrid::uniform(double min_um, double max_um, std::size_t count) {
  if (count < 2 || !(max_um > min_um)) {
    throw Error(ErrorCode::kConfiguration, "uniform grid needs count >= 2 and max > min");
  }
  std::vector<double> pts(count);
  const double step = (max_um - min_um) / static_cast<double>(count - 1);
  for (std::size_t j = 0; j < count; ++j) pts[j] = min_um + step * static_cast<double>(j);
  pts.back() = max_um;
  return WavelengthGrid(std::move(pts), SpacingMode::kUniform);
}

WavelengthGrid WavelengthGrid::default_mid_ir() { return uniform(2.5, 14.0, 1000); }

const Vector& WavelengthGrid::weights(Weighting weighting) const noexcept {
  return weighting == Weighting::kUnit ? unit_weights_ : trapezoid_weights_;
}

bool same_grid(const GridPtr& a, const GridPtr& b) noexcept {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

void require_same_grid(const GridPtr& a, const GridPtr& b, const char* context) {
  if (!same_grid(a, b)) {
    throw Error(ErrorCode::kDimension, std::string(context) + ": wavelength grids differ");
  }
}

Spectrum::Spectrum(GridPtr grid, Vector values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw Error(ErrorCode::kConfiguration, "spectrum without a grid");
  if (static_cast<std::size_t>(values_.size()) != grid_->size()) {
    throw Error(ErrorCode::kDimension, "spectrum has " + std::to_string(values_.size()) +
                                           " values for a grid of " +
                                           std::to_string(grid_->size()));
  }
  if (!values_.allFinite()) throw Error(ErrorCode::kDomain, "spectrum contains non-finite values");
}

double weighted_dot(std::span<const double> f, std::span<const double> g,
                    std::span<const double> w) {
  if (f.size() != g.size() || f.size() != w.size()) {
    throw Error(ErrorCode::kDimension, "weighted_dot: length mismatch");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) sum += w[j] * f[j] * g[j];
  return sum;
}

double inner_product(const Spectrum& f, const Spectrum& g, Weighting weighting) {
  require_same_grid(f.grid(), g.grid(), "inner_product");
  const Vector& w = f.grid()->weights(weighting);
  return weighted_dot({f.values().data(), f.size()}, {g.values().data(), g.size()},
                      {w.data(), static_cast<std::size_t>(w.size())});
}

double norm(const Spectrum& f, Weighting weighting) {
  return std::sqrt(inner_product(f, f, weighting));
}

Vector normalized(const Vector& values, const Vector& weights) {
  const double n = std::sqrt(values.cwiseProduct(values).dot(weights));
  if (!(n > 0.0)) throw Error(ErrorCode::kDegenerateGas, "cannot normalize a zero spectrum");
  if (std::abs(n - 1.0) <= 1e-14) return values;
  return values / n;
}

std::string grid_description(const WavelengthGrid& grid) {
  std::ostringstream os;
  os << grid.size() << " points, " << grid.front() << "-" << grid.back() << " um";
  return os.str();
}

}  // namespace specquant
