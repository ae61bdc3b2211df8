#include "specquant/synthesizer.hpp"

#include "specquant/error.hpp"
#include "specquant/kernels.hpp"
#include "specquant/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace specquant {

NoiseSpec NoiseSpec::from_snr_db(double snr_db) {
  if (!(snr_db > 0.0) || !std::isfinite(snr_db)) {
    throw Error(ErrorCode::kConfiguration, "SNR must be a positive number of dB");
  }
  return NoiseSpec(std::pow(10.0, -snr_db / 10.0), snr_db);
}

NoiseSpec NoiseSpec::from_sigma(double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0)) {
    throw Error(ErrorCode::kConfiguration, "noise sigma must lie in (0, 1)");
  }
  return NoiseSpec(sigma, -10.0 * std::log10(sigma));
}

void ConcentrationScheme::validate() const {
  if (!(low > 0.0) || !(high > low) || !std::isfinite(high)) {
    throw Error(ErrorCode::kConfiguration, "concentration bounds must satisfy 0 < low < high");
  }
  if (!(presence_prob > 0.0 && presence_prob <= 1.0)) {
    throw Error(ErrorCode::kConfiguration, "presence probability must lie in (0, 1]");
  }
}

ConcentrationScheme group_scheme(int group) {
  switch (group) {
    case 1:
      return {ConcentrationMode::kUniform, std::numeric_limits<double>::epsilon(), 10e-6, 1.0};
    case 2:
      return {ConcentrationMode::kLogUniform, 100e-12, 10e-6, 0.5};
    case 3:
      return {ConcentrationMode::kLogUniform, 10e-12, 1e-3, 0.5};
    default:
      throw Error(ErrorCode::kConfiguration, "dataset group must be 1, 2 or 3");
  }
}

double sample_concentration(const ConcentrationScheme& scheme, std::uint64_t seed, std::size_t i,
                            std::size_t k) {
  if (scheme.presence_prob < 1.0) {
    const double u = rng::to_unit(rng::key(seed, rng::kPresence, i, k));
    if (u >= scheme.presence_prob) return 0.0;
  }
  const double u = rng::to_unit(rng::key(seed, rng::kConcentration, i, k));
  if (scheme.mode == ConcentrationMode::kUniform) {
    return scheme.low + u * (scheme.high - scheme.low);
  }
  const double lo = std::log10(scheme.low);
  const double hi = std::log10(scheme.high);
  return std::min(scheme.high, std::pow(10.0, lo + u * (hi - lo)));
}

RowMatrix sample_concentrations(const ConcentrationScheme& scheme, std::size_t n, std::size_t k,
                                std::uint64_t seed) {
  scheme.validate();
  if (n == 0 || k == 0) throw Error(ErrorCode::kConfiguration, "need n >= 1 and k >= 1");
  RowMatrix c(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t g = 0; g < k; ++g) {
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) =
          sample_concentration(scheme, seed, i, g);
    }
  }
  return c;
}

Spectrum forward_spectrum(const GasLibrary& lib, const Vector& concentrations,
                          double path_length_cm, const std::optional<NoiseSpec>& noise,
                          std::uint64_t noise_seed) {
  if (static_cast<std::size_t>(concentrations.size()) != lib.size()) {
    throw Error(ErrorCode::kDimension, "forward_spectrum: expected " + std::to_string(lib.size()) +
                                           " concentrations");
  }
  if (!(path_length_cm > 0.0)) throw Error(ErrorCode::kDomain, "path length must be positive");
  for (Eigen::Index k = 0; k < concentrations.size(); ++k) {
    if (!(concentrations(k) >= 0.0)) {
      throw Error(ErrorCode::kDomain, "negative concentration for gas " + lib.gas(k).name);
    }
  }
  const RowMatrix& shapes = lib.shapes();
  Vector a = Vector::Zero(shapes.cols());
  for (Eigen::Index k = 0; k < shapes.rows(); ++k) {
    const double scale = path_length_cm * lib.norms()(k) * concentrations(k);
    a += scale * shapes.row(k).transpose();
  }
  if (noise) {
    kernels::add_intensity_noise(a.data(), static_cast<std::size_t>(a.size()), noise->sigma(),
                                 rng::key(noise_seed, rng::kNoise, 0));
  }
  return Spectrum(lib.grid(), std::move(a));
}

SpectraDataset SpectraDataset::subset(const std::vector<std::size_t>& rows) const {
  SpectraDataset out = *this;
  out.absorbances.resize(static_cast<Eigen::Index>(rows.size()), absorbances.cols());
  out.concentrations.resize(static_cast<Eigen::Index>(rows.size()), concentrations.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= size()) throw Error(ErrorCode::kBound, "dataset subset row out of range");
    out.absorbances.row(static_cast<Eigen::Index>(r)) = absorbances.row(static_cast<Eigen::Index>(rows[r]));
    out.concentrations.row(static_cast<Eigen::Index>(r)) =
        concentrations.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

SpectraDataset SpectraDataset::head(std::size_t n) const {
  if (n > size()) throw Error(ErrorCode::kBound, "dataset has fewer than " + std::to_string(n) + " rows");
  SpectraDataset out = *this;
  out.absorbances = absorbances.topRows(static_cast<Eigen::Index>(n));
  out.concentrations = concentrations.topRows(static_cast<Eigen::Index>(n));
  return out;
}

std::string SpectraDataset::describe() const {
  std::ostringstream os;
  os << size() << " samples x " << absorbances.cols() << " points, " << gas_count() << " gases, b="
     << path_length_cm << " cm, ";
  if (noise) {
    os << "SNR " << noise->snr_db() << " dB";
  } else {
    os << "noiseless";
  }
  os << ", seed " << seed;
  return os.str();
}

namespace {

kernels::ForwardSetup make_setup(const GasLibrary& lib, const ConcentrationScheme& scheme,
                                 double path_length_cm, const std::optional<NoiseSpec>& noise,
                                 std::uint64_t seed) {
  scheme.validate();
  if (!(path_length_cm > 0.0)) throw Error(ErrorCode::kDomain, "path length must be positive");
  kernels::ForwardSetup setup;
  setup.shapes = &lib.shapes();
  setup.scaled_norms = path_length_cm * lib.norms();
  setup.scheme = scheme;
  setup.noise = noise;
  setup.seed = seed;
  return setup;
}

}  // namespace

SpectraDataset generate_dataset_chunk(const GasLibrary& lib, const ConcentrationScheme& scheme,
                                      std::size_t begin, std::size_t end, double path_length_cm,
                                      const std::optional<NoiseSpec>& noise, std::uint64_t seed) {
  if (end <= begin) throw Error(ErrorCode::kConfiguration, "dataset needs at least one sample");
  const auto setup = make_setup(lib, scheme, path_length_cm, noise, seed);
  SpectraDataset ds;
  ds.grid = lib.grid();
  ds.gas_names = lib.names();
  ds.absorbances.resize(static_cast<Eigen::Index>(end - begin), lib.shapes().cols());
  ds.concentrations.resize(static_cast<Eigen::Index>(end - begin),
                           static_cast<Eigen::Index>(lib.size()));
  kernels::omp::synthesize_rows(setup, begin, ds.absorbances, ds.concentrations);
  ds.path_length_cm = path_length_cm;
  ds.noise = noise;
  ds.scheme = scheme;
  ds.library_fingerprint = lib.fingerprint();
  ds.seed = seed;
  return ds;
}

SpectraDataset generate_dataset(const GasLibrary& lib, const ConcentrationScheme& scheme,
                                std::size_t n, double path_length_cm,
                                const std::optional<NoiseSpec>& noise, std::uint64_t seed) {
  return generate_dataset_chunk(lib, scheme, 0, n, path_length_cm, noise, seed);
}

}  // namespace specquant
