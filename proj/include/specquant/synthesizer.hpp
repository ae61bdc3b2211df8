#pragma once

#include "specquant/gas_library.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace specquant {

/// Source relative-intensity noise; SNR = -10 log10(sigma).
class NoiseSpec {
 public:
  static NoiseSpec from_snr_db(double snr_db);
  static NoiseSpec from_sigma(double sigma);

  double sigma() const noexcept { return sigma_; }
  double snr_db() const noexcept { return snr_db_; }

 private:
  NoiseSpec(double sigma, double snr_db) : sigma_(sigma), snr_db_(snr_db) {}
  double sigma_;
  double snr_db_;
};

enum class ConcentrationMode { kUniform, kLogUniform };

/// Molar concentration sampling. Each gas is present independently with
/// `presence_prob`; absent gases are exactly zero.
struct ConcentrationScheme {
  ConcentrationMode mode = ConcentrationMode::kUniform;
  double low = 0.0;
  double high = 1e-5;
  double presence_prob = 1.0;

  void validate() const;
};

/// I: uniform(eps, 10 uM), always present. II: log-uniform(100 pM, 10 uM),
/// present half the time. III: log-uniform(10 pM, 1 mM), present half the time.
ConcentrationScheme group_scheme(int group);

inline constexpr double kDefaultPathLengthCm = 12.0;

/// Concentration of gas `k` in sample `i`; a pure function of its arguments.
double sample_concentration(const ConcentrationScheme& scheme, std::uint64_t seed,
                            std::size_t i, std::size_t k);

RowMatrix sample_concentrations(const ConcentrationScheme& scheme, std::size_t n, std::size_t k,
                                std::uint64_t seed);

/// Noiseless absorbance sum_k b c_k |e_k| e_k(l), optionally with
/// A = A0 - log10(1 + rho), rho ~ N(0, sigma) i.i.d. per grid point.
Spectrum forward_spectrum(const GasLibrary& lib, const Vector& concentrations,
                          double path_length_cm, const std::optional<NoiseSpec>& noise,
                          std::uint64_t noise_seed);

/// N absorbance spectra with their true concentrations.
struct SpectraDataset {
  GridPtr grid;
  std::vector<std::string> gas_names;
  RowMatrix absorbances;     // N x M
  RowMatrix concentrations;  // N x K, molar
  double path_length_cm = kDefaultPathLengthCm;
  std::optional<NoiseSpec> noise;
  ConcentrationScheme scheme;
  std::string library_fingerprint;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(absorbances.rows()); }
  std::size_t gas_count() const noexcept { return static_cast<std::size_t>(concentrations.cols()); }

  SpectraDataset subset(const std::vector<std::size_t>& rows) const;
  SpectraDataset head(std::size_t n) const;
  std::string describe() const;
};

/// Row i draws its concentrations from (seed, i, k) and its noise from
/// (seed, i): the output does not depend on thread count or chunking.
SpectraDataset generate_dataset(const GasLibrary& lib, const ConcentrationScheme& scheme,
                                std::size_t n, double path_length_cm,
                                const std::optional<NoiseSpec>& noise, std::uint64_t seed);

/// Rows [begin, end) of the dataset generate_dataset() would produce.
SpectraDataset generate_dataset_chunk(const GasLibrary& lib, const ConcentrationScheme& scheme,
                                      std::size_t begin, std::size_t end, double path_length_cm,
                                      const std::optional<NoiseSpec>& noise, std::uint64_t seed);

}  // namespace specquant
