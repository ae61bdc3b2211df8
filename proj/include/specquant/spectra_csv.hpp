#pragma once

#include "specquant/spectral_core.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace specquant {

/// Named spectra sharing one grid, as stored in a `wavelength_um,<name>,...` CSV.
struct SpectraTable {
  GridPtr grid;
  std::vector<std::string> names;
  std::vector<Spectrum> spectra;
};

SpectraTable read_spectra_csv(const std::filesystem::path& path);
SpectraTable parse_spectra_csv(const std::string& text);

/// Writes values with 17 significant digits so a re-read is bit-exact.
void write_spectra_csv(const std::filesystem::path& path, const SpectraTable& table);
std::string format_spectra_csv(const SpectraTable& table);

/// Shortest representation that round-trips a double ("%.17g").
std::string format_double(double value);

}  // namespace specquant
