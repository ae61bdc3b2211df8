#pragma once

#include "specquant/synthesizer.hpp"

#include <filesystem>

namespace specquant {

inline constexpr int kDatasetFormatVersion = 1;

/// Binary container: 8-byte magic "SPQDSET\0", little-endian uint64 header
/// length, JSON header, then little-endian float64 payload (absorbances N x M
/// row-major, followed by concentrations N x K row-major).
void save_dataset(const SpectraDataset& ds, const std::filesystem::path& path);

/// Validates magic, format version, payload size and, when `library` is
/// given, its fingerprint. Errors: kVersion, kTruncated, kDimension,
/// kFingerprint, kParse.
SpectraDataset load_dataset(const std::filesystem::path& path,
                            const GasLibrary* library = nullptr);

}  // namespace specquant
