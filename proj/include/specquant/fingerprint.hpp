#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace specquant {

/// 64-bit FNV-1a over raw bytes; used to tie datasets and models to the
/// library and basis they were built from.
class Fingerprint {
 public:
  Fingerprint& add_bytes(const void* data, std::size_t size);
  Fingerprint& add(std::string_view text);
  Fingerprint& add(double value);
  Fingerprint& add(std::uint64_t value);
  Fingerprint& add(std::span<const double> values);

  std::uint64_t value() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace specquant
