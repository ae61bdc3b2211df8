#include "specquant/fingerprint.hpp"

#include <bit>
#include <cstdio>

namespace specquant {

Fingerprint& Fingerprint::add_bytes(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state_ ^= bytes[i];
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

Fingerprint& Fingerprint::add(std::string_view text) {
  add(static_cast<std::uint64_t>(text.size()));
  return add_bytes(text.data(), text.size());
}

Fingerprint& Fingerprint::add(double value) {
  const auto bits = std::bit_cast<std::uint64_t>(value);
  return add(bits);
}

Fingerprint& Fingerprint::add(std::uint64_t value) {
  unsigned char le[8];
  for (int b = 0; b < 8; ++b) le[b] = static_cast<unsigned char>(value >> (8 * b));
  return add_bytes(le, 8);
}

Fingerprint& Fingerprint::add(std::span<const double> values) {
  add(static_cast<std::uint64_t>(values.size()));
  for (double v : values) add(v);
  return *this;
}

std::string Fingerprint::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

}  // namespace specquant
