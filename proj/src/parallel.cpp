#include "specquant/parallel.hpp"

#include "specquant/error.hpp"

#include <omp.h>

#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>

namespace specquant {

void set_thread_count(int threads) {
  if (threads < 1) {
    throw Error(ErrorCode::kConfiguration, "thread count must be >= 1, got " + std::to_string(threads));
  }
  omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

int resolve_thread_count(std::optional<int> requested) {
  if (requested) return *requested;
  if (const char* env = std::getenv("SPECQUANT_THREADS"); env != nullptr && *env != '\0') {
    std::string_view text(env);
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value < 1) {
      throw Error(ErrorCode::kConfiguration,
                  "SPECQUANT_THREADS must be a positive integer, got '" + std::string(text) + "'");
    }
    return value;
  }
  return omp_get_num_procs();
}

}  // namespace specquant
