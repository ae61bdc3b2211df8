#pragma once

#include <optional>

namespace specquant {

/// Thread count used by the OpenMP kernels. Results never depend on it.
void set_thread_count(int threads);
int thread_count();

/// `--threads` value if given, else SPECQUANT_THREADS, else all cores.
int resolve_thread_count(std::optional<int> requested);

}  // namespace specquant
