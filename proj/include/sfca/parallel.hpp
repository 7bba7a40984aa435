#pragma once

#include <cstdint>
#include <string_view>

namespace sfca {

/// Selects between the OpenMP kernel and its serial reference loop.
/// Both produce bit-identical results; the serial path is kept for tests
/// and benchmarks.
enum class Execution { serial, parallel };

/// Caps the OpenMP team size; 0 restores the runtime default.
void set_thread_limit(int threads);
int thread_limit();

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Stable seed derivation from a master seed and a stream index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Stable seed derivation from a master seed and a string key (FNV-1a).
std::uint64_t derive_seed(std::uint64_t master, std::string_view key);

}  // namespace sfca
