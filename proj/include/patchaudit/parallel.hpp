#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace patchaudit {

/// Number of worker threads to use when the caller passes 0.
std::size_t default_thread_count() noexcept;

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = default).
/// Work is claimed dynamically; callers write results into slot i so the
/// outcome never depends on scheduling. The first exception thrown by any
/// body is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

/// SplitMix64 finalizer; the basis of every derived seed in the toolkit.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for stream `index` under `master`: mix64(mix64(master) ^ mix64(index ^ salt)).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t salt = 0) noexcept {
  return mix64(mix64(master) ^ mix64(index ^ (salt * 0xD1B54A32D192ED03ULL)));
}

}  // namespace patchaudit
