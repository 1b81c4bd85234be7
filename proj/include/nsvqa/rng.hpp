#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace nsvqa {

/// Default seed when none is given on the command line.
inline constexpr std::uint64_t kDefaultSeed = 20221207;

std::uint64_t fnv1a64(std::string_view text);

/// Independent stream seed for (global seed, key, position). Streams do not
/// depend on scheduling, so parallel generation matches serial generation.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key, std::uint64_t position = 0);

/// mt19937_64 with a portable bounded draw (std distributions are
/// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n); n must be > 0.
  std::size_t uniform_index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace nsvqa
