#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace mfgd {

/// Independent sub-streams derived from one run seed.
enum class Stream : std::uint64_t {
  Dataset = 1,
  Init = 2,
  PopulationEval = 3,
  Probe = 4,
};

struct RngSpec {
  std::uint64_t seed = 0;
  Stream stream = Stream::Dataset;
};

/// Portable generator: std::mt19937_64 seeded with splitmix64(seed, stream).
///
/// The standard library distributions are implementation-defined, so the
/// uniform and normal transforms are spelled out here: uniforms take the top
/// 53 bits of one draw, normals use the Marsaglia polar method (the second
/// variate of each accepted pair is cached). Equal specs give bit-identical
/// streams on every conforming platform.
class Rng {
 public:
  static constexpr std::string_view algorithm_id = "mt19937_64+splitmix64-substreams+polar-normal/v1";

  explicit Rng(RngSpec spec);

  /// Uniform on [0, 1).
  double uniform01();
  double uniform(double lo, double hi);
  /// Standard normal.
  double normal();

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace mfgd
