#pragma once

#include <array>
#include <cstdint>

namespace smilecal {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Stream domains keep Monte Carlo and annealing draws apart for the same seed.
enum class RngDomain : std::uint64_t { montecarlo = 1, annealing = 2, test = 3 };

/// Counter-based stream addressed by (seed, domain, a, b). Draws depend only on the
/// address and the position within the stream, never on which thread asks for them.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, RngDomain domain, std::uint64_t a, std::uint32_t b);

  std::uint32_t next_u32();
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace smilecal
