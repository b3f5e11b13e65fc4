#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace subnet {

// Deterministic random stream used everywhere randomness is needed.
//
// Engine: std::mt19937_64 (stream fixed by the C++ standard). The
// distribution transforms are implemented here instead of relying on
// std::uniform_real_distribution / std::normal_distribution, whose output
// sequences are implementation-defined. With a fixed engine and fixed
// transforms, every draw is reproducible from the seed alone:
//   uniform():  (next_u64() >> 11) * 2^-53            in [0, 1)
//   gaussian(): Box-Muller, z = sqrt(-2 ln(1-u1)) * cos(2*pi*u2),
//               one z per call (the sine companion is discarded).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian();

  // Fisher-Yates, top-down, using bounded draws from this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = bounded(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Unbiased draw in [0, n) by rejection.
  std::uint64_t bounded(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// Derives independent sub-stream seeds from a base seed (splitmix64 over
// base ^ golden-ratio*stream). Used so that e.g. data generation and weight
// init driven by one user seed do not share a stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace subnet
