#pragma once

#include <array>
#include <cstdint>

namespace anylr {

// Philox4x64 with 10 rounds: a counter-mode block generator, so per-seed
// streams are independent by construction and trajectories replay
// bit-for-bit on any platform. Conventions match numpy.random.Philox:
// key = {seed, 0}, the 256-bit counter is incremented (word 0 first, with
// carry) before each block of four outputs.
class Philox {
 public:
  explicit Philox(std::uint64_t seed);
  Philox(const std::array<std::uint64_t, 2>& key,
         const std::array<std::uint64_t, 4>& counter);

  std::uint64_t next_u64();
  // top 53 bits mapped to [0, 1)
  double next_double();

 private:
  void fill_block();

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_;
  std::array<std::uint64_t, 4> block_{};
  int idx_ = 4;  // empty buffer
};

// Standard normals from consecutive Philox doubles via Box-Muller:
//   r = sqrt(-2 ln(1 - u1)),  z = r cos(2 pi u2), then r sin(2 pi u2).
// (1 - u1) keeps the log argument positive since u1 can be exactly 0.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

  double next();

 private:
  Philox gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace anylr
