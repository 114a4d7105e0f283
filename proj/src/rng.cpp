#include "anylr/rng.hpp"

#include <cmath>

namespace anylr {

namespace {
constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMult1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}
}  // namespace

Philox::Philox(std::uint64_t seed) : key_{seed, 0}, counter_{0, 0, 0, 0} {}

Philox::Philox(const std::array<std::uint64_t, 2>& key,
               const std::array<std::uint64_t, 4>& counter)
    : key_(key), counter_(counter) {}

void Philox::fill_block() {
  // counter moves first, so the initial block is produced at counter + 1
  if (++counter_[0] == 0)
    if (++counter_[1] == 0)
      if (++counter_[2] == 0) ++counter_[3];

  std::uint64_t c0 = counter_[0], c1 = counter_[1];
  std::uint64_t c2 = counter_[2], c3 = counter_[3];
  std::uint64_t k0 = key_[0], k1 = key_[1];
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMult0, c0, hi0, lo0);
    mulhilo(kMult1, c2, hi1, lo1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
  }
  block_ = {c0, c1, c2, c3};
  idx_ = 0;
}

std::uint64_t Philox::next_u64() {
  if (idx_ >= 4) fill_block();
  return block_[idx_++];
}

double Philox::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double GaussianStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = gen_.next_double();
  double u2 = gen_.next_double();
  double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  double angle = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

}  // namespace anylr
