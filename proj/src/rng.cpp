#include "ttclab/rng.hpp"

#include <cmath>

namespace ttclab {

namespace {

inline std::uint64_t splitmix_fin(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  x = splitmix_fin(x);
  x ^= b;
  return splitmix_fin(x);
}

RngStream::RngStream(std::uint64_t seed) : key_(seed) {
  // Expand the key into xoshiro state with splitmix64 (the recommended seeding).
  std::uint64_t sm = seed;
  for (auto& w : s_) {
    sm += 0x9e3779b97f4a7c15ULL;
    w = splitmix_fin(sm);
  }
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  // Marsaglia polar, one deviate per accepted pair (the spare is discarded so
  // draw accounting stays trivial). Uses only log/sqrt from libm.
  while (true) {
    const double u = 2.0 * uniform01() - 1.0;
    const double v = 2.0 * uniform01() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

Vec RngStream::normal_vec(Eigen::Index n) {
  Vec out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = normal();
  return out;
}

}  // namespace ttclab
