#pragma once

#include <cstdint>

#include "ttclab/types.hpp"

namespace ttclab {

/// Mixes two 64-bit words into a well-scrambled key (splitmix64 finalizer,
/// applied twice). Used to derive independent substream seeds from
/// (run seed, chunk index, candidate index, ...) tuples.
std::uint64_t mix_key(std::uint64_t a, std::uint64_t b);

/// Deterministic random stream (xoshiro256++ seeded through splitmix64).
///
/// Streams are keyed: substream(k) derives a child stream from the parent's
/// construction key, independent of how many draws the parent has consumed.
/// All randomness in the lab flows through this class, never through
/// std::random distributions, so that sequences are identical across
/// standard libraries and runs.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  RngStream substream(std::uint64_t key) const { return RngStream(mix_key(key_, key)); }

  std::uint64_t next_u64();
  double uniform01();  // [0, 1), 53-bit resolution
  double normal();     // standard normal, Marsaglia polar method
  Vec normal_vec(Eigen::Index n);

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t s_[4];
};

}  // namespace ttclab
