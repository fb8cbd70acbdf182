#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ttclab/rng.hpp"
#include "ttclab/types.hpp"

namespace ttclab {

/// Which conditioning a denoiser call saw.
enum class ContextTag { Evolving, Reference, SinkAugmented };

const char* to_string(ContextTag tag);

/// Rolling generation context: a window of the most recent clean chunks
/// (newest last) plus the frozen reference chunk. The reference is set
/// exactly once, by the first push (i.e. right after chunk 0 is produced).
class ChunkContext {
 public:
  explicit ChunkContext(int window_size = 3);

  void push(const Vec& chunk);

  int window_size() const { return window_size_; }
  int size() const { return static_cast<int>(window_.size()); }
  bool empty() const { return window_.empty(); }
  const std::vector<Vec>& window() const { return window_; }
  const Vec& latest() const;

  bool has_reference() const { return reference_.has_value(); }
  const Vec& reference() const;

  std::optional<double> sink_lambda() const { return sink_lambda_; }

  friend ChunkContext sink_augment(const ChunkContext& ctx, double lambda);

 private:
  int window_size_;
  std::vector<Vec> window_;
  std::optional<Vec> reference_;
  std::optional<double> sink_lambda_;
};

/// One denoiser invocation: noise level, conditioning tag, clean prediction,
/// and the indices of the RNG draws that produced the latent it consumed.
/// NFE of a chunk equals the number of trace entries recorded for it.
struct StepTrace {
  double tau = 0.0;
  ContextTag tag = ContextTag::Evolving;
  Vec prediction;
  std::vector<int> noise_ids;
};

/// Output of one chunk generation.
struct GeneratedChunk {
  Vec chunk;
  std::vector<StepTrace> traces;
  int nfe() const { return static_cast<int>(traces.size()); }
};

/// Draw-counting wrapper over an RngStream. Every vector draw gets a
/// sequential index within the stream; the indices recorded in StepTrace
/// refer to this numbering.
class ChunkRng {
 public:
  explicit ChunkRng(RngStream stream) : stream_(std::move(stream)) {}

  std::pair<Vec, int> draw(Eigen::Index n) {
    Vec v = stream_.normal_vec(n);
    return {std::move(v), count_++};
  }

  RngStream& stream() { return stream_; }
  int draws() const { return count_; }

 private:
  RngStream stream_;
  int count_ = 0;
};

/// Full rollout output: clean chunks, the flattened frame sequence, the
/// index of each chunk's last frame, and one StepTrace per denoiser call.
struct RolloutRecord {
  int frame_dim = 0;
  int frames_per_chunk = 0;
  std::uint64_t seed = 0;
  std::vector<Vec> chunks;
  std::vector<Vec> frames;                     // chunk-major
  std::vector<int> boundaries;                 // last frame index per chunk
  std::vector<std::vector<StepTrace>> traces;  // per chunk

  long long total_nfe() const {
    long long n = 0;
    for (const auto& t : traces) n += static_cast<long long>(t.size());
    return n;
  }
};

}  // namespace ttclab
