#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ttclab/context.hpp"
#include "ttclab/types.hpp"

namespace ttclab {

enum class EncoderKind { Identity, FixedNonlinear };

const char* to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(const std::string& s);

/// Frozen frame embedding. Identity, or a fixed random two-layer map
/// w2 * tanh(w1 * frame) whose weights are fully determined by a
/// construction seed (tanh being the odd, saturating nonlinearity). The
/// Jacobian is analytic: w2 * diag(1 - tanh^2) * w1.
class FrameEncoder {
 public:
  static FrameEncoder identity(int dim);
  static FrameEncoder fixed_nonlinear(int input_dim, int embed_dim, std::uint64_t seed);

  Vec encode(const Vec& frame) const;
  Mat jacobian(const Vec& frame) const;

  EncoderKind kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  int embed_dim() const { return embed_dim_; }

 private:
  FrameEncoder(EncoderKind kind, int input_dim, int embed_dim)
      : kind_(kind), input_dim_(input_dim), embed_dim_(embed_dim) {}
  EncoderKind kind_;
  int input_dim_;
  int embed_dim_;
  Mat w1_, w2_;  // unused for identity
};

/// Frame-to-frame distance used by the junction and motion metrics.
enum class FrameDistance { L2, Cosine, EncoderL2 };

const char* to_string(FrameDistance d);
FrameDistance frame_distance_from_string(const std::string& s);

/// Cosine distance convention on degenerate input: 0 when both vectors are
/// zero, 1 when exactly one is.
double frame_distance(const Vec& a, const Vec& b, FrameDistance kind,
                      const FrameEncoder* encoder = nullptr);

/// Mean distance across chunk junctions: pairs (last frame of chunk k,
/// first frame of chunk k+1). boundaries[k] is the index of chunk k's last
/// frame. Requires at least two chunks.
double boundary_discontinuity(const std::vector<Vec>& frames, const std::vector<int>& boundaries,
                              FrameDistance kind = FrameDistance::L2,
                              const FrameEncoder* encoder = nullptr);

struct HistogramShift {
  double l1 = 0.0;       // in [0, 2]
  double pearson = 1.0;  // zero-variance histograms: 1 when equal, else 0
};

using ChannelMap = std::function<double(double)>;

/// Default channel map: logistic squash of a coordinate value onto [0, 1).
double logistic_channel(double v);

/// Value-occupancy shift between the first and last frame: every frame
/// coordinate is squashed onto [0, 1) by channel_map, binned into `bins`
/// equal cells, histograms L1-normalized; reports the L1 distance and the
/// Pearson correlation of the two histograms.
HistogramShift histogram_shift(const Vec& frame_first, const Vec& frame_last, int bins = 180,
                               const ChannelMap& channel_map = logistic_channel);

struct EmbeddingDrift {
  std::vector<double> d_trace;  // d_t = 1 - z_t . z_first, unit-normalized embeddings
  double std = 0.0;             // sample std of d_trace
  double diff = 0.0;            // |d_last - d_first|
};

/// Cosine drift of frame embeddings against the first frame. Throws
/// std::domain_error on a zero-norm embedding.
EmbeddingDrift embedding_drift(const std::vector<Vec>& frames, const FrameEncoder& encoder);

/// Log-volume expansion of the encoder at a frame: sum of log singular
/// values of the Jacobian, each clamped below at eps_clamp. Identity
/// encoder scores exactly 0.
double density_score(const Vec& frame, const FrameEncoder& encoder, double eps_clamp = 1e-12);

/// Mean distance between frames `stride` apart; the motion proxy.
/// Requires more than `stride` frames.
double dynamic_degree(const std::vector<Vec>& frames, int stride = 12,
                      FrameDistance kind = FrameDistance::L2,
                      const FrameEncoder* encoder = nullptr);

/// Metric configuration shared by the report and the harness.
struct MetricsConfig {
  EncoderKind encoder = EncoderKind::FixedNonlinear;
  int embed_dim = 8;
  std::uint64_t encoder_seed = 12345;
  FrameDistance distance = FrameDistance::L2;
  int stride = 12;
  int bins = 180;
  bool embedding = true;
  bool boundary = true;
  bool histogram = true;
  bool dynamic = true;
  bool density = true;
};

/// Flat per-rollout metric record. Disabled metrics stay NaN.
struct DriftReport {
  std::uint64_t seed = 0;
  long long nfe = 0;
  std::vector<double> d_trace;
  double jepa_std = 0.0;
  double jepa_diff = 0.0;
  double boundary = 0.0;
  double hist_l1 = 0.0;
  double hist_corr = 0.0;
  double dynamic = 0.0;
  std::vector<double> density_trace;
  double density_mean = 0.0;
  double density_final = 0.0;
};

DriftReport compute_drift_report(const RolloutRecord& record, const MetricsConfig& config);

}  // namespace ttclab
