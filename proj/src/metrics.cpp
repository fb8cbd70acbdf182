#include "ttclab/metrics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ttclab/rng.hpp"

namespace ttclab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sample_std(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}
}  // namespace

const char* to_string(EncoderKind kind) {
  return kind == EncoderKind::Identity ? "identity" : "fixed-nonlinear";
}

EncoderKind encoder_kind_from_string(const std::string& s) {
  if (s == "identity") return EncoderKind::Identity;
  if (s == "fixed-nonlinear") return EncoderKind::FixedNonlinear;
  throw std::invalid_argument("metrics: unknown encoder kind '" + s + "'");
}

FrameEncoder FrameEncoder::identity(int dim) {
  if (dim <= 0) throw std::invalid_argument("encoder: dim must be positive");
  return FrameEncoder(EncoderKind::Identity, dim, dim);
}

FrameEncoder FrameEncoder::fixed_nonlinear(int input_dim, int embed_dim, std::uint64_t seed) {
  if (input_dim <= 0 || embed_dim <= 0) {
    throw std::invalid_argument("encoder: dims must be positive");
  }
  FrameEncoder e(EncoderKind::FixedNonlinear, input_dim, embed_dim);
  const int hidden = 2 * std::max(input_dim, embed_dim);
  RngStream rng(seed);
  e.w1_ = Mat(hidden, input_dim);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (int i = 0; i < hidden; ++i) {
    for (int j = 0; j < input_dim; ++j) e.w1_(i, j) = s1 * rng.normal();
  }
  e.w2_ = Mat(embed_dim, hidden);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (int i = 0; i < embed_dim; ++i) {
    for (int j = 0; j < hidden; ++j) e.w2_(i, j) = s2 * rng.normal();
  }
  return e;
}

Vec FrameEncoder::encode(const Vec& frame) const {
  if (frame.size() != input_dim_) throw std::invalid_argument("encoder: frame dim mismatch");
  if (kind_ == EncoderKind::Identity) return frame;
  return w2_ * (w1_ * frame).array().tanh().matrix();
}

Mat FrameEncoder::jacobian(const Vec& frame) const {
  if (frame.size() != input_dim_) throw std::invalid_argument("encoder: frame dim mismatch");
  if (kind_ == EncoderKind::Identity) return Mat::Identity(input_dim_, input_dim_);
  const Vec h = (w1_ * frame).array().tanh().matrix();
  // d tanh(u)/du = 1 - tanh(u)^2, applied row-wise to w1.
  return w2_ * (1.0 - h.array().square()).matrix().asDiagonal() * w1_;
}

const char* to_string(FrameDistance d) {
  switch (d) {
    case FrameDistance::L2: return "l2";
    case FrameDistance::Cosine: return "cosine";
    case FrameDistance::EncoderL2: return "encoder";
  }
  return "?";
}

FrameDistance frame_distance_from_string(const std::string& s) {
  if (s == "l2") return FrameDistance::L2;
  if (s == "cosine") return FrameDistance::Cosine;
  if (s == "encoder") return FrameDistance::EncoderL2;
  throw std::invalid_argument("metrics: unknown distance '" + s + "'");
}

double frame_distance(const Vec& a, const Vec& b, FrameDistance kind,
                      const FrameEncoder* encoder) {
  if (a.size() != b.size()) throw std::invalid_argument("frame_distance: size mismatch");
  switch (kind) {
    case FrameDistance::L2:
      return (a - b).norm();
    case FrameDistance::Cosine: {
      const double na = a.norm(), nb = b.norm();
      if (na == 0.0 && nb == 0.0) return 0.0;
      if (na == 0.0 || nb == 0.0) return 1.0;
      return 1.0 - a.dot(b) / (na * nb);
    }
    case FrameDistance::EncoderL2: {
      if (encoder == nullptr) {
        throw std::invalid_argument("frame_distance: encoder distance needs an encoder");
      }
      return (encoder->encode(a) - encoder->encode(b)).norm();
    }
  }
  throw std::logic_error("frame_distance: unreachable");
}

double boundary_discontinuity(const std::vector<Vec>& frames, const std::vector<int>& boundaries,
                              FrameDistance kind, const FrameEncoder* encoder) {
  if (boundaries.size() < 2) {
    throw std::invalid_argument("boundary_discontinuity: needs at least two chunks");
  }
  double acc = 0.0;
  int pairs = 0;
  for (std::size_t k = 0; k + 1 < boundaries.size(); ++k) {
    const int b = boundaries[k];
    if (b < 0 || b + 1 >= static_cast<int>(frames.size())) {
      throw std::invalid_argument("boundary_discontinuity: boundary index out of range");
    }
    acc += frame_distance(frames[static_cast<std::size_t>(b)],
                          frames[static_cast<std::size_t>(b) + 1], kind, encoder);
    ++pairs;
  }
  return acc / pairs;
}

double logistic_channel(double v) { return 1.0 / (1.0 + std::exp(-v)); }

namespace {
Vec value_histogram(const Vec& frame, int bins, const ChannelMap& channel_map) {
  Vec h = Vec::Zero(bins);
  for (Eigen::Index i = 0; i < frame.size(); ++i) {
    const double v = channel_map(frame[i]);
    if (!(v >= 0.0) || v >= 1.0) {
      throw std::domain_error("histogram_shift: channel map must land in [0, 1)");
    }
    const int b = std::min(bins - 1, static_cast<int>(v * bins));
    h[b] += 1.0;
  }
  h /= h.sum();
  return h;
}
}  // namespace

HistogramShift histogram_shift(const Vec& frame_first, const Vec& frame_last, int bins,
                               const ChannelMap& channel_map) {
  if (bins <= 0) throw std::invalid_argument("histogram_shift: bins must be positive");
  if (frame_first.size() == 0 || frame_last.size() == 0) {
    throw std::invalid_argument("histogram_shift: empty frame");
  }
  const Vec h1 = value_histogram(frame_first, bins, channel_map);
  const Vec h2 = value_histogram(frame_last, bins, channel_map);

  HistogramShift out;
  out.l1 = (h1 - h2).lpNorm<1>();

  const double m1 = h1.mean(), m2 = h2.mean();
  const Vec c1 = h1.array() - m1, c2 = h2.array() - m2;
  const double v1 = c1.squaredNorm(), v2 = c2.squaredNorm();
  if (v1 == 0.0 || v2 == 0.0) {
    out.pearson = (out.l1 == 0.0) ? 1.0 : 0.0;
  } else {
    out.pearson = c1.dot(c2) / std::sqrt(v1 * v2);
  }
  return out;
}

EmbeddingDrift embedding_drift(const std::vector<Vec>& frames, const FrameEncoder& encoder) {
  if (frames.empty()) throw std::invalid_argument("embedding_drift: no frames");
  EmbeddingDrift out;
  out.d_trace.reserve(frames.size());
  Vec z_first;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    Vec z = encoder.encode(frames[t]);
    const double n = z.norm();
    if (n == 0.0) throw std::domain_error("embedding_drift: zero-norm embedding");
    z /= n;
    if (t == 0) z_first = z;
    out.d_trace.push_back(1.0 - z.dot(z_first));
  }
  out.std = sample_std(out.d_trace);
  out.diff = std::abs(out.d_trace.back() - out.d_trace.front());
  return out;
}

double density_score(const Vec& frame, const FrameEncoder& encoder, double eps_clamp) {
  if (!(eps_clamp > 0.0)) throw std::invalid_argument("density_score: eps_clamp must be > 0");
  const Mat j = encoder.jacobian(frame);
  const Eigen::JacobiSVD<Mat> svd(j);
  const Vec sv = svd.singularValues();
  double score = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) score += std::log(std::max(sv[i], eps_clamp));
  return score;
}

double dynamic_degree(const std::vector<Vec>& frames, int stride, FrameDistance kind,
                      const FrameEncoder* encoder) {
  if (stride <= 0) throw std::invalid_argument("dynamic_degree: stride must be positive");
  if (static_cast<int>(frames.size()) <= stride) {
    throw std::invalid_argument("dynamic_degree: needs more than stride frames");
  }
  double acc = 0.0;
  int n = 0;
  for (std::size_t t = 0; t + static_cast<std::size_t>(stride) < frames.size(); ++t) {
    acc += frame_distance(frames[t], frames[t + static_cast<std::size_t>(stride)], kind, encoder);
    ++n;
  }
  return acc / n;
}

DriftReport compute_drift_report(const RolloutRecord& record, const MetricsConfig& config) {
  if (record.frames.empty()) throw std::invalid_argument("drift report: empty rollout");
  const FrameEncoder enc =
      config.encoder == EncoderKind::Identity
          ? FrameEncoder::identity(record.frame_dim)
          : FrameEncoder::fixed_nonlinear(record.frame_dim, config.embed_dim,
                                          config.encoder_seed);
  const FrameEncoder* enc_for_distance =
      config.distance == FrameDistance::EncoderL2 ? &enc : nullptr;

  DriftReport r;
  r.seed = record.seed;
  r.nfe = record.total_nfe();
  r.jepa_std = r.jepa_diff = r.boundary = r.hist_l1 = r.hist_corr = kNaN;
  r.dynamic = r.density_mean = r.density_final = kNaN;

  if (config.embedding) {
    EmbeddingDrift d = embedding_drift(record.frames, enc);
    r.d_trace = std::move(d.d_trace);
    r.jepa_std = d.std;
    r.jepa_diff = d.diff;
  }
  if (config.boundary) {
    r.boundary =
        boundary_discontinuity(record.frames, record.boundaries, config.distance, enc_for_distance);
  }
  if (config.histogram) {
    const HistogramShift h =
        histogram_shift(record.frames.front(), record.frames.back(), config.bins);
    r.hist_l1 = h.l1;
    r.hist_corr = h.pearson;
  }
  if (config.dynamic) {
    r.dynamic = dynamic_degree(record.frames, config.stride, config.distance, enc_for_distance);
  }
  if (config.density) {
    r.density_trace.reserve(record.frames.size());
    double acc = 0.0;
    for (const Vec& f : record.frames) {
      r.density_trace.push_back(density_score(f, enc));
      acc += r.density_trace.back();
    }
    r.density_mean = acc / static_cast<double>(r.density_trace.size());
    r.density_final = r.density_trace.back();
  }
  return r;
}

}  // namespace ttclab
