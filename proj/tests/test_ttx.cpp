#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>

#include "doctest.h"
#include "ttclab/ttx.hpp"

using namespace ttclab;

namespace {

const WorldSpec& world() {
  static const WorldSpec w = make_default_world();
  return w;
}

NoiseSchedule standard() { return make_rf_schedule({1.0, 0.75, 0.5, 0.25}); }

bool records_equal(const RolloutRecord& a, const RolloutRecord& b) {
  if (a.frames.size() != b.frames.size()) return false;
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    if ((a.frames[i] - b.frames[i]).cwiseAbs().maxCoeff() != 0.0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("ttx: chunk reward conventions") {
  RewardSpec r;
  r.reference = Vec(2);
  r.reference << 1.0, 0.0;
  Vec c(2);
  c << 0.0, 1.0;

  r.kind = RewardKind::Reconstruction;
  CHECK(r.evaluate(c) == -2.0);
  CHECK(r.evaluate(r.reference) == 0.0);

  r.kind = RewardKind::DriftPenalty;
  CHECK(r.evaluate(c) == doctest::Approx(-std::sqrt(2.0)));

  r.kind = RewardKind::Semantic;
  CHECK_THROWS_AS(r.evaluate(c), std::invalid_argument);  // needs an encoder
  r.encoder = FrameEncoder::identity(2);
  CHECK(r.evaluate(c) == doctest::Approx(0.0));  // orthogonal
  Vec aligned(2);
  aligned << 2.0, 0.0;
  CHECK(r.evaluate(aligned) == doctest::Approx(1.0));
  CHECK_THROWS_AS(r.evaluate(Vec::Zero(2).eval()), std::domain_error);  // zero embedding

  r.kind = RewardKind::Reconstruction;
  CHECK_THROWS_AS(r.evaluate(Vec::Zero(3).eval()), std::invalid_argument);

  for (auto k : {RewardKind::Reconstruction, RewardKind::Semantic, RewardKind::DriftPenalty}) {
    CHECK(reward_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(reward_kind_from_string("???"), std::invalid_argument);
}

TEST_CASE("ttx: adapter construction and validation") {
  const AdapterSpec z = AdapterSpec::zero(6, 2);
  CHECK(z.dim() == 6);
  CHECK(z.rank() == 2);
  CHECK(z.is_zero());
  CHECK(z.delta_sq_norm() == 0.0);
  CHECK_NOTHROW(z.validate());
  CHECK_THROWS_AS(AdapterSpec::zero(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(AdapterSpec::zero(4, 0), std::invalid_argument);

  const AdapterSpec s1 = AdapterSpec::seeded(6, 2, 99);
  const AdapterSpec s2 = AdapterSpec::seeded(6, 2, 99);
  CHECK_FALSE(s1.is_zero());
  CHECK(s1.up.isZero(0.0));  // the warm start leaves the output side at zero
  CHECK((s1.down - s2.down).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s1.delta_sq_norm() == s1.down.squaredNorm());

  AdapterSpec bad = z;
  bad.down = Mat::Zero(2, 5);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = z;
  bad.step_size = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = z;
  bad.proximal_weight = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("ttx: zero adapter is an exact passthrough, nonzero applies the residual") {
  const DenoiserPtr inner = make_exact_denoiser();
  RngStream rng(11);
  const ConditionalPrior p = conditional_prior(world(), rng.normal_vec(32));
  const Vec x = rng.normal_vec(32);
  const Vec u = inner->predict(p, x, 0.5);

  const DenoiserPtr passthrough = make_adapted_denoiser(inner, AdapterSpec::zero(32, 2));
  CHECK((passthrough->predict(p, x, 0.5) - u).cwiseAbs().maxCoeff() == 0.0);

  AdapterSpec a = AdapterSpec::seeded(32, 2, 5);
  a.up = Mat::Constant(32, 2, 0.01);
  const DenoiserPtr adapted = make_adapted_denoiser(inner, a);
  const Vec expect = u + a.up * (a.down * u);
  CHECK((adapted->predict(p, x, 0.5) - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ttx: best-of-1 continues the caller's stream bit for bit") {
  const ExactDenoiser den;
  ChunkContext ctx(3);
  const NoiseSchedule sched = standard();
  const ChunkGenerator gen = [&](ChunkRng& r) {
    return generate_chunk_stochastic(den, world(), ctx, sched, r);
  };

  ChunkRng plain{RngStream(64)};
  const GeneratedChunk direct = generate_chunk_stochastic(den, world(), ctx, sched, plain);

  ChunkRng selrng{RngStream(64)};
  const SelectionOutcome sel = best_of_n(gen, [](const Vec&) { return 0.0; }, 1, selrng);
  CHECK(sel.winner == 0);
  REQUIRE(sel.rewards.size() == 1);
  CHECK((sel.generated.chunk - direct.chunk).cwiseAbs().maxCoeff() == 0.0);
  CHECK(selrng.draws() == plain.draws());
}

TEST_CASE("ttx: best-of-n keeps every candidate's calls and breaks ties low") {
  const ExactDenoiser den;
  ChunkContext ctx(3);
  const NoiseSchedule sched = standard();
  const ChunkGenerator gen = [&](ChunkRng& r) {
    return generate_chunk_stochastic(den, world(), ctx, sched, r);
  };

  // Constant reward: everything ties, candidate 0 wins, its chunk is kept.
  ChunkRng tie_rng{RngStream(64)};
  const SelectionOutcome tie = best_of_n(gen, [](const Vec&) { return 1.0; }, 4, tie_rng);
  CHECK(tie.winner == 0);
  CHECK(tie.rewards.size() == 4);
  CHECK(tie.generated.traces.size() == 16);  // all candidates' calls are kept
  CHECK(tie.generated.nfe() == 16);
  ChunkRng plain{RngStream(64)};
  const GeneratedChunk direct = generate_chunk_stochastic(den, world(), ctx, sched, plain);
  CHECK((tie.generated.chunk - direct.chunk).cwiseAbs().maxCoeff() == 0.0);

  // A real reward picks the argmax.
  RewardSpec reward;
  reward.kind = RewardKind::DriftPenalty;
  reward.reference = Vec::Constant(32, 25.0);  // far away, so candidates genuinely differ
  ChunkRng sel_rng{RngStream(64)};
  const SelectionOutcome sel = best_of_n(
      gen, [&](const Vec& c) { return reward.evaluate(c); }, 4, sel_rng);
  for (double r : sel.rewards) CHECK(sel.rewards[static_cast<std::size_t>(sel.winner)] >= r);

  ChunkRng bad{RngStream(1)};
  CHECK_THROWS_AS(best_of_n(gen, [](const Vec&) { return 0.0; }, 0, bad),
                  std::invalid_argument);
}

TEST_CASE("ttx: search-over-path with one candidate is the plain sampler") {
  const ExactDenoiser den;
  ChunkContext ctx(3);
  const NoiseSchedule sched = standard();

  ChunkRng a{RngStream(12)};
  const GeneratedChunk direct = generate_chunk_stochastic(den, world(), ctx, sched, a);
  ChunkRng b{RngStream(12)};
  const SelectionOutcome sel =
      search_over_path(den, world(), ctx, sched, [](const Vec&) { return 0.0; }, 1, b);
  CHECK((sel.generated.chunk - direct.chunk).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sel.generated.traces.size() == 4);
  CHECK(a.draws() == b.draws());
}

TEST_CASE("ttx: search-over-path scores n candidates per level") {
  const ExactDenoiser den;
  ChunkContext ctx(3);
  const NoiseSchedule sched = standard();
  RewardSpec reward;
  reward.kind = RewardKind::DriftPenalty;
  reward.reference = Vec::Constant(32, 25.0);

  ChunkRng rng{RngStream(13)};
  const SelectionOutcome sel = search_over_path(
      den, world(), ctx, sched, [&](const Vec& c) { return reward.evaluate(c); }, 3, rng);
  CHECK(sel.generated.traces.size() == 12);  // 3 candidates at each of 4 levels
  CHECK(sel.rewards.size() == 4);            // winning reward per level
  CHECK(sel.winner >= 0);
  CHECK(sel.winner < 3);

  const NoiseSchedule bad = make_rf_schedule({0.9, 0.5});
  ChunkRng rng2{RngStream(13)};
  CHECK_THROWS_AS(
      search_over_path(den, world(), ctx, bad, [](const Vec&) { return 0.0; }, 2, rng2),
      std::invalid_argument);
}

TEST_CASE("ttx: selection rollout reduces to the plain rollout when idle") {
  const DenoiserPtr den = make_biased_denoiser(make_exact_denoiser(), 1.02, Vec());
  const NoiseSchedule sched = standard();
  const RolloutRecord base = rollout(*den, world(), sched, CorrectionConfig::baseline(), 6, 21);

  const RolloutRecord none = rollout_with_selection(
      *den, world(), sched, TtsMode::None, 1, RewardKind::DriftPenalty, std::nullopt, 6, 21);
  CHECK(records_equal(base, none));

  const RolloutRecord bon1 = rollout_with_selection(
      *den, world(), sched, TtsMode::BestOfN, 1, RewardKind::DriftPenalty, std::nullopt, 6, 21);
  CHECK(records_equal(base, bon1));

  const RolloutRecord sop1 = rollout_with_selection(*den, world(), sched, TtsMode::SearchOverPath,
                                                    1, RewardKind::DriftPenalty, std::nullopt, 6,
                                                    21);
  CHECK(records_equal(base, sop1));
}

TEST_CASE("ttx: selection rollout cost and chunk-0 anchoring") {
  const DenoiserPtr den = make_biased_denoiser(make_exact_denoiser(), 1.02, Vec());
  const NoiseSchedule sched = standard();
  const RolloutRecord base = rollout(*den, world(), sched, CorrectionConfig::baseline(), 6, 21);

  const RolloutRecord bon4 = rollout_with_selection(
      *den, world(), sched, TtsMode::BestOfN, 4, RewardKind::DriftPenalty, std::nullopt, 6, 21);
  CHECK(bon4.total_nfe() == 4 * 4 * 6);
  // Chunk 0 (the reference) matches the plain rollout under the same seed.
  CHECK((bon4.chunks[0] - base.chunks[0]).cwiseAbs().maxCoeff() == 0.0);

  const RolloutRecord sop4 = rollout_with_selection(*den, world(), sched, TtsMode::SearchOverPath,
                                                    4, RewardKind::DriftPenalty, std::nullopt, 6,
                                                    21);
  CHECK(sop4.total_nfe() == 4 * 4 * 6);
  CHECK((sop4.chunks[0] - base.chunks[0]).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(rollout_with_selection(*den, world(), sched, TtsMode::BestOfN, 2,
                                         RewardKind::Semantic, std::nullopt, 4, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(rollout_with_selection(*den, world(), sched, TtsMode::BestOfN, 0,
                                         RewardKind::DriftPenalty, std::nullopt, 4, 1),
                  std::invalid_argument);

  for (auto m : {TtsMode::None, TtsMode::BestOfN, TtsMode::SearchOverPath}) {
    CHECK(tts_mode_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(tts_mode_from_string("???"), std::invalid_argument);
}

TEST_CASE("ttx: analytic adapter gradient is restricted to the affine case") {
  const DenoiserPtr inner = make_exact_denoiser();
  ChunkContext ctx(3);
  ctx.push(Vec::Ones(32));
  RewardSpec reward;
  reward.kind = RewardKind::Reconstruction;
  reward.reference = Vec::Zero(32);
  const AdapterSpec adapter = AdapterSpec::seeded(32, 2, 1);

  CHECK_THROWS_AS(tto_reward_gradient(inner, adapter, reward, world(), ctx,
                                      make_rf_schedule({1.0, 0.5}), RngStream(2), true),
                  std::invalid_argument);
  RewardSpec drift = reward;
  drift.kind = RewardKind::DriftPenalty;
  CHECK_THROWS_AS(tto_reward_gradient(inner, adapter, drift, world(), ctx,
                                      make_rf_schedule({1.0}), RngStream(2), true),
                  std::invalid_argument);
}

TEST_CASE("ttx: adapter fine-tuning climbs the reconstruction reward") {
  const DenoiserPtr inner = make_exact_denoiser();
  const NoiseSchedule sched = make_rf_schedule({1.0});
  RngStream setup(404);
  ChunkContext ctx(3);
  ctx.push(setup.normal_vec(32));
  RewardSpec reward;
  reward.kind = RewardKind::Reconstruction;
  reward.reference = setup.normal_vec(32);

  AdapterSpec adapter = AdapterSpec::seeded(32, 2, 808);
  adapter.steps = 60;
  adapter.step_size = 2e-3;
  const TtoResult res = tto_finetune(inner, adapter, reward, world(), ctx, sched, RngStream(909));
  REQUIRE(res.reward_trace.size() == 60);
  CHECK(res.reward_trace.back() > res.reward_trace.front());
  CHECK_FALSE(res.adapter.up.isZero(0.0));  // ascent moved the output-side delta
}

TEST_CASE("ttx: finite-difference fine-tuning climbs a non-quadratic reward") {
  // Drift-penalty reward at a single level: deterministic objective, but not
  // the affine reconstruction case, so the central-difference path runs.
  const DenoiserPtr inner = make_exact_denoiser();
  const WorldSpec w = make_default_world(2, 2);  // chunk dim 4 keeps FD cheap
  const NoiseSchedule sched = make_rf_schedule({1.0});
  RngStream setup(77);
  ChunkContext ctx(3);
  ctx.push(setup.normal_vec(4));
  RewardSpec reward;
  reward.kind = RewardKind::DriftPenalty;
  reward.reference = setup.normal_vec(4);

  AdapterSpec adapter = AdapterSpec::seeded(4, 1, 313);
  adapter.steps = 50;
  adapter.step_size = 1e-2;
  const TtoResult res = tto_finetune(inner, adapter, reward, w, ctx, sched, RngStream(31));
  REQUIRE(res.reward_trace.size() == 50);
  CHECK(res.reward_trace.back() > res.reward_trace.front());
}

TEST_CASE("ttx: the all-zero adapter is a stationary point of the ascent") {
  const DenoiserPtr inner = make_exact_denoiser();
  const NoiseSchedule sched = make_rf_schedule({1.0});
  ChunkContext ctx(3);
  ctx.push(Vec::Ones(32));
  RewardSpec reward;
  reward.kind = RewardKind::Reconstruction;
  reward.reference = Vec::Zero(32);

  AdapterSpec adapter = AdapterSpec::zero(32, 2);
  adapter.steps = 10;
  adapter.step_size = 1e-3;
  const TtoResult res = tto_finetune(inner, adapter, reward, world(), ctx, sched, RngStream(5));
  CHECK(res.adapter.is_zero());
  for (double r : res.reward_trace) CHECK(r == res.reward_trace.front());
}

TEST_CASE("ttx: a heavy proximal penalty pulls the deltas toward zero") {
  const DenoiserPtr inner = make_exact_denoiser();
  const NoiseSchedule sched = make_rf_schedule({1.0});
  RngStream setup(21);
  ChunkContext ctx(3);
  ctx.push(setup.normal_vec(32));
  RewardSpec reward;
  reward.kind = RewardKind::Reconstruction;
  reward.reference = setup.normal_vec(32);

  AdapterSpec adapter = AdapterSpec::seeded(32, 2, 7070);
  adapter.steps = 50;
  adapter.step_size = 1e-3;
  adapter.proximal_weight = 100.0;
  const double before = adapter.delta_sq_norm();
  REQUIRE(before > 0.0);
  const TtoResult res = tto_finetune(inner, adapter, reward, world(), ctx, sched, RngStream(6));
  CHECK(res.adapter.delta_sq_norm() < 0.05 * before);
}
