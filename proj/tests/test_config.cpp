#include <string>
#include <vector>

#include "doctest.h"
#include "ttclab/config.hpp"

using namespace ttclab;

namespace {

/// Parses `text` expecting a ConfigError; returns its reported line (-1 when
/// no error was raised).
int error_line(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("config: every preset validates and round-trips canonically") {
  const std::vector<std::string> names = preset_names();
  REQUIRE(names.size() == 8);
  for (const std::string& name : names) {
    CAPTURE(name);
    const Scenario s = preset_scenario(name);
    CHECK_NOTHROW(s.validate());
    const std::string text = serialize_scenario(s);
    const Scenario back = parse_scenario(text);
    CHECK(serialize_scenario(back) == text);
    CHECK(scenario_hash(back) == scenario_hash(s));
    CHECK(scenario_hash_hex(s).size() == 16);
  }
  CHECK_THROWS_AS(preset_scenario("nope"), ConfigError);
}

TEST_CASE("config: canonical hashes are stable") {
  // Frozen regression anchors: any change to the canonical serialization or
  // to a preset's settings must be deliberate and show up here.
  CHECK(scenario_hash_hex(preset_scenario("baseline")) == "8136039b27f81ba1");
  CHECK(scenario_hash_hex(parse_scenario("")) == "0543d30513e7c580");
}

TEST_CASE("config: empty text yields the default scenario") {
  const Scenario s = parse_scenario("");
  CHECK(s.name == "unnamed");
  CHECK(s.schedule_levels == std::vector<double>{1.0, 0.75, 0.5, 0.25});
  CHECK(s.world.frame_dim == 8);
  CHECK(s.world.frames_per_chunk == 4);
  CHECK(s.drift_gain == 1.0);
  CHECK(s.correction.mode == CorrectionMode::Baseline);
  CHECK(s.tts_mode == TtsMode::None);
  CHECK_FALSE(s.tto_enabled);
  CHECK(s.n_chunks == 30);
  CHECK(s.n_seeds == 200);
  CHECK(s.window == 3);
}

TEST_CASE("config: representative scenario file") {
  const std::string text = R"(# a small drifting world with one corrected level
name = rep
schedule = [1.0, 0.75, 0.5, 0.25]

[world]
frame_dim = 2
frames_per_chunk = 3
transition = 0.8
offset = 0
process_var = [1, 1, 1, 2, 2, 2]
init = stationary

[drift]
gain = 1.05

[correction]
mode = path-wise
levels = [0.5]

[metrics]
encoder = identity
stride = 2

[run]
n_chunks = 4
n_seeds = 3
)";
  const Scenario s = parse_scenario(text);
  CHECK(s.name == "rep");
  CHECK(s.world.frame_dim == 2);
  CHECK(s.world.frames_per_chunk == 3);
  REQUIRE(s.world.chunk_dim() == 6);

  // Scalar transition broadcasts onto the diagonal.
  CHECK(s.world.transition(0, 0) == 0.8);
  CHECK(s.world.transition(0, 1) == 0.0);
  CHECK(s.world.offset.isZero(0.0));
  CHECK(s.world.process_var[0] == 1.0);
  CHECK(s.world.process_var[5] == 2.0);

  // init = stationary derives the chunk-0 law from the chain itself.
  CHECK(s.world.init_mean.isZero(0.0));
  CHECK(s.world.init_var[0] == 1.0 / (1.0 - 0.8 * 0.8));
  CHECK(s.world.init_var[5] == 2.0 / (1.0 - 0.8 * 0.8));
  CHECK(s.world.stationary);

  CHECK(s.drift_gain == 1.05);
  CHECK(s.correction.mode == CorrectionMode::PathWise);
  CHECK(s.correction.levels == std::vector<double>{0.5});
  CHECK(s.metrics.encoder == EncoderKind::Identity);
  CHECK(s.metrics.stride == 2);
  CHECK(s.metrics.embed_dim == 8);  // untouched default
  CHECK(s.n_chunks == 4);
  CHECK(s.n_seeds == 3);
  CHECK(s.window == 3);

  // The canonical form freezes the derived init moments as explicit values.
  const std::string canon = serialize_scenario(s);
  const Scenario back = parse_scenario(canon);
  CHECK(serialize_scenario(back) == canon);
  CHECK(scenario_hash(back) == scenario_hash(s));
}

TEST_CASE("config: quoted names strip their quotes") {
  CHECK(parse_scenario("name = \"ok-name\"\n").name == "ok-name");
}

TEST_CASE("config: parse errors report the offending line") {
  CHECK(error_line("[world]\nnope = 3\n") == 2);                 // unknown key
  CHECK(error_line("[nope]\nx = 1\n") == 1);                     // unknown section
  CHECK(error_line("[world]\nframe_dim = 2\nframe_dim = 3\n") == 3);  // duplicate key
  CHECK(error_line("[drift]\ngain = abc\n") == 2);               // malformed number
  CHECK(error_line("[world]\nframe_dim 2\n") == 2);              // missing '='
  CHECK(error_line("schedule = [1.0, [0.75]\n") == 1);           // unbalanced brackets
  CHECK(error_line("[drift]\nbias = [1.0, 2.0]\n") == 2);        // wrong-size list
  CHECK(error_line("[correction]\nmode = warp\n") == 2);         // unknown enum value
  CHECK(error_line("[tto]\nenabled = yes\n") == 2);              // malformed bool
  CHECK(error_line("[world\nframe_dim = 2\n") == 1);             // malformed header
  CHECK(error_line("[world]\ninit = stationary\ninit_mean = 0.5\n") == 3);
  CHECK(error_line("[world]\nframe_dim = 1\nframes_per_chunk = 1\nmixture_offsets = [[1.0]]\n") ==
        4);
}

TEST_CASE("config: scenario-level conflicts are rejected") {
  // Candidate selection needs the plain sampler: no correction, no tuning.
  CHECK_THROWS_AS(
      parse_scenario("[correction]\nmode = path-wise\nlevels = [0.5]\n\n"
                     "[tts]\nmode = best-of-n\nn = 4\n"),
      ConfigError);
  CHECK_THROWS_AS(parse_scenario("[tts]\nmode = best-of-n\nn = 4\n\n[tto]\nenabled = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario("[tts]\nn = 4\n"), ConfigError);

  CHECK_THROWS_AS(parse_scenario("[run]\nn_chunks = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("schedule = [0.25, 0.5]\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("name = \"two words\"\n"), ConfigError);

  // Corrected level must be a schedule member below the top.
  CHECK_THROWS_AS(parse_scenario("[correction]\nmode = path-wise\nlevels = [0.6]\n"), ConfigError);
}

TEST_CASE("config: mixture worlds parse and round-trip") {
  const std::string text = R"(name = mix
[world]
frame_dim = 1
frames_per_chunk = 2
mixture_offsets = [[1.0, 1.0], [-1.0, -1.0]]
mixture_weights = [0.5, 0.5]
[run]
n_chunks = 20
)";
  const Scenario s = parse_scenario(text);
  REQUIRE(s.world.mixture_offsets.size() == 2);
  CHECK(s.world.mixture_offsets[0][0] == 1.0);
  CHECK(s.world.mixture_offsets[1][1] == -1.0);
  CHECK(s.world.mixture_weights == std::vector<double>{0.5, 0.5});

  const std::string canon = serialize_scenario(s);
  const Scenario back = parse_scenario(canon);
  CHECK(back.world.mixture_offsets.size() == 2);
  CHECK(serialize_scenario(back) == canon);
}

TEST_CASE("config: contractive = 0 admits an expansive chain") {
  const Scenario s = parse_scenario(
      "[world]\ntransition = 1.05\ncontractive = 0\ninit_mean = 0\ninit_var = 1\n");
  CHECK_FALSE(s.world.stationary);
  CHECK(s.world.transition(0, 0) == 1.05);

  // The same chain with the contractive promise kept is rejected.
  CHECK_THROWS_AS(parse_scenario("[world]\ntransition = 1.05\n"), ConfigError);
}

TEST_CASE("config: build_denoiser honors the drift wrapper") {
  const Scenario plain = parse_scenario("");
  const Scenario drifting = parse_scenario("[drift]\ngain = 1.02\n");
  const DenoiserPtr a = plain.build_denoiser();
  const DenoiserPtr b = drifting.build_denoiser();
  REQUIRE(a != nullptr);
  REQUIRE(b != nullptr);
  const ConditionalPrior prior = plain.world.init_prior();
  const Vec x = Vec::Constant(plain.world.chunk_dim(), 1.0);
  const Vec ua = a->predict(prior, x, 0.5);
  const Vec ub = b->predict(prior, x, 0.5);
  CHECK((ub - 1.02 * ua).cwiseAbs().maxCoeff() < 1e-12);
}
