#include <catch2/catch_amalgamated.hpp>

#include "emodep/pipeline/run.hpp"
#include "test_util.hpp"

using namespace emodep;
using Catch::Approx;

TEST_CASE("pipeline config round-trips through JSON") {
  pipeline::PipelineConfig cfg;
  cfg.seed = 99;
  cfg.margin = 4.5;
  cfg.pretrain_modes = {"mosei"};
  cfg.dep_seeds = 7;
  cfg.extract_source = "mosei";
  cfg.frontend.mean_normalize = true;
  cfg.jobs = 3;

  auto j = pipeline::config_to_json(cfg);
  auto back = pipeline::config_from_json(j);
  CHECK(back.seed == 99);
  CHECK(back.margin == Approx(4.5));
  CHECK(back.pretrain_modes == std::vector<std::string>{"mosei"});
  CHECK(back.dep_seeds == 7);
  CHECK(back.frontend.mean_normalize);
  CHECK_FALSE(back.frontend.pre_emphasis);
  CHECK(back.jobs == 3);

  // unknown keys are ignored, absent keys keep defaults
  auto partial = pipeline::config_from_json({{"seed", 5}});
  CHECK(partial.seed == 5);
  CHECK(partial.dep_seeds == pipeline::PipelineConfig{}.dep_seeds);
}

TEST_CASE("a failing stage aborts with the stage name attached") {
  TempDir tmp("pipe");
  pipeline::PipelineConfig cfg;
  cfg.out_dir = tmp.str("run");
  cfg.seed = 3;
  // no pretraining at all: the extract stage cannot find its checkpoint
  cfg.pretrain_modes = {};
  cfg.dep_train_sessions_per_group = 2;
  cfg.dep_dev_sessions_per_group = 2;
  cfg.dep_segments_min = 2;
  cfg.dep_segments_max = 3;
  cfg.clip_seconds_min = 0.22;
  cfg.clip_seconds_max = 0.26;

  try {
    pipeline::run_pipeline(cfg);
    FAIL("expected a staged error");
  } catch (const Error& e) {
    CHECK(e.code() == "missing_file");
    CHECK(std::string(e.what()).find("stage extract") != std::string::npos);
  }
}
