/*
 * Copyright 2026 The tilebin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support/test_utils.hpp"
#include "tilebin/error.hpp"
#include "tilebin/pipeline.hpp"

namespace tilebin {
namespace {

namespace fs = std::filesystem;

PipelineConfig planted_config(const std::vector<std::string>& categories,
                              ScorerType scorer = ScorerType::kStat) {
  PipelineConfig cfg;
  for (const auto& name : categories) {
    CategoryConfig c;
    c.category = name;
    c.window = 64;
    c.model_resolution = 64;
    c.scorer.type = scorer;
    c.refine_mode = RefineMode::kTopConfidence;
    c.mebin.pick = MebinPick::kMidpoint;
    cfg.categories.push_back(c);
  }
  return cfg;
}

std::string tree_digest(const fs::path& root) {
  std::vector<FileDigest> kept;
  for (auto& d : digest_files(root))
    if (!d.relative_path.starts_with("reports/")) kept.push_back(d);
  return combine_digests(kept);
}

class PipelineTest : public ::testing::Test {
 protected:
  testing::TempDir in{"pipe_in"};
  testing::TempDir out{"pipe_out"};
  std::ostringstream log;

  RunOptions options(int workers = 1, bool train = false) {
    RunOptions o;
    o.input = in.path();
    o.output = out.path();
    o.workers = workers;
    o.train = train;
    o.seed = 11;
    o.log = &log;
    o.segmenter = std::make_shared<NullSegmenter>();
    return o;
  }
};

TEST(Stage, Names) {
  for (auto s : {Stage::kTile, Stage::kAugment, Stage::kScore, Stage::kMerge, Stage::kBinarize,
                 Stage::kRefine, Stage::kEval}) {
    EXPECT_EQ(parse_stage(to_string(s)), s);
  }
  EXPECT_FALSE(parse_stage("all").has_value());
  EXPECT_FALSE(parse_stage("bogus").has_value());
}

TEST_F(PipelineTest, EmptyInputDirectoryGivesZeroImages) {
  fs::create_directories(in.path() / "empty" / "test");
  const StageReport r = run_stage(Stage::kTile, planted_config({"empty"}), options());
  ASSERT_EQ(r.categories.size(), 1U);
  EXPECT_EQ(r.categories[0].images, 0U);
  EXPECT_EQ(r.categories[0].items, 0U);
  EXPECT_TRUE(fs::exists(out.path() / "reports" / "test.tile.json"));
}

TEST_F(PipelineTest, MissingInputRootIsPrecondition) {
  RunOptions o = options();
  o.input = in.path() / "nope";
  EXPECT_THROW(run_stage(Stage::kTile, planted_config({"a"}), o), PreconditionError);
}

TEST_F(PipelineTest, DownstreamWithoutUpstreamIsPrecondition) {
  testing::write_planted_category(in.path(), "a", 100, 90, 2, 2, 1);
  const auto cfg = planted_config({"a"}, ScorerType::kIntensity);
  EXPECT_THROW(run_stage(Stage::kMerge, cfg, options()), PreconditionError);
  run_stage(Stage::kTile, cfg, options());
  EXPECT_THROW(run_stage(Stage::kMerge, cfg, options()), PreconditionError);
  EXPECT_THROW(run_stage(Stage::kEval, cfg, options()), PreconditionError);
  // stat scorer needs a fitted model
  EXPECT_THROW(run_stage(Stage::kScore, planted_config({"a"}), options()), PreconditionError);
}

TEST_F(PipelineTest, TamperedArtifactIsDetected) {
  testing::write_planted_category(in.path(), "a", 100, 90, 2, 2, 1);
  const auto cfg = planted_config({"a"}, ScorerType::kIntensity);
  run_stage(Stage::kTile, cfg, options());
  run_stage(Stage::kScore, cfg, options());
  const fs::path victim = out.path() / "a" / "test" / "maps" / tile_map_filename("test_0", 0, 0);
  AnomalyMap m = read_amap(victim);
  m.at(0, 0) += 1.0F;
  write_amap(victim, m);
  try {
    run_stage(Stage::kMerge, cfg, options());
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("test_0__r0_c0"), std::string::npos) << e.what();
  }
  fs::remove(victim);
  EXPECT_THROW(run_stage(Stage::kMerge, cfg, options()), PreconditionError);
}

TEST_F(PipelineTest, ConstantMapsBinarizeToEmptyMasks) {
  fs::create_directories(in.path() / "flat" / "test");
  write_png(in.path() / "flat" / "test" / "x.png", ImageBuffer(70, 50, 1, 128));
  const auto cfg = planted_config({"flat"}, ScorerType::kIntensity);
  for (Stage s : {Stage::kTile, Stage::kScore, Stage::kMerge, Stage::kBinarize}) run_stage(s, cfg, options());
  EXPECT_TRUE(read_mask_png(out.path() / "flat" / "test" / "masks" / "coarse" / "x.png").empty_mask());
  std::ifstream side(out.path() / "flat" / "test" / "masks" / "binarize.jsonl");
  std::string line;
  std::getline(side, line);
  EXPECT_NE(line.find("\"superset\":true"), std::string::npos) << line;
}

TEST_F(PipelineTest, PlantedRunRecoversDefects) {
  testing::write_planted_category(in.path(), "a", 160, 140, 6, 8, 5);
  const Summary s = run_all(planted_config({"a"}), options(2, true));
  ASSERT_EQ(s.rows.size(), 1U);
  ASSERT_TRUE(s.rows[0].seg_f1.has_value());
  EXPECT_GE(*s.rows[0].seg_f1, 0.95);
  EXPECT_GE(*s.rows[0].f1_max, *s.rows[0].seg_f1 - 1e-12);
  EXPECT_TRUE(s.rows[0].class_f1.has_value());
  EXPECT_TRUE(s.rows[0].aupro.has_value());
  EXPECT_EQ(s.rows[0].images, 8U);
  EXPECT_EQ(read_summary(out.path()).rows[0].seg_f1, s.rows[0].seg_f1);
  EXPECT_NE(format_summary(s).find("SegF1"), std::string::npos);
}

TEST_F(PipelineTest, TwoCategoriesAndMeanRow) {
  testing::write_planted_category(in.path(), "a", 120, 120, 4, 4, 2);
  testing::write_planted_category(in.path(), "b", 90, 130, 4, 4, 3);
  const Summary s = run_all(planted_config({"a", "b"}), options(3, true));
  ASSERT_EQ(s.rows.size(), 2U);
  EXPECT_EQ(s.rows[0].category, "a");
  EXPECT_EQ(s.rows[1].category, "b");
  EXPECT_NEAR(*s.mean.seg_f1, (*s.rows[0].seg_f1 + *s.rows[1].seg_f1) / 2.0, 1e-12);
  EXPECT_EQ(s.mean.images, 8U);
}

TEST_F(PipelineTest, MissingEndpointFallsBackToNullSegmenter) {
  testing::write_planted_category(in.path(), "a", 100, 100, 3, 2, 4);
  RunOptions o = options(1, true);
  o.segmenter.reset();
  ::unsetenv(kSegmenterEnv);
  run_all(planted_config({"a"}), o);
  EXPECT_NE(log.str().find("null segmenter"), std::string::npos) << log.str();
}

TEST_F(PipelineTest, SocketSegmenterFromEnvironment) {
  testing::write_planted_category(in.path(), "a", 100, 100, 3, 2, 4);
  testing::LineServer server([](const std::string& l) { return testing::echo_handler(l, 100, 100); });
  RunOptions o = options(1, true);
  o.segmenter.reset();
  ::setenv(kSegmenterEnv, server.endpoint().c_str(), 1);
  run_all(planted_config({"a"}), o);
  ::unsetenv(kSegmenterEnv);
  EXPECT_GT(server.requests(), 0);
}

TEST_F(PipelineTest, DeterministicAcrossWorkersAndReruns) {
  testing::write_planted_category(in.path(), "a", 150, 110, 4, 4, 6);
  const auto cfg = planted_config({"a"});
  run_all(cfg, options(1, true));
  const std::string first = tree_digest(out.path());
  run_all(cfg, options(1, true));
  EXPECT_EQ(tree_digest(out.path()), first);
  fs::remove_all(out.path());
  run_all(cfg, options(4, true));
  EXPECT_EQ(tree_digest(out.path()), first);
}

TEST_F(PipelineTest, RunAllMatchesManualStages) {
  testing::write_planted_category(in.path(), "a", 100, 120, 3, 3, 7);
  const auto cfg = planted_config({"a"});
  run_all(cfg, options(2, true));
  const std::string all = tree_digest(out.path());
  fs::remove_all(out.path());
  for (Stage s : {Stage::kTile, Stage::kAugment, Stage::kScore}) run_stage(s, cfg, options(1, true));
  for (Stage s : {Stage::kTile, Stage::kScore, Stage::kMerge, Stage::kBinarize, Stage::kRefine, Stage::kEval})
    run_stage(s, cfg, options(1, false));
  EXPECT_EQ(tree_digest(out.path()), all);
}

TEST_F(PipelineTest, ChainDigestCoversUpstream) {
  testing::write_planted_category(in.path(), "a", 100, 100, 3, 2, 8);
  const auto cfg = planted_config({"a"}, ScorerType::kIntensity);
  run_stage(Stage::kTile, cfg, options());
  const auto s1 = run_stage(Stage::kScore, cfg, options());
  const auto s2 = run_stage(Stage::kScore, cfg, options());
  EXPECT_EQ(s1.chain_digest, s2.chain_digest);
  RunOptions other = options();
  CategoryConfig c = cfg.categories[0];
  c.window = 48;
  c.model_resolution = 48;
  run_stage(Stage::kTile, PipelineConfig{{c}}, other);
  const auto s3 = run_stage(Stage::kScore, PipelineConfig{{c}}, other);
  EXPECT_NE(s3.chain_digest, s1.chain_digest);
}

}  // namespace
}  // namespace tilebin
