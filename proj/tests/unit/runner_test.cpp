// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "runner.hpp"

namespace guidelab {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

class RunnerTest : public ::testing::Test {
 protected:
  fs::path root = fs::temp_directory_path() / "guidelab_runner_test";
  ExperimentConfig cfg = default_config();

  void SetUp() override {
    fs::remove_all(root);
    cfg.gmm_preset = GmmPreset::Planar;
    cfg.steps = 30;
    cfg.beta_start = 3e-3;
    cfg.beta_end = 0.6;
    cfg.chains = 16;
    cfg.fid_samples = 16;
    cfg.out_dir = (root / "a").string();
  }
  void TearDown() override { fs::remove_all(root); }
};

TEST_F(RunnerTest, CellIndexEncodesFlags) {
  for (int i = 0; i < 8; ++i) {
    const CellSpec c = cell_spec(i);
    EXPECT_EQ(c.index, i);
    EXPECT_EQ(c.robust, i < 4);
    EXPECT_EQ(c.x0_pred, (i & 2) != 0);
    EXPECT_EQ(c.adam, (i & 1) != 0);
  }
  EXPECT_EQ(cell_spec(0).name, "robust_plain");
  EXPECT_EQ(cell_spec(7).name, "nonrobust_both");
  EXPECT_THROW(cell_spec(8), Error);
}

TEST_F(RunnerTest, GridWritesDeterministicOutputs) {
  cfg.cells = {0, 5};
  const auto rows = run_grid(cfg);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].seed, cfg.seed);
  EXPECT_EQ(rows[1].seed, cfg.seed + 5);
  const fs::path a = cfg.out_dir;
  const std::string metrics = slurp(a / "metrics.csv");
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')),
            "cell,classifier,x0pred,adam,fid,accuracy,seed,wall_ms");
  for (const char* f : {"manifest.cfg", "trace_robust_plain.csv", "cosine_nonrobust_adam.csv",
                        "cosine_nonrobust_adam.svg", "cosine_all.svg"})
    EXPECT_TRUE(fs::exists(a / f)) << f;

  // Re-running from the manifest alone reproduces every file.
  ExperimentConfig again = parse_config(slurp(a / "manifest.cfg"));
  again.out_dir = (root / "b").string();
  run_grid(again);
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    if (name == "manifest.cfg") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(root / "b" / name)) << name;
  }
}

TEST_F(RunnerTest, ManifestListsEveryFile) {
  cfg.cells = {2};
  run_grid(cfg);
  const std::string manifest = slurp(fs::path(cfg.out_dir) / "manifest.cfg");
  EXPECT_NE(manifest.find("# status = complete"), std::string::npos);
  for (const auto& entry : fs::directory_iterator(cfg.out_dir)) {
    const auto name = entry.path().filename().string();
    if (name != "manifest.cfg")
      EXPECT_NE(manifest.find("# file = " + name), std::string::npos) << name;
  }
}

TEST_F(RunnerTest, ZeroScaleIsUnguided) {
  cfg.cells = {0};
  cfg.scale = 0.0;
  cfg.chains = 400;
  const auto rows = run_grid(cfg, false);
  EXPECT_NEAR(rows[0].accuracy, 0.25, 0.08);
}

TEST_F(RunnerTest, SweepIsSortedAndNeedsTwoScales) {
  const auto rows = run_scale_sweep(cfg, {0.5, 0.0, 0.1});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].scale, 0.0);
  EXPECT_EQ(rows[2].scale, 0.5);
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "sweep.csv"));
  EXPECT_EQ(code_of([&] { run_scale_sweep(cfg, {0.1}); }), ErrorCode::InvalidArgument);
}

TEST_F(RunnerTest, SampleWritesSamplesAndTrace) {
  cfg.cell = 3;
  const CellResult r = run_sample(cfg);
  EXPECT_EQ(r.spec.index, 3);
  EXPECT_EQ(r.samples.cols(), cfg.chains);
  for (const char* f : {"samples.csv", "trace.csv", "cosine.csv"})
    EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / f)) << f;
}

TEST_F(RunnerTest, TimingSwitch) {
  cfg.cells = {0};
  EXPECT_EQ(run_grid(cfg, false)[0].wall_ms, 0);
}

TEST_F(RunnerTest, SpriteWorldNeedsArtifacts) {
  cfg.world = WorldKind::Sprites;
  EXPECT_EQ(code_of([&] { run_grid(cfg, false); }), ErrorCode::Precondition);
  EXPECT_EQ(code_of([&] { train_classifiers(cfg); }), ErrorCode::Precondition);
}

TEST_F(RunnerTest, TrainingNeedsTheSpriteWorld) {
  EXPECT_EQ(code_of([&] { train_classifiers(cfg); }), ErrorCode::Precondition);
  EXPECT_EQ(code_of([&] { train_sprite_denoiser(cfg); }), ErrorCode::Precondition);
}

TEST_F(RunnerTest, TinySpritePipeline) {
  cfg.world = WorldKind::Sprites;
  cfg.steps = 20;
  cfg.sprite.image_size = 8;
  cfg.data_count = 200;
  cfg.chains = 8;
  cfg.fid_samples = 8;
  cfg.cells = {0, 4};
  cfg.classifier_train.epochs = 2;
  cfg.classifier_train.hidden = {16};
  cfg.denoiser_train.epochs = 2;
  cfg.denoiser_train.hidden = {32};
  generate_data(cfg);
  const ClassifierPair pair = train_classifiers(cfg);
  EXPECT_FALSE(pair.clean.net.time_conditioning());
  const TrainedMlp den = train_sprite_denoiser(cfg);
  EXPECT_TRUE(den.net.residual());
  const auto rows = run_grid(cfg);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_GE(r.accuracy, 0.0);
    EXPECT_LE(r.accuracy, 1.0);
  }
  for (const char* f : {"sprites.bin", "classifier_clean.bin", "classifier_noisy.bin",
                        "denoiser.bin", "train_classifier.csv", "train_denoiser.csv"})
    EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / f)) << f;
}

}  // namespace
}  // namespace guidelab
