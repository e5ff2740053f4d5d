// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmm_world.hpp"
#include "guidance.hpp"
#include "nn.hpp"
#include "schedule.hpp"
#include "sprites.hpp"

namespace guidelab {

enum class WorldKind { Gmm, Sprites };
enum class GmmPreset { Bright, Planar, Custom };

/// Everything a run needs. Serializes to the flat key = value text format;
/// the serialized form re-parses to an identical config.
struct ExperimentConfig {
  WorldKind world = WorldKind::Gmm;

  int steps = 200;
  double beta_start = 5e-4;
  double beta_end = 0.1;
  VarianceKind variance_kind = VarianceKind::Posterior;

  double scale = 0.04;
  GuidanceVariant variant = GuidanceVariant::Normalized;
  AdamPlacement adam_placement = AdamPlacement::BeforeNormalize;
  int target_class = 0;
  int chains = 64;
  std::vector<int> cells = {0, 1, 2, 3, 4, 5, 6, 7};
  int cell = 0;  // single-cell runs (sample, sweep)
  std::vector<double> sweep_scales = {0.0, 0.01, 0.04, 0.16, 0.64};
  std::vector<int> snapshot_steps;
  std::uint64_t seed = 1;
  int repeats = 1;
  int fid_samples = 64;
  std::uint64_t reference_seed = 99;

  std::string out_dir = "out";
  bool plots = true;
  bool timing = false;

  GmmPreset gmm_preset = GmmPreset::Bright;
  BrightWorldParams bright;
  double planar_radius = 3.0;
  double planar_variance = 0.15;
  std::vector<double> gmm_priors;
  std::vector<std::vector<double>> gmm_means;
  std::vector<std::vector<std::vector<double>>> gmm_covariances;
  std::vector<int> gmm_labels;

  SpriteConfig sprite;
  int data_count = 4000;
  std::string data_file = "sprites.bin";
  std::string classifier_clean_file = "classifier_clean.bin";
  std::string classifier_noisy_file = "classifier_noisy.bin";
  std::string denoiser_file = "denoiser.bin";
  TrainConfig classifier_train;
  TrainConfig denoiser_train;
};

ExperimentConfig default_config();

/// Applies one key = value setting; unknown keys and malformed values are
/// Config errors.
void apply_setting(ExperimentConfig& cfg, const std::string& key,
                   const std::string& value);

/// Parses a whole config text on top of the defaults. `#` starts a comment;
/// a value may span lines while brackets are open.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_text(const ExperimentConfig& cfg);

/// Range and consistency checks shared by every entry point.
void validate(const ExperimentConfig& cfg);

NoiseSchedule make_schedule(const ExperimentConfig& cfg);
ClassGmm make_gmm(const ExperimentConfig& cfg);

/// Resolves an artifact path against out_dir unless it is absolute.
std::string artifact_path(const ExperimentConfig& cfg, const std::string& file);

}  // namespace guidelab
