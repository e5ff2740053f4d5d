// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "config.hpp"
#include "guidance.hpp"

namespace guidelab {

/// Grid cell index = 4·(non-robust) + 2·(x̂0-prediction) + (ADAM).
struct CellSpec {
  int index = 0;
  bool robust = true;
  bool x0_pred = false;
  bool adam = false;
  std::string name;
};
CellSpec cell_spec(int index);

/// Everything sampling needs for one world: denoiser, both classifiers, the
/// accuracy judge and the FID reference set.
class World {
 public:
  static std::unique_ptr<World> load(const ExperimentConfig& cfg);
  virtual ~World() = default;

  const NoiseSchedule& schedule() const { return sched_; }
  virtual const Denoiser& denoiser() const = 0;
  virtual const Classifier& classifier(bool robust) const = 0;
  virtual const Classifier& judge() const = 0;
  const Mat& reference() const { return reference_; }

 protected:
  explicit World(NoiseSchedule sched) : sched_(std::move(sched)) {}
  NoiseSchedule sched_;
  Mat reference_;
};

struct CellResult {
  CellSpec spec;
  int repeat = 0;
  double scale = 0.0;
  std::uint64_t seed = 0;
  double fid = 0.0;
  double accuracy = 0.0;
  long wall_ms = 0;
  Mat samples;
  SamplerTrace trace;  // conditioning vectors dropped once cosines exist
  CosineSeries cosine;
};

GuidanceConfig guidance_for(const ExperimentConfig& cfg, const CellSpec& cell,
                            double scale);

CellResult run_cell(const World& world, const ExperimentConfig& cfg,
                    int cell, double scale, std::uint64_t seed);

/// Runs every enabled cell; writes metrics.csv, trace and cosine CSVs,
/// optional SVG plots and manifest.cfg to cfg.out_dir when write is set.
std::vector<CellResult> run_grid(const ExperimentConfig& cfg, bool write = true);

struct SweepRow {
  double scale = 0.0;
  double fid = 0.0;
  double accuracy = 0.0;
  std::uint64_t seed = 0;
};

/// Evaluates cfg.cell at each scale with one seed; rows sorted by scale.
std::vector<SweepRow> run_scale_sweep(const ExperimentConfig& cfg,
                                      std::vector<double> scales,
                                      bool write = true);

/// Single cell (cfg.cell at cfg.scale); writes samples.csv and trace.csv.
CellResult run_sample(const ExperimentConfig& cfg, bool write = true);

/// Sprites: writes the dataset file. GMM: writes gmm_data.csv.
void generate_data(const ExperimentConfig& cfg);

struct ClassifierPair {
  TrainedMlp clean;
  TrainedMlp noisy;
};
/// Trains the clean and the noise-robust classifier on the sprite dataset
/// and saves both.
ClassifierPair train_classifiers(const ExperimentConfig& cfg);
TrainedMlp train_sprite_denoiser(const ExperimentConfig& cfg);

/// Accuracy on copies of x noised at uniformly drawn t.
double noised_accuracy(const Mlp& net, const LabeledPoints& data,
                       const NoiseSchedule& sched, std::uint64_t seed);

std::string trace_csv(const SamplerTrace& trace, const CosineSeries& cosine);
std::string cosine_csv(const CosineSeries& cosine);

}  // namespace guidelab
