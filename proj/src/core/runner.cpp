// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "svg.hpp"

namespace guidelab {
namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

fs::path prepare_out_dir(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    fail(ErrorCode::Io, "cannot create output directory " + cfg.out_dir);
  return dir;
}

void require_file(const std::string& path, const char* what) {
  if (!fs::exists(path))
    fail(ErrorCode::Precondition,
         std::string(what) + " not found at " + path + " (run the producing subcommand first)");
}

class GmmWorld final : public World {
 public:
  explicit GmmWorld(const ExperimentConfig& cfg)
      : World(make_schedule(cfg)),
        gmm_(make_gmm(cfg)),
        denoiser_(gmm_, sched_),
        robust_(gmm_, ClassifierKind::Robust, sched_),
        nonrobust_(gmm_, ClassifierKind::NonRobust, sched_) {
    if (cfg.target_class >= gmm_.num_classes())
      fail(ErrorCode::Config, "target_class: out of range for this world");
    std::mt19937_64 rng(cfg.reference_seed);
    reference_ = sample_class(gmm_, cfg.fid_samples, cfg.target_class, rng);
  }
  const Denoiser& denoiser() const override { return denoiser_; }
  const Classifier& classifier(bool robust) const override {
    return robust ? static_cast<const Classifier&>(robust_) : nonrobust_;
  }
  const Classifier& judge() const override { return nonrobust_; }

 private:
  ClassGmm gmm_;
  GmmDenoiser denoiser_;
  GmmClassifier robust_;
  GmmClassifier nonrobust_;
};

class SpriteWorld final : public World {
 public:
  explicit SpriteWorld(const ExperimentConfig& cfg)
      : World(make_schedule(cfg)),
        den_net_(load_checked(artifact_path(cfg, cfg.denoiser_file), "denoiser")),
        clean_net_(load_checked(artifact_path(cfg, cfg.classifier_clean_file), "clean classifier")),
        noisy_net_(load_checked(artifact_path(cfg, cfg.classifier_noisy_file), "noisy classifier")),
        denoiser_(den_net_, sched_),
        clean_(clean_net_, sched_),
        noisy_(noisy_net_, sched_) {
    const int d = sprite_dim(cfg.sprite);
    if (den_net_.input_dim() != d || clean_net_.input_dim() != d ||
        noisy_net_.input_dim() != d)
      fail(ErrorCode::Precondition, "model dimensions do not match sprite_size");
    if (cfg.target_class >= kSpriteClasses)
      fail(ErrorCode::Config, "target_class: out of range for this world");
    // Held-out target-class images from an independent stream.
    SpriteConfig ref_cfg = cfg.sprite;
    ref_cfg.seed = cfg.reference_seed;
    const auto ds = generate_sprites(ref_cfg, cfg.fid_samples * kSpriteClasses * 3);
    reference_.resize(d, cfg.fid_samples);
    int found = 0;
    for (std::size_t i = 0; i < ds.data.y.size() && found < cfg.fid_samples; ++i)
      if (ds.data.y[i] == cfg.target_class)
        reference_.col(found++) = ds.data.x.col(static_cast<Eigen::Index>(i));
    if (found < cfg.fid_samples) fail(ErrorCode::Internal, "reference set too small");
  }
  const Denoiser& denoiser() const override { return denoiser_; }
  const Classifier& classifier(bool robust) const override {
    return robust ? noisy_ : clean_;
  }
  const Classifier& judge() const override { return clean_; }

 private:
  static Mlp load_checked(const std::string& path, const char* what) {
    require_file(path, what);
    return load_mlp(path);
  }

  Mlp den_net_, clean_net_, noisy_net_;
  MlpDenoiser denoiser_;
  MlpClassifier clean_;
  MlpClassifier noisy_;
};

std::string metrics_csv(const std::vector<CellResult>& cells) {
  std::string out = "cell,classifier,x0pred,adam,fid,accuracy,seed,wall_ms\n";
  for (const auto& c : cells)
    out += c.spec.name + "," + (c.spec.robust ? "robust" : "nonrobust") + "," +
           (c.spec.x0_pred ? "1" : "0") + "," + (c.spec.adam ? "1" : "0") + "," +
           fmt(c.fid) + "," + fmt(c.accuracy) + "," + std::to_string(c.seed) + "," +
           std::to_string(c.wall_ms) + "\n";
  return out;
}

std::string cell_file_stem(const CellResult& c, int repeats) {
  return repeats > 1 ? c.spec.name + "_r" + std::to_string(c.repeat) : c.spec.name;
}

void write_manifest(const fs::path& dir, const ExperimentConfig& cfg,
                    const std::string& command, const std::string& status,
                    const std::vector<std::string>& files,
                    const std::vector<std::pair<std::string, std::uint64_t>>& seeds,
                    long total_ms) {
  std::string out = "# guidelab run manifest\n";
  out += "# command = " + command + "\n";
  out += "# status = " + status + "\n";
  if (cfg.timing) out += "# wall_ms = " + std::to_string(total_ms) + "\n";
  for (const auto& [name, seed] : seeds)
    out += "# seed " + name + " = " + std::to_string(seed) + "\n";
  for (const auto& f : files) out += "# file = " + f + "\n";
  out += config_to_text(cfg);
  write_text(dir / "manifest.cfg", out);
}

long elapsed_ms(std::chrono::steady_clock::time_point start) {
  return static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - start)
                               .count());
}

}  // namespace

std::unique_ptr<World> World::load(const ExperimentConfig& cfg) {
  validate(cfg);
  if (cfg.world == WorldKind::Gmm) return std::make_unique<GmmWorld>(cfg);
  return std::make_unique<SpriteWorld>(cfg);
}

CellSpec cell_spec(int index) {
  if (index < 0 || index > 7) fail(ErrorCode::InvalidArgument, "cell index is 0..7");
  CellSpec c;
  c.index = index;
  c.robust = index < 4;
  c.x0_pred = (index & 2) != 0;
  c.adam = (index & 1) != 0;
  static const char* mods[] = {"plain", "adam", "x0pred", "both"};
  c.name = std::string(c.robust ? "robust_" : "nonrobust_") + mods[index & 3];
  return c;
}

GuidanceConfig guidance_for(const ExperimentConfig& cfg, const CellSpec& cell,
                            double scale) {
  GuidanceConfig g;
  g.scale = scale;
  g.variant = cfg.variant;
  g.use_x0_pred = cell.x0_pred;
  g.use_adam = cell.adam;
  g.adam_placement = cfg.adam_placement;
  g.target_class = cfg.target_class;
  g.num_chains = cfg.chains;
  g.snapshot_steps = cfg.snapshot_steps;
  return g;
}

CellResult run_cell(const World& world, const ExperimentConfig& cfg, int cell,
                    double scale, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  CellResult r;
  r.spec = cell_spec(cell);
  r.scale = scale;
  r.seed = seed;
  auto out = sample_guided(world.denoiser(), world.classifier(r.spec.robust),
                           guidance_for(cfg, r.spec, scale), world.schedule(), seed);
  r.cosine = cosine_series(out.trace);
  out.trace.cond.clear();
  r.trace = std::move(out.trace);
  r.samples = std::move(out.x);
  r.fid = frechet_distance(world.reference(), r.samples);
  r.accuracy = guidance_accuracy(r.samples, cfg.target_class, world.judge());
  r.wall_ms = cfg.timing ? elapsed_ms(start) : 0;
  return r;
}

std::string cosine_csv(const CosineSeries& cosine) {
  std::string out = "t,mean,std,n_valid\n";
  for (const auto& p : cosine.points)
    out += std::to_string(p.t) + "," + fmt(p.mean) + "," + fmt(p.std) + "," +
           std::to_string(p.n_valid) + "\n";
  return out;
}

std::string trace_csv(const SamplerTrace& tr, const CosineSeries& cosine) {
  std::string out = "chain,t,cond_norm,grad_norm,logp_target,cos_prev\n";
  for (int j = 0; j < tr.chains; ++j) {
    for (std::size_t k = 0; k < tr.steps.size(); ++k) {
      const double cp = k == 0 ? std::nan("")
                               : cosine.values(static_cast<Eigen::Index>(k - 1), j);
      out += std::to_string(j) + "," + std::to_string(tr.steps[k]) + "," +
             fmt(tr.cond_norm[k][j]) + "," + fmt(tr.grad_norm[k][j]) + "," +
             fmt(tr.logp_target[k][j]) + "," + fmt(cp) + "\n";
    }
  }
  return out;
}

std::vector<CellResult> run_grid(const ExperimentConfig& cfg, bool write) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto world = World::load(cfg);
  fs::path dir;
  if (write) dir = prepare_out_dir(cfg);
  std::vector<CellResult> results;
  std::vector<std::string> files;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  for (int rep = 0; rep < cfg.repeats; ++rep) {
    for (int cell : cfg.cells) {
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(cell) +
                                 8ull * static_cast<std::uint64_t>(rep);
      const std::string name = cell_spec(cell).name;
      try {
        results.push_back(run_cell(*world, cfg, cell, cfg.scale, seed));
      } catch (const Error& e) {
        if (write)
          write_manifest(dir, cfg, "grid", "incomplete (failed cell " + name + ")",
                         files, seeds, elapsed_ms(start));
        fail(e.code(), "cell " + name + ": " + e.what());
      }
      results.back().repeat = rep;
      seeds.emplace_back(cell_file_stem(results.back(), cfg.repeats), seed);
      if (!write) continue;
      const std::string stem = cell_file_stem(results.back(), cfg.repeats);
      write_text(dir / ("trace_" + stem + ".csv"),
                 trace_csv(results.back().trace, results.back().cosine));
      write_text(dir / ("cosine_" + stem + ".csv"), cosine_csv(results.back().cosine));
      files.push_back("trace_" + stem + ".csv");
      files.push_back("cosine_" + stem + ".csv");
      if (cfg.plots) {
        write_text(dir / ("cosine_" + stem + ".svg"),
                   cosine_plot_svg({{stem, &results.back().cosine}}, "cosine similarity, " + stem));
        files.push_back("cosine_" + stem + ".svg");
      }
    }
  }
  if (write) {
    write_text(dir / "metrics.csv", metrics_csv(results));
    files.insert(files.begin(), "metrics.csv");
    if (cfg.plots) {
      std::vector<PlotSeries> all;
      for (const auto& r : results)
        if (r.repeat == 0) all.push_back({r.spec.name, &r.cosine});
      write_text(dir / "cosine_all.svg", cosine_plot_svg(all, "cosine similarity per cell"));
      files.push_back("cosine_all.svg");
    }
    write_manifest(dir, cfg, "grid", "complete", files, seeds, elapsed_ms(start));
  }
  return results;
}

std::vector<SweepRow> run_scale_sweep(const ExperimentConfig& cfg,
                                      std::vector<double> scales, bool write) {
  validate(cfg);
  if (scales.size() < 2)
    fail(ErrorCode::InvalidArgument, "sweep needs at least two scale values");
  for (double s : scales)
    if (!(s >= 0.0)) fail(ErrorCode::InvalidArgument, "sweep scales must be >= 0");
  std::sort(scales.begin(), scales.end());
  const auto start = std::chrono::steady_clock::now();
  const auto world = World::load(cfg);
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(cfg.cell);
  std::vector<SweepRow> rows;
  for (double s : scales) {
    const CellResult r = run_cell(*world, cfg, cfg.cell, s, seed);
    rows.push_back({s, r.fid, r.accuracy, seed});
  }
  if (write) {
    const fs::path dir = prepare_out_dir(cfg);
    std::string out = "scale,fid,accuracy,seed\n";
    for (const auto& r : rows)
      out += fmt(r.scale) + "," + fmt(r.fid) + "," + fmt(r.accuracy) + "," +
             std::to_string(r.seed) + "\n";
    write_text(dir / "sweep.csv", out);
    ExperimentConfig echo = cfg;
    echo.sweep_scales = scales;
    write_manifest(dir, echo, "sweep", "complete", {"sweep.csv"},
                   {{cell_spec(cfg.cell).name, seed}}, elapsed_ms(start));
  }
  return rows;
}

CellResult run_sample(const ExperimentConfig& cfg, bool write) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto world = World::load(cfg);
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(cfg.cell);
  CellResult r = run_cell(*world, cfg, cfg.cell, cfg.scale, seed);
  if (write) {
    const fs::path dir = prepare_out_dir(cfg);
    std::string out = "chain";
    for (Eigen::Index i = 0; i < r.samples.rows(); ++i) out += ",x" + std::to_string(i);
    out += "\n";
    for (Eigen::Index j = 0; j < r.samples.cols(); ++j) {
      out += std::to_string(j);
      for (Eigen::Index i = 0; i < r.samples.rows(); ++i) out += "," + fmt(r.samples(i, j));
      out += "\n";
    }
    write_text(dir / "samples.csv", out);
    write_text(dir / "trace.csv", trace_csv(r.trace, r.cosine));
    write_text(dir / "cosine.csv", cosine_csv(r.cosine));
    write_manifest(dir, cfg, "sample", "complete",
                   {"samples.csv", "trace.csv", "cosine.csv"},
                   {{r.spec.name, seed}}, elapsed_ms(start));
  }
  return r;
}

void generate_data(const ExperimentConfig& cfg) {
  validate(cfg);
  const fs::path dir = prepare_out_dir(cfg);
  if (cfg.world == WorldKind::Sprites) {
    save_dataset(artifact_path(cfg, cfg.data_file), generate_sprites(cfg.sprite, cfg.data_count));
    write_manifest(dir, cfg, "gen-data", "complete", {cfg.data_file}, {}, 0);
    return;
  }
  const ClassGmm gmm = make_gmm(cfg);
  std::mt19937_64 rng(cfg.seed);
  const LabeledPoints pts = sample_data(gmm, cfg.data_count, rng);
  std::string out = "y";
  for (int i = 0; i < gmm.dim(); ++i) out += ",x" + std::to_string(i);
  out += "\n";
  for (Eigen::Index j = 0; j < pts.x.cols(); ++j) {
    out += std::to_string(pts.y[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < pts.x.rows(); ++i) out += "," + fmt(pts.x(i, j));
    out += "\n";
  }
  write_text(dir / "gmm_data.csv", out);
  write_manifest(dir, cfg, "gen-data", "complete", {"gmm_data.csv"}, {}, 0);
}

namespace {

SpriteDataset load_training_set(const ExperimentConfig& cfg) {
  if (cfg.world != WorldKind::Sprites)
    fail(ErrorCode::Precondition,
         "training applies to the sprite world; the gmm world uses exact models");
  const std::string path = artifact_path(cfg, cfg.data_file);
  require_file(path, "dataset");
  return load_dataset(path);
}

std::string report_rows(const char* kind, const TrainReport& r) {
  std::string out;
  for (std::size_t e = 0; e < r.epoch_loss.size(); ++e)
    out += std::string(kind) + "," + std::to_string(e + 1) + "," + fmt(r.epoch_loss[e]) + "," +
           (e < r.val_accuracy.size() ? fmt(r.val_accuracy[e]) : "") + "\n";
  return out;
}

}  // namespace

ClassifierPair train_classifiers(const ExperimentConfig& cfg) {
  validate(cfg);
  const SpriteDataset ds = load_training_set(cfg);
  const NoiseSchedule sched = make_schedule(cfg);
  TrainConfig tc = cfg.classifier_train;
  tc.noisy_training = false;
  tc.time_conditioning = false;  // clean inputs carry no noise level
  TrainedMlp clean = train_classifier(ds.data, tc, sched);
  tc.noisy_training = true;
  tc.time_conditioning = cfg.classifier_train.time_conditioning;
  ClassifierPair out{std::move(clean), train_classifier(ds.data, tc, sched)};
  const fs::path dir = prepare_out_dir(cfg);
  save_mlp(out.clean.net, artifact_path(cfg, cfg.classifier_clean_file));
  save_mlp(out.noisy.net, artifact_path(cfg, cfg.classifier_noisy_file));
  write_text(dir / "train_classifier.csv", "kind,epoch,loss,val_accuracy\n" +
                                               report_rows("clean", out.clean.report) +
                                               report_rows("noisy", out.noisy.report));
  return out;
}

TrainedMlp train_sprite_denoiser(const ExperimentConfig& cfg) {
  validate(cfg);
  const SpriteDataset ds = load_training_set(cfg);
  TrainedMlp out = train_denoiser(ds.data.x, cfg.denoiser_train, make_schedule(cfg));
  const fs::path dir = prepare_out_dir(cfg);
  save_mlp(out.net, artifact_path(cfg, cfg.denoiser_file));
  write_text(dir / "train_denoiser.csv",
             "kind,epoch,loss,val_accuracy\n" + report_rows("denoiser", out.report));
  return out;
}

double noised_accuracy(const Mlp& net, const LabeledPoints& data,
                       const NoiseSchedule& sched, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_t(1, sched.steps());
  std::normal_distribution<double> n01;
  Mat xt(data.x.rows(), data.x.cols());
  std::vector<int> ts(static_cast<std::size_t>(data.x.cols()));
  for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
    const int t = pick_t(rng);
    ts[static_cast<std::size_t>(j)] = t;
    const double ab = sched.alpha_bar(t);
    for (Eigen::Index i = 0; i < data.x.rows(); ++i)
      xt(i, j) = std::sqrt(ab) * data.x(i, j) + std::sqrt(1.0 - ab) * n01(rng);
  }
  if (!net.time_conditioning()) return classifier_accuracy(net, xt, data.y, nullptr);
  const Mat tf = time_features(sched, ts);
  return classifier_accuracy(net, xt, data.y, &tf);
}

}  // namespace guidelab
