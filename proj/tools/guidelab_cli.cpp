// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Everything goes through the C interface.

#include <guidelab/guidelab.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

struct ConfigDeleter {
  void operator()(gl_config* c) const { gl_config_free(c); }
};
using ConfigPtr = std::unique_ptr<gl_config, ConfigDeleter>;

class CliError {
 public:
  explicit CliError(std::string msg, bool usage = false)
      : msg_(std::move(msg)), usage_(usage) {}
  const std::string& message() const { return msg_; }
  bool usage() const { return usage_; }

 private:
  std::string msg_;
  bool usage_;
};

void check(gl_status s, const char* what) {
  if (s != GL_OK)
    throw CliError(std::string(what) + ": " + gl_status_name(s) + ": " + gl_last_error());
}

struct Common {
  std::string config;
  std::string out;
  long long seed = -1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("-s,--seed", c.seed, "override the base seed")->check(CLI::NonNegativeNumber);
  sub->add_option("-o,--out", c.out, "override the output directory");
}

ConfigPtr load(const Common& c) {
  gl_config* raw = nullptr;
  const gl_status s = gl_config_load(c.config.c_str(), &raw);
  if (s != GL_OK)
    throw CliError(c.config + ": " + gl_status_name(s) + ": " + gl_last_error(), true);
  ConfigPtr cfg(raw);
  if (c.seed >= 0) check(gl_config_set(cfg.get(), "seed", std::to_string(c.seed).c_str()), "--seed");
  if (!c.out.empty()) {
    const std::string quoted = "\"" + c.out + "\"";
    check(gl_config_set(cfg.get(), "out_dir", quoted.c_str()), "--out");
  }
  return cfg;
}

const char* cell_name(const gl_cell_row& r) {
  static const char* names[] = {"plain", "adam", "x0pred", "both"};
  return names[2 * r.x0pred + r.adam];
}

void print_row(const gl_cell_row& r) {
  std::printf("%d  %-9s %-7s fid %10.4f  accuracy %.4f  cos %7.4f  seed %llu\n", r.cell,
              r.robust ? "robust" : "nonrobust", cell_name(r), r.fid, r.accuracy,
              r.mean_cosine, static_cast<unsigned long long>(r.seed));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"guidelab: classifier-guided diffusion sampling lab"};
  app.failure_message(CLI::FailureMessage::help);
  app.require_subcommand(1);

  Common gen, clf, den, smp, grid, sweep;
  add_common(app.add_subcommand("gen-data", "generate the training dataset"), gen);
  add_common(app.add_subcommand("train-classifier", "train clean and noisy classifiers"), clf);
  add_common(app.add_subcommand("train-denoiser", "train the noise-prediction network"), den);
  add_common(app.add_subcommand("sample", "run one guided sampling cell"), smp);
  add_common(app.add_subcommand("grid", "run the 8-cell experiment grid"), grid);
  auto* sweep_cmd = app.add_subcommand("sweep", "sweep the guidance scale for one cell");
  add_common(sweep_cmd, sweep);
  std::vector<double> scales;
  sweep_cmd->add_option("--scales", scales, "guidance scales (at least two)")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("gen-data")) {
      auto cfg = load(gen);
      check(gl_gen_data(cfg.get()), "gen-data");
      std::printf("dataset written\n");
    } else if (app.got_subcommand("train-classifier")) {
      auto cfg = load(clf);
      double clean = 0, noisy = 0;
      check(gl_train_classifiers(cfg.get(), &clean, &noisy), "train-classifier");
      std::printf("validation accuracy: clean %.4f  noisy %.4f\n", clean, noisy);
    } else if (app.got_subcommand("train-denoiser")) {
      auto cfg = load(den);
      double loss = 0;
      check(gl_train_denoiser(cfg.get(), &loss), "train-denoiser");
      std::printf("final epoch loss %.6f\n", loss);
    } else if (app.got_subcommand("sample")) {
      auto cfg = load(smp);
      gl_cell_row row{};
      check(gl_sample(cfg.get(), &row), "sample");
      print_row(row);
    } else if (app.got_subcommand("grid")) {
      auto cfg = load(grid);
      std::vector<gl_cell_row> rows(8);
      size_t n = 0;
      check(gl_run_grid(cfg.get(), rows.data(), rows.size(), &n), "grid");
      if (n > rows.size()) {
        rows.resize(n);
        check(gl_run_grid(cfg.get(), rows.data(), rows.size(), &n), "grid");
      }
      for (size_t i = 0; i < n; ++i) print_row(rows[i]);
    } else if (app.got_subcommand("sweep")) {
      auto cfg = load(sweep);
      std::vector<gl_sweep_row> rows(std::max<size_t>(scales.size(), 32));
      size_t n = 0;
      check(gl_run_sweep(cfg.get(), scales.data(), scales.size(), rows.data(), rows.size(), &n),
            "sweep");
      if (n > rows.size()) {
        rows.resize(n);
        check(gl_run_sweep(cfg.get(), scales.data(), scales.size(), rows.data(), n, &n), "sweep");
      }
      rows.resize(n);
      for (const auto& r : rows)
        std::printf("scale %8.4f  fid %10.4f  accuracy %.4f\n", r.scale, r.fid, r.accuracy);
    }
  } catch (const CliError& e) {
    std::fprintf(stderr, "guidelab: %s\n", e.message().c_str());
    if (e.usage())
      for (const auto* sub : app.get_subcommands())
        std::fprintf(stderr, "%s", sub->help().c_str());
    return 1;
  }
  return 0;
}
