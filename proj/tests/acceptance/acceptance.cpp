// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance harness. Prints one PASS/FAIL line per criterion. The exit
// code reports harness errors only; a failing criterion is a result, not a
// crash.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "config.hpp"
#include "fd.hpp"
#include "guidance.hpp"
#include "runner.hpp"
#include "sprites.hpp"

namespace gl = guidelab;
namespace fs = std::filesystem;
using gl::Mat;
using gl::Vec;

namespace {

int g_passed = 0;
int g_total = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  ++g_total;
  g_passed += ok;
  std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
}

template <typename... A>
std::string fmt(const char* f, A... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1: gradients against finite differences --------------------------

struct GradStats {
  int cases = 0;
  double worst = 0.0;
  void add(const Vec& analytic, const Vec& fd) {
    ++cases;
    worst = std::max(worst, gl::testing::rel_error(analytic, fd, 1e-6));
  }
};

// Noised data point at step t.
Vec latent(const gl::ClassGmm& gmm, const gl::NoiseSchedule& s, int t, std::mt19937_64& rng) {
  const gl::LabeledPoints d = gl::sample_data(gmm, 1, rng);
  const double ab = s.alpha_bar(t);
  return std::sqrt(ab) * d.x.col(0) + std::sqrt(1 - ab) * gl::testing::randn(gmm.dim(), rng);
}

// log p(y|x) at signal level ab as -softplus(lse_other - lse_y). Unlike a
// log-sum-exp difference this keeps relative precision when the posterior
// saturates, so finite differences resolve the tiny gradients there.
double stable_log_posterior(const gl::ClassGmm& gmm, const Vec& x, double ab, int y) {
  const auto e = gmm.evaluate(x, ab);
  double in = -std::numeric_limits<double>::infinity();
  double out = in;
  auto acc = [](double& a, double b) {
    const double m = std::max(a, b);
    if (std::isfinite(m)) a = m + std::log(std::exp(a - m) + std::exp(b - m));
  };
  for (int k = 0; k < gmm.num_modes(); ++k)
    acc(gmm.modes()[static_cast<std::size_t>(k)].label == y ? in : out, e.log_joint(k));
  const double gap = out - in;
  return -(gap > 0 ? gap + std::log1p(std::exp(-gap)) : std::log1p(std::exp(gap)));
}

bool criterion_gradients(const gl::ExperimentConfig& cfg) {
  const gl::NoiseSchedule sched = gl::make_schedule(cfg);
  const gl::ClassGmm gmm = gl::make_gmm(cfg);
  const double mode_sd = std::sqrt(cfg.bright.mode_variance);
  std::mt19937_64 rng(cfg.seed + 17);
  std::uniform_int_distribution<int> pick_t(1, sched.steps());
  std::uniform_int_distribution<int> pick_y(0, gmm.num_classes() - 1);
  const int cases = 100;
  std::map<std::string, GradStats> stats;

  const gl::GmmDenoiser den(gmm, sched);
  const gl::GmmClassifier robust(gmm, gl::ClassifierKind::Robust, sched);
  const gl::GmmClassifier plain(gmm, gl::ClassifierKind::NonRobust, sched);
  for (int i = 0; i < cases; ++i) {
    const int t = pick_t(rng);
    const int y = pick_y(rng);
    const double ab = sched.alpha_bar(t);
    const Vec x = latent(gmm, sched, t, rng);
    // Step ladders scale with the width of the noised modes at t. The
    // saturated and x0-pred objectives need a different step per point.
    const double width = std::sqrt(ab * mode_sd * mode_sd + 1 - ab);
    auto fd = [](auto f, const Vec& p, double scale) {
      return gl::testing::fd_gradient_adaptive(f, p, scale / std::max(1.0, p.cwiseAbs().maxCoeff()));
    };
    stats["robust"].add(
        gl::grad_log_posterior(gmm, x, t, y, gl::ClassifierKind::Robust, sched),
        fd([&](const Vec& p) { return stable_log_posterior(gmm, p, ab, y); }, x, width));
    stats["non-robust"].add(
        gl::grad_log_posterior(gmm, x, t, y, gl::ClassifierKind::NonRobust, sched),
        fd([&](const Vec& p) { return stable_log_posterior(gmm, p, 1.0, y); }, x, mode_sd));
    gl::GuidanceConfig gc;
    gc.use_x0_pred = true;
    gc.target_class = y;
    for (const gl::GmmClassifier* clf : {&robust, &plain}) {
      const double clf_ab = clf == &robust ? ab : 1.0;
      const Vec g = gl::classifier_grad(x, t, gc, *clf, &den, sched).col(0);
      stats["x0-pred (exact denoiser)"].add(
          g, fd(
                 [&](const Vec& p) {
                   return stable_log_posterior(
                       gmm, gl::predict_x0(p, t, den.eps(p, t), sched).col(0), clf_ab, y);
                 },
                 x, width));
    }
    const Vec u = gl::testing::randn(gmm.dim(), rng);
    stats["exact denoiser vjp"].add(
        den.eps_vjp(x, t, u).col(0),
        fd([&](const Vec& p) { return u.dot(den.eps(p, t).col(0)); }, x, width));
  }

  // Networks: random smooth MLPs of sprite-like shape, small enough for
  // dense finite differences.
  const int d = 24;
  const gl::Mlp clf_net = gl::Mlp::random({d + gl::kTimeFeatures, 32, 32, 4}, gl::Activation::Silu,
                                          gl::Head::Logits, true, rng);
  const gl::Mlp clean_net =
      gl::Mlp::random({d, 32, 4}, gl::Activation::Silu, gl::Head::Logits, false, rng);
  const gl::Mlp den_net = gl::Mlp::random({d + gl::kTimeFeatures, 48, 48, d}, gl::Activation::Silu,
                                          gl::Head::Regression, true, rng, true);
  const gl::MlpDenoiser mden(den_net, sched);
  const gl::MlpClassifier mclf(clf_net, sched);
  const gl::MlpClassifier mclean(clean_net, sched);
  for (int i = 0; i < cases; ++i) {
    const int t = pick_t(rng);
    const int y = pick_y(rng);
    const Vec x = gl::testing::randn(d, rng);
    const gl::Classifier& clf = i % 2 ? static_cast<const gl::Classifier&>(mclf) : mclean;
    Vec lp;
    stats["network input gradient"].add(
        clf.grad(x, t, y, nullptr).col(0),
        gl::testing::fd_gradient(
            [&](const Vec& p) {
              clf.grad(p, t, y, &lp);
              return lp(0);
            },
            x, 1e-3));
    const Vec u = gl::testing::randn(d, rng);
    stats["network denoiser vjp"].add(
        mden.eps_vjp(x, t, u).col(0),
        gl::testing::fd_gradient([&](const Vec& p) { return u.dot(mden.eps(p, t).col(0)); }, x,
                                 1e-3));
    gl::GuidanceConfig gc;
    gc.use_x0_pred = true;
    gc.target_class = y;
    const double h = 1e-3 * std::sqrt(sched.alpha_bar(t));
    stats["x0-pred (network denoiser)"].add(
        gl::classifier_grad(x, t, gc, clf, &mden, sched).col(0),
        gl::testing::fd_gradient(
            [&](const Vec& p) {
              clf.grad(gl::predict_x0(p, t, mden.eps(p, t), sched), t, y, &lp);
              return lp(0);
            },
            x, h));
  }

  bool ok = true;
  std::string detail;
  for (const auto& [name, s] : stats) {
    ok = ok && s.worst <= 1e-4 && s.cases >= 100;
    detail += fmt("%s %d cases worst %.1e; ", name.c_str(), s.cases, s.worst);
  }
  detail.resize(detail.size() - 2);
  report(1, ok, "gradient correctness (rel err <= 1e-4)", detail);
  return ok;
}

// ---- 2: Tweedie --------------------------------------------------------

void criterion_tweedie(const gl::ExperimentConfig& cfg) {
  const gl::NoiseSchedule sched = gl::make_schedule(cfg);
  const gl::ClassGmm gmm = gl::make_gmm(cfg);
  std::mt19937_64 rng(cfg.seed + 23);
  std::uniform_int_distribution<int> pick_t(1, sched.steps());
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int t = pick_t(rng);
    const Vec x = latent(gmm, sched, t, rng);
    const Vec eps = gl::exact_eps(gmm, x, t, sched);
    const Mat x0 = gl::predict_x0(x, t, eps, sched);
    worst = std::max(worst, (x0.col(0) - gl::posterior_mean_x0(gmm, x, t, sched))
                                .cwiseAbs()
                                .maxCoeff());
  }
  report(2, worst <= 1e-8, "Tweedie identity (1000 cases, <= 1e-8)",
         fmt("max abs deviation %.2e", worst));
}

// ---- 3: conditioning-norm law -----------------------------------------

struct NormLaw {
  double worst = 0.0;
  long steps = 0;
  long zero_steps = 0;
  bool finite = true;
};

void check_norm_law(const gl::SamplerTrace& tr, NormLaw& law) {
  for (std::size_t i = 0; i < tr.steps.size(); ++i)
    for (int j = 0; j < tr.chains; ++j) {
      const double c = tr.cond_norm[i](j);
      const double target = tr.variant == gl::GuidanceVariant::Normalized
                                ? tr.scale * tr.sigma2[i] * tr.mu_norm[i](j)
                                : tr.scale * tr.sigma2[i] * tr.applied_norm[i](j);
      ++law.steps;
      if (!std::isfinite(c) || !std::isfinite(target)) {
        law.finite = false;
        continue;
      }
      if (c == 0.0 && tr.applied_norm[i](j) == 0.0) {
        ++law.zero_steps;
        continue;
      }
      law.worst = std::max(law.worst, std::abs(c - target) / std::max(1.0, target));
    }
}

// ---- 4: ADAM ----------------------------------------------------------

void criterion_adam() {
  std::mt19937_64 rng(404);
  bool first_ok = true, conv_ok = true, zero_ok = true;
  double conv_worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec g = gl::testing::randn(32, rng);
    gl::AdamState st(32);
    const Vec out = gl::adam_transform(g, st);
    for (Eigen::Index i = 0; i < g.size(); ++i)
      first_ok = first_ok && std::signbit(out(i)) == std::signbit(g(i)) &&
                 std::abs(std::abs(out(i)) - 1.0) <= 1e-8 / std::abs(g(i)) + 1e-15;

    Vec c = gl::testing::randn(32, rng);
    for (auto& e : c) e = std::copysign(0.01 + std::abs(e), e);  // |g| >= 0.01
    gl::AdamState cs(32);
    Vec last;
    for (int k = 0; k < 1000; ++k) last = gl::adam_transform(c, cs);
    for (Eigen::Index i = 0; i < c.size(); ++i)
      conv_worst = std::max(conv_worst, std::abs(last(i) - (c(i) > 0 ? 1.0 : -1.0)));

    gl::AdamState zs(32);
    for (int k = 0; k < 10; ++k)
      zero_ok = zero_ok && gl::adam_transform(Vec::Zero(32), zs).isZero(0.0);
    zero_ok = zero_ok && zs.m.isZero(0.0) && zs.v.isZero(0.0);
  }
  conv_ok = conv_worst <= 1e-6;
  report(4, first_ok && conv_ok && zero_ok, "ADAM properties",
         fmt("first-step sign %s; constant-gradient |out - sign| after 1000 steps %.1e; "
             "zero fixed point %s",
             first_ok ? "ok" : "broken", conv_worst, zero_ok ? "ok" : "broken"));
}

// ---- 5: Frechet -------------------------------------------------------

double frechet_reference(const Mat& a, const Mat& b) {
  auto moments = [](const Mat& x, Vec& mean, Mat& cov) {
    mean = x.rowwise().mean();
    const Mat c = x.colwise() - mean;
    cov = c * c.transpose() / static_cast<double>(x.cols() - 1);
  };
  Vec ma, mb;
  Mat ca, cb;
  moments(a, ma, ca);
  moments(b, mb, cb);
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Mat>(ca * cb).eigenvalues();
  double tr = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) tr += std::sqrt(std::max(0.0, ev(i).real()));
  return (ma - mb).squaredNorm() + ca.trace() + cb.trace() - 2 * tr;
}

void criterion_frechet() {
  std::mt19937_64 rng(505);
  double dup = 0.0, self = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 12;
    Mat a(d, 100 + trial), b(d, 80);
    for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) = gl::testing::randn(d, rng);
    const Mat mix = 0.8 * Mat::Random(d, d) + Mat::Identity(d, d);
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      b.col(j) = mix * gl::testing::randn(d, rng) + Vec::Constant(d, 0.3);
    dup = std::max(dup, std::abs(gl::frechet_distance(a, b) - frechet_reference(a, b)));
    self = std::max(self, std::abs(gl::frechet_distance(a, a)));
  }
  Mat p(1, 3), q(1, 3);
  p << -1, 0, 1;
  q << 0, 1, 2;
  const double one_d = gl::frechet_distance(p, q);
  const bool ok = dup <= 1e-8 && self <= 1e-8 && std::abs(one_d - 1.0) <= 1e-12;
  report(5, ok, "Frechet oracle",
         fmt("duplicate-implementation gap %.1e; d2(A,A) %.1e; 1-D case %.15f", dup, self, one_d));
}

// ---- 6..11: GMM grid --------------------------------------------------

struct CellStats {
  double mid = 0, early = 0, final_third = 0, last_half = 0, all = 0;
  double accuracy = 0, fid = 0;
};

using Grid = std::map<int, CellStats>;

CellStats stats_of(const gl::CellResult& r) {
  const std::size_t n = r.cosine.points.size();
  const std::size_t third = n / 3;
  CellStats s;
  s.mid = gl::mean_cosine(r.cosine, third, 2 * third);
  s.early = gl::mean_cosine(r.cosine, 0, 2 * third);
  s.final_third = gl::mean_cosine(r.cosine, 2 * third, n);
  s.last_half = gl::mean_cosine(r.cosine, n / 2, n);
  s.all = gl::mean_cosine(r.cosine, 0, n);
  s.accuracy = r.accuracy;
  s.fid = r.fid;
  return s;
}

enum Cell { RobustPlain = 0, RobustBoth = 3, Plain = 4, AdamOnly = 5, X0 = 6, Both = 7 };

class GridCache {
 public:
  GridCache(gl::ExperimentConfig cfg, NormLaw* law) : cfg_(std::move(cfg)), law_(law) {}
  const Grid& at(std::uint64_t seed) {
    auto it = grids_.find(seed);
    if (it != grids_.end()) return it->second;
    gl::ExperimentConfig c = cfg_;
    c.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = gl::run_grid(c, false);
    const double secs = seconds_since(t0);
    std::printf("       grid at seed %llu took %.1f s\n", static_cast<unsigned long long>(seed), secs);
    max_seconds_ = std::max(max_seconds_, secs);
    Grid g;
    for (const auto& r : rows) {
      g[r.spec.index] = stats_of(r);
      if (law_) check_norm_law(r.trace, *law_);
    }
    return grids_.emplace(seed, std::move(g)).first->second;
  }
  double max_seconds() const { return max_seconds_; }

 private:
  gl::ExperimentConfig cfg_;
  NormLaw* law_;
  std::map<std::uint64_t, Grid> grids_;
  double max_seconds_ = 0.0;
};

// Tries the base seed and two further seeds; returns the first passing
// attempt's detail, or the last failing one.
void directional(int id, const std::string& what, const std::vector<std::uint64_t>& seeds,
                 const std::function<bool(std::uint64_t, std::string&)>& check) {
  std::string detail, all;
  for (std::uint64_t seed : seeds) {
    const bool ok = check(seed, detail);
    all += fmt("[seed %llu] ", static_cast<unsigned long long>(seed)) + detail + " ";
    if (ok) {
      report(id, true, what, fmt("seed %llu: ", static_cast<unsigned long long>(seed)) + detail);
      return;
    }
  }
  report(id, false, what, all);
}

bool monotone_to_saturation(const std::vector<double>& acc) {
  const auto top = std::max_element(acc.begin(), acc.end());
  for (auto it = acc.begin(); it != top; ++it)
    if (*(it + 1) < *it) return false;
  for (auto it = top; it != acc.end(); ++it)
    if (*it < *top - 0.05) return false;
  return true;
}

// ---- 13..14: sprites --------------------------------------------------

struct SpriteRun {
  double clean_val = 0, clean_noised = 0, noisy_noised = 0;
};

SpriteRun classifier_check(const gl::ExperimentConfig& cfg, const gl::LabeledPoints& heldout) {
  const gl::ClassifierPair pair = gl::train_classifiers(cfg);
  const gl::NoiseSchedule sched = gl::make_schedule(cfg);
  SpriteRun r;
  r.clean_val = pair.clean.report.val_accuracy.back();
  r.clean_noised = gl::noised_accuracy(pair.clean.net, heldout, sched, cfg.seed + 4242);
  r.noisy_noised = gl::noised_accuracy(pair.noisy.net, heldout, sched, cfg.seed + 4242);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"guidelab acceptance harness"};
  std::string work = "acceptance_work";
  std::string sprite_config;
  std::uint64_t seed = 1;
  bool skip_sprites = false;
  app.add_option("--work", work, "scratch directory");
  app.add_option("--sprite-config", sprite_config, "sprite pipeline config");
  app.add_option("--seed", seed, "base seed for directional checks");
  app.add_flag("--skip-sprites", skip_sprites, "report criteria 13 and 14 as failed without running");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto t_start = std::chrono::steady_clock::now();
    gl::ExperimentConfig cfg = gl::default_config();
    cfg.seed = seed;
    cfg.out_dir = (fs::path(work) / "gmm").string();
    const std::vector<std::uint64_t> seeds = {seed, seed + 1000, seed + 2000};

    criterion_gradients(cfg);
    criterion_tweedie(cfg);

    NormLaw law;
    GridCache grids(cfg, &law);
    grids.at(seed);
    gl::ExperimentConfig classic = cfg;
    classic.variant = gl::GuidanceVariant::Classic;
    NormLaw classic_law;
    for (const auto& r : gl::run_grid(classic, false)) check_norm_law(r.trace, classic_law);
    report(3, law.finite && classic_law.finite && law.worst <= 1e-9 && classic_law.worst <= 1e-9,
           "conditioning-norm law (<= 1e-9)",
           fmt("normalized: %ld steps, %ld zero, worst rel dev %.1e; classic: %ld steps, worst "
               "rel dev %.1e%s",
               law.steps, law.zero_steps, law.worst, classic_law.steps, classic_law.worst,
               law.finite && classic_law.finite ? "" : " (non-finite values seen)"));

    criterion_adam();
    criterion_frechet();

    directional(6, "robust vs non-robust cosine, middle third", seeds,
                [&](std::uint64_t s, std::string& d) {
                  const Grid& g = grids.at(s);
                  const double r = g.at(RobustPlain).mid, n = g.at(Plain).mid;
                  d = fmt("robust %.3f non-robust %.3f", r, n);
                  return r - n >= 0.2 && n >= -0.15 && n <= 0.25;
                });
    directional(7, "x0-prediction stabilizes non-robust cosine", seeds,
                [&](std::uint64_t s, std::string& d) {
                  const Grid& g = grids.at(s);
                  const CellStats &p = g.at(Plain), &x = g.at(X0);
                  const double gap = x.all - p.all;
                  const double gap_final = x.final_third - p.final_third;
                  const double gap_early = x.early - p.early;
                  d = fmt("gap all %.3f, final third %.3f, first two thirds %.3f", gap, gap_final,
                          gap_early);
                  return gap >= 0.1 && gap_final > gap_early;
                });
    directional(8, "x0-prediction + ADAM cosine over final half", seeds,
                [&](std::uint64_t s, std::string& d) {
                  const double v = grids.at(s).at(Both).last_half;
                  d = fmt("%.4f", v);
                  return v >= 0.9;
                });
    directional(9, "accuracy ordering", seeds, [&](std::uint64_t s, std::string& d) {
      const Grid& g = grids.at(s);
      const double rp = g.at(RobustPlain).accuracy, np = g.at(Plain).accuracy,
                   nb = g.at(Both).accuracy, na = g.at(AdamOnly).accuracy;
      d = fmt("robust-plain %.3f, non-robust plain %.3f, both %.3f, ADAM-only %.3f", rp, np, nb, na);
      return rp >= np + 0.3 && nb >= np + 0.2 && std::abs(na - np) <= 0.1;
    });
    directional(10, "FID ordering", seeds, [&](std::uint64_t s, std::string& d) {
      const Grid& g = grids.at(s);
      const double rp = g.at(RobustPlain).fid, np = g.at(Plain).fid, nb = g.at(Both).fid;
      d = fmt("robust-plain %.3f, non-robust plain %.3f, non-robust both %.3f", rp, np, nb);
      return nb < np && rp < np;
    });
    directional(11, "over-regularization of robust guidance", seeds,
                [&](std::uint64_t s, std::string& d) {
                  const Grid& g = grids.at(s);
                  const CellStats &rp = g.at(RobustPlain), &rb = g.at(RobustBoth);
                  d = fmt("cosine %.3f vs %.3f, accuracy %.3f vs %.3f, FID %.3f vs %.3f", rb.all,
                          rp.all, rb.accuracy, rp.accuracy, rb.fid, rp.fid);
                  return rb.all >= rp.all && rb.accuracy <= rp.accuracy + 0.02 &&
                         rb.fid >= rp.fid - 1.0;
                });
    std::printf("       slowest GMM grid %.1f s (budget 300 s)\n", grids.max_seconds());

    directional(12, "scale sweep: accuracy saturates, interior FID knee", seeds,
                [&](std::uint64_t s, std::string& d) {
                  gl::ExperimentConfig c = cfg;
                  c.seed = s;
                  const auto rows = gl::run_scale_sweep(c, c.sweep_scales, false);
                  std::vector<double> acc;
                  d.clear();
                  for (const auto& r : rows) {
                    acc.push_back(r.accuracy);
                    d += fmt("s=%g acc %.3f fid %.2f; ", r.scale, r.accuracy, r.fid);
                  }
                  bool knee = false;
                  for (std::size_t i = 1; i + 1 < rows.size(); ++i)
                    knee = knee || rows[i].fid <= std::min(rows.front().fid, rows.back().fid);
                  return monotone_to_saturation(acc) && knee;
                });

    if (skip_sprites || sprite_config.empty()) {
      report(13, false, "sprite classifiers", "not run");
      report(14, false, "sprite grid orderings", "not run");
    } else {
      const auto t_sprites = std::chrono::steady_clock::now();
      gl::ExperimentConfig sc = gl::load_config(sprite_config);
      sc.seed = seed;
      sc.out_dir = fs::absolute(fs::path(work) / "sprites").string();
      fs::remove_all(sc.out_dir);
      gl::generate_data(sc);
      gl::SpriteConfig held = sc.sprite;
      held.seed = sc.sprite.seed + 100000;
      const gl::SpriteDataset heldout = gl::generate_sprites(held, 2000);

      // Re-runs retrain the classifiers with shifted seeds in a side
      // directory so the main artifacts stay those of the base seed.
      std::string all;
      bool ok13 = false;
      for (std::size_t k = 0; k < seeds.size() && !ok13; ++k) {
        gl::ExperimentConfig c = sc;
        c.classifier_train.seed = sc.classifier_train.seed + 1000 * k;
        if (k > 0) {
          c.out_dir = sc.out_dir + "_clf" + std::to_string(k);
          c.data_file = gl::artifact_path(sc, sc.data_file);
        }
        const SpriteRun r = classifier_check(c, heldout.data);
        ok13 = r.clean_val >= 0.95 && r.clean_noised <= 0.55 &&
               r.noisy_noised - r.clean_noised >= 0.15;
        all = fmt("classifier seed %llu: clean val %.3f, clean on noised %.3f, noisy-trained on "
                  "noised %.3f (gap %.3f)",
                  static_cast<unsigned long long>(c.classifier_train.seed), r.clean_val,
                  r.clean_noised, r.noisy_noised, r.noisy_noised - r.clean_noised) +
              (ok13 || all.empty() ? "" : "; " + all);
      }
      report(13, ok13, "sprite classifiers", all);

      const auto t_den = std::chrono::steady_clock::now();
      gl::train_sprite_denoiser(sc);
      std::printf("       denoiser training took %.1f s\n", seconds_since(t_den));
      GridCache sgrids(sc, nullptr);
      directional(14, "sprite grid orderings (halved thresholds)", seeds,
                  [&](std::uint64_t s, std::string& d) {
                    const Grid& g = sgrids.at(s);
                    const CellStats &rp = g.at(RobustPlain), &np = g.at(Plain), &nb = g.at(Both),
                                    &na = g.at(AdamOnly);
                    d = fmt("accuracy robust-plain %.3f, plain %.3f, both %.3f, ADAM-only %.3f; "
                            "FID robust-plain %.1f, plain %.1f, both %.1f",
                            rp.accuracy, np.accuracy, nb.accuracy, na.accuracy, rp.fid, np.fid,
                            nb.fid);
                    return rp.accuracy >= np.accuracy + 0.15 && nb.accuracy >= np.accuracy + 0.1 &&
                           std::abs(na.accuracy - np.accuracy) <= 0.1 && nb.fid < np.fid &&
                           rp.fid < np.fid;
                  });
      std::printf("       sprite pipeline took %.1f s (budget 1800 s)\n", seconds_since(t_sprites));
    }
    std::printf("criteria passed: %d/%d (%.1f s)\n", g_passed, g_total, seconds_since(t_start));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance harness error: %s\n", e.what());
    return 2;
  }
  return 0;
}
