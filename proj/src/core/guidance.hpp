// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "adam.hpp"
#include "common.hpp"
#include "gmm_world.hpp"
#include "nn.hpp"
#include "schedule.hpp"

namespace guidelab {

/// Noise predictor ε̂(x_t, t) together with its input-Jacobian transpose.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual int dim() const = 0;
  virtual Mat eps(const MatRef& x, int t) const = 0;
  /// J_εᵀ·u per column, J_ε = ∂ε̂/∂x_t.
  virtual Mat eps_vjp(const MatRef& x, int t, const MatRef& u) const = 0;
};

/// Exact ε of a ClassGmm; needs no training.
class GmmDenoiser final : public Denoiser {
 public:
  GmmDenoiser(const ClassGmm& gmm, const NoiseSchedule& sched)
      : gmm_(gmm), sched_(sched) {}
  int dim() const override { return gmm_.dim(); }
  Mat eps(const MatRef& x, int t) const override;
  Mat eps_vjp(const MatRef& x, int t, const MatRef& u) const override;

 private:
  const ClassGmm& gmm_;
  const NoiseSchedule& sched_;
};

class MlpDenoiser final : public Denoiser {
 public:
  MlpDenoiser(const Mlp& net, const NoiseSchedule& sched);
  int dim() const override { return net_.input_dim(); }
  Mat eps(const MatRef& x, int t) const override;
  Mat eps_vjp(const MatRef& x, int t, const MatRef& u) const override;

 private:
  const Mlp& net_;
  const NoiseSchedule& sched_;
};

/// Classifier p(y|x). `t` is the noise level of the latent being guided;
/// classifiers that ignore noise (non-robust) disregard it.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual int dim() const = 0;
  virtual int num_classes() const = 0;
  /// ∇_x log p(y|x) per column; log p(y|x) in *log_prob when given.
  virtual Mat grad(const MatRef& x, int t, int y,
                   Vec* log_prob = nullptr) const = 0;
  /// Clean-data argmax, ties toward the lowest class index.
  virtual std::vector<int> predict(const MatRef& x) const = 0;
};

class GmmClassifier final : public Classifier {
 public:
  GmmClassifier(const ClassGmm& gmm, ClassifierKind kind,
                const NoiseSchedule& sched)
      : gmm_(gmm), kind_(kind), sched_(sched) {}
  int dim() const override { return gmm_.dim(); }
  int num_classes() const override { return gmm_.num_classes(); }
  Mat grad(const MatRef& x, int t, int y, Vec* log_prob) const override;
  std::vector<int> predict(const MatRef& x) const override;

 private:
  const ClassGmm& gmm_;
  ClassifierKind kind_;
  const NoiseSchedule& sched_;
};

/// Trained logits network; time features are supplied only when the net
/// was trained with them.
class MlpClassifier final : public Classifier {
 public:
  MlpClassifier(const Mlp& net, const NoiseSchedule& sched);
  int dim() const override { return net_.input_dim(); }
  int num_classes() const override { return net_.output_dim(); }
  Mat grad(const MatRef& x, int t, int y, Vec* log_prob) const override;
  std::vector<int> predict(const MatRef& x) const override;

 private:
  const Mlp& net_;
  const NoiseSchedule& sched_;
};

enum class GuidanceVariant : std::uint8_t { Classic = 0, Normalized = 1 };

/// Where ν sits relative to the normalization of the normalized variant.
enum class AdamPlacement : std::uint8_t {
  BeforeNormalize = 0,  ///< c = s·σ²·‖μ‖·ν(g)/‖ν(g)‖
  AfterNormalize = 1,   ///< ν sees g/‖g‖, result normalized again
};

struct GuidanceConfig {
  double scale = 0.04;
  GuidanceVariant variant = GuidanceVariant::Normalized;
  bool use_x0_pred = false;
  bool use_adam = false;
  AdamPlacement adam_placement = AdamPlacement::BeforeNormalize;
  AdamParams adam;
  int target_class = 0;
  int num_chains = 64;
  /// Steps at which x_t (before the step) is kept in the trace.
  std::vector<int> snapshot_steps;
};

/// Per-step diagnostics; index i is the i-th executed step, t descending.
struct SamplerTrace {
  int dim = 0;
  int chains = 0;
  double scale = 0.0;
  GuidanceVariant variant = GuidanceVariant::Normalized;
  std::vector<int> steps;
  std::vector<double> sigma2;
  std::vector<Mat> cond;          // c_t = μ'_t - μ_t, d × chains
  std::vector<Vec> cond_norm;     // ‖c_t‖
  std::vector<Vec> grad_norm;     // ‖raw classifier gradient‖
  std::vector<Vec> applied_norm;  // ‖g fed to the mean update‖
  std::vector<Vec> mu_norm;       // ‖μ_t‖
  std::vector<Vec> logp_target;   // log p(y|·) of the classifier input
  std::map<int, Mat> snapshots;
  std::vector<long> adam_steps;   // per chain
};

struct GuidedSamples {
  Mat x;  // final x_0, one chain per column
  SamplerTrace trace;
};

/// g_t for every column of x; x̂0-prediction routes through the denoiser's
/// Jacobian. Requires a denoiser only when cfg.use_x0_pred is set.
Mat classifier_grad(const MatRef& x, int t, const GuidanceConfig& cfg,
                    const Classifier& clf, const Denoiser* denoiser,
                    const NoiseSchedule& sched, Vec* log_prob = nullptr);

/// μ + s·σ²·‖μ‖·g/‖g‖ per column; columns with g = 0 are left unchanged.
Mat guided_mean_normalized(const MatRef& mu, double sigma2, const MatRef& g,
                           double s);
/// μ + s·σ²·g.
Mat guided_mean_classic(const MatRef& mu, double sigma2, const MatRef& g,
                        double s);

/// Ancestral sampling from x_T ~ N(0,I) with guidance. Chain j draws from
/// its own stream seeded by (seed, j).
GuidedSamples sample_guided(const Denoiser& denoiser, const Classifier& clf,
                            const GuidanceConfig& cfg,
                            const NoiseSchedule& sched, std::uint64_t seed);

/// Same RNG protocol as sample_guided, no classifier.
Mat sample_unguided(const Denoiser& denoiser, int chains,
                    const NoiseSchedule& sched, std::uint64_t seed);

}  // namespace guidelab
