// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "common.hpp"

namespace guidelab {

/// Which fixed reverse-step variance Σ_t = σ_t²·I the sampler uses.
enum class VarianceKind {
  Posterior,  ///< β̃_t = (1-ᾱ_{t-1})/(1-ᾱ_t)·β_t, with β̃_1 = β_1
  Beta,       ///< β_t
};

/// Immutable variance schedule. Step indices are 1-based (1..T) at the API;
/// alpha_bar(0) is defined as 1 so that t=0 denotes clean data.
class NoiseSchedule {
 public:
  static NoiseSchedule linear(int steps, double beta_start, double beta_end,
                              VarianceKind kind = VarianceKind::Posterior);

  int steps() const { return static_cast<int>(betas_.size()); }
  VarianceKind variance_kind() const { return kind_; }

  double beta(int t) const { return betas_[index(t)]; }
  double alpha(int t) const { return alphas_[index(t)]; }
  double alpha_bar(int t) const;
  /// σ_t² of the fixed reverse variance.
  double sigma2(int t) const { return sigma2_[index(t)]; }

  std::span<const double> betas() const { return betas_; }
  std::span<const double> alphas() const { return alphas_; }
  std::span<const double> alpha_bars() const { return alpha_bars_; }
  std::span<const double> posterior_variances() const { return sigma2_; }

 private:
  NoiseSchedule() = default;
  std::size_t index(int t) const;

  VarianceKind kind_ = VarianceKind::Posterior;
  std::vector<double> betas_, alphas_, alpha_bars_, sigma2_;
};

/// x_t = √ᾱ_t·x0 + √(1-ᾱ_t)·eps, column-wise.
Mat q_sample(const MatRef& x0, int t, const MatRef& eps,
             const NoiseSchedule& sched);

/// One-step denoised estimate x̂0 = (x_t - √(1-ᾱ_t)·ε̂)/√ᾱ_t.
Mat predict_x0(const MatRef& xt, int t, const MatRef& eps_hat,
               const NoiseSchedule& sched);

/// Unguided DDPM mean μ_t = (x_t - β_t·ε̂/√(1-ᾱ_t))/√α_t.
Mat reverse_mean(const MatRef& xt, int t, const MatRef& eps_hat,
                 const NoiseSchedule& sched);

}  // namespace guidelab
