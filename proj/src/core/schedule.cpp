// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "schedule.hpp"

#include <cmath>
#include <string>

namespace guidelab {

NoiseSchedule NoiseSchedule::linear(int steps, double beta_start,
                                    double beta_end, VarianceKind kind) {
  if (steps < 1) fail(ErrorCode::InvalidArgument, "schedule needs T >= 1");
  if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_start > beta_end)
    fail(ErrorCode::InvalidArgument,
         "schedule needs 0 < beta_start <= beta_end < 1");

  NoiseSchedule s;
  s.kind_ = kind;
  const auto n = static_cast<std::size_t>(steps);
  s.betas_.resize(n);
  s.alphas_.resize(n);
  s.alpha_bars_.resize(n);
  s.sigma2_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double frac =
        n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    s.betas_[i] = beta_start + (beta_end - beta_start) * frac;
    s.alphas_[i] = 1.0 - s.betas_[i];
    s.alpha_bars_[i] = (i == 0 ? 1.0 : s.alpha_bars_[i - 1]) * s.alphas_[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (kind == VarianceKind::Beta || i == 0) {
      s.sigma2_[i] = s.betas_[i];
    } else {
      s.sigma2_[i] = (1.0 - s.alpha_bars_[i - 1]) / (1.0 - s.alpha_bars_[i]) *
                     s.betas_[i];
    }
  }
  return s;
}

std::size_t NoiseSchedule::index(int t) const {
  if (t < 1 || t > steps())
    fail(ErrorCode::InvalidArgument,
         "step index " + std::to_string(t) + " outside [1, " +
             std::to_string(steps()) + "]");
  return static_cast<std::size_t>(t - 1);
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t == 0) return 1.0;
  return alpha_bars_[index(t)];
}

Mat q_sample(const MatRef& x0, int t, const MatRef& eps,
             const NoiseSchedule& sched) {
  require_same_shape(x0, eps, "q_sample: eps shape differs from x0");
  const double ab = sched.alpha_bar(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

Mat predict_x0(const MatRef& xt, int t, const MatRef& eps_hat,
               const NoiseSchedule& sched) {
  require_same_shape(xt, eps_hat, "predict_x0: eps_hat shape differs from x_t");
  const double ab = sched.alpha_bar(t);
  return xt / std::sqrt(ab) - std::sqrt(1.0 - ab) * eps_hat / std::sqrt(ab);
}

Mat reverse_mean(const MatRef& xt, int t, const MatRef& eps_hat,
                 const NoiseSchedule& sched) {
  require_same_shape(xt, eps_hat,
                     "reverse_mean: eps_hat shape differs from x_t");
  const double ab = sched.alpha_bar(t);
  return (xt - sched.beta(t) / std::sqrt(1.0 - ab) * eps_hat) /
         std::sqrt(sched.alpha(t));
}

}  // namespace guidelab
