// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "common.hpp"
#include "schedule.hpp"

namespace guidelab {

/// Points (one per column) with one class label per column.
struct LabeledPoints {
  Mat x;
  std::vector<int> y;
};

/// Class-conditional Gaussian mixture. Each class is a mixture of one or
/// more Gaussian modes; a class's prior is split evenly over its modes.
/// With one mode per class this is the plain class-conditional GMM.
///
/// Every covariance is held as an eigendecomposition S = Q·diag(λ)·Qᵀ (or a
/// single isotropic λ). The noised covariance ᾱS + (1-ᾱ)I shares Q, so any
/// noise level is solved exactly without per-step caches.
class ClassGmm {
 public:
  struct Mode {
    Vec mean;
    Mat eigvecs;  // empty for isotropic modes
    Vec eigvals;  // size 1 for isotropic modes
    int label = 0;
    double log_weight = 0.0;  // log π_label - log(#modes of label)

    bool isotropic() const { return eigvecs.size() == 0; }
  };

  /// Full-covariance constructor. `labels` may be empty, meaning mode k
  /// belongs to class k.
  ClassGmm(std::vector<double> priors, const std::vector<Vec>& means,
           const std::vector<Mat>& covariances, std::vector<int> labels = {});

  /// Isotropic modes S_k = variances[k]·I.
  static ClassGmm isotropic(std::vector<double> priors,
                            const std::vector<Vec>& means,
                            const std::vector<double>& variances,
                            std::vector<int> labels = {});

  int dim() const { return dim_; }
  int num_classes() const { return static_cast<int>(priors_.size()); }
  int num_modes() const { return static_cast<int>(modes_.size()); }
  const std::vector<double>& priors() const { return priors_; }
  const std::vector<Mode>& modes() const { return modes_; }

  /// Per-mode terms of the mixture noised to signal level alpha_bar.
  struct Eval {
    Vec log_joint;  // log w_k + log N(x; √ᾱ m_k, C_k)
    Mat scores;     // column k: ∇_x log N(x; √ᾱ m_k, C_k)
    Vec resp;       // mode responsibilities r_k
    double log_marginal = 0.0;
  };
  Eval evaluate(const VecRef& x, double alpha_bar) const;

  /// C_k(ᾱ)^{-1}·u.
  Vec solve(int mode, double alpha_bar, const VecRef& u) const;
  double log_det(int mode, double alpha_bar) const;
  /// S_k·u.
  Vec cov_times(int mode, const VecRef& u) const;
  Mat cov_matrix(int mode) const;

 private:
  ClassGmm() = default;
  void finish(std::vector<int> labels);

  int dim_ = 0;
  std::vector<double> priors_;
  std::vector<Mode> modes_;
};

enum class ClassifierKind { Robust, NonRobust };

LabeledPoints sample_data(const ClassGmm& gmm, int n, std::mt19937_64& rng);
/// Draws n points from class y only.
Mat sample_class(const ClassGmm& gmm, int n, int y, std::mt19937_64& rng);

/// log q_t(x|y); t = 0 is the clean class density.
double noised_class_log_density(const ClassGmm& gmm, const VecRef& x, int t,
                                int y, const NoiseSchedule& sched);
/// log p(y|x_t) for all classes under the noised mixture at step t.
Vec robust_log_posterior(const ClassGmm& gmm, const VecRef& x, int t,
                         const NoiseSchedule& sched);
/// Clean Bayes posterior, whatever the noise level of x.
Vec nonrobust_log_posterior(const ClassGmm& gmm, const VecRef& x);
Vec grad_log_posterior(const ClassGmm& gmm, const VecRef& x, int t, int y,
                       ClassifierKind kind, const NoiseSchedule& sched);
/// Same, at an explicit signal level (1 = clean).
Vec grad_log_posterior_at(const ClassGmm& gmm, const VecRef& x,
                          double alpha_bar, int y, double* log_prob = nullptr);

Vec exact_score(const ClassGmm& gmm, const VecRef& x, int t,
                const NoiseSchedule& sched);
Vec exact_eps(const ClassGmm& gmm, const VecRef& x, int t,
              const NoiseSchedule& sched);
Vec posterior_mean_x0(const ClassGmm& gmm, const VecRef& x, int t,
                      const NoiseSchedule& sched);
/// Hessian of log q_t at x applied to u (the score Jacobian is symmetric).
Vec score_jacobian_vp(const ClassGmm& gmm, const VecRef& x, int t,
                      const VecRef& u, const NoiseSchedule& sched);

/// Four classes in the plane, means on a square of the given circumradius,
/// covariances variance·I, equal priors.
ClassGmm planar_world(double radius = 3.0, double variance = 0.15);

struct BrightWorldParams {
  int dim = 64;
  int classes = 4;
  int modes_per_class = 16;
  double class_shift = 1.0;
  double template_scale = 0.3;
  double mode_variance = 0.01;
  double background = 10.0;
  std::uint64_t seed = 5;
};

/// High-dimensional planted world on a bright background. Mode j of class y
/// has mean background + shift_y + P_j·template_y, where P_j is one of
/// modes_per_class random coordinate permutations shared by all classes
/// (the analogue of a sprite's placement) and every mode is isotropic.
ClassGmm bright_world(const BrightWorldParams& p);

}  // namespace guidelab
