// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "guidance.hpp"

#include <cmath>
#include <random>

namespace guidelab {
namespace {

std::mt19937_64 chain_stream(std::uint64_t seed, int chain) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chain)};
  return std::mt19937_64(seq);
}

void fill_normal(Eigen::Ref<Vec> v, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = n01(rng);
}

Mat x0_chain_rule(const MatRef& x, int t, const MatRef& eps, const Denoiser& den,
                  const Classifier& clf, int y, const NoiseSchedule& sched,
                  Vec* log_prob) {
  const double ab = sched.alpha_bar(t);
  const Mat x0 = predict_x0(x, t, eps, sched);
  const Mat gh = clf.grad(x0, t, y, log_prob);
  return (gh - std::sqrt(1.0 - ab) * den.eps_vjp(x, t, gh)) / std::sqrt(ab);
}

Mat conditioning_classic(double sigma2, const MatRef& g, double s) {
  return (s * sigma2) * g;
}

// g/‖g‖, or zero for g = 0. Pre-scaling by the largest entry keeps ‖g‖ from
// underflowing when a saturated posterior yields a tiny but nonzero
// gradient; it is exact under power-of-two rescaling of g.
Vec unit_or_zero(const VecRef& g) {
  const double top = g.cwiseAbs().maxCoeff();
  if (!(top > 0.0)) return Vec::Zero(g.size());
  const Vec scaled = g / top;
  return scaled / scaled.norm();
}

Mat conditioning_normalized(const MatRef& mu, double sigma2, const MatRef& g,
                            double s) {
  Mat c(g.rows(), g.cols());
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    c.col(j) = (s * sigma2 * mu.col(j).norm()) * unit_or_zero(g.col(j));
  return c;
}

void check_dims(const Denoiser& den, const Classifier& clf) {
  if (den.dim() != clf.dim())
    fail(ErrorCode::ShapeMismatch, "denoiser and classifier dimensions differ");
}

}  // namespace

Mat GmmDenoiser::eps(const MatRef& x, int t) const {
  Mat out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    out.col(j) = exact_eps(gmm_, x.col(j), t, sched_);
  return out;
}

Mat GmmDenoiser::eps_vjp(const MatRef& x, int t, const MatRef& u) const {
  require_same_shape(x, u, "eps_vjp: cotangent shape");
  const double c = -std::sqrt(1.0 - sched_.alpha_bar(t));
  Mat out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    out.col(j) = c * score_jacobian_vp(gmm_, x.col(j), t, u.col(j), sched_);
  return out;
}

MlpDenoiser::MlpDenoiser(const Mlp& net, const NoiseSchedule& sched)
    : net_(net), sched_(sched) {
  if (net.head() != Head::Regression || !net.time_conditioning() ||
      net.output_dim() != net.input_dim())
    fail(ErrorCode::InvalidArgument,
         "denoiser must be a time-conditioned regression net with d outputs");
}

Mat MlpDenoiser::eps(const MatRef& x, int t) const {
  const Mat tf = time_features(sched_, t, x.cols());
  return forward(net_, x, &tf);
}

Mat MlpDenoiser::eps_vjp(const MatRef& x, int t, const MatRef& u) const {
  const Mat tf = time_features(sched_, t, x.cols());
  return vjp_input(net_, x, &tf, u);
}

Mat GmmClassifier::grad(const MatRef& x, int t, int y, Vec* log_prob) const {
  if (y < 0 || y >= gmm_.num_classes())
    fail(ErrorCode::InvalidArgument, "target class out of range");
  const double ab = kind_ == ClassifierKind::Robust ? sched_.alpha_bar(t) : 1.0;
  Mat out(x.rows(), x.cols());
  if (log_prob) log_prob->resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double lp = 0.0;
    out.col(j) = grad_log_posterior_at(gmm_, x.col(j), ab, y, &lp);
    if (log_prob) (*log_prob)[j] = lp;
  }
  return out;
}

std::vector<int> GmmClassifier::predict(const MatRef& x) const {
  Mat lp(gmm_.num_classes(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    lp.col(j) = nonrobust_log_posterior(gmm_, x.col(j));
  return argmax_columns(lp);
}

MlpClassifier::MlpClassifier(const Mlp& net, const NoiseSchedule& sched)
    : net_(net), sched_(sched) {
  if (net.head() != Head::Logits)
    fail(ErrorCode::InvalidArgument, "classifier needs a logits head");
}

Mat MlpClassifier::grad(const MatRef& x, int t, int y, Vec* log_prob) const {
  if (!net_.time_conditioning())
    return input_gradient(net_, x, nullptr, {y}, log_prob);
  const Mat tf = time_features(sched_, t, x.cols());
  return input_gradient(net_, x, &tf, {y}, log_prob);
}

std::vector<int> MlpClassifier::predict(const MatRef& x) const {
  if (!net_.time_conditioning()) return argmax_columns(forward(net_, x));
  const Mat tf = time_features(sched_, 0, x.cols());
  return argmax_columns(forward(net_, x, &tf));
}

Mat classifier_grad(const MatRef& x, int t, const GuidanceConfig& cfg,
                    const Classifier& clf, const Denoiser* denoiser,
                    const NoiseSchedule& sched, Vec* log_prob) {
  if (t < 1 || t > sched.steps()) fail(ErrorCode::InvalidArgument, "step out of range");
  if (!cfg.use_x0_pred) return clf.grad(x, t, cfg.target_class, log_prob);
  if (!denoiser)
    fail(ErrorCode::MissingHandle, "x0-prediction needs a denoiser");
  return x0_chain_rule(x, t, denoiser->eps(x, t), *denoiser, clf,
                       cfg.target_class, sched, log_prob);
}

Mat guided_mean_normalized(const MatRef& mu, double sigma2, const MatRef& g,
                           double s) {
  require_same_shape(mu, g, "guided_mean: gradient shape");
  return mu + conditioning_normalized(mu, sigma2, g, s);
}

Mat guided_mean_classic(const MatRef& mu, double sigma2, const MatRef& g,
                        double s) {
  require_same_shape(mu, g, "guided_mean: gradient shape");
  return mu + conditioning_classic(sigma2, g, s);
}

GuidedSamples sample_guided(const Denoiser& den, const Classifier& clf,
                            const GuidanceConfig& cfg,
                            const NoiseSchedule& sched, std::uint64_t seed) {
  check_dims(den, clf);
  if (!(cfg.scale >= 0.0)) fail(ErrorCode::InvalidArgument, "scale must be >= 0");
  if (cfg.num_chains < 1) fail(ErrorCode::InvalidArgument, "need >= 1 chain");
  if (cfg.target_class < 0 || cfg.target_class >= clf.num_classes())
    fail(ErrorCode::InvalidArgument, "target class out of range");
  const int d = den.dim();
  const int n = cfg.num_chains;

  std::vector<std::mt19937_64> rngs;
  Mat x(d, n);
  for (int j = 0; j < n; ++j) {
    rngs.push_back(chain_stream(seed, j));
    fill_normal(x.col(j), rngs.back());
  }
  std::vector<AdamState> adam(static_cast<std::size_t>(n),
                              AdamState(d, cfg.adam));

  GuidedSamples out;
  SamplerTrace& tr = out.trace;
  tr.dim = d;
  tr.chains = n;
  tr.scale = cfg.scale;
  tr.variant = cfg.variant;
  Vec z(d);
  for (int t = sched.steps(); t >= 1; --t) {
    for (int snap : cfg.snapshot_steps)
      if (snap == t) tr.snapshots[t] = x;
    const Mat eps = den.eps(x, t);
    const Mat mu = reverse_mean(x, t, eps, sched);
    const double sigma2 = sched.sigma2(t);

    Vec logp;
    Mat g = cfg.use_x0_pred
                ? x0_chain_rule(x, t, eps, den, clf, cfg.target_class, sched, &logp)
                : clf.grad(x, t, cfg.target_class, &logp);
    Vec raw_norm = g.colwise().stableNorm().transpose();
    if (cfg.use_adam) {
      for (int j = 0; j < n; ++j) {
        auto& st = adam[static_cast<std::size_t>(j)];
        if (cfg.variant == GuidanceVariant::Normalized &&
            cfg.adam_placement == AdamPlacement::AfterNormalize) {
          g.col(j) = adam_transform(unit_or_zero(g.col(j)), st);
        } else {
          g.col(j) = adam_transform(g.col(j), st);
        }
      }
    }
    const Mat c = cfg.variant == GuidanceVariant::Normalized
                      ? conditioning_normalized(mu, sigma2, g, cfg.scale)
                      : conditioning_classic(sigma2, g, cfg.scale);
    x = mu + c;
    if (t > 1) {
      const double sd = std::sqrt(sigma2);
      for (int j = 0; j < n; ++j) {
        fill_normal(z, rngs[static_cast<std::size_t>(j)]);
        x.col(j) += sd * z;
      }
    }

    tr.steps.push_back(t);
    tr.sigma2.push_back(sigma2);
    tr.cond_norm.push_back(c.colwise().stableNorm().transpose());
    tr.grad_norm.push_back(std::move(raw_norm));
    tr.applied_norm.push_back(g.colwise().stableNorm().transpose());
    tr.mu_norm.push_back(mu.colwise().norm().transpose());
    tr.logp_target.push_back(std::move(logp));
    tr.cond.push_back(c);
  }
  for (const auto& st : adam) tr.adam_steps.push_back(st.step);
  out.x = std::move(x);
  return out;
}

Mat sample_unguided(const Denoiser& den, int chains, const NoiseSchedule& sched,
                    std::uint64_t seed) {
  if (chains < 1) fail(ErrorCode::InvalidArgument, "need >= 1 chain");
  const int d = den.dim();
  std::vector<std::mt19937_64> rngs;
  Mat x(d, chains);
  for (int j = 0; j < chains; ++j) {
    rngs.push_back(chain_stream(seed, j));
    fill_normal(x.col(j), rngs.back());
  }
  Vec z(d);
  for (int t = sched.steps(); t >= 1; --t) {
    x = reverse_mean(x, t, den.eps(x, t), sched);
    if (t > 1) {
      const double sd = std::sqrt(sched.sigma2(t));
      for (int j = 0; j < chains; ++j) {
        fill_normal(z, rngs[static_cast<std::size_t>(j)]);
        x.col(j) += sd * z;
      }
    }
  }
  return x;
}

}  // namespace guidelab
