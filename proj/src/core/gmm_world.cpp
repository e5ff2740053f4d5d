// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "gmm_world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace guidelab {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Vec& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

Vec normal_vector(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Vec z(d);
  for (int i = 0; i < d; ++i) z[i] = n01(rng);
  return z;
}

}  // namespace

ClassGmm::ClassGmm(std::vector<double> priors, const std::vector<Vec>& means,
                   const std::vector<Mat>& covariances,
                   std::vector<int> labels) {
  if (means.empty()) fail(ErrorCode::InvalidArgument, "GMM needs >= 1 mode");
  if (means.size() != covariances.size())
    fail(ErrorCode::ShapeMismatch, "GMM: one covariance per mean required");
  priors_ = std::move(priors);
  dim_ = static_cast<int>(means.front().size());
  for (std::size_t k = 0; k < means.size(); ++k) {
    const Mat& S = covariances[k];
    if (means[k].size() != dim_ || S.rows() != dim_ || S.cols() != dim_)
      fail(ErrorCode::ShapeMismatch, "GMM: inconsistent mode dimensions");
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      fail(ErrorCode::InvalidArgument, "GMM: covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0))
      fail(ErrorCode::InvalidArgument,
           "GMM: covariance is not positive definite");
    Mode m;
    m.mean = means[k];
    m.eigvecs = es.eigenvectors();
    m.eigvals = es.eigenvalues();
    modes_.push_back(std::move(m));
  }
  finish(std::move(labels));
}

ClassGmm ClassGmm::isotropic(std::vector<double> priors,
                             const std::vector<Vec>& means,
                             const std::vector<double>& variances,
                             std::vector<int> labels) {
  if (means.empty()) fail(ErrorCode::InvalidArgument, "GMM needs >= 1 mode");
  if (means.size() != variances.size())
    fail(ErrorCode::ShapeMismatch, "GMM: one variance per mean required");
  ClassGmm g;
  g.priors_ = std::move(priors);
  g.dim_ = static_cast<int>(means.front().size());
  for (std::size_t k = 0; k < means.size(); ++k) {
    if (means[k].size() != g.dim_)
      fail(ErrorCode::ShapeMismatch, "GMM: inconsistent mode dimensions");
    if (!(variances[k] > 0.0))
      fail(ErrorCode::InvalidArgument, "GMM: variance must be positive");
    Mode m;
    m.mean = means[k];
    m.eigvals = Vec::Constant(1, variances[k]);
    g.modes_.push_back(std::move(m));
  }
  g.finish(std::move(labels));
  return g;
}

void ClassGmm::finish(std::vector<int> labels) {
  const int K = num_classes();
  if (K < 1) fail(ErrorCode::InvalidArgument, "GMM needs >= 1 class");
  if (labels.empty()) {
    labels.resize(modes_.size());
    std::iota(labels.begin(), labels.end(), 0);
  }
  if (labels.size() != modes_.size())
    fail(ErrorCode::ShapeMismatch, "GMM: one label per mode required");

  double total = 0.0;
  for (double p : priors_) {
    if (!(p >= 0.0)) fail(ErrorCode::InvalidArgument, "GMM: negative prior");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    fail(ErrorCode::InvalidArgument, "GMM: priors must sum to 1");

  std::vector<int> count(static_cast<std::size_t>(K), 0);
  for (int l : labels) {
    if (l < 0 || l >= K) fail(ErrorCode::InvalidArgument, "GMM: bad label");
    ++count[static_cast<std::size_t>(l)];
  }
  for (int c : count)
    if (c == 0) fail(ErrorCode::InvalidArgument, "GMM: class without modes");

  for (std::size_t k = 0; k < modes_.size(); ++k) {
    const auto y = static_cast<std::size_t>(labels[k]);
    modes_[k].label = labels[k];
    modes_[k].log_weight = priors_[y] > 0.0
                               ? std::log(priors_[y] / total) -
                                     std::log(static_cast<double>(count[y]))
                               : kNegInf;
  }
}

Vec ClassGmm::solve(int k, double a, const VecRef& u) const {
  const Mode& m = modes_[static_cast<std::size_t>(k)];
  if (m.isotropic()) return u / (a * m.eigvals[0] + 1.0 - a);
  const Vec scale = (a * m.eigvals.array() + (1.0 - a)).inverse().matrix();
  return m.eigvecs * (scale.asDiagonal() * (m.eigvecs.transpose() * u));
}

double ClassGmm::log_det(int k, double a) const {
  const Mode& m = modes_[static_cast<std::size_t>(k)];
  if (m.isotropic()) return dim_ * std::log(a * m.eigvals[0] + 1.0 - a);
  return (a * m.eigvals.array() + (1.0 - a)).log().sum();
}

Vec ClassGmm::cov_times(int k, const VecRef& u) const {
  const Mode& m = modes_[static_cast<std::size_t>(k)];
  if (m.isotropic()) return m.eigvals[0] * u;
  return m.eigvecs * (m.eigvals.asDiagonal() * (m.eigvecs.transpose() * u));
}

Mat ClassGmm::cov_matrix(int k) const {
  const Mode& m = modes_[static_cast<std::size_t>(k)];
  if (m.isotropic()) return m.eigvals[0] * Mat::Identity(dim_, dim_);
  return m.eigvecs * m.eigvals.asDiagonal() * m.eigvecs.transpose();
}

ClassGmm::Eval ClassGmm::evaluate(const VecRef& x, double a) const {
  if (x.size() != dim_) fail(ErrorCode::ShapeMismatch, "GMM: point dimension");
  const int M = num_modes();
  Eval e;
  e.log_joint.resize(M);
  e.scores.resize(dim_, M);
  const double ra = std::sqrt(a);
  for (int k = 0; k < M; ++k) {
    const Mode& m = modes_[static_cast<std::size_t>(k)];
    const Vec delta = x - ra * m.mean;
    const Vec solved = solve(k, a, delta);
    e.log_joint[k] = m.log_weight - 0.5 * delta.dot(solved) -
                     0.5 * log_det(k, a) - 0.5 * dim_ * kLog2Pi;
    e.scores.col(k) = -solved;
  }
  e.log_marginal = log_sum_exp(e.log_joint);
  e.resp = (e.log_joint.array() - e.log_marginal).exp().matrix();
  return e;
}

LabeledPoints sample_data(const ClassGmm& gmm, int n, std::mt19937_64& rng) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "sample_data: n must be >= 1");
  std::discrete_distribution<int> pick_class(gmm.priors().begin(),
                                             gmm.priors().end());
  LabeledPoints out;
  out.x.resize(gmm.dim(), n);
  out.y.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int y = pick_class(rng);
    out.y[static_cast<std::size_t>(i)] = y;
    out.x.col(i) = sample_class(gmm, 1, y, rng);
  }
  return out;
}

Mat sample_class(const ClassGmm& gmm, int n, int y, std::mt19937_64& rng) {
  if (y < 0 || y >= gmm.num_classes())
    fail(ErrorCode::InvalidArgument, "sample_class: class out of range");
  std::vector<int> members;
  for (int k = 0; k < gmm.num_modes(); ++k)
    if (gmm.modes()[static_cast<std::size_t>(k)].label == y)
      members.push_back(k);
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
  Mat x(gmm.dim(), n);
  for (int i = 0; i < n; ++i) {
    const auto& m = gmm.modes()[static_cast<std::size_t>(members[pick(rng)])];
    const Vec z = normal_vector(gmm.dim(), rng);
    if (m.isotropic())
      x.col(i) = m.mean + std::sqrt(m.eigvals[0]) * z;
    else
      x.col(i) =
          m.mean + m.eigvecs * (m.eigvals.array().sqrt() * z.array()).matrix();
  }
  return x;
}

namespace {

Vec class_log_joint(const ClassGmm& gmm, const ClassGmm::Eval& e) {
  Vec out = Vec::Constant(gmm.num_classes(), kNegInf);
  for (int k = 0; k < gmm.num_modes(); ++k) {
    const int y = gmm.modes()[static_cast<std::size_t>(k)].label;
    const double a = out[y], b = e.log_joint[k];
    const double hi = std::max(a, b);
    if (std::isfinite(hi))
      out[y] = hi + std::log(std::exp(a - hi) + std::exp(b - hi));
  }
  return out;
}

}  // namespace

double noised_class_log_density(const ClassGmm& gmm, const VecRef& x, int t,
                                int y, const NoiseSchedule& sched) {
  if (y < 0 || y >= gmm.num_classes())
    fail(ErrorCode::InvalidArgument, "class index out of range");
  const double prior = gmm.priors()[static_cast<std::size_t>(y)];
  if (!(prior > 0.0))
    fail(ErrorCode::Precondition, "class density undefined for zero prior");
  const auto e = gmm.evaluate(x, sched.alpha_bar(t));
  return class_log_joint(gmm, e)[y] - std::log(prior);
}

Vec robust_log_posterior(const ClassGmm& gmm, const VecRef& x, int t,
                         const NoiseSchedule& sched) {
  const auto e = gmm.evaluate(x, sched.alpha_bar(t));
  return class_log_joint(gmm, e).array() - e.log_marginal;
}

Vec nonrobust_log_posterior(const ClassGmm& gmm, const VecRef& x) {
  const auto e = gmm.evaluate(x, 1.0);
  return class_log_joint(gmm, e).array() - e.log_marginal;
}

Vec grad_log_posterior_at(const ClassGmm& gmm, const VecRef& x,
                          double alpha_bar, int y, double* log_prob) {
  if (y < 0 || y >= gmm.num_classes())
    fail(ErrorCode::InvalidArgument, "class index out of range");
  const auto e = gmm.evaluate(x, alpha_bar);
  const Vec cls = class_log_joint(gmm, e);
  if (!std::isfinite(cls[y]))
    fail(ErrorCode::Precondition, "log posterior of a zero-prior class");
  if (log_prob) *log_prob = cls[y] - e.log_marginal;
  Vec within = Vec::Zero(gmm.num_modes());
  for (int k = 0; k < gmm.num_modes(); ++k)
    if (gmm.modes()[static_cast<std::size_t>(k)].label == y)
      within[k] = std::exp(e.log_joint[k] - cls[y]);
  return e.scores * (within - e.resp);
}

Vec grad_log_posterior(const ClassGmm& gmm, const VecRef& x, int t, int y,
                       ClassifierKind kind, const NoiseSchedule& sched) {
  const double a = kind == ClassifierKind::Robust ? sched.alpha_bar(t) : 1.0;
  return grad_log_posterior_at(gmm, x, a, y);
}

Vec exact_score(const ClassGmm& gmm, const VecRef& x, int t,
                const NoiseSchedule& sched) {
  const auto e = gmm.evaluate(x, sched.alpha_bar(t));
  return e.scores * e.resp;
}

Vec exact_eps(const ClassGmm& gmm, const VecRef& x, int t,
              const NoiseSchedule& sched) {
  return -std::sqrt(1.0 - sched.alpha_bar(t)) * exact_score(gmm, x, t, sched);
}

Vec posterior_mean_x0(const ClassGmm& gmm, const VecRef& x, int t,
                      const NoiseSchedule& sched) {
  const double a = sched.alpha_bar(t);
  const auto e = gmm.evaluate(x, a);
  // Per mode: E[x0|x_t, k] = m_k + √ᾱ·S_k·C_k⁻¹(x_t - √ᾱ m_k) = m_k - √ᾱ·S_k·s_k.
  Vec out = Vec::Zero(gmm.dim());
  for (int k = 0; k < gmm.num_modes(); ++k) {
    if (e.resp[k] == 0.0) continue;
    const auto& m = gmm.modes()[static_cast<std::size_t>(k)];
    out += e.resp[k] *
           (m.mean - std::sqrt(a) * gmm.cov_times(k, e.scores.col(k)));
  }
  return out;
}

Vec score_jacobian_vp(const ClassGmm& gmm, const VecRef& x, int t,
                      const VecRef& u, const NoiseSchedule& sched) {
  if (u.size() != gmm.dim())
    fail(ErrorCode::ShapeMismatch, "score_jacobian_vp: vector dimension");
  const double a = sched.alpha_bar(t);
  const auto e = gmm.evaluate(x, a);
  const Vec mean_score = e.scores * e.resp;
  Vec out = -mean_score * mean_score.dot(u);
  for (int k = 0; k < gmm.num_modes(); ++k) {
    if (e.resp[k] == 0.0) continue;
    const auto s = e.scores.col(k);
    out += e.resp[k] * (s * s.dot(u) - gmm.solve(k, a, u));
  }
  return out;
}

ClassGmm planar_world(double radius, double variance) {
  std::vector<Vec> means;
  for (int k = 0; k < 4; ++k) {
    const double ang = M_PI / 4.0 + k * M_PI / 2.0;
    Vec m(2);
    m << radius * std::cos(ang), radius * std::sin(ang);
    means.push_back(m);
  }
  return ClassGmm::isotropic({0.25, 0.25, 0.25, 0.25}, means,
                             std::vector<double>(4, variance));
}

ClassGmm bright_world(const BrightWorldParams& p) {
  if (p.dim < 1 || p.classes < 1 || p.modes_per_class < 1)
    fail(ErrorCode::InvalidArgument, "bright_world: sizes must be positive");
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> n01;
  std::vector<Vec> shifts, templates;
  for (int y = 0; y < p.classes; ++y) {
    Vec s = normal_vector(p.dim, rng);
    shifts.push_back(p.class_shift * s / s.norm());
    templates.push_back(p.template_scale * normal_vector(p.dim, rng));
  }
  std::vector<std::vector<int>> placements;
  for (int j = 0; j < p.modes_per_class; ++j) {
    std::vector<int> perm(static_cast<std::size_t>(p.dim));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    placements.push_back(std::move(perm));
  }
  std::vector<Vec> means;
  std::vector<int> labels;
  for (int y = 0; y < p.classes; ++y) {
    for (const auto& perm : placements) {
      Vec m(p.dim);
      for (int i = 0; i < p.dim; ++i)
        m[i] = p.background + shifts[static_cast<std::size_t>(y)][i] +
               templates[static_cast<std::size_t>(y)]
                        [perm[static_cast<std::size_t>(i)]];
      means.push_back(std::move(m));
      labels.push_back(y);
    }
  }
  const std::vector<double> priors(static_cast<std::size_t>(p.classes),
                                   1.0 / p.classes);
  return ClassGmm::isotropic(priors, means,
                             std::vector<double>(means.size(), p.mode_variance),
                             labels);
}

}  // namespace guidelab
