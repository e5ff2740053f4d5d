// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "analysis.hpp"

#include <cmath>
#include <limits>

namespace guidelab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Fitted {
  Vec mean;
  Mat cov;
};

Fitted fit(const MatRef& x) {
  Fitted f;
  f.mean = x.rowwise().mean();
  const Mat centered = x.colwise() - f.mean;
  const double denom = x.cols() > 1 ? static_cast<double>(x.cols() - 1) : 1.0;
  f.cov = centered * centered.transpose() / denom;
  Eigen::SelfAdjointEigenSolver<Mat> es(f.cov, Eigen::EigenvaluesOnly);
  const double top = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() <= 1e-12 * top)
    f.cov.diagonal().array() += 1e-6;
  return f;
}

Mat psd_sqrt(const Mat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  const Vec lam = es.eigenvalues().unaryExpr(
      [](double v) { return v < 1e-10 ? 0.0 : std::sqrt(v); });
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double cosine(const VecRef& a, const VecRef& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return kNaN;
  double c = a.dot(b) / (na * nb);
  if (c > 1.0 && c < 1.0 + 1e-12) c = 1.0;
  if (c < -1.0 && c > -1.0 - 1e-12) c = -1.0;
  return c;
}

CosineSeries cosine_series(const SamplerTrace& trace) {
  if (trace.cond.size() < 2)
    fail(ErrorCode::InvalidArgument, "cosine_series: need >= 2 steps");
  const auto pairs = trace.cond.size() - 1;
  CosineSeries out;
  out.values.resize(static_cast<Eigen::Index>(pairs), trace.chains);
  for (std::size_t i = 0; i < pairs; ++i) {
    const Mat& prev = trace.cond[i];
    const Mat& cur = trace.cond[i + 1];
    CosinePoint p;
    p.t = trace.steps[i + 1];
    double sum = 0.0, sq = 0.0;
    for (int j = 0; j < trace.chains; ++j) {
      const double c = cosine(prev.col(j), cur.col(j));
      out.values(static_cast<Eigen::Index>(i), j) = c;
      if (std::isnan(c)) continue;
      ++p.n_valid;
      sum += c;
      sq += c * c;
    }
    if (p.n_valid > 0) {
      p.mean = sum / p.n_valid;
      p.std = std::sqrt(std::max(0.0, sq / p.n_valid - p.mean * p.mean));
    } else {
      p.mean = kNaN;
      p.std = kNaN;
    }
    out.points.push_back(p);
  }
  return out;
}

double mean_cosine(const CosineSeries& series, std::size_t begin,
                   std::size_t end) {
  end = std::min(end, series.points.size());
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = begin; i < end; ++i) {
    if (series.points[i].n_valid == 0) continue;
    sum += series.points[i].mean;
    ++count;
  }
  return count > 0 ? sum / count : kNaN;
}

double frechet_distance(const MatRef& a, const MatRef& b) {
  if (a.cols() == 0 || b.cols() == 0)
    fail(ErrorCode::InvalidArgument, "frechet_distance: empty set");
  if (a.rows() != b.rows())
    fail(ErrorCode::ShapeMismatch, "frechet_distance: dimension mismatch");
  const Fitted fa = fit(a);
  const Fitted fb = fit(b);
  const Mat ra = psd_sqrt(fa.cov);
  Mat inner = ra * fb.cov * ra;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(inner, Eigen::EigenvaluesOnly);
  double tr_sqrt = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    tr_sqrt += std::sqrt(std::max(0.0, es.eigenvalues()[i]));  // rounding can go negative
  const double d2 = (fa.mean - fb.mean).squaredNorm() + fa.cov.trace() +
                    fb.cov.trace() - 2.0 * tr_sqrt;
  return std::max(0.0, d2);
}

double guidance_accuracy(const MatRef& samples, int y, const Classifier& judge) {
  if (samples.cols() == 0)
    fail(ErrorCode::InvalidArgument, "guidance_accuracy: no samples");
  const auto pred = judge.predict(samples);
  std::size_t hits = 0;
  for (int p : pred) hits += p == y;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace guidelab
