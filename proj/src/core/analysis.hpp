// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "common.hpp"
#include "guidance.hpp"

namespace guidelab {

struct CosinePoint {
  int t = 0;  // cosine between c_{t+1} and c_t
  double mean = 0.0;
  double std = 0.0;
  int n_valid = 0;
};

struct CosineSeries {
  std::vector<CosinePoint> points;  // t descending
  /// Per-pair cosines, row = pair index, column = chain; NaN where either
  /// conditioning term is zero.
  Mat values;
};

CosineSeries cosine_series(const SamplerTrace& trace);

/// Mean of the per-pair batch means over pairs [begin, end) of the series,
/// skipping pairs with no valid chain.
double mean_cosine(const CosineSeries& series, std::size_t begin,
                   std::size_t end);

/// Cosine of two vectors; NaN when either is zero. Clamped to [-1, 1] only
/// when rounding pushes it past the bound by less than 1e-12.
double cosine(const VecRef& a, const VecRef& b);

/// Squared Fréchet distance between Gaussians fitted to two point sets
/// (one point per column).
double frechet_distance(const MatRef& a, const MatRef& b);

double guidance_accuracy(const MatRef& samples, int y, const Classifier& judge);

}  // namespace guidelab
