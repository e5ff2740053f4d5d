// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "common.hpp"

namespace guidelab {

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eta = 1.0;
  double eps = 1e-8;
};

/// Moment estimates for one gradient stream. Shape is fixed by the first
/// gradient seen unless constructed with an explicit size.
struct AdamState {
  AdamState() = default;
  AdamState(Eigen::Index size, AdamParams p = {})
      : params(p), m(Vec::Zero(size)), v(Vec::Zero(size)) {}

  AdamParams params;
  Vec m;
  Vec v;
  long step = 0;
};

/// Advances the state with g and returns η·m̂/(√v̂ + eps).
Vec adam_transform(const VecRef& g, AdamState& state);

}  // namespace guidelab
