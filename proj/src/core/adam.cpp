// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "adam.hpp"

#include <cmath>

namespace guidelab {

Vec adam_transform(const VecRef& g, AdamState& s) {
  if (s.step == 0 && s.m.size() == 0) {
    s.m = Vec::Zero(g.size());
    s.v = Vec::Zero(g.size());
  }
  if (g.size() != s.m.size())
    fail(ErrorCode::ShapeMismatch, "adam_transform: gradient shape changed");
  const auto& p = s.params;
  ++s.step;
  s.m = p.beta1 * s.m + (1.0 - p.beta1) * g;
  s.v = p.beta2 * s.v + (1.0 - p.beta2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(p.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(p.beta2, static_cast<double>(s.step));
  return (p.eta * (s.m.array() / c1) /
          ((s.v.array() / c2).sqrt() + p.eps))
      .matrix();
}

}  // namespace guidelab
