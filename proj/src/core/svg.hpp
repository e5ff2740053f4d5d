// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "analysis.hpp"

namespace guidelab {

struct PlotSeries {
  std::string label;
  const CosineSeries* series = nullptr;
};

/// Cosine mean against t (descending left to right) with a ±std band per
/// series, y fixed to [-1, 1].
std::string cosine_plot_svg(const std::vector<PlotSeries>& series,
                            const std::string& title);

}  // namespace guidelab
