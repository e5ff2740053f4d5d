// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"
#include "gmm_world.hpp"

namespace guidelab {

inline constexpr int kSpriteChannels = 3;
inline constexpr int kSpriteClasses = 4;

/// Disc diameter is drawn from [scale_min, scale_max]·image_size.
struct SpriteConfig {
  int image_size = 16;
  double scale_min = 0.3;
  double scale_max = 0.5;
  std::uint64_t seed = 1;
};

/// Images are flattened height × width × channel (channel fastest), values
/// in [-1, 1] with white background at +1.
struct SpriteDataset {
  SpriteConfig cfg;
  LabeledPoints data;
};

void validate(const SpriteConfig& cfg);
int sprite_dim(const SpriteConfig& cfg);

/// Classes: 0 solid red, 1 blue with white stripes, 2 green with white dots,
/// 3 orange with a dark ring.
SpriteDataset generate_sprites(const SpriteConfig& cfg, int n);

/// Renders one sprite; angle rotates the pattern.
Vec render_sprite(const SpriteConfig& cfg, int label, double cx, double cy,
                  double radius, double angle);

std::vector<unsigned char> encode_dataset(const SpriteDataset& ds);
SpriteDataset decode_dataset(const std::vector<unsigned char>& bytes);
void save_dataset(const std::string& path, const SpriteDataset& ds);
SpriteDataset load_dataset(const std::string& path);

}  // namespace guidelab
