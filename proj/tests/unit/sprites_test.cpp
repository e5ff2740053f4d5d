// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <filesystem>

#include "sprites.hpp"

namespace guidelab {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

// Pixel (row, col) channel c of a flattened height × width × channel image.
double px(const Vec& img, int size, int row, int col, int c) {
  return img((row * size + col) * kSpriteChannels + c);
}

TEST(Sprites, ShapeRangeAndDeterminism) {
  SpriteConfig cfg;
  const SpriteDataset a = generate_sprites(cfg, 200);
  EXPECT_EQ(sprite_dim(cfg), 16 * 16 * 3);
  EXPECT_EQ(a.data.x.rows(), sprite_dim(cfg));
  EXPECT_EQ(a.data.x.cols(), 200);
  EXPECT_LE(a.data.x.maxCoeff(), 1.0);
  EXPECT_GE(a.data.x.minCoeff(), -1.0);
  const SpriteDataset b = generate_sprites(cfg, 200);
  EXPECT_EQ(a.data.x, b.data.x);
  EXPECT_EQ(a.data.y, b.data.y);
  cfg.seed = 2;
  EXPECT_NE(generate_sprites(cfg, 200).data.x, a.data.x);
}

TEST(Sprites, AllClassesAppear) {
  const SpriteDataset ds = generate_sprites(SpriteConfig{}, 400);
  std::array<int, kSpriteClasses> counts{};
  for (int y : ds.data.y) {
    ASSERT_GE(y, 0);
    ASSERT_LT(y, kSpriteClasses);
    ++counts[static_cast<std::size_t>(y)];
  }
  for (int c : counts) EXPECT_GT(c, 60);
}

TEST(Sprites, WhiteBackgroundAndClassColours) {
  const SpriteConfig cfg;
  const int n = cfg.image_size;
  for (int label = 0; label < kSpriteClasses; ++label) {
    const Vec img = render_sprite(cfg, label, 8.0, 8.0, 3.5, 0.0);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(px(img, n, 0, 0, c), 1.0);
  }
  const Vec red = render_sprite(cfg, 0, 8.0, 8.0, 3.5, 0.0);
  EXPECT_GT(px(red, n, 8, 8, 0), 0.5);
  EXPECT_LT(px(red, n, 8, 8, 1), -0.5);
  EXPECT_LT(px(red, n, 8, 8, 2), -0.5);
}

TEST(Sprites, PatternsDifferFromSolid) {
  const SpriteConfig cfg;
  for (int label = 1; label < kSpriteClasses; ++label) {
    const Vec img = render_sprite(cfg, label, 8.0, 8.0, 4.0, 0.3);
    double lo = 1, hi = -1;
    for (int r = 5; r < 11; ++r)
      for (int c = 5; c < 11; ++c) {
        const double v = px(img, cfg.image_size, r, c, 1);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    EXPECT_GT(hi - lo, 0.3) << "class " << label << " has no visible texture";
  }
}

TEST(Sprites, RejectsBadConfig) {
  SpriteConfig cfg;
  cfg.image_size = 4;
  EXPECT_THROW(validate(cfg), Error);
  cfg = SpriteConfig{};
  cfg.scale_min = 0.6;
  EXPECT_THROW(validate(cfg), Error);
  EXPECT_THROW(generate_sprites(SpriteConfig{}, 0), Error);
}

TEST(Sprites, EncodeDecodeRoundTrip) {
  SpriteConfig cfg;
  cfg.image_size = 8;
  const SpriteDataset ds = generate_sprites(cfg, 30);
  const auto bytes = encode_dataset(ds);
  const SpriteDataset back = decode_dataset(bytes);
  EXPECT_EQ(back.cfg.image_size, 8);
  EXPECT_EQ(back.data.y, ds.data.y);
  EXPECT_EQ(back.data.x, ds.data.x);  // pixels are float-exact
  EXPECT_EQ(encode_dataset(back), bytes);
}

TEST(Sprites, DecodeReportsCorruption) {
  SpriteConfig cfg;
  cfg.image_size = 8;
  const auto bytes = encode_dataset(generate_sprites(cfg, 5));
  auto bad = bytes;
  bad[0] = 'Z';
  EXPECT_EQ(code_of([&] { decode_dataset(bad); }), ErrorCode::Format);
  auto shortened = bytes;
  shortened.pop_back();
  EXPECT_EQ(code_of([&] { decode_dataset(shortened); }), ErrorCode::Truncated);
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_EQ(code_of([&] { decode_dataset(longer); }), ErrorCode::Truncated);
}

TEST(Sprites, SaveLoadFile) {
  const auto path = std::filesystem::temp_directory_path() / "guidelab_sprites_test.bin";
  SpriteConfig cfg;
  cfg.image_size = 8;
  const SpriteDataset ds = generate_sprites(cfg, 12);
  save_dataset(path.string(), ds);
  EXPECT_EQ(load_dataset(path.string()).data.x, ds.data.x);
  std::filesystem::remove(path);
  EXPECT_EQ(code_of([&] { load_dataset(path.string()); }), ErrorCode::Io);
}

}  // namespace
}  // namespace guidelab
