// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "sprites.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "binio.hpp"

namespace guidelab {
namespace {

constexpr char kSpriteMagic[8] = {'G', 'L', 'S', 'P', 'R', '\0', '\0', '\0'};
constexpr std::uint32_t kSpriteVersion = 1;
constexpr int kSuper = 4;

using Rgb = std::array<double, 3>;

constexpr Rgb kWhite{1.0, 1.0, 1.0};
constexpr Rgb kRed{0.85, 0.1, 0.1};
constexpr Rgb kBlue{0.1, 0.2, 0.85};
constexpr Rgb kGreen{0.1, 0.65, 0.2};
constexpr Rgb kOrange{1.0, 0.55, 0.05};
constexpr Rgb kDark{0.25, 0.1, 0.0};

// Colour at disc-local coordinates (u, v) in units of the radius, already
// rotated into the pattern frame.
Rgb pattern_colour(int label, double u, double v) {
  switch (label) {
    case 0:
      return kRed;
    case 1:
      return std::cos(std::numbers::pi * 2.5 * u) > 0.3 ? kWhite : kBlue;
    case 2: {
      const double gu = u * 1.6 - std::round(u * 1.6);
      const double gv = v * 1.6 - std::round(v * 1.6);
      return gu * gu + gv * gv < 0.09 ? kWhite : kGreen;
    }
    default: {
      const double r = std::hypot(u, v);
      return r > 0.45 && r < 0.75 ? kDark : kOrange;
    }
  }
}

}  // namespace

void validate(const SpriteConfig& cfg) {
  if (cfg.image_size < 8) fail(ErrorCode::InvalidArgument, "sprites: image_size >= 8");
  if (!(cfg.scale_min > 0.0 && cfg.scale_min <= cfg.scale_max &&
        cfg.scale_max <= 0.5))
    fail(ErrorCode::InvalidArgument, "sprites: scale range must lie in (0, 0.5]");
}

int sprite_dim(const SpriteConfig& cfg) {
  return cfg.image_size * cfg.image_size * kSpriteChannels;
}

Vec render_sprite(const SpriteConfig& cfg, int label, double cx, double cy,
                  double radius, double angle) {
  const int size = cfg.image_size;
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  Vec img(sprite_dim(cfg));
  for (int row = 0; row < size; ++row) {
    for (int col = 0; col < size; ++col) {
      Rgb acc{0.0, 0.0, 0.0};
      int inside = 0;
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          const double px = col + (sx + 0.5) / kSuper;
          const double py = row + (sy + 0.5) / kSuper;
          const double dx = (px - cx) / radius;
          const double dy = (py - cy) / radius;
          const bool in_disc = dx * dx + dy * dy <= 1.0;
          const Rgb c = in_disc ? pattern_colour(label, ca * dx + sa * dy,
                                                 -sa * dx + ca * dy)
                                : kWhite;
          inside += in_disc;
          for (int k = 0; k < 3; ++k) acc[static_cast<std::size_t>(k)] += c[static_cast<std::size_t>(k)];
        }
      }
      for (int k = 0; k < 3; ++k) {
        const double v = inside == 0
                             ? 1.0
                             : 2.0 * acc[static_cast<std::size_t>(k)] / (kSuper * kSuper) - 1.0;
        // Stored at float precision so that files round-trip exactly.
        img[(row * size + col) * kSpriteChannels + k] =
            static_cast<double>(static_cast<float>(std::clamp(v, -1.0, 1.0)));
      }
    }
  }
  return img;
}

SpriteDataset generate_sprites(const SpriteConfig& cfg, int n) {
  validate(cfg);
  if (n < 1) fail(ErrorCode::InvalidArgument, "sprites: n >= 1");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> pick_class(0, kSpriteClasses - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SpriteDataset ds{cfg, {Mat(sprite_dim(cfg), n), std::vector<int>(static_cast<std::size_t>(n))}};
  const double size = cfg.image_size;
  for (int i = 0; i < n; ++i) {
    const int label = pick_class(rng);
    const double scale = cfg.scale_min + (cfg.scale_max - cfg.scale_min) * unit(rng);
    const double radius = 0.5 * scale * size;
    const double cx = radius + (size - 2.0 * radius) * unit(rng);
    const double cy = radius + (size - 2.0 * radius) * unit(rng);
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    ds.data.x.col(i) = render_sprite(cfg, label, cx, cy, radius, angle);
    ds.data.y[static_cast<std::size_t>(i)] = label;
  }
  return ds;
}

std::vector<unsigned char> encode_dataset(const SpriteDataset& ds) {
  validate(ds.cfg);
  const auto dims = static_cast<std::uint32_t>(sprite_dim(ds.cfg));
  if (ds.data.x.rows() != dims ||
      ds.data.y.size() != static_cast<std::size_t>(ds.data.x.cols()))
    fail(ErrorCode::ShapeMismatch, "dataset shape does not match its config");
  binio::Writer w;
  w.put_bytes(std::string_view(kSpriteMagic, sizeof kSpriteMagic));
  w.put<std::uint32_t>(kSpriteVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.cfg.image_size));
  w.put<double>(ds.cfg.scale_min);
  w.put<double>(ds.cfg.scale_max);
  w.put<std::uint64_t>(ds.cfg.seed);
  w.put<std::uint32_t>(kSpriteChannels);
  w.put<std::uint32_t>(kSpriteClasses);
  w.put<std::uint64_t>(static_cast<std::uint64_t>(ds.data.x.cols()));
  w.put<std::uint32_t>(dims);
  for (Eigen::Index j = 0; j < ds.data.x.cols(); ++j)
    for (Eigen::Index i = 0; i < ds.data.x.rows(); ++i)
      w.put<float>(static_cast<float>(ds.data.x(i, j)));
  for (int label : ds.data.y) w.put<std::uint8_t>(static_cast<std::uint8_t>(label));
  return w.bytes();
}

SpriteDataset decode_dataset(const std::vector<unsigned char>& bytes) {
  binio::Reader r(bytes);
  if (r.remaining() < sizeof kSpriteMagic ||
      r.get_bytes(sizeof kSpriteMagic) != std::string(kSpriteMagic, sizeof kSpriteMagic))
    fail(ErrorCode::Format, "not a guidelab sprite dataset");
  const auto version = r.get<std::uint32_t>();
  if (version != kSpriteVersion)
    fail(ErrorCode::Version,
         "unsupported dataset format version " + std::to_string(version));
  SpriteDataset ds;
  ds.cfg.image_size = static_cast<int>(r.get<std::uint32_t>());
  ds.cfg.scale_min = r.get<double>();
  ds.cfg.scale_max = r.get<double>();
  ds.cfg.seed = r.get<std::uint64_t>();
  const auto channels = r.get<std::uint32_t>();
  const auto classes = r.get<std::uint32_t>();
  const auto n = r.get<std::uint64_t>();
  const auto dims = r.get<std::uint32_t>();
  if (channels != kSpriteChannels || classes != kSpriteClasses)
    fail(ErrorCode::Format, "dataset: unsupported channel or class count");
  try {
    validate(ds.cfg);
  } catch (const Error& e) {
    fail(ErrorCode::Format, std::string("dataset: ") + e.what());
  }
  if (dims != static_cast<std::uint32_t>(sprite_dim(ds.cfg)))
    fail(ErrorCode::Format, "dataset: dims do not match image size");
  const std::uint64_t per_item = std::uint64_t{dims} * sizeof(float) + 1;
  if (n == 0 || n > r.remaining() / per_item || n * per_item != r.remaining())
    fail(ErrorCode::Truncated, "dataset: length header does not match payload");
  const auto count = static_cast<Eigen::Index>(n);
  ds.data.x.resize(dims, count);
  for (Eigen::Index j = 0; j < count; ++j)
    for (Eigen::Index i = 0; i < ds.data.x.rows(); ++i)
      ds.data.x(i, j) = static_cast<double>(r.get<float>());
  ds.data.y.resize(static_cast<std::size_t>(n));
  for (auto& label : ds.data.y) {
    label = r.get<std::uint8_t>();
    if (label >= kSpriteClasses) fail(ErrorCode::Format, "dataset: label out of range");
  }
  return ds;
}

void save_dataset(const std::string& path, const SpriteDataset& ds) {
  binio::write_file(path, encode_dataset(ds));
}

SpriteDataset load_dataset(const std::string& path) {
  return decode_dataset(binio::read_file(path));
}

}  // namespace guidelab
