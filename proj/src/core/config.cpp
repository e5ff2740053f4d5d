// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace guidelab {
namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  fail(ErrorCode::Config, key.empty() ? what : key + ": " + what);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Nested numeric arrays.
struct Node {
  bool leaf = true;
  double value = 0.0;
  std::vector<Node> items;
};

class ArrayParser {
 public:
  ArrayParser(const std::string& key, std::string_view text)
      : key_(key), s_(text) {}

  Node parse() {
    Node n = value();
    skip();
    if (pos_ != s_.size()) config_error(key_, "trailing characters in array");
    return n;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' ||
                                s_[pos_] == '\n' || s_[pos_] == '\r'))
      ++pos_;
  }
  Node value() {
    skip();
    if (pos_ < s_.size() && s_[pos_] == '[') {
      ++pos_;
      Node n;
      n.leaf = false;
      skip();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return n;
      }
      for (;;) {
        n.items.push_back(value());
        skip();
        if (pos_ >= s_.size()) config_error(key_, "unterminated array");
        if (s_[pos_] == ']') {
          ++pos_;
          return n;
        }
        if (s_[pos_] != ',') config_error(key_, "expected ',' in array");
        ++pos_;
      }
    }
    const auto start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' &&
           s_[pos_] != ' ' && s_[pos_] != '\t' && s_[pos_] != '\n')
      ++pos_;
    Node n;
    const auto tok = s_.substr(start, pos_ - start);
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), n.value);
    if (tok.empty() || ec != std::errc() || p != tok.data() + tok.size())
      config_error(key_, "bad number '" + std::string(tok) + "'");
    return n;
  }

  const std::string& key_;
  std::string_view s_;
  std::size_t pos_ = 0;
};

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size())
    config_error(key, "expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size())
    config_error(key, "expected an integer, got '" + v + "'");
  return out;
}

int to_int32(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  if (x < INT32_MIN || x > INT32_MAX) config_error(key, "integer out of range");
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size())
    config_error(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  config_error(key, "expected true or false, got '" + v + "'");
}

std::string to_string(const std::string& key, const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
    return v.substr(1, v.size() - 2);
  if (v.empty()) config_error(key, "empty value");
  return v;
}

std::vector<double> to_vec1(const std::string& key, const std::string& v) {
  const Node n = ArrayParser(key, v).parse();
  if (n.leaf) config_error(key, "expected an array");
  std::vector<double> out;
  for (const auto& it : n.items) {
    if (!it.leaf) config_error(key, "expected a flat array");
    out.push_back(it.value);
  }
  return out;
}

std::vector<int> to_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (double x : to_vec1(key, v)) {
    if (x != std::floor(x) || std::abs(x) > 1e9) config_error(key, "expected integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

std::vector<std::vector<double>> to_vec2(const std::string& key,
                                         const std::string& v) {
  const Node n = ArrayParser(key, v).parse();
  if (n.leaf) config_error(key, "expected a nested array");
  std::vector<std::vector<double>> out;
  for (const auto& row : n.items) {
    if (row.leaf) config_error(key, "expected an array of arrays");
    auto& r = out.emplace_back();
    for (const auto& it : row.items) {
      if (!it.leaf) config_error(key, "array nested too deeply");
      r.push_back(it.value);
    }
  }
  return out;
}

std::vector<std::vector<std::vector<double>>> to_vec3(const std::string& key,
                                                      const std::string& v) {
  const Node n = ArrayParser(key, v).parse();
  if (n.leaf) config_error(key, "expected a nested array");
  std::vector<std::vector<std::vector<double>>> out;
  for (const auto& mat : n.items) {
    if (mat.leaf) config_error(key, "expected an array of matrices");
    auto& m = out.emplace_back();
    for (const auto& row : mat.items) {
      if (row.leaf) config_error(key, "expected matrix rows");
      auto& r = m.emplace_back();
      for (const auto& it : row.items) {
        if (!it.leaf) config_error(key, "array nested too deeply");
        r.push_back(it.value);
      }
    }
  }
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F fmt) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ", ";
    s += fmt(xs[i]);
  }
  return s + "]";
}

std::string ints_text(const std::vector<int>& xs) {
  return join(xs, [](int x) { return std::to_string(x); });
}
std::string doubles_text(const std::vector<double>& xs) {
  return join(xs, fmt_double);
}

std::string quote(const std::string& s) {
  return s.find_first_of(" \t#=") == std::string::npos && !s.empty()
             ? s
             : "\"" + s + "\"";
}

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename E, std::size_t N>
using Names = std::array<std::pair<const char*, E>, N>;

template <typename E, std::size_t N>
E to_enum(const std::string& key, const std::string& v, const Names<E, N>& names) {
  for (const auto& [name, e] : names)
    if (v == name) return e;
  config_error(key, "unknown value '" + v + "'");
}

template <typename E, std::size_t N>
std::string from_enum(E e, const Names<E, N>& names) {
  for (const auto& [name, x] : names)
    if (x == e) return name;
  return "?";
}

constexpr Names<WorldKind, 2> WorldKind_names{
    {{"gmm", WorldKind::Gmm}, {"sprites", WorldKind::Sprites}}};
constexpr Names<VarianceKind, 2> VarianceKind_names{
    {{"posterior", VarianceKind::Posterior}, {"beta", VarianceKind::Beta}}};
constexpr Names<GuidanceVariant, 2> GuidanceVariant_names{
    {{"normalized", GuidanceVariant::Normalized}, {"classic", GuidanceVariant::Classic}}};
constexpr Names<AdamPlacement, 2> AdamPlacement_names{
    {{"before_normalize", AdamPlacement::BeforeNormalize},
     {"after_normalize", AdamPlacement::AfterNormalize}}};
constexpr Names<GmmPreset, 3> GmmPreset_names{
    {{"bright", GmmPreset::Bright}, {"planar", GmmPreset::Planar}, {"custom", GmmPreset::Custom}}};
constexpr Names<Activation, 2> Activation_names{
    {{"silu", Activation::Silu}, {"tanh", Activation::Tanh}}};

void add_train_fields(std::vector<Field>& f, const char* prefix,
                      TrainConfig ExperimentConfig::*member, bool classifier) {
  const std::string p = prefix;
  f.push_back({p + "epochs",
               [=](auto& c, auto& v) { (c.*member).epochs = to_int32(p + "epochs", v); },
               [=](auto& c) { return std::to_string((c.*member).epochs); }});
  f.push_back({p + "batch_size",
               [=](auto& c, auto& v) { (c.*member).batch_size = to_int32(p + "batch_size", v); },
               [=](auto& c) { return std::to_string((c.*member).batch_size); }});
  f.push_back({p + "learning_rate",
               [=](auto& c, auto& v) { (c.*member).learning_rate = to_double(p + "learning_rate", v); },
               [=](auto& c) { return fmt_double((c.*member).learning_rate); }});
  f.push_back({p + "seed",
               [=](auto& c, auto& v) { (c.*member).seed = to_u64(p + "seed", v); },
               [=](auto& c) { return std::to_string((c.*member).seed); }});
  f.push_back({p + "hidden",
               [=](auto& c, auto& v) { (c.*member).hidden = to_ints(p + "hidden", v); },
               [=](auto& c) { return ints_text((c.*member).hidden); }});
  f.push_back({p + "activation",
               [=](auto& c, auto& v) {
                 (c.*member).activation = to_enum(p + "activation", v, Activation_names);
               },
               [=](auto& c) {
                 return from_enum((c.*member).activation, Activation_names);
               }});
  if (!classifier) {
    f.push_back({p + "residual",
                 [=](auto& c, auto& v) { (c.*member).residual = to_bool(p + "residual", v); },
                 [=](auto& c) { return std::string((c.*member).residual ? "true" : "false"); }});
    return;
  }
  f.push_back({p + "early_stop_accuracy",
               [=](auto& c, auto& v) {
                 (c.*member).early_stop_accuracy = to_double(p + "early_stop_accuracy", v);
               },
               [=](auto& c) { return fmt_double((c.*member).early_stop_accuracy); }});
  f.push_back({p + "time_conditioning",
               [=](auto& c, auto& v) {
                 (c.*member).time_conditioning = to_bool(p + "time_conditioning", v);
               },
               [=](auto& c) { return std::string((c.*member).time_conditioning ? "true" : "false"); }});
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto b = [](bool v) { return std::string(v ? "true" : "false"); };
#define GL_INT(k, m) \
  f.push_back({k, [](auto& c, auto& v) { c.m = to_int32(k, v); }, [](auto& c) { return std::to_string(c.m); }})
#define GL_U64(k, m) \
  f.push_back({k, [](auto& c, auto& v) { c.m = to_u64(k, v); }, [](auto& c) { return std::to_string(c.m); }})
#define GL_DBL(k, m) \
  f.push_back({k, [](auto& c, auto& v) { c.m = to_double(k, v); }, [](auto& c) { return fmt_double(c.m); }})
#define GL_BOOL(k, m) \
  f.push_back({k, [](auto& c, auto& v) { c.m = to_bool(k, v); }, [b](auto& c) { return b(c.m); }})
#define GL_STR(k, m) \
  f.push_back({k, [](auto& c, auto& v) { c.m = to_string(k, v); }, [](auto& c) { return quote(c.m); }})
#define GL_ENUMF(k, m, T)                                                  \
  f.push_back({k, [](auto& c, auto& v) { c.m = to_enum(k, v, T##_names); }, \
               [](auto& c) { return from_enum(c.m, T##_names); }})

    GL_ENUMF("world", world, WorldKind);
    GL_INT("steps", steps);
    GL_DBL("beta_start", beta_start);
    GL_DBL("beta_end", beta_end);
    GL_ENUMF("variance_kind", variance_kind, VarianceKind);
    GL_DBL("scale", scale);
    GL_ENUMF("variant", variant, GuidanceVariant);
    GL_ENUMF("adam_placement", adam_placement, AdamPlacement);
    GL_INT("target_class", target_class);
    GL_INT("chains", chains);
    f.push_back({"cells", [](auto& c, auto& v) { c.cells = to_ints("cells", v); },
                 [](auto& c) { return ints_text(c.cells); }});
    GL_INT("cell", cell);
    f.push_back({"sweep_scales", [](auto& c, auto& v) { c.sweep_scales = to_vec1("sweep_scales", v); },
                 [](auto& c) { return doubles_text(c.sweep_scales); }});
    f.push_back({"snapshot_steps",
                 [](auto& c, auto& v) { c.snapshot_steps = to_ints("snapshot_steps", v); },
                 [](auto& c) { return ints_text(c.snapshot_steps); }});
    GL_U64("seed", seed);
    GL_INT("repeats", repeats);
    GL_INT("fid_samples", fid_samples);
    GL_U64("reference_seed", reference_seed);
    GL_STR("out_dir", out_dir);
    GL_BOOL("plots", plots);
    GL_BOOL("timing", timing);

    GL_ENUMF("gmm_preset", gmm_preset, GmmPreset);
    GL_INT("gmm_dim", bright.dim);
    GL_INT("gmm_classes", bright.classes);
    GL_INT("gmm_modes_per_class", bright.modes_per_class);
    GL_DBL("gmm_class_shift", bright.class_shift);
    GL_DBL("gmm_template_scale", bright.template_scale);
    GL_DBL("gmm_mode_variance", bright.mode_variance);
    GL_DBL("gmm_background", bright.background);
    GL_U64("gmm_seed", bright.seed);
    GL_DBL("gmm_radius", planar_radius);
    GL_DBL("gmm_variance", planar_variance);
    f.push_back({"gmm_priors", [](auto& c, auto& v) { c.gmm_priors = to_vec1("gmm_priors", v); },
                 [](auto& c) { return doubles_text(c.gmm_priors); }});
    f.push_back({"gmm_means", [](auto& c, auto& v) { c.gmm_means = to_vec2("gmm_means", v); },
                 [](auto& c) {
                   return join(c.gmm_means, [](const auto& r) { return doubles_text(r); });
                 }});
    f.push_back({"gmm_covariances",
                 [](auto& c, auto& v) { c.gmm_covariances = to_vec3("gmm_covariances", v); },
                 [](auto& c) {
                   return join(c.gmm_covariances, [](const auto& m) {
                     return join(m, [](const auto& r) { return doubles_text(r); });
                   });
                 }});
    f.push_back({"gmm_labels", [](auto& c, auto& v) { c.gmm_labels = to_ints("gmm_labels", v); },
                 [](auto& c) { return ints_text(c.gmm_labels); }});

    GL_INT("sprite_size", sprite.image_size);
    GL_DBL("sprite_scale_min", sprite.scale_min);
    GL_DBL("sprite_scale_max", sprite.scale_max);
    GL_U64("sprite_seed", sprite.seed);
    GL_INT("data_count", data_count);
    GL_STR("data_file", data_file);
    GL_STR("classifier_clean_file", classifier_clean_file);
    GL_STR("classifier_noisy_file", classifier_noisy_file);
    GL_STR("denoiser_file", denoiser_file);
#undef GL_INT
#undef GL_U64
#undef GL_DBL
#undef GL_BOOL
#undef GL_STR
#undef GL_ENUMF
    add_train_fields(f, "clf_", &ExperimentConfig::classifier_train, true);
    add_train_fields(f, "den_", &ExperimentConfig::denoiser_train, false);
    return f;
  }();
  return table;
}

bool brackets_open(const std::string& s) {
  int depth = 0;
  bool quoted = false;
  for (char ch : s) {
    if (ch == '"') quoted = !quoted;
    if (quoted) continue;
    depth += ch == '[';
    depth -= ch == ']';
  }
  return depth > 0;
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.denoiser_train.hidden = {256, 256};
  c.denoiser_train.epochs = 60;
  c.denoiser_train.batch_size = 128;
  c.denoiser_train.residual = true;
  return c;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key,
                   const std::string& value) {
  for (const auto& f : fields())
    if (key == f.key) return f.set(cfg, trim(value));
  config_error("", "unknown key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg = default_config();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      config_error("", "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    while (brackets_open(value)) {
      if (!std::getline(in, line))
        config_error(key, "unterminated array at end of file");
      ++lineno;
      value += " " + trim(strip_comment(line));
    }
    if (key.empty()) config_error("", "line " + std::to_string(lineno) + ": empty key");
    apply_setting(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) {
    const std::string k = f.key;
    if (cfg.gmm_preset != GmmPreset::Custom && k.rfind("gmm_", 0) == 0 &&
        (k == "gmm_priors" || k == "gmm_means" || k == "gmm_covariances" ||
         k == "gmm_labels"))
      continue;
    out += k + " = " + f.get(cfg) + "\n";
  }
  return out;
}

void validate(const ExperimentConfig& c) {
  if (c.steps < 1) config_error("steps", "must be >= 1");
  if (!(c.beta_start > 0.0 && c.beta_start <= c.beta_end && c.beta_end < 1.0))
    config_error("beta_start", "need 0 < beta_start <= beta_end < 1");
  if (!(c.scale >= 0.0)) config_error("scale", "must be >= 0");
  if (c.chains < 1) config_error("chains", "must be >= 1");
  if (c.target_class < 0) config_error("target_class", "must be >= 0");
  for (int cell : c.cells)
    if (cell < 0 || cell > 7) config_error("cells", "cell indices are 0..7");
  if (c.cell < 0 || c.cell > 7) config_error("cell", "cell index is 0..7");
  if (c.repeats < 1) config_error("repeats", "must be >= 1");
  if (c.fid_samples < 2) config_error("fid_samples", "must be >= 2");
  for (int t : c.snapshot_steps)
    if (t < 1 || t > c.steps) config_error("snapshot_steps", "steps are 1..steps");
  for (const TrainConfig* t : {&c.classifier_train, &c.denoiser_train}) {
    if (t->epochs < 1 || t->batch_size < 1) config_error("", "training epochs and batch size must be >= 1");
    if (!(t->learning_rate > 0.0)) config_error("", "learning rate must be > 0");
    for (int h : t->hidden)
      if (h < 1) config_error("", "hidden widths must be >= 1");
  }
  if (!(c.classifier_train.early_stop_accuracy > 0.0 &&
        c.classifier_train.early_stop_accuracy <= 1.0))
    config_error("clf_early_stop_accuracy", "must lie in (0, 1]");
  if (c.data_count < 2) config_error("data_count", "must be >= 2");
  try {
    validate(c.sprite);
  } catch (const Error& e) {
    config_error("", e.what());
  }
}

NoiseSchedule make_schedule(const ExperimentConfig& c) {
  return NoiseSchedule::linear(c.steps, c.beta_start, c.beta_end, c.variance_kind);
}

ClassGmm make_gmm(const ExperimentConfig& c) {
  switch (c.gmm_preset) {
    case GmmPreset::Bright:
      return bright_world(c.bright);
    case GmmPreset::Planar:
      return planar_world(c.planar_radius, c.planar_variance);
    case GmmPreset::Custom:
      break;
  }
  if (c.gmm_means.empty()) config_error("gmm_means", "custom world needs means");
  if (c.gmm_covariances.size() != c.gmm_means.size())
    config_error("gmm_covariances", "one covariance per mean");
  std::vector<Vec> means;
  std::vector<Mat> covs;
  const auto d = static_cast<Eigen::Index>(c.gmm_means.front().size());
  for (std::size_t k = 0; k < c.gmm_means.size(); ++k) {
    if (static_cast<Eigen::Index>(c.gmm_means[k].size()) != d)
      config_error("gmm_means", "inconsistent dimensions");
    means.push_back(Eigen::Map<const Vec>(c.gmm_means[k].data(), d));
    const auto& rows = c.gmm_covariances[k];
    if (static_cast<Eigen::Index>(rows.size()) != d)
      config_error("gmm_covariances", "covariance must be d x d");
    Mat S(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != d)
        config_error("gmm_covariances", "covariance must be d x d");
      for (Eigen::Index j = 0; j < d; ++j)
        S(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    covs.push_back(std::move(S));
  }
  return ClassGmm(c.gmm_priors, means, covs, c.gmm_labels);
}

std::string artifact_path(const ExperimentConfig& cfg, const std::string& file) {
  const std::filesystem::path p(file);
  if (p.is_absolute()) return p.string();
  return (std::filesystem::path(cfg.out_dir) / p).string();
}

}  // namespace guidelab
