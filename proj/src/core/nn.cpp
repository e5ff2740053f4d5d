// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binio.hpp"

namespace guidelab {
namespace {

constexpr char kMlpMagic[8] = {'G', 'L', 'M', 'L', 'P', '\0', '\0', '\0'};
constexpr std::uint32_t kMlpVersion = 1;

Mat activate(Activation act, const Mat& z) {
  if (act == Activation::Tanh) return z.array().tanh().matrix();
  return (z.array() / (1.0 + (-z.array()).exp())).matrix();
}

Mat activate_grad(Activation act, const Mat& z) {
  if (act == Activation::Tanh) return (1.0 - z.array().tanh().square()).matrix();
  const auto sig = 1.0 / (1.0 + (-z.array()).exp());
  return (sig * (1.0 + z.array() * (1.0 - sig))).matrix();
}

Mat stack_input(const Mlp& net, const MatRef& x, const Mat* tfeat) {
  if (x.rows() != net.input_dim())
    fail(ErrorCode::ShapeMismatch, "mlp: input width mismatch");
  if (!net.time_conditioning()) {
    if (tfeat) fail(ErrorCode::InvalidArgument, "mlp: net is not time-conditioned");
    return x;
  }
  if (!tfeat) fail(ErrorCode::InvalidArgument, "mlp: time features required");
  if (tfeat->rows() != kTimeFeatures || tfeat->cols() != x.cols())
    fail(ErrorCode::ShapeMismatch, "mlp: time feature shape");
  Mat in(net.widths().front(), x.cols());
  in.topRows(x.rows()) = x;
  in.bottomRows(kTimeFeatures) = *tfeat;
  return in;
}

std::vector<std::size_t> shuffled(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

Mat gather(const MatRef& x, const std::vector<std::size_t>& idx,
           std::size_t begin, std::size_t end) {
  Mat out(x.rows(), static_cast<Eigen::Index>(end - begin));
  for (std::size_t i = begin; i < end; ++i)
    out.col(static_cast<Eigen::Index>(i - begin)) =
        x.col(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Mat normal_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Mat z(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = n01(rng);
  return z;
}

std::vector<int> widths_for(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

// Noised copy of x at per-column uniform t; returns the steps used.
Mat noise_uniform(const MatRef& x, const NoiseSchedule& sched,
                  std::mt19937_64& rng, std::vector<int>& ts, Mat* eps_out) {
  std::uniform_int_distribution<int> pick_t(1, sched.steps());
  ts.resize(static_cast<std::size_t>(x.cols()));
  for (auto& t : ts) t = pick_t(rng);
  Mat eps = normal_matrix(x.rows(), x.cols(), rng);
  Mat xt(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double ab = sched.alpha_bar(ts[static_cast<std::size_t>(j)]);
    xt.col(j) = std::sqrt(ab) * x.col(j) + std::sqrt(1.0 - ab) * eps.col(j);
  }
  if (eps_out) *eps_out = std::move(eps);
  return xt;
}

}  // namespace

Mlp::Mlp(std::vector<int> widths, Activation act, Head head,
         bool time_conditioning, bool residual)
    : widths_(std::move(widths)),
      act_(act),
      head_(head),
      time_conditioning_(time_conditioning),
      residual_(residual) {
  if (widths_.size() < 2) fail(ErrorCode::InvalidArgument, "mlp needs >= 1 layer");
  for (int w : widths_)
    if (w < 1) fail(ErrorCode::InvalidArgument, "mlp widths must be positive");
  if (time_conditioning_ && widths_.front() <= kTimeFeatures)
    fail(ErrorCode::InvalidArgument, "mlp input too narrow for time features");
  if (residual_ && (head_ != Head::Regression || output_dim() != input_dim()))
    fail(ErrorCode::InvalidArgument,
         "residual mlp needs a regression head with output width = input width");
  params_ = Vec::Zero(static_cast<Eigen::Index>(offset(num_layers())));
}

Mlp Mlp::random(std::vector<int> widths, Activation act, Head head,
                bool time_conditioning, std::mt19937_64& rng, bool residual) {
  Mlp net(std::move(widths), act, head, time_conditioning, residual);
  for (int l = 0; l < net.num_layers(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(net.widths_[l]));
    auto W = net.weight(l);
    W = scale * normal_matrix(W.rows(), W.cols(), rng);
  }
  return net;
}

std::size_t Mlp::offset(int layer) const {
  std::size_t off = 0;
  for (int l = 0; l < layer; ++l)
    off += static_cast<std::size_t>(widths_[l + 1]) * (widths_[l] + 1);
  return off;
}

Eigen::Map<const Mat> Mlp::weight(int l) const {
  return {params_.data() + offset(l), widths_[l + 1], widths_[l]};
}
Eigen::Map<const Vec> Mlp::bias(int l) const {
  return {params_.data() + offset(l) + widths_[l + 1] * widths_[l],
          widths_[l + 1]};
}
Eigen::Map<Mat> Mlp::weight(int l) {
  return {params_.data() + offset(l), widths_[l + 1], widths_[l]};
}
Eigen::Map<Vec> Mlp::bias(int l) {
  return {params_.data() + offset(l) + widths_[l + 1] * widths_[l],
          widths_[l + 1]};
}

Mat time_features(const NoiseSchedule& sched, int t, Eigen::Index n) {
  Mat f(kTimeFeatures, n);
  f.row(0).setConstant(static_cast<double>(t) / sched.steps());
  f.row(1).setConstant(sched.alpha_bar(t));
  return f;
}

Mat time_features(const NoiseSchedule& sched, const std::vector<int>& ts) {
  Mat f(kTimeFeatures, static_cast<Eigen::Index>(ts.size()));
  for (std::size_t j = 0; j < ts.size(); ++j) {
    f(0, static_cast<Eigen::Index>(j)) =
        static_cast<double>(ts[j]) / sched.steps();
    f(1, static_cast<Eigen::Index>(j)) = sched.alpha_bar(ts[j]);
  }
  return f;
}

Mat forward(const Mlp& net, const MatRef& x, const Mat* tfeat, Tape* tape) {
  Mat h = stack_input(net, x, tfeat);
  if (tape) {
    tape->inputs.clear();
    tape->pre.clear();
  }
  for (int l = 0; l < net.num_layers(); ++l) {
    Mat z = net.weight(l) * h;
    z.colwise() += net.bias(l);
    const bool last = l + 1 == net.num_layers();
    if (tape) tape->inputs.push_back(h);
    h = last ? z : activate(net.activation(), z);
    if (tape) tape->pre.push_back(std::move(z));
  }
  if (net.residual()) h += x;
  return h;
}

Mat backward(const Mlp& net, const Tape& tape, const MatRef& d_out,
             Vec* param_grad) {
  if (d_out.rows() != net.output_dim())
    fail(ErrorCode::ShapeMismatch, "mlp: cotangent width mismatch");
  if (tape.pre.size() != static_cast<std::size_t>(net.num_layers()) ||
      (!tape.pre.empty() && tape.pre.back().cols() != d_out.cols()))
    fail(ErrorCode::ShapeMismatch, "mlp: cotangent batch mismatch");
  Mlp* grads = nullptr;
  Mlp grad_view(net.widths(), net.activation(), net.head(),
                net.time_conditioning(), net.residual());
  if (param_grad) {
    if (param_grad->size() != net.params().size())
      *param_grad = Vec::Zero(net.params().size());
    grads = &grad_view;
    grad_view.params().swap(*param_grad);
  }
  Mat delta = d_out;
  for (int l = net.num_layers() - 1; l >= 0; --l) {
    const auto ul = static_cast<std::size_t>(l);
    if (l + 1 != net.num_layers())
      delta = delta.cwiseProduct(activate_grad(net.activation(), tape.pre[ul]));
    if (grads) {
      grads->weight(l).noalias() += delta * tape.inputs[ul].transpose();
      grads->bias(l) += delta.rowwise().sum();
    }
    delta = net.weight(l).transpose() * delta;
  }
  if (param_grad) param_grad->swap(grad_view.params());
  if (net.residual()) delta.topRows(net.input_dim()) += d_out;
  return delta;
}

Mat log_softmax(const MatRef& logits) {
  Mat out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double m = logits.col(j).maxCoeff();
    const auto shifted = logits.col(j).array() - m;
    out.col(j) = shifted - std::log(shifted.exp().sum());
  }
  return out;
}

std::vector<int> argmax_columns(const MatRef& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.cols()));
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.rows(); ++i)
      if (scores(i, j) > scores(best, j)) best = i;  // ties: lowest index
    out[static_cast<std::size_t>(j)] = static_cast<int>(best);
  }
  return out;
}

Mat input_gradient(const Mlp& net, const MatRef& x, const Mat* tfeat,
                   const std::vector<int>& y, Vec* log_prob) {
  if (net.head() != Head::Logits)
    fail(ErrorCode::InvalidArgument,
         "input_gradient: log-probability objective needs a logits head");
  if (y.size() != static_cast<std::size_t>(x.cols()) && y.size() != 1)
    fail(ErrorCode::ShapeMismatch, "input_gradient: one label per column");
  Tape tape;
  const Mat lsm = log_softmax(forward(net, x, tfeat, &tape));
  Mat d_out = -lsm.array().exp().matrix();
  if (log_prob) log_prob->resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const int yj = y.size() == 1 ? y[0] : y[static_cast<std::size_t>(j)];
    if (yj < 0 || yj >= net.output_dim())
      fail(ErrorCode::InvalidArgument, "input_gradient: class out of range");
    d_out(yj, j) += 1.0;
    if (log_prob) (*log_prob)[j] = lsm(yj, j);
  }
  return backward(net, tape, d_out).topRows(net.input_dim());
}

Mat vjp_input(const Mlp& net, const MatRef& x, const Mat* tfeat,
              const MatRef& cotangent) {
  if (cotangent.rows() != net.output_dim() || cotangent.cols() != x.cols())
    fail(ErrorCode::ShapeMismatch, "vjp_input: cotangent shape");
  Tape tape;
  forward(net, x, tfeat, &tape);
  return backward(net, tape, cotangent).topRows(net.input_dim());
}

double classifier_accuracy(const Mlp& net, const MatRef& x,
                           const std::vector<int>& y, const Mat* tfeat) {
  if (x.cols() == 0) fail(ErrorCode::InvalidArgument, "accuracy of empty set");
  const auto pred = argmax_columns(forward(net, x, tfeat));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == y[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

TrainedMlp train_classifier(const LabeledPoints& data, const TrainConfig& cfg,
                            const NoiseSchedule& sched) {
  if (cfg.epochs < 1 || cfg.batch_size < 1)
    fail(ErrorCode::InvalidArgument, "train: epochs and batch size must be >= 1");
  if (!(cfg.early_stop_accuracy > 0.0 && cfg.early_stop_accuracy <= 1.0))
    fail(ErrorCode::InvalidArgument, "train: early_stop_accuracy in (0,1]");
  const int n = static_cast<int>(data.x.cols());
  if (n < 2 || data.y.size() != static_cast<std::size_t>(n))
    fail(ErrorCode::InvalidArgument, "train_classifier: need labeled data");
  const int num_classes = *std::max_element(data.y.begin(), data.y.end()) + 1;
  if (std::all_of(data.y.begin(), data.y.end(),
                  [&](int v) { return v == data.y.front(); }))
    fail(ErrorCode::InvalidArgument, "train_classifier: single-class data");

  std::mt19937_64 rng(cfg.seed);
  const auto order = shuffled(static_cast<std::size_t>(n), rng);
  const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(n) / 10);
  const auto n_train = static_cast<std::size_t>(n) - n_val;
  const Mat x_train = gather(data.x, order, 0, n_train);
  const Mat x_val = gather(data.x, order, n_train, order.size());
  std::vector<int> y_train, y_val;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_train ? y_train : y_val).push_back(data.y[order[i]]);

  const int in = static_cast<int>(data.x.rows()) +
                 (cfg.time_conditioning ? kTimeFeatures : 0);
  TrainedMlp out{Mlp::random(widths_for(in, cfg.hidden, num_classes),
                             cfg.activation, Head::Logits,
                             cfg.time_conditioning, rng),
                 {}};
  Mlp& net = out.net;

  // Validation inputs follow the training distribution; noisy validation is
  // drawn once so that early stopping compares like with like.
  Mat val_in = x_val;
  Mat val_tf;
  if (cfg.noisy_training) {
    std::mt19937_64 vrng(cfg.seed ^ 0x5eedULL);
    std::vector<int> ts;
    val_in = noise_uniform(x_val, sched, vrng, ts, nullptr);
    if (cfg.time_conditioning) val_tf = time_features(sched, ts);
  } else if (cfg.time_conditioning) {
    val_tf = Mat::Zero(kTimeFeatures, x_val.cols());
    val_tf.row(1).setOnes();
  }

  AdamState opt(net.params().size(), {0.9, 0.999, cfg.learning_rate, 1e-8});
  Vec grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto perm = shuffled(n_train, rng);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < n_train; b += static_cast<std::size_t>(cfg.batch_size)) {
      const auto e = std::min(n_train, b + static_cast<std::size_t>(cfg.batch_size));
      Mat xb = gather(x_train, perm, b, e);
      std::vector<int> yb;
      for (std::size_t i = b; i < e; ++i) yb.push_back(y_train[perm[i]]);
      Mat tf;
      if (cfg.noisy_training) {
        std::vector<int> ts;
        xb = noise_uniform(xb, sched, rng, ts, nullptr);
        if (cfg.time_conditioning) tf = time_features(sched, ts);
      } else if (cfg.time_conditioning) {
        tf = Mat::Zero(kTimeFeatures, xb.cols());
        tf.row(1).setOnes();
      }
      Tape tape;
      const Mat lsm = log_softmax(
          forward(net, xb, cfg.time_conditioning ? &tf : nullptr, &tape));
      Mat d_out = lsm.array().exp().matrix();
      const double inv = 1.0 / static_cast<double>(xb.cols());
      for (Eigen::Index j = 0; j < xb.cols(); ++j) {
        const int yj = yb[static_cast<std::size_t>(j)];
        loss_sum -= lsm(yj, j);
        d_out(yj, j) -= 1.0;
      }
      d_out *= inv;
      grad.setZero(net.params().size());
      backward(net, tape, d_out, &grad);
      net.params() -= adam_transform(grad, opt);
    }
    out.report.epoch_loss.push_back(loss_sum / static_cast<double>(n_train));
    const double acc = classifier_accuracy(
        net, val_in, y_val, cfg.time_conditioning ? &val_tf : nullptr);
    out.report.val_accuracy.push_back(acc);
    out.report.epochs_run = epoch + 1;
    if (acc >= cfg.early_stop_accuracy) break;
  }
  return out;
}

TrainedMlp train_denoiser(const MatRef& data, const TrainConfig& cfg,
                          const NoiseSchedule& sched) {
  if (cfg.epochs < 1 || cfg.batch_size < 1)
    fail(ErrorCode::InvalidArgument, "train: epochs and batch size must be >= 1");
  if (data.cols() < 1) fail(ErrorCode::InvalidArgument, "train_denoiser: no data");
  std::mt19937_64 rng(cfg.seed);
  const int d = static_cast<int>(data.rows());
  TrainedMlp out{Mlp::random(widths_for(d + kTimeFeatures, cfg.hidden, d),
                             cfg.activation, Head::Regression, true, rng,
                             cfg.residual),
                 {}};
  Mlp& net = out.net;
  AdamState opt(net.params().size(), {0.9, 0.999, cfg.learning_rate, 1e-8});
  const auto n = static_cast<std::size_t>(data.cols());
  Vec grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto perm = shuffled(n, rng);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < n; b += static_cast<std::size_t>(cfg.batch_size)) {
      const auto e = std::min(n, b + static_cast<std::size_t>(cfg.batch_size));
      const Mat x0 = gather(data, perm, b, e);
      std::vector<int> ts;
      Mat eps;
      const Mat xt = noise_uniform(x0, sched, rng, ts, &eps);
      const Mat tf = time_features(sched, ts);
      Tape tape;
      const Mat resid = forward(net, xt, &tf, &tape) - eps;
      loss_sum += resid.squaredNorm() / d;
      const double scale = 2.0 / (static_cast<double>(d) * x0.cols());
      grad.setZero(net.params().size());
      backward(net, tape, scale * resid, &grad);
      net.params() -= adam_transform(grad, opt);
    }
    out.report.epoch_loss.push_back(loss_sum / static_cast<double>(n));
    out.report.epochs_run = epoch + 1;
  }
  return out;
}

std::vector<unsigned char> encode_mlp(const Mlp& net) {
  binio::Writer w;
  w.put_bytes(std::string_view(kMlpMagic, sizeof kMlpMagic));
  w.put<std::uint32_t>(kMlpVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(net.widths().size()));
  for (int width : net.widths()) w.put<std::uint32_t>(static_cast<std::uint32_t>(width));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(net.activation()));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(net.head()));
  w.put<std::uint8_t>(net.time_conditioning() ? 1 : 0);
  w.put<std::uint8_t>(net.residual() ? 1 : 0);
  for (int l = 0; l < net.num_layers(); ++l) {
    const auto W = net.weight(l);
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) w.put<double>(W(i, j));
    const auto b = net.bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) w.put<double>(b[i]);
  }
  return w.bytes();
}

Mlp decode_mlp(const std::vector<unsigned char>& bytes) {
  binio::Reader r(bytes);
  if (r.remaining() < sizeof kMlpMagic ||
      r.get_bytes(sizeof kMlpMagic) != std::string(kMlpMagic, sizeof kMlpMagic))
    fail(ErrorCode::Format, "not a guidelab model file");
  const auto version = r.get<std::uint32_t>();
  if (version != kMlpVersion)
    fail(ErrorCode::Version,
         "unsupported model format version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>();
  if (count < 2 || count > 64) fail(ErrorCode::Format, "model: bad layer count");
  std::vector<int> widths;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto width = r.get<std::uint32_t>();
    if (width == 0 || width > (1u << 24)) fail(ErrorCode::Format, "model: bad width");
    widths.push_back(static_cast<int>(width));
  }
  const auto act = r.get<std::uint8_t>();
  const auto head = r.get<std::uint8_t>();
  const auto tc = r.get<std::uint8_t>();
  const auto res = r.get<std::uint8_t>();
  if (act > 1 || head > 1 || tc > 1 || res > 1)
    fail(ErrorCode::Format, "model: bad tags");
  Mlp net(widths, static_cast<Activation>(act), static_cast<Head>(head), tc == 1,
          res == 1);
  r.need(static_cast<std::size_t>(net.params().size()) * sizeof(double));
  for (int l = 0; l < net.num_layers(); ++l) {
    auto W = net.weight(l);
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = r.get<double>();
    auto b = net.bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = r.get<double>();
  }
  if (r.remaining() != 0) fail(ErrorCode::Format, "model: trailing bytes");
  return net;
}

void save_mlp(const Mlp& net, const std::string& path) {
  binio::write_file(path, encode_mlp(net));
}

Mlp load_mlp(const std::string& path) { return decode_mlp(binio::read_file(path)); }

}  // namespace guidelab
