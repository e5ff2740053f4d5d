// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "adam.hpp"
#include "common.hpp"
#include "gmm_world.hpp"
#include "schedule.hpp"

namespace guidelab {

enum class Activation : std::uint8_t { Silu = 0, Tanh = 1 };
enum class Head : std::uint8_t { Logits = 0, Regression = 1 };

/// Number of time features appended to a conditioned network's input:
/// (t/T, ᾱ_t).
inline constexpr int kTimeFeatures = 2;

/// Dense feed-forward network. All parameters live in one flat vector,
/// layer by layer: W_l (column-major, out×in) followed by b_l.
class Mlp {
 public:
  /// `widths` includes the input width (with time features when
  /// conditioned) and the output width. A residual net adds its data input
  /// to the output and needs output width = data input width.
  Mlp(std::vector<int> widths, Activation act, Head head,
      bool time_conditioning, bool residual = false);

  static Mlp random(std::vector<int> widths, Activation act, Head head,
                    bool time_conditioning, std::mt19937_64& rng,
                    bool residual = false);

  const std::vector<int>& widths() const { return widths_; }
  int num_layers() const { return static_cast<int>(widths_.size()) - 1; }
  int input_dim() const {
    return widths_.front() - (time_conditioning_ ? kTimeFeatures : 0);
  }
  int output_dim() const { return widths_.back(); }
  Activation activation() const { return act_; }
  Head head() const { return head_; }
  bool time_conditioning() const { return time_conditioning_; }
  bool residual() const { return residual_; }

  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  Eigen::Map<const Mat> weight(int layer) const;
  Eigen::Map<const Vec> bias(int layer) const;
  Eigen::Map<Mat> weight(int layer);
  Eigen::Map<Vec> bias(int layer);

 private:
  std::size_t offset(int layer) const;

  std::vector<int> widths_;
  Activation act_;
  Head head_;
  bool time_conditioning_;
  bool residual_;
  Vec params_;
};

/// Time features for a batch where every item is at step t.
Mat time_features(const NoiseSchedule& sched, int t, Eigen::Index n);
/// Time features for per-item steps.
Mat time_features(const NoiseSchedule& sched, const std::vector<int>& ts);

/// Activations recorded by a forward pass for reverse-mode sweeps.
struct Tape {
  std::vector<Mat> inputs;  // input to each layer
  std::vector<Mat> pre;     // pre-activation of each layer
};

/// `tfeat` must be given iff the net is time-conditioned.
Mat forward(const Mlp& net, const MatRef& x, const Mat* tfeat = nullptr,
            Tape* tape = nullptr);

/// Reverse sweep. Returns the cotangent wrt the full network input (time
/// features included); adds parameter gradients to *param_grad when given.
Mat backward(const Mlp& net, const Tape& tape, const MatRef& d_out,
             Vec* param_grad = nullptr);

/// ∇_x log softmax(f(x))_y per column; optional log-probabilities out.
Mat input_gradient(const Mlp& net, const MatRef& x, const Mat* tfeat,
                   const std::vector<int>& y, Vec* log_prob = nullptr);
/// Jᵀ·cotangent per column, J the input Jacobian (time features excluded).
Mat vjp_input(const Mlp& net, const MatRef& x, const Mat* tfeat,
              const MatRef& cotangent);

Mat log_softmax(const MatRef& logits);
std::vector<int> argmax_columns(const MatRef& scores);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  bool noisy_training = false;
  double early_stop_accuracy = 0.99;
  std::vector<int> hidden = {64, 64};
  bool time_conditioning = false;
  Activation activation = Activation::Silu;
  bool residual = false;  // denoisers only
};

struct TrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> val_accuracy;  // classifiers only
  int epochs_run = 0;
};

struct TrainedMlp {
  Mlp net;
  TrainReport report;
};

/// Cross-entropy training with a seeded 90/10 train/validation split. With
/// noisy_training every example is re-noised each epoch at a fresh uniform t.
TrainedMlp train_classifier(const LabeledPoints& data, const TrainConfig& cfg,
                            const NoiseSchedule& sched);

/// Time-conditioned ε-prediction with the simplified loss ‖ε - ε_θ(x_t,t)‖².
TrainedMlp train_denoiser(const MatRef& data, const TrainConfig& cfg,
                          const NoiseSchedule& sched);

/// Accuracy of argmax predictions. tfeat as in forward().
double classifier_accuracy(const Mlp& net, const MatRef& x,
                           const std::vector<int>& y, const Mat* tfeat);

void save_mlp(const Mlp& net, const std::string& path);
Mlp load_mlp(const std::string& path);
std::vector<unsigned char> encode_mlp(const Mlp& net);
Mlp decode_mlp(const std::vector<unsigned char>& bytes);

}  // namespace guidelab
