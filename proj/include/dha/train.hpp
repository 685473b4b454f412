#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dha/model.hpp"

namespace dha {

struct TrainConfig {
  std::uint64_t seed = 5;
  int batch_size = 16;
  int steps = 0;   // when > 0, overrides epochs
  int epochs = 2;
  double learning_rate = 3e-4;
  double weight_decay = 0.01;
  double grad_clip_norm = 1.0;
  int eval_every = 0;  // 0 disables mid-run eval
  double warmup_fraction = 0.01;

  void validate() const;
};

struct TrainExample {
  std::vector<int> ids;  // prompt tokens ending at the answer position
  NarrativeLabel label = NarrativeLabel::NHA;
};

struct TrainReport {
  std::vector<double> losses;                        // one per step
  std::vector<std::pair<int, double>> eval_accuracy; // (step, accuracy)
  int steps = 0;
};

// Cross-entropy over the 7 class-token logits only; logits at non-class
// vocabulary entries carry no gradient.
double target_token_loss(std::span<const double> full_logits, NarrativeLabel label);

// Gradient buffers mirroring the model's parameter tensors. Base tensors are
// materialized only when want_base is set; adapter tensors whenever the model
// has adapters.
struct Gradients {
  bool want_base = true;
  struct Proj {
    Mat w, a, b;
  };
  struct Layer {
    Proj wq, wk, wv, wo, w_gate, w_up, w_down;
    Mat norm1_gain, norm2_gain;
  };
  Mat embed, head_w, head_b;
  Mat class_head_w, class_head_b;  // task parameters, always materialized
  std::vector<Layer> layers;
};

Gradients make_gradients(const MicroLM& model, bool want_base);
void zero_gradients(Gradients& grads);
// Same naming and order as for_each_tensor over the model.
void for_each_grad(const MicroLM& model, Gradients& grads,
                   const std::function<void(const std::string&, Mat&, TensorKind)>& fn);

// Forward + backward for one sequence; accumulates into grads, returns the loss.
double loss_and_backward(const MicroLM& model, std::span<const int> ids,
                         NarrativeLabel label, Gradients& grads);

// Loss via a fresh forward pass; the numeric side of grad_check.
double evaluate_loss(const MicroLM& model, std::span<const int> ids, NarrativeLabel label);

// Decoupled-weight-decay adaptive moment optimizer.
class AdamW {
 public:
  AdamW(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
        double weight_decay = 0.01);
  void step(const std::vector<Mat*>& params, const std::vector<const Mat*>& grads,
            double lr);

 private:
  double beta1_, beta2_, eps_, weight_decay_;
  int t_ = 0;
  std::vector<Mat> m_, v_;
};

// Fine-tunes the attached adapters; base weights are never written. Throws
// NumericError when the loss stops being finite.
TrainReport train(MicroLM& model, const std::vector<TrainExample>& dataset,
                  const TrainConfig& cfg,
                  const std::vector<TrainExample>* eval_set = nullptr,
                  std::ostream* log = nullptr);

NarrativeLabel predict(const MicroLM& model, std::span<const int> ids);
double accuracy(const MicroLM& model, const std::vector<TrainExample>& dataset);

// Central finite differences against the analytic gradient for every
// parameter tensor; returns the max relative error. Intended for small
// configs (d <= 32).
double grad_check(const MicroLM& model, std::span<const int> ids, NarrativeLabel label,
                  double epsilon = 1e-4);

}  // namespace dha
