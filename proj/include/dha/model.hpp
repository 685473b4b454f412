#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dha/labels.hpp"
#include "dha/tensor.hpp"

namespace dha {

struct ModelConfig {
  int d = 128;
  int layers = 4;
  int n_heads = 4;
  int ffn_mult = 4;
  int vocab_size = 0;
  int max_seq_len = 256;
  double rms_epsilon = 1e-5;
  double init_std = 0.02;
  // amplitude of the fixed sinusoidal table; kept near the embedding scale so
  // token identity is not drowned out at initialization
  double pos_scale = 0.05;
  std::uint64_t init_seed = 11;

  int head_dim() const { return d / n_heads; }
  int ffn_dim() const { return ffn_mult * d; }
  void validate() const;
};

struct LoraConfig {
  int rank = 4;
  double alpha = 8.0;  // 2 * rank by default
};

// Frozen base weight plus optional trainable low-rank update:
// y = x W^T + (alpha/r) (x A^T) B^T. B starts at zero so wrapping is an
// exact identity at initialization.
struct LoraAdapter {
  Mat a;  // rank x in
  Mat b;  // out x rank
  double scale = 0.0;
};

struct Projection {
  Mat w;  // out x in
  std::optional<LoraAdapter> lora;
};

void apply_projection(const Projection& p, const Mat& x, Mat& y, Mat* u_out = nullptr);

struct LayerParams {
  Projection wq, wk, wv, wo;  // d x d
  Projection w_gate, w_up;    // f x d
  Projection w_down;          // d x f
  Mat norm1_gain;             // 1 x d
  Mat norm2_gain;             // 1 x d
};

// Decoder-only causal LM: token embedding + fixed sinusoidal positions,
// post-norm blocks (RMSNorm after each residual add), gated FFN, and a
// full-vocabulary output head read at the final position.
struct MicroLM {
  ModelConfig cfg;
  Mat embed;   // V x d
  Mat pos;     // max_seq_len x d, constant
  std::vector<LayerParams> layers;
  Mat head_w;  // V x d
  Mat head_b;  // 1 x V
  // The 7 class tokens are additions to the vocabulary, so their head rows
  // are task parameters, not base weights; they train together with the
  // adapters. Class logits always read these rows.
  Mat class_head_w;  // 7 x d
  Mat class_head_b;  // 1 x 7
  bool adapters_attached = false;
  LoraConfig lora;
  std::uint64_t vocab_hash = 0;
};

MicroLM init_model(const ModelConfig& cfg);

// Attaches rank-r adapters to every attention and FFN projection.
// Throws ConfigError when the rank exceeds a projection's dimensions.
void lora_wrap(MicroLM& model, const LoraConfig& cfg);

std::size_t adapter_param_count(const MicroLM& model);
std::size_t total_param_count(const MicroLM& model);
double trainable_fraction(const MicroLM& model);

// y_i = x_i / sqrt(mean_j x_ij^2 + eps) * gain, row-wise.
void rms_norm(const Mat& x, const Mat& gain, double eps, Mat& y);

// Everything the backward pass needs from one block's forward evaluation.
struct LayerCache {
  Mat h_in;
  Mat q, k, v;
  Mat uq, uk, uv, uo, ug, uu, ud;  // x A^T per adapted projection
  std::vector<Mat> attn;           // per head, n x n row-softmaxed causal scores
  Mat ctx;
  Mat attn_out;
  Mat sum1, a;
  Mat gate_pre, up_pre, act;
  Mat ffn_out;
  Mat sum2, h_out;
};

struct ForwardCache {
  Mat h0;
  std::vector<LayerCache> layers;
  int n = 0;
};

// h_i^(0) = e(x_i) + p(i). Throws ShapeError on out-of-range ids or overlong
// sequences.
Mat embed_ids(const MicroLM& model, std::span<const int> ids);

// Full stack; returns hidden states for every position.
Mat forward_hidden(const MicroLM& model, std::span<const int> ids,
                   ForwardCache* cache = nullptr);

// Full-vocab logits at the final position.
std::vector<double> forward_logits(const MicroLM& model, std::span<const int> ids);
// Logits at every position (n x V); used by causality checks.
Mat forward_logits_all(const MicroLM& model, std::span<const int> ids);

struct ClassDistribution {
  std::array<double, kNumClasses> p{};
};

// Max-subtracted softmax over the 7 reserved class-token logits.
ClassDistribution softmax_over_classes(std::span<const double> full_logits);
ClassDistribution class_distribution(const MicroLM& model, std::span<const int> ids);

enum class TensorKind { Base, Adapter };

// Fixed-order visitation of every parameter tensor (positional table
// excluded; it is not a parameter).
void for_each_tensor(MicroLM& model,
                     const std::function<void(const std::string&, Mat&, TensorKind)>& fn);
void for_each_tensor(const MicroLM& model,
                     const std::function<void(const std::string&, const Mat&, TensorKind)>& fn);

// Versioned container: JSON header (config, adapter state, vocab hash, tensor
// directory) followed by raw little-endian doubles.
void save_checkpoint(const MicroLM& model, const std::filesystem::path& path);
MicroLM load_checkpoint(const std::filesystem::path& path);

}  // namespace dha
