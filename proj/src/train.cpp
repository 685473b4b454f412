#include "dha/train.hpp"

#include <algorithm>
#include <cmath>

#include "dha/errors.hpp"
#include "dha/parallel.hpp"
#include "dha/rng.hpp"

namespace dha {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (steps < 0 || epochs < 0) throw ConfigError("steps/epochs must be >= 0");
  if (learning_rate < 0.0 || weight_decay < 0.0 || grad_clip_norm < 0.0) {
    throw ConfigError("rates must be nonnegative");
  }
  if (warmup_fraction < 0.0 || warmup_fraction > 1.0) {
    throw ConfigError("warmup_fraction outside [0, 1]");
  }
}

namespace {

std::array<double, kNumClasses> class_softmax(const std::array<double, kNumClasses>& z) {
  double max_z = z[0];
  for (double v : z) max_z = std::max(max_z, v);
  std::array<double, kNumClasses> p{};
  double denom = 0.0;
  for (int k = 0; k < kNumClasses; ++k) {
    p[k] = std::exp(z[k] - max_z);
    denom += p[k];
  }
  for (double& v : p) v /= denom;
  return p;
}

std::array<double, kNumClasses> class_logits_from_hidden(const MicroLM& m,
                                                         const double* h_last) {
  std::array<double, kNumClasses> z{};
  for (int k = 0; k < kNumClasses; ++k) {
    const double* w = m.class_head_w.row(k);
    double acc = m.class_head_b.at(0, k);
    for (int j = 0; j < m.cfg.d; ++j) acc += w[j] * h_last[j];
    z[k] = acc;
  }
  return z;
}

// dx += dy W (+ adapter path); dW += dy^T x; dB += s dy^T u; dA += du^T x.
void projection_backward(const Projection& p, const Mat& x, const Mat& u, const Mat& dy,
                         Mat& dx, Gradients::Proj& g, bool want_base) {
  matmul_nn(dy, p.w, dx, /*accumulate=*/true);
  if (want_base) matmul_tn(dy, x, g.w, /*accumulate=*/true);
  if (p.lora) {
    const double s = p.lora->scale;
    // du = s * dy B
    Mat du(dy.rows, p.lora->b.cols);
    matmul_nn(dy, p.lora->b, du);
    for (double& v : du.data) v *= s;
    // dB += s * dy^T u
    Mat db_term(p.lora->b.rows, p.lora->b.cols);
    matmul_tn(dy, u, db_term);
    for (std::size_t i = 0; i < g.b.data.size(); ++i) g.b.data[i] += s * db_term.data[i];
    // dA += du^T x ; dx += du A
    matmul_tn(du, x, g.a, /*accumulate=*/true);
    matmul_nn(du, p.lora->a, dx, /*accumulate=*/true);
  }
}

// dx for y = RMSNorm(x) * gain; accumulates dgain when requested.
void rms_norm_backward(const Mat& x, const Mat& gain, double eps, const Mat& dy, Mat& dx,
                       Mat* dgain) {
  const int d = x.cols;
  const double* g = gain.row(0);
  for (int i = 0; i < x.rows; ++i) {
    const double* xi = x.row(i);
    const double* dyi = dy.row(i);
    double* dxi = dx.row(i);
    double sq = 0.0;
    for (int j = 0; j < d; ++j) sq += xi[j] * xi[j];
    double inv = 1.0 / std::sqrt(sq / d + eps);
    double inv3 = inv * inv * inv;
    double proj = 0.0;
    for (int j = 0; j < d; ++j) proj += dyi[j] * g[j] * xi[j];
    const double scale = inv3 * proj / d;
    for (int j = 0; j < d; ++j) dxi[j] = dyi[j] * g[j] * inv - xi[j] * scale;
    if (dgain) {
      double* dg = dgain->row(0);
      for (int j = 0; j < d; ++j) dg[j] += dyi[j] * xi[j] * inv;
    }
  }
}

void decoder_block_backward(const MicroLM& m, const LayerParams& layer,
                            const LayerCache& c, Gradients::Layer& g, bool want_base,
                            const Mat& dh_out, Mat& dh_in) {
  const int n = c.h_in.rows;
  const int d = m.cfg.d;
  const int f = m.cfg.ffn_dim();
  const int heads = m.cfg.n_heads;
  const int hd = m.cfg.head_dim();
  const double inv_sqrt_hd = 1.0 / std::sqrt(static_cast<double>(hd));

  // h_out = RMSNorm(sum2) * g2
  Mat dsum2(n, d);
  rms_norm_backward(c.sum2, layer.norm2_gain, m.cfg.rms_epsilon, dh_out, dsum2,
                    want_base ? &g.norm2_gain : nullptr);

  // sum2 = a + ffn_out
  Mat da = dsum2;  // direct residual path
  const Mat& dffn_out = dsum2;

  // ffn_out = (silu(gate_pre) * up_pre) W_down^T
  Mat dact(n, f);
  dact.zero();
  projection_backward(layer.w_down, c.act, c.ud, dffn_out, dact, g.w_down, want_base);

  Mat dgate_pre(n, f);
  Mat dup_pre(n, f);
  for (std::size_t i = 0; i < dact.data.size(); ++i) {
    const double gp = c.gate_pre.data[i];
    const double sig = 1.0 / (1.0 + std::exp(-gp));
    const double silu = gp * sig;
    dup_pre.data[i] = dact.data[i] * silu;
    dgate_pre.data[i] = dact.data[i] * c.up_pre.data[i] * (sig * (1.0 + gp * (1.0 - sig)));
  }
  projection_backward(layer.w_gate, c.a, c.ug, dgate_pre, da, g.w_gate, want_base);
  projection_backward(layer.w_up, c.a, c.uu, dup_pre, da, g.w_up, want_base);

  // a = RMSNorm(sum1) * g1
  Mat dsum1(n, d);
  rms_norm_backward(c.sum1, layer.norm1_gain, m.cfg.rms_epsilon, da, dsum1,
                    want_base ? &g.norm1_gain : nullptr);

  // sum1 = h_in + attn_out
  for (std::size_t i = 0; i < dsum1.data.size(); ++i) dh_in.data[i] += dsum1.data[i];
  const Mat& dattn_out = dsum1;

  // attn_out = ctx W_o^T
  Mat dctx(n, d);
  dctx.zero();
  projection_backward(layer.wo, c.ctx, c.uo, dattn_out, dctx, g.wo, want_base);

  Mat dq(n, d), dk(n, d), dv(n, d);
  Mat daw(n, n), ds(n, n);
  for (int h = 0; h < heads; ++h) {
    const int off = h * hd;
    const Mat& aw = c.attn[static_cast<std::size_t>(h)];
    // daw = dctx_h v_h^T ; dv += aw^T dctx_h
    for (int i = 0; i < n; ++i) {
      const double* dctx_i = dctx.row(i) + off;
      double* daw_i = daw.row(i);
      for (int j = 0; j <= i; ++j) {
        const double* vj = c.v.row(j) + off;
        double acc = 0.0;
        for (int t = 0; t < hd; ++t) acc += dctx_i[t] * vj[t];
        daw_i[j] = acc;
      }
      const double* aw_i = aw.row(i);
      for (int j = 0; j <= i; ++j) {
        double* dv_j = dv.row(j) + off;
        const double w = aw_i[j];
        for (int t = 0; t < hd; ++t) dv_j[t] += w * dctx_i[t];
      }
    }
    // softmax backward, rows independent
    for (int i = 0; i < n; ++i) {
      const double* aw_i = aw.row(i);
      const double* daw_i = daw.row(i);
      double* ds_i = ds.row(i);
      double rowdot = 0.0;
      for (int j = 0; j <= i; ++j) rowdot += daw_i[j] * aw_i[j];
      for (int j = 0; j <= i; ++j) ds_i[j] = aw_i[j] * (daw_i[j] - rowdot);
    }
    // dq += ds k / sqrt(hd); dk += ds^T q / sqrt(hd)
    for (int i = 0; i < n; ++i) {
      double* dq_i = dq.row(i) + off;
      const double* ds_i = ds.row(i);
      for (int j = 0; j <= i; ++j) {
        const double s = ds_i[j] * inv_sqrt_hd;
        const double* kj = c.k.row(j) + off;
        double* dk_j = dk.row(j) + off;
        const double* qi = c.q.row(i) + off;
        for (int t = 0; t < hd; ++t) {
          dq_i[t] += s * kj[t];
          dk_j[t] += s * qi[t];
        }
      }
    }
  }

  projection_backward(layer.wq, c.h_in, c.uq, dq, dh_in, g.wq, want_base);
  projection_backward(layer.wk, c.h_in, c.uk, dk, dh_in, g.wk, want_base);
  projection_backward(layer.wv, c.h_in, c.uv, dv, dh_in, g.wv, want_base);
}

}  // namespace

double target_token_loss(std::span<const double> full_logits, NarrativeLabel label) {
  std::array<double, kNumClasses> z{};
  for (int k = 0; k < kNumClasses; ++k) {
    double v = full_logits[static_cast<std::size_t>(class_token_id(
        static_cast<NarrativeLabel>(k)))];
    if (!std::isfinite(v)) throw NumericError("non-finite class logit");
    z[k] = v;
  }
  auto p = class_softmax(z);
  return -std::log(p[static_cast<std::size_t>(static_cast<int>(label))]);
}

Gradients make_gradients(const MicroLM& model, bool want_base) {
  Gradients g;
  g.want_base = want_base;
  if (want_base) {
    g.embed = Mat(model.embed.rows, model.embed.cols);
    g.head_w = Mat(model.head_w.rows, model.head_w.cols);
    g.head_b = Mat(1, model.head_b.cols);
  }
  g.class_head_w = Mat(kNumClasses, model.cfg.d);
  g.class_head_b = Mat(1, kNumClasses);
  g.layers.resize(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerParams& lp = model.layers[l];
    Gradients::Layer& gl = g.layers[l];
    auto init_proj = [&](const Projection& p, Gradients::Proj& gp) {
      if (want_base) gp.w = Mat(p.w.rows, p.w.cols);
      if (p.lora) {
        gp.a = Mat(p.lora->a.rows, p.lora->a.cols);
        gp.b = Mat(p.lora->b.rows, p.lora->b.cols);
      }
    };
    init_proj(lp.wq, gl.wq);
    init_proj(lp.wk, gl.wk);
    init_proj(lp.wv, gl.wv);
    init_proj(lp.wo, gl.wo);
    init_proj(lp.w_gate, gl.w_gate);
    init_proj(lp.w_up, gl.w_up);
    init_proj(lp.w_down, gl.w_down);
    if (want_base) {
      gl.norm1_gain = Mat(1, model.cfg.d);
      gl.norm2_gain = Mat(1, model.cfg.d);
    }
  }
  return g;
}

void zero_gradients(Gradients& g) {
  auto z = [](Mat& m) { m.zero(); };
  z(g.embed);
  z(g.head_w);
  z(g.head_b);
  z(g.class_head_w);
  z(g.class_head_b);
  for (auto& gl : g.layers) {
    for (auto* gp : {&gl.wq, &gl.wk, &gl.wv, &gl.wo, &gl.w_gate, &gl.w_up, &gl.w_down}) {
      gp->w.zero();
      gp->a.zero();
      gp->b.zero();
    }
    gl.norm1_gain.zero();
    gl.norm2_gain.zero();
  }
}

void for_each_grad(const MicroLM& model, Gradients& g,
                   const std::function<void(const std::string&, Mat&, TensorKind)>& fn) {
  if (g.want_base) {
    fn("embed", g.embed, TensorKind::Base);
    fn("head_w", g.head_w, TensorKind::Base);
    fn("head_b", g.head_b, TensorKind::Base);
  }
  fn("class_head_w", g.class_head_w, TensorKind::Adapter);
  fn("class_head_b", g.class_head_b, TensorKind::Adapter);
  for (std::size_t l = 0; l < g.layers.size(); ++l) {
    std::string prefix = "layer" + std::to_string(l) + ".";
    Gradients::Layer& gl = g.layers[l];
    const LayerParams& lp = model.layers[l];
    auto proj = [&](const std::string& name, const Projection& p, Gradients::Proj& gp) {
      if (g.want_base) fn(name, gp.w, TensorKind::Base);
      if (p.lora) {
        fn(name + ".lora_a", gp.a, TensorKind::Adapter);
        fn(name + ".lora_b", gp.b, TensorKind::Adapter);
      }
    };
    proj(prefix + "wq", lp.wq, gl.wq);
    proj(prefix + "wk", lp.wk, gl.wk);
    proj(prefix + "wv", lp.wv, gl.wv);
    proj(prefix + "wo", lp.wo, gl.wo);
    proj(prefix + "w_gate", lp.w_gate, gl.w_gate);
    proj(prefix + "w_up", lp.w_up, gl.w_up);
    proj(prefix + "w_down", lp.w_down, gl.w_down);
    if (g.want_base) {
      fn(prefix + "norm1_gain", gl.norm1_gain, TensorKind::Base);
      fn(prefix + "norm2_gain", gl.norm2_gain, TensorKind::Base);
    }
  }
}

double loss_and_backward(const MicroLM& model, std::span<const int> ids,
                         NarrativeLabel label, Gradients& g) {
  ForwardCache cache;
  forward_hidden(model, ids, &cache);
  const int n = cache.n;
  const Mat& h_final = model.layers.empty() ? cache.h0 : cache.layers.back().h_out;
  const double* h_last = h_final.row(n - 1);

  auto z = class_logits_from_hidden(model, h_last);
  for (double v : z) {
    if (!std::isfinite(v)) throw NumericError("non-finite class logit");
  }
  auto p = class_softmax(z);
  const double loss = -std::log(p[static_cast<std::size_t>(static_cast<int>(label))]);

  // dz over the 7 class logits; everything else in the head is untouched.
  std::array<double, kNumClasses> dz{};
  for (int k = 0; k < kNumClasses; ++k) {
    dz[k] = p[k] - (k == static_cast<int>(label) ? 1.0 : 0.0);
  }

  Mat dh(n, model.cfg.d);
  double* dh_last = dh.row(n - 1);
  for (int k = 0; k < kNumClasses; ++k) {
    const double* w = model.class_head_w.row(k);
    double* gw = g.class_head_w.row(k);
    for (int j = 0; j < model.cfg.d; ++j) {
      dh_last[j] += dz[k] * w[j];
      gw[j] += dz[k] * h_last[j];
    }
    g.class_head_b.at(0, k) += dz[k];
  }

  for (std::size_t l = model.layers.size(); l-- > 0;) {
    Mat dh_in(n, model.cfg.d);
    decoder_block_backward(model, model.layers[l], cache.layers[l], g.layers[l],
                           g.want_base, dh, dh_in);
    dh = std::move(dh_in);
  }

  if (g.want_base) {
    for (int i = 0; i < n; ++i) {
      double* ge = g.embed.row(ids[static_cast<std::size_t>(i)]);
      const double* dhi = dh.row(i);
      for (int j = 0; j < model.cfg.d; ++j) ge[j] += dhi[j];
    }
  }
  return loss;
}

double evaluate_loss(const MicroLM& model, std::span<const int> ids, NarrativeLabel label) {
  Mat h = forward_hidden(model, ids);
  auto z = class_logits_from_hidden(model, h.row(h.rows - 1));
  auto p = class_softmax(z);
  return -std::log(p[static_cast<std::size_t>(static_cast<int>(label))]);
}

AdamW::AdamW(double beta1, double beta2, double eps, double weight_decay)
    : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {}

void AdamW::step(const std::vector<Mat*>& params, const std::vector<const Mat*>& grads,
                 double lr) {
  if (params.size() != grads.size()) throw ShapeError("optimizer param/grad mismatch");
  if (m_.empty()) {
    for (const Mat* p : params) {
      m_.emplace_back(p->rows, p->cols);
      v_.emplace_back(p->rows, p->cols);
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Mat& p = *params[i];
    const Mat& gr = *grads[i];
    Mat& m = m_[i];
    Mat& v = v_[i];
    for (std::size_t j = 0; j < p.data.size(); ++j) {
      const double gj = gr.data[j];
      m.data[j] = beta1_ * m.data[j] + (1.0 - beta1_) * gj;
      v.data[j] = beta2_ * v.data[j] + (1.0 - beta2_) * gj * gj;
      const double mhat = m.data[j] / bc1;
      const double vhat = v.data[j] / bc2;
      p.data[j] -= lr * (mhat / (std::sqrt(vhat) + eps_) + weight_decay_ * p.data[j]);
    }
  }
}

namespace {

void add_gradients(Gradients& into, const Gradients& from) {
  auto add = [](Mat& a, const Mat& b) {
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
  };
  add(into.class_head_w, from.class_head_w);
  add(into.class_head_b, from.class_head_b);
  for (std::size_t l = 0; l < into.layers.size(); ++l) {
    auto& gi = into.layers[l];
    const auto& gf = from.layers[l];
    const Gradients::Proj* src[7] = {&gf.wq, &gf.wk, &gf.wv, &gf.wo,
                                     &gf.w_gate, &gf.w_up, &gf.w_down};
    Gradients::Proj* dst[7] = {&gi.wq, &gi.wk, &gi.wv, &gi.wo,
                               &gi.w_gate, &gi.w_up, &gi.w_down};
    for (int k = 0; k < 7; ++k) {
      add(dst[k]->a, src[k]->a);
      add(dst[k]->b, src[k]->b);
    }
  }
}

}  // namespace

NarrativeLabel predict(const MicroLM& model, std::span<const int> ids) {
  ClassDistribution dist = class_distribution(model, ids);
  int best = 0;
  for (int k = 1; k < kNumClasses; ++k) {
    if (dist.p[static_cast<std::size_t>(k)] > dist.p[static_cast<std::size_t>(best)]) best = k;
  }
  return static_cast<NarrativeLabel>(best);
}

double accuracy(const MicroLM& model, const std::vector<TrainExample>& dataset) {
  if (dataset.empty()) return 0.0;
  std::vector<int> correct(dataset.size(), 0);
  parallel_for(dataset.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      correct[i] = predict(model, dataset[i].ids) == dataset[i].label ? 1 : 0;
    }
  });
  std::size_t hits = 0;
  for (int c : correct) hits += static_cast<std::size_t>(c);
  return static_cast<double>(hits) / static_cast<double>(dataset.size());
}

TrainReport train(MicroLM& model, const std::vector<TrainExample>& dataset,
                  const TrainConfig& cfg, const std::vector<TrainExample>* eval_set,
                  std::ostream* log) {
  cfg.validate();
  if (dataset.empty()) throw ConfigError("training dataset is empty");
  if (!model.adapters_attached) throw ConfigError("train requires attached adapters");

  TrainReport report;
  const std::size_t n = dataset.size();
  const int steps_per_epoch =
      static_cast<int>((n + static_cast<std::size_t>(cfg.batch_size) - 1) /
                       static_cast<std::size_t>(cfg.batch_size));
  const int total_steps = cfg.steps > 0 ? cfg.steps : steps_per_epoch * cfg.epochs;
  if (total_steps == 0) return report;
  const int warmup_steps =
      std::max(1, static_cast<int>(cfg.warmup_fraction * total_steps));

  // Adapter parameter list in fixed visitation order.
  std::vector<Mat*> params;
  for_each_tensor(model, [&](const std::string&, Mat& t, TensorKind kind) {
    if (kind == TensorKind::Adapter) params.push_back(&t);
  });

  AdamW opt(0.9, 0.999, 1e-8, cfg.weight_decay);

  // One gradient buffer per batch slot: slots are filled in parallel and
  // reduced in slot order, so results do not depend on the thread count.
  std::vector<Gradients> slot_grads;
  for (int b = 0; b < cfg.batch_size; ++b) {
    slot_grads.push_back(make_gradients(model, /*want_base=*/false));
  }
  Gradients total = make_gradients(model, /*want_base=*/false);
  std::vector<double> slot_loss(static_cast<std::size_t>(cfg.batch_size), 0.0);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::size_t cursor = 0;
  int epoch = 0;
  Rng shuffle_rng(cfg.seed, 0xb47c);
  shuffle_rng.shuffle(order);

  for (int step = 1; step <= total_steps; ++step) {
    // assemble the batch, reshuffling at epoch boundaries
    std::vector<std::size_t> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));
    for (int b = 0; b < cfg.batch_size; ++b) {
      if (cursor == n) {
        cursor = 0;
        ++epoch;
        Rng r(cfg.seed, 0xb47c + static_cast<std::uint64_t>(epoch));
        r.shuffle(order);
      }
      batch.push_back(order[cursor++]);
    }

    parallel_for(batch.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t b = begin; b < end; ++b) {
        zero_gradients(slot_grads[b]);
        const TrainExample& ex = dataset[batch[b]];
        slot_loss[b] = loss_and_backward(model, ex.ids, ex.label, slot_grads[b]);
      }
    });

    zero_gradients(total);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      add_gradients(total, slot_grads[b]);
      loss_sum += slot_loss[b];
    }
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    const double mean_loss = loss_sum * inv_batch;
    if (!std::isfinite(mean_loss)) {
      throw NumericError("training diverged at step " + std::to_string(step));
    }

    std::vector<Mat*> grads;
    double sq_norm = 0.0;
    for_each_grad(model, total, [&](const std::string&, Mat& gmat, TensorKind kind) {
      if (kind != TensorKind::Adapter) return;
      for (double& v : gmat.data) {
        v *= inv_batch;
        sq_norm += v * v;
      }
      grads.push_back(&gmat);
    });
    const double norm = std::sqrt(sq_norm);
    if (cfg.grad_clip_norm > 0.0 && norm > cfg.grad_clip_norm) {
      const double scale = cfg.grad_clip_norm / norm;
      for (Mat* gm : grads) {
        for (double& v : gm->data) v *= scale;
      }
    }

    const double lr = cfg.learning_rate *
                      std::min(1.0, static_cast<double>(step) / warmup_steps);
    opt.step(params, {grads.begin(), grads.end()}, lr);

    report.losses.push_back(mean_loss);
    report.steps = step;
    if (log) {
      (*log) << "{\"step\":" << step << ",\"loss\":" << mean_loss << ",\"lr\":" << lr
             << "}\n";
    }
    if (cfg.eval_every > 0 && eval_set && step % cfg.eval_every == 0) {
      double acc = accuracy(model, *eval_set);
      report.eval_accuracy.emplace_back(step, acc);
      if (log) {
        (*log) << "{\"step\":" << step << ",\"eval_acc\":" << acc << "}\n";
      }
    }
  }
  return report;
}

double grad_check(const MicroLM& model, std::span<const int> ids, NarrativeLabel label,
                  double epsilon) {
  MicroLM work = model;
  Gradients analytic = make_gradients(work, /*want_base=*/true);
  loss_and_backward(work, ids, label, analytic);

  double max_rel = 0.0;
  // Collect (name -> analytic grad) pairs in visitation order; the model is
  // visited in the same order, so indices line up.
  std::vector<Mat*> grad_mats;
  for_each_grad(work, analytic, [&](const std::string&, Mat& g, TensorKind) {
    grad_mats.push_back(&g);
  });
  std::size_t tensor_index = 0;
  for_each_tensor(work, [&](const std::string&, Mat& t, TensorKind) {
    Mat& g = *grad_mats[tensor_index++];
    for (std::size_t i = 0; i < t.data.size(); ++i) {
      const double saved = t.data[i];
      t.data[i] = saved + epsilon;
      const double up = evaluate_loss(work, ids, label);
      t.data[i] = saved - epsilon;
      const double down = evaluate_loss(work, ids, label);
      t.data[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = g.data[i];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
      max_rel = std::max(max_rel, rel);
    }
  });
  return max_rel;
}

}  // namespace dha
