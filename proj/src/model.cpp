#include "dha/model.hpp"

#include <cmath>
#include <cstring>
#include <map>

#include "dha/errors.hpp"
#include "dha/io_util.hpp"
#include "dha/rng.hpp"

#include "json.hpp"

namespace dha {

void ModelConfig::validate() const {
  if (d < 1 || layers < 1 || n_heads < 1 || ffn_mult < 1 || vocab_size < 1 ||
      max_seq_len < 1) {
    throw ConfigError("model dimensions must be positive");
  }
  if (d % n_heads != 0) throw ConfigError("d must be divisible by n_heads");
  if (rms_epsilon <= 0.0) throw ConfigError("rms_epsilon must be positive");
  if (pos_scale <= 0.0) throw ConfigError("pos_scale must be positive");
}

namespace {

Mat sinusoidal_positions(int max_len, int d, double scale) {
  Mat p(max_len, d);
  for (int i = 0; i < max_len; ++i) {
    for (int k = 0; 2 * k < d; ++k) {
      double rate = std::pow(10000.0, -2.0 * k / static_cast<double>(d));
      double angle = i * rate;
      p.at(i, 2 * k) = scale * std::sin(angle);
      if (2 * k + 1 < d) p.at(i, 2 * k + 1) = scale * std::cos(angle);
    }
  }
  return p;
}

Mat seeded_normal(int rows, int cols, std::uint64_t seed, const std::string& name,
                  double std_dev) {
  Mat m(rows, cols);
  Rng rng(seed, fnv1a64(name));
  m.fill_normal(rng, std_dev);
  return m;
}

}  // namespace

void apply_projection(const Projection& p, const Mat& x, Mat& y, Mat* u_out) {
  matmul_nt(x, p.w, y);
  if (!p.lora) return;
  Mat local_u;
  Mat& u = u_out ? *u_out : local_u;
  u = Mat(x.rows, p.lora->a.rows);
  matmul_nt(x, p.lora->a, u);
  // y += scale * u B^T
  const Mat& b = p.lora->b;
  const double scale = p.lora->scale;
  for (int i = 0; i < y.rows; ++i) {
    const double* ui = u.row(i);
    double* yi = y.row(i);
    for (int o = 0; o < b.rows; ++o) {
      const double* bo = b.row(o);
      double acc = 0.0;
      for (int r = 0; r < b.cols; ++r) acc += ui[r] * bo[r];
      yi[o] += scale * acc;
    }
  }
}

MicroLM init_model(const ModelConfig& cfg) {
  cfg.validate();
  MicroLM m;
  m.cfg = cfg;
  m.embed = seeded_normal(cfg.vocab_size, cfg.d, cfg.init_seed, "embed", cfg.init_std);
  m.pos = sinusoidal_positions(cfg.max_seq_len, cfg.d, cfg.pos_scale);
  m.head_w = seeded_normal(cfg.vocab_size, cfg.d, cfg.init_seed, "head_w", cfg.init_std);
  m.head_b = Mat(1, cfg.vocab_size);
  m.class_head_w = seeded_normal(kNumClasses, cfg.d, cfg.init_seed, "class_head_w",
                                 cfg.init_std);
  m.class_head_b = Mat(1, kNumClasses);

  const int d = cfg.d;
  const int f = cfg.ffn_dim();
  m.layers.resize(static_cast<std::size_t>(cfg.layers));
  for (int l = 0; l < cfg.layers; ++l) {
    LayerParams& layer = m.layers[static_cast<std::size_t>(l)];
    std::string prefix = "layer" + std::to_string(l) + ".";
    layer.wq.w = seeded_normal(d, d, cfg.init_seed, prefix + "wq", cfg.init_std);
    layer.wk.w = seeded_normal(d, d, cfg.init_seed, prefix + "wk", cfg.init_std);
    layer.wv.w = seeded_normal(d, d, cfg.init_seed, prefix + "wv", cfg.init_std);
    layer.wo.w = seeded_normal(d, d, cfg.init_seed, prefix + "wo", cfg.init_std);
    layer.w_gate.w = seeded_normal(f, d, cfg.init_seed, prefix + "w_gate", cfg.init_std);
    layer.w_up.w = seeded_normal(f, d, cfg.init_seed, prefix + "w_up", cfg.init_std);
    layer.w_down.w = seeded_normal(d, f, cfg.init_seed, prefix + "w_down", cfg.init_std);
    layer.norm1_gain = Mat(1, d);
    layer.norm2_gain = Mat(1, d);
    std::fill(layer.norm1_gain.data.begin(), layer.norm1_gain.data.end(), 1.0);
    std::fill(layer.norm2_gain.data.begin(), layer.norm2_gain.data.end(), 1.0);
  }
  return m;
}

void lora_wrap(MicroLM& model, const LoraConfig& cfg) {
  if (cfg.rank < 1) throw ConfigError("lora rank must be >= 1");
  if (model.adapters_attached) throw ConfigError("adapters already attached");

  auto wrap = [&](Projection& p, const std::string& name) {
    int out = p.w.rows, in = p.w.cols;
    if (cfg.rank > std::min(in, out)) {
      throw ConfigError("lora rank " + std::to_string(cfg.rank) +
                        " exceeds projection " + name);
    }
    LoraAdapter a;
    a.a = seeded_normal(cfg.rank, in, model.cfg.init_seed, name + ".lora_a",
                        model.cfg.init_std);
    a.b = Mat(out, cfg.rank);  // zero: wrapped forward equals frozen forward
    a.scale = cfg.alpha / static_cast<double>(cfg.rank);
    p.lora = std::move(a);
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    std::string prefix = "layer" + std::to_string(l) + ".";
    wrap(model.layers[l].wq, prefix + "wq");
    wrap(model.layers[l].wk, prefix + "wk");
    wrap(model.layers[l].wv, prefix + "wv");
    wrap(model.layers[l].wo, prefix + "wo");
    wrap(model.layers[l].w_gate, prefix + "w_gate");
    wrap(model.layers[l].w_up, prefix + "w_up");
    wrap(model.layers[l].w_down, prefix + "w_down");
  }
  model.adapters_attached = true;
  model.lora = cfg;
}

std::size_t adapter_param_count(const MicroLM& model) {
  std::size_t count = 0;
  for_each_tensor(model, [&](const std::string&, const Mat& t, TensorKind kind) {
    if (kind == TensorKind::Adapter) count += t.size();
  });
  return count;
}

std::size_t total_param_count(const MicroLM& model) {
  std::size_t count = 0;
  for_each_tensor(model,
                  [&](const std::string&, const Mat& t, TensorKind) { count += t.size(); });
  return count;
}

double trainable_fraction(const MicroLM& model) {
  return static_cast<double>(adapter_param_count(model)) /
         static_cast<double>(total_param_count(model));
}

void rms_norm(const Mat& x, const Mat& gain, double eps, Mat& y) {
  const int d = x.cols;
  const double* g = gain.row(0);
  for (int i = 0; i < x.rows; ++i) {
    const double* xi = x.row(i);
    double* yi = y.row(i);
    double sq = 0.0;
    for (int j = 0; j < d; ++j) sq += xi[j] * xi[j];
    double inv = 1.0 / std::sqrt(sq / d + eps);
    for (int j = 0; j < d; ++j) yi[j] = xi[j] * inv * g[j];
  }
}

Mat embed_ids(const MicroLM& model, std::span<const int> ids) {
  const int n = static_cast<int>(ids.size());
  if (n > model.cfg.max_seq_len) {
    throw ShapeError("sequence length " + std::to_string(n) + " exceeds max_seq_len " +
                     std::to_string(model.cfg.max_seq_len));
  }
  Mat h(n, model.cfg.d);
  for (int i = 0; i < n; ++i) {
    int id = ids[static_cast<std::size_t>(i)];
    if (id < 0 || id >= model.cfg.vocab_size) {
      throw ShapeError("token id " + std::to_string(id) + " out of vocab range");
    }
    const double* e = model.embed.row(id);
    const double* p = model.pos.row(i);
    double* hi = h.row(i);
    for (int j = 0; j < model.cfg.d; ++j) hi[j] = e[j] + p[j];
  }
  return h;
}

namespace {

// Causal multi-head attention plus gated FFN, post-norm as written:
// a = RMSNorm(h + MHSA(H)); h' = RMSNorm(a + FFN(a)).
void decoder_block(const MicroLM& m, const LayerParams& layer, const Mat& h_in,
                   LayerCache& c) {
  const int n = h_in.rows;
  const int d = m.cfg.d;
  const int heads = m.cfg.n_heads;
  const int hd = m.cfg.head_dim();
  const double inv_sqrt_hd = 1.0 / std::sqrt(static_cast<double>(hd));

  c.h_in = h_in;
  c.q = Mat(n, d);
  c.k = Mat(n, d);
  c.v = Mat(n, d);
  apply_projection(layer.wq, h_in, c.q, &c.uq);
  apply_projection(layer.wk, h_in, c.k, &c.uk);
  apply_projection(layer.wv, h_in, c.v, &c.uv);

  c.attn.assign(static_cast<std::size_t>(heads), Mat());
  c.ctx = Mat(n, d);
  for (int h = 0; h < heads; ++h) {
    const int off = h * hd;
    Mat& aw = c.attn[static_cast<std::size_t>(h)];
    aw = Mat(n, n);
    for (int i = 0; i < n; ++i) {
      const double* qi = c.q.row(i) + off;
      double* awi = aw.row(i);
      double max_score = -1e300;
      for (int j = 0; j <= i; ++j) {
        const double* kj = c.k.row(j) + off;
        double s = 0.0;
        for (int t = 0; t < hd; ++t) s += qi[t] * kj[t];
        s *= inv_sqrt_hd;
        awi[j] = s;
        if (s > max_score) max_score = s;
      }
      double denom = 0.0;
      for (int j = 0; j <= i; ++j) {
        awi[j] = std::exp(awi[j] - max_score);
        denom += awi[j];
      }
      double inv_denom = 1.0 / denom;
      for (int j = 0; j <= i; ++j) awi[j] *= inv_denom;

      double* ctx_i = c.ctx.row(i) + off;
      for (int j = 0; j <= i; ++j) {
        const double w = awi[j];
        const double* vj = c.v.row(j) + off;
        for (int t = 0; t < hd; ++t) ctx_i[t] += w * vj[t];
      }
    }
  }

  c.attn_out = Mat(n, d);
  apply_projection(layer.wo, c.ctx, c.attn_out, &c.uo);

  c.sum1 = Mat(n, d);
  for (std::size_t i = 0; i < c.sum1.data.size(); ++i) {
    c.sum1.data[i] = h_in.data[i] + c.attn_out.data[i];
  }
  c.a = Mat(n, d);
  rms_norm(c.sum1, layer.norm1_gain, m.cfg.rms_epsilon, c.a);

  const int f = m.cfg.ffn_dim();
  c.gate_pre = Mat(n, f);
  c.up_pre = Mat(n, f);
  apply_projection(layer.w_gate, c.a, c.gate_pre, &c.ug);
  apply_projection(layer.w_up, c.a, c.up_pre, &c.uu);
  c.act = Mat(n, f);
  for (std::size_t i = 0; i < c.act.data.size(); ++i) {
    double g = c.gate_pre.data[i];
    double silu = g / (1.0 + std::exp(-g));
    c.act.data[i] = silu * c.up_pre.data[i];
  }
  c.ffn_out = Mat(n, d);
  apply_projection(layer.w_down, c.act, c.ffn_out, &c.ud);

  c.sum2 = Mat(n, d);
  for (std::size_t i = 0; i < c.sum2.data.size(); ++i) {
    c.sum2.data[i] = c.a.data[i] + c.ffn_out.data[i];
  }
  c.h_out = Mat(n, d);
  rms_norm(c.sum2, layer.norm2_gain, m.cfg.rms_epsilon, c.h_out);
}

}  // namespace

Mat forward_hidden(const MicroLM& model, std::span<const int> ids, ForwardCache* cache) {
  Mat h = embed_ids(model, ids);
  if (!all_finite(h)) throw NumericError("non-finite input embeddings");

  ForwardCache local;
  ForwardCache& fc = cache ? *cache : local;
  fc.n = h.rows;
  fc.h0 = h;
  fc.layers.assign(model.layers.size(), LayerCache());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    decoder_block(model, model.layers[l], l == 0 ? fc.h0 : fc.layers[l - 1].h_out,
                  fc.layers[l]);
  }
  const Mat& out = model.layers.empty() ? fc.h0 : fc.layers.back().h_out;
  if (!all_finite(out)) throw NumericError("non-finite hidden states");
  return out;
}

std::vector<double> forward_logits(const MicroLM& model, std::span<const int> ids) {
  Mat h = forward_hidden(model, ids);
  const int V = model.cfg.vocab_size;
  const double* last = h.row(h.rows - 1);
  std::vector<double> z(static_cast<std::size_t>(V));
  for (int o = 0; o < V; ++o) {
    const double* w = model.head_w.row(o);
    double acc = model.head_b.at(0, o);
    for (int j = 0; j < model.cfg.d; ++j) acc += w[j] * last[j];
    z[static_cast<std::size_t>(o)] = acc;
  }
  for (int k = 0; k < kNumClasses; ++k) {
    const double* w = model.class_head_w.row(k);
    double acc = model.class_head_b.at(0, k);
    for (int j = 0; j < model.cfg.d; ++j) acc += w[j] * last[j];
    z[static_cast<std::size_t>(kClassTokenBase + k)] = acc;
  }
  return z;
}

Mat forward_logits_all(const MicroLM& model, std::span<const int> ids) {
  Mat h = forward_hidden(model, ids);
  Mat z(h.rows, model.cfg.vocab_size);
  matmul_nt(h, model.head_w, z);
  Mat zc(h.rows, kNumClasses);
  matmul_nt(h, model.class_head_w, zc);
  for (int i = 0; i < z.rows; ++i) {
    double* zi = z.row(i);
    for (int o = 0; o < z.cols; ++o) zi[o] += model.head_b.at(0, o);
    for (int k = 0; k < kNumClasses; ++k) {
      zi[kClassTokenBase + k] = zc.at(i, k) + model.class_head_b.at(0, k);
    }
  }
  return z;
}

ClassDistribution softmax_over_classes(std::span<const double> full_logits) {
  ClassDistribution dist;
  double max_z = -1e300;
  for (int k = 0; k < kNumClasses; ++k) {
    double z = full_logits[static_cast<std::size_t>(class_token_id(
        static_cast<NarrativeLabel>(k)))];
    dist.p[static_cast<std::size_t>(k)] = z;
    if (z > max_z) max_z = z;
  }
  double denom = 0.0;
  for (double& v : dist.p) {
    v = std::exp(v - max_z);
    denom += v;
  }
  for (double& v : dist.p) v /= denom;
  return dist;
}

ClassDistribution class_distribution(const MicroLM& model, std::span<const int> ids) {
  std::vector<double> z = forward_logits(model, ids);
  return softmax_over_classes(z);
}

namespace {

template <class Model, class Fn>
void for_each_tensor_impl(Model& m, const Fn& fn) {
  fn("embed", m.embed, TensorKind::Base);
  fn("head_w", m.head_w, TensorKind::Base);
  fn("head_b", m.head_b, TensorKind::Base);
  fn("class_head_w", m.class_head_w, TensorKind::Adapter);
  fn("class_head_b", m.class_head_b, TensorKind::Adapter);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    std::string prefix = "layer" + std::to_string(l) + ".";
    auto& layer = m.layers[l];
    auto proj = [&](const std::string& name, auto& p) {
      fn(name, p.w, TensorKind::Base);
      if (p.lora) {
        fn(name + ".lora_a", p.lora->a, TensorKind::Adapter);
        fn(name + ".lora_b", p.lora->b, TensorKind::Adapter);
      }
    };
    proj(prefix + "wq", layer.wq);
    proj(prefix + "wk", layer.wk);
    proj(prefix + "wv", layer.wv);
    proj(prefix + "wo", layer.wo);
    proj(prefix + "w_gate", layer.w_gate);
    proj(prefix + "w_up", layer.w_up);
    proj(prefix + "w_down", layer.w_down);
    fn(prefix + "norm1_gain", layer.norm1_gain, TensorKind::Base);
    fn(prefix + "norm2_gain", layer.norm2_gain, TensorKind::Base);
  }
}

}  // namespace

void for_each_tensor(MicroLM& model,
                     const std::function<void(const std::string&, Mat&, TensorKind)>& fn) {
  for_each_tensor_impl(model, fn);
}

void for_each_tensor(
    const MicroLM& model,
    const std::function<void(const std::string&, const Mat&, TensorKind)>& fn) {
  for_each_tensor_impl(model, fn);
}

void save_checkpoint(const MicroLM& model, const std::filesystem::path& path) {
  nlohmann::json header;
  header["version"] = 1;
  header["config"] = {{"d", model.cfg.d},
                      {"layers", model.cfg.layers},
                      {"n_heads", model.cfg.n_heads},
                      {"ffn_mult", model.cfg.ffn_mult},
                      {"vocab_size", model.cfg.vocab_size},
                      {"max_seq_len", model.cfg.max_seq_len},
                      {"rms_epsilon", model.cfg.rms_epsilon},
                      {"init_std", model.cfg.init_std},
                      {"pos_scale", model.cfg.pos_scale},
                      {"init_seed", model.cfg.init_seed}};
  header["lora"] = {{"attached", model.adapters_attached},
                    {"rank", model.lora.rank},
                    {"alpha", model.lora.alpha}};
  header["vocab_hash"] = hex64(model.vocab_hash);

  nlohmann::json tensors = nlohmann::json::array();
  std::size_t offset = 0;
  std::vector<const Mat*> order;
  for_each_tensor(model, [&](const std::string& name, const Mat& t, TensorKind kind) {
    tensors.push_back({{"name", name},
                       {"rows", t.rows},
                       {"cols", t.cols},
                       {"offset", offset},
                       {"adapter", kind == TensorKind::Adapter}});
    order.push_back(&t);
    offset += t.size();
  });
  header["tensors"] = tensors;

  std::string head_text = header.dump();
  std::string out;
  out.reserve(16 + head_text.size() + offset * sizeof(double));
  out += "DHAFORG1";
  std::uint64_t head_len = head_text.size();
  out.append(reinterpret_cast<const char*>(&head_len), sizeof head_len);
  out += head_text;
  for (const Mat* t : order) {
    out.append(reinterpret_cast<const char*>(t->data.data()),
               t->data.size() * sizeof(double));
  }
  atomic_write_file(path, out);
}

MicroLM load_checkpoint(const std::filesystem::path& path) {
  std::string blob = read_file(path);
  if (blob.size() < 16 || blob.compare(0, 8, "DHAFORG1") != 0) {
    throw ParseError("not a checkpoint file: " + path.string());
  }
  std::uint64_t head_len = 0;
  std::memcpy(&head_len, blob.data() + 8, sizeof head_len);
  if (16 + head_len > blob.size()) throw ParseError("checkpoint header truncated");
  nlohmann::json header = nlohmann::json::parse(blob.substr(16, head_len));

  ModelConfig cfg;
  const auto& jc = header.at("config");
  cfg.d = jc.at("d").get<int>();
  cfg.layers = jc.at("layers").get<int>();
  cfg.n_heads = jc.at("n_heads").get<int>();
  cfg.ffn_mult = jc.at("ffn_mult").get<int>();
  cfg.vocab_size = jc.at("vocab_size").get<int>();
  cfg.max_seq_len = jc.at("max_seq_len").get<int>();
  cfg.rms_epsilon = jc.at("rms_epsilon").get<double>();
  cfg.init_std = jc.at("init_std").get<double>();
  cfg.pos_scale = jc.at("pos_scale").get<double>();
  cfg.init_seed = jc.at("init_seed").get<std::uint64_t>();

  MicroLM model = init_model(cfg);
  if (header.at("lora").at("attached").get<bool>()) {
    LoraConfig lc;
    lc.rank = header.at("lora").at("rank").get<int>();
    lc.alpha = header.at("lora").at("alpha").get<double>();
    lora_wrap(model, lc);
  }
  model.vocab_hash = std::stoull(header.at("vocab_hash").get<std::string>(), nullptr, 16);

  const char* data = blob.data() + 16 + head_len;
  std::size_t data_doubles = (blob.size() - 16 - head_len) / sizeof(double);
  std::map<std::string, std::pair<std::size_t, std::size_t>> directory;
  for (const auto& jt : header.at("tensors")) {
    std::size_t count = jt.at("rows").get<std::size_t>() * jt.at("cols").get<std::size_t>();
    directory[jt.at("name").get<std::string>()] = {jt.at("offset").get<std::size_t>(), count};
  }
  for_each_tensor(model, [&](const std::string& name, Mat& t, TensorKind) {
    auto it = directory.find(name);
    if (it == directory.end()) throw ParseError("checkpoint missing tensor " + name);
    auto [offset, count] = it->second;
    if (count != t.size() || offset + count > data_doubles) {
      throw ParseError("checkpoint tensor " + name + " has wrong shape");
    }
    std::memcpy(t.data.data(), data + offset * sizeof(double), count * sizeof(double));
  });
  return model;
}

}  // namespace dha
