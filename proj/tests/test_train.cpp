#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "dha/errors.hpp"
#include "dha/rng.hpp"
#include "dha/train.hpp"

using namespace dha;

namespace {

ModelConfig tiny_config(int d = 16, int layers = 2) {
  ModelConfig cfg;
  cfg.d = d;
  cfg.layers = layers;
  cfg.n_heads = 2;
  cfg.ffn_mult = 4;
  cfg.vocab_size = 280;
  cfg.max_seq_len = 32;
  cfg.init_seed = 11;
  cfg.init_std = 0.02;
  return cfg;
}

MicroLM tiny_adapted(int d = 16, int layers = 2, int rank = 2, std::uint64_t seed = 11) {
  ModelConfig cfg = tiny_config(d, layers);
  cfg.init_seed = seed;
  MicroLM m = init_model(cfg);
  LoraConfig lc;
  lc.rank = rank;
  lc.alpha = 2.0 * rank;
  lora_wrap(m, lc);
  return m;
}

// distinct token patterns, one per class, cycling
std::vector<TrainExample> toy_dataset(int count, int vocab, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TrainExample> out;
  for (int i = 0; i < count; ++i) {
    TrainExample ex;
    ex.label = static_cast<NarrativeLabel>(i % kNumClasses);
    ex.ids.push_back(kBosId);
    ex.ids.push_back(kSysId);
    // class-identifying pattern plus per-example noise token
    ex.ids.push_back(kFirstWordId + (i % kNumClasses));
    ex.ids.push_back(static_cast<int>(
        kFirstWordId + kNumClasses +
        rng.next_below(static_cast<std::uint64_t>(vocab - kFirstWordId - kNumClasses))));
    ex.ids.push_back(kAsstId);
    out.push_back(std::move(ex));
  }
  return out;
}

std::uint64_t base_tensor_hash(const MicroLM& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for_each_tensor(m, [&](const std::string&, const Mat& t, TensorKind kind) {
    if (kind != TensorKind::Base) return;
    h = fnv1a64(reinterpret_cast<const char*>(t.data.data()),
                t.data.size() * sizeof(double), h);
  });
  return h;
}

std::vector<double> adapter_snapshot(const MicroLM& m) {
  std::vector<double> out;
  for_each_tensor(m, [&](const std::string&, const Mat& t, TensorKind kind) {
    if (kind != TensorKind::Adapter) return;
    out.insert(out.end(), t.data.begin(), t.data.end());
  });
  return out;
}

}  // namespace

TEST_CASE("target token loss hand cases") {
  std::vector<double> z(280, 0.0);
  // uniform class logits -> ln 7
  CHECK(target_token_loss(z, NarrativeLabel::LDV) ==
        doctest::Approx(std::log(7.0)).epsilon(1e-12));
  CHECK(target_token_loss(z, NarrativeLabel::LDV) == doctest::Approx(1.94591).epsilon(1e-5));

  // p_label -> 1 drives loss -> 0
  z[static_cast<std::size_t>(class_token_id(NarrativeLabel::MSE))] = 60.0;
  CHECK(target_token_loss(z, NarrativeLabel::MSE) == doctest::Approx(0.0).epsilon(1e-12));

  // non-class logits do not contribute
  std::vector<double> z2 = z;
  for (std::size_t i = 0; i < z2.size(); ++i) {
    if (i < kClassTokenBase || i >= kClassTokenBase + kNumClasses) z2[i] += 123.0;
  }
  CHECK(target_token_loss(z2, NarrativeLabel::SSV) ==
        doctest::Approx(target_token_loss(z, NarrativeLabel::SSV)).epsilon(1e-12));

  z[3] = std::numeric_limits<double>::quiet_NaN();  // non-class entry: still fine
  CHECK(std::isfinite(target_token_loss(z, NarrativeLabel::SSV)));
  z[static_cast<std::size_t>(kClassTokenBase)] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS((void)target_token_loss(z, NarrativeLabel::SSV), NumericError);
}

TEST_CASE("gradient check on a small adapted model") {
  MicroLM m = tiny_adapted(16, 2, 2);
  // move B off zero so every adapter path carries gradient
  Rng rng(4);
  for (auto& layer : m.layers) {
    for (Projection* p : {&layer.wq, &layer.wk, &layer.wv, &layer.wo, &layer.w_gate,
                          &layer.w_up, &layer.w_down}) {
      p->lora->b.fill_normal(rng, 0.05);
    }
  }
  std::vector<int> ids = {kBosId, kFirstWordId + 5, kFirstWordId + 9, 40, kAsstId};
  double err = grad_check(m, ids, NarrativeLabel::RWTCV, 1e-4);
  CHECK(err < 1e-4);
}

TEST_CASE("lora gradient structure at B = 0") {
  MicroLM m = tiny_adapted();
  Gradients g = make_gradients(m, /*want_base=*/true);
  std::vector<int> ids = {kBosId, kFirstWordId + 2, kAsstId};
  loss_and_backward(m, ids, NarrativeLabel::GUD, g);

  // dL/dA = (alpha/r) B^T (upstream) x^T = 0 when B = 0; dL/dB flows
  double a_mag = 0.0, b_mag = 0.0;
  for (const auto& layer : g.layers) {
    for (const Gradients::Proj* gp :
         {&layer.wq, &layer.wk, &layer.wv, &layer.wo, &layer.w_gate, &layer.w_up,
          &layer.w_down}) {
      for (double v : gp->a.data) a_mag += std::abs(v);
      for (double v : gp->b.data) b_mag += std::abs(v);
    }
  }
  CHECK(a_mag == 0.0);
  CHECK(b_mag > 0.0);
}

TEST_CASE("head gradients flow only through the class-token rows") {
  MicroLM m = tiny_adapted();
  Gradients g = make_gradients(m, /*want_base=*/true);
  std::vector<int> ids = {kBosId, kFirstWordId + 2, kAsstId};
  loss_and_backward(m, ids, NarrativeLabel::SSV, g);
  // the shared-vocabulary head carries no gradient at all
  for (int o = 0; o < m.cfg.vocab_size; ++o) {
    CHECK(g.head_b.at(0, o) == 0.0);
    for (int j = 0; j < m.cfg.d; ++j) CHECK(g.head_w.at(o, j) == 0.0);
  }
  // class rows do carry gradient and the bias gradients sum to zero
  double sum = 0.0, mag = 0.0;
  for (int k = 0; k < kNumClasses; ++k) {
    sum += g.class_head_b.at(0, k);
    mag += std::abs(g.class_head_b.at(0, k));
  }
  CHECK(mag > 0.0);
  CHECK(std::abs(sum) < 1e-12);
}

TEST_CASE("zero steps leaves the checkpoint at initialization") {
  MicroLM m = tiny_adapted();
  auto before = adapter_snapshot(m);
  TrainConfig cfg;
  cfg.steps = 0;
  cfg.epochs = 0;
  TrainReport rep = train(m, toy_dataset(8, 280, 1), cfg);
  CHECK(rep.steps == 0);
  CHECK(adapter_snapshot(m) == before);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  MicroLM m = tiny_adapted();
  auto before = adapter_snapshot(m);
  std::uint64_t base_before = base_tensor_hash(m);
  TrainConfig cfg;
  cfg.steps = 5;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.0;
  cfg.weight_decay = 0.0;
  train(m, toy_dataset(8, 280, 1), cfg);
  CHECK(adapter_snapshot(m) == before);
  CHECK(base_tensor_hash(m) == base_before);
}

TEST_CASE("training updates adapters only; base tensors stay bit-identical") {
  MicroLM m = tiny_adapted();
  std::uint64_t base_before = base_tensor_hash(m);
  auto adapters_before = adapter_snapshot(m);
  TrainConfig cfg;
  cfg.steps = 20;
  cfg.batch_size = 4;
  cfg.learning_rate = 5e-3;
  train(m, toy_dataset(16, 280, 2), cfg);
  CHECK(base_tensor_hash(m) == base_before);
  CHECK(adapter_snapshot(m) != adapters_before);
}

TEST_CASE("training is deterministic under the seed") {
  auto run = [&] {
    MicroLM m = tiny_adapted();
    TrainConfig cfg;
    cfg.steps = 15;
    cfg.batch_size = 4;
    cfg.learning_rate = 5e-3;
    cfg.seed = 33;
    train(m, toy_dataset(16, 280, 2), cfg);
    return adapter_snapshot(m);
  };
  CHECK(run() == run());
}

TEST_CASE("toy memorization reaches full training accuracy") {
  MicroLM m = tiny_adapted(32, 2, 4);
  auto data = toy_dataset(16, 280, 3);
  TrainConfig cfg;
  cfg.steps = 400;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e-2;
  cfg.weight_decay = 0.0;
  std::ostringstream log;
  TrainReport rep = train(m, data, cfg, nullptr, &log);
  CHECK(rep.losses.front() > rep.losses.back());
  CHECK(accuracy(m, data) == doctest::Approx(1.0));
  CHECK(log.str().find("\"loss\"") != std::string::npos);
}

TEST_CASE("loss decreases over the first 100 steps for at least 9 of 10 seeds") {
  int improved = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    MicroLM m = tiny_adapted(16, 2, 2, /*seed=*/seed * 7 + 1);
    auto data = toy_dataset(32, 280, seed);
    TrainConfig cfg;
    cfg.steps = 100;
    cfg.batch_size = 8;
    cfg.learning_rate = 1e-2;
    cfg.seed = seed;
    TrainReport rep = train(m, data, cfg);
    double head = 0.0, tail = 0.0;
    for (int i = 0; i < 10; ++i) {
      head += rep.losses[static_cast<std::size_t>(i)];
      tail += rep.losses[rep.losses.size() - 1 - static_cast<std::size_t>(i)];
    }
    if (tail < head) ++improved;
  }
  CHECK(improved >= 9);
}

TEST_CASE("divergence aborts with a diagnostic") {
  MicroLM m = tiny_adapted();
  TrainConfig cfg;
  cfg.steps = 50;
  cfg.batch_size = 4;
  cfg.learning_rate = 1e18;  // guaranteed blow-up
  cfg.grad_clip_norm = 0.0;  // disable clipping so the blow-up lands
  CHECK_THROWS_AS(train(m, toy_dataset(8, 280, 4), cfg), NumericError);
}

TEST_CASE("training rejects bad inputs") {
  MicroLM plain = init_model(tiny_config());
  TrainConfig cfg;
  CHECK_THROWS_AS(train(plain, toy_dataset(4, 280, 1), cfg), ConfigError);
  MicroLM adapted = tiny_adapted();
  CHECK_THROWS_AS(train(adapted, {}, cfg), ConfigError);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("eval hook reports accuracy series") {
  MicroLM m = tiny_adapted();
  auto data = toy_dataset(16, 280, 5);
  TrainConfig cfg;
  cfg.steps = 20;
  cfg.batch_size = 4;
  cfg.eval_every = 10;
  TrainReport rep = train(m, data, cfg, &data);
  REQUIRE(rep.eval_accuracy.size() == 2);
  CHECK(rep.eval_accuracy[0].first == 10);
  CHECK(rep.eval_accuracy[1].first == 20);
}
