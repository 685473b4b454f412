#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dha/baselines.hpp"
#include "dha/errors.hpp"
#include "dha/rng.hpp"

using namespace dha;

TEST_CASE("idf saturates at 1 for a term in every document") {
  std::vector<std::string> corpus(100, "common filler");
  TfidfModel m = tfidf_fit(corpus);
  // ln(101/101) + 1 = 1.0 for both terms
  for (double idf : m.idf) CHECK(idf == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.document_count == 100);
}

TEST_CASE("idf hand value for a term in 1 of 3 docs") {
  TfidfModel m = tfidf_fit({"aaa rare", "aaa", "aaa"});
  auto idx = [&](const std::string& t) {
    for (std::size_t i = 0; i < m.terms.size(); ++i) {
      if (m.terms[i] == t) return static_cast<int>(i);
    }
    return -1;
  };
  REQUIRE(idx("rare") >= 0);
  CHECK(m.idf[static_cast<std::size_t>(idx("rare"))] ==
        doctest::Approx(1.0 + std::log(2.0)).epsilon(1e-12));
  CHECK(m.idf[static_cast<std::size_t>(idx("rare"))] == doctest::Approx(1.6931).epsilon(1e-4));
  CHECK(m.idf[static_cast<std::size_t>(idx("aaa"))] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("refit on the same corpus is identical") {
  std::vector<std::string> corpus = {"a b c", "b c d", "c d e f", "a a a b"};
  TfidfModel m1 = tfidf_fit(corpus);
  TfidfModel m2 = tfidf_fit(corpus);
  CHECK(m1.terms == m2.terms);
  CHECK(m1.idf == m2.idf);

  SparseVector v1 = tfidf_transform(corpus[2], m1);
  SparseVector v2 = tfidf_transform(corpus[2], m2);
  CHECK(v1 == v2);
  CHECK_THROWS_AS((void)tfidf_fit({}), ConfigError);
}

TEST_CASE("transform normalization cases") {
  TfidfModel m = tfidf_fit({"alpha beta", "alpha gamma", "delta"});
  SparseVector single = tfidf_transform("delta", m);
  REQUIRE(single.size() == 1);
  CHECK(single[0].second == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(tfidf_transform("", m).empty());
  CHECK(tfidf_transform("unseen words only", m).empty());
}

TEST_CASE("3-document golden vectors, hand computed") {
  // docs: d0 = "cat dog", d1 = "cat cat fish", d2 = "dog"
  // df: cat 2, dog 2, fish 1; idf = ln(4/(1+df)) + 1
  TfidfModel m = tfidf_fit({"cat dog", "cat cat fish", "dog"});
  const double idf_cat = std::log(4.0 / 3.0) + 1.0;
  const double idf_dog = std::log(4.0 / 3.0) + 1.0;
  const double idf_fish = std::log(4.0 / 2.0) + 1.0;

  // d1: tf(cat)=2, tf(fish)=1 -> weights (2*idf_cat, idf_fish), L2-normalized
  SparseVector v = tfidf_transform("cat cat fish", m);
  REQUIRE(v.size() == 2);
  const double w_cat = 2.0 * idf_cat;
  const double w_fish = idf_fish;
  const double norm = std::sqrt(w_cat * w_cat + w_fish * w_fish);
  // terms sorted lexicographically: cat < dog < fish
  CHECK(m.terms[static_cast<std::size_t>(v[0].first)] == "cat");
  CHECK(v[0].second == doctest::Approx(w_cat / norm).epsilon(1e-12));
  CHECK(m.terms[static_cast<std::size_t>(v[1].first)] == "fish");
  CHECK(v[1].second == doctest::Approx(w_fish / norm).epsilon(1e-12));

  SparseVector v0 = tfidf_transform("cat dog", m);
  const double n0 = std::sqrt(idf_cat * idf_cat + idf_dog * idf_dog);
  CHECK(v0[0].second == doctest::Approx(idf_cat / n0).epsilon(1e-12));
}

TEST_CASE("transforms have unit or zero L2 norm") {
  std::vector<std::string> corpus;
  Rng rng(12);
  const char* words[] = {"aa", "bb", "cc", "dd", "ee", "ff", "gg"};
  for (int i = 0; i < 60; ++i) {
    std::string doc;
    for (int w = 0; w < 1 + static_cast<int>(rng.next_below(8)); ++w) {
      doc += std::string(words[rng.next_below(7)]) + " ";
    }
    corpus.push_back(doc);
  }
  TfidfModel m = tfidf_fit(corpus);
  for (const std::string& doc : corpus) {
    SparseVector v = tfidf_transform(doc, m);
    double sq = 0.0;
    for (auto& [idx, w] : v) sq += w * w;
    if (v.empty()) {
      CHECK(sq == 0.0);
    } else {
      CHECK(std::abs(std::sqrt(sq) - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("tfidf model json round trip") {
  TfidfModel m = tfidf_fit({"cat dog", "cat fish"});
  TfidfModel back = TfidfModel::from_json(m.to_json());
  CHECK(back.terms == m.terms);
  CHECK(back.idf == m.idf);
  CHECK(back.document_count == m.document_count);
}

TEST_CASE("zero weights give the uniform distribution") {
  LinearClassifier m;
  m.weights = Mat(kNumClasses, 5);
  m.bias = Mat(1, kNumClasses);
  ClassDistribution d = linear_predict(m, {{0, 1.0}, {3, 0.5}});
  for (double p : d.p) CHECK(p == doctest::Approx(1.0 / 7).epsilon(1e-12));
}

TEST_CASE("prediction distributions sum to one on fuzzed inputs") {
  Rng rng(5);
  LinearClassifier m;
  m.weights = Mat(kNumClasses, 20);
  m.bias = Mat(1, kNumClasses);
  m.weights.fill_normal(rng, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    SparseVector v;
    for (int idx = 0; idx < 20; ++idx) {
      if (rng.bernoulli(0.3)) v.emplace_back(idx, rng.normal());
    }
    ClassDistribution d = linear_predict(m, v);
    double sum = 0.0;
    for (double p : d.p) sum += p;
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("separable toy set reaches full training accuracy") {
  // class k marked by dedicated feature k
  std::vector<SparseVector> xs;
  std::vector<NarrativeLabel> ys;
  Rng rng(9);
  for (int i = 0; i < 140; ++i) {
    int k = i % kNumClasses;
    SparseVector v;
    v.emplace_back(k, 1.0);
    v.emplace_back(7 + static_cast<int>(rng.next_below(5)), 0.3);  // noise feature
    xs.push_back(v);
    ys.push_back(static_cast<NarrativeLabel>(k));
  }
  LinearTrainConfig cfg;
  cfg.epochs = 80;
  cfg.learning_rate = 0.1;
  LinearClassifier m = linear_fit(xs, ys, 12, cfg);
  int hits = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (linear_predict_label(m, xs[i]) == ys[i]) ++hits;
  }
  CHECK(hits == 140);
}

TEST_CASE("fit is deterministic and validates shapes") {
  std::vector<SparseVector> xs = {{{0, 1.0}}, {{1, 1.0}}};
  std::vector<NarrativeLabel> ys = {NarrativeLabel::SSV, NarrativeLabel::GUD};
  LinearTrainConfig cfg;
  cfg.epochs = 3;
  LinearClassifier a = linear_fit(xs, ys, 2, cfg);
  LinearClassifier b = linear_fit(xs, ys, 2, cfg);
  CHECK(a.weights.data == b.weights.data);
  CHECK(a.bias.data == b.bias.data);

  CHECK_THROWS_AS((void)linear_fit(xs, {NarrativeLabel::SSV}, 2, cfg), ShapeError);
  CHECK_THROWS_AS((void)linear_fit({{{5, 1.0}}}, {NarrativeLabel::SSV}, 2, cfg), ShapeError);

  LinearClassifier back = LinearClassifier::from_json(a.to_json());
  CHECK(back.weights.data == a.weights.data);
  CHECK(back.bias.data == a.bias.data);
}
