#include "dha/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "dha/errors.hpp"
#include "dha/rng.hpp"
#include "dha/train.hpp"

#include "json.hpp"

namespace dha {

namespace {

std::vector<std::string> whitespace_tokens(const std::string& doc) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < doc.size()) {
    while (i < doc.size() && std::isspace(static_cast<unsigned char>(doc[i]))) ++i;
    std::size_t j = i;
    while (j < doc.size() && !std::isspace(static_cast<unsigned char>(doc[j]))) ++j;
    if (j > i) out.push_back(doc.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

TfidfModel tfidf_fit(const std::vector<std::string>& corpus) {
  if (corpus.empty()) throw ConfigError("tfidf_fit: empty corpus");
  std::map<std::string, std::size_t> doc_freq;
  for (const std::string& doc : corpus) {
    std::set<std::string> seen;
    for (std::string& tok : whitespace_tokens(doc)) seen.insert(std::move(tok));
    for (const std::string& tok : seen) ++doc_freq[tok];
  }
  TfidfModel model;
  model.document_count = corpus.size();
  const double n = static_cast<double>(corpus.size());
  for (const auto& [term, df] : doc_freq) {  // std::map: lexicographic indexing
    model.terms.push_back(term);
    model.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(df))) + 1.0);
  }
  return model;
}

SparseVector tfidf_transform(const std::string& doc, const TfidfModel& model) {
  std::map<int, double> counts;
  for (const std::string& tok : whitespace_tokens(doc)) {
    auto it = std::lower_bound(model.terms.begin(), model.terms.end(), tok);
    if (it != model.terms.end() && *it == tok) {
      counts[static_cast<int>(it - model.terms.begin())] += 1.0;
    }
  }
  SparseVector vec;
  double sq = 0.0;
  for (const auto& [idx, count] : counts) {
    double w = count * model.idf[static_cast<std::size_t>(idx)];
    vec.emplace_back(idx, w);
    sq += w * w;
  }
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& [idx, w] : vec) w *= inv;
  }
  return vec;
}

std::string TfidfModel::to_json() const {
  nlohmann::json j;
  j["terms"] = terms;
  j["idf"] = idf;
  j["N"] = document_count;
  return j.dump() + "\n";
}

TfidfModel TfidfModel::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TfidfModel m;
  m.terms = j.at("terms").get<std::vector<std::string>>();
  m.idf = j.at("idf").get<std::vector<double>>();
  m.document_count = j.at("N").get<std::size_t>();
  if (m.terms.size() != m.idf.size()) throw ParseError("tfidf model terms/idf mismatch");
  return m;
}

namespace {

std::array<double, kNumClasses> linear_logits(const LinearClassifier& m,
                                              const SparseVector& vec) {
  std::array<double, kNumClasses> z{};
  for (int k = 0; k < kNumClasses; ++k) z[static_cast<std::size_t>(k)] = m.bias.at(0, k);
  for (const auto& [idx, w] : vec) {
    if (idx < 0 || idx >= m.weights.cols) throw ShapeError("term index out of range");
    for (int k = 0; k < kNumClasses; ++k) {
      z[static_cast<std::size_t>(k)] += m.weights.at(k, idx) * w;
    }
  }
  return z;
}

std::array<double, kNumClasses> softmax_array(const std::array<double, kNumClasses>& z) {
  double max_z = z[0];
  for (double v : z) max_z = std::max(max_z, v);
  std::array<double, kNumClasses> p{};
  double denom = 0.0;
  for (int k = 0; k < kNumClasses; ++k) {
    p[static_cast<std::size_t>(k)] = std::exp(z[static_cast<std::size_t>(k)] - max_z);
    denom += p[static_cast<std::size_t>(k)];
  }
  for (double& v : p) v /= denom;
  return p;
}

}  // namespace

LinearClassifier linear_fit(const std::vector<SparseVector>& vectors,
                            const std::vector<NarrativeLabel>& labels, int dim,
                            const LinearTrainConfig& cfg) {
  if (vectors.size() != labels.size()) throw ShapeError("vectors/labels size mismatch");
  if (vectors.empty()) throw ConfigError("linear_fit: empty dataset");
  for (const SparseVector& v : vectors) {
    for (const auto& [idx, w] : v) {
      if (idx < 0 || idx >= dim) throw ShapeError("feature index exceeds dimension");
    }
  }

  LinearClassifier model;
  model.weights = Mat(kNumClasses, dim);
  model.bias = Mat(1, kNumClasses);

  AdamW opt(0.9, 0.999, 1e-8, cfg.weight_decay);
  Mat grad_w(kNumClasses, dim);
  Mat grad_b(1, kNumClasses);

  std::vector<std::size_t> order(vectors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::size_t n = vectors.size();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(cfg.seed, 0x11b + static_cast<std::uint64_t>(epoch));
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      grad_w.zero();
      grad_b.zero();
      for (std::size_t i = start; i < end; ++i) {
        const SparseVector& x = vectors[order[i]];
        auto p = softmax_array(linear_logits(model, x));
        const int y = static_cast<int>(labels[order[i]]);
        for (int k = 0; k < kNumClasses; ++k) {
          const double dz = p[static_cast<std::size_t>(k)] - (k == y ? 1.0 : 0.0);
          grad_b.at(0, k) += dz;
          for (const auto& [idx, w] : x) grad_w.at(k, idx) += dz * w;
        }
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (double& v : grad_w.data) v *= inv;
      for (double& v : grad_b.data) v *= inv;
      opt.step({&model.weights, &model.bias}, {&grad_w, &grad_b}, cfg.learning_rate);
    }
  }
  return model;
}

ClassDistribution linear_predict(const LinearClassifier& model, const SparseVector& vec) {
  ClassDistribution dist;
  dist.p = softmax_array(linear_logits(model, vec));
  return dist;
}

NarrativeLabel linear_predict_label(const LinearClassifier& model, const SparseVector& vec) {
  auto dist = linear_predict(model, vec);
  int best = 0;
  for (int k = 1; k < kNumClasses; ++k) {
    if (dist.p[static_cast<std::size_t>(k)] > dist.p[static_cast<std::size_t>(best)]) best = k;
  }
  return static_cast<NarrativeLabel>(best);
}

std::string LinearClassifier::to_json() const {
  nlohmann::json j;
  nlohmann::json rows = nlohmann::json::array();
  for (int k = 0; k < weights.rows; ++k) {
    rows.push_back(std::vector<double>(weights.row(k), weights.row(k) + weights.cols));
  }
  j["weights"] = rows;
  j["bias"] = std::vector<double>(bias.row(0), bias.row(0) + bias.cols);
  return j.dump() + "\n";
}

LinearClassifier LinearClassifier::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
  auto bias = j.at("bias").get<std::vector<double>>();
  if (rows.size() != kNumClasses || bias.size() != kNumClasses) {
    throw ParseError("classifier file has wrong class count");
  }
  LinearClassifier m;
  m.weights = Mat(kNumClasses, static_cast<int>(rows[0].size()));
  for (int k = 0; k < kNumClasses; ++k) {
    if (rows[static_cast<std::size_t>(k)].size() != rows[0].size()) {
      throw ParseError("ragged classifier weight rows");
    }
    std::copy(rows[static_cast<std::size_t>(k)].begin(),
              rows[static_cast<std::size_t>(k)].end(), m.weights.row(k));
  }
  m.bias = Mat(1, kNumClasses);
  std::copy(bias.begin(), bias.end(), m.bias.row(0));
  return m;
}

}  // namespace dha
