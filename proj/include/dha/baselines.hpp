#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dha/labels.hpp"
#include "dha/model.hpp"
#include "dha/tensor.hpp"

namespace dha {

// Sparse document vector: (term index, weight) pairs sorted by index.
using SparseVector = std::vector<std::pair<int, double>>;

// Whitespace-token TF-IDF with smoothed idf, idf(t) = ln((1+N)/(1+df)) + 1,
// and L2-normalized transforms.
struct TfidfModel {
  std::vector<std::string> terms;  // lexicographic; index is the term id
  std::vector<double> idf;
  std::size_t document_count = 0;

  std::string to_json() const;
  static TfidfModel from_json(const std::string& text);
};

TfidfModel tfidf_fit(const std::vector<std::string>& corpus);
SparseVector tfidf_transform(const std::string& doc, const TfidfModel& model);

struct LinearTrainConfig {
  std::uint64_t seed = 9;
  int epochs = 60;
  int batch_size = 64;
  double learning_rate = 0.05;
  double weight_decay = 1e-4;
};

// Multinomial softmax regression over TF-IDF vectors.
struct LinearClassifier {
  Mat weights;  // 7 x V
  Mat bias;     // 1 x 7

  std::string to_json() const;
  static LinearClassifier from_json(const std::string& text);
};

LinearClassifier linear_fit(const std::vector<SparseVector>& vectors,
                            const std::vector<NarrativeLabel>& labels, int dim,
                            const LinearTrainConfig& cfg);

ClassDistribution linear_predict(const LinearClassifier& model, const SparseVector& vec);
NarrativeLabel linear_predict_label(const LinearClassifier& model, const SparseVector& vec);

}  // namespace dha
