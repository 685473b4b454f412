#pragma once

#include <cstddef>
#include <vector>

#include "dha/rng.hpp"

namespace dha {

// Dense row-major matrix of doubles. Small by design; the model only needs a
// handful of contraction patterns, each written out below with contiguous
// inner loops.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }
  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  std::size_t size() const { return data.size(); }
  void zero() { std::fill(data.begin(), data.end(), 0.0); }
  bool same_shape(const Mat& other) const {
    return rows == other.rows && cols == other.cols;
  }

  void fill_normal(Rng& rng, double std_dev) {
    for (double& v : data) v = rng.normal() * std_dev;
  }
};

// y = x * w^T (+y if accumulate): x n*k, w m*k -> y n*m.
void matmul_nt(const Mat& x, const Mat& w, Mat& y, bool accumulate = false);
// y = x * w (+y): x n*k, w k*m -> y n*m.
void matmul_nn(const Mat& x, const Mat& w, Mat& y, bool accumulate = false);
// out = a^T * b (+out): a n*m, b n*k -> out m*k. Gradient contraction.
void matmul_tn(const Mat& a, const Mat& b, Mat& out, bool accumulate = false);

bool all_finite(const Mat& m);

}  // namespace dha
