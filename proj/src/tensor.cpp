#include "dha/tensor.hpp"

#include <cmath>

#include "dha/errors.hpp"

namespace dha {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace

void matmul_nt(const Mat& x, const Mat& w, Mat& y, bool accumulate) {
  require(x.cols == w.cols, "matmul_nt: inner dimensions differ");
  require(y.rows == x.rows && y.cols == w.rows, "matmul_nt: bad output shape");
  const int k = x.cols;
  const int m = w.rows;
  for (int i = 0; i < x.rows; ++i) {
    const double* xi = x.row(i);
    double* yi = y.row(i);
    int o = 0;
    // 4 weight rows per pass so xi stays hot
    for (; o + 4 <= m; o += 4) {
      const double* w0 = w.row(o);
      const double* w1 = w.row(o + 1);
      const double* w2 = w.row(o + 2);
      const double* w3 = w.row(o + 3);
      double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
      for (int j = 0; j < k; ++j) {
        const double xj = xi[j];
        a0 += xj * w0[j];
        a1 += xj * w1[j];
        a2 += xj * w2[j];
        a3 += xj * w3[j];
      }
      if (accumulate) {
        yi[o] += a0;
        yi[o + 1] += a1;
        yi[o + 2] += a2;
        yi[o + 3] += a3;
      } else {
        yi[o] = a0;
        yi[o + 1] = a1;
        yi[o + 2] = a2;
        yi[o + 3] = a3;
      }
    }
    for (; o < m; ++o) {
      const double* wo = w.row(o);
      double acc = 0.0;
      for (int j = 0; j < k; ++j) acc += xi[j] * wo[j];
      yi[o] = accumulate ? yi[o] + acc : acc;
    }
  }
}

void matmul_nn(const Mat& x, const Mat& w, Mat& y, bool accumulate) {
  require(x.cols == w.rows, "matmul_nn: inner dimensions differ");
  require(y.rows == x.rows && y.cols == w.cols, "matmul_nn: bad output shape");
  const int m = w.cols;
  for (int i = 0; i < x.rows; ++i) {
    const double* xi = x.row(i);
    double* yi = y.row(i);
    if (!accumulate) {
      for (int j = 0; j < m; ++j) yi[j] = 0.0;
    }
    for (int k = 0; k < x.cols; ++k) {
      const double s = xi[k];
      if (s == 0.0) continue;
      const double* wk = w.row(k);
      for (int j = 0; j < m; ++j) yi[j] += s * wk[j];
    }
  }
}

void matmul_tn(const Mat& a, const Mat& b, Mat& out, bool accumulate) {
  require(a.rows == b.rows, "matmul_tn: outer dimensions differ");
  require(out.rows == a.cols && out.cols == b.cols, "matmul_tn: bad output shape");
  if (!accumulate) out.zero();
  const int m = b.cols;
  for (int i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    const double* bi = b.row(i);
    for (int o = 0; o < a.cols; ++o) {
      const double s = ai[o];
      if (s == 0.0) continue;
      double* oo = out.row(o);
      for (int j = 0; j < m; ++j) oo[j] += s * bi[j];
    }
  }
}

bool all_finite(const Mat& m) {
  for (double v : m.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace dha
