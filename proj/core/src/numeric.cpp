#include "ordinal/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace ordinal {

OrdinalDistribution OrdinalDistribution::from_probs(Vec p) {
  require(p.size() >= 2, "OrdinalDistribution: need at least 2 classes");
  double sum = 0.0;
  for (double x : p) {
    require(std::isfinite(x) && x >= 0.0 && x <= 1.0,
            "OrdinalDistribution: probabilities must lie in [0,1]");
    sum += x;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "OrdinalDistribution: probabilities must sum to 1");
  return OrdinalDistribution{std::move(p)};
}

double logsumexp(const Vec& z) {
  require(!z.empty(), "logsumexp: empty input");
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double x : z) s += std::exp(x - m);
  return m + std::log(s);
}

OrdinalDistribution softmax(const Vec& logits) {
  require(logits.size() >= 2, "softmax: need at least 2 logits");
  require(all_finite(logits), "softmax: logits must be finite");
  const double m = *std::max_element(logits.begin(), logits.end());
  Vec p(logits.size());
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    s += p[i];
  }
  for (double& x : p) x /= s;
  return OrdinalDistribution{std::move(p)};
}

Vec log_softmax(const Vec& logits) {
  require(logits.size() >= 2, "log_softmax: need at least 2 logits");
  require(all_finite(logits), "log_softmax: logits must be finite");
  const double lse = logsumexp(logits);
  Vec out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

double clamped_log1m(double p, double eps) {
  require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "clamped_log1m: p must lie in [0,1]");
  require(eps > 0.0 && eps < 1.0, "clamped_log1m: eps must lie in (0,1)");
  return std::log(std::max(1.0 - p, eps));
}

Vec affine(const Mat& W, const Vec& b, const Vec& x) {
  require(W.cols == x.size() && W.rows == b.size(), "affine: shape mismatch");
  Vec out(W.rows);
  for (std::size_t o = 0; o < W.rows; ++o) {
    const double* w = W.row(o);
    double acc = b[o];
    for (std::size_t i = 0; i < W.cols; ++i) acc += w[i] * x[i];
    out[o] = acc;
  }
  return out;
}

AffineGrads affine_backward(const Mat& W, const Vec& x, const Vec& dout) {
  require(W.cols == x.size() && W.rows == dout.size(), "affine_backward: shape mismatch");
  AffineGrads g;
  g.dx.assign(x.size(), 0.0);
  g.dW = Mat(W.rows, W.cols);
  g.db = dout;
  for (std::size_t o = 0; o < W.rows; ++o) {
    const double d = dout[o];
    const double* w = W.row(o);
    double* dw = g.dW.row(o);
    for (std::size_t i = 0; i < W.cols; ++i) {
      dw[i] = d * x[i];
      g.dx[i] += d * w[i];
    }
  }
  return g;
}

Mat affine(const Mat& W, const Vec& b, const Mat& X) {
  require(W.cols == X.cols && W.rows == b.size(), "affine: shape mismatch");
  Mat out(X.rows, W.rows);
  for (std::size_t r = 0; r < X.rows; ++r) {
    const double* x = X.row(r);
    double* dst = out.row(r);
    for (std::size_t o = 0; o < W.rows; ++o) {
      const double* w = W.row(o);
      double acc = b[o];
      for (std::size_t i = 0; i < W.cols; ++i) acc += w[i] * x[i];
      dst[o] = acc;
    }
  }
  return out;
}

AffineBatchGrads affine_backward(const Mat& W, const Mat& X, const Mat& dOut) {
  require(W.cols == X.cols && dOut.rows == X.rows && dOut.cols == W.rows,
          "affine_backward: shape mismatch");
  AffineBatchGrads g;
  g.dX = Mat(X.rows, X.cols);
  g.dW = Mat(W.rows, W.cols);
  g.db.assign(W.rows, 0.0);
  for (std::size_t r = 0; r < X.rows; ++r) {
    const double* x = X.row(r);
    const double* d = dOut.row(r);
    double* dx = g.dX.row(r);
    for (std::size_t o = 0; o < W.rows; ++o) {
      const double dv = d[o];
      g.db[o] += dv;
      const double* w = W.row(o);
      double* dw = g.dW.row(o);
      for (std::size_t i = 0; i < W.cols; ++i) {
        dw[i] += dv * x[i];
        dx[i] += dv * w[i];
      }
    }
  }
  return g;
}

Vec relu(const Vec& x) {
  require(all_finite(x), "relu: input must be finite");
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return out;
}

Vec relu_backward(const Vec& dout, const Vec& x) {
  require(dout.size() == x.size(), "relu_backward: shape mismatch");
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? dout[i] : 0.0;
  return out;
}

Mat relu(const Mat& X) {
  require(all_finite(X), "relu: input must be finite");
  Mat out(X.rows, X.cols);
  for (std::size_t i = 0; i < X.data.size(); ++i)
    out.data[i] = X.data[i] > 0.0 ? X.data[i] : 0.0;
  return out;
}

Mat relu_backward(const Mat& dOut, const Mat& X) {
  require(dOut.same_shape(X), "relu_backward: shape mismatch");
  Mat out(X.rows, X.cols);
  for (std::size_t i = 0; i < X.data.size(); ++i)
    out.data[i] = X.data[i] > 0.0 ? dOut.data[i] : 0.0;
  return out;
}

}  // namespace ordinal
