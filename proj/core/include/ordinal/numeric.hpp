#pragma once

#include "ordinal/tensor.hpp"
#include "ordinal/types.hpp"

namespace ordinal {

/// log(sum_i exp(z_i)), max-shifted.
double logsumexp(const Vec& z);

/// Stable softmax (max subtraction). Input must be finite, length >= 2.
OrdinalDistribution softmax(const Vec& logits);

/// log of softmax, computed in the log domain.
Vec log_softmax(const Vec& logits);

/// ln(max(1 - p, eps)) for p in [0, 1].
double clamped_log1m(double p, double eps = kLogEps);

// --- Dense affine layer: out = W x + b, W is (out x in) ------------------

Vec affine(const Mat& W, const Vec& b, const Vec& x);

struct AffineGrads {
  Vec dx;
  Mat dW;
  Vec db;
};
AffineGrads affine_backward(const Mat& W, const Vec& x, const Vec& dout);

// Batched variants operating on row-major batches (one sample per row).
Mat affine(const Mat& W, const Vec& b, const Mat& X);

struct AffineBatchGrads {
  Mat dX;
  Mat dW;
  Vec db;
};
AffineBatchGrads affine_backward(const Mat& W, const Mat& X, const Mat& dOut);

// --- ReLU ---------------------------------------------------------------

Vec relu(const Vec& x);
/// Masks dout where x <= 0 (subgradient 0 at x = 0).
Vec relu_backward(const Vec& dout, const Vec& x);

Mat relu(const Mat& X);
Mat relu_backward(const Mat& dOut, const Mat& X);

}  // namespace ordinal
