#pragma once

#include <cstdint>
#include <vector>

#include "segedit/tensor.hpp"

namespace segedit {

// Dense forward/backward numerics. All functions are pure: inputs are
// immutable, identical inputs produce identical output buffers, and every
// result is finite given finite inputs. Losses accumulate in f64.

// input NCHW, weights OIHW, bias O. Cross-correlation (no kernel flip).
// Requires (H + 2*padding - KH) and (W + 2*padding - KW) divisible by stride.
Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                      int stride, int padding);

struct ConvGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

ConvGrads conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream,
                          int stride, int padding);

Tensor relu_forward(const Tensor& input);
Tensor relu_backward(const Tensor& input, const Tensor& upstream);

Tensor upsample_nearest_forward(const Tensor& input, int factor);
Tensor upsample_nearest_backward(const Tensor& upstream, int factor);

struct LossResult {
  double loss = 0.0;
  Tensor grad;
};

// Mean |pred - target| over unmasked elements; sign(0) = 0 in the gradient.
// Optional mask is a {0,1} tensor with the spatial shape of pred's trailing
// two dims, broadcast over leading dims. A mask selecting zero elements is
// rejected.
LossResult l1_loss(const Tensor& pred, const Tensor& target, const Tensor* mask = nullptr);

// logits N x C x H x W, labels row-major over (n, h, w) in [0, C).
LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<std::int32_t>& labels);

Tensor sgd_step(const Tensor& params, const Tensor& grads, float lr);

}  // namespace segedit
