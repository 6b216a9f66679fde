#include "segedit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace segedit {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void check_conv_shapes(const Tensor& input, const Tensor& weights, int stride, int padding) {
  require(input.rank() == 4, "conv2d: input must be NCHW, got " + input.shape_str());
  require(weights.rank() == 4, "conv2d: weights must be OIHW, got " + weights.shape_str());
  require(stride >= 1, "conv2d: stride must be positive");
  require(padding >= 0, "conv2d: padding must be non-negative");
  require(input.dim(1) == weights.dim(1),
          "conv2d: input channels " + input.shape_str() + " do not match weights " +
              weights.shape_str());
  const int h = input.dim(2), w = input.dim(3);
  const int kh = weights.dim(2), kw = weights.dim(3);
  const int hs = h + 2 * padding - kh;
  const int ws = w + 2 * padding - kw;
  require(hs >= 0 && ws >= 0 && hs % stride == 0 && ws % stride == 0,
          "conv2d: spatial dims of input " + input.shape_str() + " and kernel " +
              weights.shape_str() + " do not yield integral output dims");
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                      int stride, int padding) {
  check_conv_shapes(input, weights, stride, padding);
  require(bias.rank() == 1 && bias.dim(0) == weights.dim(0),
          "conv2d: bias shape " + bias.shape_str() + " does not match weights " +
              weights.shape_str());

  const int n = input.dim(0), ci = input.dim(1), h = input.dim(2), w = input.dim(3);
  const int co = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
  const int ho = (h + 2 * padding - kh) / stride + 1;
  const int wo = (w + 2 * padding - kw) / stride + 1;

  Tensor out({n, co, ho, wo});
  const float* in = input.data();
  const float* wt = weights.data();
  const float* b = bias.data();
  float* o = out.data();

  for (int bn = 0; bn < n; ++bn) {
    for (int oc = 0; oc < co; ++oc) {
      for (int oy = 0; oy < ho; ++oy) {
        const int iy0 = oy * stride - padding;
        for (int ox = 0; ox < wo; ++ox) {
          const int ix0 = ox * stride - padding;
          float acc = b[oc];
          for (int ic = 0; ic < ci; ++ic) {
            const float* in_c = in + (static_cast<std::size_t>(bn) * ci + ic) * h * w;
            const float* w_c =
                wt + ((static_cast<std::size_t>(oc) * ci + ic) * kh) * kw;
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = iy0 + ky;
              if (iy < 0 || iy >= h) continue;
              const float* in_row = in_c + static_cast<std::size_t>(iy) * w;
              const float* w_row = w_c + static_cast<std::size_t>(ky) * kw;
              for (int kx = 0; kx < kw; ++kx) {
                const int ix = ix0 + kx;
                if (ix < 0 || ix >= w) continue;
                acc += in_row[ix] * w_row[kx];
              }
            }
          }
          o[((static_cast<std::size_t>(bn) * co + oc) * ho + oy) * wo + ox] = acc;
        }
      }
    }
  }
  return out;
}

ConvGrads conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream,
                          int stride, int padding) {
  check_conv_shapes(input, weights, stride, padding);
  const int n = input.dim(0), ci = input.dim(1), h = input.dim(2), w = input.dim(3);
  const int co = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
  const int ho = (h + 2 * padding - kh) / stride + 1;
  const int wo = (w + 2 * padding - kw) / stride + 1;
  require(upstream.rank() == 4 && upstream.dim(0) == n && upstream.dim(1) == co &&
              upstream.dim(2) == ho && upstream.dim(3) == wo,
          "conv2d_backward: upstream shape " + upstream.shape_str() +
              " does not match forward output");

  ConvGrads g{Tensor(input.shape()), Tensor(weights.shape()), Tensor({co})};
  const float* in = input.data();
  const float* wt = weights.data();
  const float* up = upstream.data();
  float* gi = g.input.data();
  float* gw = g.weights.data();
  float* gb = g.bias.data();

  for (int bn = 0; bn < n; ++bn) {
    for (int oc = 0; oc < co; ++oc) {
      const float* up_c = up + (static_cast<std::size_t>(bn) * co + oc) * ho * wo;
      for (int oy = 0; oy < ho; ++oy) {
        const int iy0 = oy * stride - padding;
        for (int ox = 0; ox < wo; ++ox) {
          const float u = up_c[static_cast<std::size_t>(oy) * wo + ox];
          if (u == 0.0f) continue;
          const int ix0 = ox * stride - padding;
          gb[oc] += u;
          for (int ic = 0; ic < ci; ++ic) {
            const std::size_t in_base = (static_cast<std::size_t>(bn) * ci + ic) * h * w;
            const std::size_t w_base = (static_cast<std::size_t>(oc) * ci + ic) * kh * kw;
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = iy0 + ky;
              if (iy < 0 || iy >= h) continue;
              for (int kx = 0; kx < kw; ++kx) {
                const int ix = ix0 + kx;
                if (ix < 0 || ix >= w) continue;
                const std::size_t in_idx = in_base + static_cast<std::size_t>(iy) * w + ix;
                const std::size_t w_idx = w_base + static_cast<std::size_t>(ky) * kw + kx;
                gw[w_idx] += u * in[in_idx];
                gi[in_idx] += u * wt[w_idx];
              }
            }
          }
        }
      }
    }
  }
  return g;
}

Tensor relu_forward(const Tensor& input) {
  Tensor out(input.shape());
  const float* in = input.data();
  float* o = out.data();
  for (std::size_t i = 0; i < input.size(); ++i) o[i] = in[i] > 0.0f ? in[i] : 0.0f;
  return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& upstream) {
  require(input.same_shape(upstream), "relu_backward: shape mismatch between input " +
                                          input.shape_str() + " and upstream " +
                                          upstream.shape_str());
  Tensor out(input.shape());
  const float* in = input.data();
  const float* up = upstream.data();
  float* o = out.data();
  for (std::size_t i = 0; i < input.size(); ++i) o[i] = in[i] > 0.0f ? up[i] : 0.0f;
  return out;
}

Tensor upsample_nearest_forward(const Tensor& input, int factor) {
  require(input.rank() == 4, "upsample: input must be NCHW, got " + input.shape_str());
  require(factor >= 1, "upsample: factor must be >= 1");
  const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  Tensor out({n, c, h * factor, w * factor});
  const float* in = input.data();
  float* o = out.data();
  const int ho = h * factor, wo = w * factor;
  for (int i = 0; i < n * c; ++i) {
    const float* in_p = in + static_cast<std::size_t>(i) * h * w;
    float* o_p = o + static_cast<std::size_t>(i) * ho * wo;
    for (int y = 0; y < ho; ++y) {
      const float* in_row = in_p + static_cast<std::size_t>(y / factor) * w;
      float* o_row = o_p + static_cast<std::size_t>(y) * wo;
      for (int x = 0; x < wo; ++x) o_row[x] = in_row[x / factor];
    }
  }
  return out;
}

Tensor upsample_nearest_backward(const Tensor& upstream, int factor) {
  require(upstream.rank() == 4, "upsample_backward: upstream must be NCHW");
  require(factor >= 1, "upsample_backward: factor must be >= 1");
  const int n = upstream.dim(0), c = upstream.dim(1);
  const int ho = upstream.dim(2), wo = upstream.dim(3);
  require(ho % factor == 0 && wo % factor == 0,
          "upsample_backward: upstream dims " + upstream.shape_str() +
              " not divisible by factor");
  const int h = ho / factor, w = wo / factor;
  Tensor out({n, c, h, w});
  const float* up = upstream.data();
  float* o = out.data();
  for (int i = 0; i < n * c; ++i) {
    const float* up_p = up + static_cast<std::size_t>(i) * ho * wo;
    float* o_p = o + static_cast<std::size_t>(i) * h * w;
    for (int y = 0; y < ho; ++y) {
      const float* up_row = up_p + static_cast<std::size_t>(y) * wo;
      float* o_row = o_p + static_cast<std::size_t>(y / factor) * w;
      for (int x = 0; x < wo; ++x) o_row[x / factor] += up_row[x];
    }
  }
  return out;
}

LossResult l1_loss(const Tensor& pred, const Tensor& target, const Tensor* mask) {
  require(pred.same_shape(target), "l1_loss: pred shape " + pred.shape_str() +
                                       " does not match target " + target.shape_str());
  const int rank = pred.rank();
  require(rank >= 2, "l1_loss: pred must have at least 2 dims");
  const int h = pred.dim(rank - 2), w = pred.dim(rank - 1);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const std::size_t leading = pred.size() / plane;

  const float* m = nullptr;
  if (mask) {
    require(mask->rank() == 2 && mask->dim(0) == h && mask->dim(1) == w,
            "l1_loss: mask shape " + mask->shape_str() + " does not match spatial dims of " +
                pred.shape_str());
    m = mask->data();
  }

  std::size_t count = 0;
  if (m) {
    for (std::size_t i = 0; i < plane; ++i) {
      if (m[i] != 0.0f) ++count;
    }
    require(count > 0, "l1_loss: mask selects zero elements");
    count *= leading;
  } else {
    count = pred.size();
  }

  LossResult res;
  res.grad = Tensor(pred.shape());
  const float* p = pred.data();
  const float* t = target.data();
  float* g = res.grad.data();
  const float inv = 1.0f / static_cast<float>(count);
  double acc = 0.0;
  for (std::size_t l = 0; l < leading; ++l) {
    const std::size_t base = l * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      if (m && m[i] == 0.0f) continue;
      const float d = p[base + i] - t[base + i];
      acc += std::abs(static_cast<double>(d));
      g[base + i] = d > 0.0f ? inv : (d < 0.0f ? -inv : 0.0f);
    }
  }
  res.loss = acc / static_cast<double>(count);
  return res;
}

LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<std::int32_t>& labels) {
  require(logits.rank() == 4, "softmax_cross_entropy: logits must be NCHW");
  const int n = logits.dim(0), c = logits.dim(1), h = logits.dim(2), w = logits.dim(3);
  const std::size_t pixels = static_cast<std::size_t>(n) * h * w;
  require(labels.size() == pixels, "softmax_cross_entropy: label count " +
                                       std::to_string(labels.size()) + " does not match " +
                                       std::to_string(pixels) + " pixels");
  for (std::int32_t lbl : labels) {
    require(lbl >= 0 && lbl < c,
            "softmax_cross_entropy: label " + std::to_string(lbl) + " out of range [0," +
                std::to_string(c) + ")");
  }

  LossResult res;
  res.grad = Tensor(logits.shape());
  const float* in = logits.data();
  float* g = res.grad.data();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const float inv = 1.0f / static_cast<float>(pixels);
  double acc = 0.0;

  std::vector<float> probs(static_cast<std::size_t>(c));
  for (int bn = 0; bn < n; ++bn) {
    const std::size_t img = static_cast<std::size_t>(bn) * c * plane;
    for (std::size_t px = 0; px < plane; ++px) {
      float max_logit = in[img + px];
      for (int k = 1; k < c; ++k) {
        max_logit = std::max(max_logit, in[img + static_cast<std::size_t>(k) * plane + px]);
      }
      double denom = 0.0;
      for (int k = 0; k < c; ++k) {
        const float e = std::exp(in[img + static_cast<std::size_t>(k) * plane + px] - max_logit);
        probs[static_cast<std::size_t>(k)] = e;
        denom += e;
      }
      const std::int32_t lbl = labels[static_cast<std::size_t>(bn) * plane + px];
      const double p_lbl = probs[static_cast<std::size_t>(lbl)] / denom;
      acc -= std::log(std::max(p_lbl, 1e-30));
      for (int k = 0; k < c; ++k) {
        const float p = static_cast<float>(probs[static_cast<std::size_t>(k)] / denom);
        g[img + static_cast<std::size_t>(k) * plane + px] =
            (p - (k == lbl ? 1.0f : 0.0f)) * inv;
      }
    }
  }
  res.loss = acc / static_cast<double>(pixels);
  return res;
}

Tensor sgd_step(const Tensor& params, const Tensor& grads, float lr) {
  require(params.same_shape(grads), "sgd_step: params shape " + params.shape_str() +
                                        " does not match grads " + grads.shape_str());
  require(lr > 0.0f, "sgd_step: learning rate must be positive");
  Tensor out(params.shape());
  const float* p = params.data();
  const float* g = grads.data();
  float* o = out.data();
  for (std::size_t i = 0; i < params.size(); ++i) o[i] = p[i] - lr * g[i];
  return out;
}

}  // namespace segedit
