#pragma once

// Test-only reference implementations, kept independent of the library's
// compute paths: a padded sliding-window convolution, a central
// finite-difference gradient checker, and pixel-set instance metrics.

#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <utility>
#include <vector>

#include "segedit/tensor.hpp"

namespace oracle {

// Materializes the zero-padded input, then slides the window. Accumulates in
// f32 in canonical (ic, ky, kx) order so that exact equality with the library
// kernel is meaningful.
inline segedit::Tensor naive_conv2d(const segedit::Tensor& input, const segedit::Tensor& weights,
                                    const segedit::Tensor& bias, int stride, int padding) {
  const int n = input.dim(0), ci = input.dim(1), h = input.dim(2), w = input.dim(3);
  const int co = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
  const int hp = h + 2 * padding, wp = w + 2 * padding;
  std::vector<float> padded(static_cast<std::size_t>(n) * ci * hp * wp, 0.0f);
  for (int bn = 0; bn < n; ++bn)
    for (int c = 0; c < ci; ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          padded[((static_cast<std::size_t>(bn) * ci + c) * hp + y + padding) * wp + x +
                 padding] = input.at4(bn, c, y, x);

  const int ho = (hp - kh) / stride + 1;
  const int wo = (wp - kw) / stride + 1;
  segedit::Tensor out({n, co, ho, wo});
  for (int bn = 0; bn < n; ++bn)
    for (int oc = 0; oc < co; ++oc)
      for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox) {
          float acc = bias[static_cast<std::size_t>(oc)];
          for (int ic = 0; ic < ci; ++ic)
            for (int ky = 0; ky < kh; ++ky)
              for (int kx = 0; kx < kw; ++kx)
                acc += padded[((static_cast<std::size_t>(bn) * ci + ic) * hp + oy * stride +
                               ky) *
                                  wp +
                              ox * stride + kx] *
                       weights.at4(oc, ic, ky, kx);
          out.at4(bn, oc, oy, ox) = acc;
        }
  return out;
}

// f64 evaluations of the library's forward math, for finite-difference
// objectives. f32 forward passes lose ~1e-4 of each difference quotient to
// cancellation, which would swamp the 1e-3 gradient tolerance.
inline double conv_dot_upstream_f64(const segedit::Tensor& input,
                                    const segedit::Tensor& weights,
                                    const segedit::Tensor& upstream, int stride, int padding) {
  const int n = input.dim(0), ci = input.dim(1), h = input.dim(2), w = input.dim(3);
  const int co = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
  const int ho = (h + 2 * padding - kh) / stride + 1;
  const int wo = (w + 2 * padding - kw) / stride + 1;
  double acc = 0.0;
  for (int bn = 0; bn < n; ++bn)
    for (int oc = 0; oc < co; ++oc)
      for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox) {
          double v = 0.0;
          for (int ic = 0; ic < ci; ++ic)
            for (int ky = 0; ky < kh; ++ky)
              for (int kx = 0; kx < kw; ++kx) {
                const int iy = oy * stride - padding + ky;
                const int ix = ox * stride - padding + kx;
                if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                v += static_cast<double>(input.at4(bn, ic, iy, ix)) *
                     static_cast<double>(weights.at4(oc, ic, ky, kx));
              }
          acc += v * static_cast<double>(upstream.at4(bn, oc, oy, ox));
        }
  return acc;
}

inline double l1_f64(const segedit::Tensor& pred, const segedit::Tensor& target,
                     const segedit::Tensor* mask = nullptr) {
  const int rank = pred.rank();
  const int h = pred.dim(rank - 2), w = pred.dim(rank - 1);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const std::size_t leading = pred.size() / plane;
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t l = 0; l < leading; ++l)
    for (std::size_t i = 0; i < plane; ++i) {
      if (mask && (*mask)[i] == 0.0f) continue;
      acc += std::abs(static_cast<double>(pred[l * plane + i]) -
                      static_cast<double>(target[l * plane + i]));
      ++count;
    }
  return acc / static_cast<double>(count);
}

inline double softmax_ce_f64(const segedit::Tensor& logits,
                             const std::vector<std::int32_t>& labels) {
  const int n = logits.dim(0), c = logits.dim(1), h = logits.dim(2), w = logits.dim(3);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  double acc = 0.0;
  for (int bn = 0; bn < n; ++bn) {
    const std::size_t img = static_cast<std::size_t>(bn) * c * plane;
    for (std::size_t px = 0; px < plane; ++px) {
      double max_logit = logits[img + px];
      for (int k = 1; k < c; ++k)
        max_logit = std::max(max_logit,
                             static_cast<double>(logits[img + static_cast<std::size_t>(k) * plane + px]));
      double denom = 0.0;
      for (int k = 0; k < c; ++k)
        denom += std::exp(static_cast<double>(logits[img + static_cast<std::size_t>(k) * plane + px]) -
                          max_logit);
      const std::int32_t lbl = labels[static_cast<std::size_t>(bn) * plane + px];
      const double z = static_cast<double>(logits[img + static_cast<std::size_t>(lbl) * plane + px]) -
                       max_logit;
      acc -= z - std::log(denom);
    }
  }
  return acc / static_cast<double>(n * plane);
}

struct FdReport {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

// Central finite differences on a scalar-valued function of one tensor.
// h = 1e-2 per the f32 contract. Entries where `near_kink` returns true are
// excluded. Near-zero pairs (both |fd| and |analytic| below `floor`) count as
// checked with zero error.
inline FdReport fd_check(const segedit::Tensor& point, const segedit::Tensor& analytic_grad,
                         const std::function<double(const segedit::Tensor&)>& f,
                         const std::function<bool(std::size_t)>& near_kink = nullptr,
                         double h = 1e-2, double floor = 1e-6) {
  FdReport rep;
  segedit::Tensor x = point;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (near_kink && near_kink(i)) {
      ++rep.skipped;
      continue;
    }
    const float orig = x[i];
    x[i] = orig + static_cast<float>(h);
    const double fp = f(x);
    x[i] = orig - static_cast<float>(h);
    const double fm = f(x);
    x[i] = orig;
    const double fd = (fp - fm) / (2.0 * h);
    const double an = static_cast<double>(analytic_grad[i]);
    ++rep.checked;
    const double denom = std::max(std::abs(fd), std::abs(an));
    if (denom < floor) continue;
    rep.max_rel_err = std::max(rep.max_rel_err, std::abs(fd - an) / denom);
  }
  return rep;
}

// Pixel-set metrics over explicit coordinate sets.
using PixelSet = std::set<std::pair<int, int>>;

inline PixelSet intersect(const PixelSet& a, const PixelSet& b) {
  PixelSet out;
  for (const auto& p : a)
    if (b.count(p)) out.insert(p);
  return out;
}

inline double set_iou(const PixelSet& a, const PixelSet& b) {
  const std::size_t inter = intersect(a, b).size();
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double set_precision(const PixelSet& gt, const PixelSet& pred) {
  if (pred.empty()) return 0.0;
  return static_cast<double>(intersect(gt, pred).size()) / static_cast<double>(pred.size());
}

inline double set_recall(const PixelSet& gt, const PixelSet& pred) {
  if (gt.empty()) return 0.0;
  return static_cast<double>(intersect(gt, pred).size()) / static_cast<double>(gt.size());
}

}  // namespace oracle
