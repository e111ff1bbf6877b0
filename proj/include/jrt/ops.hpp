#pragma once

#include <algorithm>
#include <cmath>

#include "jrt/tensor.hpp"

namespace jrt {

constexpr float kLogEps = 1e-8f;

/// Stable softmax of a rank-1 tensor.
inline Tensor softmax(const Tensor& logits) {
  if (logits.size() == 0) throw std::invalid_argument("softmax: empty input");
  if (!logits.all_finite()) throw std::runtime_error("softmax: non-finite input");
  Tensor out(logits.shape);
  float mx = *std::max_element(logits.data.begin(), logits.data.end());
  float sum = 0.f;
  for (int i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (int i = 0; i < out.size(); ++i) out[i] /= sum;
  return out;
}

/// -sum p_i log q_i with q clamped at kLogEps.
inline float cross_entropy(const Tensor& p, const Tensor& q) {
  if (p.size() != q.size()) throw std::invalid_argument("cross_entropy: length mismatch");
  float acc = 0.f;
  for (int i = 0; i < p.size(); ++i) acc -= p[i] * std::log(std::max(q[i], kLogEps));
  return acc;
}

inline float entropy(const Tensor& p) { return cross_entropy(p, p); }

}  // namespace jrt
