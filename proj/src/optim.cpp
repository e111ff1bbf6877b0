#include "jrt/optim.hpp"

#include <cmath>

namespace jrt {

void optim_step(OptimState& state, ParamSet& params) {
  state.step += 1;
  for (const auto& name : params.order) {
    auto& e = params.at(name);
    if (!e.trainable) continue;
    if (!e.grad.same_shape(e.value)) throw std::runtime_error("optim: gradient shape mismatch");

    auto& v = state.m2[name];
    if (v.size() == 0) v = Tensor::zeros(e.value.shape);
    if (!v.same_shape(e.value)) throw std::runtime_error("optim: moment shape mismatch for " + name);

    if (state.algo == OptAlgo::Adam) {
      auto& m = state.m1[name];
      if (m.size() == 0) m = Tensor::zeros(e.value.shape);
      const auto& h = state.adam;
      float bc1 = 1.f - std::pow(h.beta1, static_cast<float>(state.step));
      float bc2 = 1.f - std::pow(h.beta2, static_cast<float>(state.step));
      for (int i = 0; i < e.value.size(); ++i) {
        float g = e.grad[i];
        m[i] = h.beta1 * m[i] + (1.f - h.beta1) * g;
        v[i] = h.beta2 * v[i] + (1.f - h.beta2) * g * g;
        float mhat = m[i] / bc1;
        float vhat = v[i] / bc2;
        e.value[i] -= h.lr * mhat / (std::sqrt(vhat) + h.eps);
      }
    } else {
      const auto& h = state.rmsprop;
      for (int i = 0; i < e.value.size(); ++i) {
        float g = e.grad[i];
        v[i] = h.decay * v[i] + (1.f - h.decay) * g * g;
        e.value[i] -= h.lr * g / std::sqrt(v[i] + h.eps);
      }
    }
    if (!e.value.all_finite()) throw std::runtime_error("optim: non-finite parameter " + name);
  }
}

float clip_grad_norm(ParamSet& params, float max_norm) {
  double sq = 0.0;
  for (const auto& name : params.order) {
    const auto& e = params.at(name);
    if (!e.trainable) continue;
    sq += static_cast<double>(e.grad.vec().squaredNorm());
  }
  float norm = static_cast<float>(std::sqrt(sq));
  if (norm > max_norm && norm > 0.f) {
    float s = max_norm / norm;
    for (const auto& name : params.order) {
      auto& e = params.at(name);
      if (e.trainable) e.grad.vec() *= s;
    }
  }
  return norm;
}

}  // namespace jrt
