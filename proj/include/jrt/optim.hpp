#pragma once

#include <map>
#include <string>

#include "jrt/tensor.hpp"

namespace jrt {

enum class OptAlgo { Adam, RmsProp };

struct AdamHyper {
  float lr = 1e-4f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

struct RmsPropHyper {
  float lr = 7e-4f;
  float decay = 0.99f;
  float eps = 1e-8f;
};

/// Per-parameter moment buffers plus the step counter. Moments are created
/// lazily with the parameter's shape on first update.
struct OptimState {
  OptAlgo algo = OptAlgo::Adam;
  AdamHyper adam;
  RmsPropHyper rmsprop;
  long step = 0;

  std::map<std::string, Tensor> m1;  // adam first moment
  std::map<std::string, Tensor> m2;  // adam second moment / rmsprop mean square

  static OptimState make_adam(float lr, float beta1 = 0.9f, float beta2 = 0.999f,
                              float eps = 1e-8f) {
    OptimState s;
    s.algo = OptAlgo::Adam;
    s.adam = {lr, beta1, beta2, eps};
    return s;
  }
  static OptimState make_rmsprop(float lr, float decay = 0.99f, float eps = 1e-8f) {
    OptimState s;
    s.algo = OptAlgo::RmsProp;
    s.rmsprop = {lr, decay, eps};
    return s;
  }
};

/// Apply one optimizer update from the gradients in params. Frozen parameters
/// are untouched; gradients are left for the caller to zero.
void optim_step(OptimState& state, ParamSet& params);

/// Scale all trainable gradients so their global L2 norm is at most max_norm.
/// Returns the pre-clip norm.
float clip_grad_norm(ParamSet& params, float max_norm);

}  // namespace jrt
