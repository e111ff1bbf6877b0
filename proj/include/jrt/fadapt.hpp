#pragma once

#include <string>
#include <vector>

#include "jrt/agent.hpp"

namespace jrt {

constexpr int kDiscHiddenDim = 64;
constexpr int kDiscInnerSteps = 30;  // discriminator refits per iteration
constexpr int kEncInnerSteps = 4;    // encoder updates per iteration
constexpr float kDiscLrMult = 10.f;  // discriminator lr relative to the encoder's
constexpr float kEmaDecay = 0.995f;  // averaging horizon for the returned encoder

struct AdaptConfig {
  float idt = 5e-4f;   // identity-loss weight (lambda_1)
  float norm = 1e-4f;  // weight-norm coefficient (lambda_2)
  float lr = 1e-4f;    // adam, beta1 0.9, beta2 0.999
  int iters = 1000;
  int batch = 64;  // split 32 synthetic + 32 real
  uint64_t seed = 0;
};

struct AdaptLogRow {
  int iter = 0;
  float l_cls = 0.f, l_adv = 0.f, l_idt = 0.f, l_norm = 0.f;
};

struct AdaptLog {
  std::vector<AdaptLogRow> rows;
};

/// CSV with header `iter,l_cls,l_adv,l_idt,l_norm`.
void save_adapt_log(const AdaptLog& log, const std::string& path);

/// Adds the discriminator parameters `D.fc1.{w,b}`, `D.fc2.{w,b}`
/// (128 -> 64 leaky -> 1 sigmoid).
void init_discriminator(ParamSet& ps, uint64_t seed);

/// Discriminator logits over a {B,128} feature batch -> {B,1}. With
/// frozen=true the D parameters enter as constants, so no gradient can reach
/// them no matter which loss sits on top. The losses stay in logit space
/// (log-sigmoid) so a confident D never starves the generator of gradient.
template <class T>
VarT<T> disc_logits(ParamSetT<T>& ps, const VarT<T>& f, bool frozen = false) {
  auto leaf = [&](const char* name) {
    return frozen ? detach(param(ps, name)) : param(ps, name);
  };
  VarT<T> h = leaky_relu(affine(f, leaf("D.fc1.w"), leaf("D.fc1.b")));
  return affine(h, leaf("D.fc2.w"), leaf("D.fc2.b"));
}

/// Discriminator probability D(f) in (0,1).
template <class T>
VarT<T> disc_graph(ParamSetT<T>& ps, const VarT<T>& f, bool frozen = false) {
  return sigmoid_op(disc_logits(ps, f, frozen));
}

/// Sum of squared weights over every parameter with the given prefix.
template <class T>
VarT<T> weight_norm_graph(ParamSetT<T>& ps, const std::string& prefix) {
  VarT<T> acc = constf(ps, Tensor::scalar(0.f));
  for (const auto& name : ps.order)
    if (name.rfind(prefix, 0) == 0) acc = add(acc, l2sq(param(ps, name)));
  return acc;
}

/// L_cls = -mean log D(f_s) - mean log(1 - D(f_r)). The feature batches enter
/// as data, so only the discriminator receives gradient.
template <class T>
VarT<T> discriminator_loss(ParamSetT<T>& ps, const Tensor& f_s, const Tensor& f_r) {
  VarT<T> z_s = disc_logits(ps, constf(ps, f_s));
  VarT<T> z_r = disc_logits(ps, constf(ps, f_r));
  // log(1 - sigmoid(z)) == log(sigmoid(-z))
  return sub(scale(mean_all(log_sigmoid_clamped(z_s)), -1.0),
             mean_all(log_sigmoid_clamped(scale(z_r, -1.0))));
}

/// Non-saturating generator objective -mean log D(M_r(x_r)), minimized w.r.t.
/// the encoder; D enters frozen and receives exactly zero gradient.
template <class T>
VarT<T> adversarial_loss(ParamSetT<T>& ps, const Tensor& x_r) {
  VarT<T> z = disc_logits(ps, encode_graph(ps, x_r), /*frozen=*/true);
  return scale(mean_all(log_sigmoid_clamped(z)), -1.0);
}

/// L_idt: mean per-item Euclidean norm of M_s(x_s) - M_r(x_s). The frozen
/// reference features f_ref = M_s(x_s) enter as data.
template <class T>
VarT<T> identity_loss(ParamSetT<T>& ps, const Tensor& f_ref, const Tensor& x_s) {
  return mean_row_norm(sub(encode_graph(ps, x_s), constf(ps, f_ref)));
}

/// Stack {3,32,32} images into one {B,3,32,32} batch.
Tensor stack_images(const std::vector<Tensor>& images, const std::vector<int>& idx);

/// Forward the encoder over a bank, returning one {128} feature per image.
std::vector<Tensor> encode_features(const ParamSet& ps, const std::vector<Tensor>& images);

struct AdaptResult {
  ParamSet params;  // the M_s checkpoint with `M.*` replaced by the adapted encoder
  AdaptLog log;
};

/// Alternating adaptation loop: per iteration sample 32+32 images, update D by
/// L_cls + norm*||theta_D||^2 against the current M_r, then update M_r by
/// L_adv + idt*L_idt + norm*||theta_Mr||^2 against the updated D. The input
/// checkpoint is never modified.
AdaptResult adapt(const ParamSet& ms, const std::vector<Tensor>& sim_images,
                  const std::vector<Tensor>& real_images, const AdaptConfig& cfg);

/// Held-out accuracy of a small classifier trained to tell feats_a (label 0)
/// from feats_b (label 1); the probe oracle behind the feature-gap checks.
float probe_accuracy(const std::vector<Tensor>& feats_a, const std::vector<Tensor>& feats_b,
                     uint64_t seed);

}  // namespace jrt
