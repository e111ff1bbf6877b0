#pragma once

#include <vector>

#include "jrt/env.hpp"
#include "jrt/graph.hpp"

namespace jrt {

constexpr int kFeatureDim = 128;
constexpr int kGoalEmbedDim = 16;
constexpr int kHiddenDim = 128;
constexpr float kGamma = 0.99f;
constexpr int kUnroll = 20;
constexpr float kValueCoeff = 0.5f;
constexpr float kEntropyCoeff = 0.01f;

/// Full actor-critic parameter bundle under the reserved prefixes
/// `M.` encoder, `G.` goal embedding, `R.` recurrent core, `P.` policy head,
/// `V.` value head, so pipeline stages can freeze/replace by prefix.
void init_agent_params(ParamSet& ps, uint64_t seed);

/// One step of an unrolled trajectory as recorded by a rollout worker.
struct StepRecord {
  Tensor image;  // {3, 32, 32}
  int goal = 0;
  int action = 0;
  float reward = 0.f;
};

/// n-step discounted returns: R_t = r_t + gamma * R_{t+1}, seeded by the
/// bootstrap value past the unroll end.
std::vector<float> nstep_returns(const std::vector<float>& rewards, float bootstrap, float gamma);

/// Encoder M: {B,3,32,32} image batch -> {B,128} features. Templated on the
/// graph scalar so gradient checks can run the same construction in double.
template <class T>
VarT<T> encode_graph(ParamSetT<T>& ps, const Tensor& images) {
  VarT<T> x = constf(ps, images);
  VarT<T> h1 = leaky_relu(conv2d(x, param(ps, "M.conv1.w"), param(ps, "M.conv1.b"), 2));
  VarT<T> h2 = leaky_relu(conv2d(h1, param(ps, "M.conv2.w"), param(ps, "M.conv2.b"), 2));
  int batch = images.shape[0];
  VarT<T> flat = reshape(h2, {batch, h2->value.size() / batch});
  return leaky_relu(affine(flat, param(ps, "M.fc.w"), param(ps, "M.fc.b")));
}

template <class T>
struct CoreOut {
  VarT<T> logits;  // {1,3}
  VarT<T> pi;      // {1,3}
  VarT<T> value;   // {1,1}
  VarT<T> h;       // {1,128}
};

/// Recurrent core + heads for a single step: gated recurrent cell over
/// [f, g_emb] with the previous hidden state, then policy softmax and value.
template <class T>
CoreOut<T> core_step(ParamSetT<T>& ps, const VarT<T>& f, int goal, const VarT<T>& h_prev) {
  if (goal < 0 || goal >= kNumRoomTypes) throw std::invalid_argument("core_step: unknown goal id");
  VarT<T> g = embed_row(param(ps, "G.emb"), goal);
  VarT<T> xh = concat_cols(concat_cols(f, g), h_prev);
  VarT<T> z = sigmoid_op(affine(xh, param(ps, "R.Wz"), param(ps, "R.bz")));
  VarT<T> r = sigmoid_op(affine(xh, param(ps, "R.Wr"), param(ps, "R.br")));
  VarT<T> xrh = concat_cols(concat_cols(f, g), mul(r, h_prev));
  VarT<T> c = tanh_op(affine(xrh, param(ps, "R.Wc"), param(ps, "R.bc")));
  VarT<T> one_minus_z = add_const(scale(z, -1.0), 1.0);
  CoreOut<T> out;
  out.h = add(mul(one_minus_z, h_prev), mul(z, c));
  out.logits = affine(out.h, param(ps, "P.W"), param(ps, "P.b"));
  out.pi = softmax_rows(out.logits);
  out.value = affine(out.h, param(ps, "V.W"), param(ps, "V.b"));
  return out;
}

template <class T>
struct UnrollGraph {
  std::vector<CoreOut<T>> steps;
  VarT<T> h_final;
};

/// Rebuilds the recurrent forward pass over a recorded trajectory starting
/// from hidden state h0 ({1,128} tensor).
template <class T>
UnrollGraph<T> unroll_graph(ParamSetT<T>& ps, const std::vector<StepRecord>& traj,
                            const Tensor& h0) {
  if (traj.empty()) throw std::invalid_argument("unroll: empty trajectory");
  UnrollGraph<T> u;
  VarT<T> h = constf(ps, h0);
  for (const StepRecord& s : traj) {
    Tensor batch({1, 3, kImgSize, kImgSize}, s.image.data);
    CoreOut<T> out = core_step(ps, encode_graph(ps, batch), s.goal, h);
    h = out.h;
    u.steps.push_back(std::move(out));
  }
  u.h_final = h;
  return u;
}

/// Advantages R_t - V_t from an unroll's current value estimates; recorded as
/// plain floats so the policy-gradient term treats them as constants
/// (the stop-gradient of the A3C objective).
template <class T>
std::vector<float> advantages_from(const UnrollGraph<T>& u, const std::vector<float>& returns) {
  std::vector<float> adv(returns.size());
  for (size_t t = 0; t < returns.size(); ++t)
    adv[t] = returns[t] - static_cast<float>(u.steps[t].value->value[0]);
  return adv;
}

/// A3C objective over an already-built unroll:
///   sum_t [ -log pi(a_t) * A_t + c_v (R_t - V_t)^2 - beta_H H(pi_t) ]
/// A_t enters as data, so the policy term sends no gradient into V; the value
/// term differentiates through V as usual.
template <class T>
VarT<T> a3c_loss_from(ParamSetT<T>& ps, const UnrollGraph<T>& u,
                      const std::vector<StepRecord>& traj, const std::vector<float>& returns,
                      const std::vector<float>& advantages, double beta_h,
                      double value_coeff = kValueCoeff) {
  if (traj.size() != u.steps.size() || returns.size() != traj.size() ||
      advantages.size() != traj.size())
    throw std::invalid_argument("a3c_loss: trajectory/returns length mismatch");
  VarT<T> loss = constf(ps, Tensor::scalar(0.f));
  for (size_t t = 0; t < traj.size(); ++t) {
    const CoreOut<T>& s = u.steps[t];
    VarT<T> ret = constf(ps, Tensor::scalar(returns[t]));
    VarT<T> logpi = log_clamped(s.pi);
    VarT<T> logpi_a = pick(logpi, traj[t].action);
    VarT<T> delta = sub(ret, reshape(s.value, {1}));
    VarT<T> entropy = scale(sum_all(mul(s.pi, logpi)), -1.0);
    loss = add(loss, scale(logpi_a, -static_cast<double>(advantages[t])));
    loss = add(loss, scale(mul(delta, delta), value_coeff));
    loss = add(loss, scale(entropy, -beta_h));
  }
  return loss;
}

template <class T>
VarT<T> a3c_loss(ParamSetT<T>& ps, const std::vector<StepRecord>& traj, const Tensor& h0,
                 const std::vector<float>& returns, const std::vector<float>& advantages,
                 double beta_h, double value_coeff = kValueCoeff) {
  UnrollGraph<T> u = unroll_graph(ps, traj, h0);
  return a3c_loss_from(ps, u, traj, returns, advantages, beta_h, value_coeff);
}

/// Plain forward pass for rollout collection and greedy evaluation.
struct ActOut {
  Tensor pi;       // {3}
  Tensor logits;   // {3}
  float value = 0.f;
  Tensor h;        // {1,128}
};
ActOut act(ParamSet& ps, const Tensor& image, int goal, const Tensor& h_prev);

inline Tensor zero_hidden() { return Tensor::zeros({1, kHiddenDim}); }

}  // namespace jrt
