#include "jrt/agent.hpp"

namespace jrt {

namespace {

Tensor init_dense(Shape s, Rng& rng, int fan_in) {
  Tensor t(std::move(s));
  float std = std::sqrt(2.f / static_cast<float>(fan_in));
  for (auto& v : t.data) v = rng.normal() * std;
  return t;
}

}  // namespace

void init_agent_params(ParamSet& ps, uint64_t seed) {
  Rng rng(hash2(seed, 0xA6E47ULL));
  const int in_dim = kFeatureDim + kGoalEmbedDim;
  const int cat_dim = in_dim + kHiddenDim;

  ps.add("M.conv1.w", init_dense({8, 3, 4, 4}, rng, 3 * 4 * 4));
  ps.add("M.conv1.b", Tensor::zeros({8}));
  ps.add("M.conv2.w", init_dense({16, 8, 4, 4}, rng, 8 * 4 * 4));
  ps.add("M.conv2.b", Tensor::zeros({16}));
  ps.add("M.fc.w", init_dense({16 * 6 * 6, kFeatureDim}, rng, 16 * 6 * 6));
  ps.add("M.fc.b", Tensor::zeros({kFeatureDim}));

  ps.add("G.emb", init_dense({kNumRoomTypes, kGoalEmbedDim}, rng, kGoalEmbedDim));

  for (const char* gate : {"z", "r", "c"}) {
    ps.add(std::string("R.W") + gate, init_dense({cat_dim, kHiddenDim}, rng, cat_dim));
    ps.add(std::string("R.b") + gate, Tensor::zeros({kHiddenDim}));
  }

  ps.add("P.W", init_dense({kHiddenDim, kNumActions}, rng, kHiddenDim));
  ps.add("P.b", Tensor::zeros({kNumActions}));
  ps.add("V.W", init_dense({kHiddenDim, 1}, rng, kHiddenDim));
  ps.add("V.b", Tensor::zeros({1}));
}

std::vector<float> nstep_returns(const std::vector<float>& rewards, float bootstrap, float gamma) {
  std::vector<float> out(rewards.size());
  float acc = bootstrap;
  for (size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    out[i] = acc;
  }
  return out;
}

ActOut act(ParamSet& ps, const Tensor& image, int goal, const Tensor& h_prev) {
  Tensor batch({1, 3, kImgSize, kImgSize}, image.data);
  Var f = encode_graph(ps, batch);
  CoreOut<float> out = core_step(ps, f, goal, constant(h_prev));
  ActOut a;
  a.pi = Tensor({kNumActions}, out.pi->value.data);
  a.logits = Tensor({kNumActions}, out.logits->value.data);
  a.value = out.value->value[0];
  a.h = out.h->value;
  return a;
}

}  // namespace jrt
