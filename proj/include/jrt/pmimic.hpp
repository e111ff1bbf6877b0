#pragma once

#include <string>
#include <vector>

#include "jrt/rl.hpp"

namespace jrt {

struct MimicConfig {
  TrainConfig rl;        // step budget, workers, optimizer settings
  float lambda = 0.1f;   // mimic weight on the distillation term
};

struct MimicLogRow {
  long steps = 0;
  float mean_reward = 0.f;
  float success_rate = 0.f;  // percent
  float spl = 0.f;           // percent
  float l_mimic = 0.f;       // mean per-step distillation loss since last row
};

struct MimicLog {
  std::vector<MimicLogRow> rows;
};

/// CSV columns: steps,mean_reward,success_rate,spl,l_mimic
void save_mimic_log(const MimicLog& log, const std::string& path);

/// Teacher forward pass on one real observation: p = softmax(P_s(M_s(x_r))).
/// Advances the caller-held teacher hidden state; retains no gradients and
/// never writes the parameters.
Tensor teacher_distribution(ParamSet& teacher, const Tensor& image, int goal, Tensor& h);

/// Distillation cross-entropy -sum_a p(a) log softmax(logits)(a), log-clamped.
/// Minimized at the teacher's distribution, where it equals H(p).
template <class T>
VarT<T> mimic_loss(ParamSetT<T>& ps, const Tensor& p, const VarT<T>& logits) {
  if (p.size() != logits->value.size())
    throw std::invalid_argument("mimic_loss: distribution/logits size mismatch");
  Tensor pc(logits->value.shape, p.data);
  return scale(sum_all(mul(constf(ps, pc), log_clamped(softmax_rows(logits)))), -1.0);
}

struct MimicResult {
  ParamSet params;
  MimicLog log;
};

/// Policy-mimic training in the real domain. The student starts from the
/// adapted checkpoint `mr`: its encoder `M.*` (the adapted M_r) is frozen
/// bitwise, only the goal embedding, recurrent core, policy head and value
/// head train. The teacher (synthetic baseline) walks the same observations
/// in lockstep with its own hidden state, reset at episode boundaries; per
/// unroll the loss is a3c_loss + lambda * sum_t mimic_loss(p_t, logits_t).
/// With lambda == 0 the combined loss is bit-identical to a3c_loss.
MimicResult mimic_train(const ParamSet& mr, const ParamSet& teacher, const MimicConfig& cfg,
                        const std::vector<HousePlan>& train_houses,
                        const std::vector<HousePlan>& val_houses);

}  // namespace jrt
