#include "jrt/pmimic.hpp"

#include <cstdio>
#include <stdexcept>

#include "jrt/optim.hpp"

namespace jrt {

void save_mimic_log(const MimicLog& log, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("mimic log: cannot open " + path);
  std::fprintf(f, "steps,mean_reward,success_rate,spl,l_mimic\n");
  for (const auto& r : log.rows)
    std::fprintf(f, "%ld,%.6f,%.4f,%.4f,%.6f\n", r.steps, r.mean_reward, r.success_rate, r.spl,
                 r.l_mimic);
  std::fclose(f);
}

Tensor teacher_distribution(ParamSet& teacher, const Tensor& image, int goal, Tensor& h) {
  ActOut out = act(teacher, image, goal, h);
  h = out.h;
  return out.pi;
}

namespace {

struct MimicWorker {
  Rng rng;
  Episode ep;
  const HousePlan* house = nullptr;
  Tensor h;          // student hidden
  Tensor h_teacher;  // teacher hidden, reset with the episode
  bool need_reset = true;

  explicit MimicWorker(uint64_t seed) : rng(seed) {}
};

}  // namespace

MimicResult mimic_train(const ParamSet& mr, const ParamSet& teacher, const MimicConfig& cfg,
                        const std::vector<HousePlan>& train_houses,
                        const std::vector<HousePlan>& val_houses) {
  if (cfg.lambda < 0.f) throw std::invalid_argument("mimic: lambda must be >= 0");
  if (cfg.rl.workers < 1) throw std::invalid_argument("mimic: worker count must be >= 1");
  if (train_houses.empty()) throw std::invalid_argument("mimic: no training houses");

  ParamSet ps = mr;
  ParamSet tp = teacher;  // local copy; read-only from here on
  if (!ps.has("meta.steps")) ps.add("meta.steps", Tensor::scalar(0.f), false);
  long start_steps = static_cast<long>(ps.at("meta.steps").value[0]);

  // the adapted encoder is fixed; only the policy-side bundle trains
  ps.set_trainable("M.", false);

  MimicResult result;
  OptimState opt = OptimState::make_rmsprop(cfg.rl.lr, cfg.rl.rmsprop_decay);

  std::vector<MimicWorker> workers;
  for (int w = 0; w < cfg.rl.workers; ++w)
    workers.emplace_back(hash2(cfg.rl.seed, 0x3057ULL + static_cast<uint64_t>(w)));

  long steps_done = 0;
  int eval_every = cfg.rl.eval_every > 0 ? cfg.rl.eval_every : std::max(cfg.rl.total_steps / 10, 1);
  long next_eval = eval_every;
  double reward_acc = 0.0, mimic_acc = 0.0;
  int episodes_acc = 0;
  long mimic_steps_acc = 0;

  while (steps_done < cfg.rl.total_steps) {
    ps.zero_grad();
    for (auto& w : workers) {
      if (w.need_reset) {
        w.house = &train_houses[static_cast<size_t>(
            w.rng.uniform_int(0, static_cast<int>(train_houses.size()) - 1))];
        w.ep.reset(*w.house, sample_episode(*w.house, w.rng, cfg.rl.max_episode_steps));
        w.h = zero_hidden();
        w.h_teacher = zero_hidden();
        w.need_reset = false;
      }

      UnrollGraph<float> u;
      std::vector<StepRecord> traj;
      std::vector<Tensor> teacher_p;
      std::vector<float> rewards, values;
      Var hv = constant(w.h);
      while (static_cast<int>(traj.size()) < cfg.rl.unroll && !w.ep.done) {
        Observation obs = w.ep.observe();
        Tensor batch({1, 3, kImgSize, kImgSize}, obs.image.data);
        CoreOut<float> out = core_step(ps, encode_graph(ps, batch), static_cast<int>(obs.goal), hv);
        hv = out.h;
        teacher_p.push_back(
            teacher_distribution(tp, obs.image, static_cast<int>(obs.goal), w.h_teacher));
        int a = w.rng.categorical(std::span<const float>(out.pi->value.data));
        StepRecord rec;
        rec.image = std::move(obs.image);
        rec.goal = static_cast<int>(obs.goal);
        rec.action = a;
        rec.reward = w.ep.act(static_cast<Action>(a));
        rewards.push_back(rec.reward);
        values.push_back(out.value->value[0]);
        traj.push_back(std::move(rec));
        u.steps.push_back(std::move(out));
      }
      u.h_final = hv;

      float bootstrap = 0.f;
      if (!w.ep.done) {
        Observation obs = w.ep.observe();
        Tensor batch({1, 3, kImgSize, kImgSize}, obs.image.data);
        CoreOut<float> tail = core_step(ps, encode_graph(ps, batch), static_cast<int>(obs.goal), hv);
        bootstrap = tail.value->value[0];
      } else {
        reward_acc += w.ep.total_reward;
        episodes_acc += 1;
        w.need_reset = true;
      }

      auto returns = nstep_returns(rewards, bootstrap, cfg.rl.gamma);
      std::vector<float> adv(returns.size());
      for (size_t t = 0; t < adv.size(); ++t) adv[t] = returns[t] - values[t];
      Var loss = a3c_loss_from(ps, u, traj, returns, adv, cfg.rl.entropy_coeff);
      if (cfg.lambda > 0.f) {
        Var lm = constant(Tensor::scalar(0.f));
        for (size_t t = 0; t < traj.size(); ++t)
          lm = add(lm, mimic_loss(ps, teacher_p[t], u.steps[t].logits));
        mimic_acc += lm->value[0];
        loss = add(loss, scale(lm, cfg.lambda));
      } else {
        for (size_t t = 0; t < traj.size(); ++t)
          mimic_acc += mimic_loss(ps, teacher_p[t], u.steps[t].logits)->value[0];
      }
      mimic_steps_acc += static_cast<long>(traj.size());
      if (!std::isfinite(loss->value[0]))
        throw std::runtime_error("mimic: non-finite loss at step " +
                                 std::to_string(start_steps + steps_done));
      backward(loss);
      w.h = hv->value;
      steps_done += static_cast<long>(traj.size());
    }
    if (cfg.rl.grad_clip > 0.f) clip_grad_norm(ps, cfg.rl.grad_clip);
    opt.rmsprop.lr = cfg.rl.lr * static_cast<float>(std::max(
        1.0 - static_cast<double>(steps_done) / cfg.rl.total_steps, 0.05));
    optim_step(opt, ps);

    if (steps_done >= next_eval || steps_done >= cfg.rl.total_steps) {
      EvalSummary s = eval_greedy(ps, val_houses, cfg.rl.eval_episodes_per_house,
                                  hash2(cfg.rl.seed, 0xE7A1ULL), cfg.rl.max_episode_steps);
      MimicLogRow row;
      row.steps = start_steps + steps_done;
      row.mean_reward = episodes_acc > 0 ? static_cast<float>(reward_acc / episodes_acc) : 0.f;
      row.success_rate = s.success_rate;
      row.spl = s.spl;
      row.l_mimic =
          mimic_steps_acc > 0 ? static_cast<float>(mimic_acc / mimic_steps_acc) : 0.f;
      result.log.rows.push_back(row);
      reward_acc = 0.0;
      mimic_acc = 0.0;
      episodes_acc = 0;
      mimic_steps_acc = 0;
      while (next_eval <= steps_done) next_eval += eval_every;
    }
  }

  ps.at("meta.steps").value[0] = static_cast<float>(start_steps + steps_done);
  ps.set_trainable("M.", true);
  result.params = std::move(ps);
  return result;
}

}  // namespace jrt
