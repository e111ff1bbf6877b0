#include "jrt/rl.hpp"

#include <cstdio>
#include <stdexcept>

#include "jrt/optim.hpp"

namespace jrt {

namespace {

Action greedy_action(const Tensor& pi) {
  int best = 0;
  for (int i = 1; i < kNumActions; ++i)
    if (pi[i] > pi[best]) best = i;  // ties keep the lowest index
  return static_cast<Action>(best);
}

struct Worker {
  Rng rng;
  Episode ep;
  const HousePlan* house = nullptr;
  Tensor h;
  bool need_reset = true;

  explicit Worker(uint64_t seed) : rng(seed) {}
};

TrainResult train_core(ParamSet ps, const TrainConfig& cfg,
                       const std::vector<HousePlan>& train_houses,
                       const std::vector<HousePlan>& val_houses, long start_steps) {
  if (cfg.workers < 1) throw std::invalid_argument("train: worker count must be >= 1");
  if (cfg.total_steps < 0) throw std::invalid_argument("train: negative step budget");
  if (train_houses.empty()) throw std::invalid_argument("train: no training houses");

  if (!ps.has("meta.steps")) ps.add("meta.steps", Tensor::scalar(0.f), false);

  TrainResult result;
  OptimState opt = OptimState::make_rmsprop(cfg.lr, cfg.rmsprop_decay);

  std::vector<Worker> workers;
  for (int w = 0; w < cfg.workers; ++w)
    workers.emplace_back(hash2(cfg.seed, 0x3057ULL + static_cast<uint64_t>(w)));

  long steps_done = 0;
  int eval_every = cfg.eval_every > 0 ? cfg.eval_every : std::max(cfg.total_steps / 10, 1);
  long next_eval = eval_every;
  double reward_acc = 0.0;
  int episodes_acc = 0;

  while (steps_done < cfg.total_steps) {
    ps.zero_grad();
    for (auto& w : workers) {
      if (w.need_reset) {
        w.house = &train_houses[static_cast<size_t>(
            w.rng.uniform_int(0, static_cast<int>(train_houses.size()) - 1))];
        w.ep.reset(*w.house, sample_episode(*w.house, w.rng, cfg.max_episode_steps));
        w.h = zero_hidden();
        w.need_reset = false;
      }

      UnrollGraph<float> u;
      std::vector<StepRecord> traj;
      std::vector<float> rewards, values;
      Var hv = constant(w.h);
      while (static_cast<int>(traj.size()) < cfg.unroll && !w.ep.done) {
        Observation obs = w.ep.observe();
        Tensor batch({1, 3, kImgSize, kImgSize}, obs.image.data);
        CoreOut<float> out = core_step(ps, encode_graph(ps, batch), static_cast<int>(obs.goal), hv);
        hv = out.h;
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

      auto returns = nstep_returns(rewards, bootstrap, cfg.gamma);
      std::vector<float> adv(returns.size());
      for (size_t t = 0; t < adv.size(); ++t) adv[t] = returns[t] - values[t];
      Var loss = a3c_loss_from(ps, u, traj, returns, adv, cfg.entropy_coeff);
      if (!std::isfinite(loss->value[0]))
        throw std::runtime_error("train: non-finite loss at step " +
                                 std::to_string(start_steps + steps_done));
      backward(loss);
      w.h = hv->value;
      steps_done += static_cast<long>(traj.size());
    }
    if (cfg.grad_clip > 0.f) clip_grad_norm(ps, cfg.grad_clip);
    // linear lr anneal over the step budget, as in the classic setup
    opt.rmsprop.lr = cfg.lr * static_cast<float>(std::max(
        1.0 - static_cast<double>(steps_done) / cfg.total_steps, 0.05));
    optim_step(opt, ps);

    if (steps_done >= next_eval || steps_done >= cfg.total_steps) {
      EvalSummary s = eval_greedy(ps, val_houses, cfg.eval_episodes_per_house,
                                  hash2(cfg.seed, 0xE7A1ULL), cfg.max_episode_steps);
      TrainLogRow row;
      row.steps = start_steps + steps_done;
      row.mean_reward = episodes_acc > 0 ? static_cast<float>(reward_acc / episodes_acc) : 0.f;
      row.success_rate = s.success_rate;
      row.spl = s.spl;
      result.log.rows.push_back(row);
      reward_acc = 0.0;
      episodes_acc = 0;
      while (next_eval <= steps_done) next_eval += eval_every;
    }
  }

  ps.at("meta.steps").value[0] = static_cast<float>(start_steps + steps_done);
  result.params = std::move(ps);
  return result;
}

}  // namespace

void save_train_log(const TrainLog& log, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("train log: cannot open " + path);
  std::fprintf(f, "steps,mean_reward,success_rate,spl\n");
  for (const auto& r : log.rows)
    std::fprintf(f, "%ld,%.6f,%.4f,%.4f\n", r.steps, r.mean_reward, r.success_rate, r.spl);
  std::fclose(f);
}

EvalSummary eval_greedy(ParamSet& ps, const std::vector<HousePlan>& houses,
                        int episodes_per_house, uint64_t seed, int max_steps) {
  EvalSummary s;
  if (houses.empty()) return s;
  int n = 0;
  double success = 0.0, spl = 0.0, reward = 0.0;
  for (size_t i = 0; i < houses.size(); ++i) {
    for (int e = 0; e < episodes_per_house; ++e) {
      Rng rng(hash2(seed, hash2(i, static_cast<uint64_t>(e))));
      const HousePlan& house = houses[i];
      EpisodeSpec spec = sample_episode(house, rng, max_steps);
      float shortest = shortest_path_length(house, spec.start, spec.goal);
      Episode ep;
      ep.reset(house, spec);
      Tensor h = zero_hidden();
      while (!ep.done) {
        Observation obs = ep.observe();
        ActOut a = act(ps, obs.image, static_cast<int>(obs.goal), h);
        h = a.h;
        ep.act(greedy_action(a.pi));
      }
      success += ep.success ? 1.0 : 0.0;
      if (ep.success) spl += shortest / std::max(ep.path_len, shortest);
      reward += ep.total_reward;
      ++n;
    }
  }
  s.success_rate = static_cast<float>(100.0 * success / n);
  s.spl = static_cast<float>(100.0 * spl / n);
  s.mean_reward = static_cast<float>(reward / n);
  return s;
}

TrainResult train_baseline(const TrainConfig& cfg, const std::vector<HousePlan>& train_houses,
                           const std::vector<HousePlan>& val_houses) {
  ParamSet ps;
  init_agent_params(ps, hash2(cfg.seed, 0x1417ULL));
  return train_core(std::move(ps), cfg, train_houses, val_houses, 0);
}

TrainResult finetune(const ParamSet& source, const TrainConfig& cfg,
                     const std::vector<HousePlan>& train_houses,
                     const std::vector<HousePlan>& val_houses) {
  ParamSet ps = source;
  long start = ps.has("meta.steps") ? static_cast<long>(ps.at("meta.steps").value[0]) : 0;
  return train_core(std::move(ps), cfg, train_houses, val_houses, start);
}

}  // namespace jrt
