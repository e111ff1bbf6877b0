#include "jrt/evalkit.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jrt {

EpisodeSet make_episode_set(std::vector<HousePlan> houses, int per_house, uint64_t seed,
                            int max_steps) {
  if (per_house < 1) throw std::invalid_argument("episode set: per_house must be >= 1");
  EpisodeSet set;
  set.houses = std::move(houses);
  for (size_t i = 0; i < set.houses.size(); ++i) {
    Rng rng(hash2(seed, hash2(0xE915ULL, i)));
    for (int e = 0; e < per_house; ++e) {
      set.house_index.push_back(static_cast<int>(i));
      set.specs.push_back(sample_episode(set.houses[i], rng, max_steps));
    }
  }
  return set;
}

namespace {

Action greedy_action(const Tensor& pi) {
  int best = 0;
  for (int i = 1; i < kNumActions; ++i)
    if (pi[i] > pi[best]) best = i;  // ties keep the lowest index
  return static_cast<Action>(best);
}

}  // namespace

void compute_aggregates(EvalReport& report) {
  double success = 0.0, spl = 0.0;
  for (const auto& r : report.episodes) {
    if (r.shortest_len <= 0.f)
      throw std::invalid_argument("aggregates: shortest_len must be positive");
    success += r.success ? 1.0 : 0.0;
    if (r.success)
      spl += static_cast<double>(r.shortest_len) /
             static_cast<double>(std::max(r.path_len, r.shortest_len));
  }
  size_t n = report.episodes.size();
  report.success_rate = n ? static_cast<float>(100.0 * success / static_cast<double>(n)) : 0.f;
  report.spl = n ? static_cast<float>(100.0 * spl / static_cast<double>(n)) : 0.f;
}

EvalReport evaluate(ParamSet& model, const EpisodeSet& set) {
  if (set.specs.size() != set.house_index.size())
    throw std::invalid_argument("evaluate: malformed episode set");
  EvalReport report;
  for (size_t i = 0; i < set.specs.size(); ++i) {
    const HousePlan& house = set.houses[static_cast<size_t>(set.house_index[i])];
    const EpisodeSpec& spec = set.specs[i];
    float shortest = shortest_path_length(house, spec.start, spec.goal);
    Episode ep;
    ep.reset(house, spec);
    Tensor h = zero_hidden();
    while (!ep.done) {
      Observation obs = ep.observe();
      ActOut a = act(model, obs.image, static_cast<int>(obs.goal), h);
      h = a.h;
      ep.act(greedy_action(a.pi));
    }
    EpisodeRecord rec;
    rec.episode_id = static_cast<int>(i);
    rec.success = ep.success;
    rec.path_len = ep.path_len;
    rec.shortest_len = shortest;
    rec.steps = ep.steps;
    report.episodes.push_back(rec);
  }
  compute_aggregates(report);
  return report;
}

void save_eval_report(const EvalReport& report, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("eval report: cannot open " + path);
  std::fprintf(f, "episode_id,success,path_len,shortest_len,steps\n");
  for (const auto& r : report.episodes)
    std::fprintf(f, "%d,%d,%.4f,%.4f,%d\n", r.episode_id, r.success ? 1 : 0, r.path_len,
                 r.shortest_len, r.steps);
  std::fclose(f);
}

void save_aggregates(const std::vector<AggregateRow>& rows, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("aggregates: cannot open " + path);
  std::fprintf(f, "model,seed,success_rate,spl\n");
  for (const auto& r : rows)
    std::fprintf(f, "%s,%llu,%.4f,%.4f\n", r.model.c_str(),
                 static_cast<unsigned long long>(r.seed), r.success_rate, r.spl);
  std::fclose(f);
}

std::vector<AggregateRow> load_aggregates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("aggregates: cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != "model,seed,success_rate,spl")
    throw std::runtime_error("aggregates: bad header in " + path);
  std::vector<AggregateRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    AggregateRow r;
    std::string field;
    if (!std::getline(ss, r.model, ',')) throw std::runtime_error("aggregates: bad row " + line);
    std::getline(ss, field, ',');
    r.seed = std::stoull(field);
    std::getline(ss, field, ',');
    r.success_rate = std::stof(field);
    std::getline(ss, field, ',');
    r.spl = std::stof(field);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<CompareRow> compare(const std::vector<AggregateRow>& rows) {
  std::vector<CompareRow> out;
  for (const auto& r : rows) {
    CompareRow* row = nullptr;
    for (auto& c : out)
      if (c.model == r.model) row = &c;
    if (!row) {
      out.push_back({r.model, 0, 0.f, 0.f, 0.f, 0.f});
      row = &out.back();
    }
    row->seeds += 1;
    row->success_mean += r.success_rate;
    row->spl_mean += r.spl;
  }
  for (auto& c : out) {
    c.success_mean /= static_cast<float>(c.seeds);
    c.spl_mean /= static_cast<float>(c.seeds);
  }
  for (const auto& r : rows)
    for (auto& c : out)
      if (c.model == r.model) {
        float ds = r.success_rate - c.success_mean, dp = r.spl - c.spl_mean;
        c.success_std += ds * ds;
        c.spl_std += dp * dp;
      }
  for (auto& c : out) {
    c.success_std = std::sqrt(c.success_std / static_cast<float>(c.seeds));
    c.spl_std = std::sqrt(c.spl_std / static_cast<float>(c.seeds));
  }
  return out;
}

void save_compare(const std::vector<CompareRow>& rows, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("compare: cannot open " + path);
  std::fprintf(f, "model,seeds,success_mean,success_std,spl_mean,spl_std\n");
  for (const auto& r : rows)
    std::fprintf(f, "%s,%d,%.4f,%.4f,%.4f,%.4f\n", r.model.c_str(), r.seeds, r.success_mean,
                 r.success_std, r.spl_mean, r.spl_std);
  std::fclose(f);
}

Tensor heatmap(ParamSet& model, const Tensor& image) {
  if (image.size() != 3 * kImgSize * kImgSize)
    throw std::invalid_argument("heatmap: expected a {3,32,32} observation");
  Tensor batch({1, 3, kImgSize, kImgSize}, image.data);
  Var x = constant(batch);
  Var h1 = leaky_relu(conv2d(x, param(model, "M.conv1.w"), param(model, "M.conv1.b"), 2));
  Var h2 = leaky_relu(conv2d(h1, param(model, "M.conv2.w"), param(model, "M.conv2.b"), 2));

  const auto& shape = h2->value.shape;  // {1, C, H, W}
  int C = shape[1], H = shape[2], W = shape[3];
  Tensor map({H, W});
  for (int y = 0; y < H; ++y)
    for (int xx = 0; xx < W; ++xx) {
      float acc = 0.f;
      for (int c = 0; c < C; ++c)
        acc += std::fabs(h2->value[(c * H + y) * W + xx]);
      map[y * W + xx] = acc / static_cast<float>(C);
    }

  float lo = map[0], hi = map[0];
  for (float v : map.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-6f) {
    for (auto& v : map.data) v = 0.5f;  // near-constant activations: flat map
  } else {
    for (auto& v : map.data) v = (v - lo) / (hi - lo);
  }
  return map;
}

void save_pgm(const Tensor& map, const std::string& path) {
  if (map.shape.size() != 2) throw std::invalid_argument("pgm: expected a 2-D map");
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("pgm: cannot open " + path);
  std::fprintf(f, "P5\n%d %d\n255\n", map.shape[1], map.shape[0]);
  for (float v : map.data) {
    float c = std::clamp(v, 0.f, 1.f);
    unsigned char byte = static_cast<unsigned char>(std::lround(c * 255.f));
    std::fwrite(&byte, 1, 1, f);
  }
  std::fclose(f);
}

}  // namespace jrt
