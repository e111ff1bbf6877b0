#include "jrt/fadapt.hpp"

#include <cstdio>
#include <stdexcept>

#include "jrt/optim.hpp"

namespace jrt {

void save_adapt_log(const AdaptLog& log, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("adapt log: cannot open " + path);
  std::fprintf(f, "iter,l_cls,l_adv,l_idt,l_norm\n");
  for (const auto& r : log.rows)
    std::fprintf(f, "%d,%.6f,%.6f,%.6f,%.6f\n", r.iter, r.l_cls, r.l_adv, r.l_idt, r.l_norm);
  std::fclose(f);
}

namespace {

Tensor he_init(Shape shape, int fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  float std = std::sqrt(2.f / static_cast<float>(fan_in));
  for (auto& v : t.data) v = rng.normal() * std;
  return t;
}

// forward the encoder on a {B,3,32,32} batch, result detached
Tensor encode_values(ParamSet& ps, const Tensor& batch) {
  return encode_graph(ps, batch)->value;
}

}  // namespace

void init_discriminator(ParamSet& ps, uint64_t seed) {
  Rng rng(hash2(seed, 0xD15CULL));
  ps.add("D.fc1.w", he_init({kFeatureDim, kDiscHiddenDim}, kFeatureDim, rng));
  ps.add("D.fc1.b", Tensor::zeros({kDiscHiddenDim}));
  ps.add("D.fc2.w", he_init({kDiscHiddenDim, 1}, kDiscHiddenDim, rng));
  ps.add("D.fc2.b", Tensor::zeros({1}));
}

Tensor stack_images(const std::vector<Tensor>& images, const std::vector<int>& idx) {
  int B = static_cast<int>(idx.size());
  Tensor out({B, 3, kImgSize, kImgSize});
  int per = 3 * kImgSize * kImgSize;
  for (int i = 0; i < B; ++i) {
    const Tensor& img = images[static_cast<size_t>(idx[static_cast<size_t>(i)])];
    if (img.size() != per) throw std::invalid_argument("stack_images: bad image shape");
    std::copy(img.data.begin(), img.data.end(),
              out.data.begin() + static_cast<size_t>(i) * per);
  }
  return out;
}

std::vector<Tensor> encode_features(const ParamSet& ps, const std::vector<Tensor>& images) {
  ParamSet work = ps;
  std::vector<Tensor> out;
  out.reserve(images.size());
  int n = static_cast<int>(images.size());
  for (int start = 0; start < n; start += 64) {
    int stop = std::min(start + 64, n);
    std::vector<int> idx;
    for (int i = start; i < stop; ++i) idx.push_back(i);
    Tensor f = encode_values(work, stack_images(images, idx));
    for (int r = 0; r < stop - start; ++r) {
      Tensor row({kFeatureDim});
      std::copy_n(f.data.begin() + static_cast<size_t>(r) * kFeatureDim, kFeatureDim,
                  row.data.begin());
      out.push_back(std::move(row));
    }
  }
  return out;
}

AdaptResult adapt(const ParamSet& ms, const std::vector<Tensor>& sim_images,
                  const std::vector<Tensor>& real_images, const AdaptConfig& cfg) {
  if (sim_images.empty() || real_images.empty())
    throw std::invalid_argument("adapt: empty image bank");
  if (cfg.batch < 2 || cfg.batch % 2 != 0)
    throw std::invalid_argument("adapt: batch must be even and >= 2");

  AdaptResult res;
  res.params = ms;

  // working set: trainable encoder copy (M_r) plus the discriminator
  ParamSet work;
  for (const auto& name : ms.order)
    if (name.rfind("M.", 0) == 0) work.add(name, ms.at(name).value);
  init_discriminator(work, cfg.seed);

  ParamSet ms_enc = ms;  // frozen reference encoder, forward only
  OptimState opt_d = OptimState::make_adam(cfg.lr * kDiscLrMult);
  OptimState opt_m = OptimState::make_adam(cfg.lr);
  Rng rng(hash2(cfg.seed, 0xFADAULL));
  int half = cfg.batch / 2;

  // the returned encoder is an exponential moving average of the training
  // iterates: the adversarial game orbits its equilibrium, the average sits
  // near the orbit's center
  ParamSet ema;
  for (const auto& name : work.order)
    if (name.rfind("M.", 0) == 0) ema.add(name, work.at(name).value);

  for (int iter = 1; iter <= cfg.iters; ++iter) {
    // both sides anneal linearly to zero so the orbit contracts
    float frac = 1.f - static_cast<float>(iter - 1) / static_cast<float>(cfg.iters);
    opt_d.adam.lr = cfg.lr * kDiscLrMult * frac;
    opt_m.adam.lr = cfg.lr * frac;
    std::vector<int> idx_s, idx_r;
    for (int i = 0; i < half; ++i)
      idx_s.push_back(rng.uniform_int(0, static_cast<int>(sim_images.size()) - 1));
    for (int i = 0; i < half; ++i)
      idx_r.push_back(rng.uniform_int(0, static_cast<int>(real_images.size()) - 1));
    Tensor x_s = stack_images(sim_images, idx_s);
    Tensor x_r = stack_images(real_images, idx_r);
    Tensor f_s = encode_values(ms_enc, x_s);
    Tensor f_r = encode_values(work, x_r);

    work.set_trainable("M.", false);
    work.set_trainable("D.", true);
    Var l_cls;
    for (int k = 0; k < kDiscInnerSteps; ++k) {
      work.zero_grad();
      l_cls = discriminator_loss(work, f_s, f_r);
      backward(add(l_cls, scale(weight_norm_graph(work, "D."), cfg.norm)));
      optim_step(opt_d, work);
    }

    work.set_trainable("M.", true);
    work.set_trainable("D.", false);
    Var l_adv, l_idt, l_norm;
    for (int k = 0; k < kEncInnerSteps; ++k) {
      work.zero_grad();
      l_adv = adversarial_loss(work, x_r);
      l_idt = identity_loss(work, f_s, x_s);
      l_norm = weight_norm_graph(work, "M.");
      backward(add(add(l_adv, scale(l_idt, cfg.idt)), scale(l_norm, cfg.norm)));
      optim_step(opt_m, work);
    }
    for (const auto& name : ema.order)
      ema.at(name).value.vec() = kEmaDecay * ema.at(name).value.vec() +
                                 (1.f - kEmaDecay) * work.at(name).value.vec();

    AdaptLogRow row{iter, l_cls->value[0], l_adv->value[0], l_idt->value[0], l_norm->value[0]};
    if (!std::isfinite(row.l_cls) || !std::isfinite(row.l_adv) || !std::isfinite(row.l_idt) ||
        !std::isfinite(row.l_norm))
      throw std::runtime_error("adapt: non-finite loss at iteration " + std::to_string(iter));
    res.log.rows.push_back(row);
  }

  res.params.copy_values_from(ema, "M.");
  return res;
}

float probe_accuracy(const std::vector<Tensor>& feats_a, const std::vector<Tensor>& feats_b,
                     uint64_t seed) {
  if (feats_a.empty() || feats_b.empty())
    throw std::invalid_argument("probe: empty feature set");
  int dim = feats_a[0].size();
  std::vector<const Tensor*> xs;
  std::vector<int> ys;
  for (const auto& f : feats_a) {
    xs.push_back(&f);
    ys.push_back(0);
  }
  for (const auto& f : feats_b) {
    xs.push_back(&f);
    ys.push_back(1);
  }
  Rng rng(hash2(seed, 0x9B0BEULL));
  std::vector<int> perm(xs.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  rng.shuffle(perm);

  // weight-decayed logistic regression: a linear probe reads gross
  // distributional separation without carving around thin feature manifolds
  int n = static_cast<int>(xs.size());
  int n_train = n / 2;
  const int classes = 2;
  const float decay = 1e-2f;
  ParamSet ps;
  ps.add("p.w", he_init({dim, classes}, dim, rng));
  ps.add("p.b", Tensor::zeros({classes}));
  OptimState opt = OptimState::make_adam(2e-3f);

  auto batch_of = [&](const std::vector<int>& rows) {
    Tensor x({static_cast<int>(rows.size()), dim});
    for (size_t r = 0; r < rows.size(); ++r)
      std::copy(xs[static_cast<size_t>(perm[static_cast<size_t>(rows[r])])]->data.begin(),
                xs[static_cast<size_t>(perm[static_cast<size_t>(rows[r])])]->data.end(),
                x.data.begin() + r * static_cast<size_t>(dim));
    return x;
  };
  auto logits_graph = [&](const Tensor& x) {
    return affine(constant(x), param(ps, "p.w"), param(ps, "p.b"));
  };

  const int iters = 600, bsz = 128;
  for (int it = 0; it < iters; ++it) {
    std::vector<int> rows;
    for (int i = 0; i < bsz; ++i) rows.push_back(rng.uniform_int(0, n_train - 1));
    Var logp = log_clamped(softmax_rows(logits_graph(batch_of(rows))));
    Var flat = reshape(logp, {bsz * classes});
    Var loss = constant(Tensor::scalar(0.f));
    for (int r = 0; r < bsz; ++r)
      loss = sub(loss, pick(flat, r * classes + ys[static_cast<size_t>(perm[static_cast<size_t>(rows[static_cast<size_t>(r)])])]));
    ps.zero_grad();
    backward(add(scale(loss, 1.0 / bsz), scale(l2sq(param(ps, "p.w")), decay)));
    optim_step(opt, ps);
  }

  std::vector<int> test_rows;
  for (int i = n_train; i < n; ++i) test_rows.push_back(i);
  Tensor logits = logits_graph(batch_of(test_rows))->value;
  int correct = 0;
  for (size_t r = 0; r < test_rows.size(); ++r) {
    int pred = logits[static_cast<int>(r) * classes] >= logits[static_cast<int>(r) * classes + 1] ? 0 : 1;
    if (pred == ys[static_cast<size_t>(perm[static_cast<size_t>(test_rows[r])])]) ++correct;
  }
  return static_cast<float>(correct) / static_cast<float>(test_rows.size());
}

}  // namespace jrt
