#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "jrt/tensor.hpp"

namespace jrt {

// Reverse-mode graph over a fixed op vocabulary: affine, valid/zero-padded
// convolution, leaky rectifier, tanh, sigmoid, softmax, elementwise
// arithmetic, concatenation, reductions and the loss heads built from them.
// Everything is templated on scalar; production code uses float32 and
// grad_check runs its finite-difference side in double.

template <class T>
struct Node {
  TensorT<T> value;
  TensorT<T> grad;  // allocated in backward()
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node<T>>> parents;
  std::function<void(Node<T>&)> backprop;  // pushes this->grad into parents
  ParamSetT<T>* owner = nullptr;           // set for parameter leaves
  std::string pname;
};

template <class T>
using VarT = std::shared_ptr<Node<T>>;
using Var = VarT<float>;

namespace detail {

template <class T>
VarT<T> make_node(TensorT<T> value, std::vector<VarT<T>> parents) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  for (const auto& p : n->parents)
    if (p->requires_grad) n->requires_grad = true;
  return n;
}

// interpret a tensor as (rows, cols): rank-1 is one row, rank-2 as declared
template <class T>
std::pair<int, int> as_matrix(const TensorT<T>& t, const char* op) {
  if (t.shape.size() == 1) return {1, t.shape[0]};
  if (t.shape.size() == 2) return {t.shape[0], t.shape[1]};
  throw std::invalid_argument(std::string(op) + ": expected rank-1 or rank-2 tensor");
}

}  // namespace detail

template <class T>
VarT<T> constant(TensorT<T> t) {
  return detail::make_node(std::move(t), {});
}

/// Constant leaf with the scalar type of a parameter set; handy inside
/// generic loss builders shared between float and double instantiation.
template <class T>
VarT<T> constf(const ParamSetT<T>&, const Tensor& t) {
  return constant(cast_tensor<T>(t));
}

inline Var scalar_const(float v) { return constant(Tensor::scalar(v)); }

/// Parameter leaf; gradient flows back into ps.at(name).grad when trainable.
template <class T>
VarT<T> param(ParamSetT<T>& ps, const std::string& name) {
  auto& e = ps.at(name);
  auto n = std::make_shared<Node<T>>();
  n->value = e.value;
  n->requires_grad = e.trainable;
  n->owner = &ps;
  n->pname = name;
  return n;
}

/// Cut the graph: same value, no gradient flow.
template <class T>
VarT<T> detach(const VarT<T>& x) {
  return constant(x->value);
}

template <class T>
VarT<T> add(const VarT<T>& a, const VarT<T>& b) {
  if (!a->value.same_shape(b->value)) throw std::invalid_argument("add: shape mismatch");
  TensorT<T> out(a->value.shape);
  out.vec() = a->value.vec() + b->value.vec();
  auto n = detail::make_node(std::move(out), {a, b});
  n->backprop = [](Node<T>& self) {
    self.parents[0]->grad.vec() += self.grad.vec();
    self.parents[1]->grad.vec() += self.grad.vec();
  };
  return n;
}

template <class T>
VarT<T> sub(const VarT<T>& a, const VarT<T>& b) {
  if (!a->value.same_shape(b->value)) throw std::invalid_argument("sub: shape mismatch");
  TensorT<T> out(a->value.shape);
  out.vec() = a->value.vec() - b->value.vec();
  auto n = detail::make_node(std::move(out), {a, b});
  n->backprop = [](Node<T>& self) {
    self.parents[0]->grad.vec() += self.grad.vec();
    self.parents[1]->grad.vec() -= self.grad.vec();
  };
  return n;
}

template <class T>
VarT<T> mul(const VarT<T>& a, const VarT<T>& b) {
  if (!a->value.same_shape(b->value)) throw std::invalid_argument("mul: shape mismatch");
  TensorT<T> out(a->value.shape);
  out.vec() = a->value.vec().cwiseProduct(b->value.vec());
  auto n = detail::make_node(std::move(out), {a, b});
  n->backprop = [](Node<T>& self) {
    self.parents[0]->grad.vec() += self.grad.vec().cwiseProduct(self.parents[1]->value.vec());
    self.parents[1]->grad.vec() += self.grad.vec().cwiseProduct(self.parents[0]->value.vec());
  };
  return n;
}

template <class T>
VarT<T> scale(const VarT<T>& x, double cd) {
  T c = static_cast<T>(cd);
  TensorT<T> out(x->value.shape);
  out.vec() = x->value.vec() * c;
  auto n = detail::make_node(std::move(out), {x});
  n->backprop = [c](Node<T>& self) { self.parents[0]->grad.vec() += self.grad.vec() * c; };
  return n;
}

template <class T>
VarT<T> add_const(const VarT<T>& x, double cd) {
  T c = static_cast<T>(cd);
  TensorT<T> out(x->value.shape);
  out.vec() = x->value.vec().array() + c;
  auto n = detail::make_node(std::move(out), {x});
  n->backprop = [](Node<T>& self) { self.parents[0]->grad.vec() += self.grad.vec(); };
  return n;
}

/// (B,n) x (n,m) -> (B,m)
template <class T>
VarT<T> matmul(const VarT<T>& x, const VarT<T>& w) {
  auto [bx, nx] = detail::as_matrix(x->value, "matmul");
  auto [nw, mw] = detail::as_matrix(w->value, "matmul");
  if (nx != nw) throw std::invalid_argument("matmul: inner dimension mismatch");
  TensorT<T> out({bx, mw});
  out.mat(bx, mw).noalias() = x->value.mat(bx, nx) * w->value.mat(nw, mw);
  auto n = detail::make_node(std::move(out), {x, w});
  int B = bx, N = nx, M = mw;
  n->backprop = [B, N, M](Node<T>& self) {
    auto g = self.grad.mat(B, M);
    self.parents[0]->grad.mat(B, N).noalias() += g * self.parents[1]->value.mat(N, M).transpose();
    self.parents[1]->grad.mat(N, M).noalias() += self.parents[0]->value.mat(B, N).transpose() * g;
  };
  return n;
}

/// broadcast-add a length-m bias to every row of (B,m)
template <class T>
VarT<T> add_rowvec(const VarT<T>& x, const VarT<T>& b) {
  auto [B, M] = detail::as_matrix(x->value, "add_rowvec");
  if (b->value.size() != M) throw std::invalid_argument("add_rowvec: bias length mismatch");
  TensorT<T> out(x->value.shape);
  out.mat(B, M) = x->value.mat(B, M).rowwise() + b->value.vec().transpose();
  auto n = detail::make_node(std::move(out), {x, b});
  n->backprop = [B, M](Node<T>& self) {
    self.parents[0]->grad.vec() += self.grad.vec();
    self.parents[1]->grad.vec() += self.grad.mat(B, M).colwise().sum().transpose();
  };
  return n;
}

template <class T>
VarT<T> affine(const VarT<T>& x, const VarT<T>& w, const VarT<T>& b) {
  return add_rowvec(matmul(x, w), b);
}

/// x (B,C,H,W), w (OC,C,K,K), b (OC); valid convolution plus optional zero pad
template <class T>
VarT<T> conv2d(const VarT<T>& x, const VarT<T>& w, const VarT<T>& b, int stride, int pad = 0) {
  if (x->value.shape.size() != 4 || w->value.shape.size() != 4)
    throw std::invalid_argument("conv2d: expected 4-D input and weight");
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
  int B = x->value.shape[0], C = x->value.shape[1], H = x->value.shape[2], W = x->value.shape[3];
  int OC = w->value.shape[0], KC = w->value.shape[1], K = w->value.shape[2];
  if (KC != C || w->value.shape[3] != K) throw std::invalid_argument("conv2d: weight shape mismatch");
  if (b->value.size() != OC) throw std::invalid_argument("conv2d: bias length mismatch");
  int HP = H + 2 * pad, WP = W + 2 * pad;
  if (HP < K || WP < K) throw std::invalid_argument("conv2d: kernel larger than input");
  int OH = (HP - K) / stride + 1, OW = (WP - K) / stride + 1;
  int P = OH * OW, CKK = C * K * K;

  // im2col buffers are kept for the backward pass
  auto cols = std::make_shared<std::vector<RowMatT<T>>>(static_cast<size_t>(B));
  TensorT<T> out({B, OC, OH, OW});
  auto wm = w->value.mat(OC, CKK);
  for (int bi = 0; bi < B; ++bi) {
    RowMatT<T>& col = (*cols)[static_cast<size_t>(bi)];
    col.setZero(P, CKK);
    const T* xb = x->value.data.data() + static_cast<size_t>(bi) * C * H * W;
    for (int oy = 0; oy < OH; ++oy)
      for (int ox = 0; ox < OW; ++ox) {
        int p = oy * OW + ox;
        for (int c = 0; c < C; ++c)
          for (int ky = 0; ky < K; ++ky) {
            int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= H) continue;
            for (int kx = 0; kx < K; ++kx) {
              int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= W) continue;
              col(p, (c * K + ky) * K + kx) = xb[(c * H + iy) * W + ix];
            }
          }
      }
    RowMatT<T> o = col * wm.transpose();  // (P, OC)
    o.rowwise() += b->value.vec().transpose();
    T* ob = out.data.data() + static_cast<size_t>(bi) * OC * P;
    for (int oc = 0; oc < OC; ++oc)
      for (int p = 0; p < P; ++p) ob[oc * P + p] = o(p, oc);
  }

  auto n = detail::make_node(std::move(out), {x, w, b});
  n->backprop = [cols, B, C, H, W, OC, K, OH, OW, stride, pad, P, CKK](Node<T>& self) {
    auto wm2 = self.parents[1]->value.mat(OC, CKK);
    for (int bi = 0; bi < B; ++bi) {
      RowMatT<T> gout(P, OC);
      const T* gb = self.grad.data.data() + static_cast<size_t>(bi) * OC * P;
      for (int oc = 0; oc < OC; ++oc)
        for (int p = 0; p < P; ++p) gout(p, oc) = gb[oc * P + p];
      self.parents[1]->grad.mat(OC, CKK).noalias() +=
          gout.transpose() * (*cols)[static_cast<size_t>(bi)];
      self.parents[2]->grad.vec() += gout.colwise().sum().transpose();
      RowMatT<T> gcol = gout * wm2;  // (P, CKK)
      T* gx = self.parents[0]->grad.data.data() + static_cast<size_t>(bi) * C * H * W;
      for (int oy = 0; oy < OH; ++oy)
        for (int ox = 0; ox < OW; ++ox) {
          int p = oy * OW + ox;
          for (int c = 0; c < C; ++c)
            for (int ky = 0; ky < K; ++ky) {
              int iy = oy * stride + ky - pad;
              if (iy < 0 || iy >= H) continue;
              for (int kx = 0; kx < K; ++kx) {
                int ix = ox * stride + kx - pad;
                if (ix < 0 || ix >= W) continue;
                gx[(c * H + iy) * W + ix] += gcol(p, (c * K + ky) * K + kx);
              }
            }
        }
    }
  };
  return n;
}

template <class T>
VarT<T> leaky_relu(const VarT<T>& x, double slope_d = 0.01) {
  T slope = static_cast<T>(slope_d);
  TensorT<T> out(x->value.shape);
  for (int i = 0; i < out.size(); ++i) {
    T v = x->value[i];
    out[i] = v > T(0) ? v : slope * v;
  }
  auto n = detail::make_node(std::move(out), {x});
  n->backprop = [slope](Node<T>& self) {
    for (int i = 0; i < self.grad.size(); ++i)
      self.parents[0]->grad[i] += self.grad[i] * (self.parents[0]->value[i] > T(0) ? T(1) : slope);
  };
  return n;
}

template <class T>
VarT<T> tanh_op(const VarT<T>& x) {
  TensorT<T> out(x->value.shape);
  for (int i = 0; i < out.size(); ++i) out[i] = std::tanh(x->value[i]);
  auto n = detail::make_node(std::move(out), {x});
  n->backprop = [](Node<T>& self) {
    for (int i = 0; i < self.grad.size(); ++i) {
      T y = self.value[i];
      self.parents[0]->grad[i] += self.grad[i] * (T(1) - y * y);
    }
  };
  return n;
}

template <class T>
VarT<T> sigmoid_op(const VarT<T>& x) {
  TensorT<T> out(x->value.shape);
  for (int i = 0; i < out.size(); ++i) out[i] = T(1) / (T(1) + std::exp(-x->value[i]));
  auto n = detail::make_node(std::move(out), {x});
  n->backprop = [](Node<T>& self) {
    for (int i = 0; i < self.grad.size(); ++i) {
      T y = self.value[i];
      self.parents[0]->grad[i] += self.grad[i] * y * (T(1) - y);
    }
  };
  return n;
}

/// row-wise stable softmax over (B,n) (a rank-1 input is treated as (1,n))
template <class T>
VarT<T> softmax_rows(const VarT<T>& x) {
  if (!x->value.all_finite()) throw std::runtime_error("softmax: non-finite input");
  auto [B, M] = detail::as_matrix(x->value, "softmax");
  if (M == 0) throw std::invalid_argument("softmax: empty input");
  TensorT<T> out(x->value.shape);
  for (int r = 0; r < B; ++r) {
    const T* in = x->value.data.data() + static_cast<size_t>(r) * M;
    T* o = out.data.data() + static_cast<size_t>(r) * M;
    T mx = *std::max_element(in, in + M);
    T sum = T(0);
    for (int i = 0; i < M; ++i) {
      o[i] = std::exp(in[i] - mx);
      sum += o[i];
    }
    for (int i = 0; i < M; ++i) o[i] /= sum;
  }
  auto n = detail::make_node(std::move(out), {x});
  n->backprop = [B, M](Node<T>& self) {
    for (int r = 0; r < B; ++r) {
      const T* y = self.value.data.data() + static_cast<size_t>(r) * M;
      const T* g = self.grad.data.data() + static_cast<size_t>(r) * M;
      T* gx = self.parents[0]->grad.data.data() + static_cast<size_t>(r) * M;
      T dot = T(0);
      for (int i = 0; i < M; ++i) dot += g[i] * y[i];
      for (int i = 0; i < M; ++i) gx[i] += (g[i] - dot) * y[i];
    }
  };
  return n;
}

/// log(max(x, eps)); the project-wide guard for log-of-probability
template <class T>
VarT<T> log_clamped(const VarT<T>& x, double eps_d = 1e-8) {
  T eps = static_cast<T>(eps_d);
  TensorT<T> out(x->value.shape);
  for (int i = 0; i < out.size(); ++i) out[i] = std::log(std::max(x->value[i], eps));
  auto n = detail::make_node(std::move(out), {x});
  n->backprop = [eps](Node<T>& self) {
    for (int i = 0; i < self.grad.size(); ++i) {
      T v = self.parents[0]->value[i];
      if (v > eps) self.parents[0]->grad[i] += self.grad[i] / v;
      // clamped region: derivative zero
    }
  };
  return n;
}

/// log(max(sigmoid(x), eps)) evaluated in logit space, so the gradient stays
/// sigmoid(-x) even where sigmoid(x) underflows float precision
template <class T>
VarT<T> log_sigmoid_clamped(const VarT<T>& x, double eps_d = 1e-8) {
  T lo = std::log(static_cast<T>(eps_d));
  TensorT<T> out(x->value.shape);
  for (int i = 0; i < out.size(); ++i) {
    T v = x->value[i];
    T ls = v >= T(0) ? -std::log1p(std::exp(-v)) : v - std::log1p(std::exp(v));
    out[i] = std::max(ls, lo);
  }
  auto n = detail::make_node(std::move(out), {x});
  n->backprop = [lo](Node<T>& self) {
    for (int i = 0; i < self.grad.size(); ++i) {
      if (self.value[i] <= lo) continue;  // clamped region: derivative zero
      T v = self.parents[0]->value[i];
      T sig_neg = v >= T(0) ? std::exp(-v) / (T(1) + std::exp(-v)) : T(1) / (T(1) + std::exp(v));
      self.parents[0]->grad[i] += self.grad[i] * sig_neg;
    }
  };
  return n;
}

template <class T>
VarT<T> concat_cols(const VarT<T>& a, const VarT<T>& b) {
  auto [Ba, Ma] = detail::as_matrix(a->value, "concat");
  auto [Bb, Mb] = detail::as_matrix(b->value, "concat");
  if (Ba != Bb) throw std::invalid_argument("concat: row count mismatch");
  TensorT<T> out({Ba, Ma + Mb});
  for (int r = 0; r < Ba; ++r) {
    std::copy_n(a->value.data.data() + static_cast<size_t>(r) * Ma, Ma,
                out.data.data() + static_cast<size_t>(r) * (Ma + Mb));
    std::copy_n(b->value.data.data() + static_cast<size_t>(r) * Mb, Mb,
                out.data.data() + static_cast<size_t>(r) * (Ma + Mb) + Ma);
  }
  auto n = detail::make_node(std::move(out), {a, b});
  n->backprop = [Ba, Ma, Mb](Node<T>& self) {
    for (int r = 0; r < Ba; ++r) {
      const T* g = self.grad.data.data() + static_cast<size_t>(r) * (Ma + Mb);
      T* ga = self.parents[0]->grad.data.data() + static_cast<size_t>(r) * Ma;
      T* gb = self.parents[1]->grad.data.data() + static_cast<size_t>(r) * Mb;
      for (int i = 0; i < Ma; ++i) ga[i] += g[i];
      for (int i = 0; i < Mb; ++i) gb[i] += g[Ma + i];
    }
  };
  return n;
}

/// same data, new shape (element count must match)
template <class T>
VarT<T> reshape(const VarT<T>& x, Shape s) {
  if (numel(s) != x->value.size()) throw std::invalid_argument("reshape: element count mismatch");
  TensorT<T> out(std::move(s), x->value.data);
  auto n = detail::make_node(std::move(out), {x});
  n->backprop = [](Node<T>& self) { self.parents[0]->grad.vec() += self.grad.vec(); };
  return n;
}

/// select one element of a rank-1/flat tensor -> scalar
template <class T>
VarT<T> pick(const VarT<T>& x, int index) {
  if (index < 0 || index >= x->value.size()) throw std::invalid_argument("pick: index out of range");
  auto n = detail::make_node(TensorT<T>::scalar(x->value[index]), {x});
  n->backprop = [index](Node<T>& self) { self.parents[0]->grad[index] += self.grad[0]; };
  return n;
}

/// select row r of a (V,E) table -> (1,E); used for goal embeddings
template <class T>
VarT<T> embed_row(const VarT<T>& table, int row) {
  auto [V, E] = detail::as_matrix(table->value, "embed_row");
  if (row < 0 || row >= V) throw std::invalid_argument("embed_row: row out of range");
  TensorT<T> out({1, E});
  std::copy_n(table->value.data.data() + static_cast<size_t>(row) * E, E, out.data.data());
  auto n = detail::make_node(std::move(out), {table});
  n->backprop = [row, E](Node<T>& self) {
    T* g = self.parents[0]->grad.data.data() + static_cast<size_t>(row) * E;
    for (int i = 0; i < E; ++i) g[i] += self.grad[i];
  };
  return n;
}

template <class T>
VarT<T> sum_all(const VarT<T>& x) {
  auto n = detail::make_node(TensorT<T>::scalar(x->value.vec().sum()), {x});
  n->backprop = [](Node<T>& self) { self.parents[0]->grad.vec().array() += self.grad[0]; };
  return n;
}

template <class T>
VarT<T> mean_all(const VarT<T>& x) {
  T inv = T(1) / static_cast<T>(x->value.size());
  auto n = detail::make_node(TensorT<T>::scalar(x->value.vec().sum() * inv), {x});
  n->backprop = [inv](Node<T>& self) { self.parents[0]->grad.vec().array() += self.grad[0] * inv; };
  return n;
}

/// sum of squares -> scalar (L2 weight-norm term)
template <class T>
VarT<T> l2sq(const VarT<T>& x) {
  auto n = detail::make_node(TensorT<T>::scalar(x->value.vec().squaredNorm()), {x});
  n->backprop = [](Node<T>& self) {
    self.parents[0]->grad.vec() += T(2) * self.grad[0] * self.parents[0]->value.vec();
  };
  return n;
}

/// mean over rows of the per-row Euclidean norm of (B,n) -> scalar
template <class T>
VarT<T> mean_row_norm(const VarT<T>& x) {
  auto [B, M] = detail::as_matrix(x->value, "mean_row_norm");
  T acc = T(0);
  for (int r = 0; r < B; ++r) acc += x->value.mat(B, M).row(r).norm();
  auto n = detail::make_node(TensorT<T>::scalar(acc / static_cast<T>(B)), {x});
  n->backprop = [B, M](Node<T>& self) {
    auto xm = self.parents[0]->value.mat(B, M);
    auto gm = self.parents[0]->grad.mat(B, M);
    T g = self.grad[0] / static_cast<T>(B);
    for (int r = 0; r < B; ++r) {
      T nrm = std::max(xm.row(r).norm(), T(1e-12));
      gm.row(r) += (g / nrm) * xm.row(r);
    }
  };
  return n;
}

/// Run reverse-mode accumulation from a scalar loss. Fills ps.grad for every
/// trainable parameter leaf reachable from it; other gradients are untouched.
template <class T>
void backward(const VarT<T>& loss) {
  if (loss->value.size() != 1) throw std::invalid_argument("backward: loss must be scalar");
  if (!std::isfinite(loss->value[0])) throw std::runtime_error("backward: non-finite loss");

  // iterative post-order topological sort
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node<T>* p = node->parents[idx++].get();
      if (!visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node<T>* n : order) n->grad = TensorT<T>::zeros(n->value.shape);
  loss->grad[0] = T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backprop && (*it)->requires_grad) (*it)->backprop(**it);

  for (Node<T>* n : order)
    if (n->owner && n->requires_grad) {
      auto& e = n->owner->at(n->pname);
      if (e.trainable) e.grad.vec() += n->grad.vec();
    }
}

/// Max relative error between analytic float32 gradients and double-precision
/// central finite differences of make_loss over every trainable parameter.
/// make_loss must be a generic callable accepting ParamSetT<float>& and
/// ParamSetT<double>&.
template <class F>
double grad_check(F&& make_loss, ParamSet& ps, double eps = 1e-3) {
  ps.zero_grad();
  backward(make_loss(ps));

  ParamSetT<double> psd = cast_params<double>(ps);
  double max_err = 0.0;
  for (const auto& name : ps.order) {
    auto& e = psd.at(name);
    if (!e.trainable) continue;
    const auto& analytic = ps.at(name).grad;
    for (int i = 0; i < e.value.size(); ++i) {
      double save = e.value[i];
      e.value[i] = save + eps;
      double lp = make_loss(psd)->value[0];
      e.value[i] = save - eps;
      double lm = make_loss(psd)->value[0];
      e.value[i] = save;
      double num = (lp - lm) / (2.0 * eps);
      double ana = analytic[i];
      double err = std::abs(ana - num) / std::max(1e-6, std::abs(ana) + std::abs(num));
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

}  // namespace jrt
