#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace jrt {

using Shape = std::vector<int>;

template <class T>
using RowMatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMat = RowMatT<float>;

inline int numel(const Shape& s) {
  int n = 1;
  for (int d : s) {
    if (d <= 0) throw std::invalid_argument("tensor: non-positive dimension");
    n *= d;
  }
  return n;
}

/// Dense row-major tensor templated on scalar. Production code runs float32;
/// double instantiations back the finite-difference side of grad_check.
template <class T>
struct TensorT {
  using Scalar = T;
  Shape shape;
  std::vector<T> data;

  TensorT() = default;
  explicit TensorT(Shape s) : shape(std::move(s)), data(static_cast<size_t>(numel(shape)), T(0)) {}
  TensorT(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<int>(data.size()) != numel(shape))
      throw std::invalid_argument("tensor: data length does not match shape");
  }

  static TensorT zeros(Shape s) { return TensorT(std::move(s)); }
  static TensorT full(Shape s, T v) {
    TensorT t(std::move(s));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }
  static TensorT scalar(T v) { return TensorT({1}, {v}); }

  int size() const { return static_cast<int>(data.size()); }
  T& operator[](int i) { return data[static_cast<size_t>(i)]; }
  T operator[](int i) const { return data[static_cast<size_t>(i)]; }

  bool same_shape(const TensorT& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  Eigen::Map<Eigen::Vector<T, Eigen::Dynamic>> vec() {
    return {data.data(), static_cast<Eigen::Index>(data.size())};
  }
  Eigen::Map<const Eigen::Vector<T, Eigen::Dynamic>> vec() const {
    return {data.data(), static_cast<Eigen::Index>(data.size())};
  }
  Eigen::Map<RowMatT<T>> mat(int rows, int cols) { return {data.data(), rows, cols}; }
  Eigen::Map<const RowMatT<T>> mat(int rows, int cols) const { return {data.data(), rows, cols}; }
};

using Tensor = TensorT<float>;

template <class To, class From>
TensorT<To> cast_tensor(const TensorT<From>& t) {
  TensorT<To> out;
  out.shape = t.shape;
  out.data.reserve(t.data.size());
  for (From v : t.data) out.data.push_back(static_cast<To>(v));
  return out;
}

/// Ordered name -> (value, gradient, trainable) map. Gradient always has the
/// value's shape; names are unique by construction.
template <class T>
struct ParamSetT {
  using Scalar = T;
  struct Entry {
    TensorT<T> value;
    TensorT<T> grad;
    bool trainable = true;
  };

  std::vector<std::string> order;
  std::map<std::string, Entry> entries;

  Entry& add(const std::string& name, TensorT<T> init, bool trainable = true) {
    if (entries.count(name)) throw std::invalid_argument("paramset: duplicate name " + name);
    Entry e;
    e.grad = TensorT<T>::zeros(init.shape);
    e.value = std::move(init);
    e.trainable = trainable;
    order.push_back(name);
    return entries.emplace(name, std::move(e)).first->second;
  }

  bool has(const std::string& name) const { return entries.count(name) != 0; }
  Entry& at(const std::string& name) {
    auto it = entries.find(name);
    if (it == entries.end()) throw std::invalid_argument("paramset: unknown name " + name);
    return it->second;
  }
  const Entry& at(const std::string& name) const {
    auto it = entries.find(name);
    if (it == entries.end()) throw std::invalid_argument("paramset: unknown name " + name);
    return it->second;
  }

  void zero_grad() {
    for (auto& [_, e] : entries) std::fill(e.grad.data.begin(), e.grad.data.end(), T(0));
  }

  /// Copy values (not gradients) from another set for every name with a given
  /// prefix. Shapes must match.
  void copy_values_from(const ParamSetT& src, const std::string& prefix = "") {
    for (const auto& name : src.order) {
      if (name.rfind(prefix, 0) != 0) continue;
      if (!has(name)) continue;
      auto& dst = at(name);
      const auto& s = src.at(name);
      if (!dst.value.same_shape(s.value))
        throw std::invalid_argument("paramset: shape mismatch copying " + name);
      dst.value.data = s.value.data;
    }
  }

  /// Mark every parameter whose name starts with prefix (non-)trainable.
  void set_trainable(const std::string& prefix, bool trainable) {
    for (auto& [name, e] : entries)
      if (name.rfind(prefix, 0) == 0) e.trainable = trainable;
  }

  int total_size(bool trainable_only = false) const {
    int n = 0;
    for (const auto& [_, e] : entries)
      if (!trainable_only || e.trainable) n += e.value.size();
    return n;
  }
};

using ParamSet = ParamSetT<float>;

template <class To, class From>
ParamSetT<To> cast_params(const ParamSetT<From>& ps) {
  ParamSetT<To> out;
  for (const auto& name : ps.order) {
    const auto& e = ps.at(name);
    out.add(name, cast_tensor<To>(e.value), e.trainable);
  }
  return out;
}

}  // namespace jrt
