#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "msgfn/numerics/tensor.hpp"
#include "msgfn/util/rng.hpp"

namespace msgfn {

struct Parameter {
  std::string name;
  std::string group;  // "policy" or "flow"; selects the learning rate
  Tensor value;
  Tensor accumulator;  // RMSProp running mean of squared gradients
};

/// Gradient tensors aligned index-for-index with a ParamStore.
using Gradients = std::vector<Tensor>;

/// Named parameters in insertion order. Indices are stable for the lifetime
/// of the store, so layers refer to their weights by index.
class ParamStore {
 public:
  std::size_t add(const std::string& name, const std::string& group, Tensor init) {
    if (index_.count(name)) throw std::invalid_argument("duplicate parameter " + name);
    Tensor acc(init.shape(), 0.0);
    params_.push_back({name, group, std::move(init), std::move(acc)});
    index_.emplace(name, params_.size() - 1);
    return params_.size() - 1;
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown parameter " + name);
    return it->second;
  }

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  Parameter& operator[](const std::string& name) { return params_[index(name)]; }
  const Parameter& operator[](const std::string& name) const { return params_[index(name)]; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  Gradients zero_gradients() const {
    Gradients g;
    g.reserve(params_.size());
    for (const auto& p : params_) g.emplace_back(p.value.shape(), 0.0);
    return g;
  }

  friend bool operator==(const ParamStore& a, const ParamStore& b) { return a.params_ == b.params_; }

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

inline bool operator==(const Parameter& a, const Parameter& b) {
  return a.name == b.name && a.group == b.group && a.value == b.value &&
         a.accumulator == b.accumulator;
}

/// Uniform in +-sqrt(1/fan_in).
inline Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (auto& v : t.values()) v = uniform(rng, -bound, bound);
  return t;
}

inline void add_into(Gradients& into, const Gradients& from) {
  for (std::size_t i = 0; i < into.size(); ++i) {
    auto dst = into[i].values();
    auto src = from[i].values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

}  // namespace msgfn
