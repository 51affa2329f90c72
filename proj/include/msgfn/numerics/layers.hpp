#pragma once

#include <string>

#include "msgfn/numerics/tape.hpp"

namespace msgfn {

/// Registers "<name>.weight" (out x in) and "<name>.bias". Weights start
/// uniform in +-sqrt(1/in) unless zero_init, in which case both are zero.
inline LinearLayer make_linear(ParamStore& store, const std::string& name, const std::string& group,
                               std::size_t in, std::size_t out, Rng& rng, bool zero_init = false) {
  LinearLayer l;
  l.weight = store.add(name + ".weight", group,
                       zero_init ? Tensor::matrix(out, in) : uniform_init({out, in}, in, rng));
  l.bias = store.add(name + ".bias", group,
                     zero_init ? Tensor({out}) : uniform_init({out}, in, rng));
  return l;
}

inline GruLayer make_gru(ParamStore& store, const std::string& name, const std::string& group,
                         std::size_t in, std::size_t hidden, Rng& rng) {
  const std::size_t fan_in = in + hidden;
  GruLayer g;
  g.hidden = hidden;
  g.wx = store.add(name + ".wx", group, uniform_init({3 * hidden, in}, fan_in, rng));
  g.wh_zr = store.add(name + ".wh_zr", group, uniform_init({2 * hidden, hidden}, fan_in, rng));
  g.wh_n = store.add(name + ".wh_n", group, uniform_init({hidden, hidden}, fan_in, rng));
  g.bias = store.add(name + ".bias", group, uniform_init({3 * hidden}, fan_in, rng));
  return g;
}

inline LinearLayer find_linear(const ParamStore& store, const std::string& name) {
  return {store.index(name + ".weight"), store.index(name + ".bias")};
}

inline GruLayer find_gru(const ParamStore& store, const std::string& name) {
  GruLayer g;
  g.wx = store.index(name + ".wx");
  g.wh_zr = store.index(name + ".wh_zr");
  g.wh_n = store.index(name + ".wh_n");
  g.bias = store.index(name + ".bias");
  g.hidden = store[g.wh_n].value.rows();
  return g;
}

/// One-shot feed-forward evaluation: act(W x + b) for a single vector x.
inline Tensor ff_forward(const Tensor& x, const Tensor& w, const Tensor& b, Activation act) {
  ParamStore store;
  LinearLayer l{store.add("w", "", w), store.add("b", "", b)};
  Tape tape(store);
  Tensor row({1, x.size()}, std::vector<double>(x.values().begin(), x.values().end()));
  const Tensor& y = tape.value(tape.linear(tape.input(std::move(row)), l, act));
  return Tensor::vector(std::vector<double>(y.values().begin(), y.values().end()));
}

}  // namespace msgfn
