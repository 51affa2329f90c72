#pragma once

#include <map>
#include <string>
#include <vector>

#include "msgfn/io/binary.hpp"
#include "msgfn/numerics/params.hpp"

namespace msgfn {

// Tensor segment: u32 count, then per tensor
//   u32 name length, name bytes, u32 rank, u64 dims[rank], f32 values[].

inline void write_tensor_segment(std::ostream& os,
                                 const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
  io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    io::write_string(os, name);
    io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(t->rank()));
    for (auto d : t->shape()) io::write_pod<std::uint64_t>(os, d);
    for (double v : t->values()) io::write_pod<float>(os, static_cast<float>(v));
  }
}

inline std::vector<std::pair<std::string, Tensor>> read_tensor_segment(std::istream& is) {
  const auto count = io::read_pod<std::uint32_t>(is);
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = io::read_string(is, 4096);
    const auto rank = io::read_pod<std::uint32_t>(is);
    if (rank > 8) throw FormatError("tensor " + name + ": rank out of range");
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(io::read_pod<std::uint64_t>(is));
    if (Tensor::element_count(shape) > (1u << 28)) throw FormatError("tensor " + name + ": too large");
    Tensor t(shape);
    for (auto& v : t.values()) v = static_cast<double>(io::read_pod<float>(is));
    out.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

/// Values and RMSProp accumulators of every parameter, in store order.
inline void write_params(std::ostream& os, const ParamStore& store) {
  std::vector<std::pair<std::string, const Tensor*>> values, accs;
  for (const auto& p : store) {
    values.emplace_back(p.name, &p.value);
    accs.emplace_back(p.name, &p.accumulator);
  }
  write_tensor_segment(os, values);
  write_tensor_segment(os, accs);
}

/// Overwrites parameters of an already-constructed store. Every stored tensor
/// must exist with a matching shape and every store parameter must be present.
inline void read_params(std::istream& is, ParamStore& store) {
  auto values = read_tensor_segment(is);
  auto accs = read_tensor_segment(is);
  if (values.size() != store.size() || accs.size() != store.size())
    throw FormatError("parameter count mismatch: file has " + std::to_string(values.size()) +
                      ", model has " + std::to_string(store.size()));
  auto assign = [&](std::vector<std::pair<std::string, Tensor>>& seg, bool acc) {
    for (auto& [name, t] : seg) {
      if (!store.contains(name)) throw FormatError("unknown parameter " + name);
      Parameter& p = store[name];
      if (p.value.shape() != t.shape()) throw FormatError("shape mismatch for " + name);
      (acc ? p.accumulator : p.value) = std::move(t);
    }
  };
  assign(values, false);
  assign(accs, true);
}

}  // namespace msgfn
