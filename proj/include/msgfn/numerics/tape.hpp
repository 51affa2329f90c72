#pragma once

#include <initializer_list>
#include <string>
#include <unordered_map>
#include <vector>

#include "msgfn/numerics/kernels.hpp"
#include "msgfn/numerics/params.hpp"
#include "msgfn/numerics/tensor.hpp"

namespace msgfn {

enum class Activation { identity, leaky_relu, log_softmax, sigmoid, tanh };

/// y = act(x W^T + b) with W stored out x in.
struct LinearLayer {
  std::size_t weight = 0;
  std::size_t bias = 0;
};

/// GRU cell. wx is 3H x I (update, reset, candidate rows), wh_zr is 2H x H,
/// wh_n is H x H, bias is 3H. Equivalent to the usual [x; h] formulation
/// with the candidate reading [x; r * h].
struct GruLayer {
  std::size_t wx = 0;
  std::size_t wh_zr = 0;
  std::size_t wh_n = 0;
  std::size_t bias = 0;
  std::size_t hidden = 0;
};

/// Records one forward pass over batched row-major activations and replays it
/// in reverse for gradients. Not thread-safe; use one tape per thread.
class Tape {
 public:
  using Node = std::size_t;

  explicit Tape(const ParamStore& params) : params_(&params) {}

  const ParamStore& params() const { return *params_; }
  std::size_t size() const { return nodes_.size(); }

  Node input(Tensor value) {
    ensure_finite(value, "input");
    return push(Op::input, std::move(value), {});
  }

  /// The current value of a parameter as a differentiable node.
  Node param(std::size_t index) {
    NodeData n{Op::param, (*params_)[index].value, {}, {}};
    n.param_index = index;
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  Node linear(Node x, const LinearLayer& layer, Activation act) {
    const Tensor& xv = nodes_[x].value;
    const Tensor& w = (*params_)[layer.weight].value;
    const Tensor& b = (*params_)[layer.bias].value;
    check_linear(xv, w, b);
    const std::size_t batch = xv.rows(), in = w.cols(), out = w.rows();
    Tensor y = Tensor::matrix(batch, out);
    kernels::rows_times(xv.data(), batch, in, transposed(layer.weight).data(), out, y.data(),
                        b.data(), false);
    apply_activation(y, act);
    ensure_finite(y, "linear");
    NodeData n{Op::linear, std::move(y), {x}, {}};
    n.linear = layer;
    n.activation = act;
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  Node gru(Node x, Node h, const GruLayer& layer) {
    const Tensor& xv = nodes_[x].value;
    const Tensor& hv = nodes_[h].value;
    const std::size_t H = layer.hidden;
    const Tensor& wx = (*params_)[layer.wx].value;
    const Tensor& whzr = (*params_)[layer.wh_zr].value;
    const Tensor& whn = (*params_)[layer.wh_n].value;
    const Tensor& bias = (*params_)[layer.bias].value;
    if (hv.cols() != H || hv.rows() != xv.rows())
      throw DimensionError("gru: hidden state " + shape_string(hv) + " expected width " +
                           std::to_string(H));
    if (wx.rows() != 3 * H || wx.cols() != xv.cols() || whzr.rows() != 2 * H ||
        whzr.cols() != H || whn.rows() != H || whn.cols() != H || bias.size() != 3 * H)
      throw DimensionError("gru: weight shapes incompatible with input " + shape_string(xv));
    const std::size_t batch = xv.rows(), in = xv.cols();

    Tensor gx = Tensor::matrix(batch, 3 * H);
    kernels::rows_times(xv.data(), batch, in, transposed(layer.wx).data(), 3 * H, gx.data(),
                        bias.data(), false);
    Tensor gh = Tensor::matrix(batch, 2 * H);
    kernels::rows_times(hv.data(), batch, H, transposed(layer.wh_zr).data(), 2 * H, gh.data(),
                        nullptr, false);
    Tensor z = Tensor::matrix(batch, H), r = Tensor::matrix(batch, H), rh = Tensor::matrix(batch, H);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t j = 0; j < H; ++j) {
        z.at(b, j) = kernels::sigmoid(gx.at(b, j) + gh.at(b, j));
        r.at(b, j) = kernels::sigmoid(gx.at(b, H + j) + gh.at(b, H + j));
        rh.at(b, j) = r.at(b, j) * hv.at(b, j);
      }
    Tensor cand = Tensor::matrix(batch, H);
    kernels::rows_times(rh.data(), batch, H, transposed(layer.wh_n).data(), H, cand.data(), nullptr,
                        false);
    Tensor out = Tensor::matrix(batch, H);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t j = 0; j < H; ++j) {
        const double n = std::tanh(gx.at(b, 2 * H + j) + cand.at(b, j));
        cand.at(b, j) = n;
        const double zz = z.at(b, j);
        out.at(b, j) = (1.0 - zz) * hv.at(b, j) + zz * n;
      }
    ensure_finite(out, "gru");
    NodeData node{Op::gru, std::move(out), {x, h}, {}};
    node.gru = layer;
    node.saved = {std::move(z), std::move(r), std::move(cand), std::move(rh)};
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

  Node concat(std::initializer_list<Node> parts) { return concat(std::vector<Node>(parts)); }
  Node concat(const std::vector<Node>& parts) {
    if (parts.empty()) throw DimensionError("concat: no inputs");
    const std::size_t batch = nodes_[parts[0]].value.rows();
    std::size_t width = 0;
    for (Node p : parts) {
      if (nodes_[p].value.rows() != batch) throw DimensionError("concat: batch mismatch");
      width += nodes_[p].value.cols();
    }
    Tensor y = Tensor::matrix(batch, width);
    for (std::size_t b = 0; b < batch; ++b) {
      double* dst = y.data() + b * width;
      for (Node p : parts) {
        auto src = nodes_[p].value.row(b);
        std::copy(src.begin(), src.end(), dst);
        dst += src.size();
      }
    }
    return push(Op::concat, std::move(y), parts);
  }

  /// Selects column columns[b] of row b; result is batch x 1.
  Node pick(Node x, std::vector<int> columns) {
    const Tensor& xv = nodes_[x].value;
    if (columns.size() != xv.rows()) throw DimensionError("pick: one column per row required");
    Tensor y = Tensor::matrix(xv.rows(), 1);
    for (std::size_t b = 0; b < xv.rows(); ++b) {
      if (columns[b] < 0 || static_cast<std::size_t>(columns[b]) >= xv.cols())
        throw DimensionError("pick: column out of range");
      y[b] = xv.at(b, static_cast<std::size_t>(columns[b]));
    }
    NodeData n{Op::pick, std::move(y), {x}, {}};
    n.columns = std::move(columns);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  Node add(Node a, Node b) { return binary(Op::add, a, b); }
  Node sub(Node a, Node b) { return binary(Op::sub, a, b); }
  Node mul(Node a, Node b) { return binary(Op::mul, a, b); }

  Node square(Node a) {
    Tensor y = nodes_[a].value;
    for (double& v : y.values()) v *= v;
    ensure_finite(y, "square");
    return push(Op::square, std::move(y), {a});
  }

  /// scale * (sum of all elements), as a 1 x 1 node.
  Node sum(Node a, double scale = 1.0) {
    double s = 0.0;
    for (double v : nodes_[a].value.values()) s += v;
    Tensor y = Tensor::matrix(1, 1, s * scale);
    ensure_finite(y, "sum");
    NodeData n{Op::sum, std::move(y), {a}, {}};
    n.scale = scale;
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  const Tensor& value(Node n) const { return nodes_.at(n).value; }

  /// Gradient of the last backward() loss with respect to node n. Empty if no
  /// gradient reached it.
  const Tensor& grad(Node n) const { return nodes_.at(n).grad; }

  Gradients backward(Node loss) {
    Gradients g = params_->zero_gradients();
    backward(loss, g);
    return g;
  }

  /// Accumulates d(loss)/d(param) into grads, which must be shaped like the
  /// store. Each node is visited once, in reverse recording order.
  void backward(Node loss, Gradients& grads) {
    if (nodes_.at(loss).value.size() != 1)
      throw DimensionError("backward: loss must be scalar, got " +
                           shape_string(nodes_[loss].value));
    if (grads.size() != params_->size()) throw DimensionError("backward: gradient store mismatch");
    for (auto& n : nodes_) n.grad = Tensor();
    nodes_[loss].grad = Tensor(nodes_[loss].value.shape(), 1.0);
    for (std::size_t i = loss + 1; i-- > 0;) {
      NodeData& n = nodes_[i];
      if (n.grad.empty()) continue;
      propagate(n, grads);
    }
  }

 private:
  enum class Op { input, param, linear, gru, concat, pick, add, sub, mul, square, sum };

  struct NodeData {
    Op op;
    Tensor value;
    std::vector<Node> inputs;
    Tensor grad;
    std::vector<Tensor> saved{};
    LinearLayer linear{};
    GruLayer gru{};
    Activation activation = Activation::identity;
    std::vector<int> columns{};
    double scale = 1.0;
    std::size_t param_index = 0;
  };

  Node push(Op op, Tensor value, std::vector<Node> inputs) {
    nodes_.push_back(NodeData{op, std::move(value), std::move(inputs), {}});
    return nodes_.size() - 1;
  }

  Node binary(Op op, Node a, Node b) {
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    if (av.rows() != bv.rows() || av.cols() != bv.cols())
      throw DimensionError("elementwise op: " + shape_string(av) + " vs " + shape_string(bv));
    Tensor y = Tensor::matrix(av.rows(), av.cols());
    for (std::size_t i = 0; i < y.size(); ++i) {
      switch (op) {
        case Op::add: y[i] = av[i] + bv[i]; break;
        case Op::sub: y[i] = av[i] - bv[i]; break;
        default: y[i] = av[i] * bv[i]; break;
      }
    }
    ensure_finite(y, "elementwise");
    return push(op, std::move(y), {a, b});
  }

  static void check_linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    if (w.rank() != 2 || x.cols() != w.cols() || b.size() != w.rows())
      throw DimensionError("linear: x " + shape_string(x) + ", W " + shape_string(w) + ", b " +
                           shape_string(b));
  }

  static void apply_activation(Tensor& y, Activation act) {
    switch (act) {
      case Activation::identity: break;
      case Activation::leaky_relu:
        for (double& v : y.values())
          if (v < 0) v *= kernels::kLeakySlope;
        break;
      case Activation::log_softmax:
        for (std::size_t b = 0; b < y.rows(); ++b) kernels::log_softmax_inplace(y.row(b));
        break;
      case Activation::sigmoid:
        for (double& v : y.values()) v = kernels::sigmoid(v);
        break;
      case Activation::tanh:
        for (double& v : y.values()) v = std::tanh(v);
        break;
    }
  }

  static void ensure_finite(const Tensor& t, const char* op) {
    if (!t.all_finite()) throw NonFiniteError(std::string(op) + ": non-finite value produced");
  }

  const Tensor& transposed(std::size_t weight) {
    auto it = transposed_.find(weight);
    if (it != transposed_.end()) return it->second;
    const Tensor& w = (*params_)[weight].value;
    Tensor t = Tensor::matrix(w.cols(), w.rows());
    kernels::transpose(w.data(), w.rows(), w.cols(), t.data());
    return transposed_.emplace(weight, std::move(t)).first->second;
  }

  Tensor& grad_of(Node n) {
    Tensor& g = nodes_[n].grad;
    if (g.empty()) g = Tensor(nodes_[n].value.shape(), 0.0);
    return g;
  }

  void propagate(NodeData& n, Gradients& grads) {
    switch (n.op) {
      case Op::input: break;
      case Op::param: {
        auto dst = grads[n.param_index].values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += n.grad[i];
        break;
      }
      case Op::linear: backward_linear(n, grads); break;
      case Op::gru: backward_gru(n, grads); break;
      case Op::concat: {
        const std::size_t width = n.value.cols();
        std::size_t offset = 0;
        for (Node p : n.inputs) {
          Tensor& g = grad_of(p);
          const std::size_t pw = g.cols();
          for (std::size_t b = 0; b < n.value.rows(); ++b)
            for (std::size_t j = 0; j < pw; ++j) g.at(b, j) += n.grad[b * width + offset + j];
          offset += pw;
        }
        break;
      }
      case Op::pick: {
        Tensor& g = grad_of(n.inputs[0]);
        for (std::size_t b = 0; b < n.columns.size(); ++b)
          g.at(b, static_cast<std::size_t>(n.columns[b])) += n.grad[b];
        break;
      }
      case Op::add:
      case Op::sub: {
        Tensor& ga = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += n.grad[i];
        Tensor& gb = grad_of(n.inputs[1]);
        const double sign = n.op == Op::add ? 1.0 : -1.0;
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += sign * n.grad[i];
        break;
      }
      case Op::mul: {
        const Tensor& av = nodes_[n.inputs[0]].value;
        const Tensor& bv = nodes_[n.inputs[1]].value;
        Tensor& ga = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += n.grad[i] * bv[i];
        Tensor& gb = grad_of(n.inputs[1]);
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += n.grad[i] * av[i];
        break;
      }
      case Op::square: {
        const Tensor& av = nodes_[n.inputs[0]].value;
        Tensor& ga = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += 2.0 * av[i] * n.grad[i];
        break;
      }
      case Op::sum: {
        Tensor& ga = grad_of(n.inputs[0]);
        const double g = n.grad[0] * n.scale;
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
        break;
      }
    }
  }

  void backward_linear(NodeData& n, Gradients& grads) {
    const Tensor& y = n.value;
    const std::size_t batch = y.rows(), out = y.cols();
    Tensor dpre = n.grad;
    switch (n.activation) {
      case Activation::identity: break;
      case Activation::leaky_relu:
        for (std::size_t i = 0; i < dpre.size(); ++i)
          if (y[i] < 0) dpre[i] *= kernels::kLeakySlope;
        break;
      case Activation::log_softmax:
        for (std::size_t b = 0; b < batch; ++b) {
          double s = 0.0;
          for (std::size_t j = 0; j < out; ++j) s += dpre.at(b, j);
          for (std::size_t j = 0; j < out; ++j) dpre.at(b, j) -= std::exp(y.at(b, j)) * s;
        }
        break;
      case Activation::sigmoid:
        for (std::size_t i = 0; i < dpre.size(); ++i) dpre[i] *= y[i] * (1.0 - y[i]);
        break;
      case Activation::tanh:
        for (std::size_t i = 0; i < dpre.size(); ++i) dpre[i] *= 1.0 - y[i] * y[i];
        break;
    }
    const Node x = n.inputs[0];
    const Tensor& xv = nodes_[x].value;
    const Tensor& w = (*params_)[n.linear.weight].value;
    const std::size_t in = w.cols();
    kernels::accumulate_outer(dpre.data(), xv.data(), batch, out, in,
                              grads[n.linear.weight].data());
    kernels::accumulate_rows(dpre.data(), batch, out, grads[n.linear.bias].data());
    Tensor& gx = grad_of(x);
    kernels::rows_times(dpre.data(), batch, out, w.data(), in, gx.data(), nullptr, true);
  }

  void backward_gru(NodeData& n, Gradients& grads) {
    const GruLayer& L = n.gru;
    const std::size_t H = L.hidden;
    const Node x = n.inputs[0], h = n.inputs[1];
    const Tensor& xv = nodes_[x].value;
    const Tensor& hv = nodes_[h].value;
    const Tensor& z = n.saved[0];
    const Tensor& r = n.saved[1];
    const Tensor& cand = n.saved[2];
    const Tensor& rh = n.saved[3];
    const std::size_t batch = xv.rows(), in = xv.cols();

    Tensor dgx = Tensor::matrix(batch, 3 * H);  // pre-activation grads [z | r | n]
    Tensor dh = Tensor::matrix(batch, H);
    Tensor dan = Tensor::matrix(batch, H);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t j = 0; j < H; ++j) {
        const double g = n.grad.at(b, j);
        const double zz = z.at(b, j), nn = cand.at(b, j);
        dh.at(b, j) = g * (1.0 - zz);
        dgx.at(b, j) = g * (nn - hv.at(b, j)) * zz * (1.0 - zz);
        const double a = g * zz * (1.0 - nn * nn);
        dan.at(b, j) = a;
        dgx.at(b, 2 * H + j) = a;
      }
    const Tensor& whn = (*params_)[L.wh_n].value;
    Tensor drh = Tensor::matrix(batch, H);
    kernels::rows_times(dan.data(), batch, H, whn.data(), H, drh.data(), nullptr, false);
    kernels::accumulate_outer(dan.data(), rh.data(), batch, H, H, grads[L.wh_n].data());
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t j = 0; j < H; ++j) {
        const double rr = r.at(b, j);
        dh.at(b, j) += drh.at(b, j) * rr;
        dgx.at(b, H + j) = drh.at(b, j) * hv.at(b, j) * rr * (1.0 - rr);
      }
    // Recurrent z/r path: the first 2H columns of dgx.
    Tensor dzr = Tensor::matrix(batch, 2 * H);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t j = 0; j < 2 * H; ++j) dzr.at(b, j) = dgx.at(b, j);
    const Tensor& whzr = (*params_)[L.wh_zr].value;
    kernels::rows_times(dzr.data(), batch, 2 * H, whzr.data(), H, dh.data(), nullptr, true);
    kernels::accumulate_outer(dzr.data(), hv.data(), batch, 2 * H, H, grads[L.wh_zr].data());

    const Tensor& wx = (*params_)[L.wx].value;
    kernels::accumulate_outer(dgx.data(), xv.data(), batch, 3 * H, in, grads[L.wx].data());
    kernels::accumulate_rows(dgx.data(), batch, 3 * H, grads[L.bias].data());
    Tensor& gx = grad_of(x);
    kernels::rows_times(dgx.data(), batch, 3 * H, wx.data(), in, gx.data(), nullptr, true);
    Tensor& gh = grad_of(h);
    for (std::size_t i = 0; i < gh.size(); ++i) gh[i] += dh[i];
  }

  const ParamStore* params_;
  std::vector<NodeData> nodes_;
  std::unordered_map<std::size_t, Tensor> transposed_;
};

}  // namespace msgfn
