#include "ddnet/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "ddnet/errors.hpp"

namespace ddnet {

const Tensor& Var::value() const { return tape_->value(*this); }
const Tensor& Var::grad() const { return tape_->grad(*this); }
bool Var::requires_grad() const { return tape_->requires_grad(*this); }

void Tape::check_owner(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) throw ContractError("variable does not belong to this tape");
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), Tensor{}, requires_grad, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> inputs, Backprop backprop) {
  bool needs = false;
  for (Var in : inputs) {
    check_owner(in);
    needs = needs || nodes_[in.id_].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Tensor{}, needs, needs ? std::move(backprop) : Backprop{}});
  return Var(this, nodes_.size() - 1);
}

void Tape::ensure_grad(Node& node) {
  if (node.grad.empty()) node.grad = Tensor(node.value.shape());
}

const Tensor& Tape::grad(Var v) {
  check_owner(v);
  ensure_grad(nodes_[v.id_]);
  return nodes_[v.id_].grad;
}

std::span<double> Tape::grad_buffer(Var v) {
  check_owner(v);
  Node& node = nodes_[v.id_];
  ensure_grad(node);
  return node.grad.data();
}

void Tape::accumulate(Var v, std::span<const double> g) {
  Node& node = nodes_[v.id_];
  if (!node.requires_grad) return;
  ensure_grad(node);
  auto dst = node.grad.data();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

void Tape::zero_grad() {
  for (Node& node : nodes_)
    if (!node.grad.empty()) node.grad.fill(0.0);
}

void Tape::truncate(std::size_t size) {
  if (size < nodes_.size()) nodes_.erase(nodes_.begin() + static_cast<long>(size), nodes_.end());
}

void Tape::backward(Var loss) {
  check_owner(loss);
  if (value(loss).size() != 1)
    throw ContractError("backward needs a scalar loss, got shape " + shape_string(value(loss).shape()));
  // Interior gradients are per-pass; only leaves accumulate across calls.
  for (Node& node : nodes_)
    if (node.backprop && !node.grad.empty()) node.grad.fill(0.0);
  Node& root = nodes_[loss.id_];
  if (!root.requires_grad) return;
  ensure_grad(root);
  root.grad[0] += 1.0;
  for (std::size_t id = loss.id_ + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.backprop || node.grad.empty()) continue;
    // Backprop only writes into earlier nodes, never resizes nodes_.
    node.backprop(*this, node.grad);
  }
}

namespace {

Tape& same_tape(std::initializer_list<Var> vars) {
  Tape* tape = vars.begin()->tape();
  for (Var v : vars)
    if (v.tape() != tape || tape == nullptr) throw ContractError("op inputs live on different tapes");
  return *tape;
}

[[noreturn]] void dim_error(const std::string& op, const std::string& detail) {
  throw DimensionError(op + ": " + detail);
}

void require_rank(const std::string& op, const char* name, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank)
    dim_error(op, std::string(name) + " must have rank " + std::to_string(rank) + ", got " +
                      shape_string(t.shape()));
}

void require_same_shape(const std::string& op, const Tensor& a, const Tensor& b) {
  if (a.rank() != b.rank()) dim_error(op, "rank mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  for (std::size_t axis = 0; axis < a.rank(); ++axis)
    if (a.dim(axis) != b.dim(axis))
      dim_error(op, "axis " + std::to_string(axis) + " differs: " + std::to_string(a.dim(axis)) + " vs " +
                        std::to_string(b.dim(axis)));
}

}  // namespace

Var conv2d(Var input, Var weight, Var bias, std::size_t padding) {
  Tape& tape = same_tape({input, weight, bias});
  const Tensor& x = input.value();
  const Tensor& w = weight.value();
  const Tensor& b = bias.value();
  const std::string op = "conv2d";
  require_rank(op, "input", x, 3);
  require_rank(op, "weight", w, 4);
  require_rank(op, "bias", b, 1);
  const std::size_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t cout = w.dim(0), k = w.dim(2);
  if (w.dim(1) != cin)
    dim_error(op, "weight axis 1 (input channels) is " + std::to_string(w.dim(1)) + " but input axis 0 is " +
                      std::to_string(cin));
  if (w.dim(3) != k) dim_error(op, "weight axes 2 and 3 must be equal (square kernel)");
  if (b.dim(0) != cout)
    dim_error(op, "bias axis 0 is " + std::to_string(b.dim(0)) + " but weight axis 0 (output channels) is " +
                      std::to_string(cout));
  if (h + 2 * padding < k || wd + 2 * padding < k) dim_error(op, "kernel larger than padded input on axis 1/2");
  const std::size_t ho = h + 2 * padding - k + 1, wo = wd + 2 * padding - k + 1;
  const auto pad = static_cast<long>(padding);

  // For output coordinate o and kernel tap t the input coordinate is o + t - pad.
  auto out_range = [pad](std::size_t t, std::size_t in_size, std::size_t out_size) {
    const long shift = static_cast<long>(t) - pad;
    const long lo = std::max<long>(0, -shift);
    const long hi = std::min<long>(static_cast<long>(out_size), static_cast<long>(in_size) - shift);
    return std::pair<long, long>{lo, std::max(lo, hi)};
  };

  Tensor out({cout, ho, wo});
  for (std::size_t co = 0; co < cout; ++co) {
    double* o = &out.at(co, 0, 0);
    std::fill(o, o + ho * wo, b[co]);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* xi = &x.at(ci, 0, 0);
      for (std::size_t ki = 0; ki < k; ++ki) {
        const auto [ylo, yhi] = out_range(ki, h, ho);
        for (std::size_t kj = 0; kj < k; ++kj) {
          const double wv = w[((co * cin + ci) * k + ki) * k + kj];
          const auto [xlo, xhi] = out_range(kj, wd, wo);
          const long dy = static_cast<long>(ki) - pad, dx = static_cast<long>(kj) - pad;
          for (long y = ylo; y < yhi; ++y) {
            const double* row = xi + (y + dy) * static_cast<long>(wd) + dx;
            double* orow = o + y * static_cast<long>(wo);
            for (long xx = xlo; xx < xhi; ++xx) orow[xx] += wv * row[xx];
          }
        }
      }
    }
  }

  const Var inputs[] = {input, weight, bias};
  return tape.record(std::move(out), inputs, [=](Tape& t, const Tensor& g) {
    const Tensor& xv = t.value(input);
    const Tensor& wv = t.value(weight);
    if (t.requires_grad(bias)) {
      auto gb = t.grad_buffer(bias);
      for (std::size_t co = 0; co < cout; ++co) {
        const double* go = &g.at(co, 0, 0);
        double s = 0.0;
        for (std::size_t i = 0; i < ho * wo; ++i) s += go[i];
        gb[co] += s;
      }
    }
    const bool want_w = t.requires_grad(weight), want_x = t.requires_grad(input);
    if (!want_w && !want_x) return;
    std::span<double> gw = want_w ? t.grad_buffer(weight) : std::span<double>{};
    std::span<double> gx = want_x ? t.grad_buffer(input) : std::span<double>{};
    for (std::size_t co = 0; co < cout; ++co) {
      const double* go = &g.at(co, 0, 0);
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* xi = &xv.at(ci, 0, 0);
        const std::size_t xoff = ci * h * wd;
        for (std::size_t ki = 0; ki < k; ++ki) {
          const auto [ylo, yhi] = out_range(ki, h, ho);
          for (std::size_t kj = 0; kj < k; ++kj) {
            const std::size_t widx = ((co * cin + ci) * k + ki) * k + kj;
            const auto [xlo, xhi] = out_range(kj, wd, wo);
            const long dy = static_cast<long>(ki) - pad, dx = static_cast<long>(kj) - pad;
            double acc = 0.0;
            const double wval = wv[widx];
            for (long y = ylo; y < yhi; ++y) {
              const long in_row = (y + dy) * static_cast<long>(wd) + dx;
              const double* grow = go + y * static_cast<long>(wo);
              for (long xx = xlo; xx < xhi; ++xx) {
                acc += grow[xx] * xi[in_row + xx];
                if (want_x) gx[xoff + in_row + xx] += grow[xx] * wval;
              }
            }
            if (want_w) gw[widx] += acc;
          }
        }
      }
    }
  });
}

Var linear(Var input, Var weight, Var bias) {
  Tape& tape = same_tape({input, weight, bias});
  const Tensor& x = input.value();
  const Tensor& w = weight.value();
  const Tensor& b = bias.value();
  const std::string op = "linear";
  require_rank(op, "input", x, 1);
  require_rank(op, "weight", w, 2);
  require_rank(op, "bias", b, 1);
  const std::size_t m = w.dim(0), n = w.dim(1);
  if (x.dim(0) != n)
    dim_error(op, "weight axis 1 is " + std::to_string(n) + " but input axis 0 is " + std::to_string(x.dim(0)));
  if (b.dim(0) != m)
    dim_error(op, "bias axis 0 is " + std::to_string(b.dim(0)) + " but weight axis 0 is " + std::to_string(m));

  Tensor out({m});
  for (std::size_t j = 0; j < m; ++j) {
    const double* row = &w[j * n];
    double s = b[j];
    for (std::size_t i = 0; i < n; ++i) s += row[i] * x[i];
    out[j] = s;
  }
  const Var inputs[] = {input, weight, bias};
  return tape.record(std::move(out), inputs, [=](Tape& t, const Tensor& g) {
    t.accumulate(bias, g.data());
    const Tensor& xv = t.value(input);
    const Tensor& wv = t.value(weight);
    if (t.requires_grad(weight)) {
      auto gw = t.grad_buffer(weight);
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i) gw[j * n + i] += g[j] * xv[i];
    }
    if (t.requires_grad(input)) {
      auto gx = t.grad_buffer(input);
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i) gx[i] += g[j] * wv[j * n + i];
    }
  });
}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var sigmoid(Var x) {
  Tape& tape = *x.tape();
  Tensor out = x.value();
  for (double& v : out.data()) v = stable_sigmoid(v);
  const Var inputs[] = {x};
  return tape.record(std::move(out), inputs, [x](Tape& t, const Tensor& g) {
    const Tensor& xv = t.value(x);
    std::vector<double> gx(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = stable_sigmoid(xv[i]);
      gx[i] = g[i] * y * (1.0 - y);
    }
    t.accumulate(x, gx);
  });
}

Var relu(Var x) {
  Tape& tape = *x.tape();
  Tensor out = x.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  const Var inputs[] = {x};
  return tape.record(std::move(out), inputs, [x](Tape& t, const Tensor& g) {
    const Tensor& xv = t.value(x);
    std::vector<double> gx(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] = xv[i] > 0.0 ? g[i] : 0.0;
    t.accumulate(x, gx);
  });
}

Var add(Var a, Var b) {
  Tape& tape = same_tape({a, b});
  require_same_shape("add", a.value(), b.value());
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const Var inputs[] = {a, b};
  return tape.record(std::move(out), inputs, [a, b](Tape& t, const Tensor& g) {
    t.accumulate(a, g.data());
    t.accumulate(b, g.data());
  });
}

Var mul(Var a, Var b) {
  Tape& tape = same_tape({a, b});
  require_same_shape("mul", a.value(), b.value());
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const Var inputs[] = {a, b};
  return tape.record(std::move(out), inputs, [a, b](Tape& t, const Tensor& g) {
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    std::vector<double> tmp(g.size());
    if (t.requires_grad(a)) {
      for (std::size_t i = 0; i < g.size(); ++i) tmp[i] = g[i] * bv[i];
      t.accumulate(a, tmp);
    }
    if (t.requires_grad(b)) {
      for (std::size_t i = 0; i < g.size(); ++i) tmp[i] = g[i] * av[i];
      t.accumulate(b, tmp);
    }
  });
}

Var scale(Var x, double factor) {
  Tape& tape = *x.tape();
  Tensor out = x.value();
  for (double& v : out.data()) v *= factor;
  const Var inputs[] = {x};
  return tape.record(std::move(out), inputs, [x, factor](Tape& t, const Tensor& g) {
    std::vector<double> gx(g.values());
    for (double& v : gx) v *= factor;
    t.accumulate(x, gx);
  });
}

Var slice_channels(Var x, std::size_t begin, std::size_t count) {
  Tape& tape = *x.tape();
  const Tensor& xv = x.value();
  require_rank("slice_channels", "input", xv, 3);
  if (count == 0 || begin + count > xv.dim(0))
    dim_error("slice_channels", "channel range [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                                    ") exceeds axis 0 of size " + std::to_string(xv.dim(0)));
  const std::size_t plane = xv.dim(1) * xv.dim(2);
  const auto first = xv.values().begin() + static_cast<long>(begin * plane);
  Tensor out({count, xv.dim(1), xv.dim(2)}, std::vector<double>(first, first + static_cast<long>(count * plane)));
  const Var inputs[] = {x};
  return tape.record(std::move(out), inputs, [x, begin, plane](Tape& t, const Tensor& g) {
    auto gx = t.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[begin * plane + i] += g[i];
  });
}

Var flatten(Var x) {
  Tape& tape = *x.tape();
  Tensor out = x.value().reshaped({x.value().size()});
  const Var inputs[] = {x};
  return tape.record(std::move(out), inputs, [x](Tape& t, const Tensor& g) { t.accumulate(x, g.data()); });
}

Var concat(Var a, Var b) {
  Tape& tape = same_tape({a, b});
  require_rank("concat", "first input", a.value(), 1);
  require_rank("concat", "second input", b.value(), 1);
  std::vector<double> data(a.value().values());
  data.insert(data.end(), b.value().values().begin(), b.value().values().end());
  const std::size_t na = a.value().size();
  const std::size_t total = data.size();
  Tensor out({total}, std::move(data));
  const Var inputs[] = {a, b};
  return tape.record(std::move(out), inputs, [a, b, na](Tape& t, const Tensor& g) {
    t.accumulate(a, g.data().subspan(0, na));
    t.accumulate(b, g.data().subspan(na));
  });
}

Var sum(std::span<const Var> terms) {
  if (terms.empty()) throw ContractError("sum of zero terms");
  Tape& tape = *terms.front().tape();
  Tensor out = terms.front().value();
  for (std::size_t k = 1; k < terms.size(); ++k) {
    require_same_shape("sum", out, terms[k].value());
    const Tensor& v = terms[k].value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  }
  std::vector<Var> kept(terms.begin(), terms.end());
  return tape.record(std::move(out), terms, [kept](Tape& t, const Tensor& g) {
    for (Var v : kept) t.accumulate(v, g.data());
  });
}

std::vector<double> softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (p[i] = std::exp(logits[i] - mx));
  for (double& v : p) v /= z;
  return p;
}

Var softmax_cross_entropy(Var logits, std::size_t label) {
  Tape& tape = *logits.tape();
  const Tensor& z = logits.value();
  require_rank("softmax_cross_entropy", "logits", z, 1);
  if (z.dim(0) != 2) dim_error("softmax_cross_entropy", "logits axis 0 must be 2, got " + std::to_string(z.dim(0)));
  if (label >= 2) throw ContractError("softmax_cross_entropy: label " + std::to_string(label) + " out of range {0,1}");
  const double mx = std::max(z[0], z[1]);
  const double lse = mx + std::log(std::exp(z[0] - mx) + std::exp(z[1] - mx));
  Tensor out({1}, std::vector<double>{lse - z[label]});
  const Var inputs[] = {logits};
  return tape.record(std::move(out), inputs, [logits, label](Tape& t, const Tensor& g) {
    std::vector<double> p = softmax(t.value(logits).data());
    p[label] -= 1.0;
    for (double& v : p) v *= g[0];
    t.accumulate(logits, p);
  });
}

}  // namespace ddnet
