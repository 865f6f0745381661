#include "jointgen/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "jointgen/errors.hpp"

namespace jointgen {

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, false, {}});
  return Var{this, nodes_.size() - 1};
}

Var Tape::parameter(Parameter& param) {
  for (const auto& [p, id] : param_nodes_) {
    if (p == &param) {
      return Var{this, id};
    }
  }
  nodes_.push_back(Node{{}, {}, &param, true, {}});
  param_nodes_.emplace_back(&param, nodes_.size() - 1);
  return Var{this, nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
  const Node& n = nodes_[v.id];
  return n.param != nullptr ? n.param->value : n.value;
}

Tensor& Tape::grad(Var v) {
  Node& n = nodes_[v.id];
  if (n.param != nullptr) {
    return n.param->gradient;
  }
  if (n.grad.empty()) {
    n.grad = Tensor(n.value.shape());
  }
  return n.grad;
}

Var Tape::record(Tensor value, bool requires_grad,
                 std::function<void()> backward) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, requires_grad,
                        requires_grad ? std::move(backward) : nullptr});
  return Var{this, nodes_.size() - 1};
}

std::size_t Tape::backward(Var loss) {
  if (loss.tape != this || loss.id >= nodes_.size()) {
    throw ContractError("backward: loss was not recorded on this tape");
  }
  if (value(loss).size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        shape_to_string(value(loss).shape()));
  }
  for (Node& n : nodes_) {
    if (n.param == nullptr) {
      n.grad = Tensor();
    }
  }
  if (!nodes_[loss.id].requires_grad) {
    return 0;
  }
  grad(loss)[0] += 1.0;
  std::size_t visited = 0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.empty()) {
      continue;
    }
    n.backward();
    ++visited;
  }
  return visited;
}

namespace ad {
namespace {

Tape& same_tape(Var a, Var b) {
  if (a.tape != b.tape || a.tape == nullptr) {
    throw ContractError("operands recorded on different tapes");
  }
  return *a.tape;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(fmt::format("{}: shapes {} and {} differ", op,
                                     shape_to_string(a.shape()),
                                     shape_to_string(b.shape())));
  }
}

void require_vector(const char* op, const Tensor& a) {
  if (a.rank() != 1) {
    throw DimensionError(fmt::format("{}: expected a vector, got {}", op,
                                     shape_to_string(a.shape())));
  }
}

void require_matrix(const char* op, const Tensor& a) {
  if (a.rank() != 2) {
    throw DimensionError(fmt::format("{}: expected a matrix, got {}", op,
                                     shape_to_string(a.shape())));
  }
}

void accumulate(Tensor& into, const Tensor& from) {
  auto dst = into.values();
  auto src = from.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] += src[i];
  }
}

// Id the next recorded node will receive.
Var next_var(Tape& tape) { return Var{&tape, tape.size()}; }

template <class Forward, class Derivative>
Var unary(Var a, Forward forward, Derivative derivative) {
  Tape& tape = *a.tape;
  const Tensor& x = tape.value(a);
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = forward(x[i]);
  }
  const Var out = next_var(tape);
  return tape.record(std::move(y), tape.requires_grad(a), [&tape, a, out, derivative] {
    const Tensor& x = tape.value(a);
    const Tensor& y = tape.value(out);
    const Tensor& g = tape.grad(out);
    Tensor& ga = tape.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * derivative(x[i], y[i]);
    }
  });
}

}  // namespace

Var add(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& x = tape.value(a);
  const Tensor& y = tape.value(b);
  require_same_shape("add", x, y);
  Tensor z = x;
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] += y[i];
  }
  const Var out = next_var(tape);
  return tape.record(std::move(z), tape.requires_grad(a) || tape.requires_grad(b),
                     [&tape, a, b, out] {
                       const Tensor& g = tape.grad(out);
                       if (tape.requires_grad(a)) accumulate(tape.grad(a), g);
                       if (tape.requires_grad(b)) accumulate(tape.grad(b), g);
                     });
}

Var sub(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& x = tape.value(a);
  const Tensor& y = tape.value(b);
  require_same_shape("sub", x, y);
  Tensor z = x;
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] -= y[i];
  }
  const Var out = next_var(tape);
  return tape.record(std::move(z), tape.requires_grad(a) || tape.requires_grad(b),
                     [&tape, a, b, out] {
                       const Tensor& g = tape.grad(out);
                       if (tape.requires_grad(a)) accumulate(tape.grad(a), g);
                       if (tape.requires_grad(b)) {
                         Tensor& gb = tape.grad(b);
                         for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                       }
                     });
}

Var mul(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& x = tape.value(a);
  const Tensor& y = tape.value(b);
  require_same_shape("mul", x, y);
  Tensor z = x;
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] *= y[i];
  }
  const Var out = next_var(tape);
  return tape.record(std::move(z), tape.requires_grad(a) || tape.requires_grad(b),
                     [&tape, a, b, out] {
                       const Tensor& g = tape.grad(out);
                       if (tape.requires_grad(a)) {
                         const Tensor& y = tape.value(b);
                         Tensor& ga = tape.grad(a);
                         for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
                       }
                       if (tape.requires_grad(b)) {
                         const Tensor& x = tape.value(a);
                         Tensor& gb = tape.grad(b);
                         for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * x[i];
                       }
                     });
}

Var scale(Var a, Real factor) {
  return unary(
      a, [factor](Real x) { return factor * x; },
      [factor](Real, Real) { return factor; });
}

Var one_minus(Var a) {
  return unary(
      a, [](Real x) { return 1.0 - x; }, [](Real, Real) { return -1.0; });
}

Var mul_constant(Var a, const Tensor& factor) {
  Tape& tape = *a.tape;
  const Tensor& x = tape.value(a);
  require_same_shape("mul_constant", x, factor);
  Tensor z = x;
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] *= factor[i];
  }
  const Var out = next_var(tape);
  return tape.record(std::move(z), tape.requires_grad(a), [&tape, a, out, factor] {
    const Tensor& g = tape.grad(out);
    Tensor& ga = tape.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor[i];
  });
}

Var scale_by(Var a, Var s) {
  Tape& tape = same_tape(a, s);
  const Tensor& x = tape.value(a);
  if (tape.value(s).size() != 1) {
    throw DimensionError("scale_by: factor must be scalar, got " +
                         shape_to_string(tape.value(s).shape()));
  }
  const Real factor = tape.value(s)[0];
  Tensor z = x;
  for (Real& v : z.values()) {
    v *= factor;
  }
  const Var out = next_var(tape);
  return tape.record(std::move(z), tape.requires_grad(a) || tape.requires_grad(s),
                     [&tape, a, s, out] {
                       const Tensor& g = tape.grad(out);
                       if (tape.requires_grad(a)) {
                         const Real factor = tape.value(s)[0];
                         Tensor& ga = tape.grad(a);
                         for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
                       }
                       if (tape.requires_grad(s)) {
                         const Tensor& x = tape.value(a);
                         Real acc = 0.0;
                         for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * x[i];
                         tape.grad(s)[0] += acc;
                       }
                     });
}

Var matmul(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& x = tape.value(a);
  const Tensor& y = tape.value(b);
  require_matrix("matmul", x);
  require_matrix("matmul", y);
  const std::size_t m = x.rows(), k = x.cols(), n = y.cols();
  if (y.rows() != k) {
    throw DimensionError(fmt::format("matmul: inner extents differ for {} and {}",
                                     shape_to_string(x.shape()),
                                     shape_to_string(y.shape())));
  }
  Tensor z({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const Real xv = x.at(i, p);
      for (std::size_t j = 0; j < n; ++j) {
        z.at(i, j) += xv * y.at(p, j);
      }
    }
  }
  const Var out = next_var(tape);
  return tape.record(std::move(z), tape.requires_grad(a) || tape.requires_grad(b),
                     [&tape, a, b, out, m, k, n] {
                       const Tensor& g = tape.grad(out);
                       const Tensor& x = tape.value(a);
                       const Tensor& y = tape.value(b);
                       if (tape.requires_grad(a)) {
                         Tensor& ga = tape.grad(a);
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t p = 0; p < k; ++p) {
                             Real acc = 0.0;
                             for (std::size_t j = 0; j < n; ++j) acc += g.at(i, j) * y.at(p, j);
                             ga.at(i, p) += acc;
                           }
                       }
                       if (tape.requires_grad(b)) {
                         Tensor& gb = tape.grad(b);
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t p = 0; p < k; ++p) {
                             const Real xv = x.at(i, p);
                             for (std::size_t j = 0; j < n; ++j) gb.at(p, j) += xv * g.at(i, j);
                           }
                       }
                     });
}

Var matmul_nt(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& x = tape.value(a);
  const Tensor& y = tape.value(b);
  require_matrix("matmul_nt", x);
  require_matrix("matmul_nt", y);
  const std::size_t m = x.rows(), k = x.cols(), n = y.rows();
  if (y.cols() != k) {
    throw DimensionError(fmt::format("matmul_nt: inner extents differ for {} and {}^T",
                                     shape_to_string(x.shape()),
                                     shape_to_string(y.shape())));
  }
  Tensor z({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    const auto xr = x.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const auto yr = y.row(j);
      Real acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += xr[p] * yr[p];
      z.at(i, j) = acc;
    }
  }
  const Var out = next_var(tape);
  return tape.record(std::move(z), tape.requires_grad(a) || tape.requires_grad(b),
                     [&tape, a, b, out, m, k, n] {
                       const Tensor& g = tape.grad(out);
                       const Tensor& x = tape.value(a);
                       const Tensor& y = tape.value(b);
                       if (tape.requires_grad(a)) {
                         Tensor& ga = tape.grad(a);
                         for (std::size_t i = 0; i < m; ++i) {
                           auto gr = ga.row(i);
                           for (std::size_t j = 0; j < n; ++j) {
                             const Real gv = g.at(i, j);
                             const auto yr = y.row(j);
                             for (std::size_t p = 0; p < k; ++p) gr[p] += gv * yr[p];
                           }
                         }
                       }
                       if (tape.requires_grad(b)) {
                         Tensor& gb = tape.grad(b);
                         for (std::size_t i = 0; i < m; ++i) {
                           const auto xr = x.row(i);
                           for (std::size_t j = 0; j < n; ++j) {
                             const Real gv = g.at(i, j);
                             auto gr = gb.row(j);
                             for (std::size_t p = 0; p < k; ++p) gr[p] += gv * xr[p];
                           }
                         }
                       }
                     });
}

Var affine(Var weight, Var x, std::optional<Var> bias) {
  Tape& tape = same_tape(weight, x);
  const Tensor& w = tape.value(weight);
  const Tensor& in = tape.value(x);
  require_matrix("affine", w);
  require_vector("affine", in);
  const std::size_t m = w.rows(), n = w.cols();
  if (in.size() != n) {
    throw DimensionError(fmt::format("affine: weight {} cannot take input {}",
                                     shape_to_string(w.shape()),
                                     shape_to_string(in.shape())));
  }
  Tensor z({m});
  if (bias) {
    same_tape(weight, *bias);
    const Tensor& b = tape.value(*bias);
    if (b.shape() != Shape{m}) {
      throw DimensionError(fmt::format("affine: bias {} does not match weight {}",
                                       shape_to_string(b.shape()),
                                       shape_to_string(w.shape())));
    }
    std::copy(b.values().begin(), b.values().end(), z.values().begin());
  }
  const Real* wp = w.values().data();
  const Real* xp = in.values().data();
  for (std::size_t i = 0; i < m; ++i) {
    Real acc = 0.0;
    const Real* wr = wp + i * n;
    for (std::size_t j = 0; j < n; ++j) acc += wr[j] * xp[j];
    z[i] += acc;
  }
  const bool needs = tape.requires_grad(weight) || tape.requires_grad(x) ||
                     (bias && tape.requires_grad(*bias));
  const Var out = next_var(tape);
  return tape.record(std::move(z), needs, [&tape, weight, x, bias, out, m, n] {
    const Tensor& g = tape.grad(out);
    if (tape.requires_grad(weight)) {
      const Tensor& in = tape.value(x);
      Real* gw = tape.grad(weight).values().data();
      for (std::size_t i = 0; i < m; ++i) {
        const Real gi = g[i];
        if (gi == 0.0) continue;
        Real* row = gw + i * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += gi * in[j];
      }
    }
    if (tape.requires_grad(x)) {
      const Real* wp = tape.value(weight).values().data();
      Real* gx = tape.grad(x).values().data();
      for (std::size_t i = 0; i < m; ++i) {
        const Real gi = g[i];
        if (gi == 0.0) continue;
        const Real* row = wp + i * n;
        for (std::size_t j = 0; j < n; ++j) gx[j] += gi * row[j];
      }
    }
    if (bias && tape.requires_grad(*bias)) {
      accumulate(tape.grad(*bias), g);
    }
  });
}

Var vecmat(Var v, Var x) {
  Tape& tape = same_tape(v, x);
  const Tensor& a = tape.value(v);
  const Tensor& m = tape.value(x);
  require_vector("vecmat", a);
  require_matrix("vecmat", m);
  const std::size_t n = m.rows(), d = m.cols();
  if (a.size() != n) {
    throw DimensionError(fmt::format("vecmat: weights {} do not match rows of {}",
                                     shape_to_string(a.shape()),
                                     shape_to_string(m.shape())));
  }
  Tensor z({d});
  for (std::size_t i = 0; i < n; ++i) {
    const Real ai = a[i];
    const auto r = m.row(i);
    for (std::size_t j = 0; j < d; ++j) z[j] += ai * r[j];
  }
  const Var out = next_var(tape);
  return tape.record(std::move(z), tape.requires_grad(v) || tape.requires_grad(x),
                     [&tape, v, x, out, n, d] {
                       const Tensor& g = tape.grad(out);
                       if (tape.requires_grad(v)) {
                         const Tensor& m = tape.value(x);
                         Tensor& gv = tape.grad(v);
                         for (std::size_t i = 0; i < n; ++i) {
                           const auto r = m.row(i);
                           Real acc = 0.0;
                           for (std::size_t j = 0; j < d; ++j) acc += g[j] * r[j];
                           gv[i] += acc;
                         }
                       }
                       if (tape.requires_grad(x)) {
                         const Tensor& a = tape.value(v);
                         Tensor& gm = tape.grad(x);
                         for (std::size_t i = 0; i < n; ++i) {
                           auto r = gm.row(i);
                           for (std::size_t j = 0; j < d; ++j) r[j] += a[i] * g[j];
                         }
                       }
                     });
}

Var tanh(Var a) {
  return unary(
      a, [](Real x) { return std::tanh(x); },
      [](Real, Real y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      a,
      [](Real x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const Real e = std::exp(x);
        return e / (1.0 + e);
      },
      [](Real, Real y) { return y * (1.0 - y); });
}

Var log(Var a, Real floor) {
  return unary(
      a, [floor](Real x) { return std::log(std::max(x, floor)); },
      [floor](Real x, Real) { return x > floor ? 1.0 / x : 0.0; });
}

Var softmax(Var a, std::span<const unsigned char> mask) {
  Tape& tape = *a.tape;
  const Tensor& x = tape.value(a);
  require_vector("softmax", x);
  const std::size_t n = x.size();
  if (!mask.empty() && mask.size() != n) {
    throw DimensionError(fmt::format("softmax: mask of length {} for {} logits",
                                     mask.size(), n));
  }
  auto open = [&](std::size_t i) { return mask.empty() || mask[i] != 0; };
  Real peak = -std::numeric_limits<Real>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (open(i)) {
      peak = std::max(peak, x[i]);
      any = true;
    }
  }
  if (!any) {
    throw InvalidMaskError("softmax: every position is masked");
  }
  Tensor y({n});
  Real total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (open(i)) {
      y[i] = std::exp(x[i] - peak);
      total += y[i];
    }
  }
  for (Real& v : y.values()) {
    v /= total;
  }
  const Var out = next_var(tape);
  return tape.record(std::move(y), tape.requires_grad(a), [&tape, a, out] {
    const Tensor& y = tape.value(out);
    const Tensor& g = tape.grad(out);
    Real inner = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) inner += g[i] * y[i];
    Tensor& ga = tape.grad(a);
    for (std::size_t i = 0; i < y.size(); ++i) ga[i] += y[i] * (g[i] - inner);
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) {
    throw ContractError("concat: no inputs");
  }
  Tape& tape = *parts.front().tape;
  std::size_t total = 0;
  bool needs = false;
  for (Var p : parts) {
    same_tape(parts.front(), p);
    require_vector("concat", tape.value(p));
    total += tape.value(p).size();
    needs = needs || tape.requires_grad(p);
  }
  Tensor z({total});
  std::size_t offset = 0;
  for (Var p : parts) {
    const auto v = tape.value(p).values();
    std::copy(v.begin(), v.end(), z.values().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += v.size();
  }
  const Var out = next_var(tape);
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape.record(std::move(z), needs, [&tape, inputs, out] {
    const Tensor& g = tape.grad(out);
    std::size_t offset = 0;
    for (Var p : inputs) {
      const std::size_t n = tape.value(p).size();
      if (tape.requires_grad(p)) {
        Tensor& gp = tape.grad(p);
        for (std::size_t i = 0; i < n; ++i) gp[i] += g[offset + i];
      }
      offset += n;
    }
  });
}

Var concat(std::initializer_list<Var> parts) {
  return concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var slice(Var a, std::size_t offset, std::size_t length) {
  Tape& tape = *a.tape;
  const Tensor& x = tape.value(a);
  require_vector("slice", x);
  if (offset + length > x.size() || length == 0) {
    throw DimensionError(fmt::format("slice [{}, {}) out of range for {}", offset,
                                     offset + length, shape_to_string(x.shape())));
  }
  Tensor z({length});
  std::copy_n(x.values().begin() + static_cast<std::ptrdiff_t>(offset), length,
              z.values().begin());
  const Var out = next_var(tape);
  return tape.record(std::move(z), tape.requires_grad(a), [&tape, a, out, offset] {
    const Tensor& g = tape.grad(out);
    Tensor& ga = tape.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[offset + i] += g[i];
  });
}

Var stack(std::span<const Var> rows) {
  if (rows.empty()) {
    throw ContractError("stack: no rows");
  }
  Tape& tape = *rows.front().tape;
  const std::size_t d = tape.value(rows.front()).size();
  bool needs = false;
  for (Var r : rows) {
    same_tape(rows.front(), r);
    require_vector("stack", tape.value(r));
    if (tape.value(r).size() != d) {
      throw DimensionError(fmt::format("stack: row of length {} among rows of length {}",
                                       tape.value(r).size(), d));
    }
    needs = needs || tape.requires_grad(r);
  }
  Tensor z({rows.size(), d});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto v = tape.value(rows[i]).values();
    std::copy(v.begin(), v.end(), z.row(i).begin());
  }
  const Var out = next_var(tape);
  std::vector<Var> inputs(rows.begin(), rows.end());
  return tape.record(std::move(z), needs, [&tape, inputs, out] {
    const Tensor& g = tape.grad(out);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (!tape.requires_grad(inputs[i])) continue;
      Tensor& gr = tape.grad(inputs[i]);
      const auto src = g.row(i);
      for (std::size_t j = 0; j < src.size(); ++j) gr[j] += src[j];
    }
  });
}

Var row(Var matrix, std::size_t r) {
  Tape& tape = *matrix.tape;
  const Tensor& m = tape.value(matrix);
  require_matrix("row", m);
  if (r >= m.rows()) {
    throw DimensionError(fmt::format("row {} out of range for {}", r,
                                     shape_to_string(m.shape())));
  }
  const auto src = m.row(r);
  Tensor z({m.cols()}, std::vector<Real>(src.begin(), src.end()));
  const Var out = next_var(tape);
  return tape.record(std::move(z), tape.requires_grad(matrix), [&tape, matrix, out, r] {
    const Tensor& g = tape.grad(out);
    auto dst = tape.grad(matrix).row(r);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += g[j];
  });
}

Var gather_row(Var table, std::size_t index) {
  const Tensor& m = table.tape->value(table);
  require_matrix("gather_row", m);
  if (index >= m.rows()) {
    throw VocabularyError(fmt::format("id {} outside table of {} rows", index, m.rows()));
  }
  return row(table, index);
}

Var dot(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& x = tape.value(a);
  const Tensor& y = tape.value(b);
  require_same_shape("dot", x, y);
  Real acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  const Var out = next_var(tape);
  return tape.record(Tensor::scalar(acc), tape.requires_grad(a) || tape.requires_grad(b),
                     [&tape, a, b, out] {
                       const Real g = tape.grad(out)[0];
                       if (tape.requires_grad(a)) {
                         const Tensor& y = tape.value(b);
                         Tensor& ga = tape.grad(a);
                         for (std::size_t i = 0; i < y.size(); ++i) ga[i] += g * y[i];
                       }
                       if (tape.requires_grad(b)) {
                         const Tensor& x = tape.value(a);
                         Tensor& gb = tape.grad(b);
                         for (std::size_t i = 0; i < x.size(); ++i) gb[i] += g * x[i];
                       }
                     });
}

Var sum(Var a) {
  Tape& tape = *a.tape;
  Real acc = 0.0;
  for (Real v : tape.value(a).values()) acc += v;
  const Var out = next_var(tape);
  return tape.record(Tensor::scalar(acc), tape.requires_grad(a), [&tape, a, out] {
    const Real g = tape.grad(out)[0];
    for (Real& v : tape.grad(a).values()) v += g;
  });
}

Var pick(Var a, std::size_t index) {
  Tape& tape = *a.tape;
  const Tensor& x = tape.value(a);
  if (index >= x.size()) {
    throw DimensionError(fmt::format("pick {} out of range for {}", index,
                                     shape_to_string(x.shape())));
  }
  const Var out = next_var(tape);
  return tape.record(Tensor::scalar(x[index]), tape.requires_grad(a),
                     [&tape, a, out, index] { tape.grad(a)[index] += tape.grad(out)[0]; });
}

Var sum_scalars(std::span<const Var> scalars) {
  if (scalars.empty()) {
    throw ContractError("sum_scalars: no inputs");
  }
  Tape& tape = *scalars.front().tape;
  Real acc = 0.0;
  bool needs = false;
  for (Var s : scalars) {
    same_tape(scalars.front(), s);
    if (tape.value(s).size() != 1) {
      throw DimensionError("sum_scalars: non-scalar input " +
                           shape_to_string(tape.value(s).shape()));
    }
    acc += tape.value(s)[0];
    needs = needs || tape.requires_grad(s);
  }
  const Var out = next_var(tape);
  std::vector<Var> inputs(scalars.begin(), scalars.end());
  return tape.record(Tensor::scalar(acc), needs, [&tape, inputs, out] {
    const Real g = tape.grad(out)[0];
    for (Var s : inputs) {
      if (tape.requires_grad(s)) tape.grad(s)[0] += g;
    }
  });
}

Var entropy(Var p) {
  Tape& tape = *p.tape;
  const Tensor& x = tape.value(p);
  Real h = 0.0;
  for (Real v : x.values()) {
    if (v > 0.0) h -= v * std::log(v);
  }
  const Var out = next_var(tape);
  return tape.record(Tensor::scalar(h), tape.requires_grad(p), [&tape, p, out] {
    const Real g = tape.grad(out)[0];
    const Tensor& x = tape.value(p);
    Tensor& gp = tape.grad(p);
    for (std::size_t i = 0; i < x.size(); ++i) {
      // zero-probability entries contribute no gradient
      if (x[i] > 0.0) gp[i] += g * -(std::log(x[i]) + 1.0);
    }
  });
}

Var scatter_add(Var x, std::span<const int> index, std::size_t size) {
  Tape& tape = *x.tape;
  const Tensor& in = tape.value(x);
  require_vector("scatter_add", in);
  if (index.size() != in.size()) {
    throw DimensionError(fmt::format("scatter_add: {} indices for {} values",
                                     index.size(), in.size()));
  }
  Tensor z({size});
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0) continue;
    if (static_cast<std::size_t>(index[i]) >= size) {
      throw DimensionError(fmt::format("scatter_add: index {} outside {} slots",
                                       index[i], size));
    }
    z[static_cast<std::size_t>(index[i])] += in[i];
  }
  const Var out = next_var(tape);
  std::vector<int> idx(index.begin(), index.end());
  return tape.record(std::move(z), tape.requires_grad(x), [&tape, x, out, idx] {
    const Tensor& g = tape.grad(out);
    Tensor& gx = tape.grad(x);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= 0) gx[i] += g[static_cast<std::size_t>(idx[i])];
    }
  });
}

Var additive_scores(Var keys, Var query, Var w, Var bias) {
  Tape& tape = same_tape(keys, query);
  same_tape(keys, w);
  same_tape(keys, bias);
  const Tensor& k = tape.value(keys);
  const Tensor& q = tape.value(query);
  const Tensor& wv = tape.value(w);
  require_matrix("additive_scores", k);
  const std::size_t n = k.rows(), h = k.cols();
  if (q.size() != h || wv.size() != h || tape.value(bias).size() != 1) {
    throw DimensionError(fmt::format(
        "additive_scores: keys {} query {} w {} bias {}", shape_to_string(k.shape()),
        shape_to_string(q.shape()), shape_to_string(wv.shape()),
        shape_to_string(tape.value(bias).shape())));
  }
  const Real b = tape.value(bias)[0];
  // hidden activations are kept for the backward pass
  auto hidden = std::make_shared<Tensor>(Shape{n, h});
  Tensor scores({n});
  for (std::size_t i = 0; i < n; ++i) {
    const auto kr = k.row(i);
    auto hr = hidden->row(i);
    Real acc = b;
    for (std::size_t j = 0; j < h; ++j) {
      hr[j] = std::tanh(kr[j] + q[j]);
      acc += wv[j] * hr[j];
    }
    scores[i] = acc;
  }
  const bool needs = tape.requires_grad(keys) || tape.requires_grad(query) ||
                     tape.requires_grad(w) || tape.requires_grad(bias);
  const Var out = next_var(tape);
  return tape.record(std::move(scores), needs,
                     [&tape, keys, query, w, bias, out, hidden, n, h] {
                       const Tensor& g = tape.grad(out);
                       const Tensor& wv = tape.value(w);
                       Tensor dpre({n, h});
                       for (std::size_t i = 0; i < n; ++i) {
                         const auto hr = hidden->row(i);
                         auto dr = dpre.row(i);
                         for (std::size_t j = 0; j < h; ++j)
                           dr[j] = g[i] * wv[j] * (1.0 - hr[j] * hr[j]);
                       }
                       if (tape.requires_grad(w)) {
                         Tensor& gw = tape.grad(w);
                         for (std::size_t i = 0; i < n; ++i) {
                           const auto hr = hidden->row(i);
                           for (std::size_t j = 0; j < h; ++j) gw[j] += g[i] * hr[j];
                         }
                       }
                       if (tape.requires_grad(bias)) {
                         Real acc = 0.0;
                         for (std::size_t i = 0; i < n; ++i) acc += g[i];
                         tape.grad(bias)[0] += acc;
                       }
                       if (tape.requires_grad(keys)) accumulate(tape.grad(keys), dpre);
                       if (tape.requires_grad(query)) {
                         Tensor& gq = tape.grad(query);
                         for (std::size_t i = 0; i < n; ++i) {
                           const auto dr = dpre.row(i);
                           for (std::size_t j = 0; j < h; ++j) gq[j] += dr[j];
                         }
                       }
                     });
}

}  // namespace ad
}  // namespace jointgen
