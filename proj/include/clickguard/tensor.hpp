#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "clickguard/error.hpp"
#include "clickguard/util.hpp"

namespace clickguard {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

// Dense double-precision array with shared storage and an optional gradient
// buffer. Copies alias the same memory; grad presence doubles as the
// requires_grad flag.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    return Tensor(std::move(shape), 0.0, requires_grad);
  }
  static Tensor full(Shape shape, double v, bool requires_grad = false) {
    return Tensor(std::move(shape), v, requires_grad);
  }
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false) {
    if (shape_numel(shape) != values.size())
      throw ShapeError("value count does not match shape " + shape_str(shape));
    Tensor t;
    t.shape_ = std::move(shape);
    t.values_ = std::make_shared<std::vector<double>>(std::move(values));
    if (requires_grad) t.ensure_grad();
    return t;
  }
  static Tensor scalar(double v) { return from({1}, {v}); }

  bool defined() const { return static_cast<bool>(values_); }
  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t size() const { return values_ ? values_->size() : 0; }
  bool requires_grad() const { return static_cast<bool>(grad_); }

  double* data() { return values_->data(); }
  const double* data() const { return values_->data(); }
  double* grad() { return grad_->data(); }
  const double* grad() const { return grad_->data(); }
  const std::vector<double>& values() const { return *values_; }

  void ensure_grad() {
    if (!grad_) grad_ = std::make_shared<std::vector<double>>(size(), 0.0);
  }
  void zero_grad() {
    if (grad_) std::fill(grad_->begin(), grad_->end(), 0.0);
  }

  // Same storage (values and grad), new shape.
  Tensor reshaped(Shape new_shape) const {
    if (shape_numel(new_shape) != size())
      throw ShapeError("reshape " + shape_str(shape_) + " -> " + shape_str(new_shape));
    Tensor t = *this;
    t.shape_ = std::move(new_shape);
    return t;
  }

  // Same values, no gradient tracking.
  Tensor detached() const {
    Tensor t;
    t.shape_ = shape_;
    t.values_ = values_;
    return t;
  }

  Tensor clone(bool requires_grad = false) const {
    return from(shape_, *values_, requires_grad);
  }

  double item() const {
    if (size() != 1) throw ShapeError("item() on non-scalar tensor " + shape_str(shape_));
    return (*values_)[0];
  }

 private:
  Tensor(Shape shape, double fill, bool requires_grad) : shape_(std::move(shape)) {
    values_ = std::make_shared<std::vector<double>>(shape_numel(shape_), fill);
    if (requires_grad) ensure_grad();
  }

  Shape shape_;
  std::shared_ptr<std::vector<double>> values_;
  std::shared_ptr<std::vector<double>> grad_;
};

// Reverse-mode tape: forward ops push a closure; backward replays them in
// reverse. Output grads start at zero, so nodes off the loss path contribute
// nothing, and reuse accumulates naturally.
class Tape {
 public:
  void record(std::function<void()> step) { steps_.push_back(std::move(step)); }

  void backward(Tensor& loss) {
    if (loss.size() != 1) throw ShapeError("backward expects a scalar loss");
    if (!loss.requires_grad())
      throw ShapeError("loss does not require grad (nothing recorded on this tape)");
    loss.grad()[0] = 1.0;
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
  }

  std::size_t size() const { return steps_.size(); }
  void clear() { steps_.clear(); }

 private:
  std::vector<std::function<void()>> steps_;
};

namespace detail {

inline bool tracked(const Tape* tape, std::initializer_list<const Tensor*> inputs) {
  if (!tape) return false;
  for (const Tensor* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

inline Tensor make_result(Shape shape, bool track) {
  Tensor t = Tensor::zeros(std::move(shape));
  if (track) t.ensure_grad();
  return t;
}

// b must be a scalar or a trailing suffix of a's shape (bias-style broadcast).
inline void check_suffix_broadcast(const Tensor& a, const Tensor& b, const char* op) {
  if (b.size() == 1) return;
  if (b.rank() > a.rank())
    throw ShapeError(std::string(op) + ": cannot broadcast " + shape_str(b.shape()) +
                     " over " + shape_str(a.shape()));
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (b.dim(b.rank() - 1 - i) != a.dim(a.rank() - 1 - i))
      throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                       shape_str(b.shape()) + " do not align");
}

// ---- raw matmul kernels (accumulating) ----

inline void mm_nn_acc(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c(m,n) += a(m,k) * b(n,k)^T
inline void mm_nt_acc(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

// c(k,n) += a(m,k)^T * b(m,n)
inline void mm_tn_acc(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < m; ++p) {
    const double* arow = a + p * k;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < k; ++i) {
      double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

struct MatDims {
  std::size_t batch, m, k, n;
  bool a_batched, b_batched;
};

// b_transposed chooses between b as (..,k,n) and b as (..,n,k).
inline MatDims matmul_dims(const Tensor& a, const Tensor& b, bool b_transposed,
                           const char* op) {
  if (a.rank() < 2 || a.rank() > 3 || b.rank() < 2 || b.rank() > 3)
    throw ShapeError(std::string(op) + " expects rank-2/3 operands");
  MatDims d{};
  d.a_batched = a.rank() == 3;
  d.b_batched = b.rank() == 3;
  d.m = a.dim(a.rank() - 2);
  d.k = a.dim(a.rank() - 1);
  const std::size_t b_rows = b.dim(b.rank() - 2);
  const std::size_t b_cols = b.dim(b.rank() - 1);
  const std::size_t inner = b_transposed ? b_cols : b_rows;
  d.n = b_transposed ? b_rows : b_cols;
  if (d.k != inner)
    throw ShapeError(std::string(op) + ": inner dimensions disagree, " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const std::size_t ba = d.a_batched ? a.dim(0) : 1;
  const std::size_t bb = d.b_batched ? b.dim(0) : 1;
  if (d.a_batched && d.b_batched && ba != bb)
    throw ShapeError(std::string(op) + ": batch dimensions disagree");
  d.batch = std::max(ba, bb);
  return d;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Primitive differentiable operations
// ---------------------------------------------------------------------------

// a @ b. Supports (m,k)x(k,n), (B,m,k)x(k,n) and (B,m,k)x(B,k,n).
inline Tensor matmul(const Tensor& a, const Tensor& b, Tape* tape = nullptr) {
  auto d = detail::matmul_dims(a, b, /*b_transposed=*/false, "matmul");
  bool track = detail::tracked(tape, {&a, &b});
  Shape out_shape = d.a_batched || d.b_batched ? Shape{d.batch, d.m, d.n}
                                               : Shape{d.m, d.n};
  Tensor out = detail::make_result(out_shape, track);
  const std::size_t a_step = d.a_batched ? d.m * d.k : 0;
  const std::size_t b_step = d.b_batched ? d.k * d.n : 0;
  const std::size_t o_step = out.rank() == 3 ? d.m * d.n : 0;
  for (std::size_t bi = 0; bi < d.batch; ++bi)
    detail::mm_nn_acc(a.data() + bi * a_step, b.data() + bi * b_step,
                      out.data() + bi * o_step, d.m, d.k, d.n);
  if (track) {
    Tensor ac = a, bc = b, oc = out;
    tape->record([ac, bc, oc, d, a_step, b_step, o_step]() mutable {
      for (std::size_t bi = 0; bi < d.batch; ++bi) {
        const double* g = oc.grad() + bi * o_step;
        if (ac.requires_grad())
          detail::mm_nt_acc(g, bc.data() + bi * b_step, ac.grad() + bi * a_step,
                            d.m, d.n, d.k);
        if (bc.requires_grad())
          detail::mm_tn_acc(ac.data() + bi * a_step, g, bc.grad() + bi * b_step,
                            d.m, d.k, d.n);
      }
    });
  }
  return out;
}

// a @ b^T over the last two axes: (..,m,k) x (..,n,k) -> (..,m,n).
inline Tensor matmul_nt(const Tensor& a, const Tensor& b, Tape* tape = nullptr) {
  auto d = detail::matmul_dims(a, b, /*b_transposed=*/true, "matmul_nt");
  bool track = detail::tracked(tape, {&a, &b});
  Shape out_shape = d.a_batched || d.b_batched ? Shape{d.batch, d.m, d.n}
                                               : Shape{d.m, d.n};
  Tensor out = detail::make_result(out_shape, track);
  const std::size_t a_step = d.a_batched ? d.m * d.k : 0;
  const std::size_t b_step = d.b_batched ? d.n * d.k : 0;
  const std::size_t o_step = out.rank() == 3 ? d.m * d.n : 0;
  for (std::size_t bi = 0; bi < d.batch; ++bi)
    detail::mm_nt_acc(a.data() + bi * a_step, b.data() + bi * b_step,
                      out.data() + bi * o_step, d.m, d.k, d.n);
  if (track) {
    Tensor ac = a, bc = b, oc = out;
    tape->record([ac, bc, oc, d, a_step, b_step, o_step]() mutable {
      for (std::size_t bi = 0; bi < d.batch; ++bi) {
        const double* g = oc.grad() + bi * o_step;
        // dA += G @ B ; dB += G^T @ A
        if (ac.requires_grad())
          detail::mm_nn_acc(g, bc.data() + bi * b_step, ac.grad() + bi * a_step,
                            d.m, d.n, d.k);
        if (bc.requires_grad())
          detail::mm_tn_acc(g, ac.data() + bi * a_step, bc.grad() + bi * b_step,
                            d.m, d.n, d.k);
      }
    });
  }
  return out;
}

// Transpose of the last two axes (value-level; gradient flows).
inline Tensor transpose_last2(const Tensor& x, Tape* tape = nullptr) {
  if (x.rank() < 2) throw ShapeError("transpose_last2 expects rank >= 2");
  Shape s = x.shape();
  std::swap(s[s.size() - 1], s[s.size() - 2]);
  bool track = detail::tracked(tape, {&x});
  Tensor out = detail::make_result(s, track);
  const std::size_t m = x.dim(x.rank() - 2), n = x.dim(x.rank() - 1);
  const std::size_t outer = x.size() / (m * n);
  for (std::size_t o = 0; o < outer; ++o) {
    const double* src = x.data() + o * m * n;
    double* dst = out.data() + o * m * n;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) dst[j * m + i] = src[i * n + j];
  }
  if (track) {
    Tensor xc = x, oc = out;
    tape->record([xc, oc, m, n, outer]() mutable {
      for (std::size_t o = 0; o < outer; ++o) {
        double* dx = xc.grad() + o * m * n;
        const double* g = oc.grad() + o * m * n;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) dx[i * n + j] += g[j * m + i];
      }
    });
  }
  return out;
}

namespace detail {

template <typename Fwd, typename BwdA, typename BwdB>
Tensor binary_broadcast(const Tensor& a, const Tensor& b, Tape* tape, const char* name,
                        Fwd fwd, BwdA bwd_a, BwdB bwd_b) {
  check_suffix_broadcast(a, b, name);
  bool track = tracked(tape, {&a, &b});
  Tensor out = make_result(a.shape(), track);
  const std::size_t bs = b.size();
  for (std::size_t i = 0; i < a.size(); ++i)
    out.data()[i] = fwd(a.data()[i], b.data()[i % bs]);
  if (track) {
    Tensor ac = a, bc = b, oc = out;
    tape->record([ac, bc, oc, bs, bwd_a, bwd_b]() mutable {
      const double* g = oc.grad();
      for (std::size_t i = 0; i < ac.size(); ++i) {
        if (ac.requires_grad()) ac.grad()[i] += bwd_a(g[i], ac.data()[i], bc.data()[i % bs]);
        if (bc.requires_grad()) bc.grad()[i % bs] += bwd_b(g[i], ac.data()[i], bc.data()[i % bs]);
      }
    });
  }
  return out;
}

template <typename Fwd, typename Bwd>
Tensor unary_op(const Tensor& x, Tape* tape, Fwd fwd, Bwd bwd_from_in_out) {
  bool track = tracked(tape, {&x});
  Tensor out = make_result(x.shape(), track);
  for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = fwd(x.data()[i]);
  if (track) {
    Tensor xc = x, oc = out;
    tape->record([xc, oc, bwd_from_in_out]() mutable {
      for (std::size_t i = 0; i < xc.size(); ++i)
        xc.grad()[i] += oc.grad()[i] * bwd_from_in_out(xc.data()[i], oc.data()[i]);
    });
  }
  return out;
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b, Tape* tape = nullptr) {
  return detail::binary_broadcast(
      a, b, tape, "add", [](double x, double y) { return x + y; },
      [](double g, double, double) { return g; },
      [](double g, double, double) { return g; });
}

inline Tensor sub(const Tensor& a, const Tensor& b, Tape* tape = nullptr) {
  return detail::binary_broadcast(
      a, b, tape, "sub", [](double x, double y) { return x - y; },
      [](double g, double, double) { return g; },
      [](double g, double, double) { return -g; });
}

inline Tensor mul(const Tensor& a, const Tensor& b, Tape* tape = nullptr) {
  return detail::binary_broadcast(
      a, b, tape, "mul", [](double x, double y) { return x * y; },
      [](double g, double, double y) { return g * y; },
      [](double g, double x, double) { return g * x; });
}

inline Tensor relu(const Tensor& x, Tape* tape = nullptr) {
  return detail::unary_op(
      x, tape, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

inline Tensor sigmoid(const Tensor& x, Tape* tape = nullptr) {
  return detail::unary_op(
      x, tape,
      [](double v) {
        return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                        : std::exp(v) / (1.0 + std::exp(v));
      },
      [](double, double y) { return y * (1.0 - y); });
}

inline Tensor tanh_op(const Tensor& x, Tape* tape = nullptr) {
  return detail::unary_op(
      x, tape, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

inline Tensor log_op(const Tensor& x, Tape* tape = nullptr) {
  return detail::unary_op(
      x, tape, [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

// scale*x + shift with constant coefficients.
inline Tensor affine(const Tensor& x, double scale, double shift, Tape* tape = nullptr) {
  return detail::unary_op(
      x, tape, [scale, shift](double v) { return scale * v + shift; },
      [scale](double, double) { return scale; });
}

// Gradient passes only strictly inside the interval.
inline Tensor clamp(const Tensor& x, double lo, double hi, Tape* tape = nullptr) {
  return detail::unary_op(
      x, tape,
      [lo, hi](double v) { return std::min(std::max(v, lo), hi); },
      [lo, hi](double v, double) { return (v > lo && v < hi) ? 1.0 : 0.0; });
}

// Numerically stable softmax along `axis` (negative counts from the back).
inline Tensor softmax(const Tensor& x, int axis = -1, Tape* tape = nullptr) {
  const int r = static_cast<int>(x.rank());
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) throw ShapeError("softmax: axis out of range");
  const std::size_t n = x.dim(static_cast<std::size_t>(axis));
  std::size_t stride = 1;
  for (int i = axis + 1; i < r; ++i) stride *= x.dim(static_cast<std::size_t>(i));
  const std::size_t outer = x.size() / (n * stride);

  bool track = detail::tracked(tape, {&x});
  Tensor out = detail::make_result(x.shape(), track);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t s = 0; s < stride; ++s) {
      const std::size_t base = o * n * stride + s;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < n; ++t) mx = std::max(mx, x.data()[base + t * stride]);
      double sum = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        double e = std::exp(x.data()[base + t * stride] - mx);
        out.data()[base + t * stride] = e;
        sum += e;
      }
      for (std::size_t t = 0; t < n; ++t) out.data()[base + t * stride] /= sum;
    }
  }
  if (track) {
    Tensor xc = x, oc = out;
    tape->record([xc, oc, n, stride, outer]() mutable {
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t s = 0; s < stride; ++s) {
          const std::size_t base = o * n * stride + s;
          double dot = 0.0;
          for (std::size_t t = 0; t < n; ++t)
            dot += oc.grad()[base + t * stride] * oc.data()[base + t * stride];
          for (std::size_t t = 0; t < n; ++t) {
            const std::size_t k = base + t * stride;
            xc.grad()[k] += oc.data()[k] * (oc.grad()[k] - dot);
          }
        }
      }
    });
  }
  return out;
}

// Layer normalization over the last axis: x_hat = (x - mean) / sqrt(var + eps),
// out = gain * x_hat + bias. Population variance.
inline Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                         double eps = 1e-5, Tape* tape = nullptr) {
  if (x.rank() < 1) throw ShapeError("layer_norm expects rank >= 1");
  const std::size_t d = x.dim(x.rank() - 1);
  if (gain.size() != d || bias.size() != d)
    throw ShapeError("layer_norm: gain/bias must have the last-axis length");
  const std::size_t slices = x.size() / d;

  bool track = detail::tracked(tape, {&x, &gain, &bias});
  Tensor out = detail::make_result(x.shape(), track);
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv_std = std::make_shared<std::vector<double>>(slices);
  for (std::size_t s = 0; s < slices; ++s) {
    const double* xs = x.data() + s * d;
    double mean = 0.0;
    for (std::size_t i = 0; i < d; ++i) mean += xs[i];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double dv = xs[i] - mean;
      var += dv * dv;
    }
    var /= static_cast<double>(d);
    double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[s] = inv;
    for (std::size_t i = 0; i < d; ++i) {
      double h = (xs[i] - mean) * inv;
      (*xhat)[s * d + i] = h;
      out.data()[s * d + i] = gain.data()[i] * h + bias.data()[i];
    }
  }
  if (track) {
    Tensor xc = x, gc = gain, bc = bias, oc = out;
    tape->record([xc, gc, bc, oc, xhat, inv_std, d, slices]() mutable {
      for (std::size_t s = 0; s < slices; ++s) {
        const double* g = oc.grad() + s * d;
        const double* h = xhat->data() + s * d;
        if (gc.requires_grad() || bc.requires_grad()) {
          for (std::size_t i = 0; i < d; ++i) {
            if (gc.requires_grad()) gc.grad()[i] += g[i] * h[i];
            if (bc.requires_grad()) bc.grad()[i] += g[i];
          }
        }
        if (xc.requires_grad()) {
          double mean_gh = 0.0, mean_ghh = 0.0;
          for (std::size_t i = 0; i < d; ++i) {
            double gh = g[i] * gc.data()[i];
            mean_gh += gh;
            mean_ghh += gh * h[i];
          }
          mean_gh /= static_cast<double>(d);
          mean_ghh /= static_cast<double>(d);
          double inv = (*inv_std)[s];
          double* dx = xc.grad() + s * d;
          for (std::size_t i = 0; i < d; ++i) {
            double gh = g[i] * gc.data()[i];
            dx[i] += inv * (gh - mean_gh - h[i] * mean_ghh);
          }
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural ops: concat/slice/stack/pool/gather
// ---------------------------------------------------------------------------

inline Tensor concat_last(const std::vector<Tensor>& parts, Tape* tape = nullptr) {
  if (parts.empty()) throw ShapeError("concat_last: no inputs");
  const std::size_t lead_rank = parts[0].rank() - 1;
  std::size_t total_last = 0;
  for (const auto& p : parts) {
    if (p.rank() != lead_rank + 1)
      throw ShapeError("concat_last: rank mismatch");
    for (std::size_t i = 0; i < lead_rank; ++i)
      if (p.dim(i) != parts[0].dim(i)) throw ShapeError("concat_last: leading dims differ");
    total_last += p.dim(lead_rank);
  }
  Shape out_shape = parts[0].shape();
  out_shape[lead_rank] = total_last;

  bool track = false;
  for (const auto& p : parts) track |= detail::tracked(tape, {&p});
  Tensor out = detail::make_result(out_shape, track);

  const std::size_t rows = out.size() / total_last;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.dim(lead_rank);
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(p.data() + r * w, w, out.data() + r * total_last + offset);
    offset += w;
  }
  if (track) {
    std::vector<Tensor> pc = parts;
    Tensor oc = out;
    tape->record([pc, oc, rows, total_last, lead_rank]() mutable {
      std::size_t off = 0;
      for (auto& p : pc) {
        const std::size_t w = p.dim(lead_rank);
        if (p.requires_grad())
          for (std::size_t r = 0; r < rows; ++r) {
            const double* g = oc.grad() + r * total_last + off;
            double* dst = p.grad() + r * w;
            for (std::size_t i = 0; i < w; ++i) dst[i] += g[i];
          }
        off += w;
      }
    });
  }
  return out;
}

inline Tensor slice_last(const Tensor& x, std::size_t start, std::size_t len,
                         Tape* tape = nullptr) {
  const std::size_t last = x.dim(x.rank() - 1);
  if (start + len > last) throw ShapeError("slice_last out of range");
  Shape out_shape = x.shape();
  out_shape[out_shape.size() - 1] = len;
  bool track = detail::tracked(tape, {&x});
  Tensor out = detail::make_result(out_shape, track);
  const std::size_t rows = x.size() / last;
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(x.data() + r * last + start, len, out.data() + r * len);
  if (track) {
    Tensor xc = x, oc = out;
    tape->record([xc, oc, rows, last, start, len]() mutable {
      for (std::size_t r = 0; r < rows; ++r) {
        const double* g = oc.grad() + r * len;
        double* dst = xc.grad() + r * last + start;
        for (std::size_t i = 0; i < len; ++i) dst[i] += g[i];
      }
    });
  }
  return out;
}

// Stacks per-step [B,d] tensors into a [B,L,d] sequence.
inline Tensor stack_steps(const std::vector<Tensor>& steps, Tape* tape = nullptr) {
  if (steps.empty()) throw ShapeError("stack_steps: no inputs");
  const std::size_t batch = steps[0].dim(0), d = steps[0].dim(1);
  for (const auto& s : steps)
    if (s.rank() != 2 || s.dim(0) != batch || s.dim(1) != d)
      throw ShapeError("stack_steps: step shapes differ");
  const std::size_t len = steps.size();
  bool track = false;
  for (const auto& s : steps) track |= detail::tracked(tape, {&s});
  Tensor out = detail::make_result({batch, len, d}, track);
  for (std::size_t t = 0; t < len; ++t)
    for (std::size_t b = 0; b < batch; ++b)
      std::copy_n(steps[t].data() + b * d, d, out.data() + (b * len + t) * d);
  if (track) {
    std::vector<Tensor> sc = steps;
    Tensor oc = out;
    tape->record([sc, oc, batch, len, d]() mutable {
      for (std::size_t t = 0; t < len; ++t) {
        if (!sc[t].requires_grad()) continue;
        for (std::size_t b = 0; b < batch; ++b) {
          const double* g = oc.grad() + (b * len + t) * d;
          double* dst = sc[t].grad() + b * d;
          for (std::size_t i = 0; i < d; ++i) dst[i] += g[i];
        }
      }
    });
  }
  return out;
}

// Extracts timestep t from [B,L,d] -> [B,d].
inline Tensor time_slice(const Tensor& x, std::size_t t, Tape* tape = nullptr) {
  if (x.rank() != 3) throw ShapeError("time_slice expects [B,L,d]");
  const std::size_t batch = x.dim(0), len = x.dim(1), d = x.dim(2);
  if (t >= len) throw ShapeError("time_slice out of range");
  bool track = detail::tracked(tape, {&x});
  Tensor out = detail::make_result({batch, d}, track);
  for (std::size_t b = 0; b < batch; ++b)
    std::copy_n(x.data() + (b * len + t) * d, d, out.data() + b * d);
  if (track) {
    Tensor xc = x, oc = out;
    tape->record([xc, oc, batch, len, d, t]() mutable {
      for (std::size_t b = 0; b < batch; ++b) {
        const double* g = oc.grad() + b * d;
        double* dst = xc.grad() + (b * len + t) * d;
        for (std::size_t i = 0; i < d; ++i) dst[i] += g[i];
      }
    });
  }
  return out;
}

// Max over the time axis (second-to-last): [B,L,d] -> [B,d], [L,d] -> [d].
// Ties route the gradient to the earliest maximum.
inline Tensor global_max_pool(const Tensor& x, Tape* tape = nullptr) {
  if (x.rank() < 2) throw ShapeError("global_max_pool expects rank >= 2");
  const std::size_t d = x.dim(x.rank() - 1);
  const std::size_t len = x.dim(x.rank() - 2);
  if (len == 0) throw ShapeError("global_max_pool: empty time axis");
  const std::size_t outer = x.size() / (len * d);
  Shape out_shape(x.shape().begin(), x.shape().end() - 2);
  out_shape.push_back(d);

  bool track = detail::tracked(tape, {&x});
  Tensor out = detail::make_result(out_shape, track);
  auto argmax = std::make_shared<std::vector<std::size_t>>(outer * d);
  for (std::size_t o = 0; o < outer; ++o) {
    const double* base = x.data() + o * len * d;
    for (std::size_t c = 0; c < d; ++c) {
      double best = base[c];
      std::size_t best_t = 0;
      for (std::size_t t = 1; t < len; ++t) {
        double v = base[t * d + c];
        if (v > best) {
          best = v;
          best_t = t;
        }
      }
      out.data()[o * d + c] = best;
      (*argmax)[o * d + c] = best_t;
    }
  }
  if (track) {
    Tensor xc = x, oc = out;
    tape->record([xc, oc, argmax, outer, len, d]() mutable {
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t c = 0; c < d; ++c)
          xc.grad()[o * len * d + (*argmax)[o * d + c] * d + c] += oc.grad()[o * d + c];
    });
  }
  return out;
}

inline Tensor sum_all(const Tensor& x, Tape* tape = nullptr) {
  bool track = detail::tracked(tape, {&x});
  Tensor out = detail::make_result({1}, track);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x.data()[i];
  out.data()[0] = acc;
  if (track) {
    Tensor xc = x, oc = out;
    tape->record([xc, oc]() mutable {
      double g = oc.grad()[0];
      for (std::size_t i = 0; i < xc.size(); ++i) xc.grad()[i] += g;
    });
  }
  return out;
}

inline Tensor mean_all(const Tensor& x, Tape* tape = nullptr) {
  Tensor s = sum_all(x, tape);
  return affine(s, 1.0 / static_cast<double>(x.size()), 0.0, tape);
}

// Embedding lookup: rows of table [V,d] gathered by ids (length B*L) -> [B,L,d].
inline Tensor embed_rows(const Tensor& table, const std::vector<std::int32_t>& ids,
                         std::size_t batch, std::size_t len, Tape* tape = nullptr) {
  if (table.rank() != 2) throw ShapeError("embed_rows expects a [V,d] table");
  if (ids.size() != batch * len) throw ShapeError("embed_rows: id count mismatch");
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  for (std::int32_t id : ids)
    if (id < 0 || static_cast<std::size_t>(id) >= vocab)
      throw ShapeError("embed_rows: id out of range");
  bool track = detail::tracked(tape, {&table});
  Tensor out = detail::make_result({batch, len, d}, track);
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::copy_n(table.data() + static_cast<std::size_t>(ids[i]) * d, d,
                out.data() + i * d);
  if (track) {
    Tensor tc = table, oc = out;
    auto idc = std::make_shared<std::vector<std::int32_t>>(ids);
    tape->record([tc, oc, idc, d]() mutable {
      for (std::size_t i = 0; i < idc->size(); ++i) {
        const double* g = oc.grad() + i * d;
        double* dst = tc.grad() + static_cast<std::size_t>((*idc)[i]) * d;
        for (std::size_t j = 0; j < d; ++j) dst[j] += g[j];
      }
    });
  }
  return out;
}

// Sliding windows for 1-D convolution: [B,L,d] -> [B, L-h+1, h*d].
inline Tensor unfold_windows(const Tensor& x, std::size_t h, Tape* tape = nullptr) {
  if (x.rank() != 3) throw ShapeError("unfold_windows expects [B,L,d]");
  const std::size_t batch = x.dim(0), len = x.dim(1), d = x.dim(2);
  if (h == 0 || h > len)
    throw ShapeError("unfold_windows: window " + std::to_string(h) +
                     " exceeds sequence length " + std::to_string(len));
  const std::size_t w = len - h + 1;
  bool track = detail::tracked(tape, {&x});
  Tensor out = detail::make_result({batch, w, h * d}, track);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < w; ++i)
      std::copy_n(x.data() + (b * len + i) * d, h * d,
                  out.data() + (b * w + i) * h * d);
  if (track) {
    Tensor xc = x, oc = out;
    tape->record([xc, oc, batch, len, d, h, w]() mutable {
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < w; ++i) {
          const double* g = oc.grad() + (b * w + i) * h * d;
          double* dst = xc.grad() + (b * len + i) * d;
          for (std::size_t j = 0; j < h * d; ++j) dst[j] += g[j];
        }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite-difference gradient checking
// ---------------------------------------------------------------------------

// Central differences against the tape gradient. Coordinates with
// |x_i| < 10*eps are skipped (ReLU-kink rule). Relative error uses
// max(|a|,|b|,1e-8) as the denominator.
template <typename F>
double gradient_check(F&& f, Tensor& x, double eps = 1e-5, bool skip_kinks = true) {
  x.ensure_grad();
  x.zero_grad();
  Tape tape;
  Tensor y = f(static_cast<const Tensor&>(x), &tape);
  if (y.size() != 1) throw ShapeError("gradient_check expects a scalar-valued f");
  tape.backward(y);
  std::vector<double> autodiff(x.grad(), x.grad() + x.size());

  double max_rel = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double orig = x.data()[i];
    if (skip_kinks && std::abs(orig) < 10.0 * eps) continue;
    x.data()[i] = orig + eps;
    double fp = f(static_cast<const Tensor&>(x), nullptr).item();
    x.data()[i] = orig - eps;
    double fm = f(static_cast<const Tensor&>(x), nullptr).item();
    x.data()[i] = orig;
    double fd = (fp - fm) / (2.0 * eps);
    double rel = std::abs(autodiff[i] - fd) /
                 std::max({std::abs(autodiff[i]), std::abs(fd), 1e-8});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace clickguard
