#include "hinimp/tensor.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "hinimp/errors.hpp"

namespace hinimp {

namespace detail {

struct TensorNode {
  std::vector<int64_t> shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until touched
  bool requires_grad = false;
  bool backward_ran = false;
  std::vector<std::shared_ptr<TensorNode>> inputs;
  std::function<void(TensorNode&)> backprop;  // reads this->grad, accumulates into inputs

  int64_t numel() const { return static_cast<int64_t>(value.size()); }
  std::vector<double>& ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

using detail::TensorNode;

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

int64_t shape_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (const int64_t d : shape) n *= d;
  return n;
}

std::string shape_to_str(const std::vector<int64_t>& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw NumericError(msg);
}

// Allocates the result node and wires input edges (only kept when some input
// needs gradients, so inference graphs stay flat).
Tensor make_result(std::vector<int64_t> shape, std::vector<Tensor> inputs) {
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->value.assign(static_cast<size_t>(shape_numel(n->shape)), 0.0);
  for (const auto& t : inputs) n->requires_grad = n->requires_grad || t.requires_grad();
  if (n->requires_grad)
    for (const auto& t : inputs) n->inputs.push_back(t.ptr());
  return Tensor::wrap(n);
}

}  // namespace

// --- Tensor ------------------------------------------------------------------

Tensor Tensor::zeros(std::vector<int64_t> shape, bool requires_grad) {
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->value.assign(static_cast<size_t>(shape_numel(n->shape)), 0.0);
  n->requires_grad = requires_grad;
  return wrap(n);
}

Tensor Tensor::from(std::vector<int64_t> shape, std::vector<double> data, bool requires_grad) {
  require(shape_numel(shape) == static_cast<int64_t>(data.size()),
          "tensor data length " + std::to_string(data.size()) + " does not match shape " + shape_to_str(shape));
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->value = std::move(data);
  n->requires_grad = requires_grad;
  return wrap(n);
}

Tensor Tensor::scalar(double v, bool requires_grad) { return from({}, {v}, requires_grad); }

Tensor Tensor::wrap(std::shared_ptr<detail::TensorNode> p) {
  Tensor t;
  t.p_ = std::move(p);
  return t;
}

const std::vector<int64_t>& Tensor::shape() const { return p_->shape; }
int64_t Tensor::numel() const { return p_->numel(); }

int64_t Tensor::rows() const {
  require(p_->shape.size() == 2, "rows(): not a 2-D tensor: " + shape_str());
  return p_->shape[0];
}

int64_t Tensor::cols() const {
  require(p_->shape.size() == 2, "cols(): not a 2-D tensor: " + shape_str());
  return p_->shape[1];
}

bool Tensor::requires_grad() const { return p_->requires_grad; }
std::vector<double>& Tensor::data() { return p_->value; }
const std::vector<double>& Tensor::data() const { return p_->value; }
std::vector<double>& Tensor::grad() { return p_->ensure_grad(); }
bool Tensor::has_grad() const { return !p_->grad.empty(); }
void Tensor::clear_grad() { p_->grad.clear(); }

double Tensor::value() const {
  require(numel() == 1, "value(): tensor is not scalar: " + shape_str());
  return p_->value[0];
}

double Tensor::at(int64_t r, int64_t c) const { return p_->value[static_cast<size_t>(r * cols() + c)]; }

std::string Tensor::shape_str() const { return shape_to_str(p_->shape); }

// --- ops ---------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.shape().size() == 2 && b.shape().size() == 2 && a.cols() == b.rows(),
          "matmul shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
  const int64_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out = make_result({n, m}, {a, b});
  {
    ConstMatMap A(a.data().data(), n, k), B(b.data().data(), k, m);
    MatMap C(out.data().data(), n, m);
    C.noalias() = A * B;
  }
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    TensorNode* bn = b.ptr().get();
    out.ptr()->backprop = [an, bn, n, k, m](TensorNode& self) {
      ConstMatMap G(self.grad.data(), n, m);
      if (an->requires_grad) {
        ConstMatMap B(bn->value.data(), k, m);
        MatMap dA(an->ensure_grad().data(), n, k);
        dA.noalias() += G * B.transpose();
      }
      if (bn->requires_grad) {
        ConstMatMap A(an->value.data(), n, k);
        MatMap dB(bn->ensure_grad().data(), k, m);
        dB.noalias() += A.transpose() * G;
      }
    };
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (b.numel() == 1 && b.shape().empty() && !(a.shape().empty())) {
    // tensor + scalar broadcast
    Tensor out = make_result(a.shape(), {a, b});
    const double s = b.value();
    for (int64_t i = 0; i < a.numel(); ++i) out.data()[static_cast<size_t>(i)] = a.data()[static_cast<size_t>(i)] + s;
    if (out.requires_grad()) {
      TensorNode* an = a.ptr().get();
      TensorNode* bn = b.ptr().get();
      out.ptr()->backprop = [an, bn](TensorNode& self) {
        if (an->requires_grad) {
          auto& g = an->ensure_grad();
          for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
        if (bn->requires_grad) {
          double acc = 0;
          for (const double g : self.grad) acc += g;
          bn->ensure_grad()[0] += acc;
        }
      };
    }
    return out;
  }
  require(a.shape() == b.shape(), "add shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
  Tensor out = make_result(a.shape(), {a, b});
  for (int64_t i = 0; i < a.numel(); ++i)
    out.data()[static_cast<size_t>(i)] = a.data()[static_cast<size_t>(i)] + b.data()[static_cast<size_t>(i)];
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    TensorNode* bn = b.ptr().get();
    out.ptr()->backprop = [an, bn](TensorNode& self) {
      for (TensorNode* t : {an, bn}) {
        if (!t->requires_grad) continue;
        auto& g = t->ensure_grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      }
    };
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, scalar_mul(b, -1.0)); }

Tensor mul(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "mul shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
  Tensor out = make_result(a.shape(), {a, b});
  for (int64_t i = 0; i < a.numel(); ++i)
    out.data()[static_cast<size_t>(i)] = a.data()[static_cast<size_t>(i)] * b.data()[static_cast<size_t>(i)];
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    TensorNode* bn = b.ptr().get();
    out.ptr()->backprop = [an, bn](TensorNode& self) {
      if (an->requires_grad) {
        auto& g = an->ensure_grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bn->value[i];
      }
      if (bn->requires_grad) {
        auto& g = bn->ensure_grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * an->value[i];
      }
    };
  }
  return out;
}

Tensor mul_scalar(const Tensor& a, const Tensor& s) {
  require(s.numel() == 1, "mul_scalar: second argument must be scalar, got " + s.shape_str());
  Tensor out = make_result(a.shape(), {a, s});
  const double c = s.data()[0];
  for (int64_t i = 0; i < a.numel(); ++i) out.data()[static_cast<size_t>(i)] = a.data()[static_cast<size_t>(i)] * c;
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    TensorNode* sn = s.ptr().get();
    out.ptr()->backprop = [an, sn](TensorNode& self) {
      if (an->requires_grad) {
        auto& g = an->ensure_grad();
        const double c2 = sn->value[0];
        for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * c2;
      }
      if (sn->requires_grad) {
        double acc = 0;
        for (size_t i = 0; i < self.grad.size(); ++i) acc += self.grad[i] * an->value[i];
        sn->ensure_grad()[0] += acc;
      }
    };
  }
  return out;
}

Tensor scalar_mul(const Tensor& a, double c) {
  Tensor out = make_result(a.shape(), {a});
  for (int64_t i = 0; i < a.numel(); ++i) out.data()[static_cast<size_t>(i)] = a.data()[static_cast<size_t>(i)] * c;
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    out.ptr()->backprop = [an, c](TensorNode& self) {
      auto& g = an->ensure_grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * c;
    };
  }
  return out;
}

Tensor tanh_op(const Tensor& a) {
  Tensor out = make_result(a.shape(), {a});
  for (int64_t i = 0; i < a.numel(); ++i) out.data()[static_cast<size_t>(i)] = std::tanh(a.data()[static_cast<size_t>(i)]);
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    out.ptr()->backprop = [an](TensorNode& self) {
      auto& g = an->ensure_grad();
      for (size_t i = 0; i < g.size(); ++i) {
        const double y = self.value[i];
        g[i] += self.grad[i] * (1.0 - y * y);
      }
    };
  }
  return out;
}

Tensor relu(const Tensor& a) {
  Tensor out = make_result(a.shape(), {a});
  for (int64_t i = 0; i < a.numel(); ++i) out.data()[static_cast<size_t>(i)] = std::max(0.0, a.data()[static_cast<size_t>(i)]);
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    out.ptr()->backprop = [an](TensorNode& self) {
      auto& g = an->ensure_grad();
      for (size_t i = 0; i < g.size(); ++i)
        if (an->value[i] > 0) g[i] += self.grad[i];
    };
  }
  return out;
}

Tensor square(const Tensor& a) {
  Tensor out = make_result(a.shape(), {a});
  for (int64_t i = 0; i < a.numel(); ++i) {
    const double v = a.data()[static_cast<size_t>(i)];
    out.data()[static_cast<size_t>(i)] = v * v;
  }
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    out.ptr()->backprop = [an](TensorNode& self) {
      auto& g = an->ensure_grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * 2.0 * an->value[i];
    };
  }
  return out;
}

namespace {

void softmax_span(const double* in, double* out, int64_t n) {
  double mx = in[0];
  for (int64_t i = 1; i < n; ++i) mx = std::max(mx, in[i]);
  double denom = 0;
  for (int64_t i = 0; i < n; ++i) {
    out[i] = std::exp(in[i] - mx);
    denom += out[i];
  }
  for (int64_t i = 0; i < n; ++i) out[i] /= denom;
}

void softmax_span_backward(const double* y, const double* gy, double* gx, int64_t n) {
  double dotp = 0;
  for (int64_t i = 0; i < n; ++i) dotp += y[i] * gy[i];
  for (int64_t i = 0; i < n; ++i) gx[i] += y[i] * (gy[i] - dotp);
}

}  // namespace

Tensor softmax_last(const Tensor& a) {
  require(a.shape().size() == 1 || a.shape().size() == 2, "softmax_last: needs 1-D or 2-D, got " + a.shape_str());
  const int64_t m = a.shape().back();
  require(m > 0, "softmax_last: empty axis");
  const int64_t rows = a.numel() / m;
  Tensor out = make_result(a.shape(), {a});
  for (int64_t r = 0; r < rows; ++r)
    softmax_span(a.data().data() + r * m, out.data().data() + r * m, m);
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    out.ptr()->backprop = [an, rows, m](TensorNode& self) {
      auto& g = an->ensure_grad();
      for (int64_t r = 0; r < rows; ++r)
        softmax_span_backward(self.value.data() + r * m, self.grad.data() + r * m, g.data() + r * m, m);
    };
  }
  return out;
}

Tensor segment_softmax(const Tensor& logits, std::vector<int64_t> offsets) {
  require(logits.shape().size() == 1, "segment_softmax: needs 1-D, got " + logits.shape_str());
  require(!offsets.empty() && offsets.back() == logits.numel(),
          "segment_softmax: offsets must end at " + std::to_string(logits.numel()));
  Tensor out = make_result(logits.shape(), {logits});
  for (size_t s = 0; s + 1 < offsets.size(); ++s) {
    const int64_t lo = offsets[s], hi = offsets[s + 1];
    if (hi > lo) softmax_span(logits.data().data() + lo, out.data().data() + lo, hi - lo);
  }
  if (out.requires_grad()) {
    TensorNode* an = logits.ptr().get();
    out.ptr()->backprop = [an, offsets = std::move(offsets)](TensorNode& self) {
      auto& g = an->ensure_grad();
      for (size_t s = 0; s + 1 < offsets.size(); ++s) {
        const int64_t lo = offsets[s], hi = offsets[s + 1];
        if (hi > lo) softmax_span_backward(self.value.data() + lo, self.grad.data() + lo, g.data() + lo, hi - lo);
      }
    };
  }
  return out;
}

Tensor concat_last(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_last: no inputs");
  const size_t ndim = parts[0].shape().size();
  require(ndim == 1 || ndim == 2, "concat_last: needs 1-D or 2-D inputs");
  int64_t total_cols = 0;
  const int64_t rows = ndim == 2 ? parts[0].rows() : 1;
  for (const auto& p : parts) {
    require(p.shape().size() == ndim && (ndim == 1 || p.rows() == rows),
            "concat_last: incompatible part shape " + p.shape_str());
    total_cols += p.shape().back();
  }
  std::vector<int64_t> out_shape = ndim == 2 ? std::vector<int64_t>{rows, total_cols}
                                              : std::vector<int64_t>{total_cols};
  Tensor out = make_result(out_shape, parts);
  int64_t col0 = 0;
  for (const auto& p : parts) {
    const int64_t pc = p.shape().back();
    for (int64_t r = 0; r < rows; ++r)
      std::copy_n(p.data().data() + r * pc, pc, out.data().data() + r * total_cols + col0);
    col0 += pc;
  }
  if (out.requires_grad()) {
    std::vector<TensorNode*> ins;
    std::vector<int64_t> widths;
    for (const auto& p : parts) {
      ins.push_back(p.ptr().get());
      widths.push_back(p.shape().back());
    }
    out.ptr()->backprop = [ins, widths, rows, total_cols](TensorNode& self) {
      int64_t c0 = 0;
      for (size_t k = 0; k < ins.size(); ++k) {
        if (ins[k]->requires_grad) {
          auto& g = ins[k]->ensure_grad();
          for (int64_t r = 0; r < rows; ++r)
            for (int64_t c = 0; c < widths[k]; ++c)
              g[static_cast<size_t>(r * widths[k] + c)] += self.grad[static_cast<size_t>(r * total_cols + c0 + c)];
        }
        c0 += widths[k];
      }
    };
  }
  return out;
}

Tensor gather(const Tensor& a, std::vector<int64_t> idx) {
  require(a.shape().size() == 1, "gather: needs 1-D, got " + a.shape_str());
  for (const int64_t i : idx)
    require(i >= 0 && i < a.numel(), "gather: index " + std::to_string(i) + " out of range " + a.shape_str());
  Tensor out = make_result({static_cast<int64_t>(idx.size())}, {a});
  for (size_t i = 0; i < idx.size(); ++i) out.data()[i] = a.data()[static_cast<size_t>(idx[i])];
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    out.ptr()->backprop = [an, idx = std::move(idx)](TensorNode& self) {
      auto& g = an->ensure_grad();
      for (size_t i = 0; i < idx.size(); ++i) g[static_cast<size_t>(idx[i])] += self.grad[i];
    };
  }
  return out;
}

Tensor gather_rows(const Tensor& a, std::vector<int64_t> idx) {
  require(a.shape().size() == 2, "gather_rows: needs 2-D, got " + a.shape_str());
  const int64_t m = a.cols();
  for (const int64_t i : idx)
    require(i >= 0 && i < a.rows(), "gather_rows: row " + std::to_string(i) + " out of range " + a.shape_str());
  Tensor out = make_result({static_cast<int64_t>(idx.size()), m}, {a});
  for (size_t i = 0; i < idx.size(); ++i)
    std::copy_n(a.data().data() + idx[i] * m, m, out.data().data() + static_cast<int64_t>(i) * m);
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    out.ptr()->backprop = [an, idx = std::move(idx), m](TensorNode& self) {
      auto& g = an->ensure_grad();
      for (size_t i = 0; i < idx.size(); ++i) {
        double* dst = g.data() + idx[i] * m;
        const double* src = self.grad.data() + static_cast<int64_t>(i) * m;
        for (int64_t c = 0; c < m; ++c) dst[c] += src[c];
      }
    };
  }
  return out;
}

Tensor scatter_add_rows(const Tensor& a, std::vector<int64_t> idx, int64_t n_rows) {
  require(a.shape().size() == 2, "scatter_add_rows: needs 2-D, got " + a.shape_str());
  require(static_cast<int64_t>(idx.size()) == a.rows(),
          "scatter_add_rows: index count " + std::to_string(idx.size()) + " != rows of " + a.shape_str());
  const int64_t m = a.cols();
  for (const int64_t i : idx)
    require(i >= 0 && i < n_rows, "scatter_add_rows: row " + std::to_string(i) + " out of range");
  Tensor out = make_result({n_rows, m}, {a});
  for (size_t i = 0; i < idx.size(); ++i) {
    double* dst = out.data().data() + idx[i] * m;
    const double* src = a.data().data() + static_cast<int64_t>(i) * m;
    for (int64_t c = 0; c < m; ++c) dst[c] += src[c];
  }
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    out.ptr()->backprop = [an, idx = std::move(idx), m](TensorNode& self) {
      auto& g = an->ensure_grad();
      for (size_t i = 0; i < idx.size(); ++i) {
        double* dst = g.data() + static_cast<int64_t>(i) * m;
        const double* src = self.grad.data() + idx[i] * m;
        for (int64_t c = 0; c < m; ++c) dst[c] += src[c];
      }
    };
  }
  return out;
}

Tensor scale_rows(const Tensor& a, const Tensor& w) {
  require(a.shape().size() == 2 && w.shape().size() == 1 && w.numel() == a.rows(),
          "scale_rows shape mismatch: " + a.shape_str() + " vs " + w.shape_str());
  const int64_t n = a.rows(), m = a.cols();
  Tensor out = make_result({n, m}, {a, w});
  for (int64_t r = 0; r < n; ++r) {
    const double c = w.data()[static_cast<size_t>(r)];
    for (int64_t j = 0; j < m; ++j)
      out.data()[static_cast<size_t>(r * m + j)] = a.data()[static_cast<size_t>(r * m + j)] * c;
  }
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    TensorNode* wn = w.ptr().get();
    out.ptr()->backprop = [an, wn, n, m](TensorNode& self) {
      if (an->requires_grad) {
        auto& g = an->ensure_grad();
        for (int64_t r = 0; r < n; ++r) {
          const double c = wn->value[static_cast<size_t>(r)];
          for (int64_t j = 0; j < m; ++j) g[static_cast<size_t>(r * m + j)] += self.grad[static_cast<size_t>(r * m + j)] * c;
        }
      }
      if (wn->requires_grad) {
        auto& g = wn->ensure_grad();
        for (int64_t r = 0; r < n; ++r) {
          double acc = 0;
          for (int64_t j = 0; j < m; ++j)
            acc += self.grad[static_cast<size_t>(r * m + j)] * an->value[static_cast<size_t>(r * m + j)];
          g[static_cast<size_t>(r)] += acc;
        }
      }
    };
  }
  return out;
}

Tensor repeat_row(const Tensor& v, int64_t n) {
  require(v.shape().size() == 1, "repeat_row: needs 1-D, got " + v.shape_str());
  const int64_t m = v.numel();
  Tensor out = make_result({n, m}, {v});
  for (int64_t r = 0; r < n; ++r) std::copy_n(v.data().data(), m, out.data().data() + r * m);
  if (out.requires_grad()) {
    TensorNode* vn = v.ptr().get();
    out.ptr()->backprop = [vn, n, m](TensorNode& self) {
      auto& g = vn->ensure_grad();
      for (int64_t r = 0; r < n; ++r)
        for (int64_t c = 0; c < m; ++c) g[static_cast<size_t>(c)] += self.grad[static_cast<size_t>(r * m + c)];
    };
  }
  return out;
}

Tensor sum_last(const Tensor& a) {
  require(a.shape().size() == 2, "sum_last: needs 2-D, got " + a.shape_str());
  const int64_t n = a.rows(), m = a.cols();
  Tensor out = make_result({n}, {a});
  for (int64_t r = 0; r < n; ++r) {
    double acc = 0;
    for (int64_t c = 0; c < m; ++c) acc += a.data()[static_cast<size_t>(r * m + c)];
    out.data()[static_cast<size_t>(r)] = acc;
  }
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    out.ptr()->backprop = [an, n, m](TensorNode& self) {
      auto& g = an->ensure_grad();
      for (int64_t r = 0; r < n; ++r)
        for (int64_t c = 0; c < m; ++c) g[static_cast<size_t>(r * m + c)] += self.grad[static_cast<size_t>(r)];
    };
  }
  return out;
}

Tensor slice_cols(const Tensor& a, int64_t col0, int64_t width) {
  require(a.shape().size() == 2, "slice_cols: needs 2-D, got " + a.shape_str());
  require(col0 >= 0 && width >= 0 && col0 + width <= a.cols(),
          "slice_cols: range [" + std::to_string(col0) + "," + std::to_string(col0 + width) + ") out of " +
              a.shape_str());
  const int64_t n = a.rows(), m = a.cols();
  Tensor out = make_result({n, width}, {a});
  for (int64_t r = 0; r < n; ++r)
    std::copy_n(a.data().data() + r * m + col0, width, out.data().data() + r * width);
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    out.ptr()->backprop = [an, col0, width, n, m](TensorNode& self) {
      auto& g = an->ensure_grad();
      for (int64_t r = 0; r < n; ++r)
        for (int64_t c = 0; c < width; ++c)
          g[static_cast<size_t>(r * m + col0 + c)] += self.grad[static_cast<size_t>(r * width + c)];
    };
  }
  return out;
}

Tensor dot(const Tensor& a, const Tensor& b) {
  require(a.shape().size() == 1 && b.shape().size() == 1 && a.numel() == b.numel(),
          "dot shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
  Tensor out = make_result({}, {a, b});
  double acc = 0;
  for (int64_t i = 0; i < a.numel(); ++i) acc += a.data()[static_cast<size_t>(i)] * b.data()[static_cast<size_t>(i)];
  out.data()[0] = acc;
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    TensorNode* bn = b.ptr().get();
    out.ptr()->backprop = [an, bn](TensorNode& self) {
      const double g = self.grad[0];
      if (an->requires_grad) {
        auto& ga = an->ensure_grad();
        for (size_t i = 0; i < ga.size(); ++i) ga[i] += g * bn->value[i];
      }
      if (bn->requires_grad) {
        auto& gb = bn->ensure_grad();
        for (size_t i = 0; i < gb.size(); ++i) gb[i] += g * an->value[i];
      }
    };
  }
  return out;
}

Tensor sum(const Tensor& a) {
  Tensor out = make_result({}, {a});
  double acc = 0;
  for (const double v : a.data()) acc += v;
  out.data()[0] = acc;
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    out.ptr()->backprop = [an](TensorNode& self) {
      auto& g = an->ensure_grad();
      const double gv = self.grad[0];
      for (auto& x : g) x += gv;
    };
  }
  return out;
}

Tensor mean(const Tensor& a) {
  require(a.numel() > 0, "mean: empty tensor");
  return scalar_mul(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor reshape(const Tensor& a, std::vector<int64_t> shape) {
  require(shape_numel(shape) == a.numel(),
          "reshape: cannot view " + a.shape_str() + " as " + shape_to_str(shape));
  Tensor out = make_result(shape, {a});
  out.data() = a.data();
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    out.ptr()->backprop = [an](TensorNode& self) {
      auto& g = an->ensure_grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    };
  }
  return out;
}

Tensor stack_scalars(const std::vector<Tensor>& xs) {
  require(!xs.empty(), "stack_scalars: no inputs");
  for (const auto& x : xs) require(x.numel() == 1, "stack_scalars: non-scalar input " + x.shape_str());
  Tensor out = make_result({static_cast<int64_t>(xs.size())}, xs);
  for (size_t i = 0; i < xs.size(); ++i) out.data()[i] = xs[i].data()[0];
  if (out.requires_grad()) {
    std::vector<TensorNode*> ins;
    for (const auto& x : xs) ins.push_back(x.ptr().get());
    out.ptr()->backprop = [ins](TensorNode& self) {
      for (size_t i = 0; i < ins.size(); ++i)
        if (ins[i]->requires_grad) ins[i]->ensure_grad()[0] += self.grad[i];
    };
  }
  return out;
}

Tensor sort_rows(const Tensor& a) {
  require(a.shape().size() == 2, "sort_rows: needs 2-D, got " + a.shape_str());
  const int64_t n = a.rows(), m = a.cols();
  std::vector<int64_t> perms(static_cast<size_t>(n * m));
  Tensor out = make_result({n, m}, {a});
  for (int64_t r = 0; r < n; ++r) {
    int64_t* perm = perms.data() + r * m;
    std::iota(perm, perm + m, int64_t{0});
    const double* row = a.data().data() + r * m;
    std::stable_sort(perm, perm + m, [row](int64_t x, int64_t y) { return row[x] < row[y]; });
    for (int64_t j = 0; j < m; ++j) out.data()[static_cast<size_t>(r * m + j)] = row[perm[j]];
  }
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    out.ptr()->backprop = [an, perms = std::move(perms), n, m](TensorNode& self) {
      auto& g = an->ensure_grad();
      for (int64_t r = 0; r < n; ++r)
        for (int64_t j = 0; j < m; ++j)
          g[static_cast<size_t>(r * m + perms[static_cast<size_t>(r * m + j)])] += self.grad[static_cast<size_t>(r * m + j)];
    };
  }
  return out;
}

Tensor permute_cols(const Tensor& a, std::vector<int64_t> perm) {
  require(a.shape().size() == 2, "permute_cols: needs 2-D, got " + a.shape_str());
  const int64_t n = a.rows(), m = a.cols();
  require(static_cast<int64_t>(perm.size()) == m, "permute_cols: permutation size mismatch");
  Tensor out = make_result({n, m}, {a});
  for (int64_t r = 0; r < n; ++r)
    for (int64_t j = 0; j < m; ++j)
      out.data()[static_cast<size_t>(r * m + j)] = a.data()[static_cast<size_t>(r * m + perm[static_cast<size_t>(j)])];
  if (out.requires_grad()) {
    TensorNode* an = a.ptr().get();
    out.ptr()->backprop = [an, perm = std::move(perm), n, m](TensorNode& self) {
      auto& g = an->ensure_grad();
      for (int64_t r = 0; r < n; ++r)
        for (int64_t j = 0; j < m; ++j)
          g[static_cast<size_t>(r * m + perm[static_cast<size_t>(j)])] += self.grad[static_cast<size_t>(r * m + j)];
    };
  }
  return out;
}

void backward(const Tensor& loss) {
  require(loss.defined() && loss.numel() == 1, "backward: loss must be a defined scalar");
  TensorNode* root = loss.ptr().get();
  require(!root->backward_ran, "backward: called twice on the same graph without reset");
  root->backward_ran = true;

  // iterative post-order DFS for a deterministic reverse-topological order
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> visited;
  std::vector<std::pair<TensorNode*, size_t>> stack{{root, 0}};
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      TensorNode* child = node->inputs[next++].get();
      if (child && !visited.count(child)) {
        visited.insert(child);
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad()[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* n = *it;
    if (n->backprop && !n->grad.empty()) n->backprop(*n);
  }
}

// --- Adam ----------------------------------------------------------------------

void Adam::add_param(const std::string& name, const Tensor& p) {
  params_.emplace_back(name, p);
  m_.emplace_back(p.data().size(), 0.0);
  v_.emplace_back(p.data().size(), 0.0);
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t k = 0; k < params_.size(); ++k) {
    auto& [name, p] = params_[k];
    if (!p.has_grad()) continue;  // untouched parameter: zero grad, no update
    auto& g = p.grad();
    for (const double gv : g)
      if (std::isnan(gv)) throw NumericError("Adam: NaN gradient in parameter '" + name + "'");
    auto& pm = m_[k];
    auto& pv = v_[k];
    auto& val = p.data();
    for (size_t i = 0; i < val.size(); ++i) {
      pm[i] = cfg_.beta1 * pm[i] + (1.0 - cfg_.beta1) * g[i];
      pv[i] = cfg_.beta2 * pv[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = pm[i] / bc1;
      const double vhat = pv[i] / bc2;
      val[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
  zero_grad();
}

void Adam::zero_grad() {
  for (auto& [name, p] : params_) p.clear_grad();
}

}  // namespace hinimp
