#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hinimp {

namespace detail {
struct TensorNode;
}

// Dense f64 tensor participating in reverse-mode differentiation. Value
// semantics on the handle; the buffer is shared. Every op below records a
// backward rule; backward(loss) fills .grad() of each requires-grad leaf.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int64_t> shape, bool requires_grad = false);
  static Tensor from(std::vector<int64_t> shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(p_); }
  const std::vector<int64_t>& shape() const;
  int64_t numel() const;
  int64_t rows() const;  // 2-D
  int64_t cols() const;  // 2-D
  bool requires_grad() const;

  std::vector<double>& data();
  const std::vector<double>& data() const;
  std::vector<double>& grad();              // allocated (zeroed) on first access
  bool has_grad() const;
  void clear_grad();

  double value() const;  // scalar tensors
  double at(int64_t r, int64_t c) const;

  std::string shape_str() const;

  const std::shared_ptr<detail::TensorNode>& ptr() const { return p_; }
  static Tensor wrap(std::shared_ptr<detail::TensorNode> p);

 private:
  std::shared_ptr<detail::TensorNode> p_;
};

// --- ops -------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);             // [n,k]x[k,m] -> [n,m]
Tensor add(const Tensor& a, const Tensor& b);                // same shape, or b scalar
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);                // elementwise, same shape
Tensor mul_scalar(const Tensor& a, const Tensor& s);         // s is a scalar tensor
Tensor scalar_mul(const Tensor& a, double c);                // constant scale
Tensor tanh_op(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor square(const Tensor& a);
Tensor softmax_last(const Tensor& a);                        // rows of 2-D, or the whole 1-D vector
Tensor concat_last(const std::vector<Tensor>& parts);        // 1-D concat / 2-D column concat
Tensor gather(const Tensor& a, std::vector<int64_t> idx);    // 1-D; backward scatter-adds
Tensor gather_rows(const Tensor& a, std::vector<int64_t> idx);
Tensor scatter_add_rows(const Tensor& a, std::vector<int64_t> idx, int64_t n_rows);
Tensor scale_rows(const Tensor& a, const Tensor& w);         // [n,m] scaled per-row by w[n]
Tensor repeat_row(const Tensor& v, int64_t n);               // [m] -> [n,m]
Tensor sum_last(const Tensor& a);                            // [n,m] -> [n]
Tensor slice_cols(const Tensor& a, int64_t col0, int64_t width);
Tensor dot(const Tensor& a, const Tensor& b);                // 1-D -> scalar
Tensor sum(const Tensor& a);                                 // -> scalar
Tensor mean(const Tensor& a);                                // -> scalar
Tensor reshape(const Tensor& a, std::vector<int64_t> shape);
Tensor stack_scalars(const std::vector<Tensor>& xs);         // k scalars -> [k]

// Softmax within contiguous segments of a 1-D tensor; offsets has n_seg+1
// entries, empty segments allowed.
Tensor segment_softmax(const Tensor& logits, std::vector<int64_t> offsets);

// Row-wise ascending stable sort; the permutation is a constant of the
// forward pass, gradients flow to the gathered entries.
Tensor sort_rows(const Tensor& a);

// out[r][j] = a[r][perm[j]] with one constant permutation for every row.
Tensor permute_cols(const Tensor& a, std::vector<int64_t> perm);

// Populates grads of every requires-grad tensor reachable from loss.
// Throws NumericError if called twice on the same loss node.
void backward(const Tensor& loss);

// --- optimizer ---------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  void add_param(const std::string& name, const Tensor& p);
  int64_t step_count() const { return t_; }

  // Bias-corrected update from accumulated grads; clears grads afterwards.
  // Throws NumericError naming the parameter when a grad contains NaN.
  void step();
  void zero_grad();

  const std::vector<std::pair<std::string, Tensor>>& params() const { return params_; }

 private:
  AdamConfig cfg_;
  int64_t t_ = 0;
  std::vector<std::pair<std::string, Tensor>> params_;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace hinimp
