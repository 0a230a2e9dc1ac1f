#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "seqvid/rng.hpp"

namespace seqvid {

// Dense row-major array of doubles. Values are expected to stay finite;
// the kernels below raise NumericError if they ever produce NaN/Inf.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t axis) const;
  bool empty() const { return data_.empty(); }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  std::string shape_str() const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // 2-D accessors.
  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  void fill(double v);

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

enum class ScalarFn { Sigmoid, Tanh, DSigmoidFromY, DTanhFromY };
enum class Reduction { Sum, L2Norm, Max, Min, Variance };

double sigmoid(double x);

// C = A * B for 2-D tensors, k-ascending accumulation per element so the
// summation order is fixed regardless of vectorization.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor transpose(const Tensor& a);

Tensor map(const Tensor& a, ScalarFn f);

// Entries i.i.d. uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)].
Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in,
                    Rng& rng);

double reduce(const Tensor& a, Reduction kind);

// Elementwise helpers used by the network code. These do not re-scan for
// finiteness; the module-level kernels above and the trainer do.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
void add_inplace(Tensor& a, const Tensor& b);
void axpy(double alpha, const Tensor& x, Tensor& y);  // y += alpha * x

// a is [rows x cols]; adds row vector v (length cols) to every row.
void add_row_broadcast(Tensor& a, const Tensor& v);
// a is [rows x cols]; multiplies every row elementwise by v (length cols).
void mul_row_broadcast(Tensor& a, const Tensor& v);
// Column sums of a [rows x cols] tensor, row index ascending.
Tensor colsum(const Tensor& a);

// For a [T x B x D] tensor, copies slice t as a [B x D] tensor.
Tensor time_slice(const Tensor& frames, std::size_t t);
// Stacks N equally-shaped [B x D] tensors into [N x B x D].
Tensor stack_slices(const std::vector<Tensor>& slices);
// Writes a [B x D] slice back into a [T x B x D] tensor.
void set_time_slice(Tensor& frames, std::size_t t, const Tensor& slice);

void ensure_finite(const Tensor& t, const char* what);

}  // namespace seqvid
