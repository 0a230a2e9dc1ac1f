#include "seqvid/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "seqvid/error.hpp"

namespace seqvid {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) {
    if (e == 0) throw DimensionError("tensor extent must be positive");
    n *= e;
  }
  return n;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         a.shape_str() + " vs " + b.shape_str());
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_product(shape_) != data_.size()) {
    throw DimensionError("tensor data length does not match shape " +
                         shape_str());
  }
}

std::size_t Tensor::extent(std::size_t axis) const {
  if (axis >= shape_.size()) throw DimensionError("tensor axis out of range");
  return shape_[axis];
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << "x";
    os << shape_[i];
  }
  os << "]";
  return os.str();
}

std::size_t Tensor::rows() const {
  if (ndim() != 2) throw DimensionError("rows(): tensor is not 2-D");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (ndim() != 2) throw DimensionError("cols(): tensor is not 2-D");
  return shape_[1];
}

double& Tensor::at(std::size_t r, std::size_t c) {
  return data_[r * cols() + c];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return data_[r * cols() + c];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void ensure_finite(const Tensor& t, const char* what) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i])) {
      throw NumericError(std::string(what) + ": non-finite value at index " +
                         std::to_string(i));
    }
  }
}

double sigmoid(double x) {
  // Split on sign to avoid overflow in exp for large |x|.
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2) {
    throw DimensionError("matmul: operands must be 2-D, got " + a.shape_str() +
                         " and " + b.shape_str());
  }
  const std::size_t m = a.extent(0), k = a.extent(1);
  if (b.extent(0) != k) {
    throw DimensionError("matmul: inner dimensions disagree, " +
                         a.shape_str() + " vs " + b.shape_str());
  }
  const std::size_t n = b.extent(1);
  Tensor c({m, n});
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = cp + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double aik = ap[i * k + kk];
      const double* brow = bp + kk * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
  ensure_finite(c, "matmul");
  return c;
}

Tensor transpose(const Tensor& a) {
  if (a.ndim() != 2) throw DimensionError("transpose: tensor is not 2-D");
  const std::size_t r = a.extent(0), c = a.extent(1);
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a[i * c + j];
  return out;
}

Tensor map(const Tensor& a, ScalarFn f) {
  Tensor out(a.shape());
  const double* in = a.data();
  double* o = out.data();
  const std::size_t n = a.size();
  switch (f) {
    case ScalarFn::Sigmoid:
      for (std::size_t i = 0; i < n; ++i) o[i] = sigmoid(in[i]);
      break;
    case ScalarFn::Tanh:
      for (std::size_t i = 0; i < n; ++i) o[i] = std::tanh(in[i]);
      break;
    case ScalarFn::DSigmoidFromY:
      for (std::size_t i = 0; i < n; ++i) o[i] = in[i] * (1.0 - in[i]);
      break;
    case ScalarFn::DTanhFromY:
      for (std::size_t i = 0; i < n; ++i) o[i] = 1.0 - in[i] * in[i];
      break;
  }
  ensure_finite(out, "map");
  return out;
}

Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in,
                    Rng& rng) {
  if (fan_in == 0) throw ParameterError("uniform_init: fan_in must be >= 1");
  Tensor out(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = rng.uniform(-bound, bound);
  return out;
}

double reduce(const Tensor& a, Reduction kind) {
  if (a.empty()) throw DimensionError("reduce: empty tensor");
  const double* p = a.data();
  const std::size_t n = a.size();
  double acc = 0.0;
  switch (kind) {
    case Reduction::Sum:
      for (std::size_t i = 0; i < n; ++i) acc += p[i];
      break;
    case Reduction::L2Norm:
      for (std::size_t i = 0; i < n; ++i) acc += p[i] * p[i];
      acc = std::sqrt(acc);
      break;
    case Reduction::Max:
      acc = p[0];
      for (std::size_t i = 1; i < n; ++i) acc = std::max(acc, p[i]);
      break;
    case Reduction::Min:
      acc = p[0];
      for (std::size_t i = 1; i < n; ++i) acc = std::min(acc, p[i]);
      break;
    case Reduction::Variance: {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += p[i];
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = p[i] - mean;
        acc += d * d;
      }
      acc /= static_cast<double>(n);
      break;
    }
  }
  if (!std::isfinite(acc)) throw NumericError("reduce: non-finite result");
  return acc;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
  return out;
}

void add_inplace(Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add_inplace");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

void axpy(double alpha, const Tensor& x, Tensor& y) {
  require_same_shape(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void add_row_broadcast(Tensor& a, const Tensor& v) {
  const std::size_t r = a.rows(), c = a.cols();
  if (v.size() != c) {
    throw DimensionError("add_row_broadcast: vector length " +
                         std::to_string(v.size()) + " vs cols " +
                         std::to_string(c));
  }
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) a[i * c + j] += v[j];
}

void mul_row_broadcast(Tensor& a, const Tensor& v) {
  const std::size_t r = a.rows(), c = a.cols();
  if (v.size() != c) {
    throw DimensionError("mul_row_broadcast: vector length " +
                         std::to_string(v.size()) + " vs cols " +
                         std::to_string(c));
  }
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) a[i * c + j] *= v[j];
}

Tensor colsum(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out({c});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j] += a[i * c + j];
  return out;
}

Tensor time_slice(const Tensor& frames, std::size_t t) {
  if (frames.ndim() != 3) throw DimensionError("time_slice: tensor not 3-D");
  const std::size_t T = frames.extent(0), b = frames.extent(1),
                    d = frames.extent(2);
  if (t >= T) throw DimensionError("time_slice: index out of range");
  Tensor out({b, d});
  const double* src = frames.data() + t * b * d;
  std::copy(src, src + b * d, out.data());
  return out;
}

Tensor stack_slices(const std::vector<Tensor>& slices) {
  if (slices.empty()) throw DimensionError("stack_slices: empty input");
  const std::size_t b = slices[0].rows(), d = slices[0].cols();
  Tensor out({slices.size(), b, d});
  for (std::size_t n = 0; n < slices.size(); ++n) {
    if (!slices[n].same_shape(slices[0])) {
      throw DimensionError("stack_slices: ragged slices");
    }
    std::copy(slices[n].data(), slices[n].data() + b * d,
              out.data() + n * b * d);
  }
  return out;
}

void set_time_slice(Tensor& frames, std::size_t t, const Tensor& slice) {
  if (frames.ndim() != 3) throw DimensionError("set_time_slice: not 3-D");
  const std::size_t T = frames.extent(0), b = frames.extent(1),
                    d = frames.extent(2);
  if (t >= T || slice.size() != b * d) {
    throw DimensionError("set_time_slice: bad index or slice shape");
  }
  std::copy(slice.data(), slice.data() + b * d, frames.data() + t * b * d);
}

}  // namespace seqvid
