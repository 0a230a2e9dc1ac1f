#include "seqvid/objectives.hpp"

#include <cmath>
#include <string>

#include "seqvid/error.hpp"

namespace seqvid {

namespace {

// Normalizes [D] / [B x D] / [T x B x D] to (T, B, D) extents.
struct Dims {
  std::size_t t, b, d;
};

Dims loss_dims(const Tensor& x, const char* op) {
  switch (x.ndim()) {
    case 1:
      return {1, 1, x.extent(0)};
    case 2:
      return {1, x.extent(0), x.extent(1)};
    case 3:
      return {x.extent(0), x.extent(1), x.extent(2)};
    default:
      throw DimensionError(std::string(op) + ": expected 1-3 dims, got " +
                           x.shape_str());
  }
}

}  // namespace

LossReport logistic_xent(const Tensor& logits, const Tensor& targets) {
  if (!logits.same_shape(targets)) {
    throw DimensionError("logistic_xent: logits " + logits.shape_str() +
                         " vs targets " + targets.shape_str());
  }
  const Dims dm = loss_dims(logits, "logistic_xent");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double t = targets[i];
    if (!(t >= 0.0 && t <= 1.0)) {
      throw DataError("logistic_xent: target outside [0,1]: " +
                      std::to_string(t));
    }
  }
  LossReport rep;
  rep.per_frame = Tensor({dm.t});
  rep.grad_preact = Tensor(logits.shape());
  const double inv_b = 1.0 / static_cast<double>(dm.b);
  for (std::size_t t = 0; t < dm.t; ++t) {
    double frame = 0.0;
    for (std::size_t i = t * dm.b * dm.d; i < (t + 1) * dm.b * dm.d; ++i) {
      const double z = logits[i];
      const double y = targets[i];
      frame += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
      rep.grad_preact[i] = (sigmoid(z) - y) * inv_b;
    }
    rep.per_frame[t] = frame * inv_b;
    rep.total += rep.per_frame[t];
  }
  if (!std::isfinite(rep.total)) {
    throw NumericError("logistic_xent: non-finite loss");
  }
  return rep;
}

LossReport squared_loss(const Tensor& preds, const Tensor& targets) {
  if (!preds.same_shape(targets)) {
    throw DimensionError("squared_loss: preds " + preds.shape_str() +
                         " vs targets " + targets.shape_str());
  }
  const Dims dm = loss_dims(preds, "squared_loss");
  LossReport rep;
  rep.per_frame = Tensor({dm.t});
  rep.grad_preact = Tensor(preds.shape());
  const double inv_b = 1.0 / static_cast<double>(dm.b);
  for (std::size_t t = 0; t < dm.t; ++t) {
    double frame = 0.0;
    for (std::size_t i = t * dm.b * dm.d; i < (t + 1) * dm.b * dm.d; ++i) {
      const double e = preds[i] - targets[i];
      frame += e * e;
      rep.grad_preact[i] = 2.0 * e * inv_b;
    }
    rep.per_frame[t] = frame * inv_b;
    rep.total += rep.per_frame[t];
  }
  if (!std::isfinite(rep.total)) {
    throw NumericError("squared_loss: non-finite loss");
  }
  return rep;
}

LossReport softmax_xent(const Tensor& logits, const std::vector<int>& labels) {
  const Dims dm = loss_dims(logits, "softmax_xent");
  if (labels.size() != dm.b) {
    throw DimensionError("softmax_xent: " + std::to_string(labels.size()) +
                         " labels for batch of " + std::to_string(dm.b));
  }
  for (int lbl : labels) {
    if (lbl < 0 || static_cast<std::size_t>(lbl) >= dm.d) {
      throw DataError("softmax_xent: label " + std::to_string(lbl) +
                      " out of range [0," + std::to_string(dm.d) + ")");
    }
  }
  LossReport rep;
  rep.per_frame = Tensor({dm.t});
  rep.grad_preact = Tensor(logits.shape());
  const double inv_b = 1.0 / static_cast<double>(dm.b);
  for (std::size_t t = 0; t < dm.t; ++t) {
    double frame = 0.0;
    for (std::size_t b = 0; b < dm.b; ++b) {
      const double* z = logits.data() + (t * dm.b + b) * dm.d;
      double* g = rep.grad_preact.data() + (t * dm.b + b) * dm.d;
      double zmax = z[0];
      for (std::size_t k = 1; k < dm.d; ++k) zmax = std::max(zmax, z[k]);
      double sum = 0.0;
      for (std::size_t k = 0; k < dm.d; ++k) sum += std::exp(z[k] - zmax);
      const double lse = zmax + std::log(sum);
      frame += lse - z[labels[b]];
      for (std::size_t k = 0; k < dm.d; ++k)
        g[k] = std::exp(z[k] - lse) * inv_b;
      g[labels[b]] -= inv_b;
    }
    rep.per_frame[t] = frame * inv_b;
    rep.total += rep.per_frame[t];
  }
  if (!std::isfinite(rep.total)) {
    throw NumericError("softmax_xent: non-finite loss");
  }
  return rep;
}

Tensor softmax_rows(const Tensor& logits) {
  const std::size_t b = logits.rows(), k = logits.cols();
  Tensor out({b, k});
  for (std::size_t r = 0; r < b; ++r) {
    const double* z = logits.data() + r * k;
    double* p = out.data() + r * k;
    double zmax = z[0];
    for (std::size_t j = 1; j < k; ++j) zmax = std::max(zmax, z[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      p[j] = std::exp(z[j] - zmax);
      sum += p[j];
    }
    for (std::size_t j = 0; j < k; ++j) p[j] /= sum;
  }
  return out;
}

}  // namespace seqvid
