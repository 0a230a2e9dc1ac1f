#pragma once

#include <vector>

#include "seqvid/tensor.hpp"

namespace seqvid {

// Loss convention across the toolkit: sum over elements and time steps,
// mean over the batch. per_frame[t] holds the batch-mean loss of step t,
// total is the sum of per_frame, and grad_preact is d(total)/d(preactivation).
struct LossReport {
  double total = 0.0;
  Tensor per_frame;    // [T]
  Tensor grad_preact;  // same shape as the input logits/preds
};

// Binary cross entropy on logits z with targets in [0, 1]:
//   loss = -[t*log(sigmoid(z)) + (1-t)*log(1-sigmoid(z))]
// evaluated in the overflow-free form max(z,0) - z*t + log1p(exp(-|z|)).
// Accepts [D], [B x D] or [T x B x D] logits.
LossReport logistic_xent(const Tensor& logits, const Tensor& targets);

// Sum of squared differences, gradient 2*(p - t) (no 1/2 factor).
LossReport squared_loss(const Tensor& preds, const Tensor& targets);

// Row-wise softmax cross entropy via log-sum-exp. logits is [B x K] or
// [T x B x K]; labels has one class id per batch row, shared across steps.
LossReport softmax_xent(const Tensor& logits, const std::vector<int>& labels);

// Row-wise softmax probabilities of a [B x K] tensor.
Tensor softmax_rows(const Tensor& logits);

}  // namespace seqvid
