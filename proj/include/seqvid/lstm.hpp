#pragma once

#include <functional>
#include <string>

#include "seqvid/tensor.hpp"

namespace seqvid {

// One LSTM layer with diagonal peephole connections.
//
// Step equations (batch rows, elementwise unless a matrix product):
//   i_t = sigmoid(W_xi x_t + W_hi h_{t-1} + p_ci . c_{t-1} + b_i)
//   f_t = sigmoid(W_xf x_t + W_hf h_{t-1} + p_cf . c_{t-1} + b_f)
//   g_t = tanh   (W_xc x_t + W_hc h_{t-1}                  + b_c)
//   c_t = f_t . c_{t-1} + i_t . g_t
//   o_t = sigmoid(W_xo x_t + W_ho h_{t-1} + p_co . c_t     + b_o)
//   h_t = o_t . tanh(c_t)
// The output gate peeps at the updated cell c_t, so the backward pass
// routes gradient from o_t into c_t.
struct LstmParams {
  Tensor w_xi, w_xf, w_xc, w_xo;  // [hidden x input]
  Tensor w_hi, w_hf, w_hc, w_ho;  // [hidden x hidden]
  Tensor p_ci, p_cf, p_co;        // peephole vectors [hidden]
  Tensor b_i, b_f, b_c, b_o;      // [hidden]

  std::size_t input_dim() const { return w_xi.extent(1); }
  std::size_t hidden_dim() const { return w_xi.extent(0); }
  std::size_t param_count() const;

  static LstmParams zeros(std::size_t input_dim, std::size_t hidden_dim);

  // Visits tensors in a fixed order (serialization and update order).
  void for_each(const std::function<void(const char*, Tensor&)>& fn);
  void for_each(
      const std::function<void(const char*, const Tensor&)>& fn) const;
};

// Dense matrices from uniform_init with fan_in = column count; biases and
// peepholes zero.
LstmParams lstm_params_init(std::size_t input_dim, std::size_t hidden_dim,
                            Rng& rng);

// Transposed copies of the dense weights, recomputed once per sequence so
// the forward products run on the fast row-major kernel.
struct LstmParamsT {
  Tensor w_xi_t, w_xf_t, w_xc_t, w_xo_t;  // [input x hidden]
  Tensor w_hi_t, w_hf_t, w_hc_t, w_ho_t;  // [hidden x hidden]
};
LstmParamsT transpose_params(const LstmParams& p);

struct LstmState {
  Tensor h;  // [batch x hidden]
  Tensor c;  // [batch x hidden]
  static LstmState zeros(std::size_t batch, std::size_t hidden);
};

// Activations saved by the forward step for the backward pass. x is empty
// for zero-input steps (unconditioned decoding), where the W_x* products
// vanish identically.
struct StepCache {
  Tensor x;
  Tensor h_prev, c_prev;
  Tensor i, f, g, c, o;
  bool has_input() const { return !x.empty(); }
};

// x may be nullptr for a zero frame input. Fills *cache when non-null.
LstmState lstm_step_forward(const LstmParams& p, const LstmParamsT& pt,
                            const Tensor* x, const LstmState& prev,
                            StepCache* cache);
// Convenience overload that transposes internally.
LstmState lstm_step_forward(const LstmParams& p, const Tensor* x,
                            const LstmState& prev, StepCache* cache);

// Exact adjoint of lstm_step_forward. Accumulates parameter gradients into
// grad_params; writes input/previous-state gradients. dx_out may be nullptr
// when the gradient w.r.t. x is not needed (data inputs, zero inputs).
void lstm_step_backward(const LstmParams& p, const StepCache& cache,
                        const Tensor& grad_h, const Tensor& grad_c_in,
                        LstmParams& grad_params, Tensor* dx_out,
                        Tensor& dh_prev_out, Tensor& dc_prev_out);

}  // namespace seqvid
