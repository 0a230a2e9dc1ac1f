#include "seqvid/lstm.hpp"

#include <cmath>

#include "seqvid/error.hpp"

namespace seqvid {

std::size_t LstmParams::param_count() const {
  std::size_t n = 0;
  for_each([&](const char*, const Tensor& t) { n += t.size(); });
  return n;
}

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  LstmParams p;
  p.w_xi = Tensor({hidden_dim, input_dim});
  p.w_xf = Tensor({hidden_dim, input_dim});
  p.w_xc = Tensor({hidden_dim, input_dim});
  p.w_xo = Tensor({hidden_dim, input_dim});
  p.w_hi = Tensor({hidden_dim, hidden_dim});
  p.w_hf = Tensor({hidden_dim, hidden_dim});
  p.w_hc = Tensor({hidden_dim, hidden_dim});
  p.w_ho = Tensor({hidden_dim, hidden_dim});
  p.p_ci = Tensor({hidden_dim});
  p.p_cf = Tensor({hidden_dim});
  p.p_co = Tensor({hidden_dim});
  p.b_i = Tensor({hidden_dim});
  p.b_f = Tensor({hidden_dim});
  p.b_c = Tensor({hidden_dim});
  p.b_o = Tensor({hidden_dim});
  return p;
}

void LstmParams::for_each(
    const std::function<void(const char*, Tensor&)>& fn) {
  fn("w_xi", w_xi);
  fn("w_xf", w_xf);
  fn("w_xc", w_xc);
  fn("w_xo", w_xo);
  fn("w_hi", w_hi);
  fn("w_hf", w_hf);
  fn("w_hc", w_hc);
  fn("w_ho", w_ho);
  fn("p_ci", p_ci);
  fn("p_cf", p_cf);
  fn("p_co", p_co);
  fn("b_i", b_i);
  fn("b_f", b_f);
  fn("b_c", b_c);
  fn("b_o", b_o);
}

void LstmParams::for_each(
    const std::function<void(const char*, const Tensor&)>& fn) const {
  const_cast<LstmParams*>(this)->for_each(
      [&](const char* name, Tensor& t) { fn(name, t); });
}

LstmParams lstm_params_init(std::size_t input_dim, std::size_t hidden_dim,
                            Rng& rng) {
  if (input_dim == 0 || hidden_dim == 0) {
    throw ParameterError("lstm_params_init: dimensions must be >= 1");
  }
  LstmParams p = LstmParams::zeros(input_dim, hidden_dim);
  // Draw order is fixed; biases and peepholes stay zero.
  p.w_xi = uniform_init({hidden_dim, input_dim}, input_dim, rng);
  p.w_xf = uniform_init({hidden_dim, input_dim}, input_dim, rng);
  p.w_xc = uniform_init({hidden_dim, input_dim}, input_dim, rng);
  p.w_xo = uniform_init({hidden_dim, input_dim}, input_dim, rng);
  p.w_hi = uniform_init({hidden_dim, hidden_dim}, hidden_dim, rng);
  p.w_hf = uniform_init({hidden_dim, hidden_dim}, hidden_dim, rng);
  p.w_hc = uniform_init({hidden_dim, hidden_dim}, hidden_dim, rng);
  p.w_ho = uniform_init({hidden_dim, hidden_dim}, hidden_dim, rng);
  return p;
}

LstmParamsT transpose_params(const LstmParams& p) {
  LstmParamsT t;
  t.w_xi_t = transpose(p.w_xi);
  t.w_xf_t = transpose(p.w_xf);
  t.w_xc_t = transpose(p.w_xc);
  t.w_xo_t = transpose(p.w_xo);
  t.w_hi_t = transpose(p.w_hi);
  t.w_hf_t = transpose(p.w_hf);
  t.w_hc_t = transpose(p.w_hc);
  t.w_ho_t = transpose(p.w_ho);
  return t;
}

LstmState LstmState::zeros(std::size_t batch, std::size_t hidden) {
  return {Tensor({batch, hidden}), Tensor({batch, hidden})};
}

namespace {

void check_step_shapes(const LstmParams& p, const Tensor* x,
                       const LstmState& prev) {
  const std::size_t batch = prev.h.rows();
  if (prev.h.cols() != p.hidden_dim() || prev.c.cols() != p.hidden_dim() ||
      prev.c.rows() != batch) {
    throw DimensionError("lstm_step_forward: state shape mismatch");
  }
  if (x != nullptr && (x->ndim() != 2 || x->cols() != p.input_dim() ||
                       x->rows() != batch)) {
    throw DimensionError("lstm_step_forward: input shape " + x->shape_str() +
                         " incompatible with layer");
  }
}

}  // namespace

LstmState lstm_step_forward(const LstmParams& p, const LstmParamsT& pt,
                            const Tensor* x, const LstmState& prev,
                            StepCache* cache) {
  check_step_shapes(p, x, prev);

  Tensor ai = matmul(prev.h, pt.w_hi_t);
  Tensor af = matmul(prev.h, pt.w_hf_t);
  Tensor ag = matmul(prev.h, pt.w_hc_t);
  Tensor ao = matmul(prev.h, pt.w_ho_t);
  if (x != nullptr) {
    add_inplace(ai, matmul(*x, pt.w_xi_t));
    add_inplace(af, matmul(*x, pt.w_xf_t));
    add_inplace(ag, matmul(*x, pt.w_xc_t));
    add_inplace(ao, matmul(*x, pt.w_xo_t));
  }
  // Peepholes: i and f read the previous cell, o reads the updated cell.
  Tensor peep_i = prev.c;
  mul_row_broadcast(peep_i, p.p_ci);
  add_inplace(ai, peep_i);
  Tensor peep_f = prev.c;
  mul_row_broadcast(peep_f, p.p_cf);
  add_inplace(af, peep_f);
  add_row_broadcast(ai, p.b_i);
  add_row_broadcast(af, p.b_f);
  add_row_broadcast(ag, p.b_c);

  const Tensor i = map(ai, ScalarFn::Sigmoid);
  const Tensor f = map(af, ScalarFn::Sigmoid);
  const Tensor g = map(ag, ScalarFn::Tanh);
  const Tensor c = add(hadamard(f, prev.c), hadamard(i, g));

  Tensor peep_o = c;
  mul_row_broadcast(peep_o, p.p_co);
  add_inplace(ao, peep_o);
  add_row_broadcast(ao, p.b_o);
  const Tensor o = map(ao, ScalarFn::Sigmoid);
  const Tensor h = hadamard(o, map(c, ScalarFn::Tanh));

  if (cache != nullptr) {
    cache->x = (x != nullptr) ? *x : Tensor();
    cache->h_prev = prev.h;
    cache->c_prev = prev.c;
    cache->i = i;
    cache->f = f;
    cache->g = g;
    cache->c = c;
    cache->o = o;
  }
  return {h, c};
}

LstmState lstm_step_forward(const LstmParams& p, const Tensor* x,
                            const LstmState& prev, StepCache* cache) {
  return lstm_step_forward(p, transpose_params(p), x, prev, cache);
}

void lstm_step_backward(const LstmParams& p, const StepCache& cache,
                        const Tensor& grad_h, const Tensor& grad_c_in,
                        LstmParams& grad_params, Tensor* dx_out,
                        Tensor& dh_prev_out, Tensor& dc_prev_out) {
  if (!grad_h.same_shape(cache.c) || !grad_c_in.same_shape(cache.c)) {
    throw DimensionError("lstm_step_backward: gradient shape mismatch");
  }
  const Tensor tc = map(cache.c, ScalarFn::Tanh);

  // Output gate first: its pre-activation feeds gradient back into c_t
  // through the p_co peephole.
  Tensor dao = hadamard(hadamard(grad_h, tc), map(cache.o, ScalarFn::DSigmoidFromY));

  Tensor dc = hadamard(hadamard(grad_h, cache.o), map(tc, ScalarFn::DTanhFromY));
  add_inplace(dc, grad_c_in);
  Tensor dao_peep = dao;
  mul_row_broadcast(dao_peep, p.p_co);
  add_inplace(dc, dao_peep);

  Tensor dai = hadamard(hadamard(dc, cache.g), map(cache.i, ScalarFn::DSigmoidFromY));
  Tensor daf = hadamard(hadamard(dc, cache.c_prev), map(cache.f, ScalarFn::DSigmoidFromY));
  Tensor dag = hadamard(hadamard(dc, cache.i), map(cache.g, ScalarFn::DTanhFromY));

  // Previous cell: through the forget path and the i/f peepholes.
  dc_prev_out = hadamard(dc, cache.f);
  Tensor dai_peep = dai;
  mul_row_broadcast(dai_peep, p.p_ci);
  add_inplace(dc_prev_out, dai_peep);
  Tensor daf_peep = daf;
  mul_row_broadcast(daf_peep, p.p_cf);
  add_inplace(dc_prev_out, daf_peep);

  dh_prev_out = matmul(dai, p.w_hi);
  add_inplace(dh_prev_out, matmul(daf, p.w_hf));
  add_inplace(dh_prev_out, matmul(dag, p.w_hc));
  add_inplace(dh_prev_out, matmul(dao, p.w_ho));

  if (dx_out != nullptr) {
    if (!cache.has_input()) {
      throw UsageError("lstm_step_backward: dx requested for zero-input step");
    }
    *dx_out = matmul(dai, p.w_xi);
    add_inplace(*dx_out, matmul(daf, p.w_xf));
    add_inplace(*dx_out, matmul(dag, p.w_xc));
    add_inplace(*dx_out, matmul(dao, p.w_xo));
  }

  const Tensor dai_t = transpose(dai);
  const Tensor daf_t = transpose(daf);
  const Tensor dag_t = transpose(dag);
  const Tensor dao_t = transpose(dao);
  if (cache.has_input()) {
    add_inplace(grad_params.w_xi, matmul(dai_t, cache.x));
    add_inplace(grad_params.w_xf, matmul(daf_t, cache.x));
    add_inplace(grad_params.w_xc, matmul(dag_t, cache.x));
    add_inplace(grad_params.w_xo, matmul(dao_t, cache.x));
  }
  add_inplace(grad_params.w_hi, matmul(dai_t, cache.h_prev));
  add_inplace(grad_params.w_hf, matmul(daf_t, cache.h_prev));
  add_inplace(grad_params.w_hc, matmul(dag_t, cache.h_prev));
  add_inplace(grad_params.w_ho, matmul(dao_t, cache.h_prev));

  add_inplace(grad_params.p_ci, colsum(hadamard(dai, cache.c_prev)));
  add_inplace(grad_params.p_cf, colsum(hadamard(daf, cache.c_prev)));
  add_inplace(grad_params.p_co, colsum(hadamard(dao, cache.c)));

  add_inplace(grad_params.b_i, colsum(dai));
  add_inplace(grad_params.b_f, colsum(daf));
  add_inplace(grad_params.b_c, colsum(dag));
  add_inplace(grad_params.b_o, colsum(dao));
}

}  // namespace seqvid
