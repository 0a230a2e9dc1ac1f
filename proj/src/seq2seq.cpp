#include "seqvid/seq2seq.hpp"

#include <cmath>

#include "seqvid/error.hpp"

namespace seqvid {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Autoencoder:
      return "autoencoder";
    case Variant::FuturePredictor:
      return "future_predictor";
    case Variant::Composite:
      return "composite";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  if (name == "autoencoder") return Variant::Autoencoder;
  if (name == "future_predictor") return Variant::FuturePredictor;
  if (name == "composite") return Variant::Composite;
  throw ParameterError("unknown variant: " + name);
}

void ModelSpec::validate() const {
  if (layers == 0) throw ParameterError("ModelSpec: layers must be >= 1");
  if (hidden_dim == 0 || input_dim == 0) {
    throw ParameterError("ModelSpec: dimensions must be >= 1");
  }
  if (t_in == 0) throw ParameterError("ModelSpec: T_in must be >= 1");
  if (variant == Variant::FuturePredictor && t_future == 0) {
    throw ParameterError("ModelSpec: future predictor needs T_future >= 1");
  }
}

namespace {

std::vector<LstmParams> build_stack(const ModelSpec& spec, Rng parent,
                                    const char* component) {
  std::vector<LstmParams> stack;
  stack.reserve(spec.layers);
  for (std::size_t l = 0; l < spec.layers; ++l) {
    Rng layer_rng = parent.split(stream_tag("layer") + l);
    const std::size_t in = (l == 0) ? spec.input_dim : spec.hidden_dim;
    stack.push_back(lstm_params_init(in, spec.hidden_dim, layer_rng));
  }
  (void)component;
  return stack;
}

Readout build_readout(const ModelSpec& spec, Rng rng) {
  Readout r;
  r.w = uniform_init({spec.input_dim, spec.hidden_dim}, spec.hidden_dim, rng);
  r.b = Tensor({spec.input_dim});
  return r;
}

const std::vector<LstmParams>& branch_stack(const Model& m, Branch b) {
  return b == Branch::Recon ? m.recon_decoder : m.future_decoder;
}

const Readout& branch_readout(const Model& m, Branch b) {
  return b == Branch::Recon ? m.readout_recon : m.readout_future;
}

bool branch_conditional(const ModelSpec& spec, Branch b) {
  return b == Branch::Recon ? spec.conditional_recon : spec.conditional_future;
}

Tensor apply_output_unit(const ModelSpec& spec, const Tensor& preact) {
  return spec.output_unit == OutputUnit::Logistic
             ? map(preact, ScalarFn::Sigmoid)
             : preact;
}

}  // namespace

Model model_build(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  Model m;
  m.spec = spec;
  // Each component draws from its own child stream, so e.g. the encoder of
  // a composite model is bit-identical to the encoder of an autoencoder
  // built from the same seed.
  m.encoder = build_stack(spec, rng.split("encoder"), "encoder");
  if (spec.has_recon()) {
    m.recon_decoder = build_stack(spec, rng.split("decoder_recon"), "recon");
    m.readout_recon = build_readout(spec, rng.split("readout_recon"));
  }
  if (spec.has_future()) {
    m.future_decoder =
        build_stack(spec, rng.split("decoder_future"), "future");
    m.readout_future = build_readout(spec, rng.split("readout_future"));
  }
  return m;
}

std::size_t Model::param_count() const {
  std::size_t n = 0;
  for_each_param([&](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

void Model::for_each_param(
    const std::function<void(const std::string&, Tensor&)>& fn) {
  auto visit_stack = [&](std::vector<LstmParams>& stack, const char* name) {
    for (std::size_t l = 0; l < stack.size(); ++l) {
      stack[l].for_each([&](const char* tname, Tensor& t) {
        fn(std::string(name) + "/" + std::to_string(l) + "/" + tname, t);
      });
    }
  };
  visit_stack(encoder, "encoder");
  visit_stack(recon_decoder, "decoder_recon");
  if (!recon_decoder.empty()) {
    fn("readout_recon/w", readout_recon.w);
    fn("readout_recon/b", readout_recon.b);
  }
  visit_stack(future_decoder, "decoder_future");
  if (!future_decoder.empty()) {
    fn("readout_future/w", readout_future.w);
    fn("readout_future/b", readout_future.b);
  }
}

void Model::for_each_param(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
  const_cast<Model*>(this)->for_each_param(
      [&](const std::string& name, Tensor& t) { fn(name, t); });
}

Gradients zeros_like(const Model& m) {
  Gradients g;
  g.spec = m.spec;
  auto zero_stack = [&](const std::vector<LstmParams>& src) {
    std::vector<LstmParams> out;
    out.reserve(src.size());
    for (const auto& p : src)
      out.push_back(LstmParams::zeros(p.input_dim(), p.hidden_dim()));
    return out;
  };
  g.encoder = zero_stack(m.encoder);
  g.recon_decoder = zero_stack(m.recon_decoder);
  g.future_decoder = zero_stack(m.future_decoder);
  if (!m.recon_decoder.empty()) {
    g.readout_recon.w = Tensor(m.readout_recon.w.shape());
    g.readout_recon.b = Tensor(m.readout_recon.b.shape());
  }
  if (!m.future_decoder.empty()) {
    g.readout_future.w = Tensor(m.readout_future.w.shape());
    g.readout_future.b = Tensor(m.readout_future.b.shape());
  }
  return g;
}

Tensor reverse_time(const Tensor& frames) {
  if (frames.ndim() != 3) throw DimensionError("reverse_time: not 3-D");
  const std::size_t T = frames.extent(0);
  Tensor out(frames.shape());
  for (std::size_t t = 0; t < T; ++t)
    set_time_slice(out, t, time_slice(frames, T - 1 - t));
  return out;
}

EncodeResult encode(const Model& m, const Tensor& frames) {
  if (frames.ndim() != 3 || frames.extent(2) != m.spec.input_dim) {
    throw DimensionError("encode: frames must be [T x B x D] with D = " +
                         std::to_string(m.spec.input_dim));
  }
  const std::size_t T = frames.extent(0);
  const std::size_t batch = frames.extent(1);
  if (T < 1) throw DimensionError("encode: T_in must be >= 1");

  std::vector<LstmParamsT> pt;
  pt.reserve(m.encoder.size());
  for (const auto& p : m.encoder) pt.push_back(transpose_params(p));

  EncodeResult res;
  res.final_states.assign(m.encoder.size(),
                          LstmState::zeros(batch, m.spec.hidden_dim));
  res.caches.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    res.caches[t].resize(m.encoder.size());
    Tensor x = time_slice(frames, t);
    for (std::size_t l = 0; l < m.encoder.size(); ++l) {
      const Tensor& input = (l == 0) ? x : res.final_states[l - 1].h;
      res.final_states[l] =
          lstm_step_forward(m.encoder[l], pt[l], &input, res.final_states[l],
                            &res.caches[t][l]);
    }
  }
  return res;
}

DecodeResult decode(const Model& m, Branch branch,
                    const std::vector<LstmState>& init, std::size_t t_out,
                    const Tensor* teacher, RunMode mode) {
  const auto& stack = branch_stack(m, branch);
  if (stack.empty()) {
    throw UsageError("decode: model has no " +
                     std::string(branch == Branch::Recon ? "reconstruction"
                                                         : "future") +
                     " decoder");
  }
  if (init.size() != stack.size()) {
    throw DimensionError("decode: init state count != layer count");
  }
  const bool conditional = branch_conditional(m.spec, branch);
  if (conditional && mode == RunMode::Train && t_out > 1 &&
      teacher == nullptr) {
    throw UsageError("decode: conditional decoder needs a teacher in train mode");
  }
  if (teacher != nullptr &&
      (teacher->ndim() != 3 || teacher->extent(0) < t_out)) {
    throw DimensionError("decode: teacher shape mismatch");
  }

  std::vector<LstmParamsT> pt;
  pt.reserve(stack.size());
  for (const auto& p : stack) pt.push_back(transpose_params(p));
  const Readout& readout = branch_readout(m, branch);
  const Tensor w_r_t = transpose(readout.w);

  DecodeResult res;
  res.caches.resize(t_out);
  std::vector<LstmState> states = init;
  for (std::size_t t = 0; t < t_out; ++t) {
    res.caches[t].resize(stack.size());
    const Tensor* frame_input = nullptr;
    Tensor held;
    if (t >= 1 && conditional) {
      held = (mode == RunMode::Train) ? time_slice(*teacher, t - 1)
                                      : res.frames[t - 1];
      frame_input = &held;
    }
    for (std::size_t l = 0; l < stack.size(); ++l) {
      const Tensor* input = (l == 0) ? frame_input : &states[l - 1].h;
      states[l] = lstm_step_forward(stack[l], pt[l], input, states[l],
                                    &res.caches[t][l]);
    }
    Tensor preact = matmul(states.back().h, w_r_t);
    add_row_broadcast(preact, readout.b);
    res.frames.push_back(apply_output_unit(m.spec, preact));
    res.preacts.push_back(std::move(preact));
  }
  return res;
}

namespace {

BranchResult run_branch(const Model& m, Branch branch,
                        const std::vector<LstmState>& rep,
                        const Tensor& targets, RunMode mode) {
  BranchResult br;
  br.targets = targets;
  const std::size_t t_out = targets.extent(0);
  br.dec = decode(m, branch, rep, t_out, &targets, mode);
  const Tensor preacts = stack_slices(br.dec.preacts);
  br.loss = (m.spec.output_unit == OutputUnit::Logistic)
                ? logistic_xent(preacts, targets)
                : squared_loss(preacts, targets);
  return br;
}

}  // namespace

ForwardTrace composite_forward(const Model& m, const Tensor& frames_in,
                               const Tensor& frames_future, RunMode mode) {
  const std::size_t t_future = m.spec.future_len();
  if (m.spec.has_future() && t_future > 0) {
    if (frames_future.ndim() != 3 || frames_future.extent(0) != t_future) {
      throw DimensionError("composite_forward: frames_future must be [" +
                           std::to_string(t_future) + " x B x D]");
    }
  }
  ForwardTrace trace;
  trace.mode = mode;
  trace.frames_in = frames_in;
  trace.enc = encode(m, frames_in);

  if (m.spec.has_recon()) {
    trace.recon = run_branch(m, Branch::Recon, trace.enc.final_states,
                             reverse_time(frames_in), mode);
    trace.total_loss += trace.recon->loss.total;
  }
  if (m.spec.has_future() && t_future > 0) {
    trace.future = run_branch(m, Branch::Future, trace.enc.final_states,
                              frames_future, mode);
    trace.total_loss += trace.future->loss.total;
  }
  return trace;
}

namespace {

// BPTT through one decoder branch; returns the gradient w.r.t. the copied
// representation and accumulates parameter gradients.
void backward_branch(const Model& m, Branch branch, const BranchResult& br,
                     std::vector<LstmParams>& grad_stack, Readout& grad_readout,
                     std::vector<LstmState>& grad_rep) {
  const auto& stack = branch_stack(m, branch);
  const Readout& readout = branch_readout(m, branch);
  const std::size_t t_out = br.dec.caches.size();
  const std::size_t layers = stack.size();
  const std::size_t batch = br.targets.extent(1);
  const std::size_t hidden = m.spec.hidden_dim;

  std::vector<Tensor> dh(layers), dc(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    dh[l] = Tensor({batch, hidden});
    dc[l] = Tensor({batch, hidden});
  }
  for (std::size_t ti = t_out; ti-- > 0;) {
    // Readout gradient feeds the top layer's h at this step; h is
    // recomputed from the cached o and c.
    Tensor dy = time_slice(br.loss.grad_preact, ti);
    const StepCache& top = br.dec.caches[ti].back();
    const Tensor h_top = hadamard(top.o, map(top.c, ScalarFn::Tanh));
    add_inplace(grad_readout.w, matmul(transpose(dy), h_top));
    add_inplace(grad_readout.b, colsum(dy));
    add_inplace(dh[layers - 1], matmul(dy, readout.w));

    for (std::size_t l = layers; l-- > 0;) {
      Tensor dx;
      Tensor* dx_ptr = (l > 0) ? &dx : nullptr;
      Tensor dh_prev, dc_prev;
      lstm_step_backward(stack[l], br.dec.caches[ti][l], dh[l], dc[l],
                         grad_stack[l], dx_ptr, dh_prev, dc_prev);
      dh[l] = std::move(dh_prev);
      dc[l] = std::move(dc_prev);
      if (l > 0) add_inplace(dh[l - 1], dx);
    }
  }
  for (std::size_t l = 0; l < layers; ++l) {
    add_inplace(grad_rep[l].h, dh[l]);
    add_inplace(grad_rep[l].c, dc[l]);
  }
}

}  // namespace

Gradients backward(const Model& m, const ForwardTrace& trace) {
  if (trace.mode != RunMode::Train) {
    throw UsageError("backward: trace was produced in generate mode");
  }
  Gradients g = zeros_like(m);
  const std::size_t batch = trace.frames_in.extent(1);
  const std::size_t layers = m.encoder.size();

  std::vector<LstmState> grad_rep;
  grad_rep.reserve(layers);
  for (std::size_t l = 0; l < layers; ++l)
    grad_rep.push_back(LstmState::zeros(batch, m.spec.hidden_dim));

  if (trace.recon) {
    backward_branch(m, Branch::Recon, *trace.recon, g.recon_decoder,
                    g.readout_recon, grad_rep);
  }
  if (trace.future) {
    backward_branch(m, Branch::Future, *trace.future, g.future_decoder,
                    g.readout_future, grad_rep);
  }

  // Encoder BPTT with the summed branch gradients entering at the final
  // step's states.
  std::vector<Tensor> dh(layers), dc(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    dh[l] = grad_rep[l].h;
    dc[l] = grad_rep[l].c;
  }
  const std::size_t T = trace.enc.caches.size();
  for (std::size_t ti = T; ti-- > 0;) {
    for (std::size_t l = layers; l-- > 0;) {
      Tensor dx;
      Tensor* dx_ptr = (l > 0) ? &dx : nullptr;
      Tensor dh_prev, dc_prev;
      lstm_step_backward(m.encoder[l], trace.enc.caches[ti][l], dh[l], dc[l],
                         g.encoder[l], dx_ptr, dh_prev, dc_prev);
      dh[l] = std::move(dh_prev);
      dc[l] = std::move(dc_prev);
      if (l > 0) add_inplace(dh[l - 1], dx);
    }
  }
  return g;
}

}  // namespace seqvid
