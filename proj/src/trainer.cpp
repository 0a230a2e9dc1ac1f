#include "seqvid/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "seqvid/error.hpp"

namespace seqvid {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ParameterError("TrainConfig: batch_size >= 1");
  if (learning_rate <= 0.0) throw ParameterError("TrainConfig: lr > 0");
  if (momentum < 0.0 || momentum >= 1.0) {
    throw ParameterError("TrainConfig: momentum in [0, 1)");
  }
  if (max_steps == 0) throw ParameterError("TrainConfig: max_steps >= 1");
  if (eval_every == 0) throw ParameterError("TrainConfig: eval_every >= 1");
  model.validate();
  data.validate();
  if (data.canvas * data.canvas != model.input_dim) {
    throw ParameterError("TrainConfig: canvas^2 != model input_dim");
  }
  if (data.seq_len < model.t_in + model.future_len()) {
    throw ParameterError("TrainConfig: seq_len < T_in + T_future");
  }
}

double TrainConfig::lr_at(std::size_t step) const {
  const std::size_t interval = std::max<std::size_t>(1, max_steps / 3);
  const std::size_t decays = step / interval;
  return learning_rate * std::pow(0.5, static_cast<double>(decays));
}

TrainConfig TrainConfig::desk() {
  TrainConfig cfg;
  cfg.batch_size = 16;
  cfg.learning_rate = 1e-3;
  cfg.momentum = 0.9;
  cfg.grad_clip_norm = 10.0;
  cfg.max_steps = 2000;
  cfg.eval_every = 100;
  cfg.seed = 1;
  cfg.model.variant = Variant::Composite;
  cfg.model.layers = 1;
  cfg.model.hidden_dim = 128;
  cfg.model.input_dim = 32 * 32;
  cfg.model.t_in = 10;
  cfg.model.t_future = 10;
  cfg.model.conditional_recon = false;
  cfg.model.conditional_future = false;
  cfg.model.output_unit = OutputUnit::Logistic;
  cfg.data = GenConfig::desk();
  return cfg;
}

void sgd_momentum_step(std::vector<ParamRef>& refs, double learning_rate,
                       double momentum, double grad_clip_norm) {
  double sq = 0.0;
  for (const auto& r : refs) {
    for (std::size_t i = 0; i < r.grad->size(); ++i) {
      const double g = (*r.grad)[i];
      if (!std::isfinite(g)) {
        throw TrainingError("sgd: non-finite gradient in tensor " + r.name);
      }
      sq += g * g;
    }
  }
  const double norm = std::sqrt(sq);
  double scale = 1.0;
  if (grad_clip_norm > 0.0 && norm > grad_clip_norm) {
    scale = grad_clip_norm / norm;
  }
  for (auto& r : refs) {
    Tensor& p = *r.param;
    Tensor& v = *r.velocity;
    const Tensor& g = *r.grad;
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i] = momentum * v[i] - learning_rate * scale * g[i];
      p[i] += v[i];
    }
  }
}

std::vector<ParamRef> collect_param_refs(Model& model, const Gradients& grads,
                                         Gradients& velocity) {
  std::vector<ParamRef> refs;
  std::vector<Tensor*> params;
  std::vector<std::string> names;
  model.for_each_param([&](const std::string& name, Tensor& t) {
    params.push_back(&t);
    names.push_back(name);
  });
  std::vector<const Tensor*> gs;
  grads.for_each_param(
      [&](const std::string&, const Tensor& t) { gs.push_back(&t); });
  std::vector<Tensor*> vs;
  velocity.for_each_param(
      [&](const std::string&, Tensor& t) { vs.push_back(&t); });
  if (gs.size() != params.size() || vs.size() != params.size()) {
    throw DimensionError("collect_param_refs: mismatched tensor trees");
  }
  refs.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    refs.push_back({names[i], params[i], gs[i], vs[i]});
  }
  return refs;
}

Batch make_batch(const GenConfig& data, const ModelSpec& model, Rng& rng,
                 const DigitBank& bank, std::size_t batch_size) {
  const std::size_t t_in = model.t_in;
  const std::size_t t_fut = model.future_len();
  const std::size_t d = data.canvas * data.canvas;
  Batch batch;
  batch.frames_in = Tensor({t_in, batch_size, d});
  if (t_fut > 0) batch.frames_future = Tensor({t_fut, batch_size, d});
  for (std::size_t b = 0; b < batch_size; ++b) {
    VideoSequence seq = gen_sequence(data, rng, bank);
    for (std::size_t t = 0; t < t_in; ++t) {
      std::copy(seq.frames.data() + t * d, seq.frames.data() + (t + 1) * d,
                batch.frames_in.data() + (t * batch_size + b) * d);
    }
    for (std::size_t t = 0; t < t_fut; ++t) {
      std::copy(seq.frames.data() + (t_in + t) * d,
                seq.frames.data() + (t_in + t + 1) * d,
                batch.frames_future.data() + (t * batch_size + b) * d);
    }
    batch.sequences.push_back(std::move(seq));
  }
  return batch;
}

Trainer::Trainer(TrainConfig cfg, DigitBank bank)
    : cfg_(std::move(cfg)), bank_(std::move(bank)) {
  cfg_.validate();
  if (bank_.count() == 0) throw UsageError("Trainer: empty digit bank");
  Rng root(cfg_.seed);
  Rng init_rng = root.split("model_init");
  model_ = model_build(cfg_.model, init_rng);
  velocity_ = zeros_like(model_);
  data_rng_ = root.split("data");
}

Trainer::Trainer(Checkpoint ck, DigitBank bank)
    : cfg_(std::move(ck.config)),
      bank_(std::move(bank)),
      model_(std::move(ck.model)),
      velocity_(std::move(ck.velocity)),
      data_rng_(ck.data_rng),
      step_(ck.step),
      history_(std::move(ck.loss_history)) {
  cfg_.validate();
  if (bank_.count() == 0) throw UsageError("Trainer: empty digit bank");
}

void Trainer::step_once() {
  Batch batch =
      make_batch(cfg_.data, cfg_.model, data_rng_, bank_, cfg_.batch_size);
  ForwardTrace trace;
  try {
    trace = composite_forward(model_, batch.frames_in, batch.frames_future,
                              RunMode::Train);
  } catch (const NumericError& e) {
    throw TrainingError(std::string("training aborted, last checkpoint kept: ") +
                        e.what());
  }
  Gradients grads = backward(model_, trace);
  auto refs = collect_param_refs(model_, grads, velocity_);
  sgd_momentum_step(refs, cfg_.lr_at(step_), cfg_.momentum,
                    cfg_.grad_clip_norm);
  ++step_;
  history_.push_back(
      {step_, trace.recon_loss(), trace.future_loss(), trace.total_loss});
}

void Trainer::run(std::size_t target, const std::string& out_dir) {
  target = std::min(target, cfg_.max_steps);
  while (step_ < target) {
    step_once();
    if (!out_dir.empty() &&
        (step_ % cfg_.eval_every == 0 || step_ == target)) {
      char name[64];
      std::snprintf(name, sizeof(name), "step_%06zu.svck", step_);
      checkpoint_save(checkpoint(), out_dir + "/" + name);
      write_text_file(out_dir + "/loss.csv", loss_history_csv(history_));
    }
  }
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ck;
  ck.config = cfg_;
  ck.step = step_;
  ck.model = model_;
  ck.velocity = velocity_;
  ck.data_rng = data_rng_;
  ck.loss_history = history_;
  return ck;
}

Checkpoint train(const TrainConfig& cfg, const DigitBank& bank,
                 const std::string& out_dir) {
  Trainer trainer(cfg, bank);
  trainer.run(cfg.max_steps, out_dir);
  return trainer.checkpoint();
}

std::string loss_history_csv(const std::vector<LossRow>& history) {
  std::ostringstream os;
  os << "step,recon_loss,future_loss,total\n";
  char buf[128];
  for (const auto& row : history) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", row.step,
                  row.recon, row.future, row.total);
    os << buf;
  }
  return os.str();
}

namespace {

double forward_loss(const Model& m, const Tensor& fin, const Tensor& ffut) {
  return composite_forward(m, fin, ffut, RunMode::Train).total_loss;
}

}  // namespace

GradCheckReport grad_check(const Model& model, const Tensor& frames_in,
                           const Tensor& frames_future, double eps,
                           std::size_t samples_per_tensor,
                           std::uint64_t seed) {
  ForwardTrace trace =
      composite_forward(model, frames_in, frames_future, RunMode::Train);
  Gradients analytic = backward(model, trace);
  return grad_check_against(model, frames_in, frames_future, analytic, eps,
                            samples_per_tensor, seed);
}

GradCheckReport grad_check_against(const Model& model, const Tensor& frames_in,
                                   const Tensor& frames_future,
                                   const Gradients& analytic, double eps,
                                   std::size_t samples_per_tensor,
                                   std::uint64_t seed) {
  if (model.param_count() > 100000) {
    throw UsageError("grad_check: model too large to perturb (> 1e5 params)");
  }
  Model work = model;
  std::vector<Tensor*> tensors;
  std::vector<std::string> names;
  work.for_each_param([&](const std::string& name, Tensor& t) {
    tensors.push_back(&t);
    names.push_back(name);
  });
  std::vector<const Tensor*> grads;
  analytic.for_each_param(
      [&](const std::string&, const Tensor& t) { grads.push_back(&t); });
  if (grads.size() != tensors.size()) {
    throw DimensionError("grad_check: gradient tree does not match model");
  }

  Rng rng(seed);
  GradCheckReport rep;
  for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
    Tensor& t = *tensors[ti];
    const Tensor& g = *grads[ti];
    const std::size_t k = std::min(samples_per_tensor, t.size());
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t idx = rng.next_below(t.size());
      const double orig = t[idx];
      t[idx] = orig + eps;
      const double lp = forward_loss(work, frames_in, frames_future);
      t[idx] = orig - eps;
      const double lm = forward_loss(work, frames_in, frames_future);
      t[idx] = orig;
      const double numeric = (lp - lm) / (2.0 * eps);
      const double a = g[idx];
      const double rel =
          std::abs(a - numeric) / std::max(1e-12, std::abs(a));
      ++rep.coords_checked;
      if (rel > rep.max_rel_error) {
        rep.max_rel_error = rel;
        rep.worst_tensor = names[ti];
      }
    }
  }
  return rep;
}

}  // namespace seqvid
