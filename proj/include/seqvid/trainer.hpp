#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqvid/movingmnist.hpp"
#include "seqvid/rng.hpp"
#include "seqvid/seq2seq.hpp"

namespace seqvid {

struct TrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double grad_clip_norm = 10.0;  // <= 0 disables clipping
  std::size_t max_steps = 2000;
  std::size_t eval_every = 100;
  std::uint64_t seed = 1;
  ModelSpec model;
  GenConfig data;

  void validate() const;
  // Step-decay schedule: x0.5 every max_steps/3 steps.
  double lr_at(std::size_t step) const;

  // The calibrated CI-speed training setup (32x32 canvas, one digit,
  // hidden 128, 10 frames in / 10 out, composite, logistic output).
  static TrainConfig desk();
};

struct LossRow {
  std::size_t step;
  double recon;
  double future;
  double total;
};

struct Checkpoint {
  TrainConfig config;
  std::size_t step = 0;
  Model model;
  Gradients velocity;  // momentum buffers, model-shaped
  Rng data_rng;
  std::vector<LossRow> loss_history;
};

// SVCK container: magic, version, JSON header (config, step, rng), then
// named SVT1 tensor records, each followed by a CRC32 of its payload.
void checkpoint_save(const Checkpoint& ck, const std::string& path);
Checkpoint checkpoint_load(const std::string& path);

// One named (param, grad, velocity) triple for the optimizer.
struct ParamRef {
  std::string name;
  Tensor* param;
  const Tensor* grad;
  Tensor* velocity;
};

// Global-norm clipping followed by v <- momentum*v - lr*g, p <- p + v.
// Raises TrainingError naming the offending tensor if a gradient is
// non-finite.
void sgd_momentum_step(std::vector<ParamRef>& refs, double learning_rate,
                       double momentum, double grad_clip_norm);

// Collects the param/grad/velocity triples of a model in visit order.
std::vector<ParamRef> collect_param_refs(Model& model, const Gradients& grads,
                                         Gradients& velocity);

struct Batch {
  Tensor frames_in;      // [T_in x B x D]
  Tensor frames_future;  // [T_future x B x D]
  std::vector<VideoSequence> sequences;
};

// Draws batch_size sequences of length t_in + t_future from the generator
// stream and splits them at the encode/predict boundary.
Batch make_batch(const GenConfig& data, const ModelSpec& model, Rng& rng,
                 const DigitBank& bank, std::size_t batch_size);

// Minibatch BPTT training loop with deterministic data streams. When
// out_dir is non-empty, periodic checkpoints and a loss CSV are written
// under it.
class Trainer {
 public:
  Trainer(TrainConfig cfg, DigitBank bank);
  Trainer(Checkpoint ck, DigitBank bank);

  // Runs one minibatch step. Throws TrainingError on a non-finite loss or
  // gradient without touching the parameters.
  void step_once();
  // Advances to the absolute step count `target` (capped at max_steps).
  void run(std::size_t target, const std::string& out_dir = "");

  const Model& model() const { return model_; }
  Model& mutable_model() { return model_; }
  std::size_t step() const { return step_; }
  const std::vector<LossRow>& loss_history() const { return history_; }
  const TrainConfig& config() const { return cfg_; }
  const DigitBank& bank() const { return bank_; }
  Checkpoint checkpoint() const;

 private:
  TrainConfig cfg_;
  DigitBank bank_;
  Model model_;
  Gradients velocity_;
  Rng data_rng_;
  std::size_t step_ = 0;
  std::vector<LossRow> history_;
};

// Trains from scratch to cfg.max_steps; convenience wrapper over Trainer.
Checkpoint train(const TrainConfig& cfg, const DigitBank& bank,
                 const std::string& out_dir = "");

std::string loss_history_csv(const std::vector<LossRow>& history);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t coords_checked = 0;
};

// Central-difference check of the full-model analytic gradient on randomly
// sampled coordinates of every parameter tensor. Models above 1e5
// parameters are rejected.
GradCheckReport grad_check(const Model& model, const Tensor& frames_in,
                           const Tensor& frames_future, double eps = 1e-6,
                           std::size_t samples_per_tensor = 8,
                           std::uint64_t seed = 0x5eedULL);

// Same sampling, but compares against caller-provided gradients (used to
// prove the checker catches a corrupted backward pass).
GradCheckReport grad_check_against(const Model& model, const Tensor& frames_in,
                                   const Tensor& frames_future,
                                   const Gradients& analytic, double eps,
                                   std::size_t samples_per_tensor,
                                   std::uint64_t seed);

}  // namespace seqvid
