#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "seqvid/lstm.hpp"
#include "seqvid/objectives.hpp"
#include "seqvid/tensor.hpp"

namespace seqvid {

enum class Variant { Autoencoder, FuturePredictor, Composite };
enum class OutputUnit { Logistic, Linear };
enum class RunMode { Train, Generate };
enum class Branch { Recon, Future };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// Declarative architecture description. A built model owns one encoder
// stack and up to two decoder stacks with independent parameters; decoders
// start from a layerwise copy of the encoder's final (h, c).
struct ModelSpec {
  Variant variant = Variant::Composite;
  std::size_t layers = 1;
  std::size_t hidden_dim = 128;
  std::size_t input_dim = 1024;
  std::size_t t_in = 10;
  std::size_t t_future = 10;  // ignored for the autoencoder variant
  bool conditional_recon = false;
  bool conditional_future = false;
  OutputUnit output_unit = OutputUnit::Logistic;

  bool has_recon() const { return variant != Variant::FuturePredictor; }
  bool has_future() const { return variant != Variant::Autoencoder; }
  std::size_t future_len() const {
    return variant == Variant::Autoencoder ? 0 : t_future;
  }
  void validate() const;
};

struct Readout {
  Tensor w;  // [out_dim x hidden]
  Tensor b;  // [out_dim]
};

struct Model {
  ModelSpec spec;
  std::vector<LstmParams> encoder;
  std::vector<LstmParams> recon_decoder;   // empty unless spec.has_recon()
  std::vector<LstmParams> future_decoder;  // empty unless spec.has_future()
  Readout readout_recon;
  Readout readout_future;

  std::size_t param_count() const;
  // Visits every parameter tensor in a fixed order with a stable name,
  // e.g. "encoder/0/w_xi" or "readout_future/w".
  void for_each_param(const std::function<void(const std::string&, Tensor&)>& fn);
  void for_each_param(
      const std::function<void(const std::string&, const Tensor&)>& fn) const;
};

// Gradients and optimizer velocities are model-shaped tensor trees.
using Gradients = Model;

Model model_build(const ModelSpec& spec, Rng& rng);
Gradients zeros_like(const Model& m);

struct EncodeResult {
  std::vector<LstmState> final_states;            // one per layer
  std::vector<std::vector<StepCache>> caches;     // [t][layer]
};

// Runs every layer over all T_in steps from zero initial state. The
// returned per-layer (h, c) list is the learned representation.
EncodeResult encode(const Model& m, const Tensor& frames /* [T x B x D] */);

struct DecodeResult {
  std::vector<Tensor> frames;                  // post-output-unit emissions
  std::vector<Tensor> preacts;                 // readout pre-activations
  std::vector<std::vector<StepCache>> caches;  // [t][layer]
};

// Decoder step 1 always receives a zero frame input. For steps t >= 2 the
// layer-1 input is zero (unconditioned), the teacher frame t-1 (conditional
// train) or the model's own emission t-1 (conditional generate). teacher is
// the branch target sequence, [T_out x B x D].
DecodeResult decode(const Model& m, Branch branch,
                    const std::vector<LstmState>& init, std::size_t t_out,
                    const Tensor* teacher, RunMode mode);

struct BranchResult {
  DecodeResult dec;
  Tensor targets;  // [T_out x B x D]
  LossReport loss;
};

struct ForwardTrace {
  RunMode mode = RunMode::Train;
  Tensor frames_in;
  EncodeResult enc;
  std::optional<BranchResult> recon;   // targets are frames_in reversed
  std::optional<BranchResult> future;
  double total_loss = 0.0;
  double recon_loss() const { return recon ? recon->loss.total : 0.0; }
  double future_loss() const { return future ? future->loss.total : 0.0; }
};

// Encodes once, runs every decoder the variant provides from the same
// copied representation, and sums the branch losses 1:1.
ForwardTrace composite_forward(const Model& m, const Tensor& frames_in,
                               const Tensor& frames_future, RunMode mode);

// Full BPTT through both decoders into the shared encoder. Teacher inputs
// are data and receive no gradient. Generate-mode traces are rejected.
Gradients backward(const Model& m, const ForwardTrace& trace);

// Reverses the time axis of a [T x B x D] tensor.
Tensor reverse_time(const Tensor& frames);

}  // namespace seqvid
