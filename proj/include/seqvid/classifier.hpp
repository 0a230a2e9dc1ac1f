#pragma once

#include <string>
#include <vector>

#include "seqvid/movingmnist.hpp"
#include "seqvid/objectives.hpp"
#include "seqvid/seq2seq.hpp"
#include "seqvid/trainer.hpp"

namespace seqvid {

struct ClassifierSpec {
  std::size_t layers = 2;
  std::size_t hidden_dim = 128;
  std::size_t input_dim = 1024;
  std::size_t num_classes = 8;
  double dropout_p = 0.5;
  std::size_t block_len = 16;
  std::size_t stride = 8;

  void validate() const;
};

// Stacked LSTM with a per-timestep softmax readout. LSTM weights can be
// copied from a pretrained encoder; the readout is always fresh.
struct ClassifierModel {
  ClassifierSpec spec;
  std::vector<LstmParams> lstm;
  Readout readout;  // w [K x hidden], b [K]
  std::string provenance = "random";

  std::size_t param_count() const;
  void for_each_param(
      const std::function<void(const std::string&, Tensor&)>& fn);
  void for_each_param(
      const std::function<void(const std::string&, const Tensor&)>& fn) const;
};

using ClassifierGradients = ClassifierModel;

ClassifierModel classifier_build(const ClassifierSpec& spec,
                                 const Checkpoint* init_from, Rng& rng);
ClassifierGradients zeros_like(const ClassifierModel& m);

struct ClassifierTrace {
  bool train_mode = false;
  Tensor logits;                               // [T x B x K]
  std::vector<std::vector<StepCache>> caches;  // [t][layer]
  // Inverted-dropout masks, one per inter-layer boundary (input->layer1,
  // layer l -> layer l+1, top -> readout), sampled once per sequence and
  // reused at every step. Entries are 0 or 1/(1-p).
  std::vector<Tensor> masks;
  // Instrumentation: per-step snapshots of the masks actually applied.
  std::vector<std::vector<Tensor>> applied_masks;
};

// In train mode activations crossing layer boundaries are masked; the
// recurrent h->h path is never masked. Eval mode applies no mask and no
// rescale. dropout_rng may be null when mode is eval or dropout_p == 0.
Tensor classifier_forward(const ClassifierModel& m, const Tensor& frames,
                          RunMode mode, Rng* dropout_rng,
                          ClassifierTrace* trace = nullptr,
                          bool record_masks = false);

// Loss is the mean over time steps of the per-step softmax cross entropy.
struct ClassifierBackwardResult {
  ClassifierGradients grads;
  double loss = 0.0;
};
ClassifierBackwardResult classifier_backward(const ClassifierModel& m,
                                             const ClassifierTrace& trace,
                                             const Tensor& frames,
                                             const std::vector<int>& labels);

struct Dataset {
  std::vector<Tensor> sequences;  // each [T x D]
  std::vector<int> labels;
  std::size_t size() const { return labels.size(); }
};

Dataset make_labelled_dataset(const GenConfig& cfg, LabelScheme scheme,
                              Rng& rng, const DigitBank& bank,
                              std::size_t count);

// External percepts: an SVT1 tensor [N x T x D] plus a JSON array of N
// integer labels.
Dataset load_percept_dataset(const std::string& svt_path,
                             const std::string& labels_json_path);

// Finetunes every weight (copied ones included) with SGD + momentum.
// Uses batch_size / learning_rate / momentum / grad_clip_norm / max_steps
// from cfg; dropout and readout shapes come from the model's spec.
ClassifierModel finetune(ClassifierModel m, const Dataset& data,
                         const TrainConfig& cfg, Rng& rng,
                         std::vector<double>* loss_log = nullptr);

// Slices [0..T), [stride..stride+T), ... , averages per-step softmax
// probabilities within each block, then across blocks; ties break toward
// the lowest class id.
std::pair<int, Tensor> predict_video(const ClassifierModel& m,
                                     const Tensor& frames /* [L x D] */);

double evaluate_accuracy(const ClassifierModel& m, const Dataset& data);

}  // namespace seqvid
