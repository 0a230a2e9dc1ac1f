#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqvid/classifier.hpp"
#include "seqvid/trainer.hpp"

namespace seqvid {

// ---------------------------------------------------------------------
// Experiment machinery shared by the CLI and the acceptance suite.
// ---------------------------------------------------------------------

struct BankSource {
  std::string images_path;
  std::string labels_path;
  bool synthetic = false;
  std::size_t synthetic_per_class = 64;
  std::uint64_t synthetic_seed = 20150101;
};

DigitBank open_bank(const BankSource& src);

// Mean held-out future-branch loss over one batch of `count` sequences
// drawn from the given stream; conditional decoders run self-fed
// (generate mode).
double heldout_future_loss(const Model& m, const GenConfig& data,
                           const DigitBank& bank, std::uint64_t heldout_seed,
                           std::size_t count);

// Table-2 style variant names: future_predictor, composite,
// conditional_future_predictor, composite_conditional_future.
ModelSpec variant_spec(const ModelSpec& base, const std::string& name);

struct VariantRow {
  std::string name;
  std::uint64_t seed;
  double future_loss;
};

// Trains (or loads from cache_dir) every variant x seed and evaluates all
// of them on the same held-out stream.
std::vector<VariantRow> compare_variants_run(
    const TrainConfig& base, const std::vector<std::string>& variants,
    const std::vector<std::uint64_t>& seeds, const DigitBank& bank,
    std::uint64_t heldout_seed, std::size_t heldout_count,
    const std::string& cache_dir, bool train_if_missing = true);

struct RolloutResult {
  std::vector<double> step_variance;  // per step, batch mean of pixel variance
  std::vector<Tensor> sample_frames;  // emissions of batch row 0
  // Unit-activity rasters of batch row 0 on the decoder's top layer, one
  // [units x steps] tensor per quantity: i, f, o, g (tanh input), c, h.
  std::vector<Tensor> rasters;
  std::vector<std::size_t> raster_units;
};

RolloutResult rollout_run(const Model& m, const GenConfig& data,
                          const DigitBank& bank, std::uint64_t eval_seed,
                          std::size_t steps, std::size_t batch,
                          std::size_t sample_units, std::uint64_t perm_seed);

// Future pathway (decoder LSTM stack + readout) re-drawn from the standard
// initialization; everything else keeps the trained weights.
Model with_random_future_pathway(const Model& m, std::uint64_t seed);

struct ClassifyCell {
  std::size_t labels_per_class = 0;
  std::string arm;  // "random" | "pretrained"
  std::vector<double> accuracies;
  double mean = 0.0;
  double stderr_mean = 0.0;
};

struct ClassifyProtocol {
  ClassifierSpec classifier;
  TrainConfig finetune_cfg;  // batch/lr/momentum/clip/max_steps/seed
  GenConfig data;
  LabelScheme scheme = LabelScheme::MotionOctant;
  std::vector<std::size_t> sweep{1, 5, 20, 100};
  std::size_t resamples = 10;
  std::size_t train_seq_len = 10;
  std::size_t eval_seq_len = 20;
  std::size_t eval_count = 200;
  std::uint64_t eval_seed = 4242;
  std::uint64_t resample_seed = 777;
};

// Labels-per-class sweep x {random, pretrained} x resamples; each cell
// reports per-resample held-out accuracies with mean and standard error.
// pretrain may be null, in which case only the random arm runs.
std::vector<ClassifyCell> classify_sweep_run(const ClassifyProtocol& proto,
                                             const Checkpoint* pretrain,
                                             const DigitBank& bank);

std::string variant_rows_csv(const std::vector<VariantRow>& rows);
std::string classify_cells_csv(const std::vector<ClassifyCell>& cells);

// ---------------------------------------------------------------------
// CLI entry points. Each is a pure function of (options, input files).
// ---------------------------------------------------------------------

struct MakeBankOpts {
  std::string images_path;
  std::string labels_path;
  std::size_t per_class = 64;
  std::uint64_t seed = 20150101;
};
int cmd_make_bank(const MakeBankOpts& opts);

struct GenerateOpts {
  BankSource bank;
  GenConfig cfg;
  std::size_t count = 64;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool preview = false;
};
int cmd_generate(const GenerateOpts& opts);

struct TrainOpts {
  std::string manifest_path;
  std::string out_dir;
  BankSource bank;
};
int cmd_train(const TrainOpts& opts);

struct CompareOpts {
  std::string manifest_path;
  std::string out_dir;
  BankSource bank;
};
int cmd_compare_variants(const CompareOpts& opts);

struct RolloutOpts {
  std::string checkpoint_path;
  std::string out_dir;
  BankSource bank;
  std::size_t steps = 100;
  std::size_t batch = 16;
  std::size_t sample_units = 200;
  std::uint64_t eval_seed = 9001;
  std::uint64_t perm_seed = 31337;
  bool random_decoder = false;
};
int cmd_rollout(const RolloutOpts& opts);

struct VisualizeOpts {
  std::string checkpoint_path;
  std::string out_dir;
  std::size_t top_k = 200;
  std::size_t geom_h = 0;  // 0 = derive from input_dim (must be square)
  std::size_t geom_w = 0;
};
int cmd_visualize_weights(const VisualizeOpts& opts);

struct ClassifyOpts {
  std::string manifest_path;
  std::string out_dir;
  BankSource bank;
};
int cmd_classify(const ClassifyOpts& opts);

}  // namespace seqvid
