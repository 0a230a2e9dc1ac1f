#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "seqvid/commands.hpp"
#include "seqvid/error.hpp"

namespace {

void add_bank_flags(CLI::App* cmd, seqvid::BankSource& bank) {
  cmd->add_option("--images", bank.images_path, "IDX image file");
  cmd->add_option("--labels", bank.labels_path, "IDX label file");
  cmd->add_flag("--synthetic-bank", bank.synthetic,
                "use the built-in procedural digit bank");
  cmd->add_option("--synthetic-per-class", bank.synthetic_per_class,
                  "images per class for the synthetic bank");
  cmd->add_option("--synthetic-seed", bank.synthetic_seed,
                  "seed for the synthetic bank");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LSTM video sequence toolkit"};
  app.require_subcommand(1);

  seqvid::MakeBankOpts bank_opts;
  auto* make_bank = app.add_subcommand(
      "make-bank", "write a procedural digit bank as IDX files");
  make_bank->add_option("--out-images", bank_opts.images_path)->required();
  make_bank->add_option("--out-labels", bank_opts.labels_path)->required();
  make_bank->add_option("--per-class", bank_opts.per_class);
  make_bank->add_option("--seed", bank_opts.seed);

  seqvid::GenerateOpts gen_opts;
  auto* generate = app.add_subcommand(
      "generate", "generate a bouncing-digits dataset (SVT1 + JSON sidecar)");
  add_bank_flags(generate, gen_opts.bank);
  generate->add_option("--out", gen_opts.out_dir)->required();
  generate->add_option("--canvas", gen_opts.cfg.canvas);
  generate->add_option("--num-digits", gen_opts.cfg.num_digits);
  generate->add_option("--seq-len", gen_opts.cfg.seq_len);
  generate->add_option("--digit-size", gen_opts.cfg.digit_size);
  generate->add_option("--vel-min", gen_opts.cfg.vel_min);
  generate->add_option("--vel-max", gen_opts.cfg.vel_max);
  generate->add_flag("--no-binarize{false}", gen_opts.cfg.binarize,
                     "keep grayscale pixel values");
  generate->add_option("--count", gen_opts.count);
  generate->add_option("--seed", gen_opts.seed);
  generate->add_flag("--preview", gen_opts.preview,
                     "write a PGM strip of the first sequence");

  seqvid::TrainOpts train_opts;
  auto* train = app.add_subcommand("train", "train a model from a manifest");
  add_bank_flags(train, train_opts.bank);
  train->add_option("--manifest", train_opts.manifest_path)->required();
  train->add_option("--out", train_opts.out_dir)->required();

  seqvid::CompareOpts cmp_opts;
  auto* compare = app.add_subcommand(
      "compare-variants", "train/evaluate model variants on held-out data");
  add_bank_flags(compare, cmp_opts.bank);
  compare->add_option("--manifest", cmp_opts.manifest_path)->required();
  compare->add_option("--out", cmp_opts.out_dir)->required();

  seqvid::RolloutOpts roll_opts;
  auto* rollout = app.add_subcommand(
      "rollout", "run the future decoder far beyond its training horizon");
  add_bank_flags(rollout, roll_opts.bank);
  rollout->add_option("--checkpoint", roll_opts.checkpoint_path)->required();
  rollout->add_option("--out", roll_opts.out_dir)->required();
  rollout->add_option("--steps", roll_opts.steps);
  rollout->add_option("--batch", roll_opts.batch);
  rollout->add_option("--sample-units", roll_opts.sample_units);
  rollout->add_option("--eval-seed", roll_opts.eval_seed);
  rollout->add_option("--perm-seed", roll_opts.perm_seed);
  rollout->add_flag("--random-decoder", roll_opts.random_decoder,
                    "replace the future pathway with fresh random weights");

  seqvid::VisualizeOpts viz_opts;
  auto* viz = app.add_subcommand("visualize-weights",
                                 "tile learned weights as PGM sheets");
  viz->add_option("--checkpoint", viz_opts.checkpoint_path)->required();
  viz->add_option("--out", viz_opts.out_dir)->required();
  viz->add_option("--top-k", viz_opts.top_k);
  viz->add_option("--geom-h", viz_opts.geom_h);
  viz->add_option("--geom-w", viz_opts.geom_w);

  seqvid::ClassifyOpts cls_opts;
  auto* classify = app.add_subcommand(
      "classify", "labels-per-class sweep of random vs pretrained classifiers");
  add_bank_flags(classify, cls_opts.bank);
  classify->add_option("--manifest", cls_opts.manifest_path)->required();
  classify->add_option("--out", cls_opts.out_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (make_bank->parsed()) return seqvid::cmd_make_bank(bank_opts);
    if (generate->parsed()) return seqvid::cmd_generate(gen_opts);
    if (train->parsed()) return seqvid::cmd_train(train_opts);
    if (compare->parsed()) return seqvid::cmd_compare_variants(cmp_opts);
    if (rollout->parsed()) return seqvid::cmd_rollout(roll_opts);
    if (viz->parsed()) return seqvid::cmd_visualize_weights(viz_opts);
    if (classify->parsed()) return seqvid::cmd_classify(cls_opts);
  } catch (const seqvid::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 2;
  }
  return 0;
}
