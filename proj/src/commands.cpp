#include "seqvid/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "seqvid/error.hpp"
#include "seqvid/io.hpp"
#include "seqvid/json_io.hpp"
#include "seqvid/viz.hpp"

namespace seqvid {

namespace fs = std::filesystem;
using nlohmann::json;

DigitBank open_bank(const BankSource& src) {
  if (src.synthetic) {
    Rng rng(src.synthetic_seed);
    return synthetic_bank(src.synthetic_per_class, rng);
  }
  return load_idx(src.images_path, src.labels_path);
}

double heldout_future_loss(const Model& m, const GenConfig& data,
                           const DigitBank& bank, std::uint64_t heldout_seed,
                           std::size_t count) {
  if (!m.spec.has_future() || m.spec.future_len() == 0) {
    throw UsageError("heldout_future_loss: model has no future branch");
  }
  Rng rng(heldout_seed);
  Batch batch = make_batch(data, m.spec, rng, bank, count);
  EncodeResult enc = encode(m, batch.frames_in);
  DecodeResult dec = decode(m, Branch::Future, enc.final_states,
                            m.spec.future_len(), &batch.frames_future,
                            RunMode::Generate);
  const Tensor preacts = stack_slices(dec.preacts);
  const LossReport rep = (m.spec.output_unit == OutputUnit::Logistic)
                             ? logistic_xent(preacts, batch.frames_future)
                             : squared_loss(preacts, batch.frames_future);
  return rep.total;
}

ModelSpec variant_spec(const ModelSpec& base, const std::string& name) {
  ModelSpec spec = base;
  if (name == "future_predictor") {
    spec.variant = Variant::FuturePredictor;
    spec.conditional_future = false;
  } else if (name == "composite") {
    spec.variant = Variant::Composite;
    spec.conditional_future = false;
  } else if (name == "conditional_future_predictor") {
    spec.variant = Variant::FuturePredictor;
    spec.conditional_future = true;
  } else if (name == "composite_conditional_future") {
    spec.variant = Variant::Composite;
    spec.conditional_future = true;
  } else {
    throw ParameterError("unknown variant name: " + name);
  }
  return spec;
}

std::vector<VariantRow> compare_variants_run(
    const TrainConfig& base, const std::vector<std::string>& variants,
    const std::vector<std::uint64_t>& seeds, const DigitBank& bank,
    std::uint64_t heldout_seed, std::size_t heldout_count,
    const std::string& cache_dir, bool train_if_missing) {
  std::vector<VariantRow> rows;
  for (const auto& name : variants) {
    for (std::uint64_t seed : seeds) {
      TrainConfig cfg = base;
      cfg.model = variant_spec(base.model, name);
      cfg.seed = seed;
      std::string cache_file;
      if (!cache_dir.empty()) {
        cache_file = cache_dir + "/" + name + "_seed" +
                     std::to_string(seed) + ".svck";
      }
      Checkpoint ck;
      if (!cache_file.empty() && fs::exists(cache_file)) {
        ck = checkpoint_load(cache_file);
      } else if (train_if_missing) {
        ck = train(cfg, bank);
        if (!cache_file.empty()) checkpoint_save(ck, cache_file);
      } else {
        throw UsageError("compare_variants: missing checkpoint " +
                         cache_file);
      }
      rows.push_back({name, seed,
                      heldout_future_loss(ck.model, base.data, bank,
                                          heldout_seed, heldout_count)});
    }
  }
  return rows;
}

RolloutResult rollout_run(const Model& m, const GenConfig& data,
                          const DigitBank& bank, std::uint64_t eval_seed,
                          std::size_t steps, std::size_t batch,
                          std::size_t sample_units, std::uint64_t perm_seed) {
  if (!m.spec.has_future()) {
    throw UsageError("rollout: model has no future decoder");
  }
  Rng rng(eval_seed);
  Batch b = make_batch(data, m.spec, rng, bank, batch);
  EncodeResult enc = encode(m, b.frames_in);
  DecodeResult dec = decode(m, Branch::Future, enc.final_states, steps,
                            nullptr, RunMode::Generate);
  RolloutResult out;
  for (std::size_t t = 0; t < steps; ++t) {
    const Tensor& frame = dec.frames[t];
    const std::size_t d = frame.cols();
    double mean_var = 0.0;
    for (std::size_t r = 0; r < frame.rows(); ++r) {
      Tensor row({d});
      std::copy(frame.data() + r * d, frame.data() + (r + 1) * d, row.data());
      mean_var += reduce(row, Reduction::Variance);
    }
    out.step_variance.push_back(mean_var / static_cast<double>(frame.rows()));
    Tensor row0({d});
    std::copy(frame.data(), frame.data() + d, row0.data());
    out.sample_frames.push_back(std::move(row0));
  }

  const std::size_t hidden = m.spec.hidden_dim;
  const std::size_t units = std::min(sample_units, hidden);
  const auto perm = seeded_permutation(hidden, perm_seed);
  out.raster_units.assign(perm.begin(), perm.begin() + units);
  if (steps > 0) {
    // i, f, o, g, c, h of the top decoder layer, batch row 0.
    for (int q = 0; q < 6; ++q) out.rasters.push_back(Tensor({units, steps}));
    for (std::size_t t = 0; t < steps; ++t) {
      const StepCache& cache = dec.caches[t].back();
      const Tensor h = hadamard(cache.o, map(cache.c, ScalarFn::Tanh));
      const Tensor* qs[6] = {&cache.i, &cache.f, &cache.o,
                             &cache.g, &cache.c, &h};
      for (int q = 0; q < 6; ++q) {
        for (std::size_t u = 0; u < units; ++u) {
          out.rasters[q][u * steps + t] = qs[q]->at(0, out.raster_units[u]);
        }
      }
    }
  }
  return out;
}

Model with_random_future_pathway(const Model& m, std::uint64_t seed) {
  if (!m.spec.has_future()) {
    throw UsageError("with_random_future_pathway: no future decoder");
  }
  Model out = m;
  Rng rng(seed);
  for (std::size_t l = 0; l < out.future_decoder.size(); ++l) {
    Rng layer_rng = rng.split(stream_tag("layer") + l);
    const std::size_t in = (l == 0) ? m.spec.input_dim : m.spec.hidden_dim;
    out.future_decoder[l] = lstm_params_init(in, m.spec.hidden_dim, layer_rng);
  }
  Rng readout_rng = rng.split("readout");
  out.readout_future.w = uniform_init({m.spec.input_dim, m.spec.hidden_dim},
                                      m.spec.hidden_dim, readout_rng);
  out.readout_future.b = Tensor({m.spec.input_dim});
  return out;
}

namespace {

Dataset balanced_dataset(const GenConfig& cfg, LabelScheme scheme, Rng& rng,
                         const DigitBank& bank, std::size_t per_class,
                         std::size_t num_classes) {
  Dataset data;
  std::vector<std::size_t> have(num_classes, 0);
  std::size_t need = per_class * num_classes;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 1000 * need;
  while (need > 0) {
    if (++attempts > max_attempts) {
      throw UsageError("balanced_dataset: classes not reachable");
    }
    VideoSequence seq = gen_sequence(cfg, rng, bank);
    const int label = gen_labels(seq, scheme);
    if (static_cast<std::size_t>(label) >= num_classes ||
        have[label] >= per_class) {
      continue;
    }
    ++have[label];
    --need;
    data.sequences.push_back(seq.frames);
    data.labels.push_back(label);
  }
  return data;
}

double sample_stderr(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return sd / std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace

std::vector<ClassifyCell> classify_sweep_run(const ClassifyProtocol& proto,
                                             const Checkpoint* pretrain,
                                             const DigitBank& bank) {
  GenConfig eval_cfg = proto.data;
  eval_cfg.seq_len = proto.eval_seq_len;
  Rng eval_rng(proto.eval_seed);
  const Dataset eval_set = make_labelled_dataset(eval_cfg, proto.scheme,
                                                 eval_rng, bank,
                                                 proto.eval_count);
  GenConfig train_cfg = proto.data;
  train_cfg.seq_len = proto.train_seq_len;

  std::vector<std::string> arms{"random"};
  if (pretrain != nullptr) arms.push_back("pretrained");

  std::vector<ClassifyCell> cells;
  for (std::size_t per_class : proto.sweep) {
    std::vector<ClassifyCell> local;
    for (const auto& arm : arms) {
      ClassifyCell cell;
      cell.labels_per_class = per_class;
      cell.arm = arm;
      local.push_back(cell);
    }
    for (std::size_t r = 0; r < proto.resamples; ++r) {
      // Disjoint streams per (sweep point, resample); both arms share the
      // training subset, the init stream and the finetune schedule.
      const std::uint64_t cell_tag =
          stream_tag("resample") + per_class * 1009 + r;
      Rng sub_rng = Rng(proto.resample_seed).split(cell_tag);
      const Dataset train_set =
          balanced_dataset(train_cfg, proto.scheme, sub_rng, bank, per_class,
                           proto.classifier.num_classes);
      for (std::size_t a = 0; a < arms.size(); ++a) {
        Rng init_rng = Rng(proto.resample_seed ^ stream_tag("init")).split(cell_tag);
        ClassifierModel model = classifier_build(
            proto.classifier, arms[a] == "pretrained" ? pretrain : nullptr,
            init_rng);
        Rng ft_rng = Rng(proto.resample_seed ^ stream_tag("finetune")).split(cell_tag);
        model = finetune(std::move(model), train_set, proto.finetune_cfg,
                         ft_rng);
        local[a].accuracies.push_back(evaluate_accuracy(model, eval_set));
      }
    }
    for (auto& cell : local) {
      double sum = 0.0;
      for (double v : cell.accuracies) sum += v;
      cell.mean = sum / static_cast<double>(cell.accuracies.size());
      cell.stderr_mean = sample_stderr(cell.accuracies, cell.mean);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string variant_rows_csv(const std::vector<VariantRow>& rows) {
  std::string out = "variant,seed,future_loss\n";
  char buf[160];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%llu,%.17g\n", row.name.c_str(),
                  static_cast<unsigned long long>(row.seed), row.future_loss);
    out += buf;
  }
  return out;
}

std::string classify_cells_csv(const std::vector<ClassifyCell>& cells) {
  std::string out = "labels_per_class,arm,resample,accuracy\n";
  char buf[160];
  for (const auto& cell : cells) {
    for (std::size_t r = 0; r < cell.accuracies.size(); ++r) {
      std::snprintf(buf, sizeof(buf), "%zu,%s,%zu,%.17g\n",
                    cell.labels_per_class, cell.arm.c_str(), r,
                    cell.accuracies[r]);
      out += buf;
    }
  }
  return out;
}

// ---------------------------------------------------------------------
// CLI commands
// ---------------------------------------------------------------------

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void make_out_dirs(const std::string& out_dir) {
  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/checkpoints");
  fs::create_directories(out_dir + "/csv");
  fs::create_directories(out_dir + "/img");
}

}  // namespace

int cmd_make_bank(const MakeBankOpts& opts) {
  Rng rng(opts.seed);
  const DigitBank bank = synthetic_bank(opts.per_class, rng);
  save_idx(bank, opts.images_path, opts.labels_path);
  std::printf("wrote %zu digit images to %s / %s\n", bank.count(),
              opts.images_path.c_str(), opts.labels_path.c_str());
  return 0;
}

int cmd_generate(const GenerateOpts& opts) {
  const DigitBank bank = open_bank(opts.bank);
  opts.cfg.validate();
  make_out_dirs(opts.out_dir);
  Rng rng(opts.seed);
  const std::size_t d = opts.cfg.canvas * opts.cfg.canvas;
  Tensor all({opts.count, opts.cfg.seq_len, d});
  json digit_ids = json::array();
  json motion = json::array();
  std::vector<Tensor> preview_frames;
  for (std::size_t n = 0; n < opts.count; ++n) {
    VideoSequence seq = gen_sequence(opts.cfg, rng, bank);
    std::copy(seq.frames.data(), seq.frames.data() + seq.frames.size(),
              all.data() + n * opts.cfg.seq_len * d);
    digit_ids.push_back(seq.digit_ids);
    motion.push_back(seq.motion_class);
    if (n == 0 && opts.preview) {
      for (std::size_t t = 0; t < opts.cfg.seq_len; ++t) {
        Tensor f({d});
        std::copy(seq.frames.data() + t * d, seq.frames.data() + (t + 1) * d,
                  f.data());
        preview_frames.push_back(std::move(f));
      }
    }
  }
  svt_save(all, opts.out_dir + "/dataset.svt");
  json sidecar;
  sidecar["cfg"] = to_json(opts.cfg);
  sidecar["seed"] = opts.seed;
  sidecar["count"] = opts.count;
  sidecar["digit_ids"] = digit_ids;
  sidecar["motion_class"] = motion;
  write_text_file(opts.out_dir + "/dataset.json", sidecar.dump(2) + "\n");
  if (opts.preview) {
    pgm_save(opts.out_dir + "/img/preview.pgm",
             frame_strip(preview_frames, opts.cfg.canvas), 0.0, 1.0);
  }
  std::printf("wrote %zu sequences to %s\n", opts.count,
              opts.out_dir.c_str());
  return 0;
}

int cmd_train(const TrainOpts& opts) {
  const json manifest = read_json_file(opts.manifest_path);
  const TrainConfig cfg = train_config_from_json(manifest.at("train"));
  const DigitBank bank = open_bank(opts.bank);
  make_out_dirs(opts.out_dir);
  Trainer trainer(cfg, bank);
  trainer.run(cfg.max_steps, opts.out_dir + "/checkpoints");
  checkpoint_save(trainer.checkpoint(), opts.out_dir + "/checkpoints/final.svck");
  write_text_file(opts.out_dir + "/csv/loss.csv",
                  loss_history_csv(trainer.loss_history()));
  std::printf("trained %zu steps, final loss %.6g\n", trainer.step(),
              trainer.loss_history().empty()
                  ? 0.0
                  : trainer.loss_history().back().total);
  return 0;
}

int cmd_compare_variants(const CompareOpts& opts) {
  const json manifest = read_json_file(opts.manifest_path);
  const TrainConfig base = train_config_from_json(manifest.at("base"));
  std::vector<std::string> variants;
  if (manifest.contains("variants")) {
    for (const auto& v : manifest.at("variants")) {
      variants.push_back(v.get<std::string>());
    }
  } else {
    variants = {"future_predictor", "composite",
                "conditional_future_predictor",
                "composite_conditional_future"};
  }
  std::vector<std::uint64_t> seeds;
  for (const auto& s : manifest.at("seeds")) {
    seeds.push_back(s.get<std::uint64_t>());
  }
  const auto heldout_seed = manifest.value<std::uint64_t>("heldout_seed", 999);
  const auto heldout_count = manifest.value<std::size_t>("heldout_count", 64);
  const bool train_if_missing = manifest.value("train_if_missing", true);

  const DigitBank bank = open_bank(opts.bank);
  make_out_dirs(opts.out_dir);
  const auto rows = compare_variants_run(base, variants, seeds, bank,
                                         heldout_seed, heldout_count,
                                         opts.out_dir + "/checkpoints",
                                         train_if_missing);
  write_text_file(opts.out_dir + "/csv/variants.csv", variant_rows_csv(rows));

  // Ranked summary: mean held-out future loss per variant.
  std::string summary = "variant,mean_future_loss\n";
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& name : variants) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : rows) {
      if (row.name == name) {
        sum += row.future_loss;
        ++n;
      }
    }
    ranked.push_back({sum / static_cast<double>(n), name});
  }
  std::sort(ranked.begin(), ranked.end());
  char buf[160];
  for (const auto& [loss, name] : ranked) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g\n", name.c_str(), loss);
    summary += buf;
  }
  write_text_file(opts.out_dir + "/csv/summary.csv", summary);
  std::printf("%s", summary.c_str());
  return 0;
}

int cmd_rollout(const RolloutOpts& opts) {
  Checkpoint ck = checkpoint_load(opts.checkpoint_path);
  const DigitBank bank = open_bank(opts.bank);
  make_out_dirs(opts.out_dir);
  Model model = ck.model;
  if (opts.random_decoder) {
    model = with_random_future_pathway(
        model, opts.eval_seed ^ stream_tag("random_future"));
  }
  const RolloutResult res =
      rollout_run(model, ck.config.data, bank, opts.eval_seed, opts.steps,
                  opts.batch, opts.sample_units, opts.perm_seed);

  std::string csv = "step,variance\n";
  char buf[96];
  for (std::size_t t = 0; t < res.step_variance.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", t + 1,
                  res.step_variance[t]);
    csv += buf;
  }
  write_text_file(opts.out_dir + "/csv/variance.csv", csv);

  if (opts.steps > 0) {
    pgm_save(opts.out_dir + "/img/rollout_strip.pgm",
             frame_strip(res.sample_frames, ck.config.data.canvas), 0.0, 1.0);
    static const char* names[6] = {"input_gate", "forget_gate", "output_gate",
                                   "cell_input", "cell", "output"};
    json ranges;
    for (int q = 0; q < 6; ++q) {
      const Tensor& raster = res.rasters[q];
      const double lo = reduce(raster, Reduction::Min);
      const double hi = reduce(raster, Reduction::Max);
      pgm_save(opts.out_dir + "/img/raster_" + names[q] + ".pgm", raster, lo,
               hi);
      ranges[names[q]] = {lo, hi};
    }
    json units = json::array();
    for (std::size_t u : res.raster_units) units.push_back(u);
    ranges["units"] = units;
    write_text_file(opts.out_dir + "/img/raster_ranges.json",
                    ranges.dump(2) + "\n");
  }
  std::printf("rollout of %zu steps written to %s\n", opts.steps,
              opts.out_dir.c_str());
  return 0;
}

int cmd_visualize_weights(const VisualizeOpts& opts) {
  Checkpoint ck = checkpoint_load(opts.checkpoint_path);
  make_out_dirs(opts.out_dir);
  const Model& m = ck.model;
  std::size_t h = opts.geom_h, w = opts.geom_w;
  if (h == 0 || w == 0) {
    const auto side = static_cast<std::size_t>(
        std::lround(std::sqrt(static_cast<double>(m.spec.input_dim))));
    if (side * side != m.spec.input_dim) {
      throw UsageError(
          "visualize_weights: input_dim is not square, pass --geometry");
    }
    h = w = side;
  }
  if (h * w != m.spec.input_dim) {
    throw UsageError("visualize_weights: geometry does not match input_dim");
  }

  json meta;
  std::size_t k = opts.top_k;
  if (k > m.spec.hidden_dim) {
    std::fprintf(stderr,
                 "visualize_weights: top-%zu requested, model has %zu units; "
                 "emitting %zu tiles\n",
                 k, m.spec.hidden_dim, m.spec.hidden_dim);
    meta["requested_top_k"] = k;
    k = m.spec.hidden_dim;
  }
  meta["emitted"] = k;

  // Encoder: unit order comes from the L2 norms of the frame-to-cell-input
  // weights; the same order is reused for every gate sheet so tile (r, c)
  // refers to one unit across all four images.
  const LstmParams& enc = m.encoder.front();
  const auto order = topk_rows_by_l2(enc.w_xc, k);
  json units = json::array();
  for (std::size_t u : order) units.push_back(u);
  meta["encoder_units"] = units;
  const struct {
    const char* file;
    const Tensor* mat;
  } sheets[4] = {{"encoder_input", &enc.w_xc},
                 {"encoder_input_gate", &enc.w_xi},
                 {"encoder_forget_gate", &enc.w_xf},
                 {"encoder_output_gate", &enc.w_xo}};
  for (const auto& sheet : sheets) {
    std::vector<Tensor> tiles;
    for (std::size_t u : order) {
      Tensor row({h * w});
      std::copy(sheet.mat->data() + u * m.spec.input_dim,
                sheet.mat->data() + (u + 1) * m.spec.input_dim, row.data());
      tiles.push_back(std::move(row));
    }
    const TileSheet ts = tile_rows(tiles, h, w);
    pgm_save(opts.out_dir + "/img/" + sheet.file + ".pgm", ts.image, 0.0, 1.0);
    json ranges = json::array();
    for (const auto& r : ts.ranges) ranges.push_back({r[0], r[1]});
    meta[std::string("ranges_") + sheet.file] = ranges;
  }

  // Decoder output features: readout columns ranked by L2 norm.
  auto decoder_sheet = [&](const Readout& readout, const char* file) {
    const Tensor cols = transpose(readout.w);  // [H x D]
    const auto col_order = topk_rows_by_l2(cols, k);
    std::vector<Tensor> tiles;
    for (std::size_t u : col_order) {
      Tensor row({h * w});
      std::copy(cols.data() + u * m.spec.input_dim,
                cols.data() + (u + 1) * m.spec.input_dim, row.data());
      tiles.push_back(std::move(row));
    }
    const TileSheet ts = tile_rows(tiles, h, w);
    pgm_save(opts.out_dir + "/img/" + std::string(file) + ".pgm", ts.image,
             0.0, 1.0);
    json ranges = json::array();
    for (const auto& r : ts.ranges) ranges.push_back({r[0], r[1]});
    meta[std::string("ranges_") + file] = ranges;
    json ju = json::array();
    for (std::size_t u : col_order) ju.push_back(u);
    meta[std::string("units_") + file] = ju;
  };
  if (m.spec.has_recon()) {
    decoder_sheet(m.readout_recon, "decoder_recon_output");
  }
  if (m.spec.has_future()) {
    decoder_sheet(m.readout_future, "decoder_future_output");
  }
  write_text_file(opts.out_dir + "/img/weights_meta.json",
                  meta.dump(2) + "\n");
  std::printf("weight sheets written to %s/img\n", opts.out_dir.c_str());
  return 0;
}

int cmd_classify(const ClassifyOpts& opts) {
  const json manifest = read_json_file(opts.manifest_path);
  ClassifyProtocol proto;
  const json& jc = manifest.at("classifier");
  proto.classifier.layers = jc.value<std::size_t>("layers", 1);
  proto.classifier.hidden_dim = jc.value<std::size_t>("hidden_dim", 128);
  proto.classifier.input_dim = jc.value<std::size_t>("input_dim", 1024);
  proto.classifier.num_classes = jc.value<std::size_t>("num_classes", 8);
  proto.classifier.dropout_p = jc.value("dropout_p", 0.5);
  proto.classifier.block_len = jc.value<std::size_t>("block_len", 16);
  proto.classifier.stride = jc.value<std::size_t>("stride", 8);
  const json& jf = manifest.at("finetune");
  proto.finetune_cfg.batch_size = jf.value<std::size_t>("batch_size", 16);
  proto.finetune_cfg.learning_rate = jf.value("learning_rate", 1e-3);
  proto.finetune_cfg.momentum = jf.value("momentum", 0.9);
  proto.finetune_cfg.grad_clip_norm = jf.value("grad_clip_norm", 10.0);
  proto.finetune_cfg.max_steps = jf.value<std::size_t>("max_steps", 300);
  proto.data = gen_config_from_json(manifest.at("data"));
  const std::string scheme = manifest.value("scheme", "motion_octant");
  if (scheme == "motion_octant") {
    proto.scheme = LabelScheme::MotionOctant;
  } else if (scheme == "digit_identity") {
    proto.scheme = LabelScheme::DigitIdentity;
  } else {
    throw ParameterError("unknown label scheme: " + scheme);
  }
  if (manifest.contains("sweep")) {
    proto.sweep.clear();
    for (const auto& s : manifest.at("sweep")) {
      proto.sweep.push_back(s.get<std::size_t>());
    }
  }
  proto.resamples = manifest.value<std::size_t>("resamples", 10);
  proto.train_seq_len = manifest.value<std::size_t>("train_seq_len", 10);
  proto.eval_seq_len = manifest.value<std::size_t>("eval_seq_len", 20);
  proto.eval_count = manifest.value<std::size_t>("eval_count", 200);
  proto.eval_seed = manifest.value<std::uint64_t>("eval_seed", 4242);
  proto.resample_seed = manifest.value<std::uint64_t>("resample_seed", 777);

  Checkpoint pretrain;
  const Checkpoint* pretrain_ptr = nullptr;
  if (manifest.contains("pretrain_checkpoint")) {
    const std::string path = manifest.at("pretrain_checkpoint");
    if (!fs::exists(path)) {
      throw UsageError("classify: missing pretrain checkpoint " + path);
    }
    pretrain = checkpoint_load(path);
    pretrain_ptr = &pretrain;
  }

  const DigitBank bank = open_bank(opts.bank);
  make_out_dirs(opts.out_dir);
  const auto cells = classify_sweep_run(proto, pretrain_ptr, bank);
  write_text_file(opts.out_dir + "/csv/accuracy.csv",
                  classify_cells_csv(cells));
  std::string summary = "labels_per_class,arm,mean,stderr\n";
  char buf[160];
  for (const auto& cell : cells) {
    std::snprintf(buf, sizeof(buf), "%zu,%s,%.17g,%.17g\n",
                  cell.labels_per_class, cell.arm.c_str(), cell.mean,
                  cell.stderr_mean);
    summary += buf;
  }
  write_text_file(opts.out_dir + "/csv/summary.csv", summary);
  std::printf("%s", summary.c_str());
  return 0;
}

}  // namespace seqvid
