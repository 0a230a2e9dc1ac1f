#include "seqvid/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "seqvid/error.hpp"
#include "seqvid/io.hpp"

namespace seqvid {

void ClassifierSpec::validate() const {
  if (layers == 0 || hidden_dim == 0 || input_dim == 0 || num_classes == 0) {
    throw ParameterError("ClassifierSpec: dimensions must be >= 1");
  }
  if (dropout_p < 0.0 || dropout_p >= 1.0) {
    throw ParameterError("ClassifierSpec: dropout_p in [0, 1)");
  }
  if (stride == 0 || stride > block_len) {
    throw ParameterError("ClassifierSpec: need 1 <= stride <= block_len");
  }
}

std::size_t ClassifierModel::param_count() const {
  std::size_t n = 0;
  for_each_param([&](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

void ClassifierModel::for_each_param(
    const std::function<void(const std::string&, Tensor&)>& fn) {
  for (std::size_t l = 0; l < lstm.size(); ++l) {
    lstm[l].for_each([&](const char* tname, Tensor& t) {
      fn("lstm/" + std::to_string(l) + "/" + tname, t);
    });
  }
  fn("readout/w", readout.w);
  fn("readout/b", readout.b);
}

void ClassifierModel::for_each_param(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
  const_cast<ClassifierModel*>(this)->for_each_param(
      [&](const std::string& name, Tensor& t) { fn(name, t); });
}

ClassifierModel classifier_build(const ClassifierSpec& spec,
                                 const Checkpoint* init_from, Rng& rng) {
  spec.validate();
  ClassifierModel m;
  m.spec = spec;
  if (init_from != nullptr) {
    const Model& src = init_from->model;
    if (src.encoder.size() != spec.layers) {
      throw ParameterError(
          "classifier_build: encoder has " +
          std::to_string(src.encoder.size()) + " layers, classifier spec " +
          std::to_string(spec.layers));
    }
    for (std::size_t l = 0; l < spec.layers; ++l) {
      const LstmParams& enc = src.encoder[l];
      const std::size_t want_in = (l == 0) ? spec.input_dim : spec.hidden_dim;
      if (enc.hidden_dim() != spec.hidden_dim || enc.input_dim() != want_in) {
        throw ParameterError(
            "classifier_build: encoder/" + std::to_string(l) +
            "/w_xi is " + enc.w_xi.shape_str() + ", classifier spec wants [" +
            std::to_string(spec.hidden_dim) + "x" + std::to_string(want_in) +
            "]");
      }
      m.lstm.push_back(enc);
    }
    m.provenance = "pretrained(step " + std::to_string(init_from->step) + ")";
  } else {
    Rng stack_rng = rng.split("classifier_lstm");
    for (std::size_t l = 0; l < spec.layers; ++l) {
      Rng layer_rng = stack_rng.split(stream_tag("layer") + l);
      const std::size_t in = (l == 0) ? spec.input_dim : spec.hidden_dim;
      m.lstm.push_back(lstm_params_init(in, spec.hidden_dim, layer_rng));
    }
    m.provenance = "random";
  }
  Rng readout_rng = rng.split("classifier_readout");
  m.readout.w = uniform_init({spec.num_classes, spec.hidden_dim},
                             spec.hidden_dim, readout_rng);
  m.readout.b = Tensor({spec.num_classes});
  return m;
}

ClassifierGradients zeros_like(const ClassifierModel& m) {
  ClassifierGradients g;
  g.spec = m.spec;
  for (const auto& p : m.lstm) {
    g.lstm.push_back(LstmParams::zeros(p.input_dim(), p.hidden_dim()));
  }
  g.readout.w = Tensor(m.readout.w.shape());
  g.readout.b = Tensor(m.readout.b.shape());
  return g;
}

namespace {

Tensor sample_mask(std::size_t batch, std::size_t dim, double p, Rng& rng) {
  Tensor mask({batch, dim});
  const double keep = 1.0 - p;
  const double scale = 1.0 / keep;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = (rng.next_unit() < keep) ? scale : 0.0;
  }
  return mask;
}

}  // namespace

Tensor classifier_forward(const ClassifierModel& m, const Tensor& frames,
                          RunMode mode, Rng* dropout_rng,
                          ClassifierTrace* trace, bool record_masks) {
  if (frames.ndim() != 3 || frames.extent(2) != m.spec.input_dim) {
    throw DimensionError("classifier_forward: frames must be [T x B x D]");
  }
  const std::size_t T = frames.extent(0);
  const std::size_t batch = frames.extent(1);
  const std::size_t layers = m.spec.layers;
  const bool dropout =
      (mode == RunMode::Train) && m.spec.dropout_p > 0.0;
  if (dropout && dropout_rng == nullptr) {
    throw UsageError("classifier_forward: dropout needs an rng in train mode");
  }

  // One mask per boundary, sampled once and reused at every time step.
  std::vector<Tensor> masks;
  if (dropout) {
    masks.reserve(layers + 1);
    masks.push_back(
        sample_mask(batch, m.spec.input_dim, m.spec.dropout_p, *dropout_rng));
    for (std::size_t l = 1; l <= layers; ++l) {
      masks.push_back(
          sample_mask(batch, m.spec.hidden_dim, m.spec.dropout_p, *dropout_rng));
    }
  }

  std::vector<LstmParamsT> pt;
  pt.reserve(layers);
  for (const auto& p : m.lstm) pt.push_back(transpose_params(p));
  const Tensor w_r_t = transpose(m.readout.w);

  if (trace != nullptr) {
    trace->train_mode = (mode == RunMode::Train);
    trace->caches.assign(T, std::vector<StepCache>(layers));
    trace->masks = masks;
    trace->applied_masks.clear();
  }

  Tensor logits({T, batch, m.spec.num_classes});
  std::vector<LstmState> states(layers,
                                LstmState::zeros(batch, m.spec.hidden_dim));
  for (std::size_t t = 0; t < T; ++t) {
    Tensor x = time_slice(frames, t);
    if (dropout) x = hadamard(x, masks[0]);
    for (std::size_t l = 0; l < layers; ++l) {
      Tensor input =
          (l == 0) ? std::move(x)
                   : (dropout ? hadamard(states[l - 1].h, masks[l])
                              : states[l - 1].h);
      StepCache* cache = trace ? &trace->caches[t][l] : nullptr;
      states[l] = lstm_step_forward(m.lstm[l], pt[l], &input, states[l], cache);
      if (l == 0) x = Tensor();
    }
    Tensor top = dropout ? hadamard(states.back().h, masks[layers])
                         : states.back().h;
    Tensor pre = matmul(top, w_r_t);
    add_row_broadcast(pre, m.readout.b);
    set_time_slice(logits, t, pre);
    if (trace != nullptr && record_masks && dropout) {
      trace->applied_masks.push_back(masks);
    }
  }
  if (trace != nullptr) trace->logits = logits;
  return logits;
}

ClassifierBackwardResult classifier_backward(const ClassifierModel& m,
                                             const ClassifierTrace& trace,
                                             const Tensor& frames,
                                             const std::vector<int>& labels) {
  if (!trace.train_mode) {
    throw UsageError("classifier_backward: trace was not built in train mode");
  }
  const std::size_t T = trace.caches.size();
  const std::size_t batch = frames.extent(1);
  const std::size_t layers = m.spec.layers;
  const bool dropout = !trace.masks.empty();

  LossReport rep = softmax_xent(trace.logits, labels);
  const double inv_t = 1.0 / static_cast<double>(T);

  ClassifierBackwardResult out;
  out.grads = zeros_like(m);
  out.loss = rep.total * inv_t;

  std::vector<Tensor> dh(layers), dc(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    dh[l] = Tensor({batch, m.spec.hidden_dim});
    dc[l] = Tensor({batch, m.spec.hidden_dim});
  }
  for (std::size_t ti = T; ti-- > 0;) {
    Tensor dy = scale(time_slice(rep.grad_preact, ti), inv_t);
    const StepCache& top = trace.caches[ti].back();
    Tensor h_top = hadamard(top.o, map(top.c, ScalarFn::Tanh));
    if (dropout) h_top = hadamard(h_top, trace.masks[layers]);
    add_inplace(out.grads.readout.w, matmul(transpose(dy), h_top));
    add_inplace(out.grads.readout.b, colsum(dy));
    Tensor dtop = matmul(dy, m.readout.w);
    if (dropout) dtop = hadamard(dtop, trace.masks[layers]);
    add_inplace(dh[layers - 1], dtop);

    for (std::size_t l = layers; l-- > 0;) {
      Tensor dx;
      Tensor* dx_ptr = (l > 0) ? &dx : nullptr;
      Tensor dh_prev, dc_prev;
      lstm_step_backward(m.lstm[l], trace.caches[ti][l], dh[l], dc[l],
                         out.grads.lstm[l], dx_ptr, dh_prev, dc_prev);
      dh[l] = std::move(dh_prev);
      dc[l] = std::move(dc_prev);
      if (l > 0) {
        if (dropout) dx = hadamard(dx, trace.masks[l]);
        add_inplace(dh[l - 1], dx);
      }
    }
  }
  return out;
}

Dataset make_labelled_dataset(const GenConfig& cfg, LabelScheme scheme,
                              Rng& rng, const DigitBank& bank,
                              std::size_t count) {
  Dataset data;
  data.sequences.reserve(count);
  data.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    VideoSequence seq = gen_sequence(cfg, rng, bank);
    data.sequences.push_back(seq.frames);
    data.labels.push_back(gen_labels(seq, scheme));
  }
  return data;
}

Dataset load_percept_dataset(const std::string& svt_path,
                             const std::string& labels_json_path) {
  Tensor all = svt_load(svt_path);
  if (all.ndim() != 3) {
    throw FormatError("percepts: tensor must be [N x T x D]");
  }
  std::ifstream in(labels_json_path);
  if (!in) throw FormatError("percepts: cannot open " + labels_json_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("percepts labels: ") + e.what());
  }
  if (!j.is_array() || j.size() != all.extent(0)) {
    throw FormatError("percepts: labels array does not match sequence count");
  }
  Dataset data;
  const std::size_t T = all.extent(1), d = all.extent(2);
  for (std::size_t n = 0; n < all.extent(0); ++n) {
    Tensor seq({T, d});
    std::copy(all.data() + n * T * d, all.data() + (n + 1) * T * d,
              seq.data());
    data.sequences.push_back(std::move(seq));
    data.labels.push_back(j[n].get<int>());
  }
  return data;
}

namespace {

std::vector<ParamRef> collect_classifier_refs(ClassifierModel& model,
                                              const ClassifierGradients& grads,
                                              ClassifierGradients& velocity) {
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
  std::vector<ParamRef> refs;
  refs.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    refs.push_back({names[i], params[i], gs[i], vs[i]});
  }
  return refs;
}

}  // namespace

ClassifierModel finetune(ClassifierModel m, const Dataset& data,
                         const TrainConfig& cfg, Rng& rng,
                         std::vector<double>* loss_log) {
  if (data.size() == 0) throw UsageError("finetune: empty dataset");
  const std::size_t T = data.sequences.front().extent(0);
  const std::size_t d = data.sequences.front().extent(1);
  for (const auto& s : data.sequences) {
    if (s.ndim() != 2 || s.extent(0) != T || s.extent(1) != d) {
      throw DimensionError("finetune: sequences must share one shape");
    }
  }
  for (int label : data.labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= m.spec.num_classes) {
      throw DataError("finetune: label out of range");
    }
  }
  ClassifierGradients velocity = zeros_like(m);
  Rng batch_rng = rng.split("finetune_batches");
  Rng dropout_rng = rng.split("finetune_dropout");
  const std::size_t batch = std::min(cfg.batch_size, data.size());
  for (std::size_t step = 0; step < cfg.max_steps; ++step) {
    Tensor frames({T, batch, d});
    std::vector<int> labels(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t idx = batch_rng.next_below(data.size());
      const Tensor& seq = data.sequences[idx];
      for (std::size_t t = 0; t < T; ++t) {
        std::copy(seq.data() + t * d, seq.data() + (t + 1) * d,
                  frames.data() + (t * batch + b) * d);
      }
      labels[b] = data.labels[idx];
    }
    ClassifierTrace trace;
    classifier_forward(m, frames, RunMode::Train, &dropout_rng, &trace);
    ClassifierBackwardResult res = classifier_backward(m, trace, frames, labels);
    if (loss_log != nullptr) loss_log->push_back(res.loss);
    auto refs = collect_classifier_refs(m, res.grads, velocity);
    sgd_momentum_step(refs, cfg.lr_at(step), cfg.momentum, cfg.grad_clip_norm);
  }
  return m;
}

std::pair<int, Tensor> predict_video(const ClassifierModel& m,
                                     const Tensor& frames) {
  if (frames.ndim() != 2 || frames.extent(1) != m.spec.input_dim) {
    throw DimensionError("predict_video: frames must be [L x D]");
  }
  const std::size_t L = frames.extent(0);
  const std::size_t T = m.spec.block_len;
  if (L < T) {
    throw UsageError("predict_video: video shorter than one block (" +
                     std::to_string(L) + " < " + std::to_string(T) + ")");
  }
  const std::size_t K = m.spec.num_classes;
  Tensor avg({K});
  std::size_t blocks = 0;
  for (std::size_t start = 0; start + T <= L; start += m.spec.stride) {
    Tensor block({T, 1, m.spec.input_dim});
    std::copy(frames.data() + start * m.spec.input_dim,
              frames.data() + (start + T) * m.spec.input_dim, block.data());
    const Tensor logits = classifier_forward(m, block, RunMode::Generate,
                                             nullptr, nullptr);
    // Average the per-step probabilities within the block.
    Tensor block_avg({K});
    for (std::size_t t = 0; t < T; ++t) {
      Tensor step({1, K});
      std::copy(logits.data() + t * K, logits.data() + (t + 1) * K,
                step.data());
      const Tensor probs = softmax_rows(step);
      for (std::size_t k = 0; k < K; ++k) block_avg[k] += probs[k];
    }
    for (std::size_t k = 0; k < K; ++k) {
      avg[k] += block_avg[k] / static_cast<double>(T);
    }
    ++blocks;
  }
  for (std::size_t k = 0; k < K; ++k) avg[k] /= static_cast<double>(blocks);
  int best = 0;
  for (std::size_t k = 1; k < K; ++k) {
    if (avg[k] > avg[best]) best = static_cast<int>(k);
  }
  return {best, avg};
}

double evaluate_accuracy(const ClassifierModel& m, const Dataset& data) {
  if (data.size() == 0) throw UsageError("evaluate_accuracy: empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (predict_video(m, data.sequences[i]).first == data.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace seqvid
