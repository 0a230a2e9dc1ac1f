#include <cmath>
#include <filesystem>
#include <fstream>
#include <doctest.h>

#include <json.hpp>

#include "seqvid/error.hpp"
#include "seqvid/trainer.hpp"

using namespace seqvid;

namespace {

std::string tmp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// A tiny but end-to-end training configuration: 8x8 canvas, one 4x4 digit.
TrainConfig micro_config() {
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.learning_rate = 1e-2;
  cfg.momentum = 0.9;
  cfg.grad_clip_norm = 10.0;
  cfg.max_steps = 50;
  cfg.eval_every = 5;
  cfg.seed = 3;
  cfg.model.variant = Variant::Composite;
  cfg.model.layers = 1;
  cfg.model.hidden_dim = 12;
  cfg.model.input_dim = 64;
  cfg.model.t_in = 3;
  cfg.model.t_future = 3;
  cfg.model.output_unit = OutputUnit::Logistic;
  cfg.data.canvas = 8;
  cfg.data.digit_size = 4;
  cfg.data.num_digits = 1;
  cfg.data.seq_len = 6;
  cfg.data.vel_min = 0.5;
  cfg.data.vel_max = 1.5;
  return cfg;
}

DigitBank micro_bank() {
  Rng rng(1);
  return synthetic_bank(4, rng);
}

ModelSpec combo_spec(Variant v, bool conditional, std::size_t layers) {
  ModelSpec spec;
  spec.variant = v;
  spec.layers = layers;
  spec.hidden_dim = 6;
  spec.input_dim = 5;
  spec.t_in = 3;
  spec.t_future = (v == Variant::Autoencoder) ? 0 : 2;
  spec.conditional_recon = conditional;
  spec.conditional_future = conditional;
  spec.output_unit = OutputUnit::Logistic;
  return spec;
}

Tensor random_frames(std::size_t t, std::size_t b, std::size_t d, Rng& rng) {
  Tensor frames({t, b, d});
  for (std::size_t i = 0; i < frames.size(); ++i) {
    frames[i] = rng.next_unit() < 0.3 ? 1.0 : 0.0;
  }
  return frames;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("sgd: zero gradients leave parameters alone, decay velocity") {
  Tensor p({2}, {1.0, -2.0});
  Tensor g({2});
  Tensor v({2}, {0.4, -0.2});
  std::vector<ParamRef> refs{{"p", &p, &g, &v}};
  sgd_momentum_step(refs, 0.1, 0.9, 10.0);
  CHECK(p[0] == doctest::Approx(1.0 + 0.36));
  CHECK(v[0] == doctest::Approx(0.36));
  CHECK(v[1] == doctest::Approx(-0.18));
}

TEST_CASE("sgd: momentum 0, lr 1 is plain gradient descent") {
  Tensor p({2}, {1.0, 2.0});
  Tensor g({2}, {0.25, -0.5});
  Tensor v({2});
  std::vector<ParamRef> refs{{"p", &p, &g, &v}};
  sgd_momentum_step(refs, 1.0, 0.0, 0.0);
  CHECK(p[0] == 0.75);
  CHECK(p[1] == 2.5);
}

TEST_CASE("sgd: hand-iterated momentum sequence on f(p)=p^2") {
  Tensor p({1}, {1.0});
  Tensor v({1});
  const double seq[3] = {1.0, 0.8, 0.46};
  CHECK(p[0] == seq[0]);
  for (int step = 0; step < 2; ++step) {
    Tensor g({1}, {2.0 * p[0]});
    std::vector<ParamRef> refs{{"p", &p, &g, &v}};
    sgd_momentum_step(refs, 0.1, 0.9, 0.0);
    CHECK(p[0] == doctest::Approx(seq[step + 1]).epsilon(1e-12));
  }
}

TEST_CASE("sgd: clipping rescales but keeps the direction") {
  Tensor p({3}, {0.0, 0.0, 0.0});
  Tensor g({3}, {30.0, -40.0, 0.0});  // norm 50 > clip 10
  Tensor v({3});
  std::vector<ParamRef> refs{{"p", &p, &g, &v}};
  sgd_momentum_step(refs, 1.0, 0.0, 10.0);
  // update = -lr * (clip/norm) * g
  CHECK(p[0] == doctest::Approx(-6.0).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(8.0).epsilon(1e-12));
  // cosine between the update and -g is exactly one up to rounding
  const double dot = p[0] * -g[0] + p[1] * -g[1];
  const double na = std::hypot(p[0], p[1]);
  const double nb = std::hypot(g[0], g[1]);
  CHECK(dot / (na * nb) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sgd: NaN gradients name the offending tensor") {
  Tensor p({1}, {0.0});
  Tensor g({1}, {std::nan("")});
  Tensor v({1});
  std::vector<ParamRef> refs{{"encoder/0/w_xi", &p, &g, &v}};
  try {
    sgd_momentum_step(refs, 0.1, 0.9, 10.0);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("encoder/0/w_xi") != std::string::npos);
  }
}

TEST_CASE("make_batch is deterministic and shaped correctly") {
  const TrainConfig cfg = micro_config();
  const DigitBank bank = micro_bank();
  Rng a(5), b(5);
  const Batch ba = make_batch(cfg.data, cfg.model, a, bank, 4);
  const Batch bb = make_batch(cfg.data, cfg.model, b, bank, 4);
  CHECK(ba.frames_in.shape() == std::vector<std::size_t>{3, 4, 64});
  CHECK(ba.frames_future.shape() == std::vector<std::size_t>{3, 4, 64});
  for (std::size_t i = 0; i < ba.frames_in.size(); ++i) {
    CHECK(ba.frames_in[i] == bb.frames_in[i]);
  }
}

TEST_CASE("training runs, logs losses, and is seed-deterministic") {
  TrainConfig cfg = micro_config();
  cfg.max_steps = 10;
  const DigitBank bank = micro_bank();
  Trainer t1(cfg, bank);
  t1.run(10);
  CHECK(t1.step() == 10);
  CHECK(t1.loss_history().size() == 10);
  for (const auto& row : t1.loss_history()) {
    CHECK(std::isfinite(row.total));
    CHECK(row.total == doctest::Approx(row.recon + row.future));
  }
  Trainer t2(cfg, bank);
  t2.run(10);
  const std::string pa = tmp_path("seqvid_det_a.svck");
  const std::string pb = tmp_path("seqvid_det_b.svck");
  checkpoint_save(t1.checkpoint(), pa);
  checkpoint_save(t2.checkpoint(), pb);
  CHECK(read_bytes(pa) == read_bytes(pb));
}

TEST_CASE("checkpoint: save-load-save produces identical bytes") {
  TrainConfig cfg = micro_config();
  cfg.max_steps = 4;
  const DigitBank bank = micro_bank();
  Trainer t(cfg, bank);
  t.run(4);
  const std::string p1 = tmp_path("seqvid_ck1.svck");
  const std::string p2 = tmp_path("seqvid_ck2.svck");
  checkpoint_save(t.checkpoint(), p1);
  const Checkpoint loaded = checkpoint_load(p1);
  checkpoint_save(loaded, p2);
  CHECK(read_bytes(p1) == read_bytes(p2));
}

TEST_CASE("checkpoint: header is plain JSON, flipped payload byte is caught") {
  TrainConfig cfg = micro_config();
  cfg.max_steps = 2;
  const DigitBank bank = micro_bank();
  Trainer t(cfg, bank);
  t.run(2);
  const std::string path = tmp_path("seqvid_ck_corrupt.svck");
  checkpoint_save(t.checkpoint(), path);

  // The JSON header sits after magic(4) + version(4) + length(8).
  std::string bytes = read_bytes(path);
  const std::uint64_t hlen = [&] {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= std::uint64_t(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
    }
    return v;
  }();
  const std::string header = bytes.substr(16, hlen);
  const nlohmann::json j = nlohmann::json::parse(header);
  CHECK(j.at("step").get<int>() == 2);
  CHECK(j.at("config").at("model").at("variant") == "composite");

  // Flip one byte deep inside the record region.
  bytes[bytes.size() - 100] ^= 0x40;
  {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  CHECK_THROWS_AS(checkpoint_load(path), FormatError);
}

TEST_CASE("checkpoint: shape mismatch against config is rejected") {
  TrainConfig cfg = micro_config();
  cfg.max_steps = 2;
  const DigitBank bank = micro_bank();
  Trainer t(cfg, bank);
  t.run(2);
  Checkpoint ck = t.checkpoint();
  ck.config.model.hidden_dim = 16;  // lie about the architecture
  const std::string path = tmp_path("seqvid_ck_shape.svck");
  checkpoint_save(ck, path);
  CHECK_THROWS_AS(checkpoint_load(path), FormatError);
}

TEST_CASE("interrupt and resume reproduce the uninterrupted run exactly") {
  TrainConfig cfg = micro_config();
  cfg.max_steps = 12;
  const DigitBank bank = micro_bank();

  Trainer full(cfg, bank);
  full.run(12);

  Trainer part(cfg, bank);
  part.run(7);
  const std::string path = tmp_path("seqvid_ck_resume.svck");
  checkpoint_save(part.checkpoint(), path);
  Trainer resumed(checkpoint_load(path), bank);
  resumed.run(12);

  REQUIRE(resumed.loss_history().size() == full.loss_history().size());
  for (std::size_t i = 0; i < full.loss_history().size(); ++i) {
    CHECK(resumed.loss_history()[i].total == full.loss_history()[i].total);
  }
  const std::string pa = tmp_path("seqvid_resume_a.svck");
  const std::string pb = tmp_path("seqvid_resume_b.svck");
  checkpoint_save(full.checkpoint(), pa);
  checkpoint_save(resumed.checkpoint(), pb);
  CHECK(read_bytes(pa) == read_bytes(pb));
}

TEST_CASE("learning-rate schedule halves every third of the run") {
  TrainConfig cfg = micro_config();
  cfg.learning_rate = 8e-3;
  cfg.max_steps = 300;
  CHECK(cfg.lr_at(0) == 8e-3);
  CHECK(cfg.lr_at(99) == 8e-3);
  CHECK(cfg.lr_at(100) == 4e-3);
  CHECK(cfg.lr_at(200) == 2e-3);
}

TEST_CASE("grad_check passes on every variant combination") {
  Rng dat(50);
  for (Variant v : {Variant::Autoencoder, Variant::FuturePredictor,
                    Variant::Composite}) {
    for (bool cond : {false, true}) {
      for (std::size_t layers : {1u, 2u}) {
        ModelSpec spec = combo_spec(v, cond, layers);
        Rng rng(60 + layers);
        Model m = model_build(spec, rng);
        const Tensor fin = random_frames(spec.t_in, 2, spec.input_dim, dat);
        const Tensor ffut =
            spec.future_len() > 0
                ? random_frames(spec.future_len(), 2, spec.input_dim, dat)
                : Tensor();
        const GradCheckReport rep = grad_check(m, fin, ffut, 1e-6, 4, 99);
        INFO(variant_name(v), " cond=", cond, " layers=", layers,
             " worst=", rep.worst_tensor);
        CHECK(rep.max_rel_error < 1e-5);
      }
    }
  }
}

TEST_CASE("grad_check catches a corrupted backward pass") {
  ModelSpec spec = combo_spec(Variant::Composite, false, 1);
  Rng rng(70);
  Model m = model_build(spec, rng);
  Rng dat(71);
  const Tensor fin = random_frames(spec.t_in, 2, spec.input_dim, dat);
  const Tensor ffut = random_frames(spec.t_future, 2, spec.input_dim, dat);
  ForwardTrace trace = composite_forward(m, fin, ffut, RunMode::Train);
  Gradients g = backward(m, trace);
  // Sign-flip one term of the cell-input weight gradient.
  for (std::size_t i = 0; i < g.encoder[0].w_xc.size(); ++i) {
    g.encoder[0].w_xc[i] = -g.encoder[0].w_xc[i];
  }
  const GradCheckReport rep =
      grad_check_against(m, fin, ffut, g, 1e-6, 8, 99);
  CHECK(rep.max_rel_error > 1e-2);
  CHECK(rep.worst_tensor == "encoder/0/w_xc");
}

TEST_CASE("grad_check step sizes agree within an order of magnitude") {
  ModelSpec spec = combo_spec(Variant::Composite, true, 1);
  Rng rng(80);
  Model m = model_build(spec, rng);
  Rng dat(81);
  const Tensor fin = random_frames(spec.t_in, 2, spec.input_dim, dat);
  const Tensor ffut = random_frames(spec.t_future, 2, spec.input_dim, dat);
  const GradCheckReport r6 = grad_check(m, fin, ffut, 1e-6, 4, 99);
  const GradCheckReport r7 = grad_check(m, fin, ffut, 1e-7, 4, 99);
  CHECK(r6.max_rel_error < 1e-5);
  CHECK(r7.max_rel_error < 1e-4);
  const double hi = std::max(r6.max_rel_error, r7.max_rel_error);
  const double lo = std::min(r6.max_rel_error, r7.max_rel_error);
  CHECK(hi / std::max(lo, 1e-300) < 1000.0);
}

TEST_CASE("grad_check rejects oversized models") {
  ModelSpec spec;
  spec.variant = Variant::Composite;
  spec.layers = 2;
  spec.hidden_dim = 96;
  spec.input_dim = 128;
  spec.t_in = 2;
  spec.t_future = 2;
  Rng rng(90);
  Model m = model_build(spec, rng);
  REQUIRE(m.param_count() > 100000);
  Rng dat(91);
  const Tensor fin = random_frames(2, 1, 128, dat);
  const Tensor ffut = random_frames(2, 1, 128, dat);
  CHECK_THROWS_AS(grad_check(m, fin, ffut), UsageError);
}

TEST_CASE("config validation") {
  TrainConfig cfg = micro_config();
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = micro_config();
  cfg.data.canvas = 16;  // canvas^2 != input_dim
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = micro_config();
  cfg.data.seq_len = 4;  // shorter than t_in + t_future
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("loss csv format") {
  const std::string csv =
      loss_history_csv({{1, 0.5, 0.25, 0.75}, {2, 0.4, 0.2, 0.6}});
  CHECK(csv.find("step,recon_loss,future_loss,total\n") == 0);
  CHECK(csv.find("1,0.5,0.25,0.75\n") != std::string::npos);
}

}  // TEST_SUITE
