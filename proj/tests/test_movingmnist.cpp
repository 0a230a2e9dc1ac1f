#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <doctest.h>

#include "seqvid/error.hpp"
#include "seqvid/movingmnist.hpp"

using namespace seqvid;

namespace {

std::string tmp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

// Chi-square statistic against a uniform distribution over `bins`.
double chi_square_uniform(const std::vector<std::size_t>& counts,
                          std::size_t total) {
  const double expected =
      static_cast<double>(total) / static_cast<double>(counts.size());
  double stat = 0.0;
  for (std::size_t c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

}  // namespace

TEST_SUITE("movingmnist") {

TEST_CASE("synthetic bank has ten balanced classes in [0,1]") {
  Rng rng(1);
  const DigitBank bank = synthetic_bank(5, rng);
  CHECK(bank.count() == 50);
  CHECK(bank.digit_size() == 28);
  std::vector<int> counts(10, 0);
  for (int label : bank.labels) ++counts[label];
  for (int c : counts) CHECK(c == 5);
  double maxv = 0.0;
  for (std::size_t i = 0; i < bank.images.size(); ++i) {
    CHECK(bank.images[i] >= 0.0);
    CHECK(bank.images[i] <= 1.0);
    maxv = std::max(maxv, bank.images[i]);
  }
  CHECK(maxv == 1.0);
}

TEST_CASE("idx round trip is exact for binary images") {
  Rng rng(2);
  const DigitBank bank = synthetic_bank(3, rng);
  const std::string ip = tmp_path("seqvid_test_images.idx");
  const std::string lp = tmp_path("seqvid_test_labels.idx");
  save_idx(bank, ip, lp);
  const DigitBank loaded = load_idx(ip, lp);
  CHECK(loaded.count() == bank.count());
  CHECK(loaded.labels == bank.labels);
  for (std::size_t i = 0; i < bank.images.size(); ++i) {
    CHECK(loaded.images[i] == bank.images[i]);
  }
}

TEST_CASE("idx loader rejects malformed files") {
  const std::string ip = tmp_path("seqvid_bad_images.idx");
  const std::string lp = tmp_path("seqvid_bad_labels.idx");
  {
    std::ofstream img(ip, std::ios::binary);
    const unsigned char bad[] = {0, 0, 8, 4};
    img.write(reinterpret_cast<const char*>(bad), 4);
  }
  CHECK_THROWS_AS(load_idx(ip, lp), FormatError);

  Rng rng(3);
  const DigitBank bank = synthetic_bank(2, rng);
  save_idx(bank, ip, lp);
  // Truncate the image payload.
  std::filesystem::resize_file(ip, 16 + bank.count() * 28 * 28 / 2);
  CHECK_THROWS_AS(load_idx(ip, lp), FormatError);

  // Count mismatch between images and labels.
  save_idx(bank, ip, lp);
  DigitBank fewer = bank;
  fewer.labels.pop_back();
  Tensor smaller({bank.count() - 1, 28, 28});
  std::copy(bank.images.data(), bank.images.data() + smaller.size(),
            smaller.data());
  fewer.images = smaller;
  save_idx(fewer, ip, tmp_path("seqvid_other_labels.idx"));
  CHECK_THROWS_AS(load_idx(ip, lp), FormatError);
  CHECK_THROWS_AS(load_idx("/nonexistent/file.idx", lp), FormatError);
}

TEST_CASE("spawn distribution: speeds, angles and positions") {
  Rng rng(4);
  DigitBank bank = synthetic_bank(1, rng);
  GenConfig cfg;
  cfg.canvas = 64;
  cfg.vel_min = 2.0;
  cfg.vel_max = 5.0;
  const double hi = cfg.pos_max();
  const std::size_t n = 100000;
  std::vector<std::size_t> angle_bins(16, 0);
  double min_speed = 1e9, max_speed = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const DigitSpawn d = spawn_digit(cfg, rng, bank);
    CHECK(d.pos[0] >= 0.0);
    CHECK(d.pos[0] <= hi);
    CHECK(d.pos[1] >= 0.0);
    CHECK(d.pos[1] <= hi);
    const double speed = std::hypot(d.vel[0], d.vel[1]);
    min_speed = std::min(min_speed, speed);
    max_speed = std::max(max_speed, speed);
    double theta = std::atan2(d.vel[1], d.vel[0]);
    if (theta < 0) theta += 2 * 3.14159265358979323846;
    const auto bin = static_cast<std::size_t>(
        theta / (2 * 3.14159265358979323846) * 16.0);
    ++angle_bins[std::min<std::size_t>(bin, 15)];
  }
  CHECK(min_speed >= cfg.vel_min - 1e-9);
  CHECK(max_speed <= cfg.vel_max + 1e-9);
  // chi-square, 15 dof, p = 0.01 critical value.
  CHECK(chi_square_uniform(angle_bins, n) < 30.578);
}

TEST_CASE("degenerate velocity range gives exactly that speed") {
  Rng rng(5);
  DigitBank bank = synthetic_bank(1, rng);
  GenConfig cfg;
  cfg.vel_min = cfg.vel_max = 3.0;
  for (int i = 0; i < 200; ++i) {
    const DigitSpawn d = spawn_digit(cfg, rng, bank);
    CHECK(std::abs(std::hypot(d.vel[0], d.vel[1]) - 3.0) < 1e-12);
  }
}

TEST_CASE("step_dynamics hand-checked reflections") {
  std::array<double, 2> pos{10.0, 10.0}, vel{3.0, 0.0};
  step_dynamics(pos, vel, 0.0, 36.0);
  CHECK(pos[0] == 13.0);
  CHECK(vel[0] == 3.0);

  pos = {35.0, 0.0};
  vel = {3.0, 0.0};
  step_dynamics(pos, vel, 0.0, 36.0);
  CHECK(pos[0] == 34.0);
  CHECK(vel[0] == -3.0);

  pos = {1.0, 0.0};
  vel = {-4.0, 0.0};
  step_dynamics(pos, vel, 0.0, 36.0);
  CHECK(pos[0] == 3.0);
  CHECK(vel[0] == 4.0);
}

TEST_CASE("reflection preserves speed for many random steps") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, 2> pos{rng.uniform(0.0, 36.0), rng.uniform(0.0, 36.0)};
    std::array<double, 2> vel{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    const double speed = std::hypot(vel[0], vel[1]);
    for (int t = 0; t < 100; ++t) {
      step_dynamics(pos, vel, 0.0, 36.0);
      CHECK(pos[0] >= 0.0);
      CHECK(pos[0] <= 36.0);
      CHECK(pos[1] >= 0.0);
      CHECK(pos[1] <= 36.0);
    }
    CHECK(std::abs(std::hypot(vel[0], vel[1]) - speed) < 1e-9);
  }
}

TEST_CASE("render: single stamp, idempotent overlap, disjoint additivity") {
  Rng rng(7);
  const DigitBank bank = synthetic_bank(1, rng);
  GenConfig cfg;
  cfg.canvas = 64;
  cfg.binarize = false;
  const Tensor digit = bank.image(0);

  const Tensor frame = render_frame(cfg, {digit}, {{0.0, 0.0}});
  for (std::size_t r = 0; r < 28; ++r) {
    for (std::size_t c = 0; c < 28; ++c) {
      CHECK(frame[r * 64 + c] == digit[r * 28 + c]);
    }
  }
  double rest = 0.0;
  for (std::size_t r = 0; r < 64; ++r) {
    for (std::size_t c = 0; c < 64; ++c) {
      if (r >= 28 || c >= 28) rest += std::abs(frame[r * 64 + c]);
    }
  }
  CHECK(rest == 0.0);

  const Tensor twice =
      render_frame(cfg, {digit, digit}, {{5.0, 9.0}, {5.0, 9.0}});
  const Tensor once = render_frame(cfg, {digit}, {{5.0, 9.0}});
  for (std::size_t i = 0; i < twice.size(); ++i) CHECK(twice[i] == once[i]);

  const Tensor left = render_frame(cfg, {digit}, {{0.0, 0.0}});
  const Tensor right = render_frame(cfg, {digit}, {{32.0, 32.0}});
  const Tensor both =
      render_frame(cfg, {digit, digit}, {{0.0, 0.0}, {32.0, 32.0}});
  for (std::size_t i = 0; i < both.size(); ++i) {
    CHECK(both[i] == left[i] + right[i]);
  }
}

TEST_CASE("gen_sequence shapes and special cases") {
  Rng rng(8);
  const DigitBank bank = synthetic_bank(2, rng);
  GenConfig cfg;  // paper defaults: 64 canvas, 2 digits, 20 frames
  Rng gen(9);
  const VideoSequence seq = gen_sequence(cfg, gen, bank);
  CHECK(seq.frames.extent(0) == 20);
  CHECK(seq.frames.extent(1) == 4096);
  CHECK(seq.digit_ids.size() == 2);

  GenConfig still = cfg;
  still.vel_min = still.vel_max = 0.0;
  Rng gen2(10);
  const VideoSequence fixed = gen_sequence(still, gen2, bank);
  for (std::size_t t = 1; t < 20; ++t) {
    for (std::size_t i = 0; i < 4096; ++i) {
      CHECK(fixed.frames[t * 4096 + i] == fixed.frames[i]);
    }
  }

  GenConfig one = cfg;
  one.num_digits = 1;
  GenConfig three = cfg;
  three.num_digits = 3;
  Rng g3(11), g4(12);
  CHECK(gen_sequence(one, g3, bank).digit_ids.size() == 1);
  CHECK(gen_sequence(three, g4, bank).digit_ids.size() == 3);
}

TEST_CASE("trajectories stay inside the box and speed is conserved") {
  Rng rng(13);
  const DigitBank bank = synthetic_bank(1, rng);
  const GenConfig cfg = GenConfig::desk();
  const double hi = cfg.pos_max();
  Rng gen(14);
  for (int n = 0; n < 200; ++n) {
    const VideoSequence seq = gen_sequence(cfg, gen, bank);
    for (const auto& traj : seq.trajectories) {
      for (const auto& pos : traj) {
        CHECK(pos[0] >= 0.0);
        CHECK(pos[0] <= hi);
        CHECK(pos[1] >= 0.0);
        CHECK(pos[1] <= hi);
      }
    }
    for (std::size_t d = 0; d < seq.velocity_history.size(); ++d) {
      const double s0 = std::hypot(seq.velocity_history[d][0][0],
                                   seq.velocity_history[d][0][1]);
      for (const auto& v : seq.velocity_history[d]) {
        CHECK(std::abs(std::hypot(v[0], v[1]) - s0) < 1e-9);
      }
    }
  }
}

TEST_CASE("reproducibility: same seed, same sequence") {
  Rng rng(15);
  const DigitBank bank = synthetic_bank(2, rng);
  const GenConfig cfg = GenConfig::desk();
  Rng a(99), b(99);
  const VideoSequence sa = gen_sequence(cfg, a, bank);
  const VideoSequence sb = gen_sequence(cfg, b, bank);
  CHECK(sa.digit_ids == sb.digit_ids);
  for (std::size_t i = 0; i < sa.frames.size(); ++i) {
    CHECK(sa.frames[i] == sb.frames[i]);
  }
}

TEST_CASE("binarized frames only contain zeros and ones") {
  Rng rng(16);
  const DigitBank bank = synthetic_bank(1, rng);
  const GenConfig cfg = GenConfig::desk();
  Rng gen(17);
  const VideoSequence seq = gen_sequence(cfg, gen, bank);
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    CHECK((seq.frames[i] == 0.0 || seq.frames[i] == 1.0));
  }
}

TEST_CASE("labels: digit identity and motion octants") {
  Rng rng(18);
  DigitBank sevens = synthetic_bank(1, rng);
  for (auto& label : sevens.labels) label = 7;
  GenConfig cfg = GenConfig::desk();
  Rng gen(19);
  const VideoSequence seq = gen_sequence(cfg, gen, sevens);
  CHECK(gen_labels(seq, LabelScheme::DigitIdentity) == 7);

  VideoSequence crafted;
  crafted.digit_ids = {0};
  const double deg = 3.14159265358979323846 / 180.0;
  crafted.initial_velocities = {
      {3.0 * std::cos(10 * deg), 3.0 * std::sin(10 * deg)}};
  CHECK(gen_labels(crafted, LabelScheme::MotionOctant) == 0);
  crafted.initial_velocities = {
      {3.0 * std::cos(100 * deg), 3.0 * std::sin(100 * deg)}};
  CHECK(gen_labels(crafted, LabelScheme::MotionOctant) == 2);

  VideoSequence empty;
  CHECK_THROWS_AS(gen_labels(empty, LabelScheme::MotionOctant), UsageError);
}

TEST_CASE("motion octant histogram is uniform") {
  Rng rng(20);
  const DigitBank bank = synthetic_bank(1, rng);
  const GenConfig cfg = GenConfig::desk();
  Rng gen(21);
  std::vector<std::size_t> bins(8, 0);
  const std::size_t n = 10000;
  for (std::size_t i = 0; i < n; ++i) {
    const VideoSequence seq = gen_sequence(cfg, gen, bank);
    ++bins[seq.motion_class];
  }
  // chi-square, 7 dof, p = 0.01 critical value.
  CHECK(chi_square_uniform(bins, n) < 18.475);
}

TEST_CASE("box downscale averages blocks") {
  Tensor img({4, 4});
  for (std::size_t i = 0; i < 16; ++i) img[i] = static_cast<double>(i);
  const Tensor half = downscale_box(img, 2);
  CHECK(half[0] == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
  CHECK(half[3] == doctest::Approx((10 + 11 + 14 + 15) / 4.0));
  CHECK_THROWS_AS(downscale_box(img, 3), ParameterError);
}

TEST_CASE("config validation") {
  GenConfig cfg;
  cfg.canvas = 20;
  cfg.digit_size = 28;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = GenConfig();
  cfg.seq_len = 1;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = GenConfig();
  cfg.vel_min = 5.0;
  cfg.vel_max = 2.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = GenConfig();
  cfg.vel_max = 40.0;  // would allow double reflections
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

}  // TEST_SUITE
