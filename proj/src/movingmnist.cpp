#include "seqvid/movingmnist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "seqvid/error.hpp"

namespace seqvid {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint32_t read_be32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw FormatError(std::string("idx: truncated ") + what);
  }
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Tensor DigitBank::image(std::size_t i) const {
  const std::size_t s = digit_size();
  Tensor out({s, s});
  std::copy(images.data() + i * s * s, images.data() + (i + 1) * s * s,
            out.data());
  return out;
}

DigitBank load_idx(const std::string& images_path,
                   const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw FormatError("idx: cannot open " + images_path);
  if (read_be32(img, "image magic") != 0x00000803u) {
    throw FormatError("idx: bad image magic in " + images_path);
  }
  const std::uint32_t n = read_be32(img, "image count");
  const std::uint32_t rows = read_be32(img, "rows");
  const std::uint32_t cols = read_be32(img, "cols");
  if (n == 0 || rows == 0 || cols == 0 || rows != cols) {
    throw FormatError("idx: unsupported image dims");
  }
  std::vector<unsigned char> bytes(std::size_t(n) * rows * cols);
  if (!img.read(reinterpret_cast<char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()))) {
    throw FormatError("idx: truncated image data in " + images_path);
  }

  std::ifstream lbl(labels_path, std::ios::binary);
  if (!lbl) throw FormatError("idx: cannot open " + labels_path);
  if (read_be32(lbl, "label magic") != 0x00000801u) {
    throw FormatError("idx: bad label magic in " + labels_path);
  }
  const std::uint32_t ln = read_be32(lbl, "label count");
  if (ln != n) {
    throw FormatError("idx: image/label count mismatch (" + std::to_string(n) +
                      " vs " + std::to_string(ln) + ")");
  }
  std::vector<unsigned char> lbytes(ln);
  if (!lbl.read(reinterpret_cast<char*>(lbytes.data()),
                static_cast<std::streamsize>(lbytes.size()))) {
    throw FormatError("idx: truncated label data in " + labels_path);
  }

  DigitBank bank;
  bank.images = Tensor({n, rows, cols});
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bank.images[i] = static_cast<double>(bytes[i]) / 255.0;
  }
  bank.labels.assign(lbytes.begin(), lbytes.end());
  return bank;
}

void save_idx(const DigitBank& bank, const std::string& images_path,
              const std::string& labels_path) {
  const std::size_t n = bank.count();
  const std::size_t s = bank.digit_size();
  std::ofstream img(images_path, std::ios::binary);
  if (!img) throw FormatError("idx: cannot write " + images_path);
  write_be32(img, 0x00000803u);
  write_be32(img, static_cast<std::uint32_t>(n));
  write_be32(img, static_cast<std::uint32_t>(s));
  write_be32(img, static_cast<std::uint32_t>(s));
  for (std::size_t i = 0; i < bank.images.size(); ++i) {
    const double v = std::clamp(bank.images[i], 0.0, 1.0);
    const unsigned char b = static_cast<unsigned char>(std::lround(v * 255.0));
    img.write(reinterpret_cast<const char*>(&b), 1);
  }
  std::ofstream lbl(labels_path, std::ios::binary);
  if (!lbl) throw FormatError("idx: cannot write " + labels_path);
  write_be32(lbl, 0x00000801u);
  write_be32(lbl, static_cast<std::uint32_t>(n));
  for (int label : bank.labels) {
    const unsigned char b = static_cast<unsigned char>(label);
    lbl.write(reinterpret_cast<const char*>(&b), 1);
  }
}

namespace {

// 5x7 glyphs, one bit row per entry, MSB = leftmost of the 5 columns.
constexpr unsigned char kGlyphs[10][7] = {
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
};

}  // namespace

DigitBank synthetic_bank(std::size_t per_class, Rng& rng) {
  if (per_class == 0) throw ParameterError("synthetic_bank: per_class >= 1");
  const std::size_t s = 28;
  const std::size_t n = 10 * per_class;
  DigitBank bank;
  bank.images = Tensor({n, s, s});
  bank.labels.resize(n);
  std::size_t idx = 0;
  for (int cls = 0; cls < 10; ++cls) {
    for (std::size_t k = 0; k < per_class; ++k, ++idx) {
      // Glyph scaled 3x to 15x21, placed with a per-instance jitter.
      const std::size_t ox = 2 + rng.next_below(10);  // 15 wide in 28
      const std::size_t oy = 1 + rng.next_below(6);   // 21 tall in 28
      double* base = bank.images.data() + idx * s * s;
      for (std::size_t gr = 0; gr < 7; ++gr) {
        for (std::size_t gc = 0; gc < 5; ++gc) {
          if (!((kGlyphs[cls][gr] >> (4 - gc)) & 1)) continue;
          for (std::size_t dr = 0; dr < 3; ++dr) {
            for (std::size_t dc = 0; dc < 3; ++dc) {
              base[(oy + gr * 3 + dr) * s + (ox + gc * 3 + dc)] = 1.0;
            }
          }
        }
      }
      bank.labels[idx] = cls;
    }
  }
  return bank;
}

void GenConfig::validate() const {
  if (canvas < digit_size) {
    throw ParameterError("GenConfig: canvas smaller than digit");
  }
  if (seq_len < 2) throw ParameterError("GenConfig: seq_len must be >= 2");
  if (num_digits == 0) throw ParameterError("GenConfig: num_digits >= 1");
  if (vel_min < 0.0 || vel_min > vel_max) {
    throw ParameterError("GenConfig: need 0 <= vel_min <= vel_max");
  }
  // Single-reflection dynamics requires the per-step travel to fit in the
  // box (a zero range is fine, nothing moves).
  if (vel_max > 0.0 && vel_max >= pos_max()) {
    throw ParameterError("GenConfig: vel_max must be < canvas - digit_size");
  }
  if (digit_size == 0) throw ParameterError("GenConfig: digit_size >= 1");
}

GenConfig GenConfig::desk() {
  GenConfig cfg;
  cfg.canvas = 32;
  cfg.num_digits = 1;
  cfg.seq_len = 20;
  cfg.digit_size = 14;
  return cfg;
}

Tensor downscale_box(const Tensor& img, std::size_t target) {
  const std::size_t s = img.extent(0);
  if (img.ndim() != 2 || img.extent(1) != s) {
    throw DimensionError("downscale_box: image must be square");
  }
  if (target == s) return img;
  if (target == 0 || s % target != 0) {
    throw ParameterError("downscale_box: target must divide source size");
  }
  const std::size_t f = s / target;
  Tensor out({target, target});
  const double inv = 1.0 / static_cast<double>(f * f);
  for (std::size_t r = 0; r < target; ++r) {
    for (std::size_t c = 0; c < target; ++c) {
      double acc = 0.0;
      for (std::size_t dr = 0; dr < f; ++dr)
        for (std::size_t dc = 0; dc < f; ++dc)
          acc += img[(r * f + dr) * s + (c * f + dc)];
      out[r * target + c] = acc * inv;
    }
  }
  return out;
}

DigitSpawn spawn_digit(const GenConfig& cfg, Rng& rng, const DigitBank& bank) {
  if (bank.count() == 0) throw UsageError("spawn_digit: empty digit bank");
  DigitSpawn d;
  // Fixed draw order: digit index, x, y, angle, speed.
  const std::size_t idx = rng.next_below(bank.count());
  const double hi = cfg.pos_max();
  d.pos[0] = rng.uniform(0.0, hi);
  d.pos[1] = rng.uniform(0.0, hi);
  const double theta = rng.uniform(0.0, 2.0 * kPi);
  const double speed = rng.uniform(cfg.vel_min, cfg.vel_max);
  d.vel[0] = speed * std::cos(theta);
  d.vel[1] = speed * std::sin(theta);
  d.label = bank.labels[idx];
  Tensor img = bank.image(idx);
  d.image = (cfg.digit_size == bank.digit_size())
                ? std::move(img)
                : downscale_box(img, cfg.digit_size);
  return d;
}

void step_dynamics(std::array<double, 2>& pos, std::array<double, 2>& vel,
                   double lo, double hi) {
  for (int axis = 0; axis < 2; ++axis) {
    double p = pos[axis] + vel[axis];
    if (p < lo) {
      p = 2.0 * lo - p;
      vel[axis] = -vel[axis];
    }
    if (p > hi) {
      p = 2.0 * hi - p;
      vel[axis] = -vel[axis];
    }
    pos[axis] = p;
  }
}

Tensor render_frame(const GenConfig& cfg, const std::vector<Tensor>& digits,
                    const std::vector<std::array<double, 2>>& positions) {
  if (digits.size() != positions.size()) {
    throw DimensionError("render_frame: digit/position count mismatch");
  }
  const std::size_t cv = cfg.canvas;
  Tensor frame({cv * cv});
  for (std::size_t d = 0; d < digits.size(); ++d) {
    const std::size_t s = digits[d].extent(0);
    const auto ox = static_cast<std::size_t>(std::lround(positions[d][0]));
    const auto oy = static_cast<std::size_t>(std::lround(positions[d][1]));
    for (std::size_t r = 0; r < s; ++r) {
      for (std::size_t c = 0; c < s; ++c) {
        double& px = frame[(oy + r) * cv + (ox + c)];
        px = std::max(px, digits[d][r * s + c]);
      }
    }
  }
  if (cfg.binarize) {
    for (std::size_t i = 0; i < frame.size(); ++i) {
      frame[i] = frame[i] > 0.5 ? 1.0 : 0.0;
    }
  }
  return frame;
}

VideoSequence gen_sequence(const GenConfig& cfg, Rng& rng,
                           const DigitBank& bank) {
  cfg.validate();
  VideoSequence seq;
  std::vector<Tensor> digit_imgs;
  std::vector<std::array<double, 2>> pos(cfg.num_digits);
  std::vector<std::array<double, 2>> vel(cfg.num_digits);
  seq.trajectories.resize(cfg.num_digits);
  seq.velocity_history.resize(cfg.num_digits);
  for (std::size_t d = 0; d < cfg.num_digits; ++d) {
    DigitSpawn sp = spawn_digit(cfg, rng, bank);
    digit_imgs.push_back(std::move(sp.image));
    pos[d] = sp.pos;
    vel[d] = sp.vel;
    seq.digit_ids.push_back(sp.label);
    seq.initial_velocities.push_back(sp.vel);
    seq.trajectories[d].push_back(sp.pos);
    seq.velocity_history[d].push_back(sp.vel);
  }
  seq.frames = Tensor({cfg.seq_len, cfg.canvas * cfg.canvas});
  Tensor frame = render_frame(cfg, digit_imgs, pos);
  std::copy(frame.data(), frame.data() + frame.size(), seq.frames.data());
  const double hi = cfg.pos_max();
  for (std::size_t t = 1; t < cfg.seq_len; ++t) {
    for (std::size_t d = 0; d < cfg.num_digits; ++d) {
      step_dynamics(pos[d], vel[d], 0.0, hi);
      seq.trajectories[d].push_back(pos[d]);
      seq.velocity_history[d].push_back(vel[d]);
    }
    frame = render_frame(cfg, digit_imgs, pos);
    std::copy(frame.data(), frame.data() + frame.size(),
              seq.frames.data() + t * frame.size());
  }
  seq.motion_class = gen_labels(seq, LabelScheme::MotionOctant);
  return seq;
}

int gen_labels(const VideoSequence& seq, LabelScheme scheme) {
  if (seq.digit_ids.empty() || seq.initial_velocities.empty()) {
    throw UsageError("gen_labels: sequence carries no generation metadata");
  }
  switch (scheme) {
    case LabelScheme::DigitIdentity:
      return seq.digit_ids.front();
    case LabelScheme::MotionOctant: {
      const auto& v = seq.initial_velocities.front();
      double theta = std::atan2(v[1], v[0]);
      if (theta < 0.0) theta += 2.0 * kPi;
      int octant = static_cast<int>(theta / (kPi / 4.0));
      return std::min(octant, 7);
    }
  }
  throw UsageError("gen_labels: unknown scheme");
}

}  // namespace seqvid
