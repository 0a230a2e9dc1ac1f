#pragma once

#include <array>
#include <string>
#include <vector>

#include "seqvid/rng.hpp"
#include "seqvid/tensor.hpp"

namespace seqvid {

// A bank of square digit images with values in [0, 1].
struct DigitBank {
  Tensor images;  // [N x S x S]
  std::vector<int> labels;

  std::size_t count() const { return labels.size(); }
  std::size_t digit_size() const { return images.extent(1); }
  Tensor image(std::size_t i) const;  // [S x S]
};

// Reads the classic IDX pair (0x00000803 images / 0x00000801 labels),
// scaling pixel bytes by 1/255.
DigitBank load_idx(const std::string& images_path,
                   const std::string& labels_path);
void save_idx(const DigitBank& bank, const std::string& images_path,
              const std::string& labels_path);

// Procedural 28x28 glyph bank (ten classes, jittered instances) for runs
// where the real digit files are not on disk.
DigitBank synthetic_bank(std::size_t per_class, Rng& rng);

struct GenConfig {
  std::size_t canvas = 64;
  std::size_t num_digits = 2;
  std::size_t seq_len = 20;
  double vel_min = 2.0;
  double vel_max = 5.0;
  bool binarize = true;
  std::size_t digit_size = 28;

  void validate() const;
  double pos_max() const {
    return static_cast<double>(canvas - digit_size);
  }

  // CI-speed preset: 32x32 canvas, one 2x-downsampled digit, 10+10 frames.
  static GenConfig desk();
};

struct VideoSequence {
  Tensor frames;  // [seq_len x canvas^2], values in [0,1] ({0,1} binarized)
  std::vector<int> digit_ids;
  std::vector<std::vector<std::array<double, 2>>> trajectories;  // [digit][t]
  std::vector<std::vector<std::array<double, 2>>> velocity_history;
  std::vector<std::array<double, 2>> initial_velocities;
  int motion_class = -1;
};

struct DigitSpawn {
  Tensor image;  // [digit_size x digit_size]
  std::array<double, 2> pos;
  std::array<double, 2> vel;
  int label;
};

// Position uniform over [0, canvas-digit_size]^2; direction uniform on the
// unit circle; speed uniform over [vel_min, vel_max].
DigitSpawn spawn_digit(const GenConfig& cfg, Rng& rng, const DigitBank& bank);

// One bounce step per axis: reflect the overshoot about the wall and flip
// the velocity. vel_max < hi - lo rules out double reflections.
void step_dynamics(std::array<double, 2>& pos, std::array<double, 2>& vel,
                   double lo, double hi);

// Stamps each digit at its rounded position, combining overlaps with
// elementwise max, then thresholds at 0.5 when cfg.binarize is set.
Tensor render_frame(const GenConfig& cfg, const std::vector<Tensor>& digits,
                    const std::vector<std::array<double, 2>>& positions);

VideoSequence gen_sequence(const GenConfig& cfg, Rng& rng,
                           const DigitBank& bank);

enum class LabelScheme { DigitIdentity, MotionOctant };
int gen_labels(const VideoSequence& seq, LabelScheme scheme);

// Integer-factor box-filter downscale of a square [S x S] image.
Tensor downscale_box(const Tensor& img, std::size_t target);

}  // namespace seqvid
