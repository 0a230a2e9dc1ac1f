#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "seqvid/tensor.hpp"

namespace seqvid {

// Grid of per-tile-rescaled images. The sheet is exactly
// [grid_rows*tile_h x grid_cols*tile_w]; ranges records the (lo, hi) used
// to rescale each tile to [0, 1].
struct TileSheet {
  Tensor image;
  std::vector<std::array<double, 2>> ranges;
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;
};

// rows: one flat vector per tile, reshaped to [tile_h x tile_w].
TileSheet tile_rows(const std::vector<Tensor>& rows, std::size_t tile_h,
                    std::size_t tile_w);

// Row indices of a [N x D] matrix ordered by descending L2 norm (ties by
// lower index), truncated to k.
std::vector<std::size_t> topk_rows_by_l2(const Tensor& mat, std::size_t k);

// Frames (each flat, canvas^2) tiled horizontally into [canvas x T*canvas].
Tensor frame_strip(const std::vector<Tensor>& frames, std::size_t canvas);

// Seed-driven permutation of 0..n-1 (Fisher-Yates).
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace seqvid
