#include "seqvid/viz.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqvid/error.hpp"
#include "seqvid/rng.hpp"

namespace seqvid {

TileSheet tile_rows(const std::vector<Tensor>& rows, std::size_t tile_h,
                    std::size_t tile_w) {
  if (rows.empty()) throw UsageError("tile_rows: nothing to tile");
  for (const auto& r : rows) {
    if (r.size() != tile_h * tile_w) {
      throw DimensionError("tile_rows: tile size does not match geometry");
    }
  }
  TileSheet sheet;
  sheet.grid_cols = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(rows.size()))));
  sheet.grid_rows =
      (rows.size() + sheet.grid_cols - 1) / sheet.grid_cols;
  sheet.image =
      Tensor({sheet.grid_rows * tile_h, sheet.grid_cols * tile_w});
  const std::size_t sheet_w = sheet.grid_cols * tile_w;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const Tensor& tile = rows[n];
    double lo = tile[0], hi = tile[0];
    for (std::size_t i = 1; i < tile.size(); ++i) {
      lo = std::min(lo, tile[i]);
      hi = std::max(hi, tile[i]);
    }
    sheet.ranges.push_back({lo, hi});
    const double range = (hi > lo) ? (hi - lo) : 1.0;
    const std::size_t gr = n / sheet.grid_cols;
    const std::size_t gc = n % sheet.grid_cols;
    for (std::size_t r = 0; r < tile_h; ++r) {
      for (std::size_t c = 0; c < tile_w; ++c) {
        sheet.image[(gr * tile_h + r) * sheet_w + gc * tile_w + c] =
            (tile[r * tile_w + c] - lo) / range;
      }
    }
  }
  return sheet;
}

std::vector<std::size_t> topk_rows_by_l2(const Tensor& mat, std::size_t k) {
  const std::size_t n = mat.rows(), d = mat.cols();
  std::vector<double> norms(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      norms[i] += mat[i * d + j] * mat[i * d + j];
    }
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return norms[a] > norms[b];
  });
  idx.resize(std::min(k, n));
  return idx;
}

Tensor frame_strip(const std::vector<Tensor>& frames, std::size_t canvas) {
  if (frames.empty()) return Tensor();
  Tensor strip({canvas, frames.size() * canvas});
  const std::size_t w = frames.size() * canvas;
  for (std::size_t n = 0; n < frames.size(); ++n) {
    if (frames[n].size() != canvas * canvas) {
      throw DimensionError("frame_strip: frame size != canvas^2");
    }
    for (std::size_t r = 0; r < canvas; ++r) {
      for (std::size_t c = 0; c < canvas; ++c) {
        strip[r * w + n * canvas + c] = frames[n][r * canvas + c];
      }
    }
  }
  return strip;
}

std::vector<std::size_t> seeded_permutation(std::size_t n,
                                            std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.next_below(i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace seqvid
