#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "seqvid/tensor.hpp"

namespace seqvid {

// SVT1 tensor container: magic "SVT1", u32 ndim, ndim x u64 extents, then
// raw little-endian 64-bit floats in row-major order.
void svt_write(std::ostream& out, const Tensor& t);
Tensor svt_read(std::istream& in);
void svt_save(const Tensor& t, const std::string& path);
Tensor svt_load(const std::string& path);

std::uint32_t crc32(const unsigned char* data, std::size_t len);

// Binary PGM (P5, maxval 255). img is [H x W]; values are linearly mapped
// from [lo, hi] to [0, 255] and clamped.
void pgm_save(const std::string& path, const Tensor& img, double lo,
              double hi);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace seqvid
