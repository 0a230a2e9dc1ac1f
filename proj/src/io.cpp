#include "seqvid/io.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "seqvid/error.hpp"

namespace seqvid {

namespace {

void write_u32le(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64le(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32le(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw FormatError(std::string("svt: truncated ") + what);
  }
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
         (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

std::uint64_t read_u64le(std::istream& in, const char* what) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) {
    throw FormatError(std::string("svt: truncated ") + what);
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

}  // namespace

void svt_write(std::ostream& out, const Tensor& t) {
  out.write("SVT1", 4);
  write_u32le(out, static_cast<std::uint32_t>(t.ndim()));
  for (std::size_t e : t.shape()) write_u64le(out, e);
  static_assert(sizeof(double) == 8);
  // Little-endian host assumed; extents and payload share the convention.
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!out) throw FormatError("svt: write failed");
}

Tensor svt_read(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "SVT1", 4) != 0) {
    throw FormatError("svt: bad magic");
  }
  const std::uint32_t ndim = read_u32le(in, "ndim");
  if (ndim == 0 || ndim > 8) throw FormatError("svt: unreasonable ndim");
  std::vector<std::size_t> shape(ndim);
  std::size_t total = 1;
  for (auto& e : shape) {
    e = static_cast<std::size_t>(read_u64le(in, "extent"));
    if (e == 0 || total > (std::size_t(1) << 40) / e) {
      throw FormatError("svt: bad extents");
    }
    total *= e;
  }
  std::vector<double> data(total);
  if (!in.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(total * sizeof(double)))) {
    throw FormatError("svt: truncated payload");
  }
  return Tensor(std::move(shape), std::move(data));
}

void svt_save(const Tensor& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("svt: cannot write " + path);
  svt_write(out, t);
}

Tensor svt_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("svt: cannot open " + path);
  return svt_read(in);
}

std::uint32_t crc32(const unsigned char* data, std::size_t len) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k)
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) {
    crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

void pgm_save(const std::string& path, const Tensor& img, double lo,
              double hi) {
  if (img.ndim() != 2) throw DimensionError("pgm_save: image must be 2-D");
  const std::size_t h = img.extent(0), w = img.extent(1);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("pgm: cannot write " + path);
  out << "P5\n" << w << " " << h << "\n255\n";
  const double range = (hi > lo) ? (hi - lo) : 1.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    double v = (img[i] - lo) / range * 255.0;
    v = std::min(255.0, std::max(0.0, v));
    const unsigned char b = static_cast<unsigned char>(std::lround(v));
    out.write(reinterpret_cast<const char*>(&b), 1);
  }
  if (!out) throw FormatError("pgm: write failed");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << content;
  if (!out) throw FormatError("write failed: " + path);
}

}  // namespace seqvid
