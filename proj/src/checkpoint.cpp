#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "seqvid/error.hpp"
#include "seqvid/io.hpp"
#include "seqvid/json_io.hpp"
#include "seqvid/trainer.hpp"

namespace seqvid {

namespace {

constexpr std::uint32_t kVersion = 1;

void write_u16le(std::ostream& out, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

void write_u32le(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64le(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint16_t read_u16le(std::istream& in, const char* what) {
  unsigned char b[2];
  if (!in.read(reinterpret_cast<char*>(b), 2)) {
    throw FormatError(std::string("svck: truncated ") + what);
  }
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t read_u32le(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw FormatError(std::string("svck: truncated ") + what);
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64le(std::istream& in, const char* what) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) {
    throw FormatError(std::string("svck: truncated ") + what);
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

std::string hex_u64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex_u64(const std::string& s) {
  return std::strtoull(s.c_str(), nullptr, 16);
}

void write_record(std::ostream& out, const std::string& name,
                  const Tensor& t) {
  std::ostringstream payload(std::ios::binary);
  svt_write(payload, t);
  const std::string bytes = payload.str();
  write_u16le(out, static_cast<std::uint16_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u64le(out, bytes.size());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  write_u32le(out, crc32(reinterpret_cast<const unsigned char*>(bytes.data()),
                         bytes.size()));
}

}  // namespace

void checkpoint_save(const Checkpoint& ck, const std::string& path) {
  nlohmann::json header;
  header["config"] = to_json(ck.config);
  header["step"] = ck.step;
  header["rng"]["seed"] = hex_u64(ck.data_rng.seed());
  for (std::uint64_t w : ck.data_rng.state()) {
    header["rng"]["state"].push_back(hex_u64(w));
  }
  const std::string hbytes = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("svck: cannot write " + path);
  out.write("SVCK", 4);
  write_u32le(out, kVersion);
  write_u64le(out, hbytes.size());
  out.write(hbytes.data(), static_cast<std::streamsize>(hbytes.size()));
  write_u32le(out, crc32(reinterpret_cast<const unsigned char*>(hbytes.data()),
                         hbytes.size()));

  std::uint32_t count = 0;
  ck.model.for_each_param(
      [&](const std::string&, const Tensor&) { ++count; });
  count *= 2;  // model + optimizer velocity
  if (!ck.loss_history.empty()) ++count;
  write_u32le(out, count);

  ck.model.for_each_param([&](const std::string& name, const Tensor& t) {
    write_record(out, "model/" + name, t);
  });
  ck.velocity.for_each_param([&](const std::string& name, const Tensor& t) {
    write_record(out, "opt/" + name, t);
  });
  if (!ck.loss_history.empty()) {
    Tensor hist({ck.loss_history.size(), 4});
    for (std::size_t i = 0; i < ck.loss_history.size(); ++i) {
      hist[i * 4 + 0] = static_cast<double>(ck.loss_history[i].step);
      hist[i * 4 + 1] = ck.loss_history[i].recon;
      hist[i * 4 + 2] = ck.loss_history[i].future;
      hist[i * 4 + 3] = ck.loss_history[i].total;
    }
    write_record(out, "loss_history", hist);
  }
  if (!out) throw FormatError("svck: write failed for " + path);
}

Checkpoint checkpoint_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("svck: cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "SVCK", 4) != 0) {
    throw FormatError("svck: bad magic in " + path);
  }
  const std::uint32_t version = read_u32le(in, "version");
  if (version != kVersion) {
    throw FormatError("svck: unsupported version " + std::to_string(version));
  }
  const std::uint64_t hlen = read_u64le(in, "header length");
  if (hlen > (1u << 20)) throw FormatError("svck: oversized header");
  std::string hbytes(hlen, '\0');
  if (!in.read(hbytes.data(), static_cast<std::streamsize>(hlen))) {
    throw FormatError("svck: truncated header");
  }
  const std::uint32_t hcrc = read_u32le(in, "header crc");
  if (hcrc != crc32(reinterpret_cast<const unsigned char*>(hbytes.data()),
                    hbytes.size())) {
    throw FormatError("svck: header checksum failure");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hbytes);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("svck: header parse: ") + e.what());
  }

  Checkpoint ck;
  ck.config = train_config_from_json(header.at("config"));
  ck.step = header.at("step").get<std::size_t>();
  const std::uint64_t seed = parse_hex_u64(header.at("rng").at("seed"));
  std::array<std::uint64_t, 4> state{};
  const auto& jstate = header.at("rng").at("state");
  if (jstate.size() != 4) throw FormatError("svck: bad rng state");
  for (int i = 0; i < 4; ++i) {
    state[i] = parse_hex_u64(jstate[i].get<std::string>());
  }
  ck.data_rng.restore(seed, state);

  const std::uint32_t count = read_u32le(in, "record count");
  std::map<std::string, Tensor> records;
  for (std::uint32_t r = 0; r < count; ++r) {
    const std::uint16_t nlen = read_u16le(in, "record name length");
    std::string name(nlen, '\0');
    if (!in.read(name.data(), nlen)) {
      throw FormatError("svck: truncated record name");
    }
    const std::uint64_t plen = read_u64le(in, "record payload length");
    std::string payload(plen, '\0');
    if (!in.read(payload.data(), static_cast<std::streamsize>(plen))) {
      throw FormatError("svck: truncated record payload for " + name);
    }
    const std::uint32_t pcrc = read_u32le(in, "record crc");
    if (pcrc != crc32(reinterpret_cast<const unsigned char*>(payload.data()),
                      payload.size())) {
      throw FormatError("svck: checksum failure in record " + name);
    }
    std::istringstream ps(payload, std::ios::binary);
    records.emplace(name, svt_read(ps));
  }

  // Rebuild the model/velocity skeletons from the config and fill them,
  // validating every record shape against the architecture.
  Rng throwaway(0);
  ck.model = model_build(ck.config.model, throwaway);
  ck.velocity = zeros_like(ck.model);
  auto fill = [&](Model& m, const std::string& prefix) {
    m.for_each_param([&](const std::string& name, Tensor& t) {
      auto it = records.find(prefix + name);
      if (it == records.end()) {
        throw FormatError("svck: missing record " + prefix + name);
      }
      if (!it->second.same_shape(t)) {
        throw FormatError("svck: shape mismatch for " + prefix + name +
                          ": file has " + it->second.shape_str() +
                          ", config implies " + t.shape_str());
      }
      t = it->second;
    });
  };
  fill(ck.model, "model/");
  fill(ck.velocity, "opt/");

  auto hist = records.find("loss_history");
  if (hist != records.end()) {
    const Tensor& h = hist->second;
    if (h.ndim() != 2 || h.extent(1) != 4) {
      throw FormatError("svck: malformed loss history");
    }
    for (std::size_t i = 0; i < h.extent(0); ++i) {
      ck.loss_history.push_back({static_cast<std::size_t>(h[i * 4 + 0]),
                                 h[i * 4 + 1], h[i * 4 + 2], h[i * 4 + 3]});
    }
  }
  return ck;
}

}  // namespace seqvid
