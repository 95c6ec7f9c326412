#ifndef RFFQRNG_IO_HPP
#define RFFQRNG_IO_HPP

// File formats.
//
// Bitstream: bits packed 8 per byte, first bit in the MSB of byte 0, final
// byte zero-padded in its low bits. Sidecar "<file>.json" holds
// {"n_bits", "seed", "config", ...}.
//
// Detections: raw little-endian uint64 picosecond timestamps, no header.
// Sidecar "<file>.json" holds {"rate", "dead_time", "seed", "count"}.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "rffqrng/bitstream.hpp"
#include "rffqrng/error.hpp"
#include "rffqrng/event_source.hpp"

namespace rffqrng::io {

inline constexpr int kSchemaVersion = 1;

inline std::filesystem::path sidecar_path(const std::filesystem::path& p) {
  return std::filesystem::path(p.string() + ".json");
}

/// Writes through a temporary file in the same directory and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const void* data, std::size_t size) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "rename to " + path.string() + " failed: " + ec.message());
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, text.data(), text.size());
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
}

/// Writes the packed stream and its sidecar; `meta` is merged into the sidecar (n_bits always wins).
inline void write_bitstream(const std::filesystem::path& path, const BitStream& bits,
                            nlohmann::json meta = nlohmann::json::object()) {
  const auto bytes = bits.to_bytes();
  write_file_atomic(path, bytes.data(), bytes.size());
  meta["n_bits"] = bits.size();
  meta["schema_version"] = kSchemaVersion;
  write_text_atomic(sidecar_path(path), meta.dump(2) + "\n");
}

/// Reads a packed stream. The bit count comes from the sidecar when present, else 8 * file size.
inline BitStream read_bitstream(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  std::size_t n_bits = bytes.size() * 8;
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    const auto meta = read_json(side);
    if (!meta.contains("n_bits")) throw Error(ErrorCode::FormatError, side.string() + " lacks n_bits");
    n_bits = meta.at("n_bits").get<std::size_t>();
    if ((n_bits + 7) / 8 != bytes.size()) {
      throw Error(ErrorCode::FormatError, "sidecar n_bits does not match " + path.string() + " size");
    }
  }
  return BitStream::from_bytes(bytes, n_bits);
}

/// Timestamps as little-endian picoseconds, rounded to nearest.
inline void write_detections(const std::filesystem::path& path, const DetectionTimes& d, const DetectorConfig& cfg) {
  std::vector<std::uint8_t> buf;
  buf.reserve(d.size() * 8);
  for (double t : d.times) {
    const auto ps = static_cast<std::uint64_t>(std::llround(t * 1e12));
    for (int b = 0; b < 8; ++b) buf.push_back(static_cast<std::uint8_t>(ps >> (8 * b)));
  }
  write_file_atomic(path, buf.data(), buf.size());
  nlohmann::json meta = {{"schema_version", kSchemaVersion}, {"rate", cfg.f_det},  {"dead_time", cfg.dead_time},
                         {"seed", cfg.seed},                 {"stream", cfg.stream}, {"count", d.size()}};
  write_text_atomic(sidecar_path(path), meta.dump(2) + "\n");
}

inline std::vector<std::uint64_t> read_detections_ps(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() % 8 != 0) throw Error(ErrorCode::FormatError, path.string() + " is not a multiple of 8 bytes");
  std::vector<std::uint64_t> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | bytes[8 * i + static_cast<std::size_t>(b)];
    out[i] = v;
  }
  return out;
}

}  // namespace rffqrng::io

#endif  // RFFQRNG_IO_HPP
