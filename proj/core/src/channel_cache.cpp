#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fshadow/channel.hpp"
#include "fshadow/error.hpp"

namespace fshadow::channel {

namespace {

constexpr char kMagic[8] = {'F', 'S', 'H', 'A', 'D', 'O', 'W', '1'};

static_assert(std::endian::native == std::endian::little, "cache container assumes little-endian hosts");

}  // namespace

std::string fnv1a_hex(const void* data, std::size_t bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_container(const std::filesystem::path& path, CacheHeader header, const std::vector<double>& payload) {
  header.checksum = fnv1a_hex(payload.data(), payload.size() * sizeof(double));
  nlohmann::json j = {{"format_version", header.format_version},
                      {"kind", header.kind},
                      {"k", header.k},
                      {"L", header.L},
                      {"d", header.d},
                      {"tolerance", header.tolerance},
                      {"checksum", header.checksum},
                      {"count", payload.size()}};
  if (!header.metadata.empty()) j["metadata"] = nlohmann::json::parse(header.metadata);
  const std::string text = j.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    const std::uint64_t len = text.size();
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(double)));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::pair<CacheHeader, std::vector<double>> read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[8];
  std::uint64_t len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw IoError(path.string() + ": not a cache container");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": bad header: " + e.what());
  }
  CacheHeader h;
  h.format_version = j.at("format_version").get<int>();
  h.kind = j.at("kind").get<std::string>();
  h.k = j.at("k").get<int>();
  h.L = j.at("L").get<int>();
  h.d = j.at("d").get<std::size_t>();
  h.tolerance = j.at("tolerance").get<double>();
  h.checksum = j.at("checksum").get<std::string>();
  if (j.contains("metadata")) h.metadata = j["metadata"].dump();
  std::vector<double> payload(j.at("count").get<std::size_t>());
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!in) throw IoError(path.string() + ": truncated payload");
  if (fnv1a_hex(payload.data(), payload.size() * sizeof(double)) != h.checksum)
    throw IoError(path.string() + ": checksum mismatch");
  return {h, std::move(payload)};
}

std::filesystem::path channel_cache_path(const std::filesystem::path& dir, int k, int L) {
  return dir / ("channel_k" + std::to_string(k) + "_L" + std::to_string(L) + ".fsc");
}

void save_channel(const std::filesystem::path& path, const ChannelMatrix& M, double tol) {
  const auto d = static_cast<Eigen::Index>(M.dimension());
  std::vector<double> payload(static_cast<std::size_t>(d * d));
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) payload[static_cast<std::size_t>(r * d + c)] = M.entries(r, c);
  CacheHeader h;
  h.kind = "channel";
  h.k = M.k;
  h.L = M.L;
  h.d = static_cast<std::size_t>(d);
  h.tolerance = tol;
  write_container(path, h, payload);
}

ChannelMatrix load_channel(const std::filesystem::path& path, CacheHeader* header) {
  auto [h, payload] = read_container(path);
  if (h.kind != "channel") throw IoError(path.string() + ": not a channel container");
  if (h.format_version != kCacheFormatVersion) throw IoError(path.string() + ": format version mismatch");
  if (payload.size() != h.d * h.d) throw IoError(path.string() + ": payload size does not match d");
  ChannelMatrix M;
  M.k = h.k;
  M.L = h.L;
  const auto d = static_cast<Eigen::Index>(h.d);
  M.entries.resize(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) M.entries(r, c) = payload[static_cast<std::size_t>(r * d + c)];
  if (header) *header = h;
  return M;
}

}  // namespace fshadow::channel
