#include "lzeta/cache.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

namespace lzeta {

namespace {

constexpr char kMagic[8] = {'L', 'Z', 'P', 'A', 'R', 'T', 'C', 'H'};

template <class T>
void put_raw(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
bool get_raw(std::istream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof v));
}

}  // namespace

PartitionCache::PartitionCache(std::string dir) : dir_(std::move(dir)) {}

std::string PartitionCache::path_for(i64 p, int n, SplitType t) const {
  return dir_ + "/partitions-p" + std::to_string(p) + "-n" + std::to_string(n) + "-" + to_string(t) + ".bin";
}

std::vector<PartitionCache::Entry> PartitionCache::read(i64 p, int n, SplitType t) const {
  std::vector<Entry> out;
  std::ifstream in(path_for(p, n, t), std::ios::binary);
  if (!in) return out;
  char magic[8];
  std::uint32_t version = 0;
  std::int64_t fp = 0;
  std::int32_t fn = 0;
  std::uint8_t ft = 0;
  std::uint32_t count = 0;
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) return out;
  if (!get_raw(in, version) || version != kFormatVersion) return out;
  if (!get_raw(in, fp) || !get_raw(in, fn) || !get_raw(in, ft) || !get_raw(in, count)) return out;
  if (fp != p || fn != n || ft != static_cast<std::uint8_t>(t)) return out;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::int32_t l = 0, m = 0;
    std::uint64_t len = 0;
    if (!get_raw(in, l) || !get_raw(in, m) || !get_raw(in, len) || len > (std::uint64_t(1) << 32)) return {};
    Entry e{l, m, std::vector<std::uint32_t>(len)};
    if (!in.read(reinterpret_cast<char*>(e.orbit_of.data()), static_cast<std::streamsize>(len * sizeof(std::uint32_t))))
      return {};
    out.push_back(std::move(e));
  }
  return out;
}

std::optional<std::vector<std::uint32_t>> PartitionCache::get(i64 p, int n, SplitType t, int l, int m) const {
  if (!enabled()) return std::nullopt;
  std::lock_guard<std::mutex> lock(mu_);
  for (auto& e : read(p, n, t))
    if (e.l == l && e.m == m) return std::move(e.orbit_of);
  return std::nullopt;
}

void PartitionCache::put(i64 p, int n, SplitType t, int l, int m, const std::vector<std::uint32_t>& orbit_of) {
  if (!enabled()) return;
  std::lock_guard<std::mutex> lock(mu_);
  std::filesystem::create_directories(dir_);
  std::vector<Entry> entries = read(p, n, t);
  bool replaced = false;
  for (auto& e : entries)
    if (e.l == l && e.m == m) {
      e.orbit_of = orbit_of;
      replaced = true;
    }
  if (!replaced) entries.push_back({l, m, orbit_of});
  const std::string path = path_for(p, n, t), tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    os.write(kMagic, 8);
    put_raw(os, kFormatVersion);
    put_raw(os, static_cast<std::int64_t>(p));
    put_raw(os, static_cast<std::int32_t>(n));
    put_raw(os, static_cast<std::uint8_t>(t));
    put_raw(os, static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
      put_raw(os, static_cast<std::int32_t>(e.l));
      put_raw(os, static_cast<std::int32_t>(e.m));
      put_raw(os, static_cast<std::uint64_t>(e.orbit_of.size()));
      os.write(reinterpret_cast<const char*>(e.orbit_of.data()),
               static_cast<std::streamsize>(e.orbit_of.size() * sizeof(std::uint32_t)));
    }
    if (!os) throw std::runtime_error("cannot write cache file " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace lzeta
