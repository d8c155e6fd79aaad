#pragma once
// On-disk cache of orbit partitions, one binary file per (p, n, split type).

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lzeta/ring.hpp"

namespace lzeta {

class PartitionCache {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  /// An empty directory disables the cache.
  explicit PartitionCache(std::string dir);
  bool enabled() const { return !dir_.empty(); }

  /// Orbit label per coset for (l, m), if stored; files with a foreign header are ignored.
  std::optional<std::vector<std::uint32_t>> get(i64 p, int n, SplitType t, int l, int m) const;
  /// Adds or replaces the entry and rewrites the file atomically.
  void put(i64 p, int n, SplitType t, int l, int m, const std::vector<std::uint32_t>& orbit_of);

  std::string path_for(i64 p, int n, SplitType t) const;

 private:
  struct Entry {
    int l, m;
    std::vector<std::uint32_t> orbit_of;
  };
  std::vector<Entry> read(i64 p, int n, SplitType t) const;

  std::string dir_;
  mutable std::mutex mu_;
};

}  // namespace lzeta
