#pragma once
// The coset space K^H / K^#(p^n): level-1 Bruhat cells, refinement, canonical labels and lookup.

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lzeta/group.hpp"

namespace lzeta {

/// Level-1 representatives, one vector per Bruhat family (identity, s1, s2, s1s2, s2s1, s1s2s1, s2s1s2, s1s2s1s2).
std::vector<std::vector<GMatB>> bruhat_cells(const LocalConfig& cfg);

/// Refinement factor [[1,w pi],[..],[..],[-w pi]] * lower(y pi, z pi) used to pass from level 1 to level n.
GMatB refinement_matrix(const LocalConfig& cfg, i64 w, i64 y, i64 z);

/// Canonical label of g K^#(p^n): column 2 mod p^n up to units plus the plane of columns 1,2 mod p.
std::uint64_t coset_key(const GMatB& g, int n);
/// Same label from columns 1 and 2 given as integers.
std::uint64_t coset_key_columns(const i64* col1, const i64* col2, i64 p, int n);

struct Collision {
  std::size_t i, j;
};

class CosetTable {
 public:
  CosetTable() = default;
  /// Bruhat cells times the q^{3(n-1)} refinements, at precision n.
  static CosetTable build(i64 p, int n);
  /// Rebuild from stored representatives (cache path); keys are recomputed.
  static CosetTable from_reps(i64 p, int n, std::vector<GMatB> reps, std::vector<std::uint8_t> family);

  i64 p() const { return p_; }
  int n() const { return n_; }
  const LocalConfig& config() const { return cfg_; }
  std::size_t size() const { return reps_.size(); }
  const GMatB& rep(std::size_t i) const { return reps_[i]; }
  int family(std::size_t i) const { return family_[i]; }
  const std::vector<GMatB>& reps() const { return reps_; }
  const std::vector<std::uint8_t>& families() const { return family_; }
  std::size_t distinct_keys() const { return index_.size(); }

  /// Index of the coset containing g (g in K^H at precision >= n); key lookup, then a membership scan.
  std::size_t resolve(const GMatB& g) const;
  std::optional<std::size_t> lookup_key(std::uint64_t key) const;

  /// Exhaustive check that rep_i^{-1} rep_j lies in K^#(p^n) only for i = j.
  std::optional<Collision> find_collision(unsigned workers = 0) const;

 private:
  i64 p_ = 0;
  int n_ = 0;
  LocalConfig cfg_;
  std::vector<GMatB> reps_;
  std::vector<std::uint8_t> family_;
  std::unordered_map<std::uint64_t, std::uint32_t> index_;
};

/// Expected |K^H / K^#(p^n)| = q^{3(n-1)} (q+1)(q^4-1)/(q-1).
i64 coset_index_formula(i64 q, int n);

// ---- preliminary representatives of K_{l,m} \ K^H / K^#(p^n) and the support of W^#

struct PrelimRep {
  int case_id = 1;  // 1..8
  i64 w = 0, y = 0, z = 0;
};

/// All parameter tuples of the eight preliminary families at level n.
std::vector<PrelimRep> prelim_reps(i64 p, int n);
GMatB prelim_matrix(const LocalConfig& cfg, const PrelimRep& r);
/// Closed-form verdict for eta_m r in M(F)N(F)K^#(P^n).
bool support_fast(const LocalConfig& cfg, int m, int n, const PrelimRep& r);

}  // namespace lzeta
