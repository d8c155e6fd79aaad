#pragma once
// Exhaustive decision of eta_m r in P(F) K^#(P^n) over o_L mod P^n.

#include <cstdint>
#include <unordered_set>
#include <utility>

#include "lzeta/cosets.hpp"

namespace lzeta {

struct ExtKey {
  std::uint64_t line = 0, plane = 0;
  bool operator==(const ExtKey& o) const { return line == o.line && plane == o.plane; }
};

struct ExtKeyHash {
  std::size_t operator()(const ExtKey& k) const { return std::hash<std::uint64_t>()(k.line * 0x9E3779B97F4A7C15ull ^ k.plane); }
};

/// Label of g K^#(P^n) for g in GU(2,2; o_L mod P^n); split rings are labelled componentwise.
ExtKey ext_coset_key(const GMatE& g, int n);

/// Generators of P(F) ∩ K at precision cfg.k: Levi factors M1, M2 and the unipotent radical N.
std::vector<GMatE> parabolic_generators(const LocalConfig& cfg);

/// The orbit of the identity coset in K / K^#(P^n) under P(F) ∩ K.
class SupportOrbit {
 public:
  static SupportOrbit build(const LocalConfig& cfg, int n, std::size_t max_states = 50'000'000);
  bool contains(const GMatE& g) const { return keys_.count(ext_coset_key(g, n_)) > 0; }
  std::size_t size() const { return keys_.size(); }
  std::size_t generator_count() const { return gens_; }

 private:
  int n_ = 0;
  std::size_t gens_ = 0;
  std::unordered_set<ExtKey, ExtKeyHash> keys_;
};

/// eta_m r over o_L at precision cfg.k.
GMatE eta_times_prelim(const LocalConfig& cfg, int m, const PrelimRep& r);
bool support_exhaustive(const SupportOrbit& orbit, const LocalConfig& cfg, int m, const PrelimRep& r);
/// h in (P∩K) K^#(P^n) iff v = h^{-1} e1 has v1 a unit, v3 in P and v4 in P^n.
bool support_by_first_column(const GMatE& h, int n);

}  // namespace lzeta
