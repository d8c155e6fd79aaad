#pragma once
// K_{l,m}-orbits on K^H / K^#(p^n): the image of K_{l,m} mod p^n, orbit partitions and the support list.

#include <array>
#include <random>
#include <string>
#include <vector>

#include "lzeta/cosets.hpp"

namespace lzeta {

using RawMat = std::array<i64, 16>;

RawMat raw_of(const GMatB& g);
RawMat raw_mul(const RawMat& a, const RawMat& b, i64 mod);

/// Image mod p^n of h(l,m)^{-1} t(x,y) u(X) h(l,m) for x, y', e', f', g' (grid parameters).
struct KlmParams {
  i64 x = 1, y = 0, e = 0, f = 0, g = 0;
};
/// Direct formula [[t', t'X'], [0, adj(t')^T]]; nullopt if det t' is not a unit.
std::optional<RawMat> klm_element(const LocalConfig& cfg, int n, int m, const KlmParams& k);
/// Same element through conj_by_h at precision n+2m+l (slow reference path).
std::optional<RawMat> klm_element_via_conjugation(const LocalConfig& cfg, int n, int l, int m, const KlmParams& k);

/// Every element of the image (q^{5n} parameter points with det unit).
std::vector<RawMat> klm_grid(const LocalConfig& cfg, int n, int l, int m);
/// Torus generators chosen greedily until they generate the whole torus image, plus the three U basis elements.
std::vector<RawMat> klm_generators(const LocalConfig& cfg, int n, int m);
std::vector<RawMat> klm_sampled(const LocalConfig& cfg, int n, int m, int count, std::mt19937_64& rng);
/// Size of the torus image {t'(x, y')} mod p^n.
std::size_t klm_torus_size(const LocalConfig& cfg, int n, int m);

struct OrbitPartition {
  std::vector<std::uint32_t> orbit_of;  // per coset
  std::vector<std::size_t> sizes;       // per orbit
  std::vector<std::size_t> first;       // smallest coset id per orbit
  std::vector<std::int8_t> support;     // -1 unknown, 0/1 flag
  std::size_t count() const { return sizes.size(); }
  bool operator==(const OrbitPartition& o) const { return orbit_of == o.orbit_of; }
};

/// `elements` is the whole image (one pass per orbit).
OrbitPartition orbits_from_group(const CosetTable& table, const std::vector<RawMat>& elements);
/// `elements` generate the acting group (union-find over all cosets).
OrbitPartition orbits_from_generators(const CosetTable& table, const std::vector<RawMat>& elements,
                                      unsigned workers = 0);

struct SupportCheck {
  bool constant = true;  // flag constant on each orbit
  bool covered = true;   // every orbit contains a preliminary representative
  std::size_t support_orbits = 0;
  std::size_t nonsupport_orbits = 0;
  std::string witness;
};
/// Labels orbits through the preliminary representatives and support_fast; cfg carries the split type (precision n).
SupportCheck label_support(OrbitPartition& part, const CosetTable& table, const LocalConfig& cfg, int m);

/// Predicted support representatives: A(z) family, A(u pi^j) family and s1 s2 s1 when m >= n.
struct PredictedRep {
  std::string label;
  GMatB g;
};
std::vector<PredictedRep> predicted_support(const LocalConfig& cfg, int n, int m);

struct PropositionCheck {
  bool ok = false;
  std::size_t predicted = 0, observed = 0;
  std::string witness;
};
PropositionCheck verify_support_list(const OrbitPartition& part, const CosetTable& table, const LocalConfig& cfg,
                                     int m);

/// Orbit of g K^#(p^n) under the generators, as a set of coset labels (no table needed).
std::vector<std::uint64_t> orbit_keys(const GMatB& g, const std::vector<RawMat>& gens, int n,
                                      std::size_t max_states = 20'000'000);

/// u1, u2 units with nu(z_i) = j: whether A(pi^j u1), A(pi^j u2) share a K_{l,m}-orbit at level n (BFS).
bool same_orbit_A(const LocalConfig& cfg, int n, int m, int j, i64 u1, i64 u2);
/// Explicit merging element with g = pi^l (z2-z1)/(pi z1 z2), e=f=0: A(z1)^{-1} k A(z2) in K^#(p^n).
bool u_merge_element_ok(const LocalConfig& cfg, int n, int l, int m, int j, i64 u1, i64 u2);

}  // namespace lzeta
