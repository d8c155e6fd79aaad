#pragma once
// Hand-rolled random generators shared by the property tests.

#include <random>

#include "lzeta/group.hpp"

namespace gen {

using namespace lzeta;

inline Residue residue(std::mt19937_64& rng, const LocalConfig& cfg) {
  return Residue(static_cast<i64>(rng() % static_cast<std::uint64_t>(cfg.modulus())), cfg.p, cfg.k);
}

inline Residue unit(std::mt19937_64& rng, const LocalConfig& cfg) {
  for (;;) {
    Residue r = residue(rng, cfg);
    if (r.is_unit()) return r;
  }
}

inline Residue in_ideal(std::mt19937_64& rng, const LocalConfig& cfg, int n) {
  Residue r = residue(rng, cfg);
  return n >= cfg.k ? r.scalar(0) : r * r.scalar(ipow(cfg.p, n));
}

inline QuadExt ext(std::mt19937_64& rng, const LocalConfig& cfg) {
  return QuadExt(cfg.type, cfg.d, residue(rng, cfg), residue(rng, cfg));
}

inline QuadExt ext_unit(std::mt19937_64& rng, const LocalConfig& cfg) {
  for (;;) {
    QuadExt x = ext(rng, cfg);
    if (x.is_unit()) return x;
  }
}

}  // namespace gen
