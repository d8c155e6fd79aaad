#pragma once
// Haar volumes of the double cosets by exact counting in finite quotients.

#include <gmpxx.h>

#include <string>

#include "lzeta/ring.hpp"

namespace lzeta {

struct VolumeResult {
  mpq_class value;
  std::string provenance;  // "counted" or "formula"
};

/// (q-1) / (q^{3(n-1)} (q+1)(q^4-1)).
VolumeResult vol_K_sharp_formula(i64 q, int n);
/// 1 / |K^H / K^#(p^n)| from the enumerated table.
VolumeResult vol_K_sharp_counted(i64 q, int n);

/// vol(T(F) ∩ [[o^x, p^s], [o, o^x]])^{-1}: all (x,y) mod p^k with unit determinant over those with y in p^s and
/// x ± by/2 units. Requires k >= s + 2.
VolumeResult t_volume_inverse_counted(const LocalConfig& cfg, int s, int k);
VolumeResult t_volume_inverse_formula(i64 q, int legendre, int s);

/// Volume of the (e,f,g) satisfying the membership conditions for A(pi^j), at fixed x = 1 and the given y in
/// p^{m+j+1}; counted mod p^k with k = n+m+l+2 by default.
VolumeResult u_volume_counted(const LocalConfig& cfg, int n, int l, int m, int j, i64 y, int k = 0);
VolumeResult u_volume_formula(i64 q, int n, int l, int m, int j);

enum class DoubleCosetRep { A_z, s1s2s1 };

/// Matrix path: vol(K^#) * vol_T(m)^{-1} q^{3m+3l} * N_grid / N_good, where N_good counts parameter points of the
/// K_{l,m} image mod p^grid_k with A^{-1} k A in K^#(p^n). For A_z, z = z_value (A(z) has (4,2) entry z*pi).
VolumeResult double_coset_volume_counted(const LocalConfig& cfg, int n, int l, int m, DoubleCosetRep rep,
                                         i64 z_value = 0, int grid_k = 0, unsigned workers = 0);
/// Factorized path: vol(K^#) * t_inv(m+j+1) / u_volume(j) for A(pi^j), or the s1s2s1 conditions.
VolumeResult double_coset_volume_factorized(const LocalConfig& cfg, int n, int l, int m, DoubleCosetRep rep, int j);
/// Closed forms V_j^{l,m}, V^{l,m} and V_{s1s2s1}^{l,m}.
VolumeResult double_coset_volume_formula(i64 q, int legendre, int n, int l, int m, DoubleCosetRep rep, int j);

/// q^e as an exact rational (e may be negative).
mpq_class qpow(i64 q, int e);

}  // namespace lzeta
