#pragma once
// 4x4 similitude matrices over o/p^k and o_L/P^k: GSp4 and GU(2,2), congruence subgroups and named elements.

#include <array>
#include <optional>
#include <random>
#include <string>

#include "lzeta/ring.hpp"

namespace lzeta {

inline Residue conj_of(const Residue& x) { return x; }
inline QuadExt conj_of(const QuadExt& x) { return x.conj(); }

template <class T>
struct Mat4 {
  std::array<T, 16> e;

  T& operator()(int i, int j) { return e[4 * i + j]; }
  const T& operator()(int i, int j) const { return e[4 * i + j]; }

  static Mat4 filled(const T& v) {
    Mat4 m;
    m.e.fill(v);
    return m;
  }
  static Mat4 identity(const T& zero, const T& one) {
    Mat4 m = filled(zero);
    for (int i = 0; i < 4; ++i) m(i, i) = one;
    return m;
  }

  Mat4 operator*(const Mat4& o) const {
    Mat4 r = filled(e[0] - e[0]);
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) {
        const T& a = (*this)(i, k);
        if (a.is_zero()) continue;
        for (int j = 0; j < 4; ++j) r(i, j) += a * o(k, j);
      }
    return r;
  }
  Mat4 operator+(const Mat4& o) const {
    Mat4 r = *this;
    for (int i = 0; i < 16; ++i) r.e[i] += o.e[i];
    return r;
  }
  Mat4 operator-(const Mat4& o) const {
    Mat4 r = *this;
    for (int i = 0; i < 16; ++i) r.e[i] -= o.e[i];
    return r;
  }
  bool operator==(const Mat4& o) const { return e == o.e; }

  Mat4 transpose() const {
    Mat4 r = *this;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) r(i, j) = (*this)(j, i);
    return r;
  }
  Mat4 conj() const {
    Mat4 r = *this;
    for (auto& x : r.e) x = conj_of(x);
    return r;
  }
  Mat4 scaled(const T& s) const {
    Mat4 r = *this;
    for (auto& x : r.e) x = x * s;
    return r;
  }
};

using GMatB = Mat4<Residue>;
using GMatE = Mat4<QuadExt>;

struct Witness {
  int row = -1, col = -1;  // 1-based, row-major first violation
  std::string required;
};

struct MultiplierResult {
  bool ok = false;
  std::optional<Residue> mu;
  Witness witness;
};

/// mu(g) from  t(conj g) J g = mu J; fails with the first offending entry of t(conj g) J g.
template <class T>
MultiplierResult multiplier(const Mat4<T>& g);

enum class Subgroup { K_H, Iwahori, Klingen_n, Ksharp_Pn, Ksharp_pn, P_cap_K };

const char* to_string(Subgroup s);
Subgroup subgroup_from_string(const std::string& s);

struct MemberResult {
  bool ok = true;
  Witness witness;
  explicit operator bool() const { return ok; }
};

/// Membership with level n. Requires precision >= max(n,1).
template <class T>
MemberResult member(const Mat4<T>& g, Subgroup s, int n);

/// Pattern-only check (no similitude test); cell codes: -2 unit, -1 integral, e>=0 ideal exponent.
using Pattern = std::array<int, 16>;
Pattern subgroup_pattern(Subgroup s, int n);
template <class T>
MemberResult pattern_check(const Mat4<T>& g, const Pattern& pat);

// ---- named elements over the base ring (precision cfg.k)

GMatB base_identity(const LocalConfig& cfg);
GMatB base_from_ints(const LocalConfig& cfg, const std::array<i64, 16>& v);
GMatB h_matrix(const LocalConfig& cfg, int l, int m);
GMatB s1_matrix(const LocalConfig& cfg);
GMatB s2_matrix(const LocalConfig& cfg);
GMatB J_matrix(const LocalConfig& cfg);
/// identity with (4,2)-entry z*pi
GMatB A_matrix(const LocalConfig& cfg, i64 z);
/// t(x,y) in T(F) embedded as diag(t, det(t) t^{-T})
GMatB t_matrix(const LocalConfig& cfg, const Residue& x, const Residue& y);
/// upper unipotent [[1, X], [0, 1]] with X = [[e, f], [f, g]]
GMatB u_matrix(const LocalConfig& cfg, const Residue& e, const Residue& f, const Residue& g);
GMatB inverse_similitude(const GMatB& g);

// ---- named elements over o_L

GMatE ext_identity(const LocalConfig& cfg);
GMatE to_ext(const GMatB& g, const LocalConfig& cfg);
GMatE eta_matrix(const LocalConfig& cfg);
GMatE eta_m_matrix(const LocalConfig& cfg, int m);
/// m(zeta; a, b, c, d; mu): diag(zeta, 1, conj(zeta)^{-1}, 1) times the embedded 2x2 block.
GMatE levi_matrix(const QuadExt& zeta, const QuadExt& a, const QuadExt& b, const QuadExt& c, const QuadExt& d,
                  const QuadExt& mu);
GMatE inverse_similitude(const GMatE& g);

/// h(l,m)^{-1} t(x,y) u(X) h(l,m), computed with explicit p-power shifts.
struct ConjResult {
  GMatB g;  // at precision cfg.k - (2m+l)
  bool integral = false;
  Witness witness;
};
ConjResult conj_by_h(const LocalConfig& cfg, const Residue& x, const Residue& y, const Residue& e, const Residue& f,
                     const Residue& g, int l, int m);

/// diag(A, mu*A^{-T}), [[1,X],[0,1]] and [[1,0],[Y,1]] with X, Y symmetric.
GMatB levi_block(const LocalConfig& cfg, const Residue& a11, const Residue& a12, const Residue& a21, const Residue& a22,
                 const Residue& mu);
GMatB lower_block(const LocalConfig& cfg, const Residue& e, const Residue& f, const Residue& g);

/// Random element of a subgroup of GSp4(o) at level n, as a product of `words` random generators.
GMatB random_element(std::mt19937_64& rng, const LocalConfig& cfg, Subgroup s, int n, int words = 6);

// ---- GL2 helpers

struct Mat2 {
  Residue a, b, c, d;
};
bool member_K1(const Mat2& g, int n);

}  // namespace lzeta
