#include "lzeta/group.hpp"

namespace lzeta {

namespace {

Residue to_base(const Residue& x) { return x; }
Residue to_base(const QuadExt& x) { return x.base_part(); }
bool is_base(const Residue&) { return true; }
bool is_base(const QuadExt& x) { return x.in_base(); }

template <class T>
Mat4<T> J_like(const T& proto) {
  T z = proto - proto;
  T one = z;
  if constexpr (std::is_same_v<T, Residue>) {
    one = z.scalar(1);
  } else {
    one = QuadExt::one_like(z);
  }
  Mat4<T> J = Mat4<T>::filled(z);
  J(0, 2) = one;
  J(1, 3) = one;
  J(2, 0) = -one;
  J(3, 1) = -one;
  return J;
}

std::string ideal_name(int code) {
  if (code == -2) return "unit";
  if (code == -1) return "integral";
  if (code == 0) return "o";
  return "P^" + std::to_string(code);
}

}  // namespace

template <class T>
MultiplierResult multiplier(const Mat4<T>& g) {
  MultiplierResult res;
  Mat4<T> J = J_like(g.e[0]);
  Mat4<T> S = g.conj().transpose() * J * g;
  T mu = S(0, 2);
  if (!is_base(mu)) {
    res.witness = {1, 3, "multiplier not in base ring"};
    return res;
  }
  Mat4<T> muJ = J;
  for (auto& x : muJ.e) x = x * mu;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (!(S(i, j) == muJ(i, j))) {
        res.witness = {i + 1, j + 1, "similitude relation"};
        return res;
      }
  res.mu = to_base(mu);
  res.ok = true;
  return res;
}

template MultiplierResult multiplier(const Mat4<Residue>&);
template MultiplierResult multiplier(const Mat4<QuadExt>&);

const char* to_string(Subgroup s) {
  switch (s) {
    case Subgroup::K_H: return "K_H";
    case Subgroup::Iwahori: return "Iwahori";
    case Subgroup::Klingen_n: return "Klingen_n";
    case Subgroup::Ksharp_Pn: return "Ksharp_Pn";
    case Subgroup::Ksharp_pn: return "Ksharp_pn";
    case Subgroup::P_cap_K: return "P_cap_K";
  }
  return "?";
}

Subgroup subgroup_from_string(const std::string& s) {
  for (Subgroup g : {Subgroup::K_H, Subgroup::Iwahori, Subgroup::Klingen_n, Subgroup::Ksharp_Pn, Subgroup::Ksharp_pn,
                     Subgroup::P_cap_K})
    if (s == to_string(g)) return g;
  throw std::invalid_argument("unknown subgroup '" + s + "'");
}

Pattern subgroup_pattern(Subgroup s, int n) {
  const int U = -2, O = -1;
  switch (s) {
    case Subgroup::K_H: return {O, O, O, O, O, O, O, O, O, O, O, O, O, O, O, O};
    case Subgroup::Iwahori: return {U, 1, O, O, O, U, O, O, 1, 1, U, O, 1, 1, 1, U};
    case Subgroup::Klingen_n: return {O, n, O, O, O, U, O, O, O, n, O, O, n, n, n, U};
    case Subgroup::Ksharp_Pn:
    case Subgroup::Ksharp_pn:
      if (n == 0) return subgroup_pattern(Subgroup::K_H, 0);
      return {U, n, O, O, O, U, O, O, 1, n, U, O, n, n, n, U};
    case Subgroup::P_cap_K: return {U, O, O, O, n, O, O, O, n, n, U, n, n, O, O, O};
  }
  return {};
}

template <class T>
MemberResult pattern_check(const Mat4<T>& g, const Pattern& pat) {
  MemberResult r;
  // divisibility cells first, then the unit cells they force
  for (int pass = 0; pass < 2; ++pass)
    for (int i = 0; i < 16; ++i) {
      int code = pat[i];
      if ((code == -2) != (pass == 1) || code == -1) continue;
      const T& x = g.e[i];
      bool good = code == -2 ? x.is_unit() : x.in_ideal(code);
      if (!good) {
        r.ok = false;
        r.witness = {i / 4 + 1, i % 4 + 1, ideal_name(code)};
        return r;
      }
    }
  return r;
}

template MemberResult pattern_check(const Mat4<Residue>&, const Pattern&);
template MemberResult pattern_check(const Mat4<QuadExt>&, const Pattern&);

template <class T>
MemberResult member(const Mat4<T>& g, Subgroup s, int n) {
  int need = std::max(n, 1);
  if (g.e[0].precision() < need)
    throw PrecisionError("membership at level " + std::to_string(n) + " needs precision " + std::to_string(need));
  MemberResult r = pattern_check(g, subgroup_pattern(s, n));
  if (!r.ok) return r;
  MultiplierResult mu = multiplier(g);
  if (!mu.ok) return {false, mu.witness};
  if (!mu.mu->is_unit()) return {false, {1, 3, "unit multiplier"}};
  return r;
}

template MemberResult member(const Mat4<Residue>&, Subgroup, int);
template MemberResult member(const Mat4<QuadExt>&, Subgroup, int);

// ---------------------------------------------------------------- base-ring elements

GMatB base_identity(const LocalConfig& cfg) {
  Residue z(0, cfg.p, cfg.k);
  return GMatB::identity(z, z.scalar(1));
}

GMatB base_from_ints(const LocalConfig& cfg, const std::array<i64, 16>& v) {
  GMatB m = base_identity(cfg);
  for (int i = 0; i < 16; ++i) m.e[i] = Residue(v[i], cfg.p, cfg.k);
  return m;
}

GMatB h_matrix(const LocalConfig& cfg, int l, int m) {
  if (l < 0 || m < 0) throw std::invalid_argument("h(l,m) needs l,m >= 0");
  GMatB h = base_identity(cfg);
  auto pw = [&](int e) { return e >= cfg.k ? Residue(0, cfg.p, cfg.k) : Residue(ipow(cfg.p, e), cfg.p, cfg.k); };
  h(0, 0) = pw(2 * m + l);
  h(1, 1) = pw(m + l);
  h(3, 3) = pw(m);
  return h;
}

GMatB s1_matrix(const LocalConfig& cfg) {
  return base_from_ints(cfg, {0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0});
}

GMatB s2_matrix(const LocalConfig& cfg) {
  return base_from_ints(cfg, {0, 0, 1, 0, 0, 1, 0, 0, -1, 0, 0, 0, 0, 0, 0, 1});
}

GMatB J_matrix(const LocalConfig& cfg) {
  return base_from_ints(cfg, {0, 0, 1, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, -1, 0, 0});
}

GMatB A_matrix(const LocalConfig& cfg, i64 z) {
  GMatB a = base_identity(cfg);
  a(3, 1) = Residue(z * cfg.p, cfg.p, cfg.k);
  return a;
}

GMatB t_matrix(const LocalConfig& cfg, const Residue& x, const Residue& y) {
  Residue b(cfg.b, cfg.p, cfg.k), a(cfg.a, cfg.p, cfg.k), c(cfg.c, cfg.p, cfg.k);
  Residue half(inv_mod(2, cfg.modulus()), cfg.p, cfg.k);
  Residue t11 = x + y * b * half, t12 = y * c, t21 = -(y * a), t22 = x - y * b * half;
  GMatB m = base_identity(cfg);
  Residue z = x.scalar(0);
  m.e = {t11, t12, z, z, t21, t22, z, z, z, z, t22, -t21, z, z, -t12, t11};
  return m;
}

GMatB u_matrix(const LocalConfig& cfg, const Residue& e, const Residue& f, const Residue& g) {
  GMatB m = base_identity(cfg);
  m(0, 2) = e;
  m(0, 3) = f;
  m(1, 2) = f;
  m(1, 3) = g;
  return m;
}

template <class T>
static Mat4<T> inverse_sim_impl(const Mat4<T>& g) {
  MultiplierResult mu = multiplier(g);
  if (!mu.ok || !mu.mu->is_unit()) throw std::domain_error("inverse_similitude: not a similitude with unit multiplier");
  Mat4<T> J = J_like(g.e[0]);
  Mat4<T> Jinv = J;
  for (auto& x : Jinv.e) x = -x;
  Mat4<T> r = Jinv * g.conj().transpose() * J;
  Residue mi = mu.mu->inv();
  for (auto& x : r.e) x = x * mi;
  return r;
}

GMatB inverse_similitude(const GMatB& g) { return inverse_sim_impl(g); }
GMatE inverse_similitude(const GMatE& g) { return inverse_sim_impl(g); }

// ---------------------------------------------------------------- extension elements

GMatE ext_identity(const LocalConfig& cfg) {
  QuadExt z = QuadExt::from_int(0, cfg);
  return GMatE::identity(z, QuadExt::from_int(1, cfg));
}

GMatE to_ext(const GMatB& g, const LocalConfig& cfg) {
  GMatE r = ext_identity(cfg);
  for (int i = 0; i < 16; ++i) r.e[i] = QuadExt::from_base(g.e[i], cfg);
  return r;
}

GMatE eta_m_matrix(const LocalConfig& cfg, int m) {
  QuadExt al = make_alpha(cfg);
  Residue pm(m >= cfg.k ? 0 : ipow(cfg.p, m), cfg.p, cfg.k);
  GMatE e = ext_identity(cfg);
  e(1, 0) = al * pm;
  e(2, 3) = -(al.conj() * pm);
  return e;
}

GMatE eta_matrix(const LocalConfig& cfg) { return eta_m_matrix(cfg, 0); }

GMatE levi_matrix(const QuadExt& zeta, const QuadExt& a, const QuadExt& b, const QuadExt& c, const QuadExt& d,
                  const QuadExt& mu) {
  QuadExt z = QuadExt::zero_like(zeta), one = QuadExt::one_like(zeta);
  GMatE m1 = GMatE::identity(z, one);
  m1(0, 0) = zeta;
  m1(2, 2) = zeta.conj().inv();
  GMatE m2 = GMatE::identity(z, one);
  m2(1, 1) = a;
  m2(1, 3) = b;
  m2(2, 2) = mu;
  m2(3, 1) = c;
  m2(3, 3) = d;
  return m1 * m2;
}

// ---------------------------------------------------------------- conjugation by h(l,m)

ConjResult conj_by_h(const LocalConfig& cfg, const Residue& x, const Residue& y, const Residue& e, const Residue& f,
                     const Residue& g, int l, int m) {
  if (l < 0 || m < 0) throw std::invalid_argument("conj_by_h needs l,m >= 0");
  int shift = 2 * m + l;
  if (x.precision() < shift + 1)
    throw PrecisionError("conj_by_h needs precision above 2m+l = " + std::to_string(shift));
  GMatB t = t_matrix(cfg, x, y);
  GMatB r = t * u_matrix(cfg, e, f, g);
  const int ex[4] = {2 * m + l, m + l, 0, m};
  int k2 = x.precision() - shift;
  ConjResult res;
  res.integral = true;
  res.g = GMatB::identity(Residue(0, cfg.p, k2), Residue(1, cfg.p, k2));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      int s = ex[j] - ex[i];
      const Residue& v = r(i, j);
      i64 val;
      if (s >= 0) {
        val = s >= x.precision() ? 0 : mul_mod(v.value(), ipow(cfg.p, s), v.modulus());
      } else {
        Valuation vv = v.valuation();
        if (vv.value < -s) {
          if (res.integral) res.witness = {i + 1, j + 1, "divisible by p^" + std::to_string(-s)};
          res.integral = false;
          val = 0;
        } else {
          val = v.value() / ipow(cfg.p, -s);
        }
      }
      res.g(i, j) = Residue(val, cfg.p, k2);
    }
  if (res.integral) {
    Residue det = t(0, 0) * t(1, 1) - t(0, 1) * t(1, 0);
    if (!det.is_unit()) {
      res.integral = false;
      res.witness = {1, 3, "unit multiplier"};
    }
  }
  return res;
}

bool member_K1(const Mat2& g, int n) {
  if (!g.a.is_unit() || !g.d.is_unit()) return false;
  return g.c.in_ideal(n);
}

}  // namespace lzeta

namespace lzeta {

GMatB levi_block(const LocalConfig& cfg, const Residue& a11, const Residue& a12, const Residue& a21,
                 const Residue& a22, const Residue& mu) {
  Residue di = (a11 * a22 - a12 * a21).inv() * mu;
  GMatB m = base_identity(cfg);
  m(0, 0) = a11;
  m(0, 1) = a12;
  m(1, 0) = a21;
  m(1, 1) = a22;
  m(2, 2) = a22 * di;
  m(2, 3) = -(a21 * di);
  m(3, 2) = -(a12 * di);
  m(3, 3) = a11 * di;
  return m;
}

GMatB lower_block(const LocalConfig& cfg, const Residue& e, const Residue& f, const Residue& g) {
  GMatB m = base_identity(cfg);
  m(2, 0) = e;
  m(2, 1) = f;
  m(3, 0) = f;
  m(3, 1) = g;
  return m;
}

GMatB random_element(std::mt19937_64& rng, const LocalConfig& cfg, Subgroup s, int n, int words) {
  auto any = [&] { return Residue(static_cast<i64>(rng() % static_cast<std::uint64_t>(cfg.modulus())), cfg.p, cfg.k); };
  auto ideal = [&](int e) {
    if (e <= 0) return any();
    if (e >= cfg.k) return Residue(0, cfg.p, cfg.k);
    return any() * Residue(ipow(cfg.p, e), cfg.p, cfg.k);
  };
  auto unit = [&] {
    for (;;) {
      Residue r = any();
      if (r.is_unit()) return r;
    }
  };
  if (s == Subgroup::Ksharp_pn || s == Subgroup::Ksharp_Pn)
    if (n == 0) s = Subgroup::K_H;
  int n1 = std::max(n, 1);
  GMatB g = base_identity(cfg);
  for (int w = 0; w < words; ++w) {
    int kind = static_cast<int>(rng() % (s == Subgroup::K_H ? 6 : 4));
    GMatB x = base_identity(cfg);
    Residue z = Residue(0, cfg.p, cfg.k);
    switch (kind) {
      case 0: {  // Levi with unit diagonal
        Residue a12 = z, a21 = z;
        switch (s) {
          case Subgroup::K_H: a12 = any(); a21 = any(); break;
          case Subgroup::Iwahori: a12 = ideal(1); a21 = any(); break;
          case Subgroup::Klingen_n:
          case Subgroup::Ksharp_pn:
          case Subgroup::Ksharp_Pn: a12 = ideal(n); a21 = any(); break;
          case Subgroup::P_cap_K: a12 = any(); a21 = ideal(n); break;
        }
        Residue a11 = unit(), a22 = unit();
        while (!(a11 * a22 - a12 * a21).is_unit()) a11 = unit();
        x = levi_block(cfg, a11, a12, a21, a22, unit());
        break;
      }
      case 1:
        x = u_matrix(cfg, any(), any(), any());
        break;
      case 2: {
        Residue e = z, f = z, gg = z;
        switch (s) {
          case Subgroup::K_H: e = any(); f = any(); gg = any(); break;
          case Subgroup::Iwahori: e = ideal(1); f = ideal(1); gg = ideal(1); break;
          case Subgroup::Klingen_n: e = any(); f = ideal(n); gg = ideal(n); break;
          case Subgroup::Ksharp_pn:
          case Subgroup::Ksharp_Pn: e = ideal(1); f = ideal(n1); gg = ideal(n1); break;
          case Subgroup::P_cap_K: gg = any(); break;
        }
        x = lower_block(cfg, e, f, gg);
        break;
      }
      case 3: {
        Residue mu = unit();
        x(0, 0) = unit();
        x(1, 1) = unit();
        x(2, 2) = mu * x(0, 0).inv();
        x(3, 3) = mu * x(1, 1).inv();
        break;
      }
      case 4: x = s1_matrix(cfg); break;
      case 5: x = s2_matrix(cfg); break;
    }
    g = g * x;
  }
  return g;
}

}  // namespace lzeta
