#include "lzeta/volume.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "lzeta/cosets.hpp"
#include "lzeta/double_coset.hpp"
#include "lzeta/group.hpp"

namespace lzeta {

namespace {

// Enumerating (x,y) mod p^k directly is capped here; above it the count runs mod p^r, with r the depth the
// predicate reads, and is scaled by the fibre size p^{2(k-r)}.
constexpr i64 kBrutePairs = i64(1) << 24;

mpz_class zpow(i64 q, int e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(q), static_cast<unsigned long>(e));
  return r;
}

LocalConfig at_precision(const LocalConfig& cfg, int k) {
  LocalConfig c = cfg;
  c.k = k;
  i64 m = c.modulus();
  c.a = mod_norm(mul_mod(mod_norm(cfg.b * cfg.b - cfg.d, m), inv_mod(mod_norm(4 * cfg.c, m), m), m), m);
  c.b = mod_norm(cfg.b, m);
  c.c = mod_norm(cfg.c, m);
  c.d = mod_norm(cfg.d, m);
  return c;
}

bool is_unit(i64 v, i64 p) { return mod_norm(v, p) != 0; }

// pred(x, y, modulus) over pairs mod p^k; depth = largest r such that pred only reads (x, y) mod p^r.
mpz_class count_pairs(i64 p, int k, int depth, const std::function<bool(i64, i64, i64)>& pred) {
  int r = k;
  if (ipow(p, 2 * k) > kBrutePairs) r = std::min(k, std::max(depth, 1));
  i64 pr = ipow(p, r);
  mpz_class c = 0;
  for (i64 x = 0; x < pr; ++x)
    for (i64 y = 0; y < pr; ++y)
      if (pred(x, y, pr)) c += 1;
  return c * zpow(p, 2 * (k - r));
}

mpz_class count_single(i64 p, int k, const std::function<bool(i64, i64)>& pred) {
  i64 pk = ipow(p, k);
  mpz_class c = 0;
  for (i64 v = 0; v < pk; ++v)
    if (pred(v, pk)) c += 1;
  return c;
}

// T(o): det of [[x+by/2, cy], [-ay, x-by/2]] a unit.
struct TorusRing {
  i64 p, a, b, c, half;
  i64 mod;
  bool det_unit(i64 x, i64 y, i64 m) const {
    i64 by = mul_mod(mul_mod(b, y, m), half, m);
    i64 t11 = mod_norm(x + by, m), t22 = mod_norm(x - by, m);
    i64 det = mod_norm(mul_mod(t11, t22, m) + mul_mod(mul_mod(a, c, m), mul_mod(y, y, m), m), m);
    return is_unit(det, p);
  }
};

TorusRing torus_ring(const LocalConfig& cfg) {
  return {cfg.p, cfg.a, cfg.b, cfg.c, inv_mod(2, cfg.modulus()), cfg.modulus()};
}

mpz_class unit_torus_count(const LocalConfig& cfg) {
  TorusRing t = torus_ring(cfg);
  return count_pairs(cfg.p, cfg.k, 1, [&](i64 x, i64 y, i64 m) { return t.det_unit(x % m, y % m, m); });
}

void check_rep(int n, int m, DoubleCosetRep rep) {
  if (rep == DoubleCosetRep::s1s2s1 && m < n)
    throw std::invalid_argument("s1 s2 s1 double coset needs m >= n, got m=" + std::to_string(m));
}

}  // namespace

mpq_class qpow(i64 q, int e) {
  if (e >= 0) return mpq_class(zpow(q, e));
  return mpq_class(mpz_class(1), zpow(q, -e));
}

VolumeResult vol_K_sharp_formula(i64 q, int n) {
  if (n < 1) throw std::invalid_argument("vol_K_sharp needs n >= 1");
  mpq_class v(mpz_class(q - 1), zpow(q, 3 * (n - 1)) * (q + 1) * (zpow(q, 4) - 1));
  v.canonicalize();
  return {v, "formula"};
}

VolumeResult vol_K_sharp_counted(i64 q, int n) {
  static std::mutex mu;
  static std::map<std::pair<i64, int>, std::size_t> sizes;
  std::size_t size;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = sizes.find({q, n});
    if (it == sizes.end()) it = sizes.emplace(std::make_pair(q, n), CosetTable::build(q, n).size()).first;
    size = it->second;
  }
  return {mpq_class(mpz_class(1), mpz_class(static_cast<unsigned long>(size))), "counted"};
}

VolumeResult t_volume_inverse_counted(const LocalConfig& cfg0, int s, int k) {
  if (s < 1) throw std::invalid_argument("t_volume_inverse needs s >= 1");
  if (k < s + 2) throw PrecisionError("t_volume_inverse: precision k=" + std::to_string(k) + " below s+2=" +
                                      std::to_string(s + 2));
  LocalConfig cfg = at_precision(cfg0, k);
  TorusRing t = torus_ring(cfg);
  i64 ps = ipow(cfg.p, s);
  mpz_class sub = count_pairs(cfg.p, k, s, [&](i64 x, i64 y, i64 m) {
    if (y % ps != 0) return false;
    i64 by = mul_mod(mul_mod(t.b % m, y, m), t.half % m, m);
    return is_unit(x + by, t.p) && is_unit(x - by, t.p) && t.det_unit(x, y, m);
  });
  mpq_class v(unit_torus_count(cfg), sub);
  v.canonicalize();
  return {v, "counted"};
}

VolumeResult t_volume_inverse_formula(i64 q, int legendre, int s) {
  return {(1 - mpq_class(legendre, q)) * qpow(q, s), "formula"};
}

VolumeResult u_volume_counted(const LocalConfig& cfg0, int n, int l, int m, int j, i64 y, int k) {
  if (j < 0 || j > n - 1) throw std::invalid_argument("u_volume needs 0 <= j <= n-1");
  int f_exp = n + m + l;
  if (k == 0) k = f_exp + 2;
  LocalConfig cfg = at_precision(cfg0, k);
  i64 p = cfg.p, pk = cfg.modulus();
  y = mod_norm(y, pk);
  if (val_p(y, p, k) < m + j + 1) throw std::invalid_argument("u_volume: y must lie in p^{m+j+1}");
  i64 x = 1;
  i64 lead = mod_norm(x + mul_mod(mul_mod(cfg.b, y, pk), inv_mod(2, pk), pk), pk);
  i64 pl = ipow(p, l), pj1 = ipow(p, j + 1), pf = ipow(p, f_exp);
  i64 cy = mul_mod(mul_mod(pl, cfg.c, pk), y, pk);
  int g_exp = std::max(n - 2 - 2 * j + l, l);
  mpz_class ce = count_single(p, k, [&](i64 e, i64) { return val_p(e, p, k) >= 2 * m + l; });
  mpz_class cf = count_single(p, k, [&](i64 f, i64 mm) {
    i64 v = mod_norm(cy + mul_mod(mul_mod(pj1, f, mm), lead, mm), mm);
    return v % pf == 0;
  });
  mpz_class cg = count_single(p, k, [&](i64 g, i64) { return val_p(g, p, k) >= g_exp; });
  mpq_class v(ce * cf * cg, zpow(p, 3 * k));
  v.canonicalize();
  return {v, "counted"};
}

VolumeResult u_volume_formula(i64 q, int n, int l, int m, int j) {
  if (j <= (n - 3) / 2 && n >= 3) return {qpow(q, -2 * n - 3 * m - 3 * l + 3 * j + 3), "formula"};
  if (j >= (n - 1) / 2) return {qpow(q, -n - 3 * m - 3 * l + j + 1), "formula"};
  throw std::logic_error("u_volume: j in neither range");
}

VolumeResult double_coset_volume_counted(const LocalConfig& cfg0, int n, int l, int m, DoubleCosetRep rep,
                                         i64 z_value, int grid_k, unsigned workers) {
  check_rep(n, m, rep);
  if (grid_k == 0) grid_k = n;
  if (grid_k < n) throw PrecisionError("grid precision below level n");
  LocalConfig cfg = at_precision(cfg0, grid_k);
  LocalConfig cn = at_precision(cfg0, n);
  i64 p = cfg.p, pG = cfg.modulus(), pn = cn.modulus();

  GMatB L, R;
  if (rep == DoubleCosetRep::A_z) {
    L = A_matrix(cn, -z_value);
    R = A_matrix(cn, z_value);
  } else {
    GMatB w = s1_matrix(cn) * s2_matrix(cn) * s1_matrix(cn);
    L = inverse_similitude(w);
    R = w;
  }
  struct Term {
    int a, b;
    i64 coef;
  };
  // sparse B_ij = sum L_ia k_ab R_bj over the cells the membership test reads
  Pattern pat = subgroup_pattern(Subgroup::Ksharp_pn, n);
  std::vector<int> cells;
  for (int pass = 0; pass < 2; ++pass)
    for (int i = 0; i < 16; ++i)
      if (pat[i] != -1 && (pat[i] == -2) == (pass == 1)) cells.push_back(i);
  std::vector<std::vector<Term>> terms(16);
  for (int cell : cells) {
    int i = cell / 4, j = cell % 4;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        i64 c = mul_mod(L(i, a).value(), R(b, j).value(), pn);
        if (c != 0) terms[cell].push_back({a, b, c});
      }
  }
  auto good = [&](const RawMat& k) {
    for (int cell : cells) {
      i64 s = 0;
      for (const Term& t : terms[cell]) s = (s + mul_mod(t.coef, k[4 * t.a + t.b] % pn, pn)) % pn;
      int code = pat[cell];
      if (code == -2 ? s % p == 0 : s % ipow(p, code) != 0) return false;
    }
    return true;
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<mpz_class> n_good(workers), n_grid(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      std::size_t good_c = 0, grid_c = 0;
      for (i64 x = w; x < pG; x += workers)
        for (i64 y = 0; y < pG; ++y) {
          auto k0 = klm_element(cfg, grid_k, m, {x, y, 0, 0, 0});
          if (!k0) continue;
          RawMat k = *k0;
          const i64 t11 = k[0], t12 = k[1], t21 = k[4], t22 = k[5];
          for (i64 e = 0; e < pG; ++e)
            for (i64 f = 0; f < pG; ++f)
              for (i64 g = 0; g < pG; ++g) {
                k[2] = (t11 * e + t12 * f) % pG;
                k[3] = (t11 * f + t12 * g) % pG;
                k[6] = (t21 * e + t22 * f) % pG;
                k[7] = (t21 * f + t22 * g) % pG;
                ++grid_c;
                good_c += good(k);
              }
        }
      n_good[w] = static_cast<unsigned long>(good_c);
      n_grid[w] = static_cast<unsigned long>(grid_c);
    });
  for (auto& t : pool) t.join();
  mpz_class good_total = 0, grid_total = 0;
  for (unsigned w = 0; w < workers; ++w) {
    good_total += n_good[w];
    grid_total += n_grid[w];
  }
  if (good_total == 0) throw std::logic_error("no element of K_{l,m} lies in the conjugated K^#");
  mpq_class t_inv = m == 0 ? mpq_class(1) : t_volume_inverse_counted(cfg0, m, m + 2).value;
  mpq_class v = vol_K_sharp_counted(p, n).value * t_inv * qpow(p, 3 * m + 3 * l) * mpq_class(grid_total, good_total);
  v.canonicalize();
  return {v, "counted"};
}

VolumeResult double_coset_volume_factorized(const LocalConfig& cfg, int n, int l, int m, DoubleCosetRep rep, int j) {
  check_rep(n, m, rep);
  i64 p = cfg.p;
  mpq_class vk = vol_K_sharp_counted(p, n).value;
  if (rep == DoubleCosetRep::A_z) {
    int s = m + j + 1;
    mpq_class t_inv = t_volume_inverse_counted(cfg, s, s + 2).value;
    i64 y = ipow(p, s);
    mpq_class u = u_volume_counted(cfg, n, l, m, j, y).value;
    return {vk * t_inv / u, "counted"};
  }
  // conditions on t: [[x+by/2, cy p^{-m}], [-ay p^m, x-by/2]] in [[o^x, o], [p^n, o^x]]; on X: e, f, g valuations
  int k = std::max(2 * m + l, m + l + n) + 2;
  LocalConfig c = at_precision(cfg, k);
  TorusRing t = torus_ring(c);
  i64 pm = ipow(p, m), pmn = ipow(p, std::max(n - m, 0));
  mpz_class tm = count_pairs(p, k, std::max(m, n), [&](i64 x, i64 y, i64 mm) {
    if (y % pm != 0) return false;
    i64 by = mul_mod(mul_mod(t.b % mm, y, mm), t.half % mm, mm);
    if (!is_unit(x + by, p) || !is_unit(x - by, p)) return false;
    if (mul_mod(t.a % mm, y, mm) % pmn != 0) return false;
    return t.det_unit(x, y, mm);
  });
  mpq_class tm_inv(unit_torus_count(c), tm);
  tm_inv.canonicalize();
  mpz_class ce = count_single(p, k, [&](i64 e, i64) { return val_p(e, p, k) >= 2 * m + l; });
  mpz_class cf = count_single(p, k, [&](i64 f, i64) { return val_p(f, p, k) >= m + l + n; });
  mpz_class cg = count_single(p, k, [&](i64 g, i64) { return val_p(g, p, k) >= l + n; });
  mpq_class n1(ce * cf * cg, zpow(p, 3 * k));
  n1.canonicalize();
  return {vk * tm_inv / n1, "counted"};
}

VolumeResult double_coset_volume_formula(i64 q, int legendre, int n, int l, int m, DoubleCosetRep rep, int j) {
  check_rep(n, m, rep);
  mpq_class base = vol_K_sharp_formula(q, n).value * (1 - mpq_class(legendre, q));
  int e;
  if (rep == DoubleCosetRep::s1s2s1)
    e = 4 * m + 3 * l + 2 * n;
  else if (n >= 3 && j <= (n - 3) / 2)
    e = 2 * n + 4 * m + 3 * l - 2 * j - 2;
  else
    e = n + 4 * m + 3 * l;
  return {base * qpow(q, e), "formula"};
}

}  // namespace lzeta
