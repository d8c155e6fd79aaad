#include "lzeta/double_coset.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <thread>
#include <unordered_set>

namespace lzeta {

namespace {

struct Ctx {
  i64 pn, b, a, c, half, pm, p2m;
};

Ctx make_ctx(const LocalConfig& cfg, int n, int m) {
  Ctx x;
  x.pn = ipow(cfg.p, n);
  x.b = mod_norm(cfg.b, x.pn);
  x.a = mod_norm(cfg.a, x.pn);
  x.c = mod_norm(cfg.c, x.pn);
  x.half = inv_mod(2, x.pn);
  x.pm = m >= n ? 0 : ipow(cfg.p, m);
  x.p2m = 2 * m >= n ? 0 : ipow(cfg.p, 2 * m);
  return x;
}

using T2 = std::array<i64, 4>;

T2 torus(const Ctx& k, i64 x, i64 y) {
  i64 by = k.b * k.pm % k.pn * y % k.pn * k.half % k.pn;
  return {mod_norm(x + by, k.pn), k.c * y % k.pn, mod_norm(-(k.a * k.p2m % k.pn * y), k.pn), mod_norm(x - by, k.pn)};
}

RawMat embed(const T2& t, i64 e, i64 f, i64 g, i64 pn) {
  auto md = [pn](i64 v) { return mod_norm(v, pn); };
  return {t[0], t[1], md(t[0] * e + t[1] * f), md(t[0] * f + t[1] * g),
          t[2], t[3], md(t[2] * e + t[3] * f), md(t[2] * f + t[3] * g),
          0,    0,    t[3],                    md(-t[2]),
          0,    0,    md(-t[1]),               t[0]};
}

bool det_unit(const T2& t, i64 p, i64 pn) { return mod_norm(t[0] * t[3] - t[1] * t[2], pn) % p != 0; }

T2 mul2(const T2& a, const T2& b, i64 pn) {
  return {(a[0] * b[0] + a[1] * b[2]) % pn, (a[0] * b[1] + a[1] * b[3]) % pn, (a[2] * b[0] + a[3] * b[2]) % pn,
          (a[2] * b[1] + a[3] * b[3]) % pn};
}

std::uint64_t key_of(const RawMat& k, const i64* c1, const i64* c2, i64 p, int n, i64 pn) {
  i64 d1[4], d2[4];
  for (int i = 0; i < 4; ++i) {
    i64 s1 = 0, s2 = 0;
    for (int j = 0; j < 4; ++j) {
      s1 += k[4 * i + j] * c1[j];
      s2 += k[4 * i + j] * c2[j];
    }
    d1[i] = s1 % pn;
    d2[i] = s2 % pn;
  }
  return coset_key_columns(d1, d2, p, n);
}

struct Cols {
  i64 c1[4], c2[4];
};

std::vector<Cols> table_columns(const CosetTable& t) {
  std::vector<Cols> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    for (int r = 0; r < 4; ++r) {
      out[i].c1[r] = t.rep(i)(r, 0).value();
      out[i].c2[r] = t.rep(i)(r, 1).value();
    }
  return out;
}

std::size_t find_root(std::vector<std::uint32_t>& par, std::size_t x) {
  while (par[x] != x) {
    par[x] = par[par[x]];
    x = par[x];
  }
  return x;
}

OrbitPartition finish(const std::vector<std::uint32_t>& root_of) {
  OrbitPartition part;
  part.orbit_of.resize(root_of.size());
  std::map<std::uint32_t, std::uint32_t> ids;
  for (std::size_t i = 0; i < root_of.size(); ++i) {
    auto [it, fresh] = ids.emplace(root_of[i], static_cast<std::uint32_t>(ids.size()));
    if (fresh) {
      part.sizes.push_back(0);
      part.first.push_back(i);
    }
    part.orbit_of[i] = it->second;
    ++part.sizes[it->second];
  }
  part.support.assign(part.sizes.size(), -1);
  return part;
}

i64 floor_div(i64 a, i64 b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

}  // namespace

RawMat raw_of(const GMatB& g) {
  RawMat r;
  for (int i = 0; i < 16; ++i) r[i] = g.e[i].value();
  return r;
}

RawMat raw_mul(const RawMat& a, const RawMat& b, i64 mod) {
  RawMat r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      i64 s = 0;
      for (int k = 0; k < 4; ++k) s += a[4 * i + k] * b[4 * k + j] % mod;
      r[4 * i + j] = s % mod;
    }
  return r;
}

std::optional<RawMat> klm_element(const LocalConfig& cfg, int n, int m, const KlmParams& kp) {
  Ctx k = make_ctx(cfg, n, m);
  T2 t = torus(k, mod_norm(kp.x, k.pn), mod_norm(kp.y, k.pn));
  if (!det_unit(t, cfg.p, k.pn)) return std::nullopt;
  return embed(t, mod_norm(kp.e, k.pn), mod_norm(kp.f, k.pn), mod_norm(kp.g, k.pn), k.pn);
}

std::optional<RawMat> klm_element_via_conjugation(const LocalConfig& cfg, int n, int l, int m, const KlmParams& kp) {
  LocalConfig c2 = cfg;
  c2.k = n + 2 * m + l;
  auto R = [&](i64 v, int e) { return Residue(mod_norm(v, c2.modulus()), c2.p, c2.k) * Residue(ipow(c2.p, e), c2.p, c2.k); };
  ConjResult r = conj_by_h(c2, R(kp.x, 0), R(kp.y, m), R(kp.e, 2 * m + l), R(kp.f, m + l), R(kp.g, l), l, m);
  if (!r.integral) return std::nullopt;
  return raw_of(r.g);
}

std::size_t klm_torus_size(const LocalConfig& cfg, int n, int m) {
  Ctx k = make_ctx(cfg, n, m);
  std::size_t c = 0;
  for (i64 x = 0; x < k.pn; ++x)
    for (i64 y = 0; y < k.pn; ++y) c += det_unit(torus(k, x, y), cfg.p, k.pn);
  return c;
}

std::vector<RawMat> klm_grid(const LocalConfig& cfg, int n, int l, int m) {
  Ctx k = make_ctx(cfg, n, m);
  (void)l;
  std::vector<RawMat> out;
  for (i64 x = 0; x < k.pn; ++x)
    for (i64 y = 0; y < k.pn; ++y) {
      T2 t = torus(k, x, y);
      if (!det_unit(t, cfg.p, k.pn)) continue;
      for (i64 e = 0; e < k.pn; ++e)
        for (i64 f = 0; f < k.pn; ++f)
          for (i64 g = 0; g < k.pn; ++g) out.push_back(embed(t, e, f, g, k.pn));
    }
  return out;
}

std::vector<RawMat> klm_generators(const LocalConfig& cfg, int n, int m) {
  Ctx k = make_ctx(cfg, n, m);
  std::vector<T2> all;
  for (i64 x = 0; x < k.pn; ++x)
    for (i64 y = 0; y < k.pn; ++y) {
      T2 t = torus(k, x, y);
      if (det_unit(t, cfg.p, k.pn)) all.push_back(t);
    }
  std::set<T2> all_set(all.begin(), all.end());
  std::set<T2> closure{{1 % k.pn, 0, 0, 1 % k.pn}};
  std::vector<T2> chosen;
  for (const T2& t : all) {
    if (closure.size() == all_set.size()) break;
    if (closure.count(t)) continue;
    chosen.push_back(t);
    std::vector<T2> frontier(closure.begin(), closure.end());
    while (!frontier.empty()) {
      std::vector<T2> next;
      for (const T2& s : frontier)
        for (const T2& g : chosen) {
          T2 h = mul2(g, s, k.pn);
          if (!all_set.count(h)) throw std::logic_error("torus image is not closed under products");
          if (closure.insert(h).second) next.push_back(h);
        }
      frontier = std::move(next);
    }
  }
  if (closure.size() != all_set.size()) throw std::logic_error("torus generators do not generate the image");
  std::vector<RawMat> gens;
  for (const T2& t : chosen) gens.push_back(embed(t, 0, 0, 0, k.pn));
  T2 id{1 % k.pn, 0, 0, 1 % k.pn};
  gens.push_back(embed(id, 1, 0, 0, k.pn));
  gens.push_back(embed(id, 0, 1, 0, k.pn));
  gens.push_back(embed(id, 0, 0, 1, k.pn));
  return gens;
}

std::vector<RawMat> klm_sampled(const LocalConfig& cfg, int n, int m, int count, std::mt19937_64& rng) {
  Ctx k = make_ctx(cfg, n, m);
  auto r = [&] { return static_cast<i64>(rng() % static_cast<std::uint64_t>(k.pn)); };
  std::vector<RawMat> out;
  while (static_cast<int>(out.size()) < count) {
    T2 t = torus(k, r(), r());
    if (!det_unit(t, cfg.p, k.pn)) continue;
    out.push_back(embed(t, r(), r(), r(), k.pn));
  }
  return out;
}

OrbitPartition orbits_from_group(const CosetTable& table, const std::vector<RawMat>& elements) {
  const i64 p = table.p();
  const int n = table.n();
  const i64 pn = ipow(p, n);
  auto cols = table_columns(table);
  std::vector<std::uint32_t> root(table.size(), UINT32_MAX);
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (root[i] != UINT32_MAX) continue;
    for (const RawMat& k : elements) {
      auto id = table.lookup_key(key_of(k, cols[i].c1, cols[i].c2, p, n, pn));
      if (!id) throw std::runtime_error("orbit image left the coset table");
      if (root[*id] == UINT32_MAX)
        root[*id] = static_cast<std::uint32_t>(i);
      else if (root[*id] != i)
        throw std::logic_error("element list is not a group: orbits overlap");
    }
    if (root[i] != i) throw std::logic_error("element list does not contain the identity");
  }
  return finish(root);
}

OrbitPartition orbits_from_generators(const CosetTable& table, const std::vector<RawMat>& elements, unsigned workers) {
  const i64 p = table.p();
  const int n = table.n();
  const i64 pn = ipow(p, n);
  auto cols = table_columns(table);
  const std::size_t N = table.size();
  std::vector<std::uint32_t> image(N * elements.size());
  if (!workers) workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < N; i += workers)
        for (std::size_t g = 0; g < elements.size(); ++g) {
          auto id = table.lookup_key(key_of(elements[g], cols[i].c1, cols[i].c2, p, n, pn));
          image[i * elements.size() + g] = id ? static_cast<std::uint32_t>(*id) : UINT32_MAX;
        }
    });
  for (auto& t : pool) t.join();
  std::vector<std::uint32_t> par(N);
  std::iota(par.begin(), par.end(), 0u);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t g = 0; g < elements.size(); ++g) {
      std::uint32_t j = image[i * elements.size() + g];
      if (j == UINT32_MAX) throw std::runtime_error("orbit image left the coset table");
      std::size_t a = find_root(par, i), b = find_root(par, j);
      if (a != b) par[std::max(a, b)] = static_cast<std::uint32_t>(std::min(a, b));
    }
  std::vector<std::uint32_t> root(N);
  for (std::size_t i = 0; i < N; ++i) root[i] = static_cast<std::uint32_t>(find_root(par, i));
  return finish(root);
}

SupportCheck label_support(OrbitPartition& part, const CosetTable& table, const LocalConfig& cfg, int m) {
  SupportCheck sc;
  const int n = table.n();
  std::fill(part.support.begin(), part.support.end(), -1);
  std::vector<std::string> who(part.count());
  for (const PrelimRep& r : prelim_reps(table.p(), n)) {
    std::size_t id = table.resolve(prelim_matrix(cfg, r));
    std::uint32_t o = part.orbit_of[id];
    std::int8_t flag = support_fast(cfg, m, n, r) ? 1 : 0;
    std::string name = "case " + std::to_string(r.case_id) + " (w,y,z)=(" + std::to_string(r.w) + "," +
                       std::to_string(r.y) + "," + std::to_string(r.z) + ")";
    if (part.support[o] == -1) {
      part.support[o] = flag;
      who[o] = name;
    } else if (part.support[o] != flag && sc.constant) {
      sc.constant = false;
      sc.witness = "orbit " + std::to_string(o) + " holds " + who[o] + " and " + name + " with different support";
    }
  }
  for (std::size_t o = 0; o < part.count(); ++o) {
    if (part.support[o] == -1) {
      if (sc.covered && sc.witness.empty()) sc.witness = "orbit " + std::to_string(o) + " has no preliminary representative";
      sc.covered = false;
    } else if (part.support[o] == 1) {
      ++sc.support_orbits;
    } else {
      ++sc.nonsupport_orbits;
    }
  }
  return sc;
}

std::vector<PredictedRep> predicted_support(const LocalConfig& cfg, int n, int m) {
  const i64 p = cfg.p;
  std::vector<PredictedRep> out;
  int t = std::max({n - m - 1, 0, static_cast<int>(floor_div(n - 1, 2))});
  const i64 top = ipow(p, n - 1), step = t >= n - 1 ? top : ipow(p, t);
  for (i64 z = 0; z < top; z += step) out.push_back({"A(z=" + std::to_string(z) + ")", A_matrix(cfg, z)});
  for (i64 j = std::max(n - m - 1, 0); j <= floor_div(n - 3, 2); ++j)
    for (i64 u = 1; u < ipow(p, j + 1); ++u) {
      if (u % p == 0) continue;
      out.push_back({"A(z=" + std::to_string(u) + "*p^" + std::to_string(j) + ")", A_matrix(cfg, u * ipow(p, j))});
    }
  if (m >= n) out.push_back({"s1s2s1", s1_matrix(cfg) * s2_matrix(cfg) * s1_matrix(cfg)});
  return out;
}

PropositionCheck verify_support_list(const OrbitPartition& part, const CosetTable& table, const LocalConfig& cfg,
                                     int m) {
  PropositionCheck pc;
  auto preds = predicted_support(cfg, table.n(), m);
  pc.predicted = preds.size();
  std::map<std::uint32_t, std::string> seen;
  bool ok = true;
  for (const PredictedRep& r : preds) {
    std::uint32_t o = part.orbit_of[table.resolve(r.g)];
    if (part.support[o] != 1) {
      if (ok) pc.witness = r.label + " lies in a non-support orbit";
      ok = false;
    }
    auto [it, fresh] = seen.emplace(o, r.label);
    if (!fresh) {
      if (ok) pc.witness = r.label + " and " + it->second + " share an orbit";
      ok = false;
    }
  }
  for (std::size_t o = 0; o < part.count(); ++o) pc.observed += part.support[o] == 1;
  if (ok && pc.observed != pc.predicted) {
    ok = false;
    pc.witness = "support orbit count " + std::to_string(pc.observed) + " differs from the predicted " +
                 std::to_string(pc.predicted);
  }
  pc.ok = ok;
  return pc;
}

std::vector<std::uint64_t> orbit_keys(const GMatB& g, const std::vector<RawMat>& gens, int n, std::size_t max_states) {
  const i64 p = g.e[0].p(), pn = ipow(p, n);
  Cols start;
  for (int r = 0; r < 4; ++r) {
    start.c1[r] = mod_norm(g(r, 0).value(), pn);
    start.c2[r] = mod_norm(g(r, 1).value(), pn);
  }
  std::unordered_set<std::uint64_t> seen{coset_key_columns(start.c1, start.c2, p, n)};
  std::vector<Cols> frontier{start};
  while (!frontier.empty()) {
    std::vector<Cols> next;
    for (const Cols& c : frontier)
      for (const RawMat& k : gens) {
        Cols d;
        for (int i = 0; i < 4; ++i) {
          i64 s1 = 0, s2 = 0;
          for (int j = 0; j < 4; ++j) {
            s1 += k[4 * i + j] * c.c1[j];
            s2 += k[4 * i + j] * c.c2[j];
          }
          d.c1[i] = s1 % pn;
          d.c2[i] = s2 % pn;
        }
        if (seen.insert(coset_key_columns(d.c1, d.c2, p, n)).second) {
          if (seen.size() > max_states) throw BudgetError("orbit exceeds the state budget");
          next.push_back(d);
        }
      }
    frontier = std::move(next);
  }
  std::vector<std::uint64_t> out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end());
  return out;
}

bool same_orbit_A(const LocalConfig& cfg, int n, int m, int j, i64 u1, i64 u2) {
  LocalConfig c = cfg;
  c.k = n;
  auto keys = orbit_keys(A_matrix(c, u1 * ipow(c.p, j)), klm_generators(c, n, m), n);
  return std::binary_search(keys.begin(), keys.end(), coset_key(A_matrix(c, u2 * ipow(c.p, j)), n));
}

bool u_merge_element_ok(const LocalConfig& cfg, int n, int l, int m, int j, i64 u1, i64 u2) {
  const i64 p = cfg.p, pj1 = ipow(p, j + 1);
  if ((u2 - u1) % pj1 != 0) return false;
  LocalConfig c = cfg;
  c.k = n;
  const i64 pn = c.modulus();
  i64 gp = mul_mod(mod_norm((u2 - u1) / pj1, pn), inv_mod(mod_norm(u1 * u2, pn), pn), pn);
  auto k = klm_element_via_conjugation(cfg, n, l, m, {1, 0, 0, 0, gp});
  if (!k) return false;
  GMatB K = base_identity(c);
  for (int i = 0; i < 16; ++i) K.e[i] = Residue((*k)[i], p, n);
  GMatB A1 = A_matrix(c, u1 * ipow(p, j)), A2 = A_matrix(c, u2 * ipow(p, j));
  return member(inverse_similitude(A1) * K * A2, Subgroup::Ksharp_pn, n).ok;
}

}  // namespace lzeta
