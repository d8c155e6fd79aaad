#include "lzeta/cosets.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

namespace lzeta {

namespace {

GMatB unip(const LocalConfig& cfg, std::initializer_list<std::tuple<int, int, i64>> cells) {
  GMatB g = base_identity(cfg);
  for (auto [i, j, v] : cells) g(i - 1, j - 1) = Residue(v, cfg.p, cfg.k);
  return g;
}

unsigned worker_count(unsigned workers) {
  if (workers) return workers;
  unsigned h = std::thread::hardware_concurrency();
  return h ? h : 1;
}

}  // namespace

std::vector<std::vector<GMatB>> bruhat_cells(const LocalConfig& cfg) {
  const i64 q = cfg.p;
  GMatB s1 = s1_matrix(cfg), s2 = s2_matrix(cfg);
  GMatB s12 = s1 * s2, s21 = s2 * s1, s121 = s12 * s1, s212 = s21 * s2, s1212 = s121 * s2;
  std::vector<std::vector<GMatB>> cells(8);
  cells[0].push_back(base_identity(cfg));
  for (i64 x = 0; x < q; ++x) {
    cells[1].push_back(unip(cfg, {{2, 1, x}, {3, 4, -x}}) * s1);
    cells[2].push_back(unip(cfg, {{1, 3, x}}) * s2);
    for (i64 y = 0; y < q; ++y) {
      cells[3].push_back(unip(cfg, {{2, 1, x}, {2, 4, y}, {3, 4, -x}}) * s12);
      cells[4].push_back(unip(cfg, {{1, 3, x}, {1, 4, y}, {2, 3, y}}) * s21);
      for (i64 z = 0; z < q; ++z) {
        cells[5].push_back(unip(cfg, {{1, 4, y}, {2, 1, x}, {2, 3, y}, {2, 4, x * y + z}, {3, 4, -x}}) * s121);
        cells[6].push_back(unip(cfg, {{1, 3, x}, {1, 4, y}, {2, 3, y}, {2, 4, z}}) * s212);
        for (i64 w = 0; w < q; ++w)
          cells[7].push_back(
              unip(cfg, {{1, 3, x}, {1, 4, y}, {2, 1, w}, {2, 3, w * x + y}, {2, 4, w * y + z}, {3, 4, -w}}) * s1212);
      }
    }
  }
  return cells;
}

GMatB refinement_matrix(const LocalConfig& cfg, i64 w, i64 y, i64 z) {
  const i64 p = cfg.p;
  return unip(cfg, {{1, 2, w * p}, {4, 3, -w * p}}) * unip(cfg, {{3, 2, y * p}, {4, 1, y * p}, {4, 2, z * p}});
}

std::uint64_t coset_key(const GMatB& g, int n) {
  i64 c1[4], c2[4];
  for (int i = 0; i < 4; ++i) {
    c1[i] = g(i, 0).value();
    c2[i] = g(i, 1).value();
  }
  return coset_key_columns(c1, c2, g.e[0].p(), n);
}

std::uint64_t coset_key_columns(const i64* col1, const i64* col2, i64 p, int n) {
  const i64 pn = ipow(p, n);
  i64 col[4], c1[4], c2[4];
  for (int i = 0; i < 4; ++i) {
    col[i] = mod_norm(col2[i], pn);
    c1[i] = mod_norm(col1[i], p);
    c2[i] = mod_norm(col2[i], p);
  }
  int lead = -1;
  for (int i = 0; i < 4; ++i)
    if (col[i] % p != 0) {
      lead = i;
      break;
    }
  if (lead < 0) throw std::domain_error("coset_key: column 2 is not primitive (matrix not in K^H)");
  i64 s = inv_mod(col[lead], pn);
  std::uint64_t key = 0;
  for (int i = 0; i < 4; ++i) key = key * static_cast<std::uint64_t>(pn) + static_cast<std::uint64_t>(mul_mod(col[i], s, pn));
  i64 minors[6];
  int t = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) minors[t++] = mod_norm(c1[i] * c2[j] - c1[j] * c2[i], p);
  int first = -1;
  for (int i = 0; i < 6; ++i)
    if (minors[i]) {
      first = i;
      break;
    }
  if (first < 0) throw std::domain_error("coset_key: columns 1,2 are dependent mod p (matrix not in K^H)");
  i64 si = inv_mod(minors[first], p);
  for (int i = 0; i < 6; ++i) key = key * static_cast<std::uint64_t>(p) + static_cast<std::uint64_t>(mul_mod(minors[i], si, p));
  return key;
}

i64 coset_index_formula(i64 q, int n) { return ipow(q, 3 * (n - 1)) * (q + 1) * (ipow(q, 4) - 1) / (q - 1); }

CosetTable CosetTable::from_reps(i64 p, int n, std::vector<GMatB> reps, std::vector<std::uint8_t> family) {
  CosetTable t;
  t.p_ = p;
  t.n_ = n;
  t.cfg_ = default_config(p, n, SplitType::inert);
  t.reps_ = std::move(reps);
  t.family_ = std::move(family);
  t.index_.reserve(t.reps_.size() * 2);
  for (std::size_t i = 0; i < t.reps_.size(); ++i) t.index_.emplace(coset_key(t.reps_[i], n), static_cast<std::uint32_t>(i));
  return t;
}

CosetTable CosetTable::build(i64 p, int n) {
  if (n < 1) throw std::invalid_argument("coset table needs n >= 1");
  LocalConfig cfg = default_config(p, n, SplitType::inert);
  auto cells = bruhat_cells(cfg);
  const i64 r = ipow(p, n - 1);
  std::vector<GMatB> refine;
  refine.reserve(static_cast<std::size_t>(r * r * r));
  for (i64 w = 0; w < r; ++w)
    for (i64 y = 0; y < r; ++y)
      for (i64 z = 0; z < r; ++z) refine.push_back(refinement_matrix(cfg, w, y, z));
  std::vector<GMatB> reps;
  std::vector<std::uint8_t> fam;
  for (std::size_t f = 0; f < cells.size(); ++f)
    for (const GMatB& c : cells[f])
      for (const GMatB& x : refine) {
        reps.push_back(c * x);
        fam.push_back(static_cast<std::uint8_t>(f + 1));
      }
  return from_reps(p, n, std::move(reps), std::move(fam));
}

std::optional<std::size_t> CosetTable::lookup_key(std::uint64_t key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t CosetTable::resolve(const GMatB& g) const {
  GMatB h = g;
  if (g.e[0].precision() != n_)
    for (auto& x : h.e) x = x.reduce(n_);
  if (auto id = lookup_key(coset_key(h, n_))) return *id;
  GMatB hi = inverse_similitude(h);
  for (std::size_t i = 0; i < reps_.size(); ++i)
    if (member(hi * reps_[i], Subgroup::Ksharp_pn, n_).ok) return i;
  throw std::runtime_error("resolve: no representative matches (coset table corrupted)");
}

std::optional<Collision> CosetTable::find_collision(unsigned workers) const {
  const std::size_t N = reps_.size();
  const i64 pn = ipow(p_, n_);
  std::vector<std::array<i64, 16>> inv(N), fwd(N);
  for (std::size_t i = 0; i < N; ++i) {
    GMatB gi = inverse_similitude(reps_[i]);
    for (int t = 0; t < 16; ++t) {
      inv[i][t] = gi.e[t].value();
      fwd[i][t] = reps_[i].e[t].value();
    }
  }
  // divisibility cells of K^#(p^n) in the order member() checks them
  const int cells[6][2] = {{0, 1}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};
  const i64 need[6] = {pn, p_, pn, pn, pn, pn};
  std::atomic<std::size_t> next{0};
  std::atomic<bool> found{false};
  std::mutex mu;
  std::optional<Collision> result;
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= N || found.load()) return;
      const auto& a = inv[i];
      for (std::size_t j = i + 1; j < N; ++j) {
        const auto& b = fwd[j];
        bool in = true;
        for (int c = 0; c < 6 && in; ++c) {
          int r = cells[c][0], s = cells[c][1];
          i64 v = 0;
          for (int k = 0; k < 4; ++k) v += a[4 * r + k] * b[4 * k + s];
          in = v % need[c] == 0;
        }
        if (!in) continue;
        if (!member(inverse_similitude(reps_[i]) * reps_[j], Subgroup::Ksharp_pn, n_).ok) continue;
        std::lock_guard<std::mutex> lock(mu);
        if (!result || std::make_pair(i, j) < std::make_pair(result->i, result->j)) result = Collision{i, j};
        found = true;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < worker_count(workers); ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return result;
}

// ---------------------------------------------------------------- preliminary representatives

std::vector<PrelimRep> prelim_reps(i64 p, int n) {
  const i64 r = ipow(p, n - 1), s = ipow(p, n);
  std::vector<PrelimRep> out;
  for (int c = 1; c <= 8; ++c) {
    bool full_w = c == 2 || c == 4 || c == 6 || c == 8;
    bool has_yz = c <= 4;
    i64 wr = full_w ? s : r, yr = has_yz ? r : 1;
    for (i64 w = 0; w < wr; ++w)
      for (i64 y = 0; y < yr; ++y)
        for (i64 z = 0; z < yr; ++z) out.push_back({c, w, y, z});
  }
  return out;
}

GMatB prelim_matrix(const LocalConfig& cfg, const PrelimRep& r) {
  const i64 p = cfg.p, w = r.w, y = r.y, z = r.z;
  GMatB s1 = s1_matrix(cfg), s2 = s2_matrix(cfg);
  GMatB U1 = unip(cfg, {{1, 2, w * p}, {4, 3, -w * p}});
  GMatB Lw = unip(cfg, {{2, 1, w}, {3, 4, -w}});
  switch (r.case_id) {
    case 1: return U1 * unip(cfg, {{3, 2, y * p}, {4, 1, y * p}, {4, 2, z * p}});
    case 2: return Lw * unip(cfg, {{3, 1, z * p}, {3, 2, y * p}, {4, 1, y * p}}) * s1;
    case 3:
      return unip(cfg, {{3, 2, w * p}, {4, 1, w * p}}) * unip(cfg, {{1, 2, y * p}, {4, 2, z * p}, {4, 3, -y * p}}) * s2;
    case 4: return Lw * unip(cfg, {{3, 1, y * p}, {3, 2, z * p}, {4, 1, z * p}}) * s1 * s2;
    case 5: return U1 * s2 * s1;
    case 6: return Lw * s1 * s2 * s1;
    case 7: return U1 * s2 * s1 * s2;
    case 8: return Lw * s1 * s2 * s1 * s2;
  }
  throw std::invalid_argument("preliminary case must be 1..8");
}

bool support_fast(const LocalConfig& cfg, int m, int n, const PrelimRep& r) {
  const i64 p = cfg.p;
  const i64 r1 = ipow(p, n - 1);
  auto val = [&](i64 x, i64 mod, int cap) { return val_p(mod_norm(x, mod), p, cap); };
  const int t = n - m - 1;
  switch (r.case_id) {
    case 1: return mod_norm(r.y, r1) == 0 && val(r.z, r1, n - 1) >= t;
    case 2: {
      // norm of pi^m alpha + w, scaled by c: c w^2 + b pi^m w + a pi^{2m}
      i64 pm = m == 0 ? 1 : 0, p2m = m == 0 ? 1 : 0;
      i64 nrm = mod_norm(cfg.c * r.w % p * r.w + cfg.b % p * pm * r.w + cfg.a % p * p2m, p);
      if (nrm == 0) return false;
      return val(r.y, r1, n - 1) >= t && mod_norm(r.z - r.w * r.y, r1) == 0;
    }
    case 3:
    case 4:
    case 5:
    case 7:
    case 8: return false;
    case 6: return m >= n && mod_norm(r.w, ipow(p, n)) == 0;
  }
  throw std::invalid_argument("preliminary case must be 1..8");
}

}  // namespace lzeta
