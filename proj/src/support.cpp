#include "lzeta/support.hpp"

#include <deque>

namespace lzeta {

namespace {

GMatB component(const GMatE& g, bool second) {
  Residue z = g.e[0].s().scalar(0);
  GMatB r = GMatB::filled(z);
  for (int i = 0; i < 16; ++i) r.e[i] = second ? g.e[i].t() : g.e[i].s();
  return r;
}

// 2n base-ring digits per o_L coordinate
std::uint64_t pack(std::uint64_t acc, const QuadExt& x, std::uint64_t radix) {
  acc = acc * radix + static_cast<std::uint64_t>(x.s().value());
  return acc * radix + static_cast<std::uint64_t>(x.t().value());
}

}  // namespace

ExtKey ext_coset_key(const GMatE& g, int n) {
  if (g.e[0].type() == SplitType::split) {
    GMatB a = component(g, false), b = component(g, true);
    if (a.e[0].precision() != n)
      for (int i = 0; i < 16; ++i) {
        a.e[i] = a.e[i].reduce(n);
        b.e[i] = b.e[i].reduce(n);
      }
    return {coset_key(a, n), coset_key(b, n)};
  }
  const i64 p = g.e[0].p();
  QuadExt col[4], c1[4], c2[4];
  for (int i = 0; i < 4; ++i) {
    col[i] = g(i, 1).reduce(n);
    c1[i] = g(i, 0).reduce(1);
    c2[i] = g(i, 1).reduce(1);
  }
  int lead = -1;
  for (int i = 0; i < 4 && lead < 0; ++i)
    if (col[i].is_unit()) lead = i;
  if (lead < 0) throw std::domain_error("ext_coset_key: column 2 is not primitive");
  QuadExt s = col[lead].inv();
  ExtKey k;
  const auto pn = static_cast<std::uint64_t>(ipow(p, n));
  for (int i = 0; i < 4; ++i) k.line = pack(k.line, col[i] * s, pn);
  QuadExt minors[6];
  int t = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) minors[t++] = c1[i] * c2[j] - c1[j] * c2[i];
  int first = -1;
  for (int i = 0; i < 6 && first < 0; ++i)
    if (minors[i].is_unit()) first = i;
  if (first < 0) throw std::domain_error("ext_coset_key: columns 1,2 do not span a free summand mod P");
  QuadExt si = minors[first].inv();
  for (int i = 0; i < 6; ++i) k.plane = pack(k.plane, minors[i] * si, static_cast<std::uint64_t>(p));
  return k;
}

std::vector<GMatE> parabolic_generators(const LocalConfig& cfg) {
  const i64 pk = cfg.modulus();
  std::vector<QuadExt> all, units;
  std::vector<Residue> base, base_units;
  for (i64 s = 0; s < pk; ++s) {
    Residue rs(s, cfg.p, cfg.k);
    base.push_back(rs);
    if (rs.is_unit()) base_units.push_back(rs);
    for (i64 t = 0; t < pk; ++t) {
      QuadExt x(cfg.type, cfg.d, rs, Residue(t, cfg.p, cfg.k));
      all.push_back(x);
      if (x.is_unit()) units.push_back(x);
    }
  }
  QuadExt zero = QuadExt::from_int(0, cfg), one = QuadExt::from_int(1, cfg);
  auto B = [&](const Residue& r) { return QuadExt::from_base(r, cfg); };
  std::vector<GMatE> gens;
  for (const QuadExt& z : units) gens.push_back(levi_matrix(z, one, zero, zero, one, one));
  for (const QuadExt& xi : units)
    for (const Residue& lam : base_units)
      gens.push_back(levi_matrix(one, xi, zero, zero, B(lam) * xi.conj().inv(), B(lam)));
  for (const QuadExt& xi : units) {
    QuadExt mu = xi * xi.conj();
    gens.push_back(levi_matrix(one, xi, zero, zero, xi, mu));
  }
  for (const Residue& t : base) {
    gens.push_back(levi_matrix(one, one, B(t), zero, one, one));
    gens.push_back(levi_matrix(one, one, zero, B(t), one, one));
  }
  for (const QuadExt& t : all) {
    GMatE a = ext_identity(cfg), b = ext_identity(cfg);
    a(0, 1) = t;
    a(3, 2) = -t.conj();
    b(0, 3) = t;
    b(1, 2) = t.conj();
    gens.push_back(a);
    gens.push_back(b);
  }
  for (const Residue& s : base) {
    GMatE c = ext_identity(cfg);
    c(0, 2) = B(s);
    gens.push_back(c);
  }
  for (const GMatE& g : gens) {
    MultiplierResult r = multiplier(g);
    if (!r.ok || !r.mu->is_unit()) throw std::logic_error("parabolic generator is not a unitary similitude");
    if (!member(g, Subgroup::P_cap_K, 0).ok) throw std::logic_error("parabolic generator leaves P");
  }
  return gens;
}

SupportOrbit SupportOrbit::build(const LocalConfig& cfg, int n, std::size_t max_states) {
  if (cfg.k < n) throw PrecisionError("support orbit needs precision >= n");
  SupportOrbit o;
  o.n_ = n;
  std::vector<GMatE> gens = parabolic_generators(cfg);
  o.gens_ = gens.size();
  std::deque<GMatE> queue;
  GMatE id = ext_identity(cfg);
  o.keys_.insert(ext_coset_key(id, n));
  queue.push_back(id);
  while (!queue.empty()) {
    GMatE g = std::move(queue.front());
    queue.pop_front();
    for (const GMatE& x : gens) {
      GMatE h = x * g;
      if (o.keys_.insert(ext_coset_key(h, n)).second) {
        if (o.keys_.size() > max_states) throw BudgetError("support orbit exceeds the state budget");
        queue.push_back(std::move(h));
      }
    }
  }
  return o;
}

GMatE eta_times_prelim(const LocalConfig& cfg, int m, const PrelimRep& r) {
  return eta_m_matrix(cfg, m) * to_ext(prelim_matrix(cfg, r), cfg);
}

bool support_exhaustive(const SupportOrbit& orbit, const LocalConfig& cfg, int m, const PrelimRep& r) {
  return orbit.contains(eta_times_prelim(cfg, m, r));
}

bool support_by_first_column(const GMatE& h, int n) {
  GMatE hi = inverse_similitude(h);
  return hi(0, 0).is_unit() && hi(2, 0).in_ideal(1) && hi(3, 0).in_ideal(n);
}

}  // namespace lzeta
