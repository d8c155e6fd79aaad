#include "lzeta/ring.hpp"

#include <sstream>

namespace lzeta {

const char* to_string(SplitType t) {
  switch (t) {
    case SplitType::inert: return "inert";
    case SplitType::ramified: return "ramified";
    case SplitType::split: return "split";
  }
  return "?";
}

SplitType split_type_from_string(const std::string& s) {
  if (s == "inert") return SplitType::inert;
  if (s == "ramified") return SplitType::ramified;
  if (s == "split") return SplitType::split;
  throw ConfigError("unknown split type '" + s + "' (expected inert, ramified or split)");
}

i64 ipow(i64 base, int e) {
  i64 r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

i64 mod_norm(i64 x, i64 m) {
  i64 r = x % m;
  return r < 0 ? r + m : r;
}

i64 mul_mod(i64 a, i64 b, i64 m) {
  return static_cast<i64>((static_cast<__int128>(a) * b) % m + m) % m;
}

i64 inv_mod(i64 a, i64 m) {
  i64 g = m, x = 0, x1 = 1, a1 = mod_norm(a, m);
  while (a1 != 0) {
    i64 q = g / a1;
    i64 t = g - q * a1;
    g = a1;
    a1 = t;
    t = x - q * x1;
    x = x1;
    x1 = t;
  }
  if (g != 1) throw std::domain_error("inv_mod: element not invertible");
  return mod_norm(x, m);
}

int val_p(i64 x, i64 p, int cap) {
  if (x == 0) return cap;
  int v = 0;
  while (x % p == 0 && v < cap) {
    x /= p;
    ++v;
  }
  return v;
}

bool is_prime(i64 p) {
  if (p < 2) return false;
  for (i64 d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

static i64 pow_mod(i64 b, i64 e, i64 m) {
  i64 r = 1 % m;
  b = mod_norm(b, m);
  while (e > 0) {
    if (e & 1) r = mul_mod(r, b, m);
    b = mul_mod(b, b, m);
    e >>= 1;
  }
  return r;
}

i64 smallest_nonresidue(i64 p) {
  for (i64 x = 2; x < p; ++x)
    if (pow_mod(x, (p - 1) / 2, p) == p - 1) return x;
  throw ConfigError("no quadratic non-residue mod " + std::to_string(p));
}

i64 sqrt_mod_pk(i64 d, i64 p, int k) {
  i64 r = -1;
  for (i64 x = 1; x < p; ++x)
    if (mod_norm(x * x - d, p) == 0) {
      r = x;
      break;
    }
  if (r < 0) throw ConfigError("d is not a unit square mod p");
  i64 m = p;
  for (int j = 1; j < k; ++j) {
    m *= p;
    // Newton step r <- r - (r^2 - d)/(2r)
    i64 f = mod_norm(mul_mod(r, r, m) - d, m);
    r = mod_norm(r - mul_mod(f, inv_mod(2 * r, m), m), m);
  }
  return mod_norm(r, ipow(p, k));
}

LocalConfig default_config(i64 p, int k, SplitType t) {
  if (p == 2) throw ConfigError("residue characteristic 2 is not supported: p must be an odd prime");
  LocalConfig cfg;
  cfg.p = p;
  cfg.k = k;
  cfg.type = t;
  cfg.b = 0;
  cfg.c = 1;
  switch (t) {
    case SplitType::inert: cfg.d = smallest_nonresidue(p); break;
    case SplitType::ramified: cfg.d = p; break;
    case SplitType::split: cfg.d = 1; break;
  }
  i64 m = cfg.modulus();
  cfg.a = mod_norm(-mul_mod(cfg.d, inv_mod(4, m), m), m);
  return cfg;
}

void validate(const LocalConfig& cfg) {
  if (cfg.p == 2) throw ConfigError("residue characteristic 2 is not supported: p must be an odd prime");
  if (!is_prime(cfg.p)) throw ConfigError("p must be an odd prime, got " + std::to_string(cfg.p));
  if (cfg.k < 1) throw ConfigError("precision k must be positive");
  if (ipow(cfg.p, cfg.k) > (i64(1) << 40)) throw ConfigError("p^k too large for this engine");
  i64 m = cfg.modulus();
  if (mod_norm(cfg.c, cfg.p) == 0) throw ConfigError("c must be a unit");
  i64 disc = mod_norm(cfg.b * cfg.b - 4 * cfg.a * cfg.c, m);
  if (disc != mod_norm(cfg.d, m)) throw ConfigError("d must equal b^2-4ac mod p^k");
  int v = val_p(mod_norm(cfg.d, m), cfg.p, cfg.k);
  bool residue = v == 0 && pow_mod(cfg.d, (cfg.p - 1) / 2, cfg.p) == 1;
  switch (cfg.type) {
    case SplitType::inert:
      if (v != 0 || residue) throw ConfigError("inert case needs d a unit non-residue");
      break;
    case SplitType::ramified:
      if (v != 1) throw ConfigError("ramified case needs valuation of d equal to 1");
      break;
    case SplitType::split:
      if (!residue) throw ConfigError("split case needs d a unit square");
      break;
  }
}

int legendre_symbol(const LocalConfig& cfg) {
  validate(cfg);
  switch (cfg.type) {
    case SplitType::inert: return -1;
    case SplitType::ramified: return 0;
    case SplitType::split: return 1;
  }
  return 0;
}

std::string Valuation::str() const {
  return capped ? ">=" + std::to_string(value) : std::to_string(value);
}

// ---------------------------------------------------------------- Residue

Residue::Residue(i64 value, i64 p, int k) : p_(p), m_(ipow(p, k)), k_(k) { v_ = mod_norm(value, m_); }

void Residue::check(const Residue& o) const {
  if (p_ != o.p_ || k_ != o.k_)
    throw PrecisionError("residue precision mismatch: " + std::to_string(k_) + " vs " + std::to_string(o.k_));
}

Residue Residue::operator+(const Residue& o) const {
  check(o);
  Residue r = *this;
  r.v_ = v_ + o.v_;
  if (r.v_ >= m_) r.v_ -= m_;
  return r;
}

Residue Residue::operator-(const Residue& o) const {
  check(o);
  Residue r = *this;
  r.v_ = v_ - o.v_;
  if (r.v_ < 0) r.v_ += m_;
  return r;
}

Residue Residue::operator-() const {
  Residue r = *this;
  r.v_ = v_ == 0 ? 0 : m_ - v_;
  return r;
}

Residue Residue::operator*(const Residue& o) const {
  check(o);
  Residue r = *this;
  r.v_ = mul_mod(v_, o.v_, m_);
  return r;
}

Residue Residue::inv() const {
  if (!is_unit()) throw std::domain_error("inverse of a non-unit residue (valuation " + valuation().str() + ")");
  Residue r = *this;
  r.v_ = inv_mod(v_, m_);
  return r;
}

Valuation Residue::valuation() const {
  if (v_ == 0) return {k_, true};
  return {val_p(v_, p_, k_), false};
}

Residue Residue::reduce(int k2) const {
  if (k2 > k_) throw PrecisionError("cannot raise precision from " + std::to_string(k_) + " to " + std::to_string(k2));
  return {v_, p_, k2};
}

// ---------------------------------------------------------------- QuadExt

QuadExt::QuadExt(SplitType type, i64 d, Residue s, Residue t) : type_(type), s_(s), t_(t) {
  d_ = mod_norm(d, s_.modulus());
}

QuadExt QuadExt::from_base(const Residue& x, const LocalConfig& cfg) {
  if (cfg.type == SplitType::split) return {cfg.type, cfg.d, x, x};
  return {cfg.type, cfg.d, x, x.scalar(0)};
}

QuadExt QuadExt::from_int(i64 x, const LocalConfig& cfg) { return from_base(Residue(x, cfg.p, cfg.k), cfg); }

QuadExt QuadExt::zero_like(const QuadExt& x) { return {x.type_, x.d_, x.s_.scalar(0), x.s_.scalar(0)}; }

QuadExt QuadExt::one_like(const QuadExt& x) {
  if (x.type_ == SplitType::split) return {x.type_, x.d_, x.s_.scalar(1), x.s_.scalar(1)};
  return {x.type_, x.d_, x.s_.scalar(1), x.s_.scalar(0)};
}

void QuadExt::check(const QuadExt& o) const {
  if (type_ != o.type_ || d_ != o.d_) throw std::invalid_argument("quadratic extension elements from different rings");
}

QuadExt QuadExt::operator+(const QuadExt& o) const {
  check(o);
  return {type_, d_, s_ + o.s_, t_ + o.t_};
}

QuadExt QuadExt::operator-(const QuadExt& o) const {
  check(o);
  return {type_, d_, s_ - o.s_, t_ - o.t_};
}

QuadExt QuadExt::operator-() const { return {type_, d_, -s_, -t_}; }

QuadExt QuadExt::operator*(const QuadExt& o) const {
  check(o);
  if (type_ == SplitType::split) return {type_, d_, s_ * o.s_, t_ * o.t_};
  Residue dd = s_.scalar(d_);
  return {type_, d_, s_ * o.s_ + dd * t_ * o.t_, s_ * o.t_ + t_ * o.s_};
}

QuadExt QuadExt::operator*(const Residue& r) const { return {type_, d_, s_ * r, t_ * r}; }

bool QuadExt::operator==(const QuadExt& o) const { return type_ == o.type_ && d_ == o.d_ && s_ == o.s_ && t_ == o.t_; }

QuadExt QuadExt::conj() const {
  if (type_ == SplitType::split) return {type_, d_, t_, s_};
  return {type_, d_, s_, -t_};
}

Residue QuadExt::norm() const {
  if (type_ == SplitType::split) return s_ * t_;
  return s_ * s_ - s_.scalar(d_) * t_ * t_;
}

Residue QuadExt::trace() const {
  if (type_ == SplitType::split) return s_ + t_;
  return s_ + s_;
}

QuadExt QuadExt::inv() const {
  Residue n = norm();
  if (!n.is_unit()) throw std::domain_error("inverse of a non-unit in o_L (norm valuation " + n.valuation().str() + ")");
  Residue ni = n.inv();
  if (type_ == SplitType::split) return {type_, d_, s_.inv(), t_.inv()};
  return conj() * ni;
}

Valuation QuadExt::valuation() const {
  Valuation a = s_.valuation(), b = t_.valuation();
  if (a.value < b.value) return a;
  if (b.value < a.value) return b;
  return {a.value, a.capped && b.capped};
}

bool QuadExt::in_base() const { return conj() == *this; }

Residue QuadExt::base_part() const {
  if (!in_base()) throw std::domain_error("element is not in the base ring");
  return s_;
}

QuadExt QuadExt::reduce(int k2) const { return {type_, d_, s_.reduce(k2), t_.reduce(k2)}; }

QuadExt make_alpha(const LocalConfig& cfg) {
  if (cfg.p == 2) throw ConfigError("residue characteristic 2 is not supported: alpha needs 1/2");
  i64 m = cfg.modulus();
  i64 inv2c = inv_mod(mod_norm(2 * cfg.c, m), m);
  Residue b(cfg.b, cfg.p, cfg.k), h(inv2c, cfg.p, cfg.k);
  if (cfg.type == SplitType::split) {
    Residue r(sqrt_mod_pk(mod_norm(cfg.d, m), cfg.p, cfg.k), cfg.p, cfg.k);
    return {cfg.type, cfg.d, (b + r) * h, (b - r) * h};
  }
  return {cfg.type, cfg.d, b * h, h};
}

}  // namespace lzeta
