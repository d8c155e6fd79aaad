#pragma once
// Truncated local rings o/p^k and their quadratic extensions o_L/P^k.

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lzeta {

using i64 = std::int64_t;

enum class SplitType { inert, ramified, split };

const char* to_string(SplitType t);
SplitType split_type_from_string(const std::string& s);

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PrecisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Integer helpers used everywhere else.
i64 ipow(i64 base, int e);
i64 mod_norm(i64 x, i64 m);
i64 mul_mod(i64 a, i64 b, i64 m);
i64 inv_mod(i64 a, i64 m);  // throws if not invertible
int val_p(i64 x, i64 p, int cap);  // valuation of x, capped at cap (x==0 gives cap)
bool is_prime(i64 p);
i64 smallest_nonresidue(i64 p);
i64 sqrt_mod_pk(i64 d, i64 p, int k);  // d a unit square mod p

struct LocalConfig {
  i64 p = 3;
  int k = 4;
  SplitType type = SplitType::inert;
  i64 a = 0, b = 0, c = 1, d = 0;

  i64 modulus() const { return ipow(p, k); }
};

/// b=0, c=1 with d chosen per split type and a = -d/4 reduced into o.
LocalConfig default_config(i64 p, int k, SplitType t);
/// Throws ConfigError on p=2, non-prime p, c non-unit, or a case tag that disagrees with d.
void validate(const LocalConfig& cfg);
int legendre_symbol(const LocalConfig& cfg);

struct Valuation {
  int value;
  bool capped;  // exact zero at this precision: reads ">= value"
  std::string str() const;
};

class Residue {
 public:
  Residue() = default;
  Residue(i64 value, i64 p, int k);

  static Residue from_config(i64 value, const LocalConfig& cfg) { return {value, cfg.p, cfg.k}; }

  i64 value() const { return v_; }
  i64 p() const { return p_; }
  int precision() const { return k_; }
  i64 modulus() const { return m_; }

  Residue operator+(const Residue& o) const;
  Residue operator-(const Residue& o) const;
  Residue operator-() const;
  Residue operator*(const Residue& o) const;
  Residue& operator+=(const Residue& o) { return *this = *this + o; }
  Residue& operator-=(const Residue& o) { return *this = *this - o; }
  Residue& operator*=(const Residue& o) { return *this = *this * o; }
  bool operator==(const Residue& o) const { return v_ == o.v_ && p_ == o.p_ && k_ == o.k_; }

  bool is_zero() const { return v_ == 0; }
  bool is_unit() const { return v_ % p_ != 0; }
  Residue inv() const;
  Valuation valuation() const;
  bool in_ideal(int n) const { return n <= 0 || valuation().value >= n; }
  Residue reduce(int k2) const;
  Residue scalar(i64 v) const { return {v, p_, k_}; }

 private:
  void check(const Residue& o) const;
  i64 v_ = 0, p_ = 3, m_ = 1;
  int k_ = 0;
};

/// Element of o_L/P^k. Inert and ramified: s + t*sqrt(d). Split: the pair (s, t) in o+o.
class QuadExt {
 public:
  QuadExt() = default;
  QuadExt(SplitType type, i64 d, Residue s, Residue t);

  static QuadExt from_base(const Residue& x, const LocalConfig& cfg);
  static QuadExt from_int(i64 x, const LocalConfig& cfg);
  static QuadExt zero_like(const QuadExt& x);
  static QuadExt one_like(const QuadExt& x);

  SplitType type() const { return type_; }
  i64 d() const { return d_; }
  const Residue& s() const { return s_; }
  const Residue& t() const { return t_; }
  int precision() const { return s_.precision(); }
  i64 p() const { return s_.p(); }

  QuadExt operator+(const QuadExt& o) const;
  QuadExt operator-(const QuadExt& o) const;
  QuadExt operator-() const;
  QuadExt operator*(const QuadExt& o) const;
  QuadExt operator*(const Residue& r) const;
  QuadExt& operator+=(const QuadExt& o) { return *this = *this + o; }
  QuadExt& operator-=(const QuadExt& o) { return *this = *this - o; }
  QuadExt& operator*=(const QuadExt& o) { return *this = *this * o; }
  bool operator==(const QuadExt& o) const;

  QuadExt conj() const;
  Residue norm() const;
  Residue trace() const;
  bool is_zero() const { return s_.is_zero() && t_.is_zero(); }
  bool is_unit() const { return norm().is_unit(); }
  QuadExt inv() const;  // throws with the valuation of the norm on failure
  /// Largest n with x in P^n (capped at precision).
  Valuation valuation() const;
  bool in_ideal(int n) const { return n <= 0 || valuation().value >= n; }
  bool in_base() const;  // fixed by conj
  Residue base_part() const;  // requires in_base()
  QuadExt reduce(int k2) const;

 private:
  void check(const QuadExt& o) const;
  SplitType type_ = SplitType::inert;
  i64 d_ = 0;
  Residue s_, t_;
};

/// alpha = (b + sqrt d)/(2c); in the split case the pair ((b+r)/2c, (b-r)/2c) with r^2 = d.
QuadExt make_alpha(const LocalConfig& cfg);

}  // namespace lzeta
