#pragma once
// Exact verification of matrix identities over Q[symbols][alpha]/(c alpha^2 - b alpha + a), with only unit
// denominators, plus exact-arithmetic sampling of the non-support cases.

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "lzeta/group.hpp"

namespace lzeta::sym {

constexpr int kMaxVars = 16;

struct Mono {
  std::uint8_t alpha = 0;  // compared first
  std::array<std::int8_t, kMaxVars> e{};
  auto operator<=>(const Mono&) const = default;
};

using Poly = std::map<Mono, mpq_class>;

/// numerator / product of unit atoms
struct Expr {
  Poly num;
  std::map<int, int> den;  // atom id -> positive exponent
};

using SymMat = std::array<Expr, 16>;

struct SymbolicError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Variables pi, a, b, c are predefined; c and pi may carry negative exponents, as may declared unit symbols.
class Context {
 public:
  static constexpr int kPi = 0, kA = 1, kB = 2, kC = 3;

  Context();

  int var(const std::string& name);
  int find_var(const std::string& name) const;
  const std::string& var_name(int v) const { return vars_[v]; }
  int var_count() const { return static_cast<int>(vars_.size()); }
  void declare_unit(int v);
  bool is_unit_var(int v) const;

  int add_atom(const std::string& name, const Expr& def);
  int find_atom(const std::string& name) const;
  int conj_atom(int id);
  int atom_count() const { return static_cast<int>(atoms_.size()); }
  const std::string& atom_name(int id) const { return atoms_[id].name; }
  const Poly& atom_def(int id) const { return atoms_[id].def; }

  // polynomial layer
  Poly pmul(const Poly& x, const Poly& y) const;
  Poly padd(const Poly& x, const Poly& y) const;
  Poly pscale(const Poly& x, const mpq_class& s) const;
  Poly pconj(const Poly& x) const;
  Poly ppow_atom(int id, int k) const;

  // expression layer
  Expr constant(const mpq_class& v) const;
  Expr variable(int v) const;
  Expr alpha() const;
  Expr atom(int id) const;
  Expr add(const Expr& x, const Expr& y) const;
  Expr sub(const Expr& x, const Expr& y) const;
  Expr neg(const Expr& x) const;
  Expr mul(const Expr& x, const Expr& y) const;
  Expr inv(const Expr& x);  // throws SymbolicError on a non-unit denominator
  Expr div(const Expr& x, const Expr& y) { return mul(x, inv(y)); }
  Expr pow(const Expr& x, int k);
  Expr conj(const Expr& x);
  bool is_zero(const Expr& x) const { return x.num.empty(); }
  bool equal(const Expr& x, const Expr& y) const { return is_zero(sub(x, y)); }

  /// Smallest pi-exponent over the numerator (every other symbol integral, atoms units); INT_MAX for zero.
  int pi_valuation(const Expr& x) const;
  /// Numerator mod pi is a unit monomial, or a unit monomial times one or two atom definitions mod pi.
  bool is_unit(const Expr& x) const;
  bool alpha_free(const Expr& x) const;

  std::string str(const Poly& p) const;
  std::string str(const Expr& x) const;

  SymMat matmul(const SymMat& x, const SymMat& y) const;
  SymMat identity() const;
  SymMat conj(const SymMat& x);

 private:
  struct Atom {
    std::string name;
    Poly def;
    int conj_id = -1;
  };
  bool single_unit_term(const Poly& p) const;
  bool divides_as_unit(const Poly& target, const Poly& factor) const;
  std::vector<std::string> vars_;
  std::vector<bool> unit_;
  std::vector<Atom> atoms_;
};

// ---------------------------------------------------------------- manifest

struct IdentitySpec {
  std::string id;
  std::string title;
  bool unitary = true;
  bool uses_j = false;
  std::string where;
  std::vector<std::string> units;
  std::vector<std::string> statements;  // atom / let / mat / lhs / rhs / residual / scalar, in order
};

std::vector<IdentitySpec> load_manifest(const std::string& path);
std::vector<IdentitySpec> parse_manifest(const std::string& text);
std::string default_manifest_path();

struct GridPoint {
  int n = 1, l = 0, m = 0, j = 0;
};

/// Grid n in 1..4, l, m in 0..3 (and j in 0..3 when used), filtered by the identity's constraint.
std::vector<GridPoint> admissible_grid(const IdentitySpec& spec);

struct InstanceReport {
  GridPoint at;
  bool ok = false;
  bool identity_holds = false, pattern_ok = true, multiplier_ok = false, scalars_ok = true;
  std::vector<std::string> failures;
};

InstanceReport verify_instance(const IdentitySpec& spec, const GridPoint& at);

struct NumericReport {
  int samples = 0;
  int passed = 0;
  int resampled = 0;  // draws rejected because an atom was not a unit
  std::vector<std::string> failures;
  bool ok() const { return samples > 0 && passed == samples; }
};

/// Random configurations (p in {3,5}, all split types, random b and c) and random symbol values.
NumericReport verify_numeric(const IdentitySpec& spec, int samples, std::uint64_t seed);

struct IdentityReport {
  std::string id;
  std::vector<InstanceReport> instances;
  NumericReport numeric;
  bool ok() const;
};

IdentityReport verify_identity(const IdentitySpec& spec, int numeric_samples = 200, std::uint64_t seed = 1);

// ---------------------------------------------------------------- exact numbers in Q(sqrt d) or Q + Q

class QQuad {
 public:
  QQuad() = default;
  QQuad(SplitType type, mpz_class d, mpq_class s, mpq_class t);
  static QQuad from_rational(SplitType type, const mpz_class& d, const mpq_class& v);

  QQuad operator+(const QQuad& o) const;
  QQuad operator-(const QQuad& o) const;
  QQuad operator-() const;
  QQuad operator*(const QQuad& o) const;
  QQuad& operator+=(const QQuad& o) { return *this = *this + o; }
  bool operator==(const QQuad& o) const { return s_ == o.s_ && t_ == o.t_; }
  QQuad conj() const;
  mpq_class norm() const;
  QQuad inv() const;
  bool is_zero() const { return s_ == 0 && t_ == 0; }
  /// largest e with x in P^e (p o_L-adic); INT_MAX for zero
  int valuation(long p) const;
  bool is_unit(long p) const;
  bool in_ideal(long p, int e) const { return valuation(p) >= e; }
  const mpq_class& s() const { return s_; }
  const mpq_class& t() const { return t_; }
  SplitType type() const { return type_; }
  const mpz_class& d() const { return d_; }

 private:
  SplitType type_ = SplitType::inert;
  mpz_class d_ = 1;
  mpq_class s_, t_;
};

inline QQuad conj_of(const QQuad& x) { return x.conj(); }

using QMat = Mat4<QQuad>;

int rational_valuation(const mpq_class& x, long p);  // INT_MAX for zero

struct ObstructionReport {
  int case_id = 0;
  int samples = 0;  // including skipped draws
  int invariant_held = 0;
  int literal_held = 0;  // the entry condition read without normalizing row 3
  int pattern_violated = 0;
  int skipped = 0;  // case 3: (3,1)-entry zero
  bool support_fast_false = true;
  std::vector<std::string> failures;
  bool ok() const {
    return samples > skipped && invariant_held == samples - skipped && pattern_violated == samples && support_fast_false;
  }
};

/// Samples n~^{-1} m~^{-1} eta_m r over random m~ in M(F), n~ in N(F) (entries with valuations in [-2,2]).
/// Row 3 of the product is a scalar multiple of row 3 of eta_m r, so the invariants are ratios within it:
/// case 3 (3,3)/(3,1) in o_L, case 4 (3,3)/(3,4) in P, case 5 (3,3)/(3,2) in o_L, cases 7 and 8 (3,3) = 0.
/// literal_held counts (3,3)/(3,1) in o_L, (3,3) in P, (4,1) a unit and (3,3) = 0 respectively.
ObstructionReport obstruction_check(int case_id, long q, int n, int m, SplitType type, int samples,
                                    std::uint64_t seed);

}  // namespace lzeta::sym
