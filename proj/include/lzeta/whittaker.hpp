#pragma once
// Exact model of a conductor-p^2 ramified principal series newform, and assembly of the local zeta integral.

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "lzeta/ring.hpp"
#include "lzeta/volume.hpp"

namespace lzeta::wz {

// ---------------------------------------------------------------- Q(zeta_M)

/// Element of Q(zeta_M) in the power basis 1, zeta, ..., zeta^{phi(M)-1}.
class CyclotomicNum {
 public:
  CyclotomicNum() = default;  // zero in Q
  static CyclotomicNum rational(const mpq_class& v);
  /// zeta_M^k
  static CyclotomicNum root(long M, long k);
  /// sum_k c[k] zeta_M^k for a coefficient vector of any length
  static CyclotomicNum from_terms(long M, const std::vector<mpq_class>& c);

  long order() const { return M_; }
  const std::vector<mpq_class>& coeffs() const { return c_; }
  CyclotomicNum lift(long M2) const;

  CyclotomicNum operator+(const CyclotomicNum& o) const;
  CyclotomicNum operator-(const CyclotomicNum& o) const;
  CyclotomicNum operator-() const;
  CyclotomicNum operator*(const CyclotomicNum& o) const;
  CyclotomicNum operator*(const mpq_class& s) const;
  bool operator==(const CyclotomicNum& o) const { return (*this - o).is_zero(); }

  /// zeta -> zeta^{-1} (complex conjugation)
  CyclotomicNum conj() const;
  bool is_zero() const;
  bool is_rational() const;
  mpq_class rational_value() const;  // requires is_rational()
  std::string str() const;

 private:
  long M_ = 1;
  std::vector<mpq_class> c_{mpq_class(0)};
};

/// Integer coefficients of the M-th cyclotomic polynomial, constant term first.
const std::vector<mpz_class>& cyclotomic_polynomial(long M);
long euler_phi(long M);

// ---------------------------------------------------------------- values in Q(zeta)[a1^±, a2^±]

/// a1 = chi1(pi) q^{-1/2}, a2 = chi2(pi) q^{1/2}; omega_tau(pi) = a1 a2.
struct WValue {
  std::map<std::pair<int, int>, CyclotomicNum> terms;

  static WValue monomial(int e1, int e2, const CyclotomicNum& c);
  WValue operator+(const WValue& o) const;
  WValue operator-(const WValue& o) const;
  WValue operator*(const WValue& o) const;
  bool is_zero() const;
  bool operator==(const WValue& o) const { return (*this - o).is_zero(); }
  /// Inverse of a single monomial whose coefficient y has y * conj(y) rational.
  WValue inverse() const;
  /// A rational constant (no a1, a2 dependence and no irrational part)?
  bool is_rational() const;
  mpq_class rational_value() const;
  std::string str() const;
};

// ---------------------------------------------------------------- GL2 arguments

struct GL2 {
  mpq_class a = 1, b = 0, c = 0, d = 1;
  GL2 operator*(const GL2& o) const;
};

GL2 gl2_diag(long p, int l);  // diag(pi^l, 1)
GL2 gl2_lower(const mpq_class& x);  // [[1,0],[x,1]]
GL2 gl2_upper(const mpq_class& x);  // [[1,x],[0,1]]
GL2 gl2_antidiag(long p, int l);  // [[0, pi^l], [-1, 0]]
GL2 gl2_atkin_lehner(long p, int n);  // [[0, 1], [pi^n, 0]]
mpq_class ppow(long p, int e);

// ---------------------------------------------------------------- the newform model

struct NewformParams {
  long q = 3;
  int chi_index = 1;  // chi1 on (o/p)^x: g^k -> zeta_{q-1}^{chi_index k}, g the least primitive root
  long c = 1;  // Whittaker character psi^{-c}(x) = psi(-c x)
};

/// tau = chi1 x chi2 with chi1 of conductor p and chi1 chi2 unramified, so tau has conductor p^2.
/// The newform is the Whittaker integral of the section supported on B [[1,0],[pi,1]] Gamma0(p^2).
class NewformModel {
 public:
  static std::shared_ptr<NewformModel> build(const NewformParams& params);

  const NewformParams& params() const { return params_; }
  long q() const { return params_.q; }
  int n() const { return 2; }

  /// The Whittaker integral W_f(g) = int_F f(w n(x) g) psi^{-c}(-x) dx, exact.
  WValue raw(const GL2& g) const;
  /// Normalized newform W^(0)(g) = raw(g) / raw(1).
  WValue value(const GL2& g) const;
  /// Number of p-adic balls visited by the last evaluations (diagnostic).
  std::uint64_t balls_visited() const { return balls_; }

  /// chi1 restricted to units, as an exponent of zeta_{q-1}.
  long theta_exponent(long unit) const;

 private:
  NewformParams params_;
  long root_ = 2;
  std::vector<long> dlog_;  // discrete log mod p
  WValue one_inv_;
  mutable std::mutex mu_;
  mutable std::map<std::string, WValue> cache_;
  mutable std::uint64_t balls_ = 0;
};

// ---------------------------------------------------------------- model checks

struct CheckReport {
  int checks = 0;
  int passed = 0;
  std::vector<std::string> failures;
  bool ok() const { return checks > 0 && passed == checks; }
  void record(bool good, const std::string& what);
};

/// W(1) = 1, Kirillov support on diag(a,1), right K^(1)(p^2)-invariance on generators and sampled elements.
CheckReport verify_newform_model(const NewformModel& model, int samples, std::uint64_t seed);
/// For m >= 1 and each g in {diag(pi^l,1) k}: sum over z in p^t/p^{n-1} of W^(0)(g lower(pi z)) = 0.
CheckReport verify_lemma_6_1_i(const NewformModel& model, int m, int samples, std::uint64_t seed);
/// W'(g) = W^(0)(g [[0,1],[pi^n,0]]) is K^(1)(p^n)-invariant and W^(0) = c W' with c^{-2} = omega_tau(pi)^n.
CheckReport verify_atkin_lehner(const NewformModel& model, int samples, std::uint64_t seed);
/// Sampled elements of K^(1)(p^n) = GL2(o) with lower-left entry in p^n.
std::vector<GL2> sample_k1(long p, int n, int count, std::uint64_t seed);

// ---------------------------------------------------------------- zeta assembly

/// Monomial B_{bl,bm} Q_s^qs X^x Y^y with Q_s = q^{-3(s+1/2)}, X = omega_pi(pi)^{-1}, Y = omega_tau(pi)^{-1}.
struct ZKey {
  int bl = 0, bm = 0, qs = 0, x = 0, y = 0;
  auto operator<=>(const ZKey&) const = default;
};
using ZetaValue = std::map<ZKey, mpq_class>;
std::string to_string(const ZetaValue& z);

struct WArg {
  enum Kind { DiagLower, Antidiag } kind = DiagLower;
  int l = 0;
  mpq_class z = 0;  // DiagLower: diag(pi^l,1) [[1,0],[z,1]]; Antidiag: [[0,pi^l],[-1,0]]
  GL2 matrix(long p) const;
};

/// C_{l,m} times the W^(0)-argument of W^#(eta h(l,m) rep); refuses representatives outside the support.
struct WSharpFactor {
  ZKey key;
  WArg slot;
};
WSharpFactor w_sharp_factor(long p, int n, int l, int m, DoubleCosetRep rep, const mpq_class& z = 0);

enum class TermKind { Kirillov, LemmaSum, LemmaPoint, AtkinLehner };
const char* to_string(TermKind k);

struct ZetaTerm {
  int l = 0, m = 0, j = -1;
  TermKind kind = TermKind::Kirillov;
  ZKey key;
  std::vector<WArg> args;  // the W^(0) values summed in this term
  mpq_class volume;
};

/// All terms of the zeta integral with l <= lmax, m <= mmax.
std::vector<ZetaTerm> zeta_terms(long q, int legendre, int n, int lmax, int mmax);

enum class ZetaMode { model, abstract };
struct ZetaAssembly {
  ZetaValue value;
  std::vector<std::string> notes;  // per-term evaluation record
};
/// Abstract mode uses the Kirillov support, both parts of the vanishing lemma and the Atkin-Lehner relation;
/// model mode evaluates every W^(0) value with the model (n = 2).
ZetaAssembly assemble_zeta(long q, int legendre, int n, ZetaMode mode, const NewformModel* model, int lmax,
                           int mmax);
/// (q-1)/(q^{3(n-1)}(q+1)(q^4-1)) (1 - legendre/q) q^n
mpq_class zeta_formula(long q, int legendre, int n);

}  // namespace lzeta::wz
