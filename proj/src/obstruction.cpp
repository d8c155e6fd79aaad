#include <climits>
#include <sstream>

#include "lzeta/cosets.hpp"
#include "lzeta/symbolic.hpp"

namespace lzeta::sym {

int rational_valuation(const mpq_class& x, long p) {
  if (x == 0) return INT_MAX;
  auto count = [p](mpz_class v) {
    int e = 0;
    while (mpz_divisible_ui_p(v.get_mpz_t(), static_cast<unsigned long>(p))) {
      v /= p;
      ++e;
    }
    return e;
  };
  return count(x.get_num()) - count(x.get_den());
}

// ---------------------------------------------------------------- QQuad

QQuad::QQuad(SplitType type, mpz_class d, mpq_class s, mpq_class t)
    : type_(type), d_(std::move(d)), s_(std::move(s)), t_(std::move(t)) {
  s_.canonicalize();
  t_.canonicalize();
}

QQuad QQuad::from_rational(SplitType type, const mpz_class& d, const mpq_class& v) {
  return type == SplitType::split ? QQuad(type, d, v, v) : QQuad(type, d, v, 0);
}

QQuad QQuad::operator+(const QQuad& o) const { return {type_, d_, s_ + o.s_, t_ + o.t_}; }
QQuad QQuad::operator-(const QQuad& o) const { return {type_, d_, s_ - o.s_, t_ - o.t_}; }
QQuad QQuad::operator-() const { return {type_, d_, -s_, -t_}; }

QQuad QQuad::operator*(const QQuad& o) const {
  if (type_ == SplitType::split) return {type_, d_, s_ * o.s_, t_ * o.t_};
  return {type_, d_, s_ * o.s_ + mpq_class(d_) * t_ * o.t_, s_ * o.t_ + t_ * o.s_};
}

QQuad QQuad::conj() const {
  if (type_ == SplitType::split) return {type_, d_, t_, s_};
  return {type_, d_, s_, -t_};
}

mpq_class QQuad::norm() const {
  if (type_ == SplitType::split) return s_ * t_;
  return s_ * s_ - mpq_class(d_) * t_ * t_;
}

QQuad QQuad::inv() const {
  mpq_class n = norm();
  if (n == 0) throw SymbolicError("inverse of a zero divisor in L");
  if (type_ == SplitType::split) return {type_, d_, 1 / s_, 1 / t_};
  QQuad c = conj();
  return {type_, d_, c.s_ / n, c.t_ / n};
}

int QQuad::valuation(long p) const {
  int vs = rational_valuation(s_, p), vt = rational_valuation(t_, p);
  if (type_ != SplitType::ramified) return std::min(vs, vt);
  // P^2 = p o_L with uniformizer sqrt(d)
  int vd = rational_valuation(mpq_class(d_), p);
  long a = vs == INT_MAX ? LONG_MAX : 2L * vs;
  long b = vt == INT_MAX ? LONG_MAX : 2L * vt + vd;
  long v = std::min(a, b);
  return v == LONG_MAX ? INT_MAX : static_cast<int>(v);
}

bool QQuad::is_unit(long p) const { return !is_zero() && valuation(p) == 0; }

// ---------------------------------------------------------------- obstruction sampling

namespace {

struct Field {
  SplitType type;
  mpz_class d;
  long p;

  QQuad q(const mpq_class& v) const { return QQuad::from_rational(type, d, v); }
  QQuad make(const mpq_class& s, const mpq_class& t) const { return {type, d, s, t}; }
  QMat identity() const { return QMat::identity(q(0), q(1)); }
};

mpq_class random_rational(std::mt19937_64& rng, long p, int vmin, int vmax) {
  std::uniform_int_distribution<int> ve(vmin, vmax);
  std::uniform_int_distribution<long> ud(1, p * p * p);
  auto unit = [&] {
    long u;
    do u = ud(rng);
    while (u % p == 0);
    return u;
  };
  mpq_class r(unit(), unit());
  if (rng() & 1) r = -r;
  int v = ve(rng);
  mpz_class pp;
  mpz_ui_pow_ui(pp.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(std::abs(v)));
  if (v >= 0)
    r *= pp;
  else
    r /= pp;
  r.canonicalize();
  return r;
}

QQuad random_element(std::mt19937_64& rng, const Field& f) {
  auto part = [&] { return rng() % 5 == 0 ? mpq_class(0) : random_rational(rng, f.p, -2, 2); };
  for (;;) {
    QQuad x = f.make(part(), part());
    if (x.norm() != 0) return x;
  }
}

QQuad alpha_of(const Field& f) {
  // b = 0, c = 1: alpha = sqrt(d)/2; split with d = 1: alpha = (1/2, -1/2)
  if (f.type == SplitType::split) return f.make(mpq_class(1, 2), mpq_class(-1, 2));
  return f.make(0, mpq_class(1, 2));
}

QMat levi(const Field& f, const QQuad& zeta, const QQuad& lam, const std::array<mpq_class, 4>& g) {
  QMat m1 = f.identity();
  m1(0, 0) = zeta;
  m1(2, 2) = zeta.conj().inv();
  QMat m2 = f.identity();
  m2(1, 1) = lam * f.q(g[0]);
  m2(1, 3) = lam * f.q(g[1]);
  m2(3, 1) = lam * f.q(g[2]);
  m2(3, 3) = lam * f.q(g[3]);
  m2(2, 2) = f.q(lam.norm() * (g[0] * g[3] - g[1] * g[2]));
  return m1 * m2;
}

QMat unipotent(const Field& f, const QQuad& t1, const QQuad& t2, const mpq_class& s) {
  QMat a = f.identity(), b = f.identity(), c = f.identity();
  a(0, 1) = t1;
  a(3, 2) = -t1.conj();
  b(0, 3) = t2;
  b(1, 2) = t2.conj();
  c(0, 2) = f.q(s);
  return a * b * c;
}

bool is_similitude(const Field& f, const QMat& g) {
  QMat J = QMat::filled(f.q(0));
  J(0, 2) = f.q(1);
  J(1, 3) = f.q(1);
  J(2, 0) = f.q(-1);
  J(3, 1) = f.q(-1);
  QMat s = g.conj().transpose() * J * g;
  QQuad mu = s(0, 2);
  if (mu.conj() != mu || mu.is_zero()) return false;
  QMat expect = J;
  for (auto& x : expect.e) x = x * mu;
  return s == expect;
}

std::string describe(const QQuad& x, long p) {
  std::ostringstream os;
  os << "(" << x.s().get_str() << ", " << x.t().get_str() << ") valuation ";
  int v = x.valuation(p);
  if (v == INT_MAX)
    os << "inf";
  else
    os << v;
  return os.str();
}

}  // namespace

ObstructionReport obstruction_check(int case_id, long q, int n, int m, SplitType type, int samples,
                                    std::uint64_t seed) {
  if (case_id != 3 && case_id != 4 && case_id != 5 && case_id != 7 && case_id != 8)
    throw std::invalid_argument("obstruction cases are 3, 4, 5, 7 and 8");
  if (n < 1 || m < 0) throw std::invalid_argument("obstruction_check needs n >= 1 and m >= 0");
  ObstructionReport rep;
  rep.case_id = case_id;

  // wide precision so that prelim_matrix entries lift to exact integers
  int k = 1;
  while (ipow(q, k + 1) <= (i64(1) << 40)) ++k;
  LocalConfig cfg = default_config(q, k, type);
  Field f{type, mpz_class(static_cast<long>(cfg.d)), q};
  if (type == SplitType::split) f.d = 1;
  const i64 mod = cfg.modulus();
  auto lift = [&](const Residue& r) {
    i64 v = r.value();
    return mpq_class(static_cast<long>(v > mod / 2 ? v - mod : v));
  };

  QQuad al = alpha_of(f), pm = f.q(mpq_class(static_cast<long>(ipow(q, m))));
  QMat eta = f.identity();
  eta(1, 0) = al * pm;
  eta(2, 3) = -(al.conj() * pm);

  const Pattern pat = subgroup_pattern(Subgroup::Ksharp_Pn, n);
  auto cell_ok = [&](const QQuad& x, int code) {
    int v = x.valuation(q);
    if (code == -2) return v == 0;
    if (code == -1) return v >= 0;
    return v >= code;
  };

  std::mt19937_64 rng(seed);
  const i64 pn = ipow(q, n), pn1 = ipow(q, std::max(n - 1, 0));
  std::uniform_int_distribution<i64> dw(0, pn - 1), dy(0, std::max<i64>(pn1 - 1, 0));
  for (int it = 0; it < samples; ++it) {
    PrelimRep r{case_id, 0, 0, 0};
    bool w_mod_pn = case_id == 4 || case_id == 8;
    r.w = w_mod_pn ? dw(rng) : dy(rng);
    if (case_id == 3 || case_id == 4) {
      r.y = dy(rng);
      r.z = dy(rng);
    }
    if (support_fast(cfg, m, n, r)) rep.support_fast_false = false;

    GMatB rb = prelim_matrix(cfg, r);
    QMat rq = f.identity();
    for (int i = 0; i < 16; ++i) rq.e[i] = f.q(lift(rb.e[i]));

    std::array<mpq_class, 4> g;
    do
      for (auto& x : g) x = rng() % 4 == 0 ? mpq_class(0) : random_rational(rng, q, -2, 2);
    while (g[0] * g[3] - g[1] * g[2] == 0);
    QMat mt = levi(f, random_element(rng, f), random_element(rng, f), g);
    QMat nt = unipotent(f, random_element(rng, f), random_element(rng, f), random_rational(rng, q, -2, 2));
    if (!is_similitude(f, mt) || !is_similitude(f, nt))
      throw std::logic_error("sampled parabolic element is not a unitary similitude");
    QMat X = nt * mt * eta * rq;
    ++rep.samples;

    bool violated = false;
    for (int i = 0; i < 16 && !violated; ++i)
      if (!cell_ok(X.e[i], pat[i])) violated = true;
    if (violated) ++rep.pattern_violated;

    const QQuad &x31 = X(2, 0), &x32 = X(2, 1), &x33 = X(2, 2), &x34 = X(2, 3), &x41 = X(3, 0);
    auto ratio_val = [&](const QQuad& den) { return (x33 * den.inv()).valuation(q); };
    bool held = false, literal = false;
    switch (case_id) {
      case 3:
        if (x31.norm() == 0) {
          ++rep.skipped;
          continue;
        }
        held = literal = ratio_val(x31) >= 0;
        break;
      case 4:
        held = x34.norm() != 0 && ratio_val(x34) >= 1;
        literal = x33.valuation(q) >= 1;
        break;
      case 5:
        held = x32.norm() != 0 && ratio_val(x32) >= 0;
        literal = x41.is_unit(q);
        break;
      default: held = literal = x33.is_zero(); break;
    }
    if (literal) ++rep.literal_held;
    if (held) {
      ++rep.invariant_held;
    } else if (rep.failures.size() < 5) {
      std::ostringstream os;
      os << "case " << case_id << " sample " << it << " (w,y,z)=(" << r.w << "," << r.y << "," << r.z
         << "): (3,1)=" << describe(x31, q) << " (3,2)=" << describe(x32, q)
         << " (3,3)=" << describe(x33, q) << " (3,4)=" << describe(x34, q) << " (4,1)=" << describe(x41, q);
      rep.failures.push_back(os.str());
    }
  }
  return rep;
}

}  // namespace lzeta::sym
