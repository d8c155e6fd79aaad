#include <climits>
#include <numeric>
#include <random>
#include <sstream>

#include "lzeta/whittaker.hpp"

namespace lzeta::wz {

using i128 = __int128;

mpq_class ppow(long p, int e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(std::abs(e)));
  return e >= 0 ? mpq_class(r) : mpq_class(1) / mpq_class(r);
}

GL2 GL2::operator*(const GL2& o) const {
  GL2 r{a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  r.a.canonicalize();
  r.b.canonicalize();
  r.c.canonicalize();
  r.d.canonicalize();
  return r;
}

GL2 gl2_diag(long p, int l) { return {ppow(p, l), 0, 0, 1}; }
GL2 gl2_lower(const mpq_class& x) { return {1, 0, x, 1}; }
GL2 gl2_upper(const mpq_class& x) { return {1, x, 0, 1}; }
GL2 gl2_antidiag(long p, int l) { return {0, ppow(p, l), -1, 0}; }
GL2 gl2_atkin_lehner(long p, int n) { return {0, 1, ppow(p, n), 0}; }

void CheckReport::record(bool good, const std::string& what) {
  ++checks;
  if (good)
    ++passed;
  else if (failures.size() < 10)
    failures.push_back(what);
}

namespace {

int vp128(i128 x, long p) {
  if (x == 0) return INT_MAX;
  int v = 0;
  while (x % p == 0) {
    x /= p;
    ++v;
  }
  return v;
}

long unit_mod_p(i128 x, long p) {
  while (x % p == 0) x /= p;
  long r = static_cast<long>(x % p);
  return r < 0 ? r + p : r;
}

i128 ipow128(long p, int e) {
  i128 r = 1;
  for (int i = 0; i < e; ++i) r *= p;
  return r;
}

long inv_mod_p(long a, long p) {
  for (long x = 1; x < p; ++x)
    if (a * x % p == 1) return x;
  throw std::domain_error("not invertible mod p");
}

struct Frac {
  i128 num, den;  // reduced, 0 <= num < den
  bool operator<(const Frac& o) const { return num * o.den < o.num * den || (num * o.den == o.num * den && den < o.den); }
};

Frac make_frac(i128 num, i128 den) {
  num %= den;
  if (num < 0) num += den;
  i128 a = num, b = den;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  if (a == 0) a = den;
  return {num / a, den / a};
}

// Whittaker integral of the newform section over x in x0 + p^r o, with adaptive refinement.
class Integrator {
 public:
  Integrator(const NewformModel& m, const std::vector<long>& dlog, const GL2& g)
      : model_(m), dlog_(dlog), p_(m.q()) {
    S_ = 0;
    while (ipow128(p_, S_ + 1) <= i128(1000000000)) ++S_;
    scale_ = ipow128(p_, S_);
    G_[0] = scaled(g.a);
    G_[1] = scaled(g.b);
    G_[2] = scaled(g.c);
    G_[3] = scaled(g.d);
    det_ = G_[0] * G_[3] - G_[1] * G_[2];
    if (det_ == 0) throw std::invalid_argument("singular GL2 argument");
    v21_ = val1(G_[2]);
    v22_ = val1(G_[3]);
  }

  std::map<std::pair<int, int>, std::map<Frac, mpq_class>> acc;
  std::uint64_t balls = 0;

  void run() {
    // below this radius c and d are dominated by x g21, x g22 on every shell ball, so those balls cancel
    int v11 = val1(G_[0]), v12 = val1(G_[1]);
    int k = -1;
    if (v21_ != INT_MAX && v11 != INT_MAX) k = std::min(k, v11 - v21_);
    if (v22_ != INT_MAX && v12 != INT_MAX) k = std::min(k, v12 - v22_);
    k -= 1;
    if (k + S_ < 0) throw std::invalid_argument("GL2 argument outside the supported valuation window");
    ball(0, k, 0);
  }

 private:
  i128 scaled(const mpq_class& x) const {
    mpq_class y = x * mpq_class(mpz_class(static_cast<long>(scale_)));
    y.canonicalize();
    if (y.get_den() != 1) throw std::invalid_argument("GL2 entries must lie in p^{-S} Z");
    return static_cast<i128>(y.get_num().get_si());
  }
  int val1(i128 x) const { return x == 0 ? INT_MAX : vp128(x, p_) - S_; }
  int val2(i128 x) const { return x == 0 ? INT_MAX : vp128(x, p_) - 2 * S_; }

  long theta(long u) const { return model_.theta_exponent(u); }

  void ball(i128 X0, int r, int depth) {
    ++balls;
    if (depth > 60 || r > S_) throw std::runtime_error("Whittaker integral refinement did not terminate");
    const long p = p_;
    i128 C = -(G_[0] * scale_ + X0 * G_[2]);
    i128 D = -(G_[1] * scale_ + X0 * G_[3]);
    int vc0 = val2(C), vd0 = val2(D);
    auto add = [](int a, int b) { return (a == INT_MAX || b == INT_MAX) ? INT_MAX : a + b; };
    int vc_var = add(r, v21_), vd_var = add(r, v22_);
    bool c_stable = vc0 != INT_MAX && (vc_var == INT_MAX || vc0 + 1 <= vc_var);
    bool d_stable = vd0 != INT_MAX && (vd_var == INT_MAX || vd0 + 1 <= vd_var);
    if (c_stable && d_stable) {
      if (vc0 != vd0 + 1 || r < 0) return;
      long uc = unit_mod_p(C, p), ud = unit_mod_p(D, p), udet = unit_mod_p(det_, p);
      int vdet = val2(det_);
      int vA = vdet - vd0, vD = vd0;
      long uA = udet * inv_mod_p(ud, p) % p;
      long uprime = uc * inv_mod_p(ud, p) % p;
      long q1 = p - 1;
      // theta(uA) theta(ud)^{-1} theta(u')^{-1}
      long t = theta(uA) - theta(ud) - theta(uprime);
      t %= q1;
      if (t < 0) t += q1;
      // psi^{-c}(-x) = psi(c x0)
      i128 cx = X0 * model_.params().c;
      Frac psi = make_frac(cx, scale_);
      Frac th = make_frac(t * static_cast<long>(model_.params().chi_index), q1);
      Frac tot = make_frac(psi.num * th.den + th.num * psi.den, psi.den * th.den);
      mpq_class w = mpq_class(1) / ppow(p, r);
      acc[{vA, vD}][tot] += w;
      return;
    }
    if (d_stable && !c_stable) {
      int vc_lo = std::min(vc0, vc_var);
      if (vc_lo != INT_MAX && vc_lo >= vd0 + 2) return;
      if (vc_lo == INT_MAX) return;
    }
    if (c_stable && !d_stable) {
      int vd_lo = std::min(vd0, vd_var);
      if (vc0 <= vd_lo) return;
    }
    i128 step = ipow128(p, r + S_);
    for (long j = 0; j < p; ++j) ball(X0 + j * step, r + 1, depth + 1);
  }

  const NewformModel& model_;
  const std::vector<long>& dlog_;
  long p_;
  int S_;
  i128 scale_;
  i128 G_[4];
  i128 det_;
  int v21_, v22_;
};

std::string key_of(const GL2& g) {
  return g.a.get_str() + "," + g.b.get_str() + "," + g.c.get_str() + "," + g.d.get_str();
}

}  // namespace

long NewformModel::theta_exponent(long unit) const {
  long u = unit % params_.q;
  if (u < 0) u += params_.q;
  if (u == 0) throw std::domain_error("theta of a non-unit");
  return dlog_[u];
}

std::shared_ptr<NewformModel> NewformModel::build(const NewformParams& params) {
  if (params.q == 2 || !is_prime(params.q))
    throw ConfigError("the newform model needs an odd prime q, got " + std::to_string(params.q));
  if (params.chi_index % (params.q - 1) == 0)
    throw ConfigError("chi1 must be a nontrivial character of (o/p)^x (index not divisible by q-1)");
  if (params.c % params.q == 0) throw ConfigError("the Whittaker character needs c a unit");
  auto m = std::shared_ptr<NewformModel>(new NewformModel());
  m->params_ = params;
  long p = params.q;
  m->root_ = 0;
  for (long g = 2; g < p && m->root_ == 0; ++g) {
    long x = 1;
    bool prim = true;
    for (long k = 1; k < p - 1; ++k) {
      x = x * g % p;
      if (x == 1) prim = false;
    }
    if (prim) m->root_ = g;
  }
  if (p == 3) m->root_ = 2;
  m->dlog_.assign(p, -1);
  long x = 1;
  for (long k = 0; k < p - 1; ++k) {
    m->dlog_[x] = k;
    x = x * m->root_ % p;
  }
  WValue one = m->raw(GL2{});
  if (one.is_zero()) throw std::logic_error("the model newform vanishes at 1");
  m->one_inv_ = one.inverse();
  return m;
}

WValue NewformModel::raw(const GL2& g) const {
  std::string key = key_of(g);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  Integrator in(*this, dlog_, g);
  in.run();
  WValue out;
  for (const auto& [mono, fr] : in.acc) {
    i128 M = 1;
    for (const auto& [f, w] : fr) M = M / std::gcd(static_cast<long long>(M), static_cast<long long>(f.den)) * f.den;
    std::vector<mpq_class> c(static_cast<std::size_t>(M), 0);
    for (const auto& [f, w] : fr) c[static_cast<std::size_t>(f.num * (M / f.den))] += w;
    out = out + WValue::monomial(mono.first, mono.second, CyclotomicNum::from_terms(static_cast<long>(M), c));
  }
  std::lock_guard<std::mutex> lock(mu_);
  balls_ += in.balls;
  cache_.emplace(key, out);
  return out;
}

WValue NewformModel::value(const GL2& g) const { return raw(g) * one_inv_; }

// ---------------------------------------------------------------- checks

std::vector<GL2> sample_k1(long p, int n, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  long pn = 1;
  for (int i = 0; i < n; ++i) pn *= p;
  std::uniform_int_distribution<long> d(-2 * p, 2 * p);
  std::vector<GL2> out;
  while (static_cast<int>(out.size()) < count) {
    long a = d(rng), b = d(rng), c = pn * d(rng), dd = d(rng);
    long det = a * dd - b * c;
    if (det % p == 0) continue;
    out.push_back(GL2{a, b, c, dd});
  }
  return out;
}

namespace {

std::vector<GL2> test_arguments(long p, int n) {
  std::vector<GL2> t;
  for (int l = -1; l <= 2; ++l)
    for (long z = 0; z < p; ++z) t.push_back(gl2_diag(p, l) * gl2_lower(mpq_class(p * z)));
  for (int l = 0; l <= 1; ++l) t.push_back(gl2_antidiag(p, l));
  t.push_back(gl2_lower(1));
  t.push_back(gl2_diag(p, 1) * gl2_atkin_lehner(p, n));
  return t;
}

std::vector<GL2> k1_generators(long p, int n) {
  return {GL2{2 % p == 0 ? 1 : 2, 0, 0, 1}, GL2{1, 0, 0, p - 1}, gl2_upper(1), gl2_lower(ppow(p, n)), GL2{-1, 0, 0, -1}};
}

std::string describe(const GL2& g) {
  return "[" + g.a.get_str() + ", " + g.b.get_str() + "; " + g.c.get_str() + ", " + g.d.get_str() + "]";
}

}  // namespace

CheckReport verify_newform_model(const NewformModel& model, int samples, std::uint64_t seed) {
  CheckReport rep;
  const long p = model.q();
  const int n = model.n();
  WValue one = WValue::monomial(0, 0, CyclotomicNum::rational(1));
  rep.record(model.value(GL2{}) == one, "W(1) != 1");
  for (int l = -2; l <= 3; ++l)
    for (long u : {1L, p - 1, p + 1, 2 * p + 1}) {
      if (u % p == 0) continue;
      WValue w = model.value(GL2{mpq_class(u) * ppow(p, l), 0, 0, 1});
      bool good = l == 0 ? w == one : w.is_zero();
      rep.record(good, "Kirillov support at diag(" + std::to_string(u) + " pi^" + std::to_string(l) + ", 1): " + w.str());
    }
  std::vector<GL2> ks = k1_generators(p, n);
  for (const GL2& k : sample_k1(p, n, samples, seed)) ks.push_back(k);
  for (const GL2& g : test_arguments(p, n)) {
    WValue base = model.raw(g);
    for (const GL2& k : ks)
      rep.record(model.raw(g * k) == base, "right invariance fails at g=" + describe(g) + " k=" + describe(k));
  }
  // left N-equivariance and the central character
  for (const GL2& g : test_arguments(p, n)) {
    WValue base = model.raw(g);
    mpq_class x(1, p);
    // psi^{-c}(x) = psi(-c x): a p-th root of unity
    long e = ((-model.params().c) % p + p) % p;
    WValue psi = WValue::monomial(0, 0, CyclotomicNum::root(p, e));
    rep.record(model.raw(gl2_upper(x) * g) == psi * base, "left equivariance fails at " + describe(g));
    WValue omega = WValue::monomial(1, 1, CyclotomicNum::rational(1));
    rep.record(model.raw(GL2{p, 0, 0, p} * g) == omega * base, "central character fails at " + describe(g));
  }
  return rep;
}

CheckReport verify_lemma_6_1_i(const NewformModel& model, int m, int samples, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("the vanishing lemma needs m >= 1");
  CheckReport rep;
  const long p = model.q();
  const int n = model.n();
  const int t = std::max({n - m - 1, 0, (n - 1) / 2});
  long count = 1;
  for (int i = t; i < n - 1; ++i) count *= p;
  std::vector<GL2> ks{GL2{}};
  for (const GL2& k : sample_k1(p, n, samples, seed)) ks.push_back(k);
  for (int l = 0; l <= 2; ++l)
    for (const GL2& k : ks) {
      GL2 g = gl2_diag(p, l) * k;
      WValue sum;
      for (long i = 0; i < count; ++i) sum = sum + model.raw(g * gl2_lower(mpq_class(p) * ppow(p, t) * i));
      rep.record(sum.is_zero(), "nonzero sum at m=" + std::to_string(m) + " g=" + describe(g) + ": " + sum.str());
    }
  return rep;
}

CheckReport verify_atkin_lehner(const NewformModel& model, int samples, std::uint64_t seed) {
  CheckReport rep;
  const long p = model.q();
  const int n = model.n();
  const GL2 al = gl2_atkin_lehner(p, n);
  auto wprime = [&](const GL2& g) { return model.raw(g * al); };
  WValue w1 = model.raw(GL2{}), wp1 = wprime(GL2{});
  rep.record(!wp1.is_zero(), "W'(1) = 0");
  std::vector<GL2> ks = k1_generators(p, n);
  for (const GL2& k : sample_k1(p, n, samples, seed)) ks.push_back(k);
  for (const GL2& g : {GL2{}, gl2_diag(p, 1), gl2_lower(mpq_class(p)), gl2_antidiag(p, 0)})
    for (const GL2& k : ks)
      rep.record(wprime(g * k) == wprime(g), "W' not invariant at g=" + describe(g) + " k=" + describe(k));
  // W = c W' with one constant: W(g) W'(1) = W(1) W'(g)
  for (const GL2& g : test_arguments(p, n))
    rep.record(model.raw(g) * wp1 == w1 * wprime(g), "W and W' not proportional at " + describe(g));
  // c^{-2} = omega_tau(pi)^n: W'(1)^2 = (a1 a2)^n W(1)^2
  WValue omega_n = WValue::monomial(n, n, CyclotomicNum::rational(1));
  rep.record(wp1 * wp1 == omega_n * w1 * w1, "c^{-2} != omega_tau(pi)^n");
  for (int l = 0; l <= 3; ++l) {
    rep.record(model.value(gl2_antidiag(p, l)).is_zero(), "W(antidiag(pi^" + std::to_string(l) + ", -1)) != 0");
    rep.record(model.value(gl2_diag(p, l + n)).is_zero(), "W(diag(pi^" + std::to_string(l + n) + ", 1)) != 0");
  }
  return rep;
}

}  // namespace lzeta::wz
