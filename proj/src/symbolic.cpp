#include "lzeta/symbolic.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <fstream>
#include <functional>
#include <memory>
#include <tuple>
#include <optional>
#include <sstream>

namespace lzeta::sym {

// ================================================================ Context

Context::Context() {
  for (const char* v : {"pi", "a", "b", "c"}) var(v);
  unit_[kC] = true;
}

int Context::var(const std::string& name) {
  int v = find_var(name);
  if (v >= 0) return v;
  if (static_cast<int>(vars_.size()) >= kMaxVars) throw SymbolicError("too many symbols (limit " +
                                                                      std::to_string(kMaxVars) + ")");
  vars_.push_back(name);
  unit_.push_back(false);
  return static_cast<int>(vars_.size()) - 1;
}

int Context::find_var(const std::string& name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i] == name) return static_cast<int>(i);
  return -1;
}

void Context::declare_unit(int v) { unit_[v] = true; }
bool Context::is_unit_var(int v) const { return unit_[v]; }

int Context::add_atom(const std::string& name, const Expr& def) {
  if (!def.den.empty()) throw SymbolicError("atom '" + name + "' must be defined by a polynomial");
  if (def.num.empty()) throw SymbolicError("atom '" + name + "' is zero");
  atoms_.push_back({name, def.num, -1});
  return static_cast<int>(atoms_.size()) - 1;
}

int Context::find_atom(const std::string& name) const {
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (atoms_[i].name == name) return static_cast<int>(i);
  return -1;
}

int Context::conj_atom(int id) {
  if (atoms_[id].conj_id >= 0) return atoms_[id].conj_id;
  Poly cd = pconj(atoms_[id].def);
  int found = -1;
  if (cd == atoms_[id].def) found = id;
  for (std::size_t i = 0; found < 0 && i < atoms_.size(); ++i)
    if (atoms_[i].def == cd) found = static_cast<int>(i);
  if (found < 0) {
    atoms_.push_back({"conj(" + atoms_[id].name + ")", cd, id});
    found = static_cast<int>(atoms_.size()) - 1;
  }
  atoms_[id].conj_id = found;
  atoms_[found].conj_id = id;
  return found;
}

namespace {

void add_term(Poly& p, const Mono& m, const mpq_class& c) {
  if (c == 0) return;
  auto [it, fresh] = p.emplace(m, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0) p.erase(it);
  }
}

Mono mono_add(const Mono& x, const Mono& y) {
  Mono r;
  r.alpha = x.alpha + y.alpha;
  for (int i = 0; i < kMaxVars; ++i) {
    int e = x.e[i] + y.e[i];
    if (e > 120 || e < -120) throw SymbolicError("exponent overflow");
    r.e[i] = static_cast<std::int8_t>(e);
  }
  return r;
}

Mono unit_mono(int v, int e) {
  Mono m;
  m.e[v] = static_cast<std::int8_t>(e);
  return m;
}

}  // namespace

Poly Context::pmul(const Poly& x, const Poly& y) const {
  Poly r;
  for (const auto& [mx, cx] : x)
    for (const auto& [my, cy] : y) {
      Mono m = mono_add(mx, my);
      mpq_class c = cx * cy;
      if (m.alpha < 2) {
        add_term(r, m, c);
        continue;
      }
      // alpha^2 = (b alpha - a) / c
      m.alpha = 0;
      Mono mb = mono_add(mono_add(m, unit_mono(kB, 1)), unit_mono(kC, -1));
      mb.alpha = 1;
      Mono ma = mono_add(mono_add(m, unit_mono(kA, 1)), unit_mono(kC, -1));
      add_term(r, mb, c);
      add_term(r, ma, -c);
    }
  return r;
}

Poly Context::padd(const Poly& x, const Poly& y) const {
  Poly r = x;
  for (const auto& [m, c] : y) add_term(r, m, c);
  return r;
}

Poly Context::pscale(const Poly& x, const mpq_class& s) const {
  Poly r;
  for (const auto& [m, c] : x) add_term(r, m, c * s);
  return r;
}

Poly Context::pconj(const Poly& x) const {
  // alpha -> b/c - alpha
  Poly r;
  for (const auto& [m, c] : x) {
    if (m.alpha == 0) {
      add_term(r, m, c);
      continue;
    }
    Mono base = m;
    base.alpha = 0;
    add_term(r, mono_add(mono_add(base, unit_mono(kB, 1)), unit_mono(kC, -1)), c);
    add_term(r, m, -c);
  }
  return r;
}

Poly Context::ppow_atom(int id, int k) const {
  Poly r{{Mono{}, mpq_class(1)}};
  for (int i = 0; i < k; ++i) r = pmul(r, atoms_[id].def);
  return r;
}

Expr Context::constant(const mpq_class& v) const {
  Expr x;
  if (v != 0) x.num.emplace(Mono{}, v);
  return x;
}

Expr Context::variable(int v) const {
  Expr x;
  x.num.emplace(unit_mono(v, 1), mpq_class(1));
  return x;
}

Expr Context::alpha() const {
  Expr x;
  Mono m;
  m.alpha = 1;
  x.num.emplace(m, mpq_class(1));
  return x;
}

Expr Context::atom(int id) const { return {atoms_[id].def, {}}; }

Expr Context::add(const Expr& x, const Expr& y) const {
  if (x.num.empty()) return y;
  if (y.num.empty()) return x;
  Expr r;
  r.den = x.den;
  for (const auto& [a, e] : y.den) r.den[a] = std::max(r.den[a], e);
  auto lift = [&](const Expr& z) {
    Poly p = z.num;
    for (const auto& [a, e] : r.den) {
      auto it = z.den.find(a);
      int have = it == z.den.end() ? 0 : it->second;
      if (e > have) p = pmul(p, ppow_atom(a, e - have));
    }
    return p;
  };
  r.num = padd(lift(x), lift(y));
  if (r.num.empty()) r.den.clear();
  return r;
}

Expr Context::neg(const Expr& x) const { return {pscale(x.num, -1), x.den}; }
Expr Context::sub(const Expr& x, const Expr& y) const { return add(x, neg(y)); }

Expr Context::mul(const Expr& x, const Expr& y) const {
  Expr r;
  r.num = pmul(x.num, y.num);
  if (r.num.empty()) return r;
  r.den = x.den;
  for (const auto& [a, e] : y.den) r.den[a] += e;
  return r;
}

bool Context::single_unit_term(const Poly& p) const {
  if (p.size() != 1) return false;
  const Mono& m = p.begin()->first;
  if (m.alpha) return false;
  for (int v = 0; v < var_count(); ++v)
    if (m.e[v] != 0 && v != kPi && !unit_[v]) return false;
  return true;
}

// target == factor * t with t a single alpha-free unit term (pi allowed in t)
bool Context::divides_as_unit(const Poly& target, const Poly& factor) const {
  if (target.empty() || factor.empty()) return false;
  const auto& [mt, ct] = *target.rbegin();
  const auto& [mf, cf] = *factor.rbegin();
  if (mt.alpha != mf.alpha) return false;
  Mono q;
  for (int i = 0; i < kMaxVars; ++i) q.e[i] = static_cast<std::int8_t>(mt.e[i] - mf.e[i]);
  Poly t{{q, ct / cf}};
  if (!single_unit_term(t)) return false;
  return pmul(factor, t) == target;
}

Expr Context::inv(const Expr& x) {
  if (x.num.empty()) throw SymbolicError("division by zero");
  for (int i = 0, n = atom_count(); i < n; ++i) conj_atom(i);
  Poly denom{{Mono{}, mpq_class(1)}};
  for (const auto& [a, e] : x.den) denom = pmul(denom, ppow_atom(a, e));
  auto invert_term = [](const Poly& t) {
    const auto& [m, c] = *t.begin();
    Mono q;
    for (int i = 0; i < kMaxVars; ++i) q.e[i] = static_cast<std::int8_t>(-m.e[i]);
    return Poly{{q, 1 / c}};
  };
  if (single_unit_term(x.num)) return {pmul(denom, invert_term(x.num)), {}};
  auto quotient_term = [&](const Poly& factor) {
    const auto& [mt, ct] = *x.num.rbegin();
    const auto& [mf, cf] = *factor.rbegin();
    Mono q;
    for (int i = 0; i < kMaxVars; ++i) q.e[i] = static_cast<std::int8_t>(mt.e[i] - mf.e[i]);
    return Poly{{q, ct / cf}};
  };
  for (int a = 0; a < atom_count(); ++a)
    if (divides_as_unit(x.num, atoms_[a].def)) {
      Expr r{pmul(denom, invert_term(quotient_term(atoms_[a].def))), {{a, 1}}};
      return r;
    }
  for (int a = 0; a < atom_count(); ++a)
    for (int b = a; b < atom_count(); ++b) {
      Poly f = pmul(atoms_[a].def, atoms_[b].def);
      if (divides_as_unit(x.num, f)) {
        Expr r{pmul(denom, invert_term(quotient_term(f))), {}};
        r.den[a] += 1;
        r.den[b] += 1;
        return r;
      }
    }
  throw SymbolicError("non-unit denominator: " + str(x.num));
}

Expr Context::pow(const Expr& x, int k) {
  if (k < 0) return inv(pow(x, -k));
  Expr r = constant(1);
  for (int i = 0; i < k; ++i) r = mul(r, x);
  return r;
}

Expr Context::conj(const Expr& x) {
  Expr r;
  r.num = pconj(x.num);
  for (const auto& [a, e] : x.den) r.den[conj_atom(a)] += e;
  return r;
}

int Context::pi_valuation(const Expr& x) const {
  int v = INT_MAX;
  for (const auto& [m, c] : x.num) v = std::min<int>(v, m.e[kPi]);
  return v;
}

bool Context::is_unit(const Expr& x) const {
  if (x.num.empty() || pi_valuation(x) < 0) return false;
  Poly r;
  for (const auto& [m, c] : x.num)
    if (m.e[kPi] == 0) r.emplace(m, c);
  if (r.empty()) return false;
  if (single_unit_term(r)) return true;
  auto mod_pi = [](const Poly& p) {
    Poly q;
    for (const auto& [m, c] : p)
      if (m.e[kPi] == 0) q.emplace(m, c);
    return q;
  };
  for (int a = 0; a < atom_count(); ++a) {
    Poly fa = mod_pi(atoms_[a].def);
    if (divides_as_unit(r, fa)) return true;
    for (int b = a; b < atom_count(); ++b)
      if (divides_as_unit(r, pmul(fa, mod_pi(atoms_[b].def)))) return true;
  }
  return false;
}

bool Context::alpha_free(const Expr& x) const {
  for (const auto& [m, c] : x.num)
    if (m.alpha) return false;
  return true;
}

std::string Context::str(const Poly& p) const {
  if (p.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    const auto& [m, c] = *it;
    os << (first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + "));
    mpq_class a = abs(c);
    bool bare = true;
    if (a != 1) {
      os << a;
      bare = false;
    }
    auto sep = [&] {
      if (!bare) os << "*";
      bare = false;
    };
    for (int v = 0; v < var_count(); ++v)
      if (m.e[v] != 0) {
        sep();
        os << vars_[v];
        if (m.e[v] != 1) os << "^" << static_cast<int>(m.e[v]);
      }
    if (m.alpha) {
      sep();
      os << "alpha";
    }
    if (bare) os << "1";
    first = false;
  }
  return os.str();
}

std::string Context::str(const Expr& x) const {
  std::string s = str(x.num);
  if (x.den.empty()) return s;
  s = "(" + s + ")/(";
  bool first = true;
  for (const auto& [a, e] : x.den) {
    if (!first) s += "*";
    s += atoms_[a].name;
    if (e != 1) s += "^" + std::to_string(e);
    first = false;
  }
  return s + ")";
}

SymMat Context::matmul(const SymMat& x, const SymMat& y) const {
  SymMat r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Expr s;
      for (int k = 0; k < 4; ++k) {
        const Expr& a = x[4 * i + k];
        const Expr& b = y[4 * k + j];
        if (a.num.empty() || b.num.empty()) continue;
        s = add(s, mul(a, b));
      }
      r[4 * i + j] = s;
    }
  return r;
}

SymMat Context::identity() const {
  SymMat r;
  for (int i = 0; i < 4; ++i) r[5 * i] = constant(1);
  return r;
}

SymMat Context::conj(const SymMat& x) {
  SymMat r;
  for (int i = 0; i < 16; ++i) r[i] = conj(x[i]);
  return r;
}

// ================================================================ tokens and integer expressions

namespace {

struct Tok {
  enum Kind { num, id, sym, end } kind = end;
  std::string text;
};

std::vector<Tok> tokenize(const std::string& s) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char ch = s[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(ch))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Tok::num, s.substr(i, j - i)});
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Tok::id, s.substr(i, j - i)});
      i = j;
    } else {
      std::string two = s.substr(i, 2);
      if (two == "==" || two == ">=" || two == "<=" || two == "!=") {
        out.push_back({Tok::sym, two});
        i += 2;
      } else {
        out.push_back({Tok::sym, std::string(1, ch)});
        ++i;
      }
    }
  }
  out.push_back({Tok::end, ""});
  return out;
}

using Grid = std::map<std::string, int>;

class Cursor {
 public:
  explicit Cursor(std::vector<Tok> t) : t_(std::move(t)) {}
  const Tok& peek() const { return t_[pos_]; }
  Tok next() { return t_[pos_++]; }
  bool accept(const std::string& s) {
    if (peek().kind != Tok::end && peek().text == s) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(const std::string& s) {
    if (!accept(s)) throw SymbolicError("expected '" + s + "' near '" + peek().text + "'");
  }
  bool done() const { return peek().kind == Tok::end; }

  // integer expressions over the grid variables
  long int_expr(const Grid& g) {
    long v = int_term(g);
    for (;;) {
      if (accept("+"))
        v += int_term(g);
      else if (accept("-"))
        v -= int_term(g);
      else
        return v;
    }
  }
  long int_term(const Grid& g) {
    long v = int_primary(g);
    for (;;) {
      if (accept("*")) {
        v *= int_primary(g);
      } else if (peek().text == "/" && t_[pos_ + 1].text == "/") {
        pos_ += 2;
        long d = int_primary(g);
        if (d == 0) throw SymbolicError("integer division by zero");
        v = v >= 0 ? v / d : -((-v + d - 1) / d);
      } else {
        return v;
      }
    }
  }
  long int_primary(const Grid& g) {
    if (accept("-")) return -int_primary(g);
    if (accept("(")) {
      long v = int_expr(g);
      expect(")");
      return v;
    }
    Tok t = next();
    if (t.kind == Tok::num) return std::stol(t.text);
    if (t.kind == Tok::id && (t.text == "max" || t.text == "min")) {
      expect("(");
      long a = int_expr(g);
      expect(",");
      long b = int_expr(g);
      expect(")");
      return t.text == "max" ? std::max(a, b) : std::min(a, b);
    }
    if (t.kind == Tok::id) {
      auto it = g.find(t.text);
      if (it != g.end()) return it->second;
    }
    throw SymbolicError("bad integer expression near '" + t.text + "'");
  }
  bool int_cond(const Grid& g) {
    bool v = int_cmp(g);
    while (peek().text == "and") {
      next();
      v = int_cmp(g) && v;
    }
    return v;
  }
  bool int_cmp(const Grid& g) {
    long a = int_expr(g);
    std::string op = next().text;
    long b = int_expr(g);
    if (op == ">=") return a >= b;
    if (op == "<=") return a <= b;
    if (op == ">") return a > b;
    if (op == "<") return a < b;
    if (op == "==") return a == b;
    if (op == "!=") return a != b;
    throw SymbolicError("bad comparison '" + op + "'");
  }

 private:
  std::vector<Tok> t_;
  std::size_t pos_ = 0;
};

// ================================================================ per-instance evaluator

struct Env {
  Context ctx;
  Grid grid;
  std::map<std::string, Expr> lets;
  std::map<std::string, SymMat> mats;
};

class Evaluator {
 public:
  Evaluator(Env& env, Cursor& c) : e_(env), c_(c) {}

  Expr expr() {
    Expr v = term();
    for (;;) {
      if (c_.accept("+"))
        v = e_.ctx.add(v, term());
      else if (c_.accept("-"))
        v = e_.ctx.sub(v, term());
      else
        return v;
    }
  }

  SymMat matprod() {
    SymMat r = matfactor();
    while (c_.accept("*")) r = e_.ctx.matmul(r, matfactor());
    return r;
  }

  std::vector<SymMat> factors() {
    std::vector<SymMat> out{matfactor()};
    while (c_.accept("*")) out.push_back(matfactor());
    return out;
  }

 private:
  Expr term() {
    Expr v = unary();
    for (;;) {
      if (c_.accept("*"))
        v = e_.ctx.mul(v, unary());
      else if (c_.accept("/"))
        v = e_.ctx.div(v, unary());
      else
        return v;
    }
  }
  Expr unary() {
    if (c_.accept("-")) return e_.ctx.neg(unary());
    Expr b = primary();
    if (c_.accept("^")) return e_.ctx.pow(b, static_cast<int>(c_.int_primary(e_.grid)));
    return b;
  }
  Expr primary() {
    if (c_.accept("(")) {
      Expr v = expr();
      c_.expect(")");
      return v;
    }
    Tok t = c_.next();
    if (t.kind == Tok::num) return e_.ctx.constant(mpq_class(mpz_class(t.text)));
    if (t.kind != Tok::id) throw SymbolicError("unexpected '" + t.text + "'");
    if (t.text == "conj") {
      c_.expect("(");
      Expr v = expr();
      c_.expect(")");
      return e_.ctx.conj(v);
    }
    if (t.text == "alpha") return e_.ctx.alpha();
    if (auto it = e_.lets.find(t.text); it != e_.lets.end()) return it->second;
    if (int a = e_.ctx.find_atom(t.text); a >= 0) return e_.ctx.atom(a);
    if (auto it = e_.grid.find(t.text); it != e_.grid.end()) return e_.ctx.constant(it->second);
    return e_.ctx.variable(e_.ctx.var(t.text));
  }

  SymMat literal() {
    SymMat m;
    int idx = 0;
    for (;;) {
      if (idx >= 16) throw SymbolicError("matrix literal has more than 16 entries");
      m[idx++] = expr();
      if (c_.accept("]")) break;
      if (!c_.accept(",") && !c_.accept(";")) throw SymbolicError("expected ',' ';' or ']' in matrix literal");
    }
    if (idx != 16) throw SymbolicError("matrix literal has " + std::to_string(idx) + " entries, expected 16");
    return m;
  }

  SymMat diag(const std::array<Expr, 4>& d) {
    SymMat m;
    for (int i = 0; i < 4; ++i) m[5 * i] = d[i];
    return m;
  }

  SymMat from_ints(const std::array<int, 16>& v) {
    SymMat m;
    for (int i = 0; i < 16; ++i) m[i] = e_.ctx.constant(v[i]);
    return m;
  }

  SymMat matfactor() {
    if (c_.accept("[")) return literal();
    Tok t = c_.next();
    if (t.kind != Tok::id) throw SymbolicError("expected a matrix near '" + t.text + "'");
    if (auto it = e_.mats.find(t.text); it != e_.mats.end()) return it->second;
    Context& x = e_.ctx;
    Expr pi = x.variable(Context::kPi);
    int l = e_.grid.at("l"), m = e_.grid.at("m");
    if (t.text == "I") return x.identity();
    if (t.text == "J") return from_ints({0, 0, 1, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, -1, 0, 0});
    if (t.text == "s1") return from_ints({0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0});
    if (t.text == "s2") return from_ints({0, 0, 1, 0, 0, 1, 0, 0, -1, 0, 0, 0, 0, 0, 0, 1});
    if (t.text == "h" || t.text == "hinv") {
      int s = t.text == "h" ? 1 : -1;
      return diag({x.pow(pi, s * (2 * m + l)), x.pow(pi, s * (m + l)), x.constant(1), x.pow(pi, s * m)});
    }
    if (t.text == "eta" || t.text == "eta_m") {
      Expr scale = t.text == "eta" ? x.constant(1) : x.pow(pi, m);
      SymMat r = x.identity();
      r[4] = x.mul(x.alpha(), scale);
      r[11] = x.neg(x.mul(x.conj(x.alpha()), scale));
      return r;
    }
    if (t.text == "levi2") {
      // diag(g, det(g) g^{-T}) for g = [[p, q], [r, s]]
      c_.expect("(");
      Expr p = expr();
      c_.expect(",");
      Expr q = expr();
      c_.expect(",");
      Expr r = expr();
      c_.expect(",");
      Expr s = expr();
      c_.expect(")");
      SymMat g;
      g[0] = p;
      g[1] = q;
      g[4] = r;
      g[5] = s;
      g[10] = s;
      g[11] = x.neg(r);
      g[14] = x.neg(q);
      g[15] = p;
      return g;
    }
    throw SymbolicError("unknown matrix '" + t.text + "'");
  }

  Env& e_;
  Cursor& c_;
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::pair<std::string, std::string> split_word(const std::string& s) {
  std::size_t sp = s.find_first_of(" \t");
  if (sp == std::string::npos) return {s, ""};
  return {s.substr(0, sp), trim(s.substr(sp))};
}

// "NAME = rest"
std::pair<std::string, std::string> split_binding(const std::string& s) {
  std::size_t eq = s.find('=');
  if (eq == std::string::npos) throw SymbolicError("expected 'NAME = ...' in '" + s + "'");
  return {trim(s.substr(0, eq)), trim(s.substr(eq + 1))};
}

SymMat J_sym(Context& x) {
  SymMat r;
  r[2] = x.constant(1);
  r[7] = x.constant(1);
  r[8] = x.constant(-1);
  r[13] = x.constant(-1);
  return r;
}

SymMat transpose(const SymMat& m) {
  SymMat r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[4 * i + j] = m[4 * j + i];
  return r;
}

// mu with t(conj g) J g = mu J, or nullopt
std::optional<Expr> sym_multiplier(Context& x, const SymMat& g, bool unitary, std::string& why) {
  SymMat gc = unitary ? x.conj(g) : g;
  SymMat prod = x.matmul(x.matmul(transpose(gc), J_sym(x)), g);
  Expr mu = prod[2];
  SymMat want = J_sym(x);
  for (int i = 0; i < 16; ++i) {
    Expr expect = x.mul(want[i], mu);
    if (!x.equal(prod[i], expect)) {
      why = "t(conj g) J g is not a multiple of J at (" + std::to_string(i / 4 + 1) + "," + std::to_string(i % 4 + 1) +
            ")";
      return std::nullopt;
    }
  }
  if (!x.equal(mu, x.conj(mu))) {
    why = "multiplier not in the base field";
    return std::nullopt;
  }
  return mu;
}

struct Built {
  Env env;
  SymMat lhs;
  std::vector<SymMat> rhs;
  std::string residual = "none";
  std::vector<std::pair<Expr, Expr>> scalars;
  bool has_lhs = false;
};

void build(const IdentitySpec& spec, const GridPoint& at, Built& b) {
  Env& env = b.env;
  env.grid = {{"n", at.n}, {"l", at.l}, {"m", at.m}, {"j", at.j}};
  for (const auto& u : spec.units) env.ctx.declare_unit(env.ctx.var(u));
  for (const auto& st : spec.statements) {
    auto [kw, rest] = split_word(st);
    auto eval_expr = [&](const std::string& text) {
      Cursor c(tokenize(text));
      Evaluator ev(env, c);
      Expr v = ev.expr();
      if (!c.done()) throw SymbolicError("trailing input in '" + text + "'");
      return v;
    };
    if (kw == "atom") {
      auto [name, body] = split_binding(rest);
      env.ctx.add_atom(name, eval_expr(body));
    } else if (kw == "let") {
      auto [name, body] = split_binding(rest);
      env.lets[name] = eval_expr(body);
    } else if (kw == "mat" || kw == "lhs" || kw == "rhs") {
      std::string body = rest, name;
      if (kw == "mat") std::tie(name, body) = split_binding(rest);
      Cursor c(tokenize(body));
      Evaluator ev(env, c);
      if (kw == "rhs") {
        b.rhs = ev.factors();
      } else {
        SymMat m = ev.matprod();
        if (kw == "mat")
          env.mats[name] = m;
        else {
          b.lhs = m;
          b.has_lhs = true;
        }
      }
      if (!c.done()) throw SymbolicError("trailing input in '" + body + "'");
    } else if (kw == "residual") {
      b.residual = rest;
    } else if (kw == "scalar") {
      std::size_t eq = rest.find("==");
      if (eq == std::string::npos) throw SymbolicError("scalar identity needs '=='");
      b.scalars.emplace_back(eval_expr(rest.substr(0, eq)), eval_expr(rest.substr(eq + 2)));
    } else {
      throw SymbolicError("unknown statement '" + kw + "'");
    }
  }
}

std::string cell(int i) { return "(" + std::to_string(i / 4 + 1) + "," + std::to_string(i % 4 + 1) + ")"; }

}  // namespace

// ================================================================ manifest

std::vector<IdentitySpec> parse_manifest(const std::string& text) {
  std::vector<IdentitySpec> out;
  std::istringstream in(text);
  std::string raw, pending;
  IdentitySpec* cur = nullptr;
  int lineno = 0;
  auto depth = [](const std::string& s) {
    int d = 0;
    for (char ch : s) d += ch == '[' ? 1 : ch == ']' ? -1 : 0;
    return d;
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (!pending.empty()) {
      pending += " " + line;
      if (depth(pending) > 0) continue;
      line = pending;
      pending.clear();
    } else if (depth(line) > 0) {
      pending = line;
      continue;
    }
    auto fail = [&](const std::string& msg) {
      throw SymbolicError("manifest line " + std::to_string(lineno) + ": " + msg);
    };
    if (line[0] == '*') {
      if (!cur || cur->statements.empty()) fail("continuation line without a statement");
      cur->statements.back() += " " + line;
      continue;
    }
    auto [kw, rest] = split_word(line);
    if (kw == "identity") {
      if (cur) fail("nested identity");
      out.push_back({});
      cur = &out.back();
      cur->id = rest;
      continue;
    }
    if (!cur) fail("statement outside an identity block");
    if (kw == "end") {
      cur = nullptr;
    } else if (kw == "title") {
      cur->title = rest;
    } else if (kw == "group") {
      if (rest != "unitary" && rest != "symplectic") fail("group must be unitary or symplectic");
      cur->unitary = rest == "unitary";
    } else if (kw == "grid") {
      if (rest != "j") fail("only 'grid j' extends the grid");
      cur->uses_j = true;
    } else if (kw == "where") {
      cur->where = rest;
    } else if (kw == "units") {
      std::istringstream ws(rest);
      std::string u;
      while (ws >> u) cur->units.push_back(u);
    } else if (kw == "atom" || kw == "let" || kw == "mat" || kw == "lhs" || kw == "rhs" || kw == "residual" ||
               kw == "scalar") {
      cur->statements.push_back(line);
    } else {
      fail("unknown keyword '" + kw + "'");
    }
  }
  if (cur) throw SymbolicError("manifest ends inside identity " + cur->id);
  if (!pending.empty()) throw SymbolicError("manifest ends inside a matrix literal");
  return out;
}

std::vector<IdentitySpec> load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SymbolicError("cannot open identity manifest '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_manifest(ss.str());
}

std::string default_manifest_path() {
#ifdef LZETA_DATA_DIR
  return std::string(LZETA_DATA_DIR) + "/identities.manifest";
#else
  return "data/identities.manifest";
#endif
}

std::vector<GridPoint> admissible_grid(const IdentitySpec& spec) {
  std::vector<GridPoint> out;
  for (int n = 1; n <= 4; ++n)
    for (int l = 0; l <= 3; ++l)
      for (int m = 0; m <= 3; ++m)
        for (int j = 0; j <= (spec.uses_j ? 3 : 0); ++j) {
          GridPoint g{n, l, m, j};
          if (!spec.where.empty()) {
            Cursor c(tokenize(spec.where));
            if (!c.int_cond({{"n", n}, {"l", l}, {"m", m}, {"j", j}})) continue;
          }
          out.push_back(g);
        }
  return out;
}

InstanceReport verify_instance(const IdentitySpec& spec, const GridPoint& at) {
  InstanceReport rep;
  rep.at = at;
  Built b;
  try {
    build(spec, at, b);
  } catch (const SymbolicError& e) {
    rep.failures.push_back(std::string("build: ") + e.what());
    return rep;
  }
  Context& x = b.env.ctx;
  if (b.has_lhs && !b.rhs.empty()) {
    SymMat r = b.rhs[0];
    for (std::size_t i = 1; i < b.rhs.size(); ++i) r = x.matmul(r, b.rhs[i]);
    rep.identity_holds = true;
    for (int i = 0; i < 16; ++i) {
      Expr d = x.sub(b.lhs[i], r[i]);
      if (!x.is_zero(d)) {
        rep.identity_holds = false;
        rep.failures.push_back("entry " + cell(i) + " differs by " + x.str(d));
        break;
      }
    }
    std::string why;
    auto mu_l = sym_multiplier(x, b.lhs, spec.unitary, why);
    rep.multiplier_ok = mu_l.has_value();
    if (!mu_l) rep.failures.push_back("left side: " + why);
    Expr mu_r = x.constant(1);
    for (std::size_t i = 0; i < b.rhs.size() && rep.multiplier_ok; ++i) {
      auto mu = sym_multiplier(x, b.rhs[i], spec.unitary, why);
      if (!mu) {
        rep.multiplier_ok = false;
        rep.failures.push_back("right factor " + std::to_string(i + 1) + ": " + why);
      } else {
        mu_r = x.mul(mu_r, *mu);
      }
    }
    if (rep.multiplier_ok && !x.equal(*mu_l, mu_r)) {
      rep.multiplier_ok = false;
      rep.failures.push_back("multipliers differ: " + x.str(*mu_l) + " vs " + x.str(mu_r));
    }
    if (!spec.unitary) {
      for (int i = 0; i < 16; ++i)
        if (!x.alpha_free(b.lhs[i])) {
          rep.identity_holds = false;
          rep.failures.push_back("symplectic identity has alpha in entry " + cell(i));
          break;
        }
    }
    if (b.residual != "none") {
      if (b.residual != "Ksharp_P" && b.residual != "Ksharp_p")
        rep.failures.push_back("unknown residual pattern '" + b.residual + "'");
      Pattern pat = subgroup_pattern(Subgroup::Ksharp_pn, at.n);
      const SymMat& k = b.rhs.back();
      for (int i = 0; i < 16; ++i) {
        int code = pat[i];
        bool good = code == -2 ? x.is_unit(k[i]) : x.pi_valuation(k[i]) >= std::max(code, 0);
        if (!good) {
          rep.pattern_ok = false;
          rep.failures.push_back("residual entry " + cell(i) + " = " + x.str(k[i]) + " violates " +
                                 (code == -2 ? std::string("unit") : "p^" + std::to_string(std::max(code, 0))));
        }
      }
    }
  } else if (b.scalars.empty()) {
    rep.failures.push_back("identity has neither a matrix equation nor a scalar identity");
  }
  for (const auto& [l, r] : b.scalars)
    if (!x.equal(l, r)) {
      rep.scalars_ok = false;
      rep.failures.push_back("scalar identity fails: difference " + x.str(x.sub(l, r)));
    }
  rep.ok = rep.failures.empty() && (b.has_lhs ? rep.identity_holds && rep.multiplier_ok && rep.pattern_ok : true) &&
           rep.scalars_ok;
  return rep;
}

// ================================================================ numeric specialization

namespace {

LocalConfig random_config(std::mt19937_64& rng, int k) {
  i64 p = rng() % 2 ? 5 : 3;
  SplitType t = static_cast<SplitType>(rng() % 3);
  LocalConfig cfg;
  cfg.p = p;
  cfg.k = k;
  cfg.type = t;
  i64 m = cfg.modulus();
  auto unit = [&] {
    for (;;) {
      i64 v = static_cast<i64>(rng() % static_cast<std::uint64_t>(m));
      if (v % p) return v;
    }
  };
  i64 u = unit();
  i64 u2 = mul_mod(u, u, m);
  switch (t) {
    case SplitType::inert: cfg.d = mul_mod(smallest_nonresidue(p), u2, m); break;
    case SplitType::ramified: cfg.d = mul_mod(p, unit(), m); break;
    case SplitType::split: cfg.d = u2; break;
  }
  cfg.c = unit();
  cfg.b = static_cast<i64>(rng() % static_cast<std::uint64_t>(m));
  cfg.a = mul_mod(mod_norm(cfg.b * cfg.b - cfg.d, m), inv_mod(mod_norm(4 * cfg.c, m), m), m);
  validate(cfg);
  return cfg;
}

struct NumEnv {
  const Context* ctx;
  LocalConfig cfg;
  std::vector<QuadExt> vals;
  QuadExt alpha;
  std::vector<std::optional<QuadExt>> atom_inv;
};

QuadExt num_coeff(const mpq_class& c, const LocalConfig& cfg) {
  i64 m = cfg.modulus();
  mpz_class nm = c.get_num() % m, dn = c.get_den() % m;
  i64 a = mod_norm(nm.get_si(), m), d = mod_norm(dn.get_si(), m);
  return QuadExt::from_int(mul_mod(a, inv_mod(d, m), m), cfg);
}

QuadExt eval_poly(const Poly& p, const NumEnv& ne) {
  QuadExt s = QuadExt::from_int(0, ne.cfg);
  for (const auto& [mono, c] : p) {
    QuadExt t = num_coeff(c, ne.cfg);
    for (int v = 0; v < ne.ctx->var_count(); ++v) {
      int e = mono.e[v];
      if (e == 0) continue;
      if (e < 0 && v == Context::kPi) throw PrecisionError("negative power of pi in a specialized entry");
      QuadExt b = e < 0 ? ne.vals[v].inv() : ne.vals[v];
      for (int i = 0; i < std::abs(e); ++i) t = t * b;
    }
    if (mono.alpha) t = t * ne.alpha;
    s += t;
  }
  return s;
}

QuadExt eval_expr(const Expr& x, const NumEnv& ne) {
  QuadExt v = eval_poly(x.num, ne);
  for (const auto& [a, e] : x.den)
    for (int i = 0; i < e; ++i) v = v * *ne.atom_inv.at(a);
  return v;
}

GMatE eval_mat(const SymMat& m, const NumEnv& ne) {
  GMatE g = ext_identity(ne.cfg);
  for (int i = 0; i < 16; ++i) g.e[i] = eval_expr(m[i], ne);
  return g;
}

}  // namespace

NumericReport verify_numeric(const IdentitySpec& spec, int samples, std::uint64_t seed) {
  NumericReport rep;
  std::vector<GridPoint> grid = admissible_grid(spec);
  if (grid.empty()) {
    rep.failures.push_back("no admissible grid point");
    return rep;
  }
  std::mt19937_64 rng(seed);
  // symbolic builds are cached per grid point
  std::map<std::tuple<int, int, int, int>, std::shared_ptr<Built>> cache;
  int guard = 0;
  while (rep.samples < samples) {
    if (++guard > samples * 200) {
      rep.failures.push_back("could not draw unit-valued atoms");
      break;
    }
    GridPoint at = grid[rng() % grid.size()];
    auto key = std::make_tuple(at.n, at.l, at.m, at.j);
    auto& slot = cache[key];
    if (!slot) {
      slot = std::make_shared<Built>();
      build(spec, at, *slot);
    }
    Built& b = *slot;
    Context& x = b.env.ctx;
    for (int i = 0, n = x.atom_count(); i < n; ++i) x.conj_atom(i);
    NumEnv ne{&x, random_config(rng, at.n + 2), {}, {}, {}};
    ne.alpha = make_alpha(ne.cfg);
    i64 mod = ne.cfg.modulus();
    ne.vals.resize(x.var_count());
    for (int v = 0; v < x.var_count(); ++v) {
      i64 val;
      if (v == Context::kPi)
        val = ne.cfg.p;
      else if (v == Context::kA)
        val = ne.cfg.a;
      else if (v == Context::kB)
        val = ne.cfg.b;
      else if (v == Context::kC)
        val = ne.cfg.c;
      else
        do val = static_cast<i64>(rng() % static_cast<std::uint64_t>(mod));
        while (x.is_unit_var(v) && val % ne.cfg.p == 0);
      ne.vals[v] = QuadExt::from_int(val, ne.cfg);
    }
    bool units = true;
    ne.atom_inv.resize(x.atom_count());
    for (int a = 0; a < x.atom_count() && units; ++a) {
      QuadExt v = eval_poly(x.atom_def(a), ne);
      if (!v.is_unit())
        units = false;
      else
        ne.atom_inv[a] = v.inv();
    }
    if (!units) {
      ++rep.resampled;
      continue;
    }
    ++rep.samples;
    std::string where = "n=" + std::to_string(at.n) + " l=" + std::to_string(at.l) + " m=" + std::to_string(at.m) +
                        " j=" + std::to_string(at.j) + " p=" + std::to_string(ne.cfg.p) + " " + to_string(ne.cfg.type);
    try {
      bool good = true;
      for (const auto& [l, r] : b.scalars)
        if (!(eval_expr(l, ne) == eval_expr(r, ne))) good = false;
      if (b.has_lhs) {
        GMatE L = eval_mat(b.lhs, ne);
        GMatE R = eval_mat(b.rhs[0], ne);
        for (std::size_t i = 1; i < b.rhs.size(); ++i) R = R * eval_mat(b.rhs[i], ne);
        if (!(L == R)) good = false;
        if (b.residual != "none") {
          GMatE K = eval_mat(b.rhs.back(), ne);
          if (!member(K, Subgroup::Ksharp_Pn, at.n)) good = false;
          if (b.residual == "Ksharp_p")
            for (const auto& e : K.e)
              if (!e.in_base()) good = false;
        }
        if (!spec.unitary)
          for (const auto& e : L.e)
            if (!e.in_base()) good = false;
      }
      if (good)
        ++rep.passed;
      else if (rep.failures.size() < 5)
        rep.failures.push_back("numeric mismatch at " + where);
    } catch (const std::exception& e) {
      if (rep.failures.size() < 5) rep.failures.push_back("numeric evaluation failed at " + where + ": " + e.what());
    }
  }
  return rep;
}

bool IdentityReport::ok() const {
  if (instances.empty()) return false;
  for (const auto& i : instances)
    if (!i.ok) return false;
  return numeric.ok();
}

IdentityReport verify_identity(const IdentitySpec& spec, int numeric_samples, std::uint64_t seed) {
  IdentityReport rep;
  rep.id = spec.id;
  for (const GridPoint& g : admissible_grid(spec)) rep.instances.push_back(verify_instance(spec, g));
  rep.numeric = verify_numeric(spec, numeric_samples, seed);
  return rep;
}

}  // namespace lzeta::sym
