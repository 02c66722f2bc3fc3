#include "frob/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace frob {
namespace detail {

enum class Kind { Const, Var, Sum, Product, Div, Pow, Log, Exp, Sin, Cos, Abs, Sqrt, Sign, Partial };

struct Node {
  Kind kind = Kind::Const;
  double value = 0.0;           // Const value, or the constant offset of a Sum
  int index = -1;               // Var
  std::vector<Expr> args;       // children (Partial: the base)
  std::vector<double> coeffs;   // Sum: coefficient per child
  std::vector<int> partial_idx; // Partial: sorted derivative indices; args[1] holds the explicit tree
  std::uint64_t vars = 0;
  std::size_t hash = 0;
};

}  // namespace detail

using detail::Kind;
using detail::Node;

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t hash_double(double d) {
  if (d == 0.0) d = 0.0;  // fold -0
  return std::hash<double>{}(d);
}

Expr finish(Node&& n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 1315423911u;
  h = mix(h, hash_double(n.value));
  h = mix(h, static_cast<std::size_t>(n.index + 7));
  std::uint64_t vars = 0;
  if (n.kind == Kind::Var) vars = std::uint64_t{1} << n.index;
  for (std::size_t i = 0; i < n.args.size(); ++i) {
    h = mix(h, n.args[i].hash());
    vars |= n.args[i].variables();
    if (i < n.coeffs.size()) h = mix(h, hash_double(n.coeffs[i]));
  }
  for (int k : n.partial_idx) h = mix(h, static_cast<std::size_t>(k + 101));
  // A partial node is keyed by its base but depends only on the materialized tree.
  if (n.kind == Kind::Partial) vars = n.args[1].variables();
  n.hash = h;
  n.vars = vars;
  return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr make_const(double c) {
  Node n;
  n.kind = Kind::Const;
  n.value = c;
  return finish(std::move(n));
}

const Node& N(const Expr& e) { return *e.node(); }


bool equal_nodes(const Node& a, const Node& b);

bool equal(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return true;
  if (N(a).hash != N(b).hash) return false;
  return equal_nodes(N(a), N(b));
}

bool equal_nodes(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::Const:
      return a.value == b.value;
    case Kind::Var:
      return a.index == b.index;
    case Kind::Partial:
      return a.partial_idx == b.partial_idx && equal(a.args[0], b.args[0]);
    default:
      break;
  }
  if (a.value != b.value || a.args.size() != b.args.size() || a.coeffs != b.coeffs) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!equal(a.args[i], b.args[i])) return false;
  return true;
}

// Canonical order for commutative children: by hash, ties left in insertion order.
bool hash_less(const Expr& a, const Expr& b) { return N(a).hash < N(b).hash; }

Expr make_sum(std::vector<std::pair<double, Expr>> terms, double constant) {
  std::vector<std::pair<double, Expr>> flat;
  for (auto& [c, t] : terms) {
    if (c == 0.0) continue;
    const Node& n = N(t);
    if (n.kind == Kind::Const) {
      constant += c * n.value;
    } else if (n.kind == Kind::Sum) {
      constant += c * n.value;
      for (std::size_t i = 0; i < n.args.size(); ++i) flat.emplace_back(c * n.coeffs[i], n.args[i]);
    } else {
      flat.emplace_back(c, t);
    }
  }
  std::stable_sort(flat.begin(), flat.end(),
                   [](const auto& a, const auto& b) { return hash_less(a.second, b.second); });
  std::vector<std::pair<double, Expr>> merged;
  for (auto& ct : flat) {
    bool done = false;
    for (auto it = merged.rbegin(); it != merged.rend() && N(it->second).hash == N(ct.second).hash; ++it) {
      if (equal(it->second, ct.second)) {
        it->first += ct.first;
        done = true;
        break;
      }
    }
    if (!done) merged.push_back(ct);
  }
  std::vector<std::pair<double, Expr>> kept;
  for (auto& ct : merged)
    if (ct.first != 0.0) kept.push_back(ct);
  if (kept.empty()) return make_const(constant);
  if (kept.size() == 1 && constant == 0.0 && kept[0].first == 1.0) return kept[0].second;
  Node n;
  n.kind = Kind::Sum;
  n.value = constant;
  for (auto& [c, t] : kept) {
    n.coeffs.push_back(c);
    n.args.push_back(t);
  }
  return finish(std::move(n));
}

Expr scale(double c, const Expr& e) { return make_sum({{c, e}}, 0.0); }

Expr make_product(const std::vector<Expr>& factors) {
  double coef = 1.0;
  std::vector<Expr> flat;
  std::function<void(const Expr&)> add = [&](const Expr& f) {
    const Node& n = N(f);
    if (n.kind == Kind::Const) {
      coef *= n.value;
    } else if (n.kind == Kind::Product) {
      for (const auto& g : n.args) add(g);
    } else if (n.kind == Kind::Sum && n.args.size() == 1 && n.value == 0.0) {
      coef *= n.coeffs[0];
      add(n.args[0]);
    } else {
      flat.push_back(f);
    }
  };
  for (const auto& f : factors) add(f);
  if (coef == 0.0) return make_const(0.0);
  if (flat.empty()) return make_const(coef);
  std::stable_sort(flat.begin(), flat.end(), hash_less);
  Expr core;
  if (flat.size() == 1) {
    core = flat[0];
  } else {
    Node n;
    n.kind = Kind::Product;
    n.args = std::move(flat);
    core = finish(std::move(n));
  }
  return coef == 1.0 ? core : scale(coef, core);
}

Expr make_unary(Kind k, const Expr& a) {
  Node n;
  n.kind = k;
  n.args = {a};
  return finish(std::move(n));
}

Expr make_binary(Kind k, const Expr& a, const Expr& b) {
  Node n;
  n.kind = k;
  n.args = {a, b};
  return finish(std::move(n));
}

Expr raw_diff(const Expr& e, int v);

Expr make_partial(const Expr& base, std::vector<int> idx) {
  std::sort(idx.begin(), idx.end());
  Expr m = base;
  for (int k : idx) m = raw_diff(m, k);
  if (m.is_constant()) return m;
  Node n;
  n.kind = Kind::Partial;
  n.args = {base, m};
  n.partial_idx = std::move(idx);
  return finish(std::move(n));
}

Expr raw_diff(const Expr& e, int v) {
  const Node& n = N(e);
  if (!(n.vars >> v & 1u)) return make_const(0.0);
  switch (n.kind) {
    case Kind::Const:
      return make_const(0.0);
    case Kind::Var:
      return make_const(n.index == v ? 1.0 : 0.0);
    case Kind::Partial:
    case Kind::Sum:
      return e.diff(v);
    case Kind::Product: {
      std::vector<std::pair<double, Expr>> terms;
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        Expr d = n.args[i].diff(v);
        if (d.is_zero()) continue;
        std::vector<Expr> fs;
        for (std::size_t j = 0; j < n.args.size(); ++j)
          if (j != i) fs.push_back(n.args[j]);
        fs.push_back(d);
        terms.emplace_back(1.0, make_product(fs));
      }
      return make_sum(std::move(terms), 0.0);
    }
    case Kind::Div: {
      const Expr& a = n.args[0];
      const Expr& b = n.args[1];
      return a.diff(v) / b - a * b.diff(v) / (b * b);
    }
    case Kind::Pow: {
      const Expr& a = n.args[0];
      const Expr& b = n.args[1];
      if (!b.depends_on(v)) return b * pow(a, b - 1.0) * a.diff(v);
      return e * (b.diff(v) * log(a) + b * a.diff(v) / a);
    }
    case Kind::Log:
      return n.args[0].diff(v) / n.args[0];
    case Kind::Exp:
      return e * n.args[0].diff(v);
    case Kind::Sin:
      return cos(n.args[0]) * n.args[0].diff(v);
    case Kind::Cos:
      return -sin(n.args[0]) * n.args[0].diff(v);
    case Kind::Abs:
      return sign(n.args[0]) * n.args[0].diff(v);
    case Kind::Sqrt:
      return n.args[0].diff(v) / (2.0 * e);
    case Kind::Sign:
      return make_const(0.0);
  }
  return make_const(0.0);
}

double eval_node(const Node& n, const double* p) {
  switch (n.kind) {
    case Kind::Const:
      return n.value;
    case Kind::Var:
      return p[n.index];
    case Kind::Sum: {
      double s = n.value;
      for (std::size_t i = 0; i < n.args.size(); ++i) s += n.coeffs[i] * eval_node(N(n.args[i]), p);
      return s;
    }
    case Kind::Product: {
      // A zero factor wins over an infinite one: x·log x is continued by 0 at x=0.
      double prod = 1.0;
      bool zero = false;
      for (const auto& a : n.args) {
        const double v = eval_node(N(a), p);
        if (v == 0.0) zero = true;
        prod *= v;
      }
      return zero ? 0.0 : prod;
    }
    case Kind::Div: {
      const double a = eval_node(N(n.args[0]), p);
      const double b = eval_node(N(n.args[1]), p);
      if (b == 0.0 && a == 0.0) throw DomainError("expression: 0/0");
      return a / b;
    }
    case Kind::Pow: {
      const double a = eval_node(N(n.args[0]), p);
      const double b = eval_node(N(n.args[1]), p);
      if (a < 0.0 && b != std::floor(b)) throw DomainError("expression: negative base with fractional exponent");
      if (a == 0.0) return b > 0 ? 0.0 : (b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
      return std::pow(a, b);
    }
    case Kind::Log: {
      const double a = eval_node(N(n.args[0]), p);
      if (a < 0.0) throw DomainError("expression: log of negative value");
      return a == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(a);
    }
    case Kind::Exp:
      return std::exp(eval_node(N(n.args[0]), p));
    case Kind::Sin:
      return std::sin(eval_node(N(n.args[0]), p));
    case Kind::Cos:
      return std::cos(eval_node(N(n.args[0]), p));
    case Kind::Abs:
      return std::abs(eval_node(N(n.args[0]), p));
    case Kind::Sqrt: {
      const double a = eval_node(N(n.args[0]), p);
      if (a < 0.0) throw DomainError("expression: sqrt of negative value");
      return std::sqrt(a);
    }
    case Kind::Sign: {
      const double a = eval_node(N(n.args[0]), p);
      return a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0);
    }
    case Kind::Partial:
      return eval_node(N(n.args[1]), p);
  }
  return 0.0;
}

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  std::string s = os.str();
  // Prefer the shortest round-tripping representation.
  for (int prec = 1; prec <= 17; ++prec) {
    std::ostringstream t;
    t.precision(prec);
    t << v;
    if (std::stod(t.str()) == v) return t.str();
  }
  return s;
}

int precedence(const Node& n) {
  switch (n.kind) {
    case Kind::Sum:
      if (n.args.size() == 1 && n.value == 0.0) return n.coeffs[0] < 0 ? 1 : 2;
      return 1;
    case Kind::Product:
    case Kind::Div:
      return 2;
    case Kind::Pow:
      return 3;
    case Kind::Const:
      return n.value < 0 ? 1 : 4;
    default:
      return 4;
  }
}

std::string to_str(const Expr& e, const std::vector<std::string>& names);

std::string wrap(const Expr& e, int min_prec, const std::vector<std::string>& names) {
  std::string s = to_str(e, names);
  return precedence(N(e)) < min_prec ? "(" + s + ")" : s;
}

std::string to_str(const Expr& e, const std::vector<std::string>& names) {
  const Node& n = N(e);
  auto fn = [&](const char* f) { return std::string(f) + "(" + to_str(n.args[0], names) + ")"; };
  switch (n.kind) {
    case Kind::Const:
      return fmt_num(n.value);
    case Kind::Var:
      return n.index < static_cast<int>(names.size()) ? names[n.index] : "x" + std::to_string(n.index);
    case Kind::Sum: {
      std::string s;
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        const double c = n.coeffs[i];
        const std::string t = wrap(n.args[i], 2, names);
        if (s.empty()) {
          if (c == 1.0) s = t;
          else if (c == -1.0) s = "-" + t;
          else s = fmt_num(c) + "*" + t;
        } else {
          const double a = std::abs(c);
          s += c < 0 ? " - " : " + ";
          s += a == 1.0 ? t : fmt_num(a) + "*" + t;
        }
      }
      if (n.value != 0.0) s += (n.value < 0 ? " - " : " + ") + fmt_num(std::abs(n.value));
      return s;
    }
    case Kind::Product: {
      std::string s;
      for (const auto& a : n.args) s += (s.empty() ? "" : "*") + wrap(a, 3, names);
      return s;
    }
    case Kind::Div:
      return wrap(n.args[0], 2, names) + "/" + wrap(n.args[1], 3, names);
    case Kind::Pow:
      return wrap(n.args[0], 4, names) + "^" + wrap(n.args[1], 4, names);
    case Kind::Log:
      return fn("log");
    case Kind::Exp:
      return fn("exp");
    case Kind::Sin:
      return fn("sin");
    case Kind::Cos:
      return fn("cos");
    case Kind::Abs:
      return fn("abs");
    case Kind::Sqrt:
      return fn("sqrt");
    case Kind::Sign:
      return fn("sign");
    case Kind::Partial:
      return to_str(n.args[1], names);
  }
  return "?";
}

}  // namespace

Expr::Expr() : Expr(0.0) {}
Expr::Expr(double c) : node_(make_const(c).node_) {}

Expr Expr::var(int index) {
  if (index < 0 || index >= 64) throw DomainError("expression: coordinate index out of range");
  Node n;
  n.kind = Kind::Var;
  n.index = index;
  return finish(std::move(n));
}

double Expr::eval(const double* p) const {
  const double v = eval_node(*node_, p);
  if (std::isnan(v)) throw DomainError("expression: evaluation produced NaN for " + str());
  return v;
}

double Expr::eval(const Vector& p) const { return eval(p.data()); }

Expr Expr::diff(int v) const {
  const Node& n = *node_;
  if (!(n.vars >> v & 1u)) return Expr(0.0);
  switch (n.kind) {
    case Kind::Var:
      return Expr(n.index == v ? 1.0 : 0.0);
    case Kind::Sum: {
      std::vector<std::pair<double, Expr>> terms;
      for (std::size_t i = 0; i < n.args.size(); ++i) terms.emplace_back(n.coeffs[i], n.args[i].diff(v));
      return make_sum(std::move(terms), 0.0);
    }
    case Kind::Partial: {
      std::vector<int> idx = n.partial_idx;
      idx.push_back(v);
      return make_partial(n.args[0], std::move(idx));
    }
    default:
      return make_partial(*this, {v});
  }
}

Vector Expr::gradient(const Vector& p, int dim) const {
  Vector g(dim);
  for (int i = 0; i < dim; ++i) g[i] = diff(i).eval(p);
  return g;
}

bool Expr::is_zero() const { return node_->kind == Kind::Const && node_->value == 0.0; }
bool Expr::is_constant() const { return node_->kind == Kind::Const; }
double Expr::constant_value() const {
  if (!is_constant()) throw DomainError("expression: not a constant");
  return node_->value;
}
bool Expr::depends_on(int index) const { return (node_->vars >> index) & 1u; }
std::uint64_t Expr::variables() const { return node_->vars; }
std::size_t Expr::hash() const { return node_->hash; }
std::string Expr::str(const std::vector<std::string>& names) const { return to_str(*this, names); }
std::string Expr::str() const { return to_str(*this, {}); }

bool structurally_equal(const Expr& a, const Expr& b) { return equal(a, b); }

Expr operator+(const Expr& a, const Expr& b) { return make_sum({{1.0, a}, {1.0, b}}, 0.0); }
Expr operator-(const Expr& a, const Expr& b) { return make_sum({{1.0, a}, {-1.0, b}}, 0.0); }
Expr operator-(const Expr& a) { return scale(-1.0, a); }
Expr operator*(const Expr& a, const Expr& b) { return make_product({a, b}); }

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_zero()) return Expr(0.0);
  if (b.is_constant() && b.constant_value() != 0.0) return scale(1.0 / b.constant_value(), a);
  if (structurally_equal(a, b)) return Expr(1.0);
  return make_binary(Kind::Div, a, b);
}

Expr pow(const Expr& a, const Expr& b) {
  if (b.is_constant()) {
    const double e = b.constant_value();
    if (e == 0.0) return Expr(1.0);
    if (e == 1.0) return a;
    if (a.is_constant()) {
      const double base = a.constant_value();
      if (base > 0.0 || e == std::floor(e)) return Expr(std::pow(base, e));
    }
  }
  return make_binary(Kind::Pow, a, b);
}

namespace {
Expr fold_or(Kind k, const Expr& a, double (*f)(double), bool (*ok)(double)) {
  if (a.is_constant() && ok(a.constant_value())) return Expr(f(a.constant_value()));
  return make_unary(k, a);
}
bool always(double) { return true; }
bool positive(double x) { return x > 0.0; }
bool nonneg(double x) { return x >= 0.0; }
double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }
double fabs_(double x) { return std::abs(x); }
double log_(double x) { return std::log(x); }
double exp_(double x) { return std::exp(x); }
double sin_(double x) { return std::sin(x); }
double cos_(double x) { return std::cos(x); }
double sqrt_(double x) { return std::sqrt(x); }
}  // namespace

Expr log(const Expr& a) { return fold_or(Kind::Log, a, log_, positive); }
Expr exp(const Expr& a) { return fold_or(Kind::Exp, a, exp_, always); }
Expr sin(const Expr& a) { return fold_or(Kind::Sin, a, sin_, always); }
Expr cos(const Expr& a) { return fold_or(Kind::Cos, a, cos_, always); }
Expr abs(const Expr& a) { return fold_or(Kind::Abs, a, fabs_, always); }
Expr sqrt(const Expr& a) { return fold_or(Kind::Sqrt, a, sqrt_, nonneg); }
Expr sign(const Expr& a) { return fold_or(Kind::Sign, a, sgn, always); }

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& names) : s_(text), names_(names) {}

  Expr parse() {
    Expr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) {
      if (s_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("expression: " + msg, line, col);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr e = term();
    while (true) {
      if (accept('+')) e = e + term();
      else if (accept('-')) e = e - term();
      else return e;
    }
  }

  Expr term() {
    Expr e = unary();
    while (true) {
      if (accept('*')) e = e * unary();
      else if (accept('/')) e = e / unary();
      else return e;
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return pow(base, unary());
    return base;
  }

  Expr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    const std::string tok(s_.substr(start, pos_ - start));
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return Expr(v);
    } catch (const std::exception&) {
      pos_ = start;
      fail("malformed number '" + tok + "'");
    }
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string id(s_.substr(start, pos_ - start));
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      static const std::vector<std::pair<std::string, Expr (*)(const Expr&)>> funcs = {
          {"log", &log}, {"ln", &log},   {"exp", &exp},   {"sin", &sin},
          {"cos", &cos}, {"abs", &abs}, {"sqrt", &sqrt}, {"sign", &sign}};
      for (const auto& [name, f] : funcs) {
        if (name == id) {
          ++pos_;
          Expr arg = expr();
          if (!accept(')')) fail("expected ')' after argument of " + id);
          return f(arg);
        }
      }
      pos_ = start;
      fail("unknown function '" + id + "'");
    }
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == id) return Expr::var(static_cast<int>(i));
    if (id == "pi") return Expr(std::numbers::pi);
    pos_ = start;
    fail("unknown identifier '" + id + "'");
  }

  std::string_view s_;
  const std::vector<std::string>& names_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, const std::vector<std::string>& names) {
  return Parser(text, names).parse();
}

ExprVector::ExprVector(std::vector<std::string> names, std::vector<Expr> comps)
    : names_(std::move(names)), comps_(std::move(comps)) {
  jac_.resize(comps_.size());
  for (std::size_t i = 0; i < comps_.size(); ++i)
    for (int j = 0; j < dim(); ++j) jac_[i].push_back(comps_[i].diff(j));
}

Vector ExprVector::eval(const Vector& p) const {
  Vector v(size());
  for (int i = 0; i < size(); ++i) v[i] = comps_[i].eval(p);
  return v;
}

Matrix ExprVector::jacobian(const Vector& p) const {
  Matrix j(size(), dim());
  for (int r = 0; r < size(); ++r)
    for (int c = 0; c < dim(); ++c) j(r, c) = jac_[r][c].eval(p);
  return j;
}

ExprVector parse_vector(const std::vector<std::string>& components, const std::vector<std::string>& names) {
  std::vector<Expr> comps;
  for (const auto& c : components) comps.push_back(parse_expr(c, names));
  return ExprVector(names, std::move(comps));
}

std::vector<std::string> split_names(std::string_view csv) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

}  // namespace frob
