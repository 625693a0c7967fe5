#include "hkquad/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>

#include "hkquad/gauge.hpp"  // rational_sequence

namespace hk::expr {

namespace {

double sign_of(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

double deriv_osc_value(int p, int q, double x) {
  // d/dx of x^p sin(x^-q), extended by 0 at x = 0.
  if (x == 0.0) return 0.0;
  double xq = std::pow(x, -q);
  return p * std::pow(x, p - 1) * std::sin(xq) -
         q * std::pow(x, p - q - 1) * std::cos(xq);
}

}  // namespace

double Node::eval(const double* vars) const {
  switch (kind) {
    case Kind::number:
      return number;
    case Kind::var:
      return vars[var_index];
    case Kind::neg:
      return -children[0]->eval(vars);
    case Kind::bin: {
      double a = children[0]->eval(vars);
      double b = children[1]->eval(vars);
      switch (bin_op) {
        case BinOp::add: return a + b;
        case BinOp::sub: return a - b;
        case BinOp::mul: return a * b;
        case BinOp::div: return a / b;
        case BinOp::pow: return std::pow(a, b);
      }
      return 0.0;
    }
    case Kind::call: {
      double a = children[0]->eval(vars);
      switch (func) {
        case FuncId::sin: return std::sin(a);
        case FuncId::cos: return std::cos(a);
        case FuncId::exp: return std::exp(a);
        case FuncId::ln: return std::log(a);
        case FuncId::sqrt: return std::sqrt(a);
        case FuncId::abs: return std::abs(a);
        case FuncId::sign: return sign_of(a);
        case FuncId::pow: return std::pow(a, children[1]->eval(vars));
        case FuncId::min: return std::min(a, children[1]->eval(vars));
        case FuncId::max: return std::max(a, children[1]->eval(vars));
      }
      return 0.0;
    }
    case Kind::piecewise: {
      double l = children[0]->eval(vars);
      double r = children[1]->eval(vars);
      bool cond = false;
      switch (cmp) {
        case CmpOp::lt: cond = l < r; break;
        case CmpOp::le: cond = l <= r; break;
        case CmpOp::eq: cond = l == r; break;  // exact, for constructed cut points
      }
      return cond ? children[2]->eval(vars) : children[3]->eval(vars);
    }
    case Kind::deriv_osc:
      return deriv_osc_value(p, q, vars[0]);
    case Kind::dirichlet:
      return std::binary_search(dirichlet_set.begin(), dirichlet_set.end(), vars[0]) ? 1.0
                                                                                     : 0.0;
    case Kind::step_at:
      return vars[0] >= step_c ? 1.0 : 0.0;
  }
  return 0.0;
}

bool Node::equals(const Node& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::number:
      return number == o.number;
    case Kind::var:
      return var_index == o.var_index;
    case Kind::bin:
      if (bin_op != o.bin_op) return false;
      break;
    case Kind::call:
      if (func != o.func) return false;
      break;
    case Kind::piecewise:
      if (cmp != o.cmp) return false;
      break;
    case Kind::deriv_osc:
      return p == o.p && q == o.q;
    case Kind::dirichlet:
      return dirichlet_n == o.dirichlet_n;
    case Kind::step_at:
      return step_c == o.step_c;
    case Kind::neg:
      break;
  }
  if (children.size() != o.children.size()) return false;
  for (std::size_t i = 0; i < children.size(); ++i)
    if (!children[i]->equals(*o.children[i])) return false;
  return true;
}

namespace {

enum class Tok { end, number, name, plus, minus, star, slash, caret, lparen, rparen, comma,
                 lt, le, eq };

struct Lexer {
  const std::string& src;
  std::size_t pos = 0;
  Tok tok = Tok::end;
  double num = 0.0;
  std::string name;
  std::size_t tok_pos = 0;

  explicit Lexer(const std::string& s) : src(s) { advance(); }

  void advance() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    tok_pos = pos;
    if (pos >= src.size()) {
      tok = Tok::end;
      return;
    }
    char c = src[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      num = std::strtod(src.c_str() + pos, &end);
      if (end == src.c_str() + pos) throw ParseError("bad number", pos);
      pos = static_cast<std::size_t>(end - src.c_str());
      tok = Tok::number;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos;
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
        ++pos;
      name = src.substr(start, pos - start);
      tok = Tok::name;
      return;
    }
    ++pos;
    switch (c) {
      case '+': tok = Tok::plus; return;
      case '-': tok = Tok::minus; return;
      case '*': tok = Tok::star; return;
      case '/': tok = Tok::slash; return;
      case '^': tok = Tok::caret; return;
      case '(': tok = Tok::lparen; return;
      case ')': tok = Tok::rparen; return;
      case ',': tok = Tok::comma; return;
      case '=': tok = Tok::eq; return;
      case '<':
        if (pos < src.size() && src[pos] == '=') {
          ++pos;
          tok = Tok::le;
        } else {
          tok = Tok::lt;
        }
        return;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", pos - 1);
    }
  }
};

struct Parser {
  Lexer lex;
  int dimension;

  Parser(const std::string& s, int dim) : lex(s), dimension(dim) {}

  NodePtr make(Node n) { return std::make_shared<Node>(std::move(n)); }

  void expect(Tok t, const char* what) {
    if (lex.tok != t) throw ParseError(std::string("expected ") + what, lex.tok_pos);
    lex.advance();
  }

  NodePtr parse_sum() {
    NodePtr left = parse_term();
    for (;;) {
      if (lex.tok == Tok::plus) {
        lex.advance();
        Node n{Node::Kind::bin};
        n.bin_op = BinOp::add;
        n.children = {left, parse_term()};
        left = make(std::move(n));
      } else if (lex.tok == Tok::minus) {
        lex.advance();
        Node n{Node::Kind::bin};
        n.bin_op = BinOp::sub;
        n.children = {left, parse_term()};
        left = make(std::move(n));
      } else {
        return left;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr left = parse_unary();
    for (;;) {
      if (lex.tok == Tok::star) {
        lex.advance();
        Node n{Node::Kind::bin};
        n.bin_op = BinOp::mul;
        n.children = {left, parse_unary()};
        left = make(std::move(n));
      } else if (lex.tok == Tok::slash) {
        lex.advance();
        Node n{Node::Kind::bin};
        n.bin_op = BinOp::div;
        n.children = {left, parse_unary()};
        left = make(std::move(n));
      } else {
        return left;
      }
    }
  }

  NodePtr parse_unary() {
    if (lex.tok == Tok::minus) {
      lex.advance();
      Node n{Node::Kind::neg};
      n.children = {parse_unary()};
      return make(std::move(n));
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (lex.tok == Tok::caret) {
      lex.advance();
      // Right-associative and tighter than unary minus: 2^3^2 = 512,
      // -x^2 = -(x^2). The exponent may carry its own unary minus.
      NodePtr exp = (lex.tok == Tok::minus) ? parse_unary() : parse_power();
      Node n{Node::Kind::bin};
      n.bin_op = BinOp::pow;
      n.children = {base, exp};
      return make(std::move(n));
    }
    return base;
  }

  double const_value(const NodePtr& n, std::size_t at) {
    if (n->kind == Node::Kind::number) return n->number;
    if (n->kind == Node::Kind::neg && n->children[0]->kind == Node::Kind::number)
      return -n->children[0]->number;
    throw ParseError("expected a numeric literal argument", at);
  }

  bool is_affine(const NodePtr& n) {
    switch (n->kind) {
      case Node::Kind::number:
      case Node::Kind::var:
        return true;
      case Node::Kind::neg:
        return is_affine(n->children[0]);
      case Node::Kind::bin:
        switch (n->bin_op) {
          case BinOp::add:
          case BinOp::sub:
            return is_affine(n->children[0]) && is_affine(n->children[1]);
          case BinOp::mul:
            return (n->children[0]->kind == Node::Kind::number && is_affine(n->children[1])) ||
                   (n->children[1]->kind == Node::Kind::number && is_affine(n->children[0]));
          case BinOp::div:
            return is_affine(n->children[0]) && n->children[1]->kind == Node::Kind::number;
          default:
            return false;
        }
      default:
        return false;
    }
  }

  NodePtr parse_piecewise(std::size_t at) {
    expect(Tok::lparen, "'('");
    NodePtr lhs = parse_sum();
    CmpOp op;
    if (lex.tok == Tok::lt)
      op = CmpOp::lt;
    else if (lex.tok == Tok::le)
      op = CmpOp::le;
    else if (lex.tok == Tok::eq)
      op = CmpOp::eq;
    else
      throw ParseError("piecewise condition needs <, <= or =", lex.tok_pos);
    lex.advance();
    NodePtr rhs = parse_sum();
    if (!is_affine(lhs) || !is_affine(rhs))
      throw ParseError("piecewise condition arguments must be affine", at);
    expect(Tok::comma, "','");
    NodePtr a = parse_sum();
    expect(Tok::comma, "','");
    NodePtr b = parse_sum();
    expect(Tok::rparen, "')'");
    Node n{Node::Kind::piecewise};
    n.cmp = op;
    n.children = {lhs, rhs, a, b};
    return make(std::move(n));
  }

  NodePtr parse_call(const std::string& name, std::size_t at) {
    static const std::pair<const char*, std::pair<FuncId, int>> table[] = {
        {"sin", {FuncId::sin, 1}},   {"cos", {FuncId::cos, 1}},
        {"exp", {FuncId::exp, 1}},   {"ln", {FuncId::ln, 1}},
        {"sqrt", {FuncId::sqrt, 1}}, {"abs", {FuncId::abs, 1}},
        {"sign", {FuncId::sign, 1}}, {"pow", {FuncId::pow, 2}},
        {"min", {FuncId::min, 2}},   {"max", {FuncId::max, 2}},
    };
    if (name == "piecewise") return parse_piecewise(at);
    if (name == "deriv_osc") {
      expect(Tok::lparen, "'('");
      NodePtr pa = parse_sum();
      expect(Tok::comma, "','");
      NodePtr qa = parse_sum();
      expect(Tok::rparen, "')'");
      Node n{Node::Kind::deriv_osc};
      double pv = const_value(pa, at), qv = const_value(qa, at);
      n.p = static_cast<int>(pv);
      n.q = static_cast<int>(qv);
      if (n.p != pv || n.q != qv || n.p < 1 || n.q < 1)
        throw ParseError("deriv_osc needs positive integer parameters", at);
      return make(std::move(n));
    }
    if (name == "dirichlet") {
      expect(Tok::lparen, "'('");
      NodePtr na = parse_sum();
      expect(Tok::rparen, "')'");
      double nv = const_value(na, at);
      Node n{Node::Kind::dirichlet};
      n.dirichlet_n = static_cast<int>(nv);
      if (n.dirichlet_n != nv || n.dirichlet_n < 1)
        throw ParseError("dirichlet needs a positive integer count", at);
      n.dirichlet_set = rational_sequence(static_cast<std::size_t>(n.dirichlet_n));
      std::sort(n.dirichlet_set.begin(), n.dirichlet_set.end());
      return make(std::move(n));
    }
    if (name == "step_at") {
      expect(Tok::lparen, "'('");
      NodePtr ca = parse_sum();
      expect(Tok::rparen, "')'");
      Node n{Node::Kind::step_at};
      n.step_c = const_value(ca, at);
      return make(std::move(n));
    }
    for (const auto& [fname, info] : table) {
      if (name != fname) continue;
      expect(Tok::lparen, "'('");
      Node n{Node::Kind::call};
      n.func = info.first;
      n.children.push_back(parse_sum());
      for (int i = 1; i < info.second; ++i) {
        expect(Tok::comma, "','");
        n.children.push_back(parse_sum());
      }
      if (lex.tok == Tok::comma)
        throw ParseError(name + " takes " + std::to_string(info.second) + " argument(s)",
                         lex.tok_pos);
      expect(Tok::rparen, "')'");
      return make(std::move(n));
    }
    throw ParseError("unknown function '" + name + "'", at);
  }

  NodePtr parse_atom() {
    std::size_t at = lex.tok_pos;
    if (lex.tok == Tok::number) {
      Node n{Node::Kind::number};
      n.number = lex.num;
      lex.advance();
      return make(std::move(n));
    }
    if (lex.tok == Tok::lparen) {
      lex.advance();
      NodePtr inner = parse_sum();
      expect(Tok::rparen, "')'");
      return inner;
    }
    if (lex.tok == Tok::name) {
      std::string name = lex.name;
      lex.advance();
      if (lex.tok == Tok::lparen || name == "piecewise" || name == "deriv_osc" ||
          name == "dirichlet" || name == "step_at") {
        if (name == "x" || name == "y") throw ParseError("variable used as function", at);
        return parse_call(name, at);
      }
      if (name == "x" || name == "y") {
        int idx = name == "x" ? 0 : 1;
        if (idx >= dimension)
          throw ParseError("variable '" + name + "' unbound in dimension " +
                               std::to_string(dimension),
                           at);
        Node n{Node::Kind::var};
        n.var_index = idx;
        return make(std::move(n));
      }
      if (name == "pi") {
        Node n{Node::Kind::number};
        n.number = 3.14159265358979323846;
        return make(std::move(n));
      }
      throw ParseError("unknown name '" + name + "'", at);
    }
    throw ParseError("expected an expression", at);
  }
};

int max_var_of(const NodePtr& n) {
  int m = n->kind == Node::Kind::var ? n->var_index : -1;
  if (n->kind == Node::Kind::deriv_osc || n->kind == Node::Kind::dirichlet ||
      n->kind == Node::Kind::step_at)
    m = std::max(m, 0);
  for (const auto& c : n->children) m = std::max(m, max_var_of(c));
  return m;
}

void print(const NodePtr& n, std::ostringstream& os) {
  switch (n->kind) {
    case Node::Kind::number: {
      os.precision(17);
      os << n->number;
      return;
    }
    case Node::Kind::var:
      os << (n->var_index == 0 ? "x" : "y");
      return;
    case Node::Kind::neg:
      os << "(-";
      print(n->children[0], os);
      os << ")";
      return;
    case Node::Kind::bin: {
      const char* op = n->bin_op == BinOp::add   ? " + "
                       : n->bin_op == BinOp::sub ? " - "
                       : n->bin_op == BinOp::mul ? " * "
                       : n->bin_op == BinOp::div ? " / "
                                                 : "^";
      os << "(";
      print(n->children[0], os);
      os << op;
      print(n->children[1], os);
      os << ")";
      return;
    }
    case Node::Kind::call: {
      const char* f = nullptr;
      switch (n->func) {
        case FuncId::sin: f = "sin"; break;
        case FuncId::cos: f = "cos"; break;
        case FuncId::exp: f = "exp"; break;
        case FuncId::ln: f = "ln"; break;
        case FuncId::sqrt: f = "sqrt"; break;
        case FuncId::abs: f = "abs"; break;
        case FuncId::sign: f = "sign"; break;
        case FuncId::pow: f = "pow"; break;
        case FuncId::min: f = "min"; break;
        case FuncId::max: f = "max"; break;
      }
      os << f << "(";
      for (std::size_t i = 0; i < n->children.size(); ++i) {
        if (i) os << ", ";
        print(n->children[i], os);
      }
      os << ")";
      return;
    }
    case Node::Kind::piecewise: {
      os << "piecewise(";
      print(n->children[0], os);
      os << (n->cmp == CmpOp::lt ? " < " : n->cmp == CmpOp::le ? " <= " : " = ");
      print(n->children[1], os);
      os << ", ";
      print(n->children[2], os);
      os << ", ";
      print(n->children[3], os);
      os << ")";
      return;
    }
    case Node::Kind::deriv_osc:
      os << "deriv_osc(" << n->p << ", " << n->q << ")";
      return;
    case Node::Kind::dirichlet:
      os << "dirichlet(" << n->dirichlet_n << ")";
      return;
    case Node::Kind::step_at: {
      os.precision(17);
      os << "step_at(" << n->step_c << ")";
      return;
    }
  }
}

}  // namespace

Expression parse_expression(const std::string& src, int dimension) {
  if (dimension < 1 || dimension > 2)
    throw DomainError("parse_expression: dimension must be 1 or 2");
  Parser p(src, dimension);
  Expression e;
  e.root = p.parse_sum();
  if (p.lex.tok != Tok::end)
    throw ParseError("unexpected trailing input", p.lex.tok_pos);
  e.max_var = max_var_of(e.root);
  return e;
}

std::string to_string(const Expression& e) {
  std::ostringstream os;
  print(e.root, os);
  return os.str();
}

}  // namespace hk::expr
