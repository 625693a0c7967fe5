#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hkquad/brick.hpp"
#include "hkquad/errors.hpp"

namespace hk::expr {

/// Comparison operators allowed in piecewise conditions.
enum class CmpOp { lt, le, eq };

enum class BinOp { add, sub, mul, div, pow };

enum class FuncId { sin, cos, exp, ln, sqrt, abs, sign, pow, min, max };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// AST over literals, variables, arithmetic, a fixed function set, piecewise
/// selection on affine conditions, and the domain builtins.
struct Node {
  enum class Kind { number, var, neg, bin, call, piecewise, deriv_osc, dirichlet, step_at };
  Kind kind;

  double number = 0.0;  // number
  int var_index = 0;    // var: 0 = x, 1 = y
  BinOp bin_op = BinOp::add;
  FuncId func = FuncId::sin;
  // piecewise(cond, a, b): children = {cond_lhs, cond_rhs, a, b}
  CmpOp cmp = CmpOp::lt;
  // deriv_osc(p, q): integer parameters of the x^p sin(x^-q) derivative
  int p = 0, q = 0;
  double step_c = 0.0;                   // step_at(c)
  std::vector<double> dirichlet_set;     // sorted member list
  int dirichlet_n = 0;
  std::vector<NodePtr> children;

  double eval(const double* vars) const;
  bool equals(const Node& o) const;
};

struct Expression {
  NodePtr root;
  int max_var = -1;  // highest variable index used (-1: constant)

  double eval1(double x) const {
    double v[2] = {x, 0.0};
    return root->eval(v);
  }
  double eval2(double x, double y) const {
    double v[2] = {x, y};
    return root->eval(v);
  }
  bool operator==(const Expression& o) const { return root->equals(*o.root); }
};

/// Parses with the usual precedence: ^ (right-assoc) binds tighter than
/// unary minus, then * /, then + -. `dimension` (1 or 2) bounds which
/// variables may appear; unbound variables, arity mistakes and lex errors
/// throw ParseError with the source position.
Expression parse_expression(const std::string& src, int dimension = 1);

/// Canonical text form; parse(to_string(e)) reproduces an identical AST.
std::string to_string(const Expression& e);

}  // namespace hk::expr
