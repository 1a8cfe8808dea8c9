#pragma once

// Scalar expressions over (x, y, z): AST, parser, printer, evaluation as
// plain values or as second-order jets, and symbolic differentiation.
//
// Grammar (whitespace is insignificant):
//
//   expr    := term   { ('+' | '-') term }
//   term    := unary  { ('*' | '/') unary }
//   unary   := ('-' | '+') unary | power
//   power   := primary [ '^' unary ]            (right-associative)
//   primary := number | variable | parameter | 'pi'
//            | function '(' expr { ',' expr } ')'
//            | '(' expr ')'
//   number  := digits [ '.' digits ] [ ('e'|'E') ['+'|'-'] digits ]
//   function:= sin | cos | tan | exp | log | ln | sqrt
//            | arcsin | asin | arccos | acos | abs
//
// `-x^2` is `-(x^2)`; `2^-1` is allowed. Every function takes exactly one
// argument; a different count is an arity error.

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gradflow/jet.hpp"
#include "gradflow/types.hpp"

namespace gradflow {

enum class ExprKind { Const, Var, Param, Neg, Add, Sub, Mul, Div, Pow, Call };

enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Arcsin, Arccos, Abs };

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprKind kind = ExprKind::Const;
    double value = 0.0;     // Const
    int var = -1;           // Var: slot index
    std::string name;       // Var / Param
    Func func = Func::Sin;  // Call
    NodePtr lhs;            // unary operand, or left operand
    NodePtr rhs;
};

using VarNames = std::vector<std::string>;

inline const VarNames& xyz_names() {
    static const VarNames names{"x", "y", "z"};
    return names;
}

// Immutable, cheaply copyable handle to an expression tree.
class Expr {
public:
    Expr();  // the constant 0
    explicit Expr(NodePtr root) : root_(std::move(root)) {}

    static Expr constant(double v);
    static Expr variable(int slot, std::string name);
    static Expr parameter(std::string name);

    const ExprNode& node() const { return *root_; }
    const NodePtr& ptr() const { return root_; }

    // Canonical text; parse(to_string()) is structurally equal to *this.
    std::string to_string(const VarNames& vars = xyz_names()) const;

    bool depends_on_variables() const;
    std::optional<double> constant_value() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    NodePtr root_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, const Expr& b);
Expr call(Func f, const Expr& a);

// Parses `src`. Identifiers resolve as variables (by `vars` order), then
// parameters (keys of `params`), then the constant `pi`.
Expr parse_expr(std::string_view src, const ParamMap& params = {},
                const VarNames& vars = xyz_names());

// Symbolic partial derivative with respect to variable slot `var`, with
// light constant folding (no general simplification).
Expr differentiate(const Expr& e, int var);

double eval_value(const Expr& e, std::span<const double> vars, const ParamMap& params = {});
double eval_value(const Expr& e, const Vec3& x, const ParamMap& params = {});

// Value, gradient and Hessian at x, exact to rounding.
Jet2 eval_jet2(const Expr& e, const Vec3& x, const ParamMap& params = {});

// Gradient of e as three expressions.
std::array<Expr, 3> gradient_exprs(const Expr& e);

// A vector field given by three component expressions.
struct FieldDef {
    std::array<Expr, 3> components;
    ParamMap params;

    Vec3 value(const Vec3& x) const;
    std::array<Jet2, 3> jets(const Vec3& x) const;
    // Row i is the gradient of component i.
    Mat3 jacobian(const Vec3& x) const;
};

FieldDef parse_field(std::string_view src1, std::string_view src2, std::string_view src3,
                     const ParamMap& params = {});

// v = grad F, built symbolically.
FieldDef gradient_field(const Expr& potential, const ParamMap& params = {});

} // namespace gradflow
