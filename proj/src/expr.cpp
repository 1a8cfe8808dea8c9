#include "gradflow/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gradflow/errors.hpp"

namespace gradflow {

namespace {

NodePtr make_node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

NodePtr make_const(double v) {
    ExprNode n;
    n.kind = ExprKind::Const;
    n.value = v;
    return make_node(std::move(n));
}

NodePtr make_unary(ExprKind k, NodePtr a) {
    ExprNode n;
    n.kind = k;
    n.lhs = std::move(a);
    return make_node(std::move(n));
}

NodePtr make_binary(ExprKind k, NodePtr a, NodePtr b) {
    ExprNode n;
    n.kind = k;
    n.lhs = std::move(a);
    n.rhs = std::move(b);
    return make_node(std::move(n));
}

NodePtr make_call(Func f, NodePtr a) {
    ExprNode n;
    n.kind = ExprKind::Call;
    n.func = f;
    n.lhs = std::move(a);
    return make_node(std::move(n));
}

struct FuncName {
    std::string_view name;
    Func func;
};

constexpr std::array<FuncName, 12> kFunctions{{
    {"sin", Func::Sin},       {"cos", Func::Cos},       {"tan", Func::Tan},
    {"exp", Func::Exp},       {"log", Func::Log},       {"ln", Func::Log},
    {"sqrt", Func::Sqrt},     {"arcsin", Func::Arcsin}, {"asin", Func::Arcsin},
    {"arccos", Func::Arccos}, {"acos", Func::Arccos},   {"abs", Func::Abs},
}};

std::string_view func_name(Func f) {
    switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    case Func::Arcsin: return "arcsin";
    case Func::Arccos: return "arccos";
    case Func::Abs: return "abs";
    }
    return "?";
}

std::optional<Func> lookup_func(std::string_view name) {
    for (const auto& f : kFunctions)
        if (f.name == name) return f.func;
    return std::nullopt;
}

// ---------------------------------------------------------------- lexer

enum class Tok { End, Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma };

struct Token {
    Tok kind = Tok::End;
    std::size_t offset = 0;
    std::string_view text;
    double number = 0.0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        tok_ = Token{};
        tok_.offset = pos_;
        if (pos_ >= src_.size()) {
            tok_.kind = Tok::End;
            return;
        }
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_ + 1;
            while (end < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
                ++end;
            tok_.kind = Tok::Ident;
            tok_.text = src_.substr(pos_, end - pos_);
            pos_ = end;
            return;
        }
        switch (c) {
        case '+': tok_.kind = Tok::Plus; break;
        case '-': tok_.kind = Tok::Minus; break;
        case '*': tok_.kind = Tok::Star; break;
        case '/': tok_.kind = Tok::Slash; break;
        case '^': tok_.kind = Tok::Caret; break;
        case '(': tok_.kind = Tok::LParen; break;
        case ')': tok_.kind = Tok::RParen; break;
        case ',': tok_.kind = Tok::Comma; break;
        default:
            throw ParseError(std::string("unexpected character '") + c + "'", pos_);
        }
        tok_.text = src_.substr(pos_, 1);
        ++pos_;
    }

    void lex_number() {
        std::size_t end = pos_;
        auto digits = [&] {
            std::size_t start = end;
            while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
            return end - start;
        };
        std::size_t n = digits();
        if (end < src_.size() && src_[end] == '.') {
            ++end;
            n += digits();
        }
        if (n == 0) throw ParseError("malformed number", pos_);
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t save = end;
            ++end;
            if (end < src_.size() && (src_[end] == '+' || src_[end] == '-')) ++end;
            if (digits() == 0) {
                // "2e" followed by something that is not an exponent
                end = save;
            }
        }
        tok_.kind = Tok::Number;
        tok_.text = src_.substr(pos_, end - pos_);
        const auto res = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(),
                                         tok_.number);
        if (res.ec != std::errc() || !std::isfinite(tok_.number))
            throw ParseError("malformed number", pos_);
        pos_ = end;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token tok_;
};

// ---------------------------------------------------------------- parser

class Parser {
public:
    Parser(std::string_view src, const ParamMap& params, const VarNames& vars)
        : lex_(src), params_(params), vars_(vars) {}

    NodePtr parse() {
        NodePtr e = expr();
        if (lex_.peek().kind != Tok::End) fail("unexpected token '" + text(lex_.peek()) + "'");
        return e;
    }

private:
    static std::string text(const Token& t) {
        return t.kind == Tok::End ? std::string("end of input") : std::string(t.text);
    }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, lex_.peek().offset); }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            const Tok k = lex_.peek().kind;
            if (k != Tok::Plus && k != Tok::Minus) return lhs;
            lex_.take();
            lhs = make_binary(k == Tok::Plus ? ExprKind::Add : ExprKind::Sub, lhs, term());
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            const Tok k = lex_.peek().kind;
            if (k != Tok::Star && k != Tok::Slash) return lhs;
            lex_.take();
            lhs = make_binary(k == Tok::Star ? ExprKind::Mul : ExprKind::Div, lhs, unary());
        }
    }

    NodePtr unary() {
        const Tok k = lex_.peek().kind;
        if (k == Tok::Minus) {
            lex_.take();
            return make_unary(ExprKind::Neg, unary());
        }
        if (k == Tok::Plus) {
            lex_.take();
            return unary();
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (lex_.peek().kind == Tok::Caret) {
            lex_.take();
            return make_binary(ExprKind::Pow, base, unary());
        }
        return base;
    }

    NodePtr primary() {
        const Token t = lex_.peek();
        switch (t.kind) {
        case Tok::Number:
            lex_.take();
            return make_const(t.number);
        case Tok::LParen: {
            lex_.take();
            NodePtr e = expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        case Tok::Ident:
            return identifier();
        default:
            fail("expected operand, found " + text(t));
        }
    }

    NodePtr identifier() {
        const Token t = lex_.take();
        const std::string name(t.text);
        if (auto f = lookup_func(name)) {
            if (lex_.peek().kind != Tok::LParen) fail("expected '(' after function '" + name + "'");
            lex_.take();
            std::vector<NodePtr> args{expr()};
            while (lex_.peek().kind == Tok::Comma) {
                lex_.take();
                args.push_back(expr());
            }
            if (lex_.peek().kind != Tok::RParen) fail("expected ')' or ','");
            lex_.take();
            if (args.size() != 1)
                throw ParseError("arity mismatch: '" + name + "' takes 1 argument, got " +
                                     std::to_string(args.size()),
                                 t.offset);
            return make_call(*f, args.front());
        }
        if (lex_.peek().kind == Tok::LParen)
            throw ParseError("unknown function '" + name + "'", t.offset);
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i] == name) {
                ExprNode n;
                n.kind = ExprKind::Var;
                n.var = static_cast<int>(i);
                n.name = name;
                return make_node(std::move(n));
            }
        }
        if (params_.count(name)) {
            ExprNode n;
            n.kind = ExprKind::Param;
            n.name = name;
            return make_node(std::move(n));
        }
        if (name == "pi") return make_const(std::numbers::pi);
        throw ParseError("unknown identifier '" + name + "'", t.offset);
    }

    void expect(Tok k, const char* what) {
        if (lex_.peek().kind != k) fail(std::string("expected ") + what + ", found " + text(lex_.peek()));
        lex_.take();
    }

    Lexer lex_;
    const ParamMap& params_;
    const VarNames& vars_;
};

// ---------------------------------------------------------------- printer

int precedence(const ExprNode& n) {
    switch (n.kind) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    default: return 5;
    }
}

void print(const ExprNode& n, const VarNames& vars, std::string& out);

void print_child(const ExprNode& child, bool parens, const VarNames& vars, std::string& out) {
    if (parens) out += '(';
    print(child, vars, out);
    if (parens) out += ')';
}

void print(const ExprNode& n, const VarNames& vars, std::string& out) {
    switch (n.kind) {
    case ExprKind::Const: {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof buf, n.value);
        out.append(buf, res.ptr);
        return;
    }
    case ExprKind::Var:
        out += (n.var >= 0 && static_cast<std::size_t>(n.var) < vars.size()) ? vars[n.var] : n.name;
        return;
    case ExprKind::Param:
        out += n.name;
        return;
    case ExprKind::Neg:
        out += '-';
        print_child(*n.lhs, precedence(*n.lhs) < 3, vars, out);
        return;
    case ExprKind::Call:
        out += func_name(n.func);
        out += '(';
        print(*n.lhs, vars, out);
        out += ')';
        return;
    case ExprKind::Pow:
        print_child(*n.lhs, precedence(*n.lhs) <= 4, vars, out);
        out += '^';
        print_child(*n.rhs, precedence(*n.rhs) < 3, vars, out);
        return;
    default: break;
    }
    const int p = precedence(n);
    const char* op = n.kind == ExprKind::Add   ? " + "
                     : n.kind == ExprKind::Sub ? " - "
                     : n.kind == ExprKind::Mul ? "*"
                                               : "/";
    print_child(*n.lhs, precedence(*n.lhs) < p, vars, out);
    out += op;
    print_child(*n.rhs, precedence(*n.rhs) <= p, vars, out);
}

bool equal(const ExprNode& a, const ExprNode& b) {
    if (&a == &b) return true;
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case ExprKind::Const: return a.value == b.value;
    case ExprKind::Var: return a.var == b.var;
    case ExprKind::Param: return a.name == b.name;
    case ExprKind::Neg: return equal(*a.lhs, *b.lhs);
    case ExprKind::Call: return a.func == b.func && equal(*a.lhs, *b.lhs);
    default: return equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
    }
}

bool has_vars(const ExprNode& n) {
    switch (n.kind) {
    case ExprKind::Var: return true;
    case ExprKind::Const:
    case ExprKind::Param: return false;
    case ExprKind::Neg:
    case ExprKind::Call: return has_vars(*n.lhs);
    default: return has_vars(*n.lhs) || has_vars(*n.rhs);
    }
}

// ---------------------------------------------------------------- evaluation

inline double value_of(double v) { return v; }
inline double value_of(const Jet2& j) { return j.value; }

template <class T>
T integer_power(const T& base, long long n) {
    if (n < 0) return T(1.0) / integer_power(base, -n);
    T result(1.0);
    T b = base;
    while (n > 0) {
        if (n & 1) result = result * b;
        n >>= 1;
        if (n > 0) b = b * b;
    }
    return result;
}

template <class T>
class Evaluator {
public:
    Evaluator(std::span<const T> vars, const ParamMap& params) : vars_(vars), params_(params) {}

    T eval(const ExprNode& n) const {
        T r = eval_raw(n);
        if (!std::isfinite(value_of(r))) domain(n, "non-finite result");
        return r;
    }

private:
    [[noreturn]] void domain(const ExprNode& n, const std::string& why) const {
        std::ostringstream os;
        os << "domain error in '" << Expr(std::make_shared<const ExprNode>(n)).to_string()
           << "' at (";
        for (std::size_t i = 0; i < vars_.size(); ++i)
            os << (i ? ", " : "") << value_of(vars_[i]);
        os << "): " << why;
        throw DomainError(os.str());
    }

    T eval_raw(const ExprNode& n) const {
        switch (n.kind) {
        case ExprKind::Const: return T(n.value);
        case ExprKind::Var:
            if (n.var < 0 || static_cast<std::size_t>(n.var) >= vars_.size())
                domain(n, "variable out of range");
            return vars_[n.var];
        case ExprKind::Param: {
            auto it = params_.find(n.name);
            if (it == params_.end()) domain(n, "unbound parameter '" + n.name + "'");
            return T(it->second);
        }
        case ExprKind::Neg: return -eval(*n.lhs);
        case ExprKind::Add: return eval(*n.lhs) + eval(*n.rhs);
        case ExprKind::Sub: return eval(*n.lhs) - eval(*n.rhs);
        case ExprKind::Mul: return eval(*n.lhs) * eval(*n.rhs);
        case ExprKind::Div: {
            const T den = eval(*n.rhs);
            if (value_of(den) == 0.0) domain(n, "division by zero");
            return eval(*n.lhs) / den;
        }
        case ExprKind::Pow: return power(n);
        case ExprKind::Call: return call(n);
        }
        domain(n, "unknown node");
    }

    T power(const ExprNode& n) const {
        const T base = eval(*n.lhs);
        const T ex = eval(*n.rhs);
        const double b = value_of(base);
        const double p = value_of(ex);
        const bool const_exponent = !has_vars(*n.rhs);
        if (const_exponent && p == std::trunc(p) && std::abs(p) < 1e9) {
            if (b == 0.0 && p < 0) domain(n, "zero to a negative power");
            return integer_power(base, static_cast<long long>(p));
        }
        if constexpr (std::is_same_v<T, double>) {
            if (b < 0.0) domain(n, "negative base with non-integer exponent");
            return std::pow(b, p);
        } else {
            if (b <= 0.0) domain(n, "non-positive base with non-integer exponent");
            if (const_exponent) return gradflow::pow(base, p);
            return gradflow::exp(ex * gradflow::log(base));
        }
    }

    T call(const ExprNode& n) const {
        const T a = eval(*n.lhs);
        const double v = value_of(a);
        constexpr bool jet = !std::is_same_v<T, double>;
        using std::abs, std::acos, std::asin, std::cos, std::exp, std::log, std::sin, std::sqrt,
            std::tan;
        using gradflow::abs, gradflow::acos, gradflow::asin, gradflow::cos, gradflow::exp,
            gradflow::log, gradflow::sin, gradflow::sqrt, gradflow::tan;
        switch (n.func) {
        case Func::Sin: return sin(a);
        case Func::Cos: return cos(a);
        case Func::Tan:
            if (std::cos(v) == 0.0) domain(n, "tan at a pole");
            return tan(a);
        case Func::Exp: return exp(a);
        case Func::Log:
            if (v <= 0.0) domain(n, "log of non-positive argument");
            return log(a);
        case Func::Sqrt:
            if (v < 0.0 || (jet && v == 0.0)) domain(n, "sqrt of non-positive argument");
            return sqrt(a);
        case Func::Arcsin:
            if (std::abs(v) > 1.0 || (jet && std::abs(v) == 1.0)) domain(n, "arcsin outside (-1, 1)");
            return asin(a);
        case Func::Arccos:
            if (std::abs(v) > 1.0 || (jet && std::abs(v) == 1.0)) domain(n, "arccos outside (-1, 1)");
            return acos(a);
        case Func::Abs:
            if (jet && v == 0.0) domain(n, "abs is not differentiable at 0");
            return abs(a);
        }
        domain(n, "unknown function");
    }

    std::span<const T> vars_;
    const ParamMap& params_;
};

// ---------------------------------------------------------------- folding

std::optional<double> const_of(const NodePtr& n) {
    if (n->kind == ExprKind::Const) return n->value;
    if (n->kind == ExprKind::Neg && n->lhs->kind == ExprKind::Const) return -n->lhs->value;
    return std::nullopt;
}

bool is_value(const NodePtr& n, double v) {
    auto c = const_of(n);
    return c && *c == v;
}

} // namespace

// ---------------------------------------------------------------- Expr

Expr::Expr() : root_(make_const(0.0)) {}

Expr Expr::constant(double v) {
    // Negative literals are represented as negation so printing round-trips.
    if (v < 0.0 || (v == 0.0 && std::signbit(v))) return Expr(make_unary(ExprKind::Neg, make_const(-v)));
    return Expr(make_const(v));
}

Expr Expr::variable(int slot, std::string name) {
    ExprNode n;
    n.kind = ExprKind::Var;
    n.var = slot;
    n.name = std::move(name);
    return Expr(make_node(std::move(n)));
}

Expr Expr::parameter(std::string name) {
    ExprNode n;
    n.kind = ExprKind::Param;
    n.name = std::move(name);
    return Expr(make_node(std::move(n)));
}

std::string Expr::to_string(const VarNames& vars) const {
    std::string out;
    print(*root_, vars, out);
    return out;
}

bool Expr::depends_on_variables() const { return has_vars(*root_); }

std::optional<double> Expr::constant_value() const { return const_of(root_); }

bool operator==(const Expr& a, const Expr& b) { return equal(*a.root_, *b.root_); }

Expr operator+(const Expr& a, const Expr& b) {
    auto ca = a.constant_value(), cb = b.constant_value();
    if (ca && cb) return Expr::constant(*ca + *cb);
    if (ca && *ca == 0.0) return b;
    if (cb && *cb == 0.0) return a;
    return Expr(make_binary(ExprKind::Add, a.ptr(), b.ptr()));
}

Expr operator-(const Expr& a, const Expr& b) {
    auto ca = a.constant_value(), cb = b.constant_value();
    if (ca && cb) return Expr::constant(*ca - *cb);
    if (cb && *cb == 0.0) return a;
    if (ca && *ca == 0.0) return -b;
    return Expr(make_binary(ExprKind::Sub, a.ptr(), b.ptr()));
}

Expr operator*(const Expr& a, const Expr& b) {
    auto ca = a.constant_value(), cb = b.constant_value();
    if (ca && cb) return Expr::constant(*ca * *cb);
    if ((ca && *ca == 0.0) || (cb && *cb == 0.0)) return Expr::constant(0.0);
    if (ca && *ca == 1.0) return b;
    if (cb && *cb == 1.0) return a;
    if (ca && *ca == -1.0) return -b;
    if (cb && *cb == -1.0) return -a;
    return Expr(make_binary(ExprKind::Mul, a.ptr(), b.ptr()));
}

Expr operator/(const Expr& a, const Expr& b) {
    auto ca = a.constant_value(), cb = b.constant_value();
    if (ca && *ca == 0.0) return Expr::constant(0.0);
    if (cb && *cb == 1.0) return a;
    if (ca && cb && *cb != 0.0) return Expr::constant(*ca / *cb);
    return Expr(make_binary(ExprKind::Div, a.ptr(), b.ptr()));
}

Expr operator-(const Expr& a) {
    if (auto c = a.constant_value()) return Expr::constant(-*c);
    if (a.node().kind == ExprKind::Neg) return Expr(a.node().lhs);
    return Expr(make_unary(ExprKind::Neg, a.ptr()));
}

Expr pow(const Expr& a, const Expr& b) {
    auto cb = b.constant_value();
    if (cb && *cb == 1.0) return a;
    if (cb && *cb == 0.0) return Expr::constant(1.0);
    return Expr(make_binary(ExprKind::Pow, a.ptr(), b.ptr()));
}

Expr call(Func f, const Expr& a) { return Expr(make_call(f, a.ptr())); }

Expr parse_expr(std::string_view src, const ParamMap& params, const VarNames& vars) {
    Parser p(src, params, vars);
    return Expr(p.parse());
}

Expr differentiate(const Expr& e, int var) {
    const ExprNode& n = e.node();
    const auto d = [var](const NodePtr& p) { return differentiate(Expr(p), var); };
    switch (n.kind) {
    case ExprKind::Const:
    case ExprKind::Param: return Expr::constant(0.0);
    case ExprKind::Var: return Expr::constant(n.var == var ? 1.0 : 0.0);
    case ExprKind::Neg: return -d(n.lhs);
    case ExprKind::Add: return d(n.lhs) + d(n.rhs);
    case ExprKind::Sub: return d(n.lhs) - d(n.rhs);
    case ExprKind::Mul: {
        const Expr a(n.lhs), b(n.rhs);
        return d(n.lhs) * b + a * d(n.rhs);
    }
    case ExprKind::Div: {
        const Expr a(n.lhs), b(n.rhs);
        return d(n.lhs) / b - a * d(n.rhs) / (b * b);
    }
    case ExprKind::Pow: {
        const Expr a(n.lhs), b(n.rhs);
        if (!b.depends_on_variables()) return b * pow(a, b - Expr::constant(1.0)) * d(n.lhs);
        return e * (d(n.rhs) * call(Func::Log, a) + b * d(n.lhs) / a);
    }
    case ExprKind::Call: {
        const Expr a(n.lhs);
        const Expr da = d(n.lhs);
        if (auto c = da.constant_value(); c && *c == 0.0) return Expr::constant(0.0);
        const Expr one = Expr::constant(1.0);
        switch (n.func) {
        case Func::Sin: return call(Func::Cos, a) * da;
        case Func::Cos: return -(call(Func::Sin, a) * da);
        case Func::Tan: return (one + pow(e, Expr::constant(2.0))) * da;
        case Func::Exp: return e * da;
        case Func::Log: return da / a;
        case Func::Sqrt: return da / (Expr::constant(2.0) * e);
        case Func::Arcsin: return da / call(Func::Sqrt, one - pow(a, Expr::constant(2.0)));
        case Func::Arccos: return -(da / call(Func::Sqrt, one - pow(a, Expr::constant(2.0))));
        case Func::Abs: return a / e * da;
        }
    }
    }
    throw Error("differentiate: unknown node");
}

double eval_value(const Expr& e, std::span<const double> vars, const ParamMap& params) {
    return Evaluator<double>(vars, params).eval(e.node());
}

double eval_value(const Expr& e, const Vec3& x, const ParamMap& params) {
    const std::array<double, 3> v{x[0], x[1], x[2]};
    return eval_value(e, std::span<const double>(v), params);
}

Jet2 eval_jet2(const Expr& e, const Vec3& x, const ParamMap& params) {
    const std::array<Jet2, 3> v{Jet2::variable(0, x[0]), Jet2::variable(1, x[1]),
                                Jet2::variable(2, x[2])};
    Jet2 r = Evaluator<Jet2>(std::span<const Jet2>(v), params).eval(e.node());
    // Mirror the upper triangle so the Hessian is exactly symmetric.
    r.hess = 0.5 * (r.hess + r.hess.transpose()).eval();
    return r;
}

std::array<Expr, 3> gradient_exprs(const Expr& e) {
    return {differentiate(e, 0), differentiate(e, 1), differentiate(e, 2)};
}

Vec3 FieldDef::value(const Vec3& x) const {
    return {eval_value(components[0], x, params), eval_value(components[1], x, params),
            eval_value(components[2], x, params)};
}

std::array<Jet2, 3> FieldDef::jets(const Vec3& x) const {
    return {eval_jet2(components[0], x, params), eval_jet2(components[1], x, params),
            eval_jet2(components[2], x, params)};
}

Mat3 FieldDef::jacobian(const Vec3& x) const {
    const auto j = jets(x);
    Mat3 m;
    for (int i = 0; i < 3; ++i) m.row(i) = j[i].grad.transpose();
    return m;
}

FieldDef parse_field(std::string_view src1, std::string_view src2, std::string_view src3,
                     const ParamMap& params) {
    return FieldDef{{parse_expr(src1, params), parse_expr(src2, params), parse_expr(src3, params)},
                    params};
}

FieldDef gradient_field(const Expr& potential, const ParamMap& params) {
    return FieldDef{gradient_exprs(potential), params};
}

} // namespace gradflow
