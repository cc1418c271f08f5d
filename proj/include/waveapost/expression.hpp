#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace waveapost {

class ExpressionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Arithmetic expression in x, y, t with + - * / ^, unary minus, the constants
/// pi and e, and the functions sin cos tan exp log sqrt.
///
/// Evaluation is templated on the scalar so the same expression can be
/// differentiated with Jet numbers.
class Expression {
public:
    /// The constant 0.
    Expression() : text_("0"), nodes_(1), root_(0) {}
    static Expression parse(const std::string& text);

    const std::string& text() const { return text_; }
    /// True if the variable ('x', 'y' or 't') occurs.
    bool depends_on(char var) const;
    bool is_constant() const { return !depends_on('x') && !depends_on('y') && !depends_on('t'); }

    template <typename S>
    S eval(const S& x, const S& y, const S& t) const {
        const S vars[3] = {x, y, t};
        return eval_node(root_, vars);
    }
    double operator()(double x, double y = 0.0, double t = 0.0) const { return eval<double>(x, y, t); }

private:
    enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
    enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt };
    struct Node {
        Kind kind = Kind::Number;
        double value = 0.0;
        int var = 0;
        Fn fn = Fn::Sin;
        int a = -1;
        int b = -1;
    };
    class Parser;

    bool subtree_uses(int i, int var) const;
    double constant_value(int i) const { return eval_node<double>(i, kZeros); }

    template <typename S>
    static S ipow(S base, long n) {
        if (n < 0) return S(1.0) / ipow(base, -n);
        S result(1.0);
        while (n > 0) {
            if (n & 1) result = result * base;
            base = base * base;
            n >>= 1;
        }
        return result;
    }

    template <typename S>
    S eval_node(int i, const S* vars) const {
        using std::sin, std::cos, std::tan, std::exp, std::log, std::sqrt, std::pow;
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        switch (n.kind) {
        case Kind::Number: return S(n.value);
        case Kind::Var: return vars[n.var];
        case Kind::Neg: return -eval_node(n.a, vars);
        case Kind::Add: return eval_node(n.a, vars) + eval_node(n.b, vars);
        case Kind::Sub: return eval_node(n.a, vars) - eval_node(n.b, vars);
        case Kind::Mul: return eval_node(n.a, vars) * eval_node(n.b, vars);
        case Kind::Div: return eval_node(n.a, vars) / eval_node(n.b, vars);
        case Kind::Pow: {
            const S base = eval_node(n.a, vars);
            if (!(subtree_uses(n.b, 0) || subtree_uses(n.b, 1) || subtree_uses(n.b, 2))) {
                const double p = constant_value(n.b);
                if (p == std::round(p) && std::abs(p) <= 1024) return ipow(base, static_cast<long>(p));
                return pow(base, p);
            }
            return exp(eval_node(n.b, vars) * log(base));
        }
        case Kind::Call: {
            const S arg = eval_node(n.a, vars);
            switch (n.fn) {
            case Fn::Sin: return sin(arg);
            case Fn::Cos: return cos(arg);
            case Fn::Tan: return tan(arg);
            case Fn::Exp: return exp(arg);
            case Fn::Log: return log(arg);
            case Fn::Sqrt: return sqrt(arg);
            }
        }
        }
        throw ExpressionError("corrupt expression tree");
    }

    static constexpr double kZeros[3] = {0.0, 0.0, 0.0};

    std::string text_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace waveapost
