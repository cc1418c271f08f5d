#include "waveapost/expression.hpp"

#include <cctype>
#include <cstdlib>
#include <numbers>

namespace waveapost {

class Expression::Parser {
public:
    Parser(const std::string& text, std::vector<Node>& nodes) : s_(text), nodes_(nodes) {}

    int parse() {
        const int root = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ExpressionError("expression \"" + s_ + "\": " + what + " at position " + std::to_string(pos_));
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

    int add(Node n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    int binary(Kind k, int a, int b) {
        Node n;
        n.kind = k;
        n.a = a;
        n.b = b;
        return add(n);
    }

    int expr() {
        int lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = binary(Kind::Add, lhs, term());
            else if (accept('-'))
                lhs = binary(Kind::Sub, lhs, term());
            else
                return lhs;
        }
    }

    int term() {
        int lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = binary(Kind::Mul, lhs, unary());
            else if (accept('/'))
                lhs = binary(Kind::Div, lhs, unary());
            else
                return lhs;
        }
    }

    // Unary minus binds looser than ^, so -x^2 = -(x^2).
    int unary() {
        if (accept('-')) return binary(Kind::Neg, unary(), -1);
        if (accept('+')) return unary();
        return power();
    }

    int power() {
        const int base = primary();
        if (accept('^')) return binary(Kind::Pow, base, unary());
        return base;
    }

    int primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            Node n;
            n.value = v;
            return add(n);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "x" || name == "y" || name == "t") {
                Node n;
                n.kind = Kind::Var;
                n.var = name == "x" ? 0 : name == "y" ? 1 : 2;
                return add(n);
            }
            if (name == "pi" || name == "e") {
                Node n;
                n.value = name == "pi" ? std::numbers::pi : std::numbers::e;
                return add(n);
            }
            static const std::pair<const char*, Fn> fns[] = {{"sin", Fn::Sin}, {"cos", Fn::Cos}, {"tan", Fn::Tan},
                                                             {"exp", Fn::Exp}, {"log", Fn::Log}, {"sqrt", Fn::Sqrt}};
            for (const auto& [fname, fn] : fns) {
                if (name != fname) continue;
                if (!accept('(')) fail("expected '(' after " + name);
                Node n;
                n.kind = Kind::Call;
                n.fn = fn;
                n.a = expr();
                if (!accept(')')) fail("expected ')'");
                return add(n);
            }
            pos_ = start;
            fail("unknown identifier '" + name + "'");
        }
        if (accept('(')) {
            const int inner = expr();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& s_;
    std::vector<Node>& nodes_;
    std::size_t pos_ = 0;
};

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.text_ = text;
    e.nodes_.clear();
    Parser p(text, e.nodes_);
    e.root_ = p.parse();
    return e;
}

bool Expression::subtree_uses(int i, int var) const {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.kind == Kind::Var) return n.var == var;
    return (n.a >= 0 && subtree_uses(n.a, var)) || (n.b >= 0 && subtree_uses(n.b, var));
}

bool Expression::depends_on(char var) const {
    const int idx = var == 'x' ? 0 : var == 'y' ? 1 : var == 't' ? 2 : -1;
    if (idx < 0) throw std::invalid_argument("depends_on: variable must be x, y or t");
    return subtree_uses(root_, idx);
}

}  // namespace waveapost
