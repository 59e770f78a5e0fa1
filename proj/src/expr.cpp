#include "sklab/expr.hpp"

#include <cctype>
#include <cmath>

namespace sklab::expr {

namespace {

struct Parser {
    const std::string& s;
    size_t pos = 0;

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    char peek() {
        skip();
        return pos < s.size() ? s[pos] : '\0';
    }
    [[noreturn]] void fail(const std::string& what) {
        throw ConfigError("expression error at position " + std::to_string(pos) + ": " + what +
                          " in \"" + s + "\"");
    }
};

}  // namespace

Expr Expr::parse(const std::string& text, const std::vector<std::string>& var_names) {
    Expr e;
    e.nvars_ = static_cast<int>(var_names.size());
    e.source_ = text;
    Parser p{text, 0};

    // recursive descent emitting postfix; depth cap bounds both parser
    // recursion and the evaluator's fixed stack
    int depth = 0;
    constexpr int kMaxDepth = 48;
    std::function<void()> parse_expr, parse_term, parse_unary, parse_power, parse_atom;

    parse_atom = [&]() {
        p.skip();
        if (++depth > kMaxDepth) p.fail("expression too deeply nested");
        struct DepthGuard {
            int& d;
            ~DepthGuard() { --d; }
        } guard{depth};
        if (p.eat('(')) {
            parse_expr();
            if (!p.eat(')')) p.fail("expected ')'");
            return;
        }
        const char c = p.peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t used = 0;
            double v = 0;
            try {
                v = std::stod(p.s.substr(p.pos), &used);
            } catch (...) {
                p.fail("bad number");
            }
            p.pos += used;
            e.prog_.push_back({Op::Push, v, 0});
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = p.pos;
            while (p.pos < p.s.size() &&
                   (std::isalnum(static_cast<unsigned char>(p.s[p.pos])) || p.s[p.pos] == '_'))
                ++p.pos;
            const std::string name = p.s.substr(start, p.pos - start);
            if (name == "cos" || name == "sin") {
                if (!p.eat('(')) p.fail("expected '(' after " + name);
                parse_expr();
                if (!p.eat(')')) p.fail("expected ')'");
                e.prog_.push_back({name == "cos" ? Op::Cos : Op::Sin, 0, 0});
                return;
            }
            if (name == "pi") {
                e.prog_.push_back({Op::Push, M_PI, 0});
                return;
            }
            for (size_t i = 0; i < var_names.size(); ++i) {
                if (var_names[i] == name) {
                    e.prog_.push_back({Op::Var, 0, static_cast<int>(i)});
                    return;
                }
            }
            p.fail("unknown name '" + name + "'");
        }
        p.fail("expected a number, name, or '('");
    };

    parse_power = [&]() {
        parse_atom();
        if (p.eat('^')) {
            p.skip();
            size_t start = p.pos;
            if (p.pos < p.s.size() && (p.s[p.pos] == '-' || p.s[p.pos] == '+')) ++p.pos;
            while (p.pos < p.s.size() && std::isdigit(static_cast<unsigned char>(p.s[p.pos])))
                ++p.pos;
            if (start == p.pos) p.fail("expected integer exponent");
            const int n = std::stoi(p.s.substr(start, p.pos - start));
            e.prog_.push_back({Op::PowInt, 0, n});
        }
    };

    parse_unary = [&]() {
        if (p.eat('-')) {
            parse_unary();
            e.prog_.push_back({Op::Neg, 0, 0});
            return;
        }
        (void)p.eat('+');
        parse_power();
    };

    parse_term = [&]() {
        parse_unary();
        while (true) {
            if (p.eat('*')) {
                parse_unary();
                e.prog_.push_back({Op::Mul, 0, 0});
            } else if (p.eat('/')) {
                parse_unary();
                e.prog_.push_back({Op::Div, 0, 0});
            } else {
                break;
            }
        }
    };

    parse_expr = [&]() {
        parse_term();
        while (true) {
            if (p.eat('+')) {
                parse_term();
                e.prog_.push_back({Op::Add, 0, 0});
            } else if (p.eat('-')) {
                parse_term();
                e.prog_.push_back({Op::Sub, 0, 0});
            } else {
                break;
            }
        }
    };

    parse_expr();
    p.skip();
    if (p.pos != text.size()) p.fail("trailing characters");
    return e;
}

double Expr::eval(const double* vars) const {
    double stack[64];  // safe: the parser caps nesting depth at 48
    int top = -1;
    for (const Ins& ins : prog_) {
        switch (ins.op) {
            case Op::Push: stack[++top] = ins.val; break;
            case Op::Var: stack[++top] = vars[ins.idx]; break;
            case Op::Add: --top; stack[top] += stack[top + 1]; break;
            case Op::Sub: --top; stack[top] -= stack[top + 1]; break;
            case Op::Mul: --top; stack[top] *= stack[top + 1]; break;
            case Op::Div: --top; stack[top] /= stack[top + 1]; break;
            case Op::Neg: stack[top] = -stack[top]; break;
            case Op::PowInt: {
                double base = stack[top], r = 1.0;
                int n = ins.idx;
                const bool inv = n < 0;
                for (int i = 0; i < std::abs(n); ++i) r *= base;
                stack[top] = inv ? 1.0 / r : r;
                break;
            }
            case Op::Cos: stack[top] = std::cos(stack[top]); break;
            case Op::Sin: stack[top] = std::sin(stack[top]); break;
        }
    }
    return top == 0 ? stack[0] : 0.0;
}

}  // namespace sklab::expr
