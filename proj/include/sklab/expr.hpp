#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sklab/numerics.hpp"

namespace sklab::expr {

/// Small trig-polynomial expression evaluator for family profiles:
/// sums/products/integer powers of numbers, named coordinates, and
/// sin/cos of subexpressions. Parsed once into a postfix program;
/// evaluation is allocation-free. No user code ever executes from configs.
class Expr {
public:
    static Expr parse(const std::string& text, const std::vector<std::string>& var_names);

    double eval(const double* vars) const;
    int var_count() const { return nvars_; }
    const std::string& source() const { return source_; }

private:
    enum class Op : std::uint8_t { Push, Var, Add, Sub, Mul, Div, Neg, PowInt, Cos, Sin };
    struct Ins {
        Op op;
        double val = 0;
        int idx = 0;
    };
    std::vector<Ins> prog_;
    int nvars_ = 0;
    std::string source_;
};

}  // namespace sklab::expr
