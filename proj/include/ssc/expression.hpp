#pragma once

// Fixed catalog of coefficient expressions: sums of scaled products of
// constant / affine / sin / cos factors whose argument is affine in (x, z, t).
// Every expression carries an exact partial derivative in x.

#include <cmath>
#include <string>
#include <vector>

namespace ssc {

/// c_x*x + c_z*z + c_t*t + shift
struct AffineArg {
    double x = 0.0;
    double z = 0.0;
    double t = 0.0;
    double shift = 0.0;

    double operator()(double zv, double xv, double tv) const { return x * xv + z * zv + t * tv + shift; }
};

enum class FactorKind { Affine, Sin, Cos };

struct Factor {
    FactorKind kind = FactorKind::Affine;
    AffineArg arg;

    double value(double z, double x, double t) const {
        const double a = arg(z, x, t);
        switch (kind) {
            case FactorKind::Affine: return a;
            case FactorKind::Sin: return std::sin(a);
            case FactorKind::Cos: return std::cos(a);
        }
        return 0.0;
    }

    double d_dx(double z, double x, double t) const {
        const double a = arg(z, x, t);
        switch (kind) {
            case FactorKind::Affine: return arg.x;
            case FactorKind::Sin: return arg.x * std::cos(a);
            case FactorKind::Cos: return -arg.x * std::sin(a);
        }
        return 0.0;
    }

    bool depends_on_x() const { return arg.x != 0.0; }
    bool depends_on_z() const { return arg.z != 0.0; }
};

/// scale * prod(factors); an empty product is the constant `scale`.
struct Term {
    double scale = 1.0;
    std::vector<Factor> factors;

    double value(double z, double x, double t) const {
        double v = scale;
        for (const auto& f : factors) v *= f.value(z, x, t);
        return v;
    }

    double d_dx(double z, double x, double t) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < factors.size(); ++i) {
            double prod = scale * factors[i].d_dx(z, x, t);
            if (prod == 0.0) continue;
            for (std::size_t k = 0; k < factors.size(); ++k)
                if (k != i) prod *= factors[k].value(z, x, t);
            sum += prod;
        }
        return sum;
    }
};

class Expression {
public:
    Expression() = default;
    explicit Expression(std::vector<Term> terms) : terms_(std::move(terms)) {}

    static Expression constant(double c) { return Expression({Term{c, {}}}); }

    /// scale * sin(arg)
    static Expression sine(double scale, AffineArg arg) {
        return Expression({Term{scale, {Factor{FactorKind::Sin, arg}}}});
    }

    /// scale * cos(arg)
    static Expression cosine(double scale, AffineArg arg) {
        return Expression({Term{scale, {Factor{FactorKind::Cos, arg}}}});
    }

    Expression operator+(const Expression& other) const {
        auto terms = terms_;
        terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
        return Expression(std::move(terms));
    }

    double operator()(double z, double x, double t) const {
        double v = 0.0;
        for (const auto& term : terms_) v += term.value(z, x, t);
        return v;
    }

    double d_dx(double z, double x, double t) const {
        double v = 0.0;
        for (const auto& term : terms_) v += term.d_dx(z, x, t);
        return v;
    }

    const std::vector<Term>& terms() const { return terms_; }

    bool depends_on_x() const { return any_factor([](const Factor& f) { return f.depends_on_x(); }); }
    bool depends_on_z() const { return any_factor([](const Factor& f) { return f.depends_on_z(); }); }

private:
    template <class Pred>
    bool any_factor(Pred pred) const {
        for (const auto& term : terms_)
            for (const auto& f : term.factors)
                if (term.scale != 0.0 && pred(f)) return true;
        return false;
    }

    std::vector<Term> terms_;
};

}  // namespace ssc
