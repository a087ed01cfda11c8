#pragma once

// Controlled PDE problems on [0, l]:
//   parabolic   z_t  = (a1 z_x)_x + a2 z_x + phi z + u + f
//   hyperbolic  z_tt = (a1 z_x)_x + a2 z_x + phi z - b z_t + u + f
// with Dirichlet or mixed (z_x(0) = gamma z(0), z(l) = 0) boundary conditions.

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ssc/error.hpp"
#include "ssc/expression.hpp"

namespace ssc {

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool operator==(const Interval&) const = default;
};

enum class FieldKind { Diffusion, Convection, Reaction, Damping, Disturbance };

inline std::string_view to_string(FieldKind k) {
    switch (k) {
        case FieldKind::Diffusion: return "a1";
        case FieldKind::Convection: return "a2";
        case FieldKind::Reaction: return "phi";
        case FieldKind::Damping: return "b";
        case FieldKind::Disturbance: return "f";
    }
    return "?";
}

/// a1 and a2 depend on x only; phi and b on (z, x, t); f on (x, t).
inline bool depends_on_state(FieldKind k) { return k == FieldKind::Reaction || k == FieldKind::Damping; }
inline bool depends_on_time(FieldKind k) { return depends_on_state(k) || k == FieldKind::Disturbance; }

/// A coefficient evaluator together with its declared interval bounds.
class CoefficientField {
public:
    using Evaluator = std::function<double(double z, double x, double t)>;
    using SpaceDerivative = std::function<double(double x)>;

    CoefficientField() = default;

    CoefficientField(FieldKind kind, Evaluator eval, Interval bounds,
                     std::optional<SpaceDerivative> d_dx = std::nullopt)
        : kind_(kind), eval_(std::move(eval)), bounds_(bounds), d_dx_(std::move(d_dx)) {
        if (!eval_) throw ArgumentError(std::string(to_string(kind)) + ": missing evaluator");
        if (bounds_.lo > bounds_.hi)
            throw ArgumentError(std::string(to_string(kind)) + ": declared bounds are reversed");
    }

    /// Catalog expression; the exact x-derivative is registered for space-only fields.
    static CoefficientField from_expression(FieldKind kind, Expression expr, Interval bounds) {
        std::optional<SpaceDerivative> d;
        if (!depends_on_state(kind) && kind != FieldKind::Disturbance)
            d = [expr](double x) { return expr.d_dx(0.0, x, 0.0); };
        const bool uses_x = expr.depends_on_x(), uses_z = expr.depends_on_z();
        CoefficientField field(
            kind, [expr](double z, double x, double t) { return expr(z, x, t); }, bounds, std::move(d));
        field.uses_x_ = uses_x;
        field.uses_z_ = uses_z;
        return field;
    }

    static CoefficientField space_only(FieldKind kind, std::function<double(double)> f, Interval bounds,
                                       std::optional<SpaceDerivative> d_dx = std::nullopt) {
        return CoefficientField(
            kind, [f = std::move(f)](double, double x, double) { return f(x); }, bounds, std::move(d_dx));
    }

    static CoefficientField constant(FieldKind kind, double c) {
        CoefficientField field(
            kind, [c](double, double, double) { return c; }, Interval{c, c}, [](double) { return 0.0; });
        field.uses_x_ = field.uses_z_ = false;
        return field;
    }

    double operator()(double z, double x, double t) const { return eval_(z, x, t); }

    FieldKind kind() const { return kind_; }
    const Interval& bounds() const { return bounds_; }
    bool has_analytic_derivative() const { return d_dx_.has_value(); }
    /// False only when the evaluator is known not to read x (resp. z); lets callers hoist evaluations.
    bool uses_x() const { return uses_x_; }
    bool uses_z() const { return uses_z_; }

    /// d/dx of a space-only field. Uses the registered derivative when present,
    /// otherwise a second-order finite difference with step h (one-sided near the ends).
    double d_dx(double x, double length) const {
        if (d_dx_) return (*d_dx_)(x);
        const double h = 1e-6 * length;
        auto g = [&](double s) { return eval_(0.0, s, 0.0); };
        if (x - h < 0.0) return (-3.0 * g(x) + 4.0 * g(x + h) - g(x + 2.0 * h)) / (2.0 * h);
        if (x + h > length) return (3.0 * g(x) - 4.0 * g(x - h) + g(x - 2.0 * h)) / (2.0 * h);
        return (g(x + h) - g(x - h)) / (2.0 * h);
    }

private:
    FieldKind kind_ = FieldKind::Disturbance;
    Evaluator eval_;
    Interval bounds_;
    std::optional<SpaceDerivative> d_dx_;
    bool uses_x_ = true;
    bool uses_z_ = true;
};

struct BoundaryCondition {
    enum class Kind { Dirichlet, Mixed };
    Kind kind = Kind::Dirichlet;
    double gamma = 0.0;

    static BoundaryCondition dirichlet() { return {}; }
    static BoundaryCondition mixed(double gamma) {
        if (!(gamma >= 0.0)) throw ArgumentError("mixed boundary condition requires gamma >= 0");
        return {Kind::Mixed, gamma};
    }
};

enum class Order { Parabolic, Hyperbolic };

inline std::string_view to_string(Order o) { return o == Order::Parabolic ? "parabolic" : "hyperbolic"; }

/// Immutable description of one controlled PDE problem.
class PlantSpec {
public:
    struct Fields {
        CoefficientField a1;
        CoefficientField a2;
        CoefficientField phi;
        std::optional<CoefficientField> b;
        CoefficientField f;
    };

    /// `allow_nonpositive_damping` admits b bounds with lo <= 0 (undamped oracles and the
    /// literal negative-damping scenario); such plants cannot be certified.
    PlantSpec(std::string name, Order order, double length, Fields fields, BoundaryCondition bc,
              bool allow_nonpositive_damping = false)
        : name_(std::move(name)), order_(order), length_(length), fields_(std::move(fields)), bc_(bc),
          allow_nonpositive_damping_(allow_nonpositive_damping) {
        if (!(length_ > 0.0)) throw ArgumentError("plant length must be > 0");
        if (!(fields_.a1.bounds().lo > 0.0)) throw ArgumentError("a1 lower bound must be > 0");
        if (order_ == Order::Hyperbolic && !fields_.b)
            throw ArgumentError("hyperbolic plant requires a damping coefficient b");
        if (order_ == Order::Parabolic && fields_.b)
            throw ArgumentError("parabolic plant must not carry a damping coefficient b");
        if (fields_.b && !allow_nonpositive_damping_ && !(fields_.b->bounds().lo > 0.0))
            throw ArgumentError("damping lower bound must be > 0");
        if (bc_.kind == BoundaryCondition::Kind::Mixed && !(bc_.gamma >= 0.0))
            throw ArgumentError("mixed boundary condition requires gamma >= 0");
    }

    const std::string& name() const { return name_; }
    Order order() const { return order_; }
    double length() const { return length_; }
    const BoundaryCondition& boundary() const { return bc_; }
    const CoefficientField& a1() const { return fields_.a1; }
    const CoefficientField& a2() const { return fields_.a2; }
    const CoefficientField& phi() const { return fields_.phi; }
    const std::optional<CoefficientField>& b() const { return fields_.b; }
    const CoefficientField& f() const { return fields_.f; }
    const Fields& fields() const { return fields_; }
    bool damping_certifiable() const { return fields_.b && fields_.b->bounds().lo > 0.0; }
    bool allows_nonpositive_damping() const { return allow_nonpositive_damping_; }

    std::vector<const CoefficientField*> all_fields() const {
        std::vector<const CoefficientField*> out{&fields_.a1, &fields_.a2, &fields_.phi};
        if (fields_.b) out.push_back(&*fields_.b);
        out.push_back(&fields_.f);
        return out;
    }

private:
    std::string name_;
    Order order_;
    double length_;
    Fields fields_;
    BoundaryCondition bc_;
    bool allow_nonpositive_damping_;
};

struct RhsCoefficients {
    double a1;
    double a1_x;
    double a2;
    double phi;
    std::optional<double> b;
    double f;
};

inline RhsCoefficients evaluate_rhs_coefficients(const PlantSpec& spec, double z, double x, double t) {
    if (!(x >= 0.0 && x <= spec.length()))
        throw DomainError("x=" + std::to_string(x) + " outside [0, l]");
    if (!(t >= 0.0)) throw DomainError("t must be >= 0");
    RhsCoefficients c{};
    c.a1 = spec.a1()(z, x, t);
    c.a1_x = spec.a1().d_dx(x, spec.length());
    c.a2 = spec.a2()(z, x, t);
    c.phi = spec.phi()(z, x, t);
    if (spec.b()) c.b = (*spec.b())(z, x, t);
    c.f = spec.f()(z, x, t);
    return c;
}

struct BoundViolation {
    FieldKind field;
    double z;
    double x;
    double t;
    double value;
};

struct BoundsReport {
    std::vector<BoundViolation> violations;
    std::size_t samples_checked = 0;

    bool ok() const { return violations.empty(); }
};

namespace detail {
inline std::vector<double> sample_range(Interval r, std::size_t n) {
    if (r.lo == r.hi) return {r.lo};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = (i + 1 == n) ? r.hi : r.lo + r.width() * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}
}  // namespace detail

/// Samples every coefficient on a tensor grid over its declared arguments and reports
/// each value falling outside its declared interval. A collapsed range samples one point.
inline BoundsReport validate_bounds(const PlantSpec& spec, std::size_t n_samples, Interval z_range,
                                    Interval t_range) {
    if (n_samples < 2) throw ArgumentError("validate_bounds needs n_samples >= 2");
    const auto xs = detail::sample_range({0.0, spec.length()}, n_samples);
    const auto zs = detail::sample_range(z_range, n_samples);
    const auto ts = detail::sample_range(t_range, n_samples);
    const std::vector<double> zero{0.0};

    BoundsReport report;
    for (const auto* field : spec.all_fields()) {
        const auto& zgrid = depends_on_state(field->kind()) ? zs : zero;
        const auto& tgrid = depends_on_time(field->kind()) ? ts : zero;
        for (double x : xs)
            for (double z : zgrid)
                for (double t : tgrid) {
                    ++report.samples_checked;
                    const double v = (*field)(z, x, t);
                    if (!field->bounds().contains(v)) report.violations.push_back({field->kind(), z, x, t, v});
                }
    }
    return report;
}

namespace presets {

/// Coefficient choices of the reference reaction-diffusion example on [0, 1].
/// The reaction bound is widened to [-5, 6] so that 5 + cos(3z) lies inside it.
inline PlantSpec::Fields reference_fields() {
    using E = Expression;
    return PlantSpec::Fields{
        CoefficientField::from_expression(FieldKind::Diffusion, E::constant(1.0) + E::sine(1.0, {.x = 1.0}),
                                          {0.5, 2.0}),
        CoefficientField::from_expression(FieldKind::Convection,
                                          E::constant(-2.0) + E::sine(-1.0, {.x = 1.3}), {-5.0, 5.0}),
        CoefficientField::from_expression(FieldKind::Reaction, E::constant(5.0) + E::cosine(1.0, {.z = 3.0}),
                                          {-5.0, 6.0}),
        std::nullopt,
        CoefficientField::from_expression(FieldKind::Disturbance,
                                          E::sine(0.2, {.t = 30.0}) + E::sine(0.2, {.t = 2.0}), {-20.0, 20.0}),
    };
}

inline PlantSpec paper_parabolic() {
    return PlantSpec("paper-parabolic", Order::Parabolic, 1.0, reference_fields(), BoundaryCondition::dirichlet());
}

/// Damping b = 2 + sin(1.1 z) in [1, 3].
inline PlantSpec paper_hyperbolic() {
    auto fields = reference_fields();
    fields.b = CoefficientField::from_expression(
        FieldKind::Damping, Expression::constant(2.0) + Expression::sine(1.0, {.z = 1.1}), {1.0, 3.0});
    return PlantSpec("paper-hyperbolic", Order::Hyperbolic, 1.0, std::move(fields), BoundaryCondition::dirichlet());
}

/// Damping b = -2 - sin(1.1 z) in [-5, -1] exactly as printed with the reference example.
/// Negative damping: simulation only, no certificate.
inline PlantSpec paper_hyperbolic_literal() {
    auto fields = reference_fields();
    fields.b = CoefficientField::from_expression(
        FieldKind::Damping, Expression::constant(-2.0) + Expression::sine(-1.0, {.z = 1.1}), {-5.0, -1.0});
    return PlantSpec("paper-hyperbolic-literal", Order::Hyperbolic, 1.0, std::move(fields),
                     BoundaryCondition::dirichlet(), true);
}

/// Pure heat equation z_t = z_xx on [0, 1].
inline PlantSpec heat() {
    return PlantSpec("heat", Order::Parabolic, 1.0,
                     {CoefficientField::constant(FieldKind::Diffusion, 1.0),
                      CoefficientField::constant(FieldKind::Convection, 0.0),
                      CoefficientField::constant(FieldKind::Reaction, 0.0), std::nullopt,
                      CoefficientField::constant(FieldKind::Disturbance, 0.0)},
                     BoundaryCondition::dirichlet());
}

/// Undamped wave equation z_tt = z_xx on [0, 1].
inline PlantSpec wave() {
    return PlantSpec("wave", Order::Hyperbolic, 1.0,
                     {CoefficientField::constant(FieldKind::Diffusion, 1.0),
                      CoefficientField::constant(FieldKind::Convection, 0.0),
                      CoefficientField::constant(FieldKind::Reaction, 0.0),
                      CoefficientField::constant(FieldKind::Damping, 0.0),
                      CoefficientField::constant(FieldKind::Disturbance, 0.0)},
                     BoundaryCondition::dirichlet(), true);
}

inline std::vector<std::string> names() {
    return {"paper-parabolic", "paper-hyperbolic", "paper-hyperbolic-literal", "heat", "wave"};
}

inline std::optional<PlantSpec> by_name(std::string_view name) {
    if (name == "paper-parabolic") return paper_parabolic();
    if (name == "paper-hyperbolic") return paper_hyperbolic();
    if (name == "paper-hyperbolic-literal") return paper_hyperbolic_literal();
    if (name == "heat") return heat();
    if (name == "wave") return wave();
    return std::nullopt;
}

}  // namespace presets

}  // namespace ssc
