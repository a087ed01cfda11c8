#include <cmath>

#include <gtest/gtest.h>

#include "oracles/oracles.hpp"
#include "ssc/plant.hpp"

namespace ssc {
namespace {

PlantSpec constant_plant(double a1, double a2, double phi, double f) {
    return PlantSpec("const", Order::Parabolic, 1.0,
                     {CoefficientField::constant(FieldKind::Diffusion, a1),
                      CoefficientField::constant(FieldKind::Convection, a2),
                      CoefficientField::constant(FieldKind::Reaction, phi), std::nullopt,
                      CoefficientField::constant(FieldKind::Disturbance, f)},
                     BoundaryCondition::dirichlet());
}

TEST(Plant, ConstantFieldsEvaluate) {
    const auto c = evaluate_rhs_coefficients(constant_plant(1, 0, 0, 0), 0.3, 0.5, 0.0);
    EXPECT_EQ(c.a1, 1.0);
    EXPECT_EQ(c.a1_x, 0.0);
    EXPECT_EQ(c.a2, 0.0);
    EXPECT_EQ(c.phi, 0.0);
    EXPECT_EQ(c.f, 0.0);
    EXPECT_FALSE(c.b.has_value());
}

TEST(Plant, ReferenceParabolicAtOrigin) {
    const auto c = evaluate_rhs_coefficients(presets::paper_parabolic(), 0.0, 0.0, 0.0);
    EXPECT_DOUBLE_EQ(c.a1, 1.0);
    EXPECT_DOUBLE_EQ(c.a2, -2.0);
    EXPECT_DOUBLE_EQ(c.phi, 6.0);
    EXPECT_DOUBLE_EQ(c.f, 0.0);
}

TEST(Plant, DiffusionDerivativeMatchesCosine) {
    const auto c = evaluate_rhs_coefficients(presets::paper_parabolic(), 0.0, 0.5, 0.0);
    EXPECT_NEAR(c.a1_x, std::cos(0.5), 1e-5);
}

TEST(Plant, FiniteDifferenceDerivativeMatchesAnalytic) {
    // space_only without a registered derivative falls back to central differences.
    const double h = 1e-6;
    auto field = CoefficientField::space_only(
        FieldKind::Diffusion, [](double x) { return 1.0 + std::sin(x) + 0.3 * x * x; }, {0.5, 3.0});
    for (double x : {0.0, 0.1, 0.37, 0.5, 0.93, 1.0})
        EXPECT_NEAR(field.d_dx(x, 1.0), std::cos(x) + 0.6 * x, 10 * h) << "x=" << x;
}

TEST(Plant, HyperbolicCarriesDamping) {
    const auto c = evaluate_rhs_coefficients(presets::paper_hyperbolic(), 0.0, 0.2, 0.0);
    ASSERT_TRUE(c.b.has_value());
    EXPECT_DOUBLE_EQ(*c.b, 2.0);
}

TEST(Plant, OutOfDomainIsRejected) {
    const auto p = presets::paper_parabolic();
    EXPECT_THROW(evaluate_rhs_coefficients(p, 0.0, -0.01, 0.0), DomainError);
    EXPECT_THROW(evaluate_rhs_coefficients(p, 0.0, 1.01, 0.0), DomainError);
}

TEST(Plant, ConstructionInvariants) {
    auto fields = presets::reference_fields();
    EXPECT_THROW(PlantSpec("x", Order::Parabolic, 0.0, fields, BoundaryCondition::dirichlet()), ArgumentError);
    EXPECT_THROW(PlantSpec("x", Order::Hyperbolic, 1.0, fields, BoundaryCondition::dirichlet()), ArgumentError);
    auto with_b = fields;
    with_b.b = CoefficientField::constant(FieldKind::Damping, 1.0);
    EXPECT_THROW(PlantSpec("x", Order::Parabolic, 1.0, with_b, BoundaryCondition::dirichlet()), ArgumentError);
    auto neg_b = fields;
    neg_b.b = CoefficientField::constant(FieldKind::Damping, -1.0);
    EXPECT_THROW(PlantSpec("x", Order::Hyperbolic, 1.0, neg_b, BoundaryCondition::dirichlet()), ArgumentError);
    EXPECT_NO_THROW(PlantSpec("x", Order::Hyperbolic, 1.0, neg_b, BoundaryCondition::dirichlet(), true));
    auto bad_a1 = fields;
    bad_a1.a1 = CoefficientField::constant(FieldKind::Diffusion, 0.0);
    EXPECT_THROW(PlantSpec("x", Order::Parabolic, 1.0, bad_a1, BoundaryCondition::dirichlet()), ArgumentError);
    EXPECT_THROW(BoundaryCondition::mixed(-1.0), ArgumentError);
}

TEST(Plant, ReferenceBoundsHold) {
    for (const auto& p : {presets::paper_parabolic(), presets::paper_hyperbolic()}) {
        const auto r = validate_bounds(p, 41, {-3.0, 3.0}, {0.0, 10.0});
        EXPECT_TRUE(r.ok()) << p.name() << " violations=" << r.violations.size();
        EXPECT_GT(r.samples_checked, 0u);
    }
}

TEST(Plant, ConstantOutsideDeclaredBoundsViolatesEverywhere) {
    auto fields = presets::reference_fields();
    fields.phi = CoefficientField(
        FieldKind::Reaction, [](double, double, double) { return 6.0; }, {-5.0, 5.0});
    const PlantSpec p("x", Order::Parabolic, 1.0, fields, BoundaryCondition::dirichlet());
    const std::size_t n = 7;
    const auto r = validate_bounds(p, n, {-1.0, 1.0}, {0.0, 1.0});
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(r.violations.size(), n * n * n);
    for (const auto& v : r.violations) {
        EXPECT_EQ(v.field, FieldKind::Reaction);
        EXPECT_EQ(v.value, 6.0);
    }
}

TEST(Plant, CollapsedRangesAreDeterministic) {
    const auto p = presets::paper_parabolic();
    const auto a = validate_bounds(p, 5, {0.0, 0.0}, {0.0, 0.0});
    const auto b = validate_bounds(p, 5, {0.0, 0.0}, {0.0, 0.0});
    EXPECT_EQ(a.samples_checked, b.samples_checked);
    EXPECT_EQ(a.samples_checked, 4u * 5u);  // a1, a2, phi, f (no damping), x grid only
    EXPECT_THROW(validate_bounds(p, 1, {0.0, 0.0}, {0.0, 0.0}), ArgumentError);
}

TEST(Plant, LiteralHyperbolicKeepsNegativeDamping) {
    const auto p = presets::paper_hyperbolic_literal();
    EXPECT_FALSE(p.damping_certifiable());
    EXPECT_TRUE(validate_bounds(p, 21, {-3.0, 3.0}, {0.0, 1.0}).ok());
}

TEST(Plant, DependenceFlagsFollowExpressions) {
    const auto p = presets::paper_parabolic();
    EXPECT_FALSE(p.f().uses_x());
    EXPECT_FALSE(p.f().uses_z());
    EXPECT_TRUE(p.phi().uses_z());
    EXPECT_TRUE(p.a1().uses_x());
}

TEST(Expression, ProductRuleDerivative) {
    // 2 sin(x) cos(3x + 0.5): derivative by the product rule vs central differences.
    const Expression e({Term{2.0, {Factor{FactorKind::Sin, {.x = 1.0}}, Factor{FactorKind::Cos, {.x = 3.0, .shift = 0.5}}}}});
    for (double x : {0.1, 0.4, 0.8})
        EXPECT_NEAR(e.d_dx(0, x, 0), oracle::central_difference([&](double s) { return e(0, s, 0); }, x, 1e-6), 1e-7);
}

}  // namespace
}  // namespace ssc
