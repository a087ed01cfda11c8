#include <gtest/gtest.h>

#include "oracles/properties.hpp"
#include "ssc/controller.hpp"

namespace ssc {
namespace {

const ActuationPartition kTen = uniform_partition(1.0, 10);

TEST(Controller, PropertySuite) {
    const auto r = property::controller_suite();
    EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Controller, ZeroReadingsGiveZeroControl) {
    for (const auto& c : property::shape_cases()) {
        const ControllerSpec ctrl(100.0, c.spec, kTen);
        const SensorFrame frame{0.0, std::vector<double>(10, 0.0)};
        for (double x = 0.0; x <= 1.0; x += 0.01) EXPECT_EQ(control_field(ctrl, frame, x), 0.0) << c.name;
    }
}

TEST(Controller, ConstantLawExample) {
    const ControllerSpec ctrl(100.0, ConstantShape{}, kTen);
    SensorFrame frame{0.0, std::vector<double>(10, 0.0)};
    frame.readings[2] = 0.4;
    EXPECT_DOUBLE_EQ(control_field(ctrl, frame, 0.21), -40.0);
    EXPECT_DOUBLE_EQ(control_field(ctrl, frame, 0.29), -40.0);
    EXPECT_EQ(control_field(ctrl, frame, 0.31), 0.0);
}

TEST(Controller, RejectsNonpositiveGain) {
    EXPECT_THROW(ControllerSpec(0.0, ConstantShape{}, kTen), ArgumentError);
    EXPECT_THROW(ControllerSpec(-100.0, ConstantShape{}, kTen), ArgumentError);
}

TEST(Controller, FrameSizeMismatch) {
    const ControllerSpec ctrl(1.0, ConstantShape{}, kTen);
    EXPECT_THROW(control_field(ctrl, SensorFrame{0.0, {1.0, 2.0}}, 0.5), ArgumentError);
    const std::vector<double> mesh{0.0, 0.5};
    EXPECT_THROW(control_profile(ctrl, SensorFrame{0.0, {}}, mesh), ArgumentError);
}

TEST(Controller, EmptyMeshGivesEmptyProfile) {
    const ControllerSpec ctrl(1.0, ConstantShape{}, kTen);
    EXPECT_TRUE(control_profile(ctrl, SensorFrame{0.0, std::vector<double>(10, 1.0)}, {}).empty());
}

double active_fraction(double alpha, double beta, std::size_t n) {
    const ControllerSpec ctrl(100.0, BumpShape{alpha, {beta}, BumpForm::Normalized}, kTen);
    const SensorFrame frame{0.0, std::vector<double>(10, 1.0)};
    std::vector<double> mesh(n + 1);
    for (std::size_t k = 0; k <= n; ++k) mesh[k] = static_cast<double>(k) / static_cast<double>(n);
    const auto u = control_profile(ctrl, frame, mesh);
    return static_cast<double>(std::count_if(u.begin(), u.end(), [](double v) { return v != 0.0; })) /
           static_cast<double>(n);
}

TEST(Controller, BumpSupportFractionIsTwoBetaNOverLength) {
    const double beta = 1.0 / 80.0;
    EXPECT_NEAR(active_fraction(1e-6, beta, 200000), 2.0 * beta * 10.0, 1e-3);
}

TEST(Controller, SharpBumpIsActiveOnlyWhereExpDoesNotUnderflow) {
    // exp(-c s^2 / (beta^2 (beta^2 - s^2))) > 0 needs the exponent above about -745.
    const double beta = 1.0 / 80.0, c = 1000.0 / 2.0, b2 = beta * beta;
    const double s = std::sqrt(745.0 * b2 * b2 / (c + 745.0 * b2));
    EXPECT_NEAR(active_fraction(1000.0, beta, 200000), 2.0 * s * 10.0, 2e-4);
}

TEST(Controller, ShapedControlNeverExceedsConstant) {
    const ControllerSpec flat(50.0, ConstantShape{}, kTen);
    const ControllerSpec shaped(50.0, RaisedCosineShape{150.0, ClampPolicy::Warn}, kTen);
    SensorFrame frame{0.0, {}};
    for (int j = 0; j < 10; ++j) frame.readings.push_back(0.1 * (j - 4));
    for (double x = 0.0; x <= 1.0; x += 0.001)
        EXPECT_LE(std::abs(control_field(shaped, frame, x)), std::abs(control_field(flat, frame, x)) + 1e-15);
}

}  // namespace
}  // namespace ssc
