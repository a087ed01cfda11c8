#include <cmath>

#include <gtest/gtest.h>

#include "oracles/frozen_reference.hpp"
#include "oracles/oracles.hpp"
#include "oracles/properties.hpp"
#include "ssc/analysis.hpp"
#include "ssc/simulator.hpp"

namespace ssc {
namespace {

PlantSpec constant_plant(const std::string& name, double a2, double phi,
                         BoundaryCondition bc = BoundaryCondition::dirichlet()) {
    return PlantSpec(name, Order::Parabolic, 1.0,
                     {CoefficientField::constant(FieldKind::Diffusion, 1.0),
                      CoefficientField::constant(FieldKind::Convection, a2),
                      CoefficientField::constant(FieldKind::Reaction, phi), std::nullopt,
                      CoefficientField::constant(FieldKind::Disturbance, 0.0)},
                     bc);
}

double max_error(const TrajectoryRecord& rec, const std::function<double(double, double)>& exact) {
    const auto& s = rec.snapshots.back();
    double e = 0.0;
    for (std::size_t k = 0; k < rec.mesh.size(); ++k) e = std::max(e, std::abs(s.z[k] - exact(rec.mesh.node(k), s.t)));
    return e;
}

TEST(Simulator, HeatMatchesExactSolution) {
    SimulationOptions opt;
    opt.t_end = 0.1;
    opt.record_every = 1000;
    const auto rec = simulate(presets::heat(), std::nullopt, opt);
    EXPECT_LE(max_error(rec, oracle::heat_solution), 1e-3);
    EXPECT_DOUBLE_EQ(rec.snapshots.back().t, 0.1);
}

TEST(Simulator, WaveMatchesExactSolution) {
    SimulationOptions opt;
    opt.t_end = 1.0;
    opt.record_every = 50;
    const auto rec = simulate(presets::wave(), std::nullopt, opt);
    EXPECT_LE(max_error(rec, oracle::wave_solution), 1e-2);
}

TEST(Simulator, WaveEnergyIsConserved) {
    const auto r = property::wave_energy_suite();
    EXPECT_TRUE(r.ok) << r.detail;
}

double convergence_order(double a2, std::function<double(double, double)> exact) {
    std::vector<double> errors;
    for (std::size_t cells : {20u, 40u, 80u}) {
        SimulationOptions opt;
        opt.cells = cells;
        opt.t_end = 0.05;
        opt.record_every = 1u << 20;
        opt.initial = {"exact", [&](double x) { return exact(x, 0.0); }, {}};
        errors.push_back(max_error(simulate(constant_plant("adv", a2, 0.0), std::nullopt, opt), exact));
    }
    return std::log2(errors[1] / errors[2]);
}

TEST(Simulator, SecondOrderWithoutConvection) {
    const double order = convergence_order(0.0, oracle::heat_solution);
    EXPECT_GT(order, 1.8);
    EXPECT_LT(order, 2.2);
}

TEST(Simulator, ForwardDifferenceConvectionIsFirstOrder) {
    const double order =
        convergence_order(2.0, [](double x, double t) { return oracle::advection_heat_solution(x, t, 2.0); });
    EXPECT_GT(order, 0.8);
    EXPECT_LT(order, 2.0);
}

TEST(Simulator, SineModeRate) {
    const Mesh mesh(1.0, 160);
    const auto rhs = semidiscretize(presets::heat(), mesh, std::nullopt);
    std::vector<double> z(mesh.size()), dz(mesh.size());
    for (std::size_t k = 0; k < mesh.size(); ++k) z[k] = std::sin(std::numbers::pi * mesh.node(k));
    rhs(0.0, z, dz);
    for (std::size_t k = 1; k + 1 < mesh.size(); ++k) {
        EXPECT_NEAR(dz[k], -reference::kHeatDiscreteRate * z[k], 1e-9);
        EXPECT_NEAR(dz[k], -std::numbers::pi * std::numbers::pi * z[k], 4e-4);
    }
    EXPECT_EQ(dz.front(), 0.0);
    EXPECT_EQ(dz.back(), 0.0);
}

TEST(Simulator, ConservativeFormAgreesForSmoothDiffusion) {
    const Mesh mesh(1.0, 160);
    const auto p = presets::paper_parabolic();
    const auto a = semidiscretize(p, mesh, std::nullopt, DiffusionForm::Expanded);
    const auto b = semidiscretize(p, mesh, std::nullopt, DiffusionForm::Conservative);
    std::vector<double> z(mesh.size()), da(mesh.size()), db(mesh.size());
    for (std::size_t k = 0; k < mesh.size(); ++k) z[k] = std::sin(std::numbers::pi * mesh.node(k));
    a(0.0, z, da);
    b(0.0, z, db);
    for (std::size_t k = 1; k + 1 < mesh.size(); ++k) EXPECT_NEAR(da[k], db[k], 0.05);
}

TEST(Simulator, ZeroStateIsEquilibrium) {
    SimulationOptions opt;
    opt.t_end = 0.01;
    opt.initial = InitialCondition::zero();
    const auto rec =
        simulate(constant_plant("r", -2.0, 5.0), uniform_partition(1.0, 10), RaisedCosineShape{100.0}, 50.0, opt);
    for (const auto& s : rec.snapshots)
        for (double v : s.z) EXPECT_EQ(v, 0.0);
    for (const auto& u : rec.controls)
        for (double v : u) EXPECT_EQ(v, 0.0);
}

TEST(Simulator, SensorSnapping) {
    const Mesh mesh(1.0, 160);
    const auto nodes = snap_sensors(uniform_partition(1.0, 10), mesh);
    ASSERT_EQ(nodes.size(), 10u);
    EXPECT_EQ(nodes[0], 8u);
    for (std::size_t j = 0; j < 10; ++j) EXPECT_EQ(nodes[j], 8u + 16u * j);
    const auto two = snap_sensors(uniform_partition(1.0, 2), mesh);
    EXPECT_EQ(two, (std::vector<std::size_t>{40, 120}));
    // Tie at the midpoint of a cell goes to the lower node.
    const auto tie = snap_sensors(ActuationPartition({0.0, 0.5, 1.0}, {0.125, 0.75}), Mesh(1.0, 4));
    EXPECT_EQ(tie[0], 0u);
    EXPECT_THROW(snap_sensors(uniform_partition(2.0, 2), mesh), ArgumentError);
}

TEST(Simulator, MixedBoundaryWithZeroGammaCopiesNeighbour) {
    SimulationOptions opt;
    opt.t_end = 0.01;
    opt.cells = 40;
    opt.record_every = 10;
    opt.initial = {"ramp", [](double x) { return 1.0 - x; }, {}};
    const auto rec = simulate(constant_plant("m", 0.0, 0.0, BoundaryCondition::mixed(0.0)), std::nullopt, opt);
    for (const auto& s : rec.snapshots) {
        EXPECT_EQ(s.z.front(), s.z[1]);
        EXPECT_EQ(s.z.back(), 0.0);
    }
    const auto robin = simulate(constant_plant("m", 0.0, 0.0, BoundaryCondition::mixed(2.0)), std::nullopt, opt);
    const auto& last = robin.snapshots.back();
    EXPECT_NEAR(last.z.front(), last.z[1] / (1.0 + 2.0 * robin.mesh.spacing()), 1e-15);
}

TEST(Simulator, ClosedLoopHeatIsDissipative) {
    SimulationOptions opt;
    opt.t_end = 0.2;
    opt.cells = 80;
    opt.record_every = 20;
    const auto rec = simulate(presets::heat(), uniform_partition(1.0, 10), ConstantShape{}, 20.0, opt);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& s : rec.snapshots) {
        const double n = l2_norm_sq(s, rec.mesh);
        EXPECT_LE(n, prev * (1.0 + 1e-12));
        prev = n;
    }
    // Feedback speeds up the decay relative to the open loop.
    const auto open = simulate(presets::heat(), std::nullopt, opt);
    EXPECT_LT(l2_norm_sq(rec.snapshots.back(), rec.mesh), l2_norm_sq(open.snapshots.back(), open.mesh));
}

TEST(Simulator, RecordIntegrity) {
    SimulationOptions opt;
    opt.t_end = 0.05;
    opt.cells = 80;
    opt.record_every = 7;
    const auto part = uniform_partition(1.0, 10);
    const auto rec = simulate(presets::paper_parabolic(), part, BumpShape{50.0, {0.04}}, 100.0, opt);
    ASSERT_EQ(rec.frames.size(), rec.size());
    ASSERT_EQ(rec.controls.size(), rec.size());
    EXPECT_EQ(rec.size(), 1 + rec.steps / 7 + (rec.steps % 7 != 0 ? 1 : 0));
    EXPECT_DOUBLE_EQ(rec.snapshots.back().t, 0.05);
    EXPECT_EQ(rec.snapshots.front().t, 0.0);
    for (std::size_t i = 1; i < rec.size(); ++i) EXPECT_GT(rec.snapshots[i].t, rec.snapshots[i - 1].t);
    for (std::size_t i = 0; i < rec.size(); ++i) {
        EXPECT_EQ(rec.frames[i].t, rec.snapshots[i].t);
        for (std::size_t j = 0; j < part.size(); ++j)
            EXPECT_EQ(rec.frames[i].readings[j], rec.snapshots[i].z[rec.sensor_nodes[j]]);
        const auto expect = control_profile(*rec.controller, rec.frames[i], rec.mesh.nodes());
        EXPECT_EQ(rec.controls[i], expect);
        EXPECT_EQ(rec.snapshots[i].z.size(), rec.mesh.size());
        EXPECT_FALSE(rec.snapshots[i].has_velocity());
    }
    EXPECT_EQ(rec.shape_label(), "bump");
    EXPECT_EQ(rec.gain(), 100.0);
}

TEST(Simulator, HyperbolicRecordsVelocity) {
    SimulationOptions opt;
    opt.t_end = 0.05;
    opt.record_every = 4;
    const auto rec = simulate(presets::paper_hyperbolic(), uniform_partition(1.0, 10), ConstantShape{}, 100.0, opt);
    for (const auto& s : rec.snapshots) {
        ASSERT_TRUE(s.has_velocity());
        EXPECT_EQ(s.zt.size(), rec.mesh.size());
        EXPECT_EQ(s.zt.front(), 0.0);
        EXPECT_EQ(s.zt.back(), 0.0);
    }
}

TEST(Simulator, DivergenceIsReported) {
    SimulationOptions opt;
    opt.t_end = 1.0;
    opt.cells = 20;
    opt.blowup_threshold = 10.0;
    try {
        simulate(constant_plant("unstable", 0.0, 60.0), std::nullopt, opt);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_GT(e.step(), 0u);
        EXPECT_GT(e.time(), 0.0);
        EXPECT_LT(e.time(), 1.0);
    }
}

TEST(Simulator, StepGuard) {
    const Mesh mesh(1.0, 100);
    EXPECT_DOUBLE_EQ(stability_guard(presets::heat(), mesh), 0.2 * 1e-4);
    EXPECT_DOUBLE_EQ(stability_guard(presets::paper_parabolic(), mesh), 0.2 * 1e-4 / 2.0);
    EXPECT_DOUBLE_EQ(stability_guard(presets::wave(), mesh), 0.5 * 0.01);
    SimulationOptions opt;
    opt.cells = 100;
    opt.t_end = 1e-3;
    opt.dt = 3e-5;
    EXPECT_THROW(simulate(presets::heat(), std::nullopt, opt), ArgumentError);
    opt.enforce_guard = false;
    EXPECT_NO_THROW(simulate(presets::heat(), std::nullopt, opt));
    opt.t_end = 0.0;
    EXPECT_THROW(simulate(presets::heat(), std::nullopt, opt), ArgumentError);
}

TEST(Simulator, MeshValidation) {
    EXPECT_THROW(Mesh(1.0, 3), ArgumentError);
    EXPECT_THROW(Mesh(0.0, 10), ArgumentError);
    const Mesh m(2.0, 8);
    EXPECT_EQ(m.size(), 9u);
    EXPECT_EQ(m.node(8), 2.0);
    EXPECT_EQ(m.spacing(), 0.25);
}

TEST(Simulator, Deterministic) {
    SimulationOptions opt;
    opt.t_end = 0.02;
    opt.cells = 80;
    const auto a = simulate(presets::paper_parabolic(), uniform_partition(1.0, 2), ConstantShape{}, 100.0, opt);
    const auto b = simulate(presets::paper_parabolic(), uniform_partition(1.0, 2), ConstantShape{}, 100.0, opt);
    EXPECT_EQ(a.snapshots.back().z, b.snapshots.back().z);
}

}  // namespace
}  // namespace ssc
