#pragma once

// Randomized property suites shared by the unit tests and the acceptance runner.
// Each returns ok plus a human-readable account of the worst case seen.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "oracles/oracles.hpp"
#include "ssc/analysis.hpp"
#include "ssc/controller.hpp"
#include "ssc/shapes.hpp"
#include "ssc/simulator.hpp"

namespace ssc::property {

struct Result {
    bool ok = true;
    std::string detail;

    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
};

struct ShapeCase {
    std::string name;
    ShapeSpec spec;
    double zbar_max;  ///< keeps raised-cosine supports inside their intervals (no clamping)
};

/// Families with parameters moderate enough for a 1e-7 central difference to resolve them.
inline std::vector<ShapeCase> shape_cases() {
    return {{"constant", ConstantShape{}, 3.0},
            {"raised-cosine", RaisedCosineShape{200.0, ClampPolicy::Warn}, 1.4},
            {"bump", BumpShape{1.0, {0.04}, BumpForm::Normalized}, 3.0}};
}

/// Interpolation phi(xbar) = 1, range [0, 1], derivative vs central difference (1e-4 abs),
/// C^1 seam at support edges, and boundedness of |phi_x zbar|, on `samples` random points.
inline Result shape_suite(std::size_t samples = 10000, std::uint64_t seed = 2024) {
    Result r;
    const auto part = uniform_partition(1.0, 10);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst_fd = 0.0;
    for (const auto& c : shape_cases()) {
        const auto locals = bind_shape(c.spec, part);
        for (std::size_t i = 0; i < samples; ++i) {
            const auto j = static_cast<std::size_t>(u01(rng) * static_cast<double>(part.size())) % part.size();
            const auto iv = part.interval(j);
            const double xbar = part.sensor(j);
            const double zbar = (2.0 * u01(rng) - 1.0) * c.zbar_max;
            const double x = iv.lo + 1e-6 + (iv.width() - 2e-6) * u01(rng);
            const auto& s = locals[j];
            const double v = shape_value(s, x, xbar, zbar, iv);
            if (!(v >= 0.0 && v <= 1.0)) r.fail(c.name + ": value " + std::to_string(v) + " outside [0,1]");
            if (shape_value(s, xbar, xbar, zbar, iv) != 1.0) r.fail(c.name + ": phi(xbar) != 1");
            const double d = shape_derivative(s, x, xbar, zbar, iv);
            const double fd =
                oracle::central_difference([&](double y) { return shape_value(s, y, xbar, zbar, iv); }, x, 1e-7);
            worst_fd = std::max(worst_fd, std::abs(d - fd));
            if (!(std::abs(d - fd) <= 1e-4))
                r.fail(c.name + ": derivative " + std::to_string(d) + " vs difference " + std::to_string(fd) +
                       " at x=" + std::to_string(x));
            if (!std::isfinite(d * zbar)) r.fail(c.name + ": unbounded derivative");
            const auto sup = support(s, xbar, zbar, iv);
            if (!std::holds_alternative<ConstantShape>(s)) {
                for (double edge : {sup.lo + 1e-8, sup.hi - 1e-8}) {
                    const double ve = shape_value(s, edge, xbar, zbar, iv);
                    const double de = shape_derivative(s, edge, xbar, zbar, iv);
                    if (!(ve <= 1e-6 && std::abs(de) <= 1e-3))
                        r.fail(c.name + ": not C1 at support edge (value " + std::to_string(ve) + ", slope " +
                               std::to_string(de) + ")");
                }
                if (shape_value(s, sup.lo - 1e-9, xbar, zbar, iv) != 0.0 && sup.lo > iv.lo)
                    r.fail(c.name + ": nonzero outside support");
            }
        }
    }
    if (r.ok) r.detail = "3 families x " + std::to_string(samples) + " points, max |phi_x - FD| = " +
                         std::to_string(worst_fd);
    return r;
}

/// u(xbar_j) = -K z(xbar_j) for every family, Constant-law superposition, support containment.
inline Result controller_suite(std::size_t frames = 200, std::uint64_t seed = 99) {
    Result r;
    const auto part = uniform_partition(1.0, 10);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const double K = 100.0;
    std::vector<double> mesh(401);
    for (std::size_t k = 0; k < mesh.size(); ++k) mesh[k] = static_cast<double>(k) / 400.0;
    for (const auto& c : shape_cases()) {
        const ControllerSpec ctrl(K, c.spec, part);
        for (std::size_t f = 0; f < frames; ++f) {
            SensorFrame a{0.0, {}}, b{0.0, {}}, sum{0.0, {}};
            for (std::size_t j = 0; j < part.size(); ++j) {
                a.readings.push_back(std::clamp(g(rng), -c.zbar_max, c.zbar_max) * 0.5);
                b.readings.push_back(std::clamp(g(rng), -c.zbar_max, c.zbar_max) * 0.5);
                sum.readings.push_back(a.readings.back() + b.readings.back());
            }
            for (std::size_t j = 0; j < part.size(); ++j)
                if (control_field(ctrl, a, part.sensor(j)) != -K * a.readings[j])
                    r.fail(c.name + ": u(xbar) != -K z(xbar)");
            const auto ua = control_profile(ctrl, a, mesh);
            for (std::size_t k = 0; k < mesh.size(); ++k) {
                const auto j = part.locate(mesh[k]);
                const auto sup = support(ctrl.local_shape(j), part.sensor(j), a.readings[j], part.interval(j));
                if (ua[k] != 0.0 && (mesh[k] < sup.lo || mesh[k] > sup.hi))
                    r.fail(c.name + ": control outside shape support");
            }
            if (c.name == "constant") {
                const auto ub = control_profile(ctrl, b, mesh), us = control_profile(ctrl, sum, mesh);
                for (std::size_t k = 0; k < mesh.size(); ++k)
                    if (std::abs(us[k] - ua[k] - ub[k]) > 1e-12 * (1.0 + std::abs(us[k])))
                        r.fail("constant: superposition fails");
            }
        }
    }
    if (r.ok) r.detail = "3 families x " + std::to_string(frames) + " frames";
    return r;
}

/// V' = -delta V + f(t) with |f| <= beta: V(t) <= e^{-delta t} V(0) + beta/delta + 1e-8.
inline Result lemma2_suite(std::size_t cases = 50, std::uint64_t seed = 5) {
    Result r;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double slack = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cases; ++c) {
        const double delta = 0.1 + 5.0 * u(rng), beta = 2.0 * u(rng), v0 = 3.0 * u(rng);
        const double w1 = 1.0 + 40.0 * u(rng), w2 = 0.5 + 3.0 * u(rng), ph = 6.0 * u(rng);
        auto f = [=](double t) { return beta * (0.6 * std::sin(w1 * t + ph) + 0.4 * std::cos(w2 * t)); };
        const auto traj = oracle::rk4_scalar([&](double t, double v) { return -delta * v + f(t); }, v0, 10.0, 20000);
        for (const auto& [t, v] : traj) {
            const double bound = std::exp(-delta * t) * v0 + beta / delta;
            slack = std::min(slack, bound - v);
            if (v > bound + 1e-8) r.fail("bound violated at t=" + std::to_string(t));
        }
    }
    if (r.ok) r.detail = std::to_string(cases) + " ODEs, min slack " + std::to_string(slack);
    return r;
}

/// Discrete energy int (a1 z_x^2 + z_t^2) of the undamped wave drifts < 0.5% over [0, 1].
inline Result wave_energy_suite(double* drift_out = nullptr) {
    Result r;
    SimulationOptions opt;
    opt.t_end = 1.0;
    opt.record_every = 10;
    const auto rec = simulate(presets::wave(), std::nullopt, opt);
    auto energy = [&](const StateSnapshot& s) {
        std::vector<double> v2(s.zt.size());
        for (std::size_t k = 0; k < v2.size(); ++k) v2[k] = s.zt[k] * s.zt[k];
        return gradient_energy(s.z, rec.mesh, 1.0) + trapezoid(v2, rec.mesh.spacing());
    };
    const double e0 = energy(rec.snapshots.front());
    double drift = 0.0;
    for (const auto& s : rec.snapshots) drift = std::max(drift, std::abs(energy(s) - e0) / e0);
    if (drift_out) *drift_out = drift;
    if (!(drift < 5e-3)) r.fail("relative energy drift " + std::to_string(drift));
    else r.detail = "max relative drift " + std::to_string(drift);
    return r;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace ssc::property
