#pragma once

// Method-of-lines simulation of the closed loops on a uniform mesh.
//
// Spatial scheme at interior node k (spacing D):
//   z_x  = (z_{k+1} - z_k) / D                      (forward difference)
//   z_xx = (z_{k+1} - 2 z_k + z_{k-1}) / D^2
//   (a1 z_x)_x = a1(x_k) z_xx + a1'(x_k) z_x        (expanded, default)
//              or (a1_{k+1/2}(z_{k+1}-z_k) - a1_{k-1/2}(z_k-z_{k-1})) / D^2   (conservative)
// Boundary nodes are algebraic: z_0 = z_M = 0 (Dirichlet) or z_0 = z_1 / (1 + gamma D), z_M = 0 (mixed).
// Time stepping is classical RK4; sensors are re-read from the stage state at every stage.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssc/controller.hpp"
#include "ssc/error.hpp"
#include "ssc/plant.hpp"
#include "ssc/sampling.hpp"

namespace ssc {

class Mesh {
public:
    Mesh(double length, std::size_t cells) : length_(length), cells_(cells) {
        if (cells_ < 4) throw ArgumentError("mesh needs at least 4 cells");
        if (!(length_ > 0.0)) throw ArgumentError("mesh length must be > 0");
        spacing_ = length_ / static_cast<double>(cells_);
        nodes_.resize(cells_ + 1);
        for (std::size_t k = 0; k <= cells_; ++k)
            nodes_[k] = length_ * static_cast<double>(k) / static_cast<double>(cells_);
        nodes_.back() = length_;
    }

    std::size_t cells() const { return cells_; }
    std::size_t size() const { return nodes_.size(); }
    double spacing() const { return spacing_; }
    double length() const { return length_; }
    std::span<const double> nodes() const { return nodes_; }
    double node(std::size_t k) const { return nodes_[k]; }

    bool operator==(const Mesh& o) const { return cells_ == o.cells_ && length_ == o.length_; }

private:
    double length_;
    std::size_t cells_;
    double spacing_;
    std::vector<double> nodes_;
};

struct StateSnapshot {
    double t = 0.0;
    std::vector<double> z;
    std::vector<double> zt;  ///< empty for parabolic runs

    bool has_velocity() const { return !zt.empty(); }
};

enum class DiffusionForm { Expanded, Conservative };

struct InitialCondition {
    std::string name = "sine";
    std::function<double(double)> displacement;
    std::function<double(double)> velocity;

    /// z(x, 0) = amplitude * sin(pi x / l), z_t(x, 0) = 0
    static InitialCondition sine(double length, double amplitude = 1.0) {
        return {"sine", [=](double x) { return amplitude * std::sin(std::numbers::pi * x / length); },
                [](double) { return 0.0; }};
    }

    static InitialCondition zero() {
        return {"zero", [](double) { return 0.0; }, [](double) { return 0.0; }};
    }
};

struct SimulationOptions {
    std::size_t cells = 160;
    std::optional<double> dt;  ///< defaults to the stability guard
    bool enforce_guard = true;
    double t_end = 1.0;
    std::size_t record_every = 100;
    InitialCondition initial = InitialCondition::sine(1.0);
    DiffusionForm diffusion = DiffusionForm::Expanded;
    double blowup_threshold = 1e12;
};

/// Largest admissible step: 0.2 D^2 / max a1 (parabolic), 0.5 D / sqrt(max a1) (hyperbolic).
inline double stability_guard(const PlantSpec& plant, const Mesh& mesh) {
    const double a1_max = plant.a1().bounds().hi;
    const double D = mesh.spacing();
    return plant.order() == Order::Parabolic ? 0.2 * D * D / a1_max : 0.5 * D / std::sqrt(a1_max);
}

/// Nearest mesh node to each sensor (ties go to the lower index). The node must be
/// within D/2 of the sensor and inside the sensor's interval.
inline std::vector<std::size_t> snap_sensors(const ActuationPartition& p, const Mesh& mesh) {
    if (std::abs(p.length() - mesh.length()) > 1e-12 * mesh.length())
        throw ArgumentError("partition and mesh lengths differ");
    const double D = mesh.spacing();
    std::vector<std::size_t> out;
    out.reserve(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double xs = p.sensor(j);
        auto k = static_cast<std::size_t>(std::floor(xs / D));
        k = std::min(k, mesh.cells());
        if (k + 1 <= mesh.cells() && std::abs(mesh.node(k + 1) - xs) < std::abs(xs - mesh.node(k))) ++k;
        const double dist = std::abs(mesh.node(k) - xs);
        const auto iv = p.interval(j);
        if (dist > 0.5 * D * (1.0 + 1e-9))
            throw ArgumentError("sensor " + std::to_string(j) + " is farther than D/2 from every mesh node");
        if (mesh.node(k) < iv.lo || mesh.node(k) > iv.hi)
            throw ArgumentError("sensor " + std::to_string(j) + " snaps to a node outside its interval");
        out.push_back(k);
    }
    return out;
}

inline SensorFrame sensor_readings(const StateSnapshot& s, const ActuationPartition& p, const Mesh& mesh) {
    SensorFrame frame{s.t, {}};
    for (std::size_t k : snap_sensors(p, mesh)) frame.readings.push_back(s.z.at(k));
    return frame;
}

/// Semidiscrete right-hand side. State layout: [z_0..z_M] or [z_0..z_M, zt_0..zt_M].
class ClosedLoopRhs {
public:
    ClosedLoopRhs(const PlantSpec& plant, const Mesh& mesh, std::optional<ControllerSpec> controller,
                  DiffusionForm form = DiffusionForm::Expanded)
        : plant_(plant), mesh_(mesh), controller_(std::move(controller)), form_(form) {
        if (std::abs(plant_.length() - mesh_.length()) > 1e-12 * mesh_.length())
            throw ArgumentError("plant and mesh lengths differ");
        const std::size_t n = mesh_.size();
        a1_.resize(n);
        a1x_.resize(n);
        a2_.resize(n);
        a1_half_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double x = mesh_.node(k);
            a1_[k] = plant_.a1()(0.0, x, 0.0);
            a1x_[k] = plant_.a1().d_dx(x, plant_.length());
            a2_[k] = plant_.a2()(0.0, x, 0.0);
            a1_half_[k] = k + 1 < n ? plant_.a1()(0.0, x + 0.5 * mesh_.spacing(), 0.0) : a1_[k];
        }
        if (controller_) {
            sensor_nodes_ = snap_sensors(controller_->partition(), mesh_);
            node_interval_.resize(n);
            for (std::size_t k = 0; k < n; ++k) node_interval_[k] = controller_->partition().locate(mesh_.node(k));
        }
        u_.assign(n, 0.0);
    }

    std::size_t state_size() const { return hyperbolic() ? 2 * mesh_.size() : mesh_.size(); }
    bool hyperbolic() const { return plant_.order() == Order::Hyperbolic; }
    const Mesh& mesh() const { return mesh_; }
    const std::optional<ControllerSpec>& controller() const { return controller_; }
    std::span<const std::size_t> sensor_nodes() const { return sensor_nodes_; }

    SensorFrame readings(double t, std::span<const double> z) const {
        SensorFrame frame{t, {}};
        frame.readings.reserve(sensor_nodes_.size());
        for (std::size_t k : sensor_nodes_) frame.readings.push_back(z[k]);
        return frame;
    }

    /// Control profile on the mesh for the given sensor frame (zeros when open loop).
    void control(const SensorFrame& frame, std::span<double> u) const {
        if (!controller_) {
            std::fill(u.begin(), u.end(), 0.0);
            return;
        }
        for (std::size_t k = 0; k < mesh_.size(); ++k) {
            const std::size_t j = node_interval_[k];
            u[k] = controller_->control_in_interval(j, mesh_.node(k), frame.readings[j]);
        }
    }

    void impose_boundary(std::span<double> y) const {
        impose_on(y.subspan(0, mesh_.size()));
        if (hyperbolic()) impose_on(y.subspan(mesh_.size(), mesh_.size()));
    }

    void operator()(double t, std::span<const double> y, std::span<double> dydt) const {
        const std::size_t n = mesh_.size(), M = mesh_.cells();
        const double D = mesh_.spacing();
        const auto z = y.subspan(0, n);
        control(readings(t, z), u_);
        const auto& f = plant_.f();
        const bool uniform_f = !f.uses_x() && !f.uses_z();
        const double f_uniform = uniform_f ? f(0.0, 0.0, t) : 0.0;

        for (std::size_t k = 1; k < M; ++k) {
            const double x = mesh_.node(k);
            const double dz_fwd = z[k + 1] - z[k];
            const double zx = dz_fwd / D;
            double diffusion;
            if (form_ == DiffusionForm::Expanded)
                diffusion = a1_[k] * (z[k + 1] - 2.0 * z[k] + z[k - 1]) / (D * D) + a1x_[k] * zx;
            else
                diffusion = (a1_half_[k] * dz_fwd - a1_half_[k - 1] * (z[k] - z[k - 1])) / (D * D);
            const double rhs = diffusion + a2_[k] * zx + plant_.phi()(z[k], x, t) * z[k] + u_[k] +
                               (uniform_f ? f_uniform : f(z[k], x, t));
            if (hyperbolic()) {
                const double zt = y[n + k];
                dydt[k] = zt;
                dydt[n + k] = rhs - (*plant_.b())(z[k], x, t) * zt;
            } else {
                dydt[k] = rhs;
            }
        }
        boundary_rates(dydt.subspan(0, n));
        if (hyperbolic()) boundary_rates(dydt.subspan(n, n));
    }

private:
    double mixed_factor() const { return 1.0 / (1.0 + plant_.boundary().gamma * mesh_.spacing()); }

    void impose_on(std::span<double> v) const {
        v.back() = 0.0;
        v.front() = plant_.boundary().kind == BoundaryCondition::Kind::Dirichlet ? 0.0 : v[1] * mixed_factor();
    }

    void boundary_rates(std::span<double> v) const { impose_on(v); }

    PlantSpec plant_;
    Mesh mesh_;
    std::optional<ControllerSpec> controller_;
    DiffusionForm form_;
    std::vector<double> a1_, a1x_, a2_, a1_half_;
    std::vector<std::size_t> sensor_nodes_;
    std::vector<std::size_t> node_interval_;
    mutable std::vector<double> u_;
};

inline ClosedLoopRhs semidiscretize(const PlantSpec& plant, const Mesh& mesh,
                                    std::optional<ControllerSpec> controller,
                                    DiffusionForm form = DiffusionForm::Expanded) {
    return ClosedLoopRhs(plant, mesh, std::move(controller), form);
}

/// Time-aligned samples of state, sensor frames and control profiles.
struct TrajectoryRecord {
    PlantSpec plant;
    Mesh mesh;
    std::optional<ControllerSpec> controller;
    std::string initial_condition;
    double dt = 0.0;
    std::size_t steps = 0;
    std::vector<StateSnapshot> snapshots;
    std::vector<SensorFrame> frames;                ///< empty when open loop
    std::vector<std::vector<double>> controls;      ///< u on the mesh per sample
    std::vector<std::size_t> sensor_nodes;
    std::size_t clamped_samples = 0;                ///< raised-cosine supports clamped to their interval

    std::size_t size() const { return snapshots.size(); }
    std::vector<double> times() const {
        std::vector<double> t;
        t.reserve(snapshots.size());
        for (const auto& s : snapshots) t.push_back(s.t);
        return t;
    }
    double gain() const { return controller ? controller->gain() : 0.0; }
    std::string shape_label() const { return controller ? ssc::shape_label(controller->shape()) : "open-loop"; }
};

inline TrajectoryRecord simulate(const PlantSpec& plant, std::optional<ControllerSpec> controller,
                                 const SimulationOptions& opt) {
    if (!(opt.t_end > 0.0)) throw ArgumentError("t_end must be > 0");
    if (opt.record_every == 0) throw ArgumentError("record_every must be >= 1");
    const Mesh mesh(plant.length(), opt.cells);
    const double guard = stability_guard(plant, mesh);
    double dt = opt.dt.value_or(guard);
    if (!(dt > 0.0)) throw ArgumentError("dt must be > 0");
    if (opt.enforce_guard && dt > guard * (1.0 + 1e-12))
        throw ArgumentError("dt=" + std::to_string(dt) + " exceeds the stability guard " + std::to_string(guard));
    const auto steps = static_cast<std::size_t>(std::ceil(opt.t_end / dt - 1e-9));
    dt = opt.t_end / static_cast<double>(steps);

    const ClosedLoopRhs rhs(plant, mesh, std::move(controller), opt.diffusion);
    const std::size_t n = mesh.size(), len = rhs.state_size();

    std::vector<double> y(len, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        y[k] = opt.initial.displacement(mesh.node(k));
        if (rhs.hyperbolic()) y[n + k] = opt.initial.velocity ? opt.initial.velocity(mesh.node(k)) : 0.0;
    }
    rhs.impose_boundary(y);

    TrajectoryRecord rec{plant, mesh, rhs.controller(), opt.initial.name, dt, steps, {}, {}, {}, {}, 0};
    rec.sensor_nodes.assign(rhs.sensor_nodes().begin(), rhs.sensor_nodes().end());

    auto record = [&](double t) {
        StateSnapshot s{t, std::vector<double>(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n)), {}};
        if (rhs.hyperbolic()) s.zt.assign(y.begin() + static_cast<std::ptrdiff_t>(n), y.end());
        std::vector<double> u(n, 0.0);
        if (rec.controller) {
            auto frame = rhs.readings(t, s.z);
            rhs.control(frame, u);
            if (std::holds_alternative<RaisedCosineShape>(rec.controller->shape())) {
                const auto& p = rec.controller->partition();
                for (std::size_t j = 0; j < p.size(); ++j)
                    if (support(rec.controller->local_shape(j), p.sensor(j), frame.readings[j], p.interval(j)).clamped)
                        ++rec.clamped_samples;
            }
            rec.frames.push_back(std::move(frame));
        }
        rec.snapshots.push_back(std::move(s));
        rec.controls.push_back(std::move(u));
    };

    std::vector<double> k1(len), k2(len), k3(len), k4(len), tmp(len);
    record(0.0);
    for (std::size_t step = 1; step <= steps; ++step) {
        const double t = static_cast<double>(step - 1) * dt;
        rhs(t, y, k1);
        for (std::size_t i = 0; i < len; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        rhs(t + 0.5 * dt, tmp, k2);
        for (std::size_t i = 0; i < len; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        rhs(t + 0.5 * dt, tmp, k3);
        for (std::size_t i = 0; i < len; ++i) tmp[i] = y[i] + dt * k3[i];
        rhs(t + dt, tmp, k4);
        double peak = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (i < n) peak = std::max(peak, std::abs(y[i]));
        }
        rhs.impose_boundary(y);
        const double t_next = static_cast<double>(step) * dt;
        if (!(peak <= opt.blowup_threshold)) throw DivergenceError(step, t_next, peak);
        if (step % opt.record_every == 0 || step == steps) record(t_next);
    }
    return rec;
}

/// Convenience form for a closed loop on a given partition and shape.
inline TrajectoryRecord simulate(const PlantSpec& plant, const ActuationPartition& partition, const ShapeSpec& shape,
                                 double gain, const SimulationOptions& opt) {
    return simulate(plant, ControllerSpec(gain, shape, partition), opt);
}

}  // namespace ssc
