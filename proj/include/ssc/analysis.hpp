#pragma once

// Post-processing of trajectory records: norms, Lyapunov functionals, decay-bound
// verification and control-cost comparisons. All spatial integrals on the mesh use
// the composite trapezoidal rule, all time integrals the trapezoidal rule on the
// recorded sample times.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ssc/controller.hpp"
#include "ssc/error.hpp"
#include "ssc/lmi.hpp"
#include "ssc/simulator.hpp"

namespace ssc {

inline double trapezoid(std::span<const double> values, double spacing) {
    if (values.size() < 2) return 0.0;
    double s = 0.5 * (values.front() + values.back());
    for (std::size_t k = 1; k + 1 < values.size(); ++k) s += values[k];
    return s * spacing;
}

/// Cumulative trapezoid over nonuniform abscissae; out[0] = 0.
inline std::vector<double> cumulative_trapezoid(std::span<const double> t, std::span<const double> y) {
    std::vector<double> out(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
    return out;
}

inline double l2_norm_sq(const StateSnapshot& s, const Mesh& mesh) {
    std::vector<double> sq(s.z.size());
    std::transform(s.z.begin(), s.z.end(), sq.begin(), [](double v) { return v * v; });
    return trapezoid(sq, mesh.spacing());
}

/// int a z_x^2 dx with the forward difference z_x = (z_{k+1} - z_k)/D held on each cell.
inline double gradient_energy(std::span<const double> z, const Mesh& mesh, double weight = 1.0) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < z.size(); ++k) {
        const double d = z[k + 1] - z[k];
        s += d * d;
    }
    return weight * s / mesh.spacing();
}

/// int [a z_x^2 + z^2 + p z z_t + z_t^2] dx; nonnegative for |p| < 0.5.
inline double lyapunov_hyperbolic(const StateSnapshot& s, const Mesh& mesh, double a_lower, double p) {
    if (!s.has_velocity()) throw ArgumentError("hyperbolic Lyapunov functional needs z_t");
    if (!(std::abs(p) < 0.5)) throw ArgumentError("p must lie in (-0.5, 0.5)");
    std::vector<double> density(s.z.size());
    for (std::size_t k = 0; k < s.z.size(); ++k)
        density[k] = s.z[k] * s.z[k] + p * s.z[k] * s.zt[k] + s.zt[k] * s.zt[k];
    return gradient_energy(s.z, mesh, a_lower) + trapezoid(density, mesh.spacing());
}

/// sum_j int (d/dx F^j)^2 dx for one sensor frame, integrated on the exact shape derivative
/// (not the mesh). Panels are refined geometrically toward the sensor so that bumps much
/// narrower than the support are resolved.
inline double shape_gradient_sq_integral(const ControllerSpec& c, const SensorFrame& frame) {
    c.check_frame(frame);
    using boost::math::quadrature::gauss_kronrod;
    const auto& p = c.partition();
    double total = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double zbar = frame.readings[j];
        if (zbar == 0.0) continue;
        const auto& local = c.local_shape(j);
        if (std::holds_alternative<ConstantShape>(local)) continue;
        const auto iv = p.interval(j);
        const double xbar = p.sensor(j);
        const auto sup = support(local, xbar, zbar, iv);
        // Integrate in the offset s = x - xbar; panels shrink geometrically toward s = 0.
        auto integrand = [&](double s) {
            const double d = shape_derivative_at_offset(local, s, zbar) * zbar;
            return d * d;
        };
        const double lo = sup.lo - xbar, hi = sup.hi - xbar;
        std::vector<double> cuts{lo, hi};
        for (int level = 0; level <= 60; ++level) {
            const double scale = std::ldexp(1.0, -level);
            if (lo * scale < 0.0) cuts.push_back(lo * scale);
            if (hi * scale > 0.0) cuts.push_back(hi * scale);
        }
        if (lo < 0.0 && hi > 0.0) cuts.push_back(0.0);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        // Each panel is mapped onto [-1, 1] first: the adaptive error test compares an
        // unscaled error with a scaled tolerance, which never passes on tiny panels.
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double mid = 0.5 * (cuts[i] + cuts[i + 1]), half = 0.5 * (cuts[i + 1] - cuts[i]);
            auto unit = [&](double u) { return half * integrand(mid + half * u); };
            total += gauss_kronrod<double, 31>::integrate(unit, -1.0, 1.0, 8, 1e-12);
        }
    }
    return total;
}

inline double disturbance_sq_integral(const PlantSpec& plant, const Mesh& mesh, double t) {
    std::vector<double> sq(mesh.size());
    for (std::size_t k = 0; k < mesh.size(); ++k) {
        const double f = plant.f()(0.0, mesh.node(k), t);
        sq[k] = f * f;
    }
    return trapezoid(sq, mesh.spacing());
}

/// Empirical sups over the recorded times of the two integrals entering gamma,
/// plus the a-priori bound fbar^2 l on the disturbance term.
struct GammaInputs {
    double f_sq_sup = 0.0;
    double fx_sq_sup = 0.0;
    double f_sq_analytic = 0.0;
};

inline GammaInputs gamma_inputs(const TrajectoryRecord& rec) {
    GammaInputs g;
    const auto fb = rec.plant.f().bounds();
    const double fbar = std::max(std::abs(fb.lo), std::abs(fb.hi));
    g.f_sq_analytic = fbar * fbar * rec.plant.length();
    for (std::size_t i = 0; i < rec.size(); ++i) {
        g.f_sq_sup = std::max(g.f_sq_sup, disturbance_sq_integral(rec.plant, rec.mesh, rec.snapshots[i].t));
        if (rec.controller) g.fx_sq_sup = std::max(g.fx_sq_sup, shape_gradient_sq_integral(*rec.controller, rec.frames[i]));
    }
    return g;
}

struct DecayReport {
    double delta = 0.0;
    double gamma = 0.0;
    double v0 = 0.0;
    std::vector<double> t;
    std::vector<double> V;
    std::vector<double> bound;
    double violation = 0.0;  ///< max_t V(t) - bound(t)
    GammaInputs inputs;
};

/// V(t) against V(0) e^{-2 delta t} + gamma/(2 delta) for an arbitrary functional.
inline DecayReport decay_report(const TrajectoryRecord& rec, double delta, double gamma,
                                const std::function<double(const StateSnapshot&)>& functional) {
    DecayReport r;
    r.delta = delta;
    r.gamma = gamma;
    r.violation = -std::numeric_limits<double>::infinity();
    for (const auto& s : rec.snapshots) {
        const double v = functional(s);
        if (r.t.empty()) r.v0 = v;
        const double b = decay_bound(r.v0, delta, gamma, s.t);
        r.t.push_back(s.t);
        r.V.push_back(v);
        r.bound.push_back(b);
        r.violation = std::max(r.violation, v - b);
    }
    return r;
}

/// Lyapunov functional matching the certificate: int z^2 (parabolic) or the mixed
/// energy with a = a1 lower bound and the certificate's p (hyperbolic).
inline std::function<double(const StateSnapshot&)> certificate_functional(const LmiCertificate& cert,
                                                                          const Mesh& mesh) {
    if (cert.bounds.order == Order::Parabolic)
        return [mesh](const StateSnapshot& s) { return l2_norm_sq(s, mesh); };
    const double a = cert.bounds.a1_lower, p = cert.tuning.cross_weight;
    return [mesh, a, p](const StateSnapshot& s) { return lyapunov_hyperbolic(s, mesh, a, p); };
}

inline DecayReport verify_decay(const TrajectoryRecord& rec, const LmiCertificate& cert) {
    if (!cert.feasible) throw ArgumentError("verify_decay needs a feasible certificate");
    if (!rec.controller) throw ArgumentError("verify_decay needs a closed-loop record");
    const auto expected = certificate_bounds(rec.plant, rec.controller->partition());
    if (!(expected == cert.bounds)) throw ArgumentError("certificate bounds do not match the recorded scenario");
    if (cert.tuning.gain != rec.controller->gain()) throw ArgumentError("certificate gain differs from the record");
    const auto inputs = gamma_inputs(rec);
    const double gamma = gamma_bound(cert.tuning.beta1, cert.tuning.beta2, inputs.f_sq_sup, inputs.fx_sq_sup);
    auto report = decay_report(rec, cert.tuning.decay_rate, gamma, certificate_functional(cert, rec.mesh));
    report.inputs = inputs;
    return report;
}

struct ActuationReport {
    std::vector<double> t;
    std::vector<double> int_abs_u;     ///< int |u| dx per sample
    std::vector<double> int_sq_u;      ///< int u^2 dx per sample
    double total_abs = 0.0;            ///< int int |u| dx dt
    double peak_abs = 0.0;             ///< max |u| over mesh and samples
};

inline ActuationReport actuation_energy(const TrajectoryRecord& rec) {
    ActuationReport r;
    r.t = rec.times();
    for (const auto& u : rec.controls) {
        std::vector<double> a(u.size()), s(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) {
            a[k] = std::abs(u[k]);
            s[k] = u[k] * u[k];
            r.peak_abs = std::max(r.peak_abs, a[k]);
        }
        r.int_abs_u.push_back(trapezoid(a, rec.mesh.spacing()));
        r.int_sq_u.push_back(trapezoid(s, rec.mesh.spacing()));
    }
    if (!r.t.empty()) r.total_abs = cumulative_trapezoid(r.t, r.int_abs_u).back();
    return r;
}

struct CostReport {
    std::string label_a;
    std::string label_b;
    std::vector<double> t;
    std::vector<double> I;  ///< int_0^t sum_j (|u_A(xbar_j)| - |u_B(xbar_j)|) ds
    std::vector<double> int_abs_u_a;
    std::vector<double> int_abs_u_b;
    std::vector<double> int_sq_u_a;
    std::vector<double> int_sq_u_b;
};

/// Sensor-point cost difference between a baseline run (A) and a proposed run (B).
inline CostReport cost_integral_I(const TrajectoryRecord& a, const TrajectoryRecord& b) {
    if (!a.controller || !b.controller) throw ArgumentError("cost comparison needs two closed-loop records");
    if (!(a.mesh == b.mesh)) throw ArgumentError("records use different meshes");
    if (!(a.controller->partition() == b.controller->partition())) throw ArgumentError("records use different partitions");
    if (a.controller->gain() != b.controller->gain()) throw ArgumentError("records use different gains");
    if (a.plant.name() != b.plant.name()) throw ArgumentError("records use different plants");
    if (a.times() != b.times()) throw ArgumentError("records use different time grids");

    CostReport r;
    r.label_a = a.shape_label();
    r.label_b = b.shape_label();
    r.t = a.times();
    const auto& p = a.controller->partition();
    std::vector<double> diff(r.t.size());
    for (std::size_t i = 0; i < r.t.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j)
            s += std::abs(control_field(*a.controller, a.frames[i], p.sensor(j))) -
                 std::abs(control_field(*b.controller, b.frames[i], p.sensor(j)));
        diff[i] = s;
    }
    r.I = cumulative_trapezoid(r.t, diff);
    const auto ea = actuation_energy(a), eb = actuation_energy(b);
    r.int_abs_u_a = ea.int_abs_u;
    r.int_abs_u_b = eb.int_abs_u;
    r.int_sq_u_a = ea.int_sq_u;
    r.int_sq_u_b = eb.int_sq_u;
    return r;
}

/// First time ||z(t)||_{L2} drops to `fraction` of ||z(0)||_{L2}, linearly interpolated
/// between samples.
inline std::optional<double> decay_time(const TrajectoryRecord& rec, double fraction) {
    if (rec.snapshots.empty()) return std::nullopt;
    const double target = fraction * std::sqrt(l2_norm_sq(rec.snapshots.front(), rec.mesh));
    double prev = std::sqrt(l2_norm_sq(rec.snapshots.front(), rec.mesh));
    if (prev <= target) return rec.snapshots.front().t;
    for (std::size_t i = 1; i < rec.size(); ++i) {
        const double cur = std::sqrt(l2_norm_sq(rec.snapshots[i], rec.mesh));
        if (cur <= target) {
            const double t0 = rec.snapshots[i - 1].t, t1 = rec.snapshots[i].t;
            return t0 + (t1 - t0) * (prev - target) / (prev - cur);
        }
        prev = cur;
    }
    return std::nullopt;
}

}  // namespace ssc
