#pragma once

// Shape functions phi^j(x) multiplying the sensor reading z(xbar_j) inside
// interval j. Each family equals 1 at the sensor, stays in [0, 1] and is C^1
// across the edges of its support.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "ssc/error.hpp"
#include "ssc/plant.hpp"
#include "ssc/sampling.hpp"

namespace ssc {

/// phi = 1 on the whole interval (the classical piecewise-constant law).
struct ConstantShape {
    bool operator==(const ConstantShape&) const = default;
};

enum class ClampPolicy { Warn, Reject };

/// phi = 0.5 + 0.5 cos(alpha (x - xbar) / (1 + zbar^2)) on |x - xbar| <= pi (1 + zbar^2) / alpha.
/// When that half-width exceeds the interval, Warn clamps the support to the interval
/// (C^1 is lost there and the event is counted) while Reject throws.
struct RaisedCosineShape {
    double alpha = 100.0;
    ClampPolicy clamp = ClampPolicy::Warn;
    bool operator==(const RaisedCosineShape&) const = default;
};

enum class BumpForm { Normalized, PaperLiteral };

/// Exponential bump on (xbar - beta_j, xbar + beta_j).
/// Normalized: exp(-c/(beta^2 - s^2) + c/beta^2), c = alpha/(1 + zbar^2), s = x - xbar.
/// PaperLiteral keeps c/beta in place of c/beta^2, so phi(xbar) != 1 unless beta = 1.
struct BumpShape {
    double alpha = 1000.0;
    std::vector<double> beta;  ///< one value per interval, or a single value for all
    BumpForm form = BumpForm::Normalized;
    bool operator==(const BumpShape&) const = default;
};

using ShapeSpec = std::variant<ConstantShape, RaisedCosineShape, BumpShape>;

/// Bump bound to one interval.
struct LocalBump {
    double alpha;
    double beta;
    BumpForm form = BumpForm::Normalized;
};

using LocalShape = std::variant<ConstantShape, RaisedCosineShape, LocalBump>;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline std::string shape_label(const ShapeSpec& s) {
    return std::visit(overloaded{[](const ConstantShape&) { return std::string("constant"); },
                                 [](const RaisedCosineShape&) { return std::string("raised-cosine"); },
                                 [](const BumpShape&) { return std::string("bump"); }},
                      s);
}

struct Support {
    double lo;
    double hi;
    bool clamped = false;
};

inline double raised_cosine_half_width(double alpha, double zbar) {
    return std::numbers::pi * (1.0 + zbar * zbar) / alpha;
}

/// Validates the shape against the partition and returns one local shape per interval.
inline std::vector<LocalShape> bind_shape(const ShapeSpec& spec, const ActuationPartition& p) {
    std::vector<LocalShape> out;
    out.reserve(p.size());
    std::visit(
        overloaded{
            [&](const ConstantShape& c) { out.assign(p.size(), c); },
            [&](const RaisedCosineShape& rc) {
                if (!(rc.alpha > 0.0)) throw ArgumentError("raised-cosine alpha must be > 0");
                if (rc.clamp == ClampPolicy::Reject) {
                    for (std::size_t j = 0; j < p.size(); ++j) {
                        const auto iv = p.interval(j);
                        const double room = std::min(p.sensor(j) - iv.lo, iv.hi - p.sensor(j));
                        if (raised_cosine_half_width(rc.alpha, 0.0) > room)
                            throw ArgumentError("raised-cosine alpha too small: support exceeds interval " +
                                                std::to_string(j));
                    }
                }
                out.assign(p.size(), rc);
            },
            [&](const BumpShape& b) {
                if (!(b.alpha > 0.0)) throw ArgumentError("bump alpha must be > 0");
                if (b.beta.size() != 1 && b.beta.size() != p.size())
                    throw ArgumentError("bump beta needs one value or one per interval");
                for (std::size_t j = 0; j < p.size(); ++j) {
                    const double beta = b.beta.size() == 1 ? b.beta.front() : b.beta[j];
                    const auto iv = p.interval(j);
                    const double room = std::min(iv.hi - p.sensor(j), p.sensor(j) - iv.lo);
                    if (!(beta > 0.0)) throw ArgumentError("bump beta must be > 0");
                    if (beta > room * (1.0 + 1e-12))
                        throw ArgumentError("bump beta_" + std::to_string(j) +
                                            " exceeds the distance from the sensor to the interval edge");
                    out.push_back(LocalBump{b.alpha, beta, b.form});
                }
            }},
        spec);
    return out;
}

inline Support support(const LocalShape& s, double xbar, double zbar, Interval iv) {
    return std::visit(overloaded{[&](const ConstantShape&) { return Support{iv.lo, iv.hi, false}; },
                                 [&](const RaisedCosineShape& rc) {
                                     const double w = raised_cosine_half_width(rc.alpha, zbar);
                                     Support out{std::max(iv.lo, xbar - w), std::min(iv.hi, xbar + w), false};
                                     out.clamped = (xbar - w < iv.lo) || (xbar + w > iv.hi);
                                     if (out.clamped && rc.clamp == ClampPolicy::Reject)
                                         throw ArgumentError("raised-cosine support exceeds its interval");
                                     return out;
                                 },
                                 [&](const LocalBump& b) {
                                     return Support{std::max(iv.lo, xbar - b.beta), std::min(iv.hi, xbar + b.beta),
                                                    false};
                                 }},
                      s);
}

namespace detail {

inline double bump_exponent(const LocalBump& b, double s, double zbar) {
    const double c = b.alpha / (1.0 + zbar * zbar);
    const double gap = b.beta * b.beta - s * s;
    if (b.form == BumpForm::Normalized) return -c * s * s / (b.beta * b.beta * gap);
    return -c / gap + c / b.beta;
}

inline double bump_value(const LocalBump& b, double s, double zbar) {
    if (std::abs(s) >= b.beta) return 0.0;
    return std::exp(bump_exponent(b, s, zbar));
}

}  // namespace detail

inline double shape_value(const LocalShape& s, double x, double xbar, double zbar, Interval iv) {
    if (x < iv.lo || x > iv.hi) return 0.0;
    return std::visit(overloaded{[](const ConstantShape&) { return 1.0; },
                                 [&](const RaisedCosineShape& rc) {
                                     const double scale = 1.0 + zbar * zbar;
                                     const double dist = x - xbar;
                                     if (std::abs(dist) > raised_cosine_half_width(rc.alpha, zbar)) return 0.0;
                                     if (rc.clamp == ClampPolicy::Reject) support(s, xbar, zbar, iv);
                                     return 0.5 + 0.5 * std::cos(rc.alpha * dist / scale);
                                 },
                                 [&](const LocalBump& b) { return detail::bump_value(b, x - xbar, zbar); }},
                      s);
}

/// Exact d/dx of shape_value at offset s = x - xbar from the sensor, for x already known to lie
/// in the interval. Taking the offset directly avoids the cancellation in x - xbar near the sensor.
inline double shape_derivative_at_offset(const LocalShape& shape, double s, double zbar) {
    return std::visit(overloaded{[](const ConstantShape&) { return 0.0; },
                                 [&](const RaisedCosineShape& rc) {
                                     const double scale = 1.0 + zbar * zbar;
                                     if (std::abs(s) > raised_cosine_half_width(rc.alpha, zbar)) return 0.0;
                                     return -0.5 * (rc.alpha / scale) * std::sin(rc.alpha * s / scale);
                                 },
                                 [&](const LocalBump& b) {
                                     const double phi = detail::bump_value(b, s, zbar);
                                     if (phi == 0.0) return 0.0;
                                     const double c = b.alpha / (1.0 + zbar * zbar);
                                     const double gap = b.beta * b.beta - s * s;
                                     return -2.0 * c * s / (gap * gap) * phi;
                                 }},
                      shape);
}

/// Exact d/dx of shape_value; zero outside the support.
inline double shape_derivative(const LocalShape& s, double x, double xbar, double zbar, Interval iv) {
    if (x < iv.lo || x > iv.hi) return 0.0;
    return shape_derivative_at_offset(s, x - xbar, zbar);
}

}  // namespace ssc
