#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ssc/error.hpp"
#include "ssc/plant.hpp"

namespace ssc {

/// Breakpoints 0 = x_0 < ... < x_N = l with one sensor strictly inside each
/// interval, and a spacing bound delta >= max(x_{j+1} - x_j).
class ActuationPartition {
public:
    ActuationPartition(std::vector<double> breakpoints, std::vector<double> sensors,
                       std::optional<double> delta = std::nullopt)
        : breakpoints_(std::move(breakpoints)), sensors_(std::move(sensors)) {
        if (breakpoints_.size() < 2) throw ArgumentError("partition needs at least one interval");
        if (breakpoints_.front() != 0.0) throw ArgumentError("partition must start at x_0 = 0");
        if (sensors_.size() + 1 != breakpoints_.size())
            throw ArgumentError("partition needs exactly one sensor per interval");
        double max_spacing = 0.0;
        for (std::size_t j = 0; j + 1 < breakpoints_.size(); ++j) {
            const double lo = breakpoints_[j], hi = breakpoints_[j + 1];
            if (!(hi > lo)) throw ArgumentError("partition breakpoints must be strictly increasing");
            if (!(sensors_[j] > lo && sensors_[j] < hi))
                throw ArgumentError("sensor " + std::to_string(j) + " must lie strictly inside its interval");
            max_spacing = std::max(max_spacing, hi - lo);
        }
        delta_ = delta.value_or(max_spacing);
        // Uniform partitions store l/N, which may sit a few ulps below a rounded width.
        if (delta_ < max_spacing * (1.0 - 1e-12)) throw ArgumentError("delta must bound every interval width");
    }

    /// Equal-width intervals with midpoint sensors; delta = l / N exactly.
    static ActuationPartition uniform(double length, int intervals) {
        if (!(length > 0.0)) throw ArgumentError("partition length must be > 0");
        if (intervals < 1) throw ArgumentError("partition needs N >= 1");
        const auto n = static_cast<std::size_t>(intervals);
        std::vector<double> bp(n + 1), sensors(n);
        for (std::size_t j = 0; j <= n; ++j) bp[j] = length * static_cast<double>(j) / static_cast<double>(n);
        bp[n] = length;
        for (std::size_t j = 0; j < n; ++j) sensors[j] = 0.5 * (bp[j] + bp[j + 1]);
        return ActuationPartition(std::move(bp), std::move(sensors), length / static_cast<double>(n));
    }

    std::size_t size() const { return sensors_.size(); }
    double length() const { return breakpoints_.back(); }
    double delta() const { return delta_; }
    std::span<const double> breakpoints() const { return breakpoints_; }
    std::span<const double> sensors() const { return sensors_; }
    double sensor(std::size_t j) const { return sensors_.at(j); }
    Interval interval(std::size_t j) const { return {breakpoints_.at(j), breakpoints_.at(j + 1)}; }

    /// Index j with x_j <= x < x_{j+1}; x = l belongs to the last interval.
    std::size_t locate(double x) const {
        if (!(x >= 0.0 && x <= length()))
            throw DomainError("x=" + std::to_string(x) + " outside [0, l]");
        const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
        const auto j = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
        return std::min(j, size() - 1);
    }

    bool operator==(const ActuationPartition&) const = default;

private:
    std::vector<double> breakpoints_;
    std::vector<double> sensors_;
    double delta_ = 0.0;
};

inline ActuationPartition uniform_partition(double length, int intervals) {
    return ActuationPartition::uniform(length, intervals);
}

inline std::size_t locate_interval(const ActuationPartition& p, double x) { return p.locate(x); }

}  // namespace ssc
