#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ssc/error.hpp"
#include "ssc/sampling.hpp"
#include "ssc/shapes.hpp"

namespace ssc {

/// Sensor readings z(xbar_j, t), one per interval.
struct SensorFrame {
    double t = 0.0;
    std::vector<double> readings;
};

/// u(x, t) = -K phi^j(x) z(xbar_j, t) for x in [x_j, x_{j+1}).
class ControllerSpec {
public:
    ControllerSpec(double gain, ShapeSpec shape, ActuationPartition partition)
        : gain_(gain), shape_(std::move(shape)), partition_(std::move(partition)) {
        if (!(gain_ > 0.0)) throw ArgumentError("controller gain K must be > 0 (u = -K F)");
        local_ = bind_shape(shape_, partition_);
    }

    double gain() const { return gain_; }
    const ShapeSpec& shape() const { return shape_; }
    const ActuationPartition& partition() const { return partition_; }
    const LocalShape& local_shape(std::size_t j) const { return local_.at(j); }

    /// Control value at x when x is already known to lie in interval j.
    double control_in_interval(std::size_t j, double x, double reading) const {
        const double phi = shape_value(local_[j], x, partition_.sensor(j), reading, partition_.interval(j));
        return -gain_ * phi * reading;
    }

    void check_frame(const SensorFrame& frame) const {
        if (frame.readings.size() != partition_.size())
            throw ArgumentError("sensor frame has " + std::to_string(frame.readings.size()) + " readings, expected " +
                                std::to_string(partition_.size()));
    }

private:
    double gain_;
    ShapeSpec shape_;
    ActuationPartition partition_;
    std::vector<LocalShape> local_;
};

inline double control_field(const ControllerSpec& c, const SensorFrame& frame, double x) {
    c.check_frame(frame);
    const std::size_t j = c.partition().locate(x);
    return c.control_in_interval(j, x, frame.readings[j]);
}

inline std::vector<double> control_profile(const ControllerSpec& c, const SensorFrame& frame,
                                           std::span<const double> mesh_points) {
    c.check_frame(frame);
    std::vector<double> u;
    u.reserve(mesh_points.size());
    for (double x : mesh_points) {
        const std::size_t j = c.partition().locate(x);
        u.push_back(c.control_in_interval(j, x, frame.readings[j]));
    }
    return u;
}

}  // namespace ssc
