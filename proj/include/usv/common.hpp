#pragma once

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace usv {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

enum class ErrorCode {
    parse,
    degenerate_calibration,
    degenerate_pixel,
    degenerate_frustum,
    invalid_patch,
    dimension,
    invalid_cost,
    numerical_failure,
    sequencing,
    invalid_orientation,
    invalid_cluster,
    invalid_scenario,
    configuration,
    lookup,
    io,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

enum class ObjectClass { boat = 0, buoy = 1, other = 2 };

std::string_view class_name(ObjectClass c);
/// Accepts a class name ("boat") or its integer id ("0").
std::optional<ObjectClass> parse_class(std::string_view token);

/// Locale-independent fixed-point formatting.
std::string format_fixed(double value, int precision = 6);

}  // namespace usv
