#include "usv/common.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace usv {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::parse: return "parse error";
        case ErrorCode::degenerate_calibration: return "degenerate calibration";
        case ErrorCode::degenerate_pixel: return "degenerate pixel";
        case ErrorCode::degenerate_frustum: return "degenerate frustum";
        case ErrorCode::invalid_patch: return "invalid patch";
        case ErrorCode::dimension: return "dimension error";
        case ErrorCode::invalid_cost: return "invalid cost";
        case ErrorCode::numerical_failure: return "numerical failure";
        case ErrorCode::sequencing: return "sequencing error";
        case ErrorCode::invalid_orientation: return "invalid orientation";
        case ErrorCode::invalid_cluster: return "invalid cluster";
        case ErrorCode::invalid_scenario: return "invalid scenario";
        case ErrorCode::configuration: return "configuration error";
        case ErrorCode::lookup: return "lookup error";
        case ErrorCode::io: return "i/o error";
    }
    return "error";
}

std::string_view class_name(ObjectClass c) {
    switch (c) {
        case ObjectClass::boat: return "boat";
        case ObjectClass::buoy: return "buoy";
        case ObjectClass::other: return "other";
    }
    return "other";
}

std::optional<ObjectClass> parse_class(std::string_view token) {
    if (token == "boat" || token == "0") return ObjectClass::boat;
    if (token == "buoy" || token == "1") return ObjectClass::buoy;
    if (token == "other" || token == "2") return ObjectClass::other;
    return std::nullopt;
}

std::string format_fixed(double value, int precision) {
    // -0.000000 and 0.000000 must print identically for byte-stable output
    if (value == 0.0) value = 0.0;
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                   std::chars_format::fixed, precision);
    if (ec != std::errc{}) return "nan";
    std::string out(buf.data(), end);
    if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
    return out;
}

}  // namespace usv
