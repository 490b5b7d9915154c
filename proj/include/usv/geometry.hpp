#pragma once

// Camera-LiDAR geometry: a pinhole projection matrix mapping LiDAR-frame
// points to pixels, its pseudo-inverse for back-projecting pixels to rays,
// and the four-plane frustum ("pyramid") spanned by a 2D bounding box.

#include "usv/common.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string_view>

namespace usv::geometry {

using Matrix34 = Eigen::Matrix<double, 3, 4>;
using Matrix43 = Eigen::Matrix<double, 4, 3>;

struct Pixel {
    double u = 0.0;
    double v = 0.0;
};

struct BBox2D {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    bool valid() const { return x_min < x_max && y_min < y_max; }
    /// Strict interior test; points on the border are outside.
    bool contains(const Pixel& p) const {
        return p.u > x_min && p.u < x_max && p.v > y_min && p.v < y_max;
    }
};

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit length
};

struct Plane {
    Vec3 normal;  // unit length, pointing into the frustum
    double offset = 0.0;

    double signed_distance(const Vec3& p) const { return normal.dot(p) + offset; }
};

class CalibrationModel {
public:
    /// Computes the pseudo-inverse and camera center. Throws
    /// ErrorCode::degenerate_calibration for rank-deficient matrices or a
    /// camera center at infinity, ErrorCode::configuration for bad image size.
    CalibrationModel(const Matrix34& proj, int image_width, int image_height);

    const Matrix34& proj_matrix() const { return proj_; }
    const Matrix43& pinv_matrix() const { return pinv_; }
    const Vec3& camera_center() const { return center_; }
    int image_width() const { return width_; }
    int image_height() const { return height_; }

    /// Homogeneous scale (third row of P times the homogeneous point);
    /// positive means in front of the camera.
    double depth_scale(const Vec3& p) const;

    BBox2D image_bounds() const {
        return {0.0, 0.0, static_cast<double>(width_), static_cast<double>(height_)};
    }

private:
    Matrix34 proj_;
    Matrix43 pinv_;
    Vec3 center_;
    int width_;
    int height_;
};

/// Parses "width height" followed by three rows of four numbers.
CalibrationModel load_calibration(std::string_view source);
CalibrationModel load_calibration_file(const std::string& path);
std::string write_calibration(const CalibrationModel& calib);

std::optional<Pixel> project_to_image(const CalibrationModel& calib, const Vec3& p);

Ray back_project(const CalibrationModel& calib, const Pixel& pixel);

class Frustum {
public:
    Frustum(const std::array<Plane, 4>& planes, const Vec3& apex,
            const Eigen::Vector3d& forward_row)
        : planes_(planes), apex_(apex), forward_(forward_row) {}

    const std::array<Plane, 4>& planes() const { return planes_; }
    const Vec3& apex() const { return apex_; }

    /// Strictly inside all four planes and in front of the camera.
    bool contains(const Vec3& p) const {
        for (const auto& plane : planes_) {
            if (!(plane.signed_distance(p) > 0.0)) return false;
        }
        return forward_.dot(p - apex_) > 0.0;
    }

private:
    std::array<Plane, 4> planes_;
    Vec3 apex_;
    // First three entries of the projection's third row; its dot product with
    // (p - apex) has the sign of the homogeneous scale of p.
    Eigen::Vector3d forward_;
};

Frustum build_frustum(const CalibrationModel& calib, const BBox2D& box);

inline bool contains(const Frustum& frustum, const Vec3& p) { return frustum.contains(p); }

/// Standard pinhole camera P = K [R | -R c] for a camera at `center` whose
/// optical axis is `forward` and whose image y axis points along -`up`.
CalibrationModel make_pinhole(double focal, double cx, double cy, int width, int height,
                              const Vec3& center, const Vec3& forward, const Vec3& up);

}  // namespace usv::geometry
