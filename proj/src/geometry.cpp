#include "usv/geometry.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace usv::geometry {

namespace {

constexpr double kSingularCutoff = 1e-10;

bool parse_number(std::string_view token, double& out) {
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc{} && ptr == token.data() + token.size() && std::isfinite(out);
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace

CalibrationModel::CalibrationModel(const Matrix34& proj, int image_width, int image_height)
    : proj_(proj), width_(image_width), height_(image_height) {
    if (image_width <= 0 || image_height <= 0) {
        throw Error(ErrorCode::configuration, "image dimensions must be positive");
    }
    if (!proj.allFinite()) {
        throw Error(ErrorCode::degenerate_calibration, "projection matrix has non-finite entries");
    }

    Eigen::JacobiSVD<Matrix34> svd(proj, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    const double cutoff = kSingularCutoff * sigma(0);
    if (sigma(0) <= 0.0 || sigma(2) <= cutoff) {
        throw Error(ErrorCode::degenerate_calibration, "projection matrix is rank deficient");
    }

    // Moore-Penrose inverse: V * Sigma^+ * U^T, dropping negligible singular values.
    Eigen::Matrix<double, 4, 3> v3 = svd.matrixV().leftCols<3>();
    Eigen::Matrix3d sigma_inv = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i) {
        if (sigma(i) > cutoff) sigma_inv(i, i) = 1.0 / sigma(i);
    }
    pinv_ = v3 * sigma_inv * svd.matrixU().transpose();

    const Eigen::Vector4d null = svd.matrixV().col(3);
    if (std::abs(null(3)) <= 1e-12 * null.norm()) {
        throw Error(ErrorCode::degenerate_calibration, "camera center lies at infinity");
    }
    center_ = null.head<3>() / null(3);
    // polish so that P [C; 1] vanishes to working precision
    const Eigen::Vector3d residual = proj_.leftCols<3>() * center_ + proj_.col(3);
    center_ -= proj_.leftCols<3>().fullPivLu().solve(residual);
}

double CalibrationModel::depth_scale(const Vec3& p) const {
    return proj_.row(2).head<3>().dot(p) + proj_(2, 3);
}

CalibrationModel load_calibration(std::string_view source) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= source.size()) {
        std::size_t end = source.find('\n', start);
        if (end == std::string_view::npos) end = source.size();
        lines.push_back(source.substr(start, end - start));
        start = end + 1;
    }

    int line_no = 0;
    std::vector<std::vector<std::string_view>> rows;
    std::vector<int> row_lines;
    for (auto line : lines) {
        ++line_no;
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        rows.push_back(tokens);
        row_lines.push_back(line_no);
    }
    if (rows.empty()) throw Error(ErrorCode::parse, "calibration is empty");

    const auto& dims = rows[0];
    int width = 0;
    int height = 0;
    auto parse_int = [](std::string_view t, int& out) {
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
        return ec == std::errc{} && ptr == t.data() + t.size();
    };
    if (dims.size() != 2 || !parse_int(dims[0], width) || !parse_int(dims[1], height)) {
        throw Error(ErrorCode::parse,
                    "line " + std::to_string(row_lines[0]) + ": expected \"width height\"");
    }

    Matrix34 proj;
    for (int r = 0; r < 3; ++r) {
        if (static_cast<std::size_t>(r + 1) >= rows.size()) {
            const int next = row_lines.back() + 1;
            throw Error(ErrorCode::parse, "line " + std::to_string(next) +
                                              ": missing projection matrix row " +
                                              std::to_string(r + 1));
        }
        const auto& tokens = rows[r + 1];
        const std::string where = "line " + std::to_string(row_lines[r + 1]);
        if (tokens.size() != 4) {
            throw Error(ErrorCode::parse, where + ": expected 4 numbers, found " +
                                              std::to_string(tokens.size()));
        }
        for (int c = 0; c < 4; ++c) {
            if (!parse_number(tokens[c], proj(r, c))) {
                throw Error(ErrorCode::parse,
                            where + ": invalid number '" + std::string(tokens[c]) + "'");
            }
        }
    }
    if (rows.size() > 4) {
        throw Error(ErrorCode::parse,
                    "line " + std::to_string(row_lines[4]) + ": unexpected trailing content");
    }
    if (width <= 0 || height <= 0) {
        throw Error(ErrorCode::parse,
                    "line " + std::to_string(row_lines[0]) + ": image size must be positive");
    }
    return CalibrationModel(proj, width, height);
}

CalibrationModel load_calibration_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open calibration file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_calibration(ss.str());
}

std::string write_calibration(const CalibrationModel& calib) {
    std::ostringstream out;
    out << calib.image_width() << ' ' << calib.image_height() << '\n';
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) {
            if (c) out << ' ';
            out << format_fixed(calib.proj_matrix()(r, c), 9);
        }
        out << '\n';
    }
    return out.str();
}

std::optional<Pixel> project_to_image(const CalibrationModel& calib, const Vec3& p) {
    const Eigen::Vector3d h = calib.proj_matrix() * p.homogeneous();
    if (!(h(2) > 0.0)) return std::nullopt;
    return Pixel{h(0) / h(2), h(1) / h(2)};
}

Ray back_project(const CalibrationModel& calib, const Pixel& pixel) {
    const Eigen::Vector3d pix(pixel.u, pixel.v, 1.0);
    // The least-norm solution is a homogeneous point (X, w); the ray from C
    // through X / w has direction X - w C, which stays valid as w -> 0.
    const Vec3& c = calib.camera_center();
    auto direction_of = [&](const Eigen::Vector3d& rhs) -> Vec3 {
        const Eigen::Vector4d x = calib.pinv_matrix() * rhs;
        return x.head<3>() - x(3) * c;
    };
    Vec3 dir = direction_of(pix);
    // X - w C cancels when C is far from the origin; one refinement step on
    // the image-space residual restores the lost digits.
    dir += direction_of(pix - calib.proj_matrix().leftCols<3>() * dir);
    const double norm = dir.norm();
    if (!(norm > 1e-12 * calib.pinv_matrix().norm() * pix.norm())) {
        throw Error(ErrorCode::degenerate_pixel, "pixel back-projects onto the camera center");
    }
    dir /= norm;
    if (calib.proj_matrix().row(2).head<3>().dot(dir) < 0.0) dir = -dir;
    return {c, dir};
}

Frustum build_frustum(const CalibrationModel& calib, const BBox2D& box) {
    if (!box.valid()) throw Error(ErrorCode::degenerate_frustum, "bounding box is empty");

    const std::array<Pixel, 4> corners{{{box.x_min, box.y_min},
                                        {box.x_max, box.y_min},
                                        {box.x_max, box.y_max},
                                        {box.x_min, box.y_max}}};
    std::array<Vec3, 4> dirs;
    for (std::size_t i = 0; i < 4; ++i) dirs[i] = back_project(calib, corners[i]).direction;

    const Vec3& apex = calib.camera_center();
    const Vec3 centroid_dir = (dirs[0] + dirs[1] + dirs[2] + dirs[3]) / 4.0;

    std::array<Plane, 4> planes;
    for (std::size_t i = 0; i < 4; ++i) {
        Vec3 n = dirs[i].cross(dirs[(i + 1) % 4]);
        const double len = n.norm();
        if (!(len > 1e-10)) {
            throw Error(ErrorCode::degenerate_frustum, "adjacent corner rays are collinear");
        }
        n /= len;
        if (n.dot(centroid_dir) < 0.0) n = -n;
        planes[i] = Plane{n, -n.dot(apex)};
    }
    return Frustum(planes, apex, calib.proj_matrix().row(2).head<3>().transpose());
}

CalibrationModel make_pinhole(double focal, double cx, double cy, int width, int height,
                              const Vec3& center, const Vec3& forward, const Vec3& up) {
    const Vec3 z = forward.normalized();
    const Vec3 x = z.cross(up).normalized();  // image right
    const Vec3 y = z.cross(x);                // image down
    Eigen::Matrix3d rot;
    rot.row(0) = x.transpose();
    rot.row(1) = y.transpose();
    rot.row(2) = z.transpose();
    Eigen::Matrix3d k;
    k << focal, 0.0, cx, 0.0, focal, cy, 0.0, 0.0, 1.0;
    Matrix34 rt;
    rt.leftCols<3>() = rot;
    rt.col(3) = -rot * center;
    return CalibrationModel(k * rt, width, height);
}

}  // namespace usv::geometry
