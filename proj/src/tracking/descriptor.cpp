#include "usv/tracking/descriptor.hpp"

#include "usv/common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace usv::tracking {

namespace {

constexpr int kSize = kDescriptorPatchSize;
constexpr int kBlock = kSize / 2;

std::vector<double> resample(const GrayPatch& patch) {
    std::vector<double> out(static_cast<std::size_t>(kSize) * kSize);
    const double sx = static_cast<double>(patch.width) / kSize;
    const double sy = static_cast<double>(patch.height) / kSize;
    for (int y = 0; y < kSize; ++y) {
        // pixel-center alignment
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, patch.height - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, patch.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < kSize; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, patch.width - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, patch.width - 1);
            const double wx = fx - x0;
            const double top = (1.0 - wx) * patch.at(x0, y0) + wx * patch.at(x1, y0);
            const double bottom = (1.0 - wx) * patch.at(x0, y1) + wx * patch.at(x1, y1);
            out[static_cast<std::size_t>(y) * kSize + x] = (1.0 - wy) * top + wy * bottom;
        }
    }
    return out;
}

}  // namespace

AppearanceDescriptor compute_descriptor(const GrayPatch& patch) {
    if (patch.width < 2 || patch.height < 2 ||
        patch.pixels.size() != static_cast<std::size_t>(patch.width) * patch.height) {
        throw Error(ErrorCode::invalid_patch, "patch must be at least 2x2 with matching pixel data");
    }

    const auto img = resample(patch);
    auto px = [&](int x, int y) {
        x = std::clamp(x, 0, kSize - 1);
        y = std::clamp(y, 0, kSize - 1);
        return img[static_cast<std::size_t>(y) * kSize + x];
    };

    AppearanceDescriptor desc;
    const double bin_width = std::numbers::pi / kOrientationBins;
    for (int y = 0; y < kSize; ++y) {
        for (int x = 0; x < kSize; ++x) {
            const double gx = 0.5 * (px(x + 1, y) - px(x - 1, y));
            const double gy = 0.5 * (px(x, y + 1) - px(x, y - 1));
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            // unsigned orientation folded into [0, pi)
            double angle = std::atan2(gy, gx);
            if (angle < 0.0) angle += std::numbers::pi;
            if (angle >= std::numbers::pi) angle -= std::numbers::pi;
            const auto bin = std::min<std::size_t>(static_cast<std::size_t>(angle / bin_width),
                                                   kOrientationBins - 1);
            const std::size_t block = static_cast<std::size_t>((y / kBlock) * 2 + (x / kBlock));
            desc.bins[block * kOrientationBins + bin] += mag;
        }
    }

    for (std::size_t block = 0; block < 4; ++block) {
        auto first = desc.bins.begin() + static_cast<std::ptrdiff_t>(block * kOrientationBins);
        auto last = first + kOrientationBins;
        const double sum = std::accumulate(first, last, 0.0);
        if (sum > 0.0) std::for_each(first, last, [sum](double& b) { b /= sum; });
    }
    return desc;
}

double descriptor_distance(const AppearanceDescriptor& a, const AppearanceDescriptor& b) {
    return descriptor_distance(std::span<const double>(a.bins), std::span<const double>(b.bins));
}

double descriptor_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != kDescriptorBins || b.size() != kDescriptorBins) {
        throw Error(ErrorCode::dimension, "descriptors must have 36 bins");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < kDescriptorBins; ++i) d += std::abs(a[i] - b[i]);
    return d;
}

}  // namespace usv::tracking
