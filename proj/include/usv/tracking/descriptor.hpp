#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace usv::tracking {

/// Row-major grayscale image region.
struct GrayPatch {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;

    float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

inline constexpr std::size_t kDescriptorBins = 36;
inline constexpr std::size_t kOrientationBins = 9;
inline constexpr int kDescriptorPatchSize = 64;

/// HOG appearance descriptor: 2x2 blocks of 9 unsigned-orientation bins.
/// Block order is top-left, top-right, bottom-left, bottom-right; each block
/// is L1-normalized unless it has no gradient energy.
struct AppearanceDescriptor {
    std::array<double, kDescriptorBins> bins{};
};

/// Resamples the patch to 64x64 (bilinear), takes central-difference
/// gradients and accumulates magnitude-weighted orientation histograms.
/// Throws ErrorCode::invalid_patch for patches smaller than 2x2.
AppearanceDescriptor compute_descriptor(const GrayPatch& patch);

/// L1 distance; in [0, 8] for normalized descriptors.
double descriptor_distance(const AppearanceDescriptor& a, const AppearanceDescriptor& b);

/// Span overload; throws ErrorCode::dimension unless both have 36 entries.
double descriptor_distance(std::span<const double> a, std::span<const double> b);

}  // namespace usv::tracking
