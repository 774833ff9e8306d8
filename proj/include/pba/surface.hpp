#pragma once

#include <optional>
#include <vector>

#include "pba/geometry.hpp"
#include "pba/image.hpp"

namespace pba {

// Depth maps are 1-channel grids aligned with an Intrinsics; entries <= 0
// mark invalid pixels.
inline bool depth_valid(float d) { return d > 0.0f && std::isfinite(d); }

// Per-pixel unit normals in the camera frame, oriented toward the camera.
struct NormalMap {
    ImageF normals;               // 3 channels; (0,0,0) where invalid
    std::vector<uint8_t> valid;   // row-major mask

    int width() const { return normals.width(); }
    int height() const { return normals.height(); }
    bool is_valid(int x, int y) const {
        return valid[static_cast<size_t>(y) * normals.width() + x] != 0;
    }
    Vec3 normal(int x, int y) const {
        return {normals.at(x, y, 0), normals.at(x, y, 1), normals.at(x, y, 2)};
    }
};

// Normal of the facet spanned by (P - N1) x (P - N2), unit length and
// oriented so it faces the camera at the origin. Empty when the triplet is
// degenerate (cross product norm <= 1e-10).
std::optional<Vec3> triplet_normal(const Vec3& P, const Vec3& N1, const Vec3& N2);

struct NormalEstimationOptions {
    double vicinity = 0.02;       // metric neighborhood radius, meters
    double mls_bandwidth = 0.01;  // Gaussian kernel bandwidth, meters
    bool mls_smooth = true;       // plane-fit smoothing pass
    int max_window = 5;           // pixel window radius cap for the MLS gather
};

// Triplet normals over the 8-connected ring filtered by the metric vicinity,
// then a Gaussian-weighted plane fit over the vicinity. Pixels with fewer
// than 3 usable neighbors are flagged invalid, never fatal.
NormalMap estimate_normal_map(const ImageF& depth, const Intrinsics& K,
                              const NormalEstimationOptions& opts = {});

}  // namespace pba
