#include <algorithm>
#include <cmath>
#include <cstring>

#include "pba/kernels.hpp"

namespace pba::kernels {

namespace {

void luminance_scalar(const float* rgb, float* y, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        y[i] = 0.2126f * rgb[3 * i] + 0.7152f * rgb[3 * i + 1] + 0.0722f * rgb[3 * i + 2];
    }
}

void grad_xy_scalar(const float* img, int w, int h, float* gx, float* gy) {
    std::memset(gx, 0, sizeof(float) * static_cast<size_t>(w) * h);
    std::memset(gy, 0, sizeof(float) * static_cast<size_t>(w) * h);
    for (int y = 1; y < h - 1; ++y) {
        const float* row = img + static_cast<size_t>(y) * w;
        const float* up = row - w;
        const float* dn = row + w;
        float* ox = gx + static_cast<size_t>(y) * w;
        float* oy = gy + static_cast<size_t>(y) * w;
        for (int x = 1; x < w - 1; ++x) {
            ox[x] = 0.5f * (row[x + 1] - row[x - 1]);
            oy[x] = 0.5f * (dn[x] - up[x]);
        }
    }
}

void bilinear_batch_scalar(const float* img, int w, int h,
                           const float* u, const float* v, float* out, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        float x = std::clamp(u[i], 0.0f, static_cast<float>(w - 1));
        float y = std::clamp(v[i], 0.0f, static_cast<float>(h - 1));
        int x0 = std::min(static_cast<int>(x), w - 2);
        int y0 = std::min(static_cast<int>(y), h - 2);
        float fx = x - static_cast<float>(x0);
        float fy = y - static_cast<float>(y0);
        const float* p = img + static_cast<size_t>(y0) * w + x0;
        float top = p[0] + fx * (p[1] - p[0]);
        float bot = p[w] + fx * (p[w + 1] - p[w]);
        out[i] = top + fy * (bot - top);
    }
}

double weighted_sse_scalar(const float* r, const float* w, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(w[i]) * static_cast<double>(r[i]) * static_cast<double>(r[i]);
    }
    return acc;
}

void equirect_uv_scalar(const float* x, const float* y, const float* z,
                        float* u, float* v, size_t n, float width, float height) {
    constexpr float kInv2Pi = 0.15915493667125702f;
    constexpr float kInvPi = 0.31830987334251404f;
    for (size_t i = 0; i < n; ++i) {
        u[i] = (std::atan2(x[i], z[i]) * kInv2Pi + 0.5f) * width;
        v[i] = std::acos(std::clamp(y[i], -1.0f, 1.0f)) * kInvPi * height;
    }
}

}  // namespace

const Backend& scalar() {
    static const Backend backend{
        "scalar",
        luminance_scalar,
        grad_xy_scalar,
        bilinear_batch_scalar,
        weighted_sse_scalar,
        equirect_uv_scalar,
    };
    return backend;
}

}  // namespace pba::kernels
