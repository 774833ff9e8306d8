#pragma once

#include <cstddef>

namespace pba::kernels {

// Function table for the data-parallel inner loops: one scalar reference
// implementation and one AVX2 implementation, selected once at startup from
// CPU features. The selection can be pinned (e.g. --deterministic runs pin
// the scalar backend so outputs do not depend on the host ISA).
//
// Contracts:
//   luminance      y[i] = 0.2126 r + 0.7152 g + 0.0722 b, rgb interleaved.
//   grad_xy        central differences, 0.5*(I[x+1]-I[x-1]); the one-pixel
//                  border is set to zero in both outputs.
//   bilinear_batch coordinates on the pixel lattice [0,w-1]x[0,h-1], clamped;
//                  requires w,h >= 2.
//   weighted_sse   sum of w[i]*r[i]^2, accumulated in double.
//   equirect_uv    unit directions -> equirectangular coordinates,
//                  u = (atan2(x,z)/2pi + 0.5)*width, v = acos(y)/pi * height.
//                  The AVX2 variant uses a polynomial atan; both agree within
//                  3e-5 of a texel per unit of width.
struct Backend {
    const char* name;
    void (*luminance)(const float* rgb, float* y, size_t n);
    void (*grad_xy)(const float* img, int w, int h, float* gx, float* gy);
    void (*bilinear_batch)(const float* img, int w, int h,
                           const float* u, const float* v, float* out, size_t n);
    double (*weighted_sse)(const float* r, const float* w, size_t n);
    void (*equirect_uv)(const float* x, const float* y, const float* z,
                        float* u, float* v, size_t n, float width, float height);
};

const Backend& scalar();
const Backend* avx2();  // nullptr when unsupported at build or run time
bool avx2_supported();

const Backend& active();
void select(const Backend& b);
void select_auto();

}  // namespace pba::kernels
