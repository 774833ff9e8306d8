#include "pba/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace pba::kernels {

namespace {

// Degree-17 odd minimax polynomial for atan on [0, 1].
inline __m256 atan_poly(__m256 t) {
    const __m256 s = _mm256_mul_ps(t, t);
    __m256 p = _mm256_set1_ps(0.00282363896258175373077393f);
    p = _mm256_fmadd_ps(p, s, _mm256_set1_ps(-0.0159569028764963150024414f));
    p = _mm256_fmadd_ps(p, s, _mm256_set1_ps(0.0425049886107444763183594f));
    p = _mm256_fmadd_ps(p, s, _mm256_set1_ps(-0.0748900920152664184570312f));
    p = _mm256_fmadd_ps(p, s, _mm256_set1_ps(0.106347933411598205566406f));
    p = _mm256_fmadd_ps(p, s, _mm256_set1_ps(-0.142027363181114196777344f));
    p = _mm256_fmadd_ps(p, s, _mm256_set1_ps(0.199926957488059997558594f));
    p = _mm256_fmadd_ps(p, s, _mm256_set1_ps(-0.333331018686294555664062f));
    return _mm256_fmadd_ps(_mm256_mul_ps(p, s), t, t);
}

inline __m256 atan2_avx(__m256 num, __m256 den) {
    const __m256 sign_mask = _mm256_set1_ps(-0.0f);
    const __m256 abs_mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7FFFFFFF));
    const __m256 an = _mm256_and_ps(num, abs_mask);
    const __m256 ad = _mm256_and_ps(den, abs_mask);
    const __m256 hi = _mm256_max_ps(an, ad);
    const __m256 lo = _mm256_min_ps(an, ad);
    const __m256 a = _mm256_div_ps(lo, _mm256_max_ps(hi, _mm256_set1_ps(1e-30f)));
    __m256 r = atan_poly(a);

    const __m256 swap = _mm256_cmp_ps(an, ad, _CMP_GT_OQ);
    r = _mm256_blendv_ps(r, _mm256_sub_ps(_mm256_set1_ps(1.5707963267948966f), r), swap);
    const __m256 den_neg = _mm256_cmp_ps(den, _mm256_setzero_ps(), _CMP_LT_OQ);
    r = _mm256_blendv_ps(r, _mm256_sub_ps(_mm256_set1_ps(3.14159265358979323846f), r), den_neg);
    return _mm256_or_ps(r, _mm256_and_ps(num, sign_mask));
}

void luminance_avx2(const float* rgb, float* y, size_t n) {
    const __m256 wr = _mm256_set1_ps(0.2126f);
    const __m256 wg = _mm256_set1_ps(0.7152f);
    const __m256 wb = _mm256_set1_ps(0.0722f);
    const __m256i step = _mm256_setr_epi32(0, 3, 6, 9, 12, 15, 18, 21);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const float* base = rgb + 3 * i;
        const __m256 r = _mm256_i32gather_ps(base, step, 4);
        const __m256 g = _mm256_i32gather_ps(base + 1, step, 4);
        const __m256 b = _mm256_i32gather_ps(base + 2, step, 4);
        __m256 out = _mm256_mul_ps(wr, r);
        out = _mm256_fmadd_ps(wg, g, out);
        out = _mm256_fmadd_ps(wb, b, out);
        _mm256_storeu_ps(y + i, out);
    }
    for (; i < n; ++i) {
        y[i] = 0.2126f * rgb[3 * i] + 0.7152f * rgb[3 * i + 1] + 0.0722f * rgb[3 * i + 2];
    }
}

void grad_xy_avx2(const float* img, int w, int h, float* gx, float* gy) {
    std::memset(gx, 0, sizeof(float) * static_cast<size_t>(w) * h);
    std::memset(gy, 0, sizeof(float) * static_cast<size_t>(w) * h);
    const __m256 half = _mm256_set1_ps(0.5f);
    for (int y = 1; y < h - 1; ++y) {
        const float* row = img + static_cast<size_t>(y) * w;
        const float* up = row - w;
        const float* dn = row + w;
        float* ox = gx + static_cast<size_t>(y) * w;
        float* oy = gy + static_cast<size_t>(y) * w;
        int x = 1;
        for (; x + 8 <= w - 1; x += 8) {
            const __m256 xr = _mm256_loadu_ps(row + x + 1);
            const __m256 xl = _mm256_loadu_ps(row + x - 1);
            const __m256 yd = _mm256_loadu_ps(dn + x);
            const __m256 yu = _mm256_loadu_ps(up + x);
            _mm256_storeu_ps(ox + x, _mm256_mul_ps(half, _mm256_sub_ps(xr, xl)));
            _mm256_storeu_ps(oy + x, _mm256_mul_ps(half, _mm256_sub_ps(yd, yu)));
        }
        for (; x < w - 1; ++x) {
            ox[x] = 0.5f * (row[x + 1] - row[x - 1]);
            oy[x] = 0.5f * (dn[x] - up[x]);
        }
    }
}

void bilinear_batch_avx2(const float* img, int w, int h,
                         const float* u, const float* v, float* out, size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    const __m256 xmax = _mm256_set1_ps(static_cast<float>(w - 1));
    const __m256 ymax = _mm256_set1_ps(static_cast<float>(h - 1));
    const __m256i x0max = _mm256_set1_epi32(w - 2);
    const __m256i y0max = _mm256_set1_epi32(h - 2);
    const __m256i wv = _mm256_set1_epi32(w);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 x = _mm256_min_ps(_mm256_max_ps(_mm256_loadu_ps(u + i), zero), xmax);
        const __m256 y = _mm256_min_ps(_mm256_max_ps(_mm256_loadu_ps(v + i), zero), ymax);
        const __m256i x0 = _mm256_min_epi32(_mm256_cvttps_epi32(x), x0max);
        const __m256i y0 = _mm256_min_epi32(_mm256_cvttps_epi32(y), y0max);
        const __m256 fx = _mm256_sub_ps(x, _mm256_cvtepi32_ps(x0));
        const __m256 fy = _mm256_sub_ps(y, _mm256_cvtepi32_ps(y0));
        const __m256i idx = _mm256_add_epi32(_mm256_mullo_epi32(y0, wv), x0);
        const __m256 p00 = _mm256_i32gather_ps(img, idx, 4);
        const __m256 p10 = _mm256_i32gather_ps(img + 1, idx, 4);
        const __m256 p01 = _mm256_i32gather_ps(img + w, idx, 4);
        const __m256 p11 = _mm256_i32gather_ps(img + w + 1, idx, 4);
        const __m256 top = _mm256_fmadd_ps(fx, _mm256_sub_ps(p10, p00), p00);
        const __m256 bot = _mm256_fmadd_ps(fx, _mm256_sub_ps(p11, p01), p01);
        _mm256_storeu_ps(out + i, _mm256_fmadd_ps(fy, _mm256_sub_ps(bot, top), top));
    }
    for (; i < n; ++i) {
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

double weighted_sse_avx2(const float* r, const float* w, size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 rv = _mm256_loadu_ps(r + i);
        const __m256 wv = _mm256_loadu_ps(w + i);
        const __m256 prod = _mm256_mul_ps(_mm256_mul_ps(rv, rv), wv);
        acc0 = _mm256_add_pd(acc0, _mm256_cvtps_pd(_mm256_castps256_ps128(prod)));
        acc1 = _mm256_add_pd(acc1, _mm256_cvtps_pd(_mm256_extractf128_ps(prod, 1)));
    }
    const __m256d acc = _mm256_add_pd(acc0, acc1);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) {
        total += static_cast<double>(w[i]) * static_cast<double>(r[i]) * static_cast<double>(r[i]);
    }
    return total;
}

void equirect_uv_avx2(const float* x, const float* y, const float* z,
                      float* u, float* v, size_t n, float width, float height) {
    const __m256 inv2pi = _mm256_set1_ps(0.15915493667125702f);
    const __m256 invpi = _mm256_set1_ps(0.31830987334251404f);
    const __m256 half = _mm256_set1_ps(0.5f);
    const __m256 one = _mm256_set1_ps(1.0f);
    const __m256 wv = _mm256_set1_ps(width);
    const __m256 hv = _mm256_set1_ps(height);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 xv = _mm256_loadu_ps(x + i);
        const __m256 yv = _mm256_min_ps(_mm256_max_ps(_mm256_loadu_ps(y + i),
                                                      _mm256_set1_ps(-1.0f)), one);
        const __m256 zv = _mm256_loadu_ps(z + i);
        const __m256 az = atan2_avx(xv, zv);
        const __m256 uu = _mm256_mul_ps(_mm256_fmadd_ps(az, inv2pi, half), wv);
        // acos(y) = atan2(sqrt(1-y^2), y)
        const __m256 s = _mm256_sqrt_ps(_mm256_max_ps(
            _mm256_fnmadd_ps(yv, yv, one), _mm256_setzero_ps()));
        const __m256 ac = atan2_avx(s, yv);
        _mm256_storeu_ps(u + i, uu);
        _mm256_storeu_ps(v + i, _mm256_mul_ps(_mm256_mul_ps(ac, invpi), hv));
    }
    for (; i < n; ++i) {
        u[i] = (std::atan2(x[i], z[i]) * 0.15915493667125702f + 0.5f) * width;
        v[i] = std::acos(std::clamp(y[i], -1.0f, 1.0f)) * 0.31830987334251404f * height;
    }
}

const Backend avx2_backend{
    "avx2",
    luminance_avx2,
    grad_xy_avx2,
    bilinear_batch_avx2,
    weighted_sse_avx2,
    equirect_uv_avx2,
};

}  // namespace

const Backend* avx2_impl() { return &avx2_backend; }

}  // namespace pba::kernels

#else  // no AVX2 at build time

namespace pba::kernels {
const Backend* avx2_impl() { return nullptr; }
}  // namespace pba::kernels

#endif
