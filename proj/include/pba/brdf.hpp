#pragma once

#include <cmath>
#include <optional>

#include "pba/geometry.hpp"

namespace pba::brdf {

// Cook-Torrance with GGX distribution, height-correlated Smith shadowing and
// Schlick Fresnel. Roughness maps to alpha = r_s^2, floored to keep the
// near-mirror limit numerically stable.
inline constexpr double kF0 = 0.04;
inline constexpr double kMinAlpha = 1e-4;

inline double ggx_alpha(double roughness) {
    return std::max(roughness * roughness, kMinAlpha);
}

inline double d_ggx(double NoH, double alpha) {
    const double a2 = alpha * alpha;
    const double d = NoH * NoH * (a2 - 1.0) + 1.0;
    return a2 / (M_PI * d * d);
}

inline double g2_smith(double NoV, double NoL, double alpha) {
    const double a2 = alpha * alpha;
    const double lv = NoL * std::sqrt(a2 + (1.0 - a2) * NoV * NoV);
    const double ll = NoV * std::sqrt(a2 + (1.0 - a2) * NoL * NoL);
    const double denom = lv + ll;
    return denom > 0.0 ? 2.0 * NoL * NoV / denom : 0.0;
}

inline double f_schlick(double VoH, double f0 = kF0) {
    const double m = std::clamp(1.0 - VoH, 0.0, 1.0);
    const double m2 = m * m;
    return f0 + (1.0 - f0) * m2 * m2 * m;
}

inline double eval_specular(double NoV, double NoL, double NoH, double VoH, double alpha) {
    if (NoV <= 0.0 || NoL <= 0.0 || NoH <= 0.0) return 0.0;
    return d_ggx(NoH, alpha) * g2_smith(NoV, NoL, alpha) * f_schlick(VoH) /
           (4.0 * NoV * NoL);
}

// Orthonormal basis with n as the z axis (Frisvad, branch on the pole).
struct Basis {
    Vec3 t1, t2, n;
    Vec3 to_world(const Vec3& local) const {
        return local.x() * t1 + local.y() * t2 + local.z() * n;
    }
    Vec3 to_local(const Vec3& world) const {
        return {t1.dot(world), t2.dot(world), n.dot(world)};
    }
};

inline Basis make_basis(const Vec3& n) {
    Basis b;
    b.n = n;
    if (n.z() < -0.9999999) {
        b.t1 = {0.0, -1.0, 0.0};
        b.t2 = {-1.0, 0.0, 0.0};
        return b;
    }
    const double a = 1.0 / (1.0 + n.z());
    const double c = -n.x() * n.y() * a;
    b.t1 = {1.0 - n.x() * n.x() * a, c, -n.x()};
    b.t2 = {c, 1.0 - n.y() * n.y() * a, -n.y()};
    return b;
}

// GGX half-vector sample in the local frame (z up).
inline Vec3 sample_ggx_half(double u1, double u2, double alpha) {
    const double a2 = alpha * alpha;
    const double cos2 = (1.0 - u1) / (1.0 + (a2 - 1.0) * u1);
    const double cos_t = std::sqrt(std::clamp(cos2, 0.0, 1.0));
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos2));
    const double phi = 2.0 * M_PI * u2;
    return {sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t};
}

struct SpecularSample {
    Vec3 light;     // local frame
    double weight;  // f * cos(theta_l) / pdf
};

// One importance sample of the specular integrand for view direction v
// (local frame, v.z > 0). Empty when the sampled light direction falls
// below the hemisphere.
inline std::optional<SpecularSample> sample_specular(const Vec3& v, double roughness,
                                                     double u1, double u2) {
    const double alpha = ggx_alpha(roughness);
    const Vec3 h = sample_ggx_half(u1, u2, alpha);
    const double VoH = v.dot(h);
    if (VoH <= 0.0) return std::nullopt;
    const Vec3 l = 2.0 * VoH * h - v;
    if (l.z() <= 0.0) return std::nullopt;
    const double NoV = v.z();
    const double NoL = l.z();
    const double NoH = h.z();
    if (NoV <= 0.0 || NoH <= 0.0) return std::nullopt;
    // f * NoL / pdf with pdf = D * NoH / (4 VoH); D cancels.
    const double weight = f_schlick(VoH) * g2_smith(NoV, NoL, alpha) * VoH / (NoV * NoH);
    return SpecularSample{l, weight};
}

// Cosine-weighted hemisphere sample (z up); pdf = cos/pi.
inline Vec3 sample_cosine(double u1, double u2) {
    const double r = std::sqrt(u1);
    const double phi = 2.0 * M_PI * u2;
    return {r * std::cos(phi), r * std::sin(phi),
            std::sqrt(std::max(0.0, 1.0 - u1))};
}

}  // namespace pba::brdf
