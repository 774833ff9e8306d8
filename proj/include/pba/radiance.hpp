#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pba/geometry.hpp"
#include "pba/image.hpp"

namespace pba {

// Equirectangular radiance panorama, linear RGB, width = 2 * height.
// Directions are world-frame with y up; see dir_to_equirect.
struct EnvironmentMap {
    ImageF rgb;

    int width() const { return rgb.width(); }
    int height() const { return rgb.height(); }
    bool valid_shape() const {
        return rgb.channels() == 3 && rgb.width() == 2 * rgb.height() && rgb.height() >= 2;
    }

    static EnvironmentMap load(const std::string& path);
    void save(const std::string& path) const;
};

// dir must be unit length within 1e-6 (throws otherwise).
// u = (atan2(x, z)/2pi + 0.5) * w, v = acos(y)/pi * h.
Pixel dir_to_equirect(const Vec3& dir, int w, int h);
Vec3 equirect_to_dir(const Pixel& p, int w, int h);
double texel_solid_angle(int y, int w, int h);

ImageF luminance_image(const ImageF& rgb);

// Texel-center bilinear lookup on a 1-channel equirectangular grid,
// wrapping in u and clamping in v.
double sample_equirect(const ImageF& grid, double u, double v);

// GGX-prefiltered luminance mip chain over evenly spaced roughness levels;
// level 0 is the source luminance.
struct PrefilteredEnv {
    std::vector<ImageF> levels;

    int num_levels() const { return static_cast<int>(levels.size()); }
    // Bilinear in texels, linear between roughness levels.
    double sample(const Vec3& dir, double roughness) const;
};

PrefilteredEnv prefilter(const EnvironmentMap& env, int levels = 9,
                         int samples_per_texel = 1024);

// Directional albedo of the specular lobe over (cos(theta_v), roughness).
struct BrdfTable {
    ImageF table;  // rows: roughness, cols: cos(theta_v); nodes at i/(res-1)

    int resolution() const { return table.width(); }
    double lookup(double cos_v, double roughness) const;
};

BrdfTable build_brdf_table(int resolution = 64, int samples = 4096);

// Everything needed to evaluate reflected radiance at scene points: one
// prefiltered environment per control point plus the shared BRDF table.
struct RadianceContext {
    std::vector<Vec3> control_positions;  // world frame
    std::vector<PrefilteredEnv> envs;
    BrdfTable brdf;

    bool consistent() const { return control_positions.size() == envs.size(); }
};

// Split-integral reflected luminance for a surface point with normal n seen
// along beta (camera -> point, unnormalized, same frame as the environment).
// Empty result means the view is back-facing and carries no specular cue.
std::optional<double> eval_radiance(const RadianceContext& ctx, int control_idx,
                                    const Vec3& n, const Vec3& beta, double roughness);

// Monte-Carlo estimate of the full hemispherical integral with the same
// BRDF; the reference the split approximation is checked against.
std::optional<double> oracle_radiance(const EnvironmentMap& env, const Vec3& n,
                                      const Vec3& beta, double roughness,
                                      int nsamples = 65536, uint64_t seed = 1);

}  // namespace pba
