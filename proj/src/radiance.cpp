#include "pba/radiance.hpp"

#include <cmath>
#include <stdexcept>

#include "pba/brdf.hpp"
#include "pba/kernels.hpp"
#include "pba/pfm.hpp"
#include "pba/rng.hpp"

namespace pba {

namespace {

// Radical inverse base 2; Hammersley point set drives the precomputed tables.
double radical_inverse(uint32_t bits) {
    bits = (bits << 16u) | (bits >> 16u);
    bits = ((bits & 0x55555555u) << 1u) | ((bits & 0xAAAAAAAAu) >> 1u);
    bits = ((bits & 0x33333333u) << 2u) | ((bits & 0xCCCCCCCCu) >> 2u);
    bits = ((bits & 0x0F0F0F0Fu) << 4u) | ((bits & 0xF0F0F0F0u) >> 4u);
    bits = ((bits & 0x00FF00FFu) << 8u) | ((bits & 0xFF00FF00u) >> 8u);
    return static_cast<double>(bits) * 2.3283064365386963e-10;
}

}  // namespace

EnvironmentMap EnvironmentMap::load(const std::string& path) {
    EnvironmentMap env;
    env.rgb = read_pfm(path);
    if (!env.valid_shape()) {
        throw std::runtime_error("environment map " + path +
                                 ": expected 3 channels with width = 2 * height");
    }
    return env;
}

void EnvironmentMap::save(const std::string& path) const { write_pfm(path, rgb); }

Pixel dir_to_equirect(const Vec3& dir, int w, int h) {
    if (std::abs(dir.norm() - 1.0) > 1e-6) {
        throw std::invalid_argument("dir_to_equirect: direction must be unit length");
    }
    const double u = (std::atan2(dir.x(), dir.z()) / (2.0 * M_PI) + 0.5) * w;
    const double v = std::acos(std::clamp(dir.y(), -1.0, 1.0)) / M_PI * h;
    return {u, v};
}

Vec3 equirect_to_dir(const Pixel& p, int w, int h) {
    const double phi = (p.u / w - 0.5) * 2.0 * M_PI;
    const double theta = p.v / h * M_PI;
    const double st = std::sin(theta);
    return {st * std::sin(phi), std::cos(theta), st * std::cos(phi)};
}

double texel_solid_angle(int y, int w, int h) {
    const double t0 = M_PI * y / h;
    const double t1 = M_PI * (y + 1) / h;
    return (2.0 * M_PI / w) * (std::cos(t0) - std::cos(t1));
}

ImageF luminance_image(const ImageF& rgb) {
    if (rgb.channels() == 1) return rgb;
    if (rgb.channels() != 3) throw std::invalid_argument("luminance_image: need 1 or 3 channels");
    ImageF out(rgb.width(), rgb.height(), 1);
    kernels::active().luminance(rgb.data(), out.data(),
                                static_cast<size_t>(rgb.width()) * rgb.height());
    return out;
}

double sample_equirect(const ImageF& grid, double u, double v) {
    const int w = grid.width(), h = grid.height();
    double x = u - 0.5;
    if (x < 0) x += w;
    const double y = std::clamp(v - 0.5, 0.0, static_cast<double>(h - 1));
    int x0 = static_cast<int>(x) % w;
    const int x1 = (x0 + 1) % w;
    const double fx = x - std::floor(x);
    const int y0 = std::min(static_cast<int>(y), h - 2 >= 0 ? h - 2 : 0);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fy = y - y0;
    const double top = grid.at(x0, y0) + fx * (grid.at(x1, y0) - grid.at(x0, y0));
    const double bot = grid.at(x0, y1) + fx * (grid.at(x1, y1) - grid.at(x0, y1));
    return top + fy * (bot - top);
}

double PrefilteredEnv::sample(const Vec3& dir, double roughness) const {
    const int nl = num_levels();
    const ImageF& base = levels.front();
    const Pixel uv = dir_to_equirect(dir.normalized(), base.width(), base.height());
    const double lf = std::clamp(roughness, 0.0, 1.0) * (nl - 1);
    const int l0 = std::min(static_cast<int>(lf), nl - 1);
    const int l1 = std::min(l0 + 1, nl - 1);
    const double t = lf - l0;
    const double s0 = sample_equirect(levels[l0], uv.u, uv.v);
    if (l1 == l0) return s0;
    const double s1 = sample_equirect(levels[l1], uv.u, uv.v);
    return s0 + t * (s1 - s0);
}

PrefilteredEnv prefilter(const EnvironmentMap& env, int num_levels, int samples_per_texel) {
    if (!env.valid_shape()) throw std::invalid_argument("prefilter: bad environment shape");
    const int w = env.width(), h = env.height();
    const ImageF lum = luminance_image(env.rgb);

    PrefilteredEnv out;
    out.levels.reserve(num_levels);
    out.levels.push_back(lum);

    // Source grid padded with the wrap column so batched clamped bilinear
    // lookups behave periodically in u.
    ImageF padded(w + 1, h, 1);
    for (int y = 0; y < h; ++y) {
        std::copy(lum.row(y), lum.row(y) + w, padded.row(y));
        padded.row(y)[w] = lum.row(y)[0];
    }

    const auto& kb = kernels::active();
    const int n = samples_per_texel;
    std::vector<float> lx(n), ly(n), lz(n), su(n), sv(n), vals(n);
    std::vector<double> weights(n);

    for (int level = 1; level < num_levels; ++level) {
        const double roughness = static_cast<double>(level) / (num_levels - 1);
        const double alpha = brdf::ggx_alpha(roughness);

        // Lobe samples in the local frame (normal = view = +z), shared by
        // every texel of the level.
        std::vector<Vec3> dirs;
        std::vector<double> wts;
        dirs.reserve(n);
        wts.reserve(n);
        for (int i = 0; i < n; ++i) {
            const double u1 = (i + 0.5) / n;
            const double u2 = radical_inverse(static_cast<uint32_t>(i));
            const Vec3 half = brdf::sample_ggx_half(u1, u2, alpha);
            const Vec3 l = 2.0 * half.z() * half - Vec3(0, 0, 1);
            if (l.z() <= 0.0) continue;
            dirs.push_back(l);
            wts.push_back(l.z());
        }
        const size_t m = dirs.size();

        ImageF lvl(w, h, 1);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const Vec3 axis = equirect_to_dir({x + 0.5, y + 0.5}, w, h);
                const brdf::Basis basis = brdf::make_basis(axis);
                for (size_t i = 0; i < m; ++i) {
                    const Vec3 d = basis.to_world(dirs[i]);
                    lx[i] = static_cast<float>(d.x());
                    ly[i] = static_cast<float>(d.y());
                    lz[i] = static_cast<float>(d.z());
                }
                kb.equirect_uv(lx.data(), ly.data(), lz.data(), su.data(), sv.data(), m,
                               static_cast<float>(w), static_cast<float>(h));
                for (size_t i = 0; i < m; ++i) {
                    float uu = su[i] - 0.5f;
                    if (uu < 0) uu += w;
                    su[i] = uu;
                    sv[i] = sv[i] - 0.5f;
                }
                kb.bilinear_batch(padded.data(), w + 1, h, su.data(), sv.data(), vals.data(), m);
                double acc = 0.0, wsum = 0.0;
                for (size_t i = 0; i < m; ++i) {
                    acc += wts[i] * vals[i];
                    wsum += wts[i];
                }
                lvl.at(x, y) = static_cast<float>(wsum > 0 ? acc / wsum : 0.0);
            }
        }
        out.levels.push_back(std::move(lvl));
    }
    return out;
}

double BrdfTable::lookup(double cos_v, double roughness) const {
    const int res = table.width();
    const double x = std::clamp(cos_v, 0.0, 1.0) * (res - 1);
    const double y = std::clamp(roughness, 0.0, 1.0) * (res - 1);
    const int x0 = std::min(static_cast<int>(x), res - 2);
    const int y0 = std::min(static_cast<int>(y), res - 2);
    const double fx = x - x0, fy = y - y0;
    const double top = table.at(x0, y0) + fx * (table.at(x0 + 1, y0) - table.at(x0, y0));
    const double bot =
        table.at(x0, y0 + 1) + fx * (table.at(x0 + 1, y0 + 1) - table.at(x0, y0 + 1));
    return top + fy * (bot - top);
}

BrdfTable build_brdf_table(int resolution, int samples) {
    if (resolution < 2) throw std::invalid_argument("build_brdf_table: resolution must be >= 2");
    BrdfTable out;
    out.table = ImageF(resolution, resolution, 1);
    for (int j = 0; j < resolution; ++j) {
        const double roughness = static_cast<double>(j) / (resolution - 1);
        for (int i = 0; i < resolution; ++i) {
            const double cos_v = std::max(static_cast<double>(i) / (resolution - 1), 1e-3);
            const Vec3 v(std::sqrt(std::max(0.0, 1.0 - cos_v * cos_v)), 0.0, cos_v);
            double acc = 0.0;
            for (int s = 0; s < samples; ++s) {
                const double u1 = (s + 0.5) / samples;
                const double u2 = radical_inverse(static_cast<uint32_t>(s));
                if (auto smp = brdf::sample_specular(v, roughness, u1, u2)) {
                    acc += smp->weight;
                }
            }
            out.table.at(i, j) = static_cast<float>(std::clamp(acc / samples, 0.0, 1.0));
        }
    }
    return out;
}

std::optional<double> eval_radiance(const RadianceContext& ctx, int control_idx,
                                    const Vec3& n, const Vec3& beta, double roughness) {
    const double bnorm = beta.norm();
    if (bnorm <= 0.0) throw std::invalid_argument("eval_radiance: zero view vector");
    const Vec3 v = -beta / bnorm;  // surface -> camera
    const double NoV = n.dot(v);
    if (NoV <= 0.0) return std::nullopt;

    const Vec3 reflected = (2.0 * NoV * n - v).normalized();
    const PrefilteredEnv& env = ctx.envs.at(static_cast<size_t>(control_idx));
    const double t_light = env.sample(reflected, roughness);
    const double t_brdf = ctx.brdf.lookup(NoV, roughness);
    return t_light * t_brdf;
}

std::optional<double> oracle_radiance(const EnvironmentMap& env, const Vec3& n,
                                      const Vec3& beta, double roughness,
                                      int nsamples, uint64_t seed) {
    const double bnorm = beta.norm();
    if (bnorm <= 0.0) throw std::invalid_argument("oracle_radiance: zero view vector");
    const Vec3 v_world = -beta / bnorm;
    if (n.dot(v_world) <= 0.0) return std::nullopt;

    const ImageF lum = luminance_image(env.rgb);
    const brdf::Basis basis = brdf::make_basis(n);
    const Vec3 v = basis.to_local(v_world);

    Rng rng(seed);
    double acc = 0.0;
    for (int s = 0; s < nsamples; ++s) {
        const double u1 = rng.uniform();
        const double u2 = rng.uniform();
        const auto smp = brdf::sample_specular(v, roughness, u1, u2);
        if (!smp) continue;
        const Vec3 l_world = basis.to_world(smp->light);
        const Pixel uv = dir_to_equirect(l_world.normalized(), env.width(), env.height());
        acc += smp->weight * sample_equirect(lum, uv.u, uv.v);
    }
    return acc / nsamples;
}

}  // namespace pba
