#include "pba/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pba/pfm.hpp"

namespace fs = std::filesystem;

namespace pba {

namespace {

std::string zero_pad(int index, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*d", digits, index);
    return buf;
}

std::vector<std::pair<int, Vec3>> load_control_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("controls: cannot open " + path);
    std::vector<std::pair<int, Vec3>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        int id;
        Vec3 p;
        if (!(ls >> id >> p.x() >> p.y() >> p.z())) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'id x y z'");
        }
        out.emplace_back(id, p);
    }
    return out;
}

}  // namespace

std::string frame_stem(int index) { return zero_pad(index, 6); }
std::string control_stem(int index) { return zero_pad(index, 3); }

Intrinsics load_intrinsics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("intrinsics: cannot open " + path);
    Intrinsics K;
    if (!(in >> K.fx >> K.fy >> K.cx >> K.cy >> K.width >> K.height)) {
        throw std::runtime_error("intrinsics: " + path +
                                 ": expected 'fx fy cx cy width height'");
    }
    if (!K.valid()) throw std::runtime_error("intrinsics: " + path + ": invalid values");
    return K;
}

void save_intrinsics(const std::string& path, const Intrinsics& K) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("intrinsics: cannot write " + path);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %.9g %d %d\n", K.fx, K.fy, K.cx, K.cy,
                  K.width, K.height);
    out << buf;
}

Dataset load_dataset(const std::string& dir) {
    Dataset ds;
    ds.dir = dir;
    ds.K = load_intrinsics(dir + "/intrinsics.txt");
    ds.groundtruth = load_trajectory(dir + "/groundtruth.txt");
    ds.initial = load_trajectory(dir + "/initial.txt");

    const int n = static_cast<int>(ds.groundtruth.size());
    ds.frames.reserve(n);
    for (int i = 0; i < n; ++i) {
        DatasetFrame f;
        f.timestamp = ds.groundtruth.entries[i].timestamp;
        const std::string base = dir + "/frames/" + frame_stem(i);
        f.image = read_pfm(base + ".pfm");
        f.depth = read_pfm(base + ".depth.pfm");
        f.rough = read_pfm(base + ".rough.pfm");
        const std::string normal_path = base + ".normal.pfm";
        if (fs::exists(normal_path)) {
            NormalMap nm;
            nm.normals = read_pfm(normal_path);
            nm.valid.assign(static_cast<size_t>(nm.width()) * nm.height(), 0);
            for (int y = 0; y < nm.height(); ++y) {
                for (int x = 0; x < nm.width(); ++x) {
                    const Vec3 v = nm.normal(x, y);
                    if (v.squaredNorm() > 0.25) {
                        nm.valid[static_cast<size_t>(y) * nm.width() + x] = 1;
                    }
                }
            }
            f.normals = std::move(nm);
        }
        ds.frames.push_back(std::move(f));
    }

    for (const auto& [id, pos] : load_control_list(dir + "/controls/control_points.txt")) {
        DatasetControl c;
        c.id = id;
        c.position = pos;
        c.env = EnvironmentMap::load(dir + "/controls/" + control_stem(id) + ".env.pfm");
        ds.controls.push_back(std::move(c));
    }
    return ds;
}

ValidationReport validate_dataset(const std::string& dir) {
    ValidationReport rep;
    auto bad = [&](const std::string& msg) { rep.violations.push_back(msg); };

    if (!fs::is_directory(dir)) {
        bad(dir + ": not a directory");
        return rep;
    }

    Intrinsics K;
    bool have_k = false;
    try {
        K = load_intrinsics(dir + "/intrinsics.txt");
        have_k = true;
    } catch (const std::exception& e) {
        bad(e.what());
    }

    Trajectory gt, init;
    try {
        gt = load_trajectory(dir + "/groundtruth.txt");
        if (gt.size() < 2) bad("groundtruth.txt: fewer than 2 poses");
    } catch (const std::exception& e) {
        bad(e.what());
    }
    try {
        init = load_trajectory(dir + "/initial.txt");
        if (!gt.empty() && init.size() != gt.size()) {
            bad("initial.txt: pose count differs from groundtruth.txt");
        }
    } catch (const std::exception& e) {
        bad(e.what());
    }

    auto check_grid = [&](const std::string& path, int channels, float lo, float hi,
                          bool allow_zero) -> std::optional<ImageF> {
        try {
            ImageF img = read_pfm(path);
            if (img.channels() != channels) {
                bad(path + ": expected " + std::to_string(channels) + " channel(s), got " +
                    std::to_string(img.channels()));
                return std::nullopt;
            }
            if (have_k && (img.width() != K.width || img.height() != K.height)) {
                bad(path + ": dimensions disagree with intrinsics.txt");
                return std::nullopt;
            }
            for (size_t i = 0; i < img.size(); ++i) {
                const float v = img.data()[i];
                if (!std::isfinite(v) || v < lo - 1e-6f || v > hi + 1e-6f) {
                    if (!(allow_zero && v == 0.0f)) {
                        bad(path + ": value out of range at sample " + std::to_string(i));
                        break;
                    }
                }
            }
            return img;
        } catch (const std::exception& e) {
            bad(e.what());
            return std::nullopt;
        }
    };

    for (size_t i = 0; i < gt.size(); ++i) {
        const std::string base = dir + "/frames/" + frame_stem(static_cast<int>(i));
        check_grid(base + ".pfm", 1, 0.0f, 1.0f, false);
        check_grid(base + ".depth.pfm", 1, 0.0f, 1e9f, true);
        check_grid(base + ".rough.pfm", 1, 0.0f, 1.0f, false);
        const std::string normal_path = base + ".normal.pfm";
        if (fs::exists(normal_path)) {
            if (auto img = check_grid(normal_path, 3, -1.0f, 1.0f, true)) {
                for (int y = 0; y < img->height(); ++y) {
                    for (int x = 0; x < img->width(); ++x) {
                        const double n2 = Vec3(img->at(x, y, 0), img->at(x, y, 1),
                                               img->at(x, y, 2)).squaredNorm();
                        if (n2 > 0.25 && std::abs(std::sqrt(n2) - 1.0) > 1e-3) {
                            bad(normal_path + ": non-unit normal at (" + std::to_string(x) +
                                "," + std::to_string(y) + ")");
                            y = img->height();
                            break;
                        }
                    }
                }
            }
        }
    }

    try {
        const auto controls = load_control_list(dir + "/controls/control_points.txt");
        if (controls.empty()) bad("controls/control_points.txt: no control points");
        for (const auto& [id, pos] : controls) {
            if (!pos.allFinite()) bad("control " + std::to_string(id) + ": non-finite position");
            const std::string path = dir + "/controls/" + control_stem(id) + ".env.pfm";
            try {
                EnvironmentMap env = EnvironmentMap::load(path);
                for (size_t i = 0; i < env.rgb.size(); ++i) {
                    const float v = env.rgb.data()[i];
                    if (!std::isfinite(v) || v < 0.0f) {
                        bad(path + ": negative or non-finite radiance");
                        break;
                    }
                }
            } catch (const std::exception& e) {
                bad(e.what());
            }
        }
    } catch (const std::exception& e) {
        bad(e.what());
    }

    return rep;
}

RadianceContext build_radiance_context(const Dataset& ds, const RadianceContextOptions& opts) {
    RadianceContext ctx;

    const std::string lut_path = ds.dir + "/brdf_lut.pfm";
    bool have_lut = false;
    if (opts.use_cache && fs::exists(lut_path)) {
        try {
            ImageF t = read_pfm(lut_path);
            if (t.channels() == 1 && t.width() == opts.brdf_resolution &&
                t.height() == opts.brdf_resolution) {
                ctx.brdf.table = std::move(t);
                have_lut = true;
            }
        } catch (const std::exception&) {
        }
    }
    if (!have_lut) {
        ctx.brdf = build_brdf_table(opts.brdf_resolution, opts.brdf_samples);
        if (opts.use_cache) write_pfm(lut_path, ctx.brdf.table);
    }

    for (const auto& c : ds.controls) {
        ctx.control_positions.push_back(c.position);
        const std::string base = ds.dir + "/controls/" + control_stem(c.id) + ".env";

        PrefilteredEnv pre;
        pre.levels.push_back(luminance_image(c.env.rgb));
        bool cached = true;
        for (int l = 1; l < opts.levels && cached; ++l) {
            const std::string path = base + ".pref" + std::to_string(l) + ".pfm";
            if (!opts.use_cache || !fs::exists(path)) {
                cached = false;
                break;
            }
            try {
                ImageF img = read_pfm(path);
                if (img.channels() != 1 || img.width() != c.env.width() ||
                    img.height() != c.env.height()) {
                    cached = false;
                    break;
                }
                pre.levels.push_back(std::move(img));
            } catch (const std::exception&) {
                cached = false;
            }
        }
        if (!cached || static_cast<int>(pre.levels.size()) != opts.levels) {
            pre = prefilter(c.env, opts.levels, opts.samples_per_texel);
            if (opts.use_cache) {
                for (int l = 1; l < opts.levels; ++l) {
                    write_pfm(base + ".pref" + std::to_string(l) + ".pfm", pre.levels[l]);
                }
            }
        }
        ctx.envs.push_back(std::move(pre));
    }
    return ctx;
}

}  // namespace pba
