#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pba/image.hpp"
#include "pba/radiance.hpp"
#include "pba/surface.hpp"
#include "pba/trajectory.hpp"

namespace pba {

// On-disk layout:
//   intrinsics.txt            "fx fy cx cy width height"
//   groundtruth.txt           trajectory text format
//   initial.txt               perturbed / front-end trajectory
//   frames/NNNNNN.pfm         grayscale image, linear [0,1]
//   frames/NNNNNN.depth.pfm   meters, 0 = invalid
//   frames/NNNNNN.rough.pfm   roughness in [0,1]
//   frames/NNNNNN.normal.pfm  camera-frame unit normals (optional)
//   controls/control_points.txt   "id x y z" per line
//   controls/NNN.env.pfm      equirectangular RGB radiance

struct DatasetFrame {
    double timestamp = 0.0;
    ImageF image;
    ImageF depth;
    ImageF rough;
    std::optional<NormalMap> normals;
};

struct DatasetControl {
    int id = 0;
    Vec3 position{0, 0, 0};
    EnvironmentMap env;
};

struct Dataset {
    std::string dir;
    Intrinsics K;
    Trajectory groundtruth;
    Trajectory initial;
    std::vector<DatasetFrame> frames;
    std::vector<DatasetControl> controls;
};

std::string frame_stem(int index);    // "000000"
std::string control_stem(int index);  // "000"

Intrinsics load_intrinsics(const std::string& path);
void save_intrinsics(const std::string& path, const Intrinsics& K);

Dataset load_dataset(const std::string& dir);

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// Structural and invariant checks over every file in the layout. Collects
// violations instead of throwing.
ValidationReport validate_dataset(const std::string& dir);

struct RadianceContextOptions {
    bool use_cache = true;  // .prefN.pfm / brdf_lut.pfm next to the dataset
    int levels = 9;
    int samples_per_texel = 1024;
    int brdf_resolution = 64;
    int brdf_samples = 4096;
};

// Prefilters every control environment and builds the shared BRDF table,
// reusing on-disk caches when present. Caches are derived data and safe to
// delete.
RadianceContext build_radiance_context(const Dataset& ds,
                                       const RadianceContextOptions& opts = {});

}  // namespace pba
