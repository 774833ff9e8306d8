#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pba/config.hpp"
#include "pba/control_points.hpp"
#include "pba/dataset.hpp"
#include "pba/geometry.hpp"
#include "pba/radiance.hpp"

namespace pba {

inline constexpr int kPatternSize = 8;
// Spread residual pattern around the center pixel, radius 2.
inline constexpr int kPattern[kPatternSize][2] = {
    {0, 0}, {0, -2}, {-1, -1}, {1, -1}, {-2, 0}, {2, 0}, {-1, 1}, {0, 2},
};

using PatchVec = Eigen::Matrix<double, kPatternSize, 1>;

// A host-frame pixel with inverse depth plus the reflection attributes that
// stay fixed during optimization (normal, roughness, control assignment).
struct ScenePoint {
    int host = 0;
    Pixel pixel;
    double inv_depth = 0.0;                     // optimization variable
    Vec3 normal{0, 0, -1};                      // host camera frame
    double roughness = 1.0;
    int control = 0;
    std::vector<int> obs;                       // target frame ids
    std::array<double, kPatternSize> host_vals{};  // cached host intensities
};

struct FrameState {
    int id = 0;
    double timestamp = 0.0;
    ImageF image;
    Pose pose;  // world-from-camera, optimization variable
};

struct Problem {
    Intrinsics K;
    std::vector<FrameState> frames;
    std::vector<ScenePoint> points;
    RadianceContext radiance;
    int gauge = 0;  // frame held fixed

    size_t num_observations() const {
        size_t n = 0;
        for (const auto& p : points) n += p.obs.size();
        return n;
    }
};

enum class WeightMode { PhysicallyBased, TDist, Uniform };

const char* weight_mode_name(WeightMode mode);
WeightMode parse_weight_mode(const std::string& name);

struct LmParams {
    int max_outer = 8;
    int max_inner = 20;
    double lambda_init = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 0.5;
    double stop_rel = 1e-6;
};

struct SolverConfig {
    WeightMode mode = WeightMode::PhysicallyBased;
    double theta = 14.6;
    double huber_delta = 0.1;  // intensity units; 0 disables
    double tdist_nu = 5.0;
    LmParams lm;
    bool deterministic = false;
};

// exp(-theta * |r - r'|), in (0, 1].
double pb_weight(double r, double r_prime, double theta);

// Student-t reweighting (nu+1)/(nu + (r/sigma)^2); sigma > 0 required.
double tdist_weight(double residual_norm, double nu, double sigma);

struct SelectOptions {
    int block = 32;
    double grad_threshold = 7.0 / 255.0;
    int margin = 3;
};

std::vector<Pixel> select_pixels(const ImageF& image, int target_count,
                                 const SelectOptions& opts = {});

// Patch residual F(p+o) - F'(warp(p+o)) at the current state; empty when the
// warp leaves the target image or lands behind the camera.
std::optional<PatchVec> residual(const ScenePoint& point, int target_id,
                                 const Problem& problem);

// Physically-based weight of one observation from the current light paths.
// Back-facing configurations carry no specular cue and weigh 1.
double compute_point_weight(const ScenePoint& point, int target_id,
                            const Problem& problem, double theta);

struct OuterRecord {
    double loss_begin = 0.0;
    double loss_end = 0.0;
    int inner_accepted = 0;
    int inner_rejected = 0;
    int dropped_obs = 0;
};

struct SolveReport {
    std::string status = "converged";  // converged | max_outer | diverged
    std::vector<OuterRecord> outers;
    double final_loss = 0.0;
    int num_frames = 0;
    int num_points = 0;
    int num_obs = 0;
    WeightMode mode = WeightMode::Uniform;
    double theta = 0.0;

    std::string to_text() const;
};

// Iteratively reweighted Levenberg-Marquardt over all non-gauge poses and
// inverse depths. Weights are frozen per outer iteration; the inner loop
// minimizes the weighted Huber patch loss with analytic Jacobians and a
// Schur complement over the inverse depths.
SolveReport optimize(Problem& problem, const SolverConfig& config);

struct BuildOptions {
    int points_per_frame = 150;
    int obs_radius = 4;
    double min_depth = 0.05;
    SelectOptions select;
    NormalEstimationOptions normal_opts;
};

// Assembles the optimization problem from a dataset and an initial
// trajectory; normals/roughness/control assignments bind to the initial
// depths and stay fixed.
Problem build_problem(const Dataset& ds, const Trajectory& init, RadianceContext ctx,
                      const BuildOptions& opts = {});

// Average final weight of the points hosted in one frame, splatted at their
// pixels; zero elsewhere.
ImageF render_weight_map(const Problem& problem, const SolverConfig& config, int frame_id);

struct SolveOutputs {
    SolveReport report;
    Trajectory refined;
};

// Full CLI-level pipeline: load + build + optimize + write refined.txt,
// report.txt and optional weight maps into out_dir.
SolveOutputs solve_dataset(const std::string& dataset_dir, const Config& cfg,
                           const std::string& out_dir);

}  // namespace pba
