#pragma once

#include <string>
#include <vector>

#include "pba/trajectory.hpp"

namespace pba {

struct Alignment {
    Pose transform;          // maps est positions onto gt
    int pairs = 0;
    bool degenerate = false; // collinear translations; result still usable
    double rmse = 0.0;       // after alignment
};

// Closed-form SE(3) least-squares alignment of associated translations
// (scale fixed at 1). Association is by nearest timestamp within max_dt.
// Throws when fewer than 3 pairs associate.
Alignment umeyama_align(const Trajectory& est, const Trajectory& gt,
                        double max_dt = 0.02);

double ate_rmse(const Trajectory& est, const Trajectory& gt, double max_dt = 0.02);

struct AtePoint {
    double timestamp = 0.0;
    Vec3 aligned_est{0, 0, 0};
    Vec3 gt{0, 0, 0};
    double error = 0.0;
};

struct AteDetails {
    double rmse = 0.0;
    Alignment alignment;
    std::vector<AtePoint> points;
};

AteDetails ate_details(const Trajectory& est, const Trajectory& gt, double max_dt = 0.02);

}  // namespace pba
