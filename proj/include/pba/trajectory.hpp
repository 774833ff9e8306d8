#pragma once

#include <string>
#include <vector>

#include "pba/geometry.hpp"

namespace pba {

// Timestamped world-from-camera poses, timestamps strictly increasing.
struct Trajectory {
    struct Entry {
        double timestamp = 0.0;
        Pose pose;
    };
    std::vector<Entry> entries;

    size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
};

// Text format, one line per frame:
//   timestamp tx ty tz qx qy qz qw
// quaternion scalar-last, '#' starts a comment line.
Trajectory load_trajectory(const std::string& path);
void save_trajectory(const std::string& path, const Trajectory& traj);

std::string format_trajectory(const Trajectory& traj);
Trajectory parse_trajectory(const std::string& text, const std::string& origin = "<string>");

}  // namespace pba
