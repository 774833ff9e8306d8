#include "pba/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pba {

Trajectory parse_trajectory(const std::string& text, const std::string& origin) {
    Trajectory traj;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        Trajectory::Entry e;
        double qx, qy, qz, qw;
        if (!(ls >> e.timestamp >> e.pose.t.x() >> e.pose.t.y() >> e.pose.t.z() >>
              qx >> qy >> qz >> qw)) {
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": expected 'timestamp tx ty tz qx qy qz qw'");
        }
        e.pose.q = Eigen::Quaterniond(qw, qx, qy, qz);
        const double norm = e.pose.q.norm();
        if (std::abs(norm - 1.0) > 1e-3) {
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": quaternion far from unit norm");
        }
        e.pose.q.normalize();
        if (!traj.entries.empty() && e.timestamp <= traj.entries.back().timestamp) {
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": timestamps must be strictly increasing");
        }
        traj.entries.push_back(e);
    }
    return traj;
}

Trajectory load_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("trajectory: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_trajectory(ss.str(), path);
}

std::string format_trajectory(const Trajectory& traj) {
    std::string out;
    char buf[256];
    for (const auto& e : traj.entries) {
        std::snprintf(buf, sizeof(buf), "%.6f %.12g %.12g %.12g %.12g %.12g %.12g %.12g\n",
                      e.timestamp, e.pose.t.x(), e.pose.t.y(), e.pose.t.z(),
                      e.pose.q.x(), e.pose.q.y(), e.pose.q.z(), e.pose.q.w());
        out += buf;
    }
    return out;
}

void save_trajectory(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("trajectory: cannot write " + path);
    out << format_trajectory(traj);
}

}  // namespace pba
