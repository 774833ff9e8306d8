#pragma once

#include <vector>

#include "pba/geometry.hpp"
#include "pba/surface.hpp"

namespace pba {

struct Segmentation {
    std::vector<int> labels;  // row-major cluster id per pixel
    int width = 0, height = 0;
    int num_clusters = 0;

    int label(int x, int y) const { return labels[static_cast<size_t>(y) * width + x]; }
};

struct SlicOptions {
    int iterations = 10;
    bool enforce_connectivity = true;
};

// SLIC over the joint space (m*u/S, m*v/S, nx, ny, nz) with grid interval
// S = sqrt(pixels / k). Pixels without a valid normal are absorbed into the
// nearest cluster after the connectivity step. Throws when fewer than k
// pixels carry valid normals.
Segmentation slic_on_normals(const NormalMap& normals, int k, double compactness,
                             const SlicOptions& opts = {});

struct ControlPoint {
    int id = 0;
    Vec3 position{0, 0, 0};  // world frame
};

struct ControlExtraction {
    std::vector<ControlPoint> controls;
    int dropped = 0;  // clusters without any valid depth
};

// One control per cluster: pixel centroid back-projected at the cluster's
// median depth, then moved to the world frame.
ControlExtraction make_control_points(const Segmentation& seg, const ImageF& depth,
                                      const Pose& pose, const Intrinsics& K);

// kd-tree over control positions. Ties resolve to the lowest index.
class NearestControlIndex {
public:
    NearestControlIndex() = default;
    explicit NearestControlIndex(std::vector<Vec3> positions);

    int nearest(const Vec3& query) const;  // throws on an empty set
    size_t size() const { return pts_.size(); }

private:
    struct Node {
        int point = -1;
        int axis = 0;
        int left = -1, right = -1;
    };

    int build(std::vector<int>& order, int lo, int hi, int depth);
    void search(int node, const Vec3& q, double& best_d2, int& best_idx) const;

    std::vector<Vec3> pts_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

// Convenience wrapper over NearestControlIndex for one-off queries.
int nearest_control(const Vec3& query, const std::vector<ControlPoint>& controls);

}  // namespace pba
