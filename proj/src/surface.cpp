#include "pba/surface.hpp"

#include <cmath>

namespace pba {

namespace {

constexpr double kDegenerateCross = 1e-10;

// Flips n so it faces the camera at the origin: n . (-P/|P|) > 0.
Vec3 orient_to_camera(Vec3 n, const Vec3& P) {
    if (n.dot(P) > 0.0) n = -n;
    return n;
}

// 8-connected ring in counter-clockwise pixel order.
constexpr int kRing[8][2] = {
    {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1},
};

}  // namespace

std::optional<Vec3> triplet_normal(const Vec3& P, const Vec3& N1, const Vec3& N2) {
    const Vec3 cross = (P - N1).cross(P - N2);
    const double norm = cross.norm();
    if (norm <= kDegenerateCross) return std::nullopt;
    return orient_to_camera(cross / norm, P);
}

NormalMap estimate_normal_map(const ImageF& depth, const Intrinsics& K,
                              const NormalEstimationOptions& opts) {
    const int w = depth.width(), h = depth.height();
    NormalMap out;
    out.normals = ImageF(w, h, 3, 0.0f);
    out.valid.assign(static_cast<size_t>(w) * h, 0);

    const double h2 = opts.mls_bandwidth * opts.mls_bandwidth;
    const double vic2 = opts.vicinity * opts.vicinity;

    std::vector<Vec3> ring;
    std::vector<Vec3> cloud;
    std::vector<double> weights;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float d = depth.at(x, y);
            if (!depth_valid(d)) continue;
            const Vec3 P = backproject({double(x), double(y)}, d, K);

            ring.clear();
            for (const auto& o : kRing) {
                const int nx = x + o[0], ny = y + o[1];
                if (!depth.contains(nx, ny)) continue;
                const float nd = depth.at(nx, ny);
                if (!depth_valid(nd)) continue;
                const Vec3 N = backproject({double(nx), double(ny)}, nd, K);
                if ((N - P).squaredNorm() <= vic2) ring.push_back(N);
            }
            if (ring.size() < 3) continue;

            // Facet normals from consecutive neighbor pairs, consistent winding.
            Vec3 accum = Vec3::Zero();
            for (size_t i = 0; i < ring.size(); ++i) {
                const Vec3& n1 = ring[i];
                const Vec3& n2 = ring[(i + 1) % ring.size()];
                const Vec3 c = (P - n1).cross(P - n2);
                const double norm = c.norm();
                if (norm > kDegenerateCross) accum += c / norm;
            }
            if (accum.norm() <= kDegenerateCross) continue;
            Vec3 normal = orient_to_camera(accum.normalized(), P);

            if (opts.mls_smooth) {
                // Gaussian-weighted plane fit over the metric vicinity.
                const int radius = std::clamp(
                    static_cast<int>(std::ceil(opts.vicinity * std::max(K.fx, K.fy) / d)),
                    1, opts.max_window);
                cloud.clear();
                weights.clear();
                for (int dy = -radius; dy <= radius; ++dy) {
                    for (int dx = -radius; dx <= radius; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (!depth.contains(nx, ny)) continue;
                        const float nd = depth.at(nx, ny);
                        if (!depth_valid(nd)) continue;
                        const Vec3 Q = backproject({double(nx), double(ny)}, nd, K);
                        const double dist2 = (Q - P).squaredNorm();
                        if (dist2 > vic2) continue;
                        cloud.push_back(Q);
                        weights.push_back(std::exp(-dist2 / h2));
                    }
                }
                if (cloud.size() < 3) continue;

                double wsum = 0.0;
                Vec3 mean = Vec3::Zero();
                for (size_t i = 0; i < cloud.size(); ++i) {
                    wsum += weights[i];
                    mean += weights[i] * cloud[i];
                }
                mean /= wsum;
                Mat3 cov = Mat3::Zero();
                for (size_t i = 0; i < cloud.size(); ++i) {
                    const Vec3 q = cloud[i] - mean;
                    cov += weights[i] * q * q.transpose();
                }
                Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
                // Rank-deficient neighborhoods keep the facet normal.
                if (eig.info() == Eigen::Success &&
                    eig.eigenvalues()(1) > 1e-18 * std::max(1.0, eig.eigenvalues()(2))) {
                    normal = orient_to_camera(eig.eigenvectors().col(0), P);
                }
            }

            out.normals.at(x, y, 0) = static_cast<float>(normal.x());
            out.normals.at(x, y, 1) = static_cast<float>(normal.y());
            out.normals.at(x, y, 2) = static_cast<float>(normal.z());
            out.valid[static_cast<size_t>(y) * w + x] = 1;
        }
    }
    return out;
}

}  // namespace pba
