#include "pba/control_points.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace pba {

namespace {

struct Cluster {
    double u = 0, v = 0;
    Vec3 n{0, 0, 0};
};

}  // namespace

Segmentation slic_on_normals(const NormalMap& normals, int k, double compactness,
                             const SlicOptions& opts) {
    const int w = normals.width(), h = normals.height();
    if (k < 1) throw std::invalid_argument("slic_on_normals: k must be >= 1");

    size_t valid_count = 0;
    for (uint8_t m : normals.valid) valid_count += m;
    if (valid_count < static_cast<size_t>(k)) {
        throw std::runtime_error("slic_on_normals: fewer valid pixels than clusters");
    }

    const double S = std::sqrt(static_cast<double>(w) * h / k);
    const double spatial = (compactness / S) * (compactness / S);

    // Seed clusters on a grid no larger than k cells.
    int gy = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(k) * h / w))));
    gy = std::min(gy, k);
    int gx = std::max(1, k / gy);

    std::vector<Cluster> clusters;
    for (int j = 0; j < gy; ++j) {
        for (int i = 0; i < gx; ++i) {
            int cx = std::clamp(static_cast<int>((i + 0.5) * w / gx), 0, w - 1);
            int cy = std::clamp(static_cast<int>((j + 0.5) * h / gy), 0, h - 1);
            if (!normals.is_valid(cx, cy)) {
                // Snap to the nearest valid pixel.
                int best = -1;
                double best_d = 0;
                for (int y = 0; y < h; ++y) {
                    for (int x = 0; x < w; ++x) {
                        if (!normals.is_valid(x, y)) continue;
                        const double d = (x - cx) * double(x - cx) + (y - cy) * double(y - cy);
                        if (best < 0 || d < best_d) {
                            best = y * w + x;
                            best_d = d;
                        }
                    }
                }
                cx = best % w;
                cy = best / w;
            }
            Cluster c;
            c.u = cx;
            c.v = cy;
            c.n = normals.normal(cx, cy);
            clusters.push_back(c);
        }
    }
    const int nc = static_cast<int>(clusters.size());

    std::vector<int> labels(static_cast<size_t>(w) * h, -1);
    std::vector<double> best(static_cast<size_t>(w) * h, 0.0);

    for (int iter = 0; iter < opts.iterations; ++iter) {
        std::fill(labels.begin(), labels.end(), -1);
        const int window = std::max(1, static_cast<int>(std::ceil(2.0 * S)));
        for (int c = 0; c < nc; ++c) {
            const Cluster& cl = clusters[c];
            const int x0 = std::max(0, static_cast<int>(cl.u) - window);
            const int x1 = std::min(w - 1, static_cast<int>(cl.u) + window);
            const int y0 = std::max(0, static_cast<int>(cl.v) - window);
            const int y1 = std::min(h - 1, static_cast<int>(cl.v) + window);
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    if (!normals.is_valid(x, y)) continue;
                    const size_t idx = static_cast<size_t>(y) * w + x;
                    const double du = x - cl.u, dv = y - cl.v;
                    const Vec3 dn = normals.normal(x, y) - cl.n;
                    const double d = spatial * (du * du + dv * dv) + dn.squaredNorm();
                    if (labels[idx] < 0 || d < best[idx]) {
                        labels[idx] = c;
                        best[idx] = d;
                    }
                }
            }
        }
        // Valid pixels missed by every window fall back to a full scan.
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const size_t idx = static_cast<size_t>(y) * w + x;
                if (!normals.is_valid(x, y) || labels[idx] >= 0) continue;
                int arg = 0;
                double dmin = 0;
                for (int c = 0; c < nc; ++c) {
                    const double du = x - clusters[c].u, dv = y - clusters[c].v;
                    const Vec3 dn = normals.normal(x, y) - clusters[c].n;
                    const double d = spatial * (du * du + dv * dv) + dn.squaredNorm();
                    if (c == 0 || d < dmin) {
                        dmin = d;
                        arg = c;
                    }
                }
                labels[idx] = arg;
            }
        }

        // Centroid update.
        std::vector<double> su(nc, 0), sv(nc, 0), cnt(nc, 0);
        std::vector<Vec3> sn(nc, Vec3::Zero());
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const int c = labels[static_cast<size_t>(y) * w + x];
                if (c < 0) continue;
                su[c] += x;
                sv[c] += y;
                sn[c] += normals.normal(x, y);
                cnt[c] += 1;
            }
        }
        for (int c = 0; c < nc; ++c) {
            if (cnt[c] == 0) continue;
            clusters[c].u = su[c] / cnt[c];
            clusters[c].v = sv[c] / cnt[c];
            const double nn = sn[c].norm();
            if (nn > 1e-12) clusters[c].n = sn[c] / nn;
        }
    }

    auto is_labeled = [&](int x, int y) {
        return labels[static_cast<size_t>(y) * w + x] >= 0;
    };

    if (opts.enforce_connectivity) {
        // Keep the largest 4-connected component of every label; everything
        // else is cleared and re-grown from the kept components.
        std::vector<int> comp(static_cast<size_t>(w) * h, -1);
        struct CompInfo {
            int label;
            int size;
            int seed;
        };
        std::vector<CompInfo> comps;
        std::deque<int> queue;
        const int dx4[4] = {1, -1, 0, 0};
        const int dy4[4] = {0, 0, 1, -1};

        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const size_t idx = static_cast<size_t>(y) * w + x;
                if (!is_labeled(x, y) || comp[idx] >= 0) continue;
                const int cid = static_cast<int>(comps.size());
                const int lab = labels[idx];
                comps.push_back({lab, 0, static_cast<int>(idx)});
                comp[idx] = cid;
                queue.clear();
                queue.push_back(static_cast<int>(idx));
                while (!queue.empty()) {
                    const int p = queue.front();
                    queue.pop_front();
                    ++comps[cid].size;
                    const int px = p % w, py = p / w;
                    for (int d = 0; d < 4; ++d) {
                        const int nx = px + dx4[d], ny = py + dy4[d];
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        const size_t nidx = static_cast<size_t>(ny) * w + nx;
                        if (comp[nidx] >= 0 || labels[nidx] != lab) continue;
                        comp[nidx] = cid;
                        queue.push_back(static_cast<int>(nidx));
                    }
                }
            }
        }

        std::vector<int> keep(nc, -1);  // label -> largest component id
        for (size_t cid = 0; cid < comps.size(); ++cid) {
            const auto& c = comps[cid];
            if (keep[c.label] < 0 || comps[keep[c.label]].size < c.size) {
                keep[c.label] = static_cast<int>(cid);
            }
        }

        queue.clear();
        for (size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] < 0) continue;
            if (keep[labels[i]] == comp[i]) {
                queue.push_back(static_cast<int>(i));
            } else {
                labels[i] = -1;
            }
        }
        while (!queue.empty()) {
            const int p = queue.front();
            queue.pop_front();
            const int px = p % w, py = p / w;
            for (int d = 0; d < 4; ++d) {
                const int nx = px + dx4[d], ny = py + dy4[d];
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                const size_t nidx = static_cast<size_t>(ny) * w + nx;
                if (labels[nidx] >= 0 || !normals.is_valid(nx, ny)) continue;
                labels[nidx] = labels[static_cast<size_t>(py) * w + px];
                queue.push_back(static_cast<int>(nidx));
            }
        }
    }

    // Absorb invalid-normal pixels into the nearest labeled cluster.
    {
        std::deque<int> queue;
        for (size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] >= 0) queue.push_back(static_cast<int>(i));
        }
        const int dx4[4] = {1, -1, 0, 0};
        const int dy4[4] = {0, 0, 1, -1};
        while (!queue.empty()) {
            const int p = queue.front();
            queue.pop_front();
            const int px = p % w, py = p / w;
            for (int d = 0; d < 4; ++d) {
                const int nx = px + dx4[d], ny = py + dy4[d];
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                const size_t nidx = static_cast<size_t>(ny) * w + nx;
                if (labels[nidx] >= 0) continue;
                labels[nidx] = labels[static_cast<size_t>(py) * w + px];
                queue.push_back(static_cast<int>(nidx));
            }
        }
    }

    // Compact labels; clusters can die during iterations.
    std::vector<int> remap(nc, -1);
    int next = 0;
    for (int& l : labels) {
        if (l < 0) continue;
        if (remap[l] < 0) remap[l] = next++;
        l = remap[l];
    }

    Segmentation seg;
    seg.labels = std::move(labels);
    seg.width = w;
    seg.height = h;
    seg.num_clusters = next;
    return seg;
}

ControlExtraction make_control_points(const Segmentation& seg, const ImageF& depth,
                                      const Pose& pose, const Intrinsics& K) {
    if (seg.width != depth.width() || seg.height != depth.height()) {
        throw std::invalid_argument("make_control_points: segmentation/depth shape mismatch");
    }
    struct Acc {
        double su = 0, sv = 0;
        long count = 0;
        std::vector<float> depths;
    };
    std::vector<Acc> acc(seg.num_clusters);
    for (int y = 0; y < seg.height; ++y) {
        for (int x = 0; x < seg.width; ++x) {
            const int c = seg.label(x, y);
            if (c < 0) continue;
            acc[c].su += x;
            acc[c].sv += y;
            acc[c].count += 1;
            const float d = depth.at(x, y);
            if (depth_valid(d)) acc[c].depths.push_back(d);
        }
    }

    ControlExtraction out;
    for (int c = 0; c < seg.num_clusters; ++c) {
        Acc& a = acc[c];
        if (a.count == 0) continue;
        if (a.depths.empty()) {
            ++out.dropped;
            continue;
        }
        const size_t mid = a.depths.size() / 2;
        std::nth_element(a.depths.begin(), a.depths.begin() + mid, a.depths.end());
        const double median = a.depths[mid];
        const Pixel centroid{a.su / a.count, a.sv / a.count};
        ControlPoint cp;
        cp.id = static_cast<int>(out.controls.size());
        cp.position = pose.apply(backproject(centroid, median, K));
        out.controls.push_back(cp);
    }
    return out;
}

NearestControlIndex::NearestControlIndex(std::vector<Vec3> positions)
    : pts_(std::move(positions)) {
    if (pts_.empty()) return;
    std::vector<int> order(pts_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    nodes_.reserve(pts_.size());
    root_ = build(order, 0, static_cast<int>(order.size()), 0);
}

int NearestControlIndex::build(std::vector<int>& order, int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % 3;
    const int mid = (lo + hi) / 2;
    std::nth_element(order.begin() + lo, order.begin() + mid, order.begin() + hi,
                     [&](int a, int b) {
                         const double ca = pts_[a](axis), cb = pts_[b](axis);
                         return ca < cb || (ca == cb && a < b);
                     });
    Node node;
    node.point = order[mid];
    node.axis = axis;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    nodes_[self].left = build(order, lo, mid, depth + 1);
    nodes_[self].right = build(order, mid + 1, hi, depth + 1);
    return self;
}

void NearestControlIndex::search(int node, const Vec3& q, double& best_d2,
                                 int& best_idx) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    const double d2 = (pts_[n.point] - q).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && n.point < best_idx)) {
        best_d2 = d2;
        best_idx = n.point;
    }
    const double delta = q(n.axis) - pts_[n.point](n.axis);
    const int near = delta < 0 ? n.left : n.right;
    const int far = delta < 0 ? n.right : n.left;
    search(near, q, best_d2, best_idx);
    if (delta * delta <= best_d2) search(far, q, best_d2, best_idx);
}

int NearestControlIndex::nearest(const Vec3& query) const {
    if (pts_.empty()) throw std::runtime_error("nearest_control: empty control set");
    double best_d2 = std::numeric_limits<double>::infinity();
    int best_idx = static_cast<int>(pts_.size());
    search(root_, query, best_d2, best_idx);
    return best_idx;
}

int nearest_control(const Vec3& query, const std::vector<ControlPoint>& controls) {
    std::vector<Vec3> pts;
    pts.reserve(controls.size());
    for (const auto& c : controls) pts.push_back(c.position);
    return NearestControlIndex(std::move(pts)).nearest(query);
}

}  // namespace pba
