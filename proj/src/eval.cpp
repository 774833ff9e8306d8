#include "pba/eval.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace pba {

namespace {

struct Pairing {
    std::vector<Vec3> est, gt;
    std::vector<double> stamps;
};

Pairing associate(const Trajectory& est, const Trajectory& gt, double max_dt) {
    Pairing out;
    size_t j = 0;
    for (const auto& e : est.entries) {
        while (j + 1 < gt.size() &&
               std::abs(gt.entries[j + 1].timestamp - e.timestamp) <=
                   std::abs(gt.entries[j].timestamp - e.timestamp)) {
            ++j;
        }
        if (gt.empty()) break;
        if (std::abs(gt.entries[j].timestamp - e.timestamp) <= max_dt) {
            out.est.push_back(e.pose.t);
            out.gt.push_back(gt.entries[j].pose.t);
            out.stamps.push_back(e.timestamp);
        }
    }
    return out;
}

Alignment solve_alignment(const Pairing& pairs) {
    const size_t n = pairs.est.size();
    if (n < 3) {
        throw std::runtime_error("umeyama_align: need at least 3 associated pose pairs, got " +
                                 std::to_string(n));
    }
    Vec3 ce = Vec3::Zero(), cg = Vec3::Zero();
    for (size_t i = 0; i < n; ++i) {
        ce += pairs.est[i];
        cg += pairs.gt[i];
    }
    ce /= static_cast<double>(n);
    cg /= static_cast<double>(n);

    Mat3 M = Mat3::Zero();
    for (size_t i = 0; i < n; ++i) {
        M += (pairs.est[i] - ce) * (pairs.gt[i] - cg).transpose();
    }
    Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 D = Mat3::Identity();
    if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0) D(2, 2) = -1;
    const Mat3 R = svd.matrixV() * D * svd.matrixU().transpose();

    Alignment align;
    align.pairs = static_cast<int>(n);
    align.transform.q = Eigen::Quaterniond(R).normalized();
    align.transform.t = cg - R * ce;
    const auto& sv = svd.singularValues();
    align.degenerate = sv(1) <= 1e-9 * std::max(sv(0), 1e-300);

    double sum_sq = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sum_sq += (align.transform.apply(pairs.est[i]) - pairs.gt[i]).squaredNorm();
    }
    align.rmse = std::sqrt(sum_sq / static_cast<double>(n));
    return align;
}

}  // namespace

Alignment umeyama_align(const Trajectory& est, const Trajectory& gt, double max_dt) {
    return solve_alignment(associate(est, gt, max_dt));
}

double ate_rmse(const Trajectory& est, const Trajectory& gt, double max_dt) {
    return umeyama_align(est, gt, max_dt).rmse;
}

AteDetails ate_details(const Trajectory& est, const Trajectory& gt, double max_dt) {
    const Pairing pairs = associate(est, gt, max_dt);
    AteDetails out;
    out.alignment = solve_alignment(pairs);
    out.rmse = out.alignment.rmse;
    out.points.reserve(pairs.est.size());
    for (size_t i = 0; i < pairs.est.size(); ++i) {
        AtePoint p;
        p.timestamp = pairs.stamps[i];
        p.aligned_est = out.alignment.transform.apply(pairs.est[i]);
        p.gt = pairs.gt[i];
        p.error = (p.aligned_est - p.gt).norm();
        out.points.push_back(p);
    }
    return out;
}

}  // namespace pba
