#include "pba/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace pba {

namespace {

Mat3 skew(const Vec3& w) {
    Mat3 m;
    m << 0, -w.z(), w.y(),
         w.z(), 0, -w.x(),
         -w.y(), w.x(), 0;
    return m;
}

}  // namespace

Pose se3_exp(const Vec6& xi) {
    const Vec3 omega = xi.head<3>();
    const Vec3 nu = xi.tail<3>();
    const double theta = omega.norm();

    Pose out;
    if (theta < 1e-12) {
        out.q = Eigen::Quaterniond(1.0, 0.5 * omega.x(), 0.5 * omega.y(), 0.5 * omega.z())
                    .normalized();
    } else {
        out.q = Eigen::Quaterniond(Eigen::AngleAxisd(theta, omega / theta));
    }

    const Mat3 Omega = skew(omega);
    double a, b;  // coefficients of the left Jacobian V
    if (theta < 1e-5) {
        const double t2 = theta * theta;
        a = 0.5 - t2 / 24.0;
        b = 1.0 / 6.0 - t2 / 120.0;
    } else {
        a = (1.0 - std::cos(theta)) / (theta * theta);
        b = (theta - std::sin(theta)) / (theta * theta * theta);
    }
    const Mat3 V = Mat3::Identity() + a * Omega + b * Omega * Omega;
    out.t = V * nu;
    return out;
}

Vec6 se3_log(const Pose& pose) {
    Eigen::Quaterniond q = pose.q.normalized();
    if (q.w() < 0) q.coeffs() = -q.coeffs();
    const double vnorm = q.vec().norm();
    const double theta = 2.0 * std::atan2(vnorm, q.w());

    Vec3 omega;
    if (vnorm < 1e-12) {
        omega = 2.0 * q.vec();
    } else {
        omega = (theta / vnorm) * q.vec();
    }

    const Mat3 Omega = skew(omega);
    double c;  // quadratic coefficient of V^{-1}
    if (theta < 1e-5) {
        c = 1.0 / 12.0 + theta * theta / 720.0;
    } else {
        const double half = 0.5 * theta;
        c = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
    }
    const Mat3 Vinv = Mat3::Identity() - 0.5 * Omega + c * Omega * Omega;

    Vec6 xi;
    xi.head<3>() = omega;
    xi.tail<3>() = Vinv * pose.t;
    return xi;
}

double rotation_angle(const Pose& a, const Pose& b) {
    const double dot = std::min(1.0, std::abs(a.q.normalized().dot(b.q.normalized())));
    return 2.0 * std::acos(dot);
}

Vec3 backproject(const Pixel& p, double depth, const Intrinsics& K) {
    if (!(depth > 0.0)) {
        throw std::invalid_argument("backproject: depth must be positive");
    }
    return {depth * (p.u - K.cx) / K.fx, depth * (p.v - K.cy) / K.fy, depth};
}

Pixel project(const Vec3& point, const Intrinsics& K) {
    if (!(point.z() > 0.0)) {
        throw std::invalid_argument("project: point must be in front of the camera");
    }
    return {K.fx * point.x() / point.z() + K.cx, K.fy * point.y() / point.z() + K.cy};
}

WarpResult warp(const Pixel& p, double depth, const Pose& rel, const Intrinsics& K) {
    const Vec3 pt = rel.apply(backproject(p, depth, K));
    WarpResult out;
    out.z = pt.z();
    if (pt.z() <= kMinWarpDepth) {
        out.behind = true;
        return out;
    }
    out.pixel = project(pt, K);
    out.inside = out.pixel.u >= 0.0 && out.pixel.u <= K.width - 1 &&
                 out.pixel.v >= 0.0 && out.pixel.v <= K.height - 1;
    return out;
}

ViewDirections view_directions(const Pixel& p, double depth, const Pose& rel,
                               const Intrinsics& K) {
    ViewDirections dirs;
    dirs.beta = backproject(p, depth, K);
    dirs.beta_prime = dirs.beta + rel.q.conjugate() * rel.t;
    return dirs;
}

BilinearSample bilinear(const ImageF& img, const Pixel& p) {
    const int w = img.width(), h = img.height();
    if (!(p.u >= 0.0 && p.u <= w - 1 && p.v >= 0.0 && p.v <= h - 1)) {
        throw std::out_of_range("bilinear: sample outside image");
    }
    const int x0 = std::min(static_cast<int>(p.u), w - 2);
    const int y0 = std::min(static_cast<int>(p.v), h - 2);
    const double fx = p.u - x0;
    const double fy = p.v - y0;
    const double i00 = img.at(x0, y0);
    const double i10 = img.at(x0 + 1, y0);
    const double i01 = img.at(x0, y0 + 1);
    const double i11 = img.at(x0 + 1, y0 + 1);

    BilinearSample s;
    s.value = (1 - fx) * (1 - fy) * i00 + fx * (1 - fy) * i10 +
              (1 - fx) * fy * i01 + fx * fy * i11;
    s.du = (1 - fy) * (i10 - i00) + fy * (i11 - i01);
    s.dv = (1 - fx) * (i01 - i00) + fx * (i11 - i10);
    return s;
}

}  // namespace pba
