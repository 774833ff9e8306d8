#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "pba/image.hpp"

namespace pba {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;

// Continuous image coordinates, pixels.
struct Pixel {
    double u = 0.0;
    double v = 0.0;
};

struct Intrinsics {
    double fx = 0, fy = 0, cx = 0, cy = 0;
    int width = 0, height = 0;

    bool valid() const {
        return fx > 0 && fy > 0 && width > 0 && height > 0 &&
               cx >= 0 && cx < width && cy >= 0 && cy < height;
    }
};

// Rigid transform. Stored as world-from-camera throughout the pipeline;
// relative poses (target-from-host) are built as inverse(T_target) * T_host.
struct Pose {
    Eigen::Quaterniond q{1, 0, 0, 0};
    Vec3 t{0, 0, 0};

    static Pose identity() { return Pose{}; }

    Mat3 rotation() const { return q.toRotationMatrix(); }
    Vec3 rotate(const Vec3& p) const { return q * p; }
    Vec3 apply(const Vec3& p) const { return q * p + t; }

    Pose inverse() const {
        Pose inv;
        inv.q = q.conjugate();
        inv.t = -(inv.q * t);
        return inv;
    }

    // Composition renormalizes the quaternion to control drift.
    Pose operator*(const Pose& rhs) const {
        Pose out;
        out.q = (q * rhs.q).normalized();
        out.t = q * rhs.t + t;
        return out;
    }
};

// Twist layout: [rotation (rad), translation (m)].
Pose se3_exp(const Vec6& xi);
Vec6 se3_log(const Pose& pose);

// Angle of the relative rotation between two poses, radians.
double rotation_angle(const Pose& a, const Pose& b);

Vec3 backproject(const Pixel& p, double depth, const Intrinsics& K);  // throws on depth <= 0
Pixel project(const Vec3& point, const Intrinsics& K);                // requires point.z > 0

inline constexpr double kMinWarpDepth = 1e-4;  // meters

struct WarpResult {
    Pixel pixel;
    double z = 0.0;   // depth in the target frame
    bool behind = false;
    bool inside = false;
    bool ok() const { return !behind && inside; }
};

// Maps a host pixel at the given depth through the target-from-host pose.
WarpResult warp(const Pixel& p, double depth, const Pose& rel, const Intrinsics& K);

// Directions of the two light paths to the same surface point, host frame,
// unnormalized: beta from the host camera, beta_prime from the target camera.
struct ViewDirections {
    Vec3 beta;
    Vec3 beta_prime;
};
ViewDirections view_directions(const Pixel& p, double depth, const Pose& rel,
                               const Intrinsics& K);

struct BilinearSample {
    double value = 0.0;
    double du = 0.0;  // analytic derivative of the interpolant
    double dv = 0.0;
};

// Channel-0 bilinear interpolation; p must lie in [0,w-1]x[0,h-1], else throws.
BilinearSample bilinear(const ImageF& img, const Pixel& p);

}  // namespace pba
