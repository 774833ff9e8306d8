#include "pba/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pba/kernels.hpp"
#include "pba/pfm.hpp"

namespace pba {

namespace {

using Vec6d = Eigen::Matrix<double, 6, 1>;
using Mat86 = Eigen::Matrix<double, kPatternSize, 6>;

double huber_rho(double r, double delta) {
    if (delta <= 0.0) return r * r;
    const double a = std::abs(r);
    return a <= delta ? r * r : delta * (2.0 * a - delta);
}

double huber_weight(double r, double delta) {
    if (delta <= 0.0) return 1.0;
    const double a = std::abs(r);
    return a <= delta ? 1.0 : delta / a;
}

struct PatchEval {
    PatchVec r;
    std::array<double, kPatternSize> gu, gv;  // target image gradient at warp
    std::array<Vec3, kPatternSize> p_host, p_target;
    bool valid = false;
};

bool eval_patch(const ScenePoint& point, const FrameState& target, const Pose& rel,
                const Intrinsics& K, bool need_grad, PatchEval& out) {
    const double depth = 1.0 / point.inv_depth;
    const Mat3 R = rel.rotation();
    for (int k = 0; k < kPatternSize; ++k) {
        const Pixel po{point.pixel.u + kPattern[k][0], point.pixel.v + kPattern[k][1]};
        const Vec3 ph = backproject(po, depth, K);
        const Vec3 pt = R * ph + rel.t;
        if (pt.z() <= kMinWarpDepth) return false;
        const Pixel pp = project(pt, K);
        if (!(pp.u >= 0.0 && pp.u <= K.width - 1 && pp.v >= 0.0 && pp.v <= K.height - 1)) {
            return false;
        }
        const BilinearSample s = bilinear(target.image, pp);
        out.r(k) = point.host_vals[k] - s.value;
        if (need_grad) {
            out.gu[k] = s.du;
            out.gv[k] = s.dv;
            out.p_host[k] = ph;
            out.p_target[k] = pt;
        }
    }
    out.valid = true;
    return true;
}

struct EnergyEval {
    double total = 0.0;
    std::vector<double> contrib;  // per observation
    std::vector<uint8_t> valid;
    std::vector<double> norms;  // patch L2 norms where valid
    int dropped = 0;
};

EnergyEval evaluate_energy(const Problem& pb, const std::vector<double>& weights,
                           double huber_delta) {
    EnergyEval ev;
    const size_t nobs = pb.num_observations();
    ev.contrib.assign(nobs, 0.0);
    ev.valid.assign(nobs, 0);
    ev.norms.assign(nobs, 0.0);

    size_t o = 0;
    PatchEval patch;
    for (const auto& point : pb.points) {
        const FrameState& host = pb.frames[point.host];
        for (int tid : point.obs) {
            const Pose rel = pb.frames[tid].pose.inverse() * host.pose;
            if (eval_patch(point, pb.frames[tid], rel, pb.K, false, patch)) {
                double e = 0.0;
                for (int k = 0; k < kPatternSize; ++k) e += huber_rho(patch.r(k), huber_delta);
                ev.contrib[o] = weights[o] * e;
                ev.valid[o] = 1;
                ev.norms[o] = patch.r.norm();
                ev.total += ev.contrib[o];
            } else {
                ++ev.dropped;
            }
            ++o;
        }
    }
    return ev;
}

struct NormalEqs {
    int nv = 0;  // pose variables (6 per non-gauge frame)
    Eigen::MatrixXd Hpp;
    Eigen::VectorXd bp;
    std::vector<double> Hll, bl;
    std::vector<std::vector<std::pair<int, Vec6d>>> coupling;  // per point
};

NormalEqs linearize(const Problem& pb, const std::vector<double>& weights,
                    const std::vector<uint8_t>& active, double huber_delta,
                    const std::vector<int>& var_of_frame, int nv) {
    NormalEqs eq;
    eq.nv = nv;
    eq.Hpp = Eigen::MatrixXd::Zero(6 * nv, 6 * nv);
    eq.bp = Eigen::VectorXd::Zero(6 * nv);
    eq.Hll.assign(pb.points.size(), 0.0);
    eq.bl.assign(pb.points.size(), 0.0);
    eq.coupling.assign(pb.points.size(), {});

    size_t o = 0;
    PatchEval patch;
    Mat86 Jh, Jt;
    PatchVec Jr, wvec;
    for (size_t i = 0; i < pb.points.size(); ++i) {
        const ScenePoint& point = pb.points[i];
        const FrameState& host = pb.frames[point.host];
        auto& cpl = eq.coupling[i];
        for (int tid : point.obs) {
            const size_t obs_idx = o++;
            if (!active[obs_idx]) continue;
            const Pose rel = pb.frames[tid].pose.inverse() * host.pose;
            if (!eval_patch(point, pb.frames[tid], rel, pb.K, true, patch)) continue;

            const Mat3 R = rel.rotation();
            const int vh = var_of_frame[point.host];
            const int vt = var_of_frame[tid];
            for (int k = 0; k < kPatternSize; ++k) {
                const Vec3& ph = patch.p_host[k];
                const Vec3& pt = patch.p_target[k];
                const double iz = 1.0 / pt.z();
                // d(residual)/dP_target = -grad * dproject/dP
                Eigen::RowVector3d A;
                A(0) = -(patch.gu[k] * pb.K.fx * iz);
                A(1) = -(patch.gv[k] * pb.K.fy * iz);
                A(2) = (patch.gu[k] * pb.K.fx * pt.x() + patch.gv[k] * pb.K.fy * pt.y()) *
                       iz * iz;

                // Host update T_h <- T_h exp(xi): dP_t = R(omega x P_h + nu).
                const Eigen::RowVector3d AR = A * R;
                Jh.block<1, 3>(k, 0) = -AR.cross(ph.transpose());
                Jh.block<1, 3>(k, 3) = AR;
                // Target update T_t <- T_t exp(xi): dP_t = -(omega x P_t + nu).
                Jt.block<1, 3>(k, 0) = A.cross(pt.transpose());
                Jt.block<1, 3>(k, 3) = -A;
                // Inverse depth: dP_t/drho = -(P_t - t_rel)/rho.
                Jr(k) = A.dot(-(pt - rel.t) / point.inv_depth);

                wvec(k) = weights[obs_idx] * huber_weight(patch.r(k), huber_delta);
            }

            const Mat86 Jh_w = wvec.asDiagonal() * Jh;
            const Mat86 Jt_w = wvec.asDiagonal() * Jt;
            const PatchVec Jr_w = wvec.asDiagonal() * Jr;

            if (vh >= 0) {
                eq.Hpp.block<6, 6>(6 * vh, 6 * vh) += Jh.transpose() * Jh_w;
                eq.bp.segment<6>(6 * vh) -= Jh_w.transpose() * patch.r;
            }
            if (vt >= 0) {
                eq.Hpp.block<6, 6>(6 * vt, 6 * vt) += Jt.transpose() * Jt_w;
                eq.bp.segment<6>(6 * vt) -= Jt_w.transpose() * patch.r;
            }
            if (vh >= 0 && vt >= 0) {
                const Eigen::Matrix<double, 6, 6> Hht = Jh.transpose() * Jt_w;
                eq.Hpp.block<6, 6>(6 * vh, 6 * vt) += Hht;
                eq.Hpp.block<6, 6>(6 * vt, 6 * vh) += Hht.transpose();
            }

            eq.Hll[i] += Jr.dot(Jr_w);
            eq.bl[i] -= Jr_w.dot(patch.r);
            auto add_coupling = [&](int var, const Vec6d& w6) {
                for (auto& [v, acc] : cpl) {
                    if (v == var) {
                        acc += w6;
                        return;
                    }
                }
                cpl.emplace_back(var, w6);
            };
            if (vh >= 0) add_coupling(vh, Jh_w.transpose() * Jr);
            if (vt >= 0) add_coupling(vt, Jt_w.transpose() * Jr);
        }
    }
    return eq;
}

struct Step {
    Eigen::VectorXd dx;
    std::vector<double> drho;
};

// Damped Schur-complement solve; throws on a singular reduced system.
Step solve_normal_eqs(const NormalEqs& eq, double lambda) {
    Eigen::MatrixXd H = eq.Hpp;
    for (int k = 0; k < H.rows(); ++k) {
        if (eq.Hpp(k, k) == 0.0) {
            throw std::runtime_error(
                "optimize: singular normal equations (unconstrained pose variable " +
                std::to_string(k) + ")");
        }
        H(k, k) += lambda * eq.Hpp(k, k);
    }
    Eigen::VectorXd b = eq.bp;

    const size_t np = eq.Hll.size();
    std::vector<double> hd(np);
    for (size_t i = 0; i < np; ++i) {
        hd[i] = eq.Hll[i] * (1.0 + lambda);
        if (hd[i] <= 1e-14) continue;  // point unconstrained this iteration
        const double inv = 1.0 / hd[i];
        for (const auto& [va, wa] : eq.coupling[i]) {
            b.segment<6>(6 * va) -= wa * (eq.bl[i] * inv);
            for (const auto& [vb, wb] : eq.coupling[i]) {
                H.block<6, 6>(6 * va, 6 * vb) -= wa * (inv * wb.transpose());
            }
        }
    }

    Step step;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    step.dx = ldlt.solve(b);
    if (ldlt.info() != Eigen::Success || !step.dx.allFinite()) {
        throw std::runtime_error("optimize: singular normal equations (reduced pose system)");
    }

    step.drho.assign(np, 0.0);
    for (size_t i = 0; i < np; ++i) {
        if (hd[i] <= 1e-14) continue;
        double acc = eq.bl[i];
        for (const auto& [va, wa] : eq.coupling[i]) {
            acc -= wa.dot(step.dx.segment<6>(6 * va));
        }
        step.drho[i] = acc / hd[i];
    }
    return step;
}

struct State {
    std::vector<Pose> poses;
    std::vector<double> inv_depths;
};

State snapshot(const Problem& pb) {
    State s;
    s.poses.reserve(pb.frames.size());
    for (const auto& f : pb.frames) s.poses.push_back(f.pose);
    s.inv_depths.reserve(pb.points.size());
    for (const auto& p : pb.points) s.inv_depths.push_back(p.inv_depth);
    return s;
}

void restore(Problem& pb, const State& s) {
    for (size_t i = 0; i < pb.frames.size(); ++i) pb.frames[i].pose = s.poses[i];
    for (size_t i = 0; i < pb.points.size(); ++i) pb.points[i].inv_depth = s.inv_depths[i];
}

void apply_step(Problem& pb, const Step& step, const std::vector<int>& var_of_frame) {
    for (size_t f = 0; f < pb.frames.size(); ++f) {
        const int v = var_of_frame[f];
        if (v < 0) continue;
        pb.frames[f].pose = pb.frames[f].pose * se3_exp(step.dx.segment<6>(6 * v));
    }
    for (size_t i = 0; i < pb.points.size(); ++i) {
        pb.points[i].inv_depth = std::max(pb.points[i].inv_depth + step.drho[i], 1e-6);
    }
}

std::vector<double> compute_weights(const Problem& pb, const SolverConfig& cfg) {
    const size_t nobs = pb.num_observations();
    std::vector<double> weights(nobs, 1.0);
    if (cfg.mode == WeightMode::Uniform) return weights;

    if (cfg.mode == WeightMode::PhysicallyBased) {
        size_t o = 0;
        for (const auto& point : pb.points) {
            for (int tid : point.obs) {
                weights[o++] = compute_point_weight(point, tid, pb, cfg.theta);
            }
        }
        return weights;
    }

    // TDist: scale from the median absolute patch residual at the current state.
    const std::vector<double> unit(nobs, 1.0);
    const EnergyEval ev = evaluate_energy(pb, unit, cfg.huber_delta);
    std::vector<double> norms;
    norms.reserve(nobs);
    for (size_t o = 0; o < nobs; ++o) {
        if (ev.valid[o]) norms.push_back(ev.norms[o]);
    }
    if (norms.empty()) return weights;
    std::nth_element(norms.begin(), norms.begin() + norms.size() / 2, norms.end());
    const double sigma = std::max(1.4826 * norms[norms.size() / 2], 1e-6);
    for (size_t o = 0; o < nobs; ++o) {
        weights[o] = ev.valid[o] ? tdist_weight(ev.norms[o], cfg.tdist_nu, sigma) : 1.0;
    }
    return weights;
}

double masked_sum(const std::vector<double>& contrib, const std::vector<uint8_t>& a,
                  const std::vector<uint8_t>& b) {
    double s = 0.0;
    for (size_t i = 0; i < contrib.size(); ++i) {
        if (a[i] && b[i]) s += contrib[i];
    }
    return s;
}

}  // namespace

const char* weight_mode_name(WeightMode mode) {
    switch (mode) {
        case WeightMode::PhysicallyBased: return "pb";
        case WeightMode::TDist: return "tdist";
        case WeightMode::Uniform: return "uniform";
    }
    return "?";
}

WeightMode parse_weight_mode(const std::string& name) {
    if (name == "pb") return WeightMode::PhysicallyBased;
    if (name == "tdist") return WeightMode::TDist;
    if (name == "uniform") return WeightMode::Uniform;
    throw std::runtime_error("unknown weight mode '" + name + "' (want pb|tdist|uniform)");
}

double pb_weight(double r, double r_prime, double theta) {
    return std::exp(-theta * std::abs(r - r_prime));
}

double tdist_weight(double residual_norm, double nu, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("tdist_weight: sigma must be positive");
    const double x = residual_norm / sigma;
    return (nu + 1.0) / (nu + x * x);
}

std::optional<PatchVec> residual(const ScenePoint& point, int target_id,
                                 const Problem& problem) {
    const Pose rel =
        problem.frames[target_id].pose.inverse() * problem.frames[point.host].pose;
    PatchEval patch;
    if (!eval_patch(point, problem.frames[target_id], rel, problem.K, false, patch)) {
        return std::nullopt;
    }
    return patch.r;
}

double compute_point_weight(const ScenePoint& point, int target_id, const Problem& problem,
                            double theta) {
    const FrameState& host = problem.frames[point.host];
    const Pose rel = problem.frames[target_id].pose.inverse() * host.pose;
    const ViewDirections dirs =
        view_directions(point.pixel, 1.0 / point.inv_depth, rel, problem.K);

    // The environment maps live in the world frame; rotate the light paths out
    // of the host camera frame.
    const Vec3 n_w = host.pose.rotate(point.normal);
    const auto r = eval_radiance(problem.radiance, point.control, n_w,
                                 host.pose.rotate(dirs.beta), point.roughness);
    if (!r) return 1.0;
    const auto r_prime = eval_radiance(problem.radiance, point.control, n_w,
                                       host.pose.rotate(dirs.beta_prime), point.roughness);
    if (!r_prime) return 1.0;
    return pb_weight(*r, *r_prime, theta);
}

SolveReport optimize(Problem& problem, const SolverConfig& config) {
    if (problem.frames.size() < 2) {
        throw std::invalid_argument("optimize: need at least 2 frames");
    }
    if (problem.points.size() < 6) {
        throw std::invalid_argument("optimize: need at least 6 points");
    }
    if (config.deterministic) kernels::select(kernels::scalar());

    std::vector<int> var_of_frame(problem.frames.size(), -1);
    int nv = 0;
    for (size_t f = 0; f < problem.frames.size(); ++f) {
        if (static_cast<int>(f) != problem.gauge) var_of_frame[f] = nv++;
    }

    SolveReport report;
    report.num_frames = static_cast<int>(problem.frames.size());
    report.num_points = static_cast<int>(problem.points.size());
    report.num_obs = static_cast<int>(problem.num_observations());
    report.mode = config.mode;
    report.theta = config.theta;

    const Pose gauge_before = problem.frames[problem.gauge].pose;

    for (int outer = 0; outer < config.lm.max_outer; ++outer) {
        const std::vector<double> weights = compute_weights(problem, config);
        EnergyEval cur = evaluate_energy(problem, weights, config.huber_delta);

        OuterRecord rec;
        rec.loss_begin = cur.total;

        double lambda = config.lm.lambda_init;
        bool stalled = false;
        for (int inner = 0; inner < config.lm.max_inner; ++inner) {
            const NormalEqs eq = linearize(problem, weights, cur.valid, config.huber_delta,
                                           var_of_frame, nv);
            const State saved = snapshot(problem);
            const double e_before = cur.total;

            bool accepted = false;
            while (!accepted) {
                const Step step = solve_normal_eqs(eq, lambda);
                apply_step(problem, step, var_of_frame);
                EnergyEval trial = evaluate_energy(problem, weights, config.huber_delta);

                // Compare over observations valid in both states so drops
                // cannot fake an improvement.
                const double e_trial = masked_sum(trial.contrib, trial.valid, cur.valid);
                const double e_cur = masked_sum(cur.contrib, cur.valid, trial.valid);
                if (e_trial < e_cur) {
                    accepted = true;
                    cur = std::move(trial);
                    lambda = std::max(lambda * config.lm.lambda_down, 1e-12);
                    ++rec.inner_accepted;
                } else {
                    restore(problem, saved);
                    lambda *= config.lm.lambda_up;
                    ++rec.inner_rejected;
                    if (lambda > 1e10) break;
                }
            }
            if (!accepted) {
                stalled = true;
                break;
            }
            const double rel = std::abs(e_before - cur.total) /
                               std::max(e_before, std::numeric_limits<double>::min());
            if (rel < config.lm.stop_rel) break;
        }

        rec.loss_end = cur.total;
        rec.dropped_obs = cur.dropped;
        report.outers.push_back(rec);
        report.final_loss = cur.total;

        const double outer_rel = std::abs(rec.loss_begin - rec.loss_end) /
                                 std::max(rec.loss_begin, std::numeric_limits<double>::min());
        if (outer_rel < config.lm.stop_rel) {
            report.status = "converged";
            break;
        }
        if (stalled && rec.inner_accepted == 0) {
            report.status = "diverged";
            break;
        }
        if (outer == config.lm.max_outer - 1) report.status = "max_outer";
    }

    problem.frames[problem.gauge].pose = gauge_before;  // gauge stays bit-identical
    return report;
}

std::string SolveReport::to_text() const {
    std::ostringstream ss;
    char buf[128];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    ss << "status = " << status << "\n";
    ss << "weight_mode = " << weight_mode_name(mode) << "\n";
    ss << "theta = " << num(theta) << "\n";
    ss << "num_frames = " << num_frames << "\n";
    ss << "num_points = " << num_points << "\n";
    ss << "num_obs = " << num_obs << "\n";
    ss << "outer_iterations = " << outers.size() << "\n";
    for (size_t i = 0; i < outers.size(); ++i) {
        const auto& o = outers[i];
        const std::string p = "outer." + std::to_string(i) + ".";
        ss << p << "loss_begin = " << num(o.loss_begin) << "\n";
        ss << p << "loss_end = " << num(o.loss_end) << "\n";
        ss << p << "inner_accepted = " << o.inner_accepted << "\n";
        ss << p << "inner_rejected = " << o.inner_rejected << "\n";
        ss << p << "dropped_obs = " << o.dropped_obs << "\n";
    }
    ss << "final_loss = " << num(final_loss) << "\n";
    return ss.str();
}

Problem build_problem(const Dataset& ds, const Trajectory& init, RadianceContext ctx,
                      const BuildOptions& opts) {
    if (init.size() != ds.frames.size()) {
        throw std::runtime_error("build_problem: initial trajectory frame count mismatch");
    }
    if (!ctx.consistent() || ctx.envs.empty()) {
        throw std::runtime_error("build_problem: radiance context is empty or inconsistent");
    }

    Problem pb;
    pb.K = ds.K;
    pb.radiance = std::move(ctx);
    pb.gauge = 0;

    for (size_t i = 0; i < ds.frames.size(); ++i) {
        FrameState f;
        f.id = static_cast<int>(i);
        f.timestamp = ds.frames[i].timestamp;
        f.image = ds.frames[i].image;
        f.pose = init.entries[i].pose;
        pb.frames.push_back(std::move(f));
    }

    const NearestControlIndex control_index(
        std::vector<Vec3>(pb.radiance.control_positions));

    const int nframes = static_cast<int>(ds.frames.size());
    for (int h = 0; h < nframes; ++h) {
        const auto& frame = ds.frames[h];
        const NormalMap* normals = nullptr;
        NormalMap estimated;
        if (frame.normals) {
            normals = &*frame.normals;
        } else {
            estimated = estimate_normal_map(frame.depth, ds.K, opts.normal_opts);
            normals = &estimated;
        }

        for (const Pixel& px : select_pixels(frame.image, opts.points_per_frame, opts.select)) {
            const int xi = static_cast<int>(std::lround(px.u));
            const int yi = static_cast<int>(std::lround(px.v));
            const float d = frame.depth.at(xi, yi);
            if (!depth_valid(d) || d < opts.min_depth) continue;
            if (!normals->is_valid(xi, yi)) continue;

            ScenePoint pt;
            pt.host = h;
            pt.pixel = px;
            pt.inv_depth = 1.0 / d;
            pt.normal = normals->normal(xi, yi).normalized();
            pt.roughness = std::clamp<double>(frame.rough.at(xi, yi), 0.0, 1.0);

            const Vec3 world = pb.frames[h].pose.apply(backproject(px, d, ds.K));
            pt.control = control_index.nearest(world);

            for (int k = 0; k < kPatternSize; ++k) {
                const Pixel po{px.u + kPattern[k][0], px.v + kPattern[k][1]};
                pt.host_vals[k] = bilinear(frame.image, po).value;
            }

            for (int j = std::max(0, h - opts.obs_radius);
                 j <= std::min(nframes - 1, h + opts.obs_radius); ++j) {
                if (j == h) continue;
                const Pose rel = pb.frames[j].pose.inverse() * pb.frames[h].pose;
                const WarpResult wr = warp(px, d, rel, ds.K);
                if (!wr.ok()) continue;
                const double margin = 3.0;
                if (wr.pixel.u < margin || wr.pixel.u > ds.K.width - 1 - margin ||
                    wr.pixel.v < margin || wr.pixel.v > ds.K.height - 1 - margin) {
                    continue;
                }
                pt.obs.push_back(j);
            }
            if (!pt.obs.empty()) pb.points.push_back(std::move(pt));
        }
    }
    return pb;
}

ImageF render_weight_map(const Problem& problem, const SolverConfig& config, int frame_id) {
    ImageF grid(problem.K.width, problem.K.height, 1, 0.0f);
    std::vector<double> weights = compute_weights(problem, config);
    size_t o = 0;
    for (const auto& point : problem.points) {
        double sum = 0.0;
        for (size_t j = 0; j < point.obs.size(); ++j) sum += weights[o + j];
        if (point.host == frame_id && !point.obs.empty()) {
            const int x = static_cast<int>(std::lround(point.pixel.u));
            const int y = static_cast<int>(std::lround(point.pixel.v));
            if (grid.contains(x, y)) {
                grid.at(x, y) = static_cast<float>(sum / point.obs.size());
            }
        }
        o += point.obs.size();
    }
    return grid;
}

SolveOutputs solve_dataset(const std::string& dataset_dir, const Config& cfg,
                           const std::string& out_dir) {
    SolverConfig sc;
    sc.mode = parse_weight_mode(cfg.get_str("weight_mode", "pb"));
    sc.theta = cfg.get_double("theta", 14.6);
    sc.huber_delta = cfg.get_double("huber_delta", 0.1);
    sc.tdist_nu = cfg.get_double("tdist_nu", 5.0);
    sc.lm.max_outer = cfg.get_int("lm.max_outer", 8);
    sc.lm.max_inner = cfg.get_int("lm.max_inner", 20);
    sc.lm.lambda_init = cfg.get_double("lm.lambda_init", 1e-3);
    sc.lm.lambda_up = cfg.get_double("lm.lambda_up", 10.0);
    sc.lm.lambda_down = cfg.get_double("lm.lambda_down", 0.5);
    sc.lm.stop_rel = cfg.get_double("lm.stop_rel", 1e-6);
    sc.deterministic = cfg.get_bool("deterministic", false);

    BuildOptions bo;
    bo.points_per_frame = cfg.get_int("points_per_frame", 150);
    bo.obs_radius = cfg.get_int("obs_radius", 4);
    bo.min_depth = cfg.get_double("min_depth", 0.05);
    bo.select.block = cfg.get_int("select.block", 32);
    bo.select.grad_threshold = cfg.get_double("select.grad_threshold", 7.0 / 255.0);
    bo.normal_opts.vicinity = cfg.get_double("normal.vicinity", 0.02);
    bo.normal_opts.mls_bandwidth = cfg.get_double("normal.bandwidth", 0.01);

    RadianceContextOptions ro;
    ro.use_cache = cfg.get_bool("radiance.cache", true);
    ro.levels = cfg.get_int("radiance.levels", 9);
    ro.samples_per_texel = cfg.get_int("radiance.samples", 1024);
    ro.brdf_resolution = cfg.get_int("radiance.brdf_resolution", 64);
    ro.brdf_samples = cfg.get_int("radiance.brdf_samples", 4096);

    if (sc.deterministic) kernels::select(kernels::scalar());

    const Dataset ds = load_dataset(dataset_dir);
    RadianceContext ctx = build_radiance_context(ds, ro);

    const std::string init_key = cfg.get_str("init_trajectory", "initial");
    Trajectory init;
    if (init_key == "initial") {
        init = ds.initial;
    } else if (init_key == "groundtruth") {
        init = ds.groundtruth;
    } else {
        init = load_trajectory(init_key);
    }

    Problem problem = build_problem(ds, init, std::move(ctx), bo);
    SolveOutputs out;
    out.report = optimize(problem, sc);

    for (const auto& f : problem.frames) {
        out.refined.entries.push_back({f.timestamp, f.pose});
    }

    std::filesystem::create_directories(out_dir);
    save_trajectory(out_dir + "/refined.txt", out.refined);
    std::ofstream rep(out_dir + "/report.txt");
    if (!rep) throw std::runtime_error("solve: cannot write " + out_dir + "/report.txt");
    rep << out.report.to_text();

    if (cfg.get_bool("dump_weights", false)) {
        for (const auto& f : problem.frames) {
            write_pfm(out_dir + "/weights_" + frame_stem(f.id) + ".pfm",
                      render_weight_map(problem, sc, f.id));
        }
    }
    return out;
}

}  // namespace pba
