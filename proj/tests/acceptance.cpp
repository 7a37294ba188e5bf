// Acceptance suite: ten numbered end-to-end checks over the library and the
// command pipeline, each reported as exactly one PASS/FAIL line on stdout.
// The heavy checks drive the real subcommands and read back the published
// reports. Exit code is 0 only when every criterion passes.
//
// With no arguments all criteria run in order (criterion 9 reads the
// reports written by 6-8). Pass criterion numbers to run a subset while
// debugging, e.g. "acceptance_checks 3 4".

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dynfield/analysis.hpp"
#include "dynfield/classical.hpp"
#include "dynfield/commands.hpp"
#include "dynfield/config.hpp"
#include "dynfield/crt.hpp"
#include "dynfield/field.hpp"
#include "dynfield/geometry.hpp"
#include "dynfield/grid_image.hpp"
#include "dynfield/phantom.hpp"
#include "dynfield/pounet.hpp"
#include "dynfield/rng.hpp"
#include "dynfield/sinogram.hpp"
#include "dynfield/sparse_crt.hpp"
#include "dynfield/training.hpp"
#include "test_support.hpp"

namespace {

using namespace dynfield;
namespace fs = std::filesystem;
using testsupport::CsvTable;
using testsupport::read_csv;
using testsupport::slurp;

// ---- pinned tolerances and budgets --------------------------------------

constexpr double kGradFdStep = 1e-5;
constexpr double kGradRelTol = 1e-4;     // parameter gradients vs central differences
constexpr double kFieldGradFdStep = 1e-6;
constexpr double kFieldGradRelTol = 1e-5;  // spatial/temporal field gradient
constexpr double kC1BudgetSec = 30.0;

constexpr int kPouPairs = 1000;
constexpr double kPouSumTol = 1e-12;

constexpr double kAdjointRelTol = 1e-12;
constexpr double kOracleRelTol = 1e-3;   // closed-form arc length at 512 samples
constexpr double kOracleRatioMin = 1.9;  // error contraction per sample doubling
constexpr int kC2dQuadrature = 1024;
constexpr int kD2dSubdivision = 8;
constexpr double kC2dVsD2dRelTol = 0.005;
constexpr double kC3BudgetSec = 120.0;

constexpr double kProxNuclearTol = 1e-10;
constexpr int kProxTvTrials = 50;
constexpr double kFistaVsDenseRelTol = 1e-4;

constexpr double kPlantedDropFactor = 1e4;
constexpr double kC5BudgetSec = 300.0;

constexpr double kSsTailRelTol = 1e-6;  // semiseparable error vs spectral tail
constexpr double kC6BudgetSec = 600.0;

constexpr double kC7BudgetSec = 2700.0;
constexpr double kC8BudgetSec = 2700.0;

constexpr double kNfBudgetShare = 0.1;  // field parameters vs dense pixel count

// ---- shared plumbing ------------------------------------------------------

fs::path work_root() {
    static const fs::path p = [] {
        fs::path root = fs::current_path() / "acceptance_out";
        fs::create_directories(root);
        return root;
    }();
    return p;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

ExperimentConfig config_from_json(const std::string& json_text) {
    ExperimentConfig cfg = parse_config(json_text);
    return cfg;
}

// Random evaluation points inside a space-time box, margins avoided so
// finite-difference probes stay inside.
Eigen::Matrix3Xd box_points(const DomainBox& box, int n, std::uint64_t seed) {
    Rng rng(seed);
    const double hx = 0.9 * box.half_extent;
    Eigen::Matrix3Xd pts(3, n);
    for (int i = 0; i < n; ++i) {
        pts(0, i) = rng.uniform(-hx, hx);
        pts(1, i) = rng.uniform(-hx, hx);
        pts(2, i) = rng.uniform(0.02 * box.total_time, 0.98 * box.total_time);
    }
    return pts;
}

PouNet random_field(std::uint64_t seed, int partitions, int width, int depth,
                    const DomainBox& box) {
    SirenSpec spec;
    spec.width = width;
    spec.depth = depth;
    spec.partitions = partitions;
    PouNet f = init_siren(spec, PolyBasis::tensor_product(), box, seed);
    Rng rng(seed + 1000);
    f.C = Eigen::MatrixXd::NullaryExpr(f.C.rows(), f.C.cols(), [&] { return rng.normal(); });
    return f;
}

Eigen::VectorXd pack_params(const PouNet& f) {
    const Eigen::VectorXd eta = eta_to_vector(f.net);
    Eigen::VectorXd v(eta.size() + f.C.size());
    v.head(eta.size()) = eta;
    v.tail(f.C.size()) = Eigen::Map<const Eigen::VectorXd>(f.C.data(), f.C.size());
    return v;
}

void unpack_params(const Eigen::VectorXd& v, PouNet& f) {
    const long etan = eta_to_vector(f.net).size();
    eta_from_vector(v.head(etan), f.net);
    Eigen::Map<Eigen::VectorXd>(f.C.data(), f.C.size()) = v.tail(f.C.size());
}

// ---- criterion 1: exact gradients ----------------------------------------

bool criterion_gradients(std::string& detail) {
    const DomainBox box{1.45, 5.0};
    PouNet f = random_field(101, 5, 10, 2, box);

    LossSpec spec;
    {
        Rng rng(202);
        GroupedResidualTerm res;
        const int groups = 6, per_group = 7, n = groups * per_group;
        res.pts = box_points(box, n, 203);
        res.h = Eigen::VectorXd::NullaryExpr(n, [&] { return rng.uniform(0.1, 1.0); });
        res.group.resize(n);
        for (int i = 0; i < n; ++i) res.group[static_cast<std::size_t>(i)] = i / per_group;
        res.d = Eigen::VectorXd::NullaryExpr(groups, [&] { return rng.normal(); });
        res.weight = 0.7;
        spec.residual_terms.push_back(std::move(res));

        TvSampleTerm tv;
        tv.pts = box_points(box, 25, 204);
        tv.gamma = 0.3;
        tv.delta = 1e-3;
        tv.include_time = true;
        spec.tv_terms.push_back(std::move(tv));

        QnormTerm qn;
        qn.pts = box_points(box, 20, 205);
        qn.tau = 0.2;
        qn.q = 0.5;
        qn.eps = 1e-2;
        qn.volume = 3.1;
        spec.qnorm_terms.push_back(std::move(qn));
    }

    ParamGrads grads = ParamGrads::zeros_like(f);
    const double loss0 = loss_and_grads(f, spec, true, grads);
    if (!std::isfinite(loss0)) {
        detail = "loss not finite";
        return false;
    }
    const Eigen::VectorXd eta_g = eta_grads_to_vector(f, grads);
    Eigen::VectorXd analytic(eta_g.size() + grads.dC.size());
    analytic.head(eta_g.size()) = eta_g;
    analytic.tail(grads.dC.size()) =
        Eigen::Map<const Eigen::VectorXd>(grads.dC.data(), grads.dC.size());

    const Eigen::VectorXd base = pack_params(f);
    Rng pick(303);
    double worst_param = 0.0;
    for (int probe = 0; probe < 50; ++probe) {
        const long k = static_cast<long>(pick.below(static_cast<std::uint64_t>(base.size())));
        Eigen::VectorXd vp = base;
        vp[k] = base[k] + kGradFdStep;
        unpack_params(vp, f);
        const double lp = loss_value(f, spec);
        vp[k] = base[k] - kGradFdStep;
        unpack_params(vp, f);
        const double lm = loss_value(f, spec);
        const double fd = (lp - lm) / (2 * kGradFdStep);
        const double denom = std::max({std::abs(fd), std::abs(analytic[k]), 1e-8});
        worst_param = std::max(worst_param, std::abs(fd - analytic[k]) / denom);
    }
    unpack_params(base, f);

    double worst_field = 0.0;
    const auto pts = box_points(box, 20, 404);
    for (int i = 0; i < pts.cols(); ++i) {
        const double x = pts(0, i), y = pts(1, i), t = pts(2, i);
        const auto g = f.eval_grad(x, y, t);
        const double h = kFieldGradFdStep;
        const double fdv[3] = {(f.eval(x + h, y, t) - f.eval(x - h, y, t)) / (2 * h),
                               (f.eval(x, y + h, t) - f.eval(x, y - h, t)) / (2 * h),
                               (f.eval(x, y, t + h) - f.eval(x, y, t - h)) / (2 * h)};
        const double scale =
            std::max({std::abs(fdv[0]), std::abs(fdv[1]), std::abs(fdv[2]), 1e-6});
        for (int a = 0; a < 3; ++a)
            worst_field = std::max(worst_field, std::abs(g[a] - fdv[a]) / scale);
    }

    detail = "param-gradient rel err " + fmt(worst_param) + " (tol " + fmt(kGradRelTol) +
             "), field-gradient rel err " + fmt(worst_field) + " (tol " + fmt(kFieldGradRelTol) +
             ")";
    return worst_param <= kGradRelTol && worst_field <= kFieldGradRelTol;
}

// ---- criterion 2: partition-of-unity invariants ---------------------------

bool criterion_partition(std::string& detail) {
    const DomainBox box{1.45, 5.0};
    const int nets = 50, pts_per_net = kPouPairs / 50;
    double min_psi = std::numeric_limits<double>::infinity();
    double worst_sum = 0.0;
    for (int n = 0; n < nets; ++n) {
        PouNet f = random_field(9000 + static_cast<std::uint64_t>(n), 8, 12, 3, box);
        // push the logits away from the init distribution as well
        Eigen::VectorXd eta = eta_to_vector(f.net);
        Rng rng(9500 + static_cast<std::uint64_t>(n));
        for (long i = 0; i < eta.size(); ++i) eta[i] += 0.5 * rng.normal();
        eta_from_vector(eta, f.net);

        const auto pts = box_points(box, pts_per_net, 9900 + static_cast<std::uint64_t>(n));
        for (int i = 0; i < pts_per_net; ++i) {
            const Eigen::VectorXd psi = f.eval_pou(pts(0, i), pts(1, i), pts(2, i));
            min_psi = std::min(min_psi, psi.minCoeff());
            worst_sum = std::max(worst_sum, std::abs(psi.sum() - 1.0));
        }
    }
    detail = "over " + std::to_string(nets * pts_per_net) + " pairs: min weight " + fmt(min_psi) +
             ", worst |sum-1| " + fmt(worst_sum) + " (tol " + fmt(kPouSumTol) + ")";
    return min_psi >= 0.0 && worst_sum <= kPouSumTol;
}

// ---- criterion 3: integral operators --------------------------------------

bool criterion_operators(std::string& detail) {
    // closed form: disk of radius a at the origin, sensor at distance d;
    // the crossing angle is placed off every tested sample grid
    const double a = 1.5, d = 0.5;
    const double theta_star = (62.0 + 1.0 / 3.0) * (2.0 * std::numbers::pi / 512.0);
    const double l = -d * std::cos(theta_star) +
                     std::sqrt(d * d * std::cos(theta_star) * std::cos(theta_star) - d * d + a * a);
    const double cstar = (a * a - d * d - l * l) / (2.0 * d * l);
    const double exact = 2.0 * l * (std::numbers::pi - std::acos(cstar));
    const auto indicator = [&](double x, double y) { return x * x + y * y <= a * a ? 1.0 : 0.0; };
    const DomainBox obox{2.0, 1.0};

    double err512 = 0.0, prev = 0.0, worst_ratio = std::numeric_limits<double>::infinity();
    for (int q = 512; q <= 2048; q *= 2) {
        const double got = arc_integrate(indicator, Eigen::Vector2d(d, 0.0), l, q, obox);
        const double err = std::abs(got - exact) / exact;
        if (q == 512) err512 = err;
        if (prev > 0.0) worst_ratio = std::min(worst_ratio, prev / err);
        prev = err;
    }

    ImagingSystem sys;
    sys.fov_size_L = 2.9;
    sys.pixels_per_side = 32;
    sys.aperture_R = 2.05;
    sys.num_views = 2;
    sys.num_frames = 3;
    sys.num_rings = 24;
    sys.view_offset_rad = view_offset_from_degrees(2.0);
    sys.total_time_T = 5.0;
    sys.quadrature_points_Q = 256;
    sys.validate();

    const SparseCrtOperator op = build_sparse_crt(sys, sys.pixels_per_side, kD2dSubdivision);
    GridImage img = make_grid_image(sys.pixels_per_side, sys.fov_size_L, frame_times(sys));
    {
        Rng rng(77);
        img.values = Eigen::MatrixXd::NullaryExpr(img.values.rows(), img.values.cols(),
                                                  [&] { return rng.uniform(0.0, 1.0); });
    }
    double worst_adj = 0.0;
    {
        Rng rng(78);
        for (int frame = 0; frame < sys.num_frames; ++frame) {
            const Eigen::VectorXd ax = sparse_apply(op, img, frame);
            const Eigen::VectorXd y =
                Eigen::VectorXd::NullaryExpr(op.rows(), [&] { return rng.normal(); });
            const Eigen::VectorXd aty = sparse_adjoint(op, y, frame);
            const double lhs = ax.dot(y);
            const double rhs = img.values.col(frame).dot(aty);
            worst_adj = std::max(
                worst_adj, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-30}));
        }
    }

    const DynamicPhantom ph = phantom_default(3, sys.fov_size_L, sys.total_time_T);
    const GridImage pimg = render(ph, sys.pixels_per_side, frame_times(sys), 2);
    const Sinogram d2d = sparse_apply_all(op, pimg);
    const PixelField pf(pimg);
    const Sinogram c2d = crt_apply_field_all(pf, sys, kC2dQuadrature);
    const double rel = (c2d.data - d2d.data).norm() / d2d.data.norm();

    detail = "closed-form err " + fmt(err512) + " @512 (tol " + fmt(kOracleRelTol) +
             "), contraction x" + fmt(worst_ratio) + " per doubling (min " + fmt(kOracleRatioMin) +
             "), adjoint rel " + fmt(worst_adj) + ", continuous-vs-discrete rel " + fmt(rel) +
             " (tol " + fmt(kC2dVsD2dRelTol) + ")";
    return err512 <= kOracleRelTol && worst_ratio >= kOracleRatioMin &&
           worst_adj <= kAdjointRelTol && rel <= kC2dVsD2dRelTol;
}

// ---- criterion 4: proximal operators and the baseline solver --------------

bool criterion_prox(std::string& detail) {
    double worst_nuc = 0.0;
    {
        Rng rng(501);
        for (int trial = 0; trial < 10; ++trial) {
            const int n = 60, k = 8;
            Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(n, k, [&] { return rng.normal(); });
            // plant a dominant rank-1 component so thresholds bite unevenly
            const Eigen::VectorXd u = Eigen::VectorXd::NullaryExpr(n, [&] { return rng.normal(); });
            const Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(k, [&] { return rng.normal(); });
            m += 3.0 * u * v.transpose() / std::sqrt(static_cast<double>(n));
            const double w = rng.uniform(0.1, 5.0);
            const Eigen::MatrixXd got = prox_nuclear(m, w);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const Eigen::VectorXd thr = (svd.singularValues().array() - w).max(0.0);
            const Eigen::MatrixXd want =
                svd.matrixU() * thr.asDiagonal() * svd.matrixV().transpose();
            worst_nuc = std::max(worst_nuc, (got - want).cwiseAbs().maxCoeff());
        }
    }

    int tv_violations = 0;
    double worst_tv_gap = 0.0;
    {
        Rng rng(502);
        for (int trial = 0; trial < kProxTvTrials; ++trial) {
            const int ns = 3 + static_cast<int>(rng.below(4));
            const int k = 2 + static_cast<int>(rng.below(3));
            Eigen::MatrixXd f =
                Eigen::MatrixXd::NullaryExpr(ns * ns, k, [&] { return rng.normal(); });
            const double w = std::pow(10.0, rng.uniform(-2.0, 0.5));
            const Eigen::MatrixXd g = prox_tv(f, ns, w);
            const double before = w * tv_discrete(f, ns);
            const double after = 0.5 * (g - f).squaredNorm() + w * tv_discrete(g, ns);
            const double slack = 1e-10 * std::max(1.0, std::abs(before));
            if (after > before + slack) {
                ++tv_violations;
                worst_tv_gap = std::max(worst_tv_gap, after - before);
            }
        }
    }

    ImagingSystem sys;
    sys.fov_size_L = 2.9;
    sys.pixels_per_side = 8;
    sys.aperture_R = 2.05;
    sys.num_views = 3;
    sys.num_frames = 4;
    sys.num_rings = 40;
    sys.view_offset_rad = view_offset_from_degrees(7.0);
    sys.total_time_T = 5.0;
    sys.quadrature_points_Q = 64;
    sys.validate();
    const SparseCrtOperator op = build_sparse_crt(sys, sys.pixels_per_side);
    GridImage img = make_grid_image(sys.pixels_per_side, sys.fov_size_L, frame_times(sys));
    {
        Rng rng(503);
        img.values = Eigen::MatrixXd::NullaryExpr(img.values.rows(), img.values.cols(),
                                                  [&] { return rng.uniform(0.0, 1.0); });
    }
    Sinogram data = sparse_apply_all(op, img);
    data.sigma = 1.0;

    ProxProblem prob;
    prob.op = &op;
    prob.data = &data;
    prob.gamma = 0.0;
    prob.reg = Regularizer::SpaceTimeTv;
    prob.max_iter = 3000;  // ill-conditioned least squares: momentum needs the room
    const FistaResult res = fista(prob, Eigen::MatrixXd::Zero(op.cols(), sys.num_frames));

    double worst_ls = 0.0;
    for (int frame = 0; frame < sys.num_frames; ++frame) {
        const Eigen::MatrixXd a = Eigen::MatrixXd(op.frames[static_cast<std::size_t>(frame)]);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        if (qr.rank() < a.cols()) {
            detail = "least-squares probe is rank deficient";
            return false;
        }
        const Eigen::VectorXd want = qr.solve(data.data.col(frame));
        const double rel = (res.values.col(frame) - want).norm() / want.norm();
        worst_ls = std::max(worst_ls, rel);
    }

    detail = "nuclear prox max dev " + fmt(worst_nuc) + " (tol " + fmt(kProxNuclearTol) + "), " +
             std::to_string(tv_violations) + "/" + std::to_string(kProxTvTrials) +
             " tv objective increases, momentum solver vs least squares rel " + fmt(worst_ls) +
             " (tol " + fmt(kFistaVsDenseRelTol) + ")";
    return worst_nuc <= kProxNuclearTol && tv_violations == 0 && worst_ls <= kFistaVsDenseRelTol;
}

// ---- criterion 5: planted-solution recovery --------------------------------

bool criterion_planted(std::string& detail) {
    ImagingSystem sys = desk_scale_system();
    sys.pixels_per_side = 32;
    sys.num_views = 3;
    sys.num_frames = 16;
    sys.num_rings = 45;
    sys.quadrature_points_Q = 64;  // data and solver share one quadrature: the
                                   // planted field is an exact zero of the objective
    sys.validate();

    SirenSpec arch;
    arch.width = 24;
    arch.depth = 2;
    arch.partitions = 8;
    arch.omega_first = 15.0;
    arch.omega_hidden = 2.0;

    PouNet planted = init_siren(arch, PolyBasis::tensor_product(), domain_of(sys), 5);
    {
        Rng rng(901);
        planted.C = Eigen::MatrixXd::NullaryExpr(planted.C.rows(), planted.C.cols(),
                                                 [&] { return rng.uniform(-0.4, 0.4); });
    }
    const Sinogram data = crt_apply_field_all(planted, sys);

    TrainConfig tc;
    tc.outer_max_iter = 8;
    tc.inner_epochs = 24;
    tc.batch_frames = 4;
    tc.lr_c0 = 0.3;
    tc.lr_eta0 = 1e-2;
    tc.lr_total_decay = 1e-3;
    tc.rho0 = 0.0;
    tc.tau0 = 0.0;
    tc.tv_gamma = 0.0;
    tc.quad_q = 64;
    tc.seed = 3;
    tc.arch = arch;
    tc.validate();

    const TrainingProblem prob = make_training_problem(data, sys, tc, false);
    const PouNet start = init_siren(arch, PolyBasis::tensor_product(), domain_of(sys), 6);
    TrainReport report;
    run_training(prob, tc, start, report, 0x706c6e74);
    if (report.aborted) {
        detail = "solver aborted: " + report.abort_reason;
        return false;
    }
    const double j0 = report.rows.front().j_full;
    double jbest = j0;
    for (const TrainRow& r : report.rows) jbest = std::min(jbest, r.j_full);
    const double drop = j0 / std::max(jbest, 1e-300);
    detail = "objective " + fmt(j0) + " -> " + fmt(jbest) + ", drop x" + fmt(drop) + " (min x" +
             fmt(kPlantedDropFactor) + ")";
    return drop >= kPlantedDropFactor;
}

// ---- criterion 6: embedding vs semiseparable baselines ---------------------

bool criterion_embedding(std::string& detail) {
    const fs::path out = work_root() / "c6";
    const std::string js = std::string("{\"profile\":\"desk\",\"seed\":11,\"out_dir\":\"") +
                           out.string() + "\"}";
    const ExperimentConfig cfg = config_from_json(js);
    if (cmd_embed(cfg) != 0) {
        detail = "embed command failed";
        return false;
    }

    const CsvTable rep = read_csv(out / "embed" / "report.csv");
    const CsvTable spec = read_csv(out / "embed" / "spectrum.csv");

    long nf_params = 0;
    double nf_rrmse = -1.0;
    std::map<int, std::pair<long, double>> ss;  // rank -> (params, rrmse)
    for (std::size_t r = 0; r < rep.rows.size(); ++r) {
        if (rep.cell(r, "method") == "nf") {
            nf_params = std::stol(rep.cell(r, "params"));
            nf_rrmse = rep.num(r, "rrmse");
        } else {
            ss[static_cast<int>(rep.num(r, "rank"))] = {std::stol(rep.cell(r, "params")),
                                                        rep.num(r, "rrmse")};
        }
    }
    if (nf_rrmse < 0) {
        detail = "no field row in the embed report";
        return false;
    }

    const long n_pixels = static_cast<long>(cfg.system.pixels_per_side) *
                          cfg.system.pixels_per_side;
    const long nk = n_pixels + cfg.system.num_frames;
    const int r_eq = static_cast<int>(nf_params / nk);
    if (r_eq < 1 || !ss.count(r_eq)) {
        detail = "no semiseparable row at the parameter-equivalent rank " + std::to_string(r_eq);
        return false;
    }

    Eigen::VectorXd sigma(spec.rows.size());
    for (std::size_t i = 0; i < spec.rows.size(); ++i) sigma[static_cast<long>(i)] = spec.num(i, "sigma");
    const double total = sigma.squaredNorm();
    double worst_tail = 0.0;
    for (const auto& [rank, pr] : ss) {
        const double tail = sigma.tail(sigma.size() - rank).squaredNorm();
        const double want = tail / total;
        const double got = pr.second * pr.second;
        worst_tail = std::max(worst_tail, std::abs(got - want) / std::max(want, 1e-300));
    }

    const double ss_eq = ss[r_eq].second;
    detail = "field rrmse " + fmt(nf_rrmse) + " (" + std::to_string(nf_params) +
             " params) vs rank-" + std::to_string(r_eq) + " baseline " + fmt(ss_eq) +
             ", spectral-tail dev " + fmt(worst_tail) + " (tol " + fmt(kSsTailRelTol) + ")";
    return nf_rrmse < ss_eq && worst_tail <= kSsTailRelTol;
}

// ---- criteria 7/8: reconstruction sweeps through the command layer --------

struct SweepReport {
    // (method, sweep value) -> rrmse, plus the discrepancy bookkeeping
    std::map<std::string, std::map<double, double>> rrmse;
    bool all_satisfied = true;
    double worst_margin = -std::numeric_limits<double>::infinity();
};

std::optional<SweepReport> run_sweep(const std::string& axis, const std::string& values,
                                     const fs::path& out, std::string& detail) {
    const std::string js = std::string("{\"profile\":\"desk\",\"seed\":1,\"out_dir\":\"") +
                           out.string() + "\",\"method\":\"all\",\"sweep\":{\"axis\":\"" + axis +
                           "\",\"values\":[" + values + "]}}";
    const ExperimentConfig cfg = config_from_json(js);
    if (cmd_reconstruct(cfg) != 0) {
        detail = "reconstruct command failed";
        return std::nullopt;
    }
    const CsvTable rep = read_csv(out / "reconstruct" / "report.csv");
    SweepReport sr;
    for (std::size_t r = 0; r < rep.rows.size(); ++r) {
        const std::string method = rep.cell(r, "method");
        sr.rrmse[method][rep.num(r, "sweep_value")] = rep.num(r, "rrmse");
        const bool sat = rep.num(r, "morozov_satisfied") != 0.0;
        const double disc = rep.num(r, "discrepancy_sq");
        const double thr = rep.num(r, "threshold");
        sr.all_satisfied = sr.all_satisfied && sat && disc <= thr;
        sr.worst_margin = std::max(sr.worst_margin, disc - thr);
    }
    return sr;
}

bool criterion_views_trend(std::string& detail) {
    auto sr = run_sweep("views", "2,8", work_root() / "c7", detail);
    if (!sr) return false;
    bool trend = true;
    std::string parts;
    for (const std::string method : {"nf-tv", "pw-tv"}) {
        const auto& m = sr->rrmse[method];
        if (!m.count(2.0) || !m.count(8.0)) {
            detail = "missing sweep rows for " + method;
            return false;
        }
        const double lo = m.at(8.0), hi = m.at(2.0);
        trend = trend && lo < hi;
        parts += method + " " + fmt(hi) + " -> " + fmt(lo) + "  ";
    }
    detail = "rrmse sparse -> dense views: " + parts +
             (sr->all_satisfied ? "(all discrepancies within threshold)"
                                : "(discrepancy bound violated)");
    return trend && sr->all_satisfied;
}

bool criterion_noise_trend(std::string& detail) {
    auto sr = run_sweep("noise", "0.025,0.1,0.2", work_root() / "c8", detail);
    if (!sr) return false;
    bool monotone = true;
    std::string parts;
    for (const auto& [method, by_noise] : sr->rrmse) {
        if (by_noise.size() != 3) {
            detail = "missing sweep rows for " + method;
            return false;
        }
        double prev = -1.0;
        parts += method + ":";
        for (const auto& [noise, err] : by_noise) {  // std::map iterates in noise order
            monotone = monotone && err + 1e-12 >= prev;
            prev = err;
            parts += " " + fmt(err);
        }
        parts += "  ";
    }
    detail = "rrmse by noise level: " + parts +
             (sr->all_satisfied ? "(all discrepancies within threshold)"
                                : "(discrepancy bound violated)");
    return monotone && sr->all_satisfied;
}

// ---- criterion 9: parameter accounting -------------------------------------

bool criterion_accounting(std::string& detail) {
    const fs::path embed_rep = work_root() / "c6" / "embed" / "report.csv";
    for (const fs::path& p :
         {embed_rep, work_root() / "c7" / "reconstruct" / "report.csv",
          work_root() / "c8" / "reconstruct" / "report.csv"}) {
        if (!fs::exists(p)) {
            detail = "missing " + p.string() + "; run criteria 6-8 first";
            return false;
        }
    }

    const ExperimentConfig desk = config_from_json("{\"profile\":\"desk\"}");
    const long n_pixels =
        static_cast<long>(desk.system.pixels_per_side) * desk.system.pixels_per_side;
    const long dense = n_pixels * desk.system.num_frames;
    const long nk = n_pixels + desk.system.num_frames;

    long nf_params = -1;
    bool factored_ok = true;
    const CsvTable emb = read_csv(embed_rep);
    for (std::size_t r = 0; r < emb.rows.size(); ++r) {
        const long params = std::stol(emb.cell(r, "params"));
        if (emb.cell(r, "method") == "nf") {
            nf_params = params;
        } else {
            factored_ok = factored_ok && params == static_cast<long>(emb.num(r, "rank")) * nk;
        }
    }
    for (const fs::path& p : {work_root() / "c7" / "reconstruct" / "report.csv",
                              work_root() / "c8" / "reconstruct" / "report.csv"}) {
        const CsvTable rep = read_csv(p);
        for (std::size_t r = 0; r < rep.rows.size(); ++r) {
            const std::string method = rep.cell(r, "method");
            const long params = std::stol(rep.cell(r, "params"));
            if (method == "pw-nn") {
                factored_ok = factored_ok && params == static_cast<long>(rep.num(r, "rank")) * nk;
            } else if (method == "nf-tv") {
                factored_ok = factored_ok && params == nf_params;
            }
        }
    }

    const double share = static_cast<double>(nf_params) / static_cast<double>(dense);
    detail = "field params " + std::to_string(nf_params) + " = " + fmt(100.0 * share) +
             "% of the dense grid (cap " + fmt(100.0 * kNfBudgetShare) +
             "%), factored storage counts " + (factored_ok ? "exact" : "WRONG");
    return nf_params > 0 && share < kNfBudgetShare && factored_ok;
}

// ---- criterion 10: determinism ---------------------------------------------

int run_tiny_pipeline(const fs::path& out) {
    const std::string js =
        std::string("{\"profile\":\"desk\",\"seed\":4,\"out_dir\":\"") + out.string() +
        "\",\"method\":\"all\"," +
        "\"system\":{\"pixels_per_side\":16,\"views\":2,\"frames\":4,\"rings\":16," +
        "\"quadrature_points\":64}," +
        "\"train\":{\"width\":8,\"depth\":2,\"partitions\":4,\"outer_max_iter\":2," +
        "\"inner_epochs\":4,\"batch_frames\":2,\"quad_q\":32,\"init_outer_iter\":1}," +
        "\"prox\":{\"max_iter\":40},\"morozov\":{\"largest\":1e-3,\"ratio\":10,\"count\":2}}";
    const ExperimentConfig cfg = config_from_json(js);
    int rc = 0;
    rc |= cmd_phantom(cfg);
    rc |= cmd_simulate(cfg);
    rc |= cmd_embed(cfg);
    rc |= cmd_reconstruct(cfg);
    SvdArgs sa;
    sa.input = out / "phantom" / "truth";
    sa.ranks = {1, 2};
    sa.out_dir = out / "svd";
    rc |= cmd_svd(sa);
    MetricsArgs ma;
    ma.file_a = out / "embed" / "nf";
    ma.file_b = out / "phantom" / "truth";
    ma.out_csv = out / "metrics.csv";
    rc |= cmd_metrics(ma);
    return rc;
}

bool criterion_determinism(std::string& detail) {
    const fs::path a = work_root() / "c10_a";
    const fs::path b = work_root() / "c10_b";
    fs::remove_all(a);
    fs::remove_all(b);
    if (run_tiny_pipeline(a) != 0 || run_tiny_pipeline(b) != 0) {
        detail = "pipeline run failed";
        return false;
    }

    // wall-clock diagnostics and the echoed output path legitimately differ
    const std::set<std::string> skip = {"config_echo.json", "timings.csv", "train_timings.csv"};
    int compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), a);
        if (skip.count(rel.filename().string())) continue;
        const fs::path other = b / rel;
        if (!fs::exists(other)) {
            detail = "second run missing " + rel.string();
            return false;
        }
        if (slurp(entry.path()) != slurp(other)) {
            detail = "outputs differ at " + rel.string();
            return false;
        }
        ++compared;
    }
    if (compared < 20) {
        detail = "only " + std::to_string(compared) + " files produced; pipeline incomplete";
        return false;
    }

    // rerun over a warm directory: cached inputs must not change the report
    const std::string before = slurp(a / "reconstruct" / "report.csv");
    const std::string js_echo = slurp(a / "reconstruct" / "config_echo.json");
    const ExperimentConfig cfg = config_from_json(js_echo);
    if (cmd_reconstruct(cfg) != 0) {
        detail = "warm rerun failed";
        return false;
    }
    if (slurp(a / "reconstruct" / "report.csv") != before) {
        detail = "warm rerun changed the report";
        return false;
    }

    detail = std::to_string(compared) + " files byte-identical across runs, warm rerun stable";
    return true;
}

// ---- driver -----------------------------------------------------------------

struct Criterion {
    int number;
    const char* name;
    double budget_sec;  // 0 = unbounded
    std::function<bool(std::string&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "parameter and field gradients", kC1BudgetSec, criterion_gradients},
        {2, "partition weights", 0.0, criterion_partition},
        {3, "integral operators", kC3BudgetSec, criterion_operators},
        {4, "proximal operators and baseline solver", 0.0, criterion_prox},
        {5, "planted-solution recovery", kC5BudgetSec, criterion_planted},
        {6, "embedding vs factored baselines", kC6BudgetSec, criterion_embedding},
        {7, "views-per-frame trend", kC7BudgetSec, criterion_views_trend},
        {8, "noise-level trend", kC8BudgetSec, criterion_noise_trend},
        {9, "parameter accounting", 0.0, criterion_accounting},
        {10, "rerun determinism", 0.0, criterion_determinism},
    };

    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    bool all_ok = true;
    for (const Criterion& c : criteria) {
        if (!wanted.empty() && !wanted.count(c.number)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        std::string detail;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("exception: ") + e.what();
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (ok && c.budget_sec > 0.0 && sec > c.budget_sec) {
            ok = false;
            detail += "; over the " + fmt(c.budget_sec) + "s budget";
        }
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.number << " (" << c.name
                  << "): " << detail << " [" << fmt(sec) << "s]" << std::endl;
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
