#include "dynfield/classical.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <limits>

#include "dynfield/io.hpp"
#include "dynfield/rng.hpp"

namespace dynfield {

namespace {

double sigma_eff(const Sinogram& d) { return d.sigma > 0 ? d.sigma : 1.0; }

void check_shapes(const Eigen::MatrixXd& values, const SparseCrtOperator& op,
                  const Eigen::MatrixXd& data) {
    if (values.rows() != op.cols()) throw std::invalid_argument("pixel count mismatch");
    if (data.rows() != op.rows()) throw std::invalid_argument("measurement count mismatch");
    if (values.cols() != data.cols()) throw std::invalid_argument("frame count mismatch");
    if (static_cast<std::size_t>(values.cols()) != op.frames.size()) {
        throw std::invalid_argument("operator frame count mismatch");
    }
}

/// Forward differences of each frame stack; gt carries the time weight.
void tv_forward(const Eigen::MatrixXd& g, int ns, double tw, Eigen::MatrixXd& gx,
                Eigen::MatrixXd& gy, Eigen::MatrixXd& gt) {
    const int K = static_cast<int>(g.cols());
    gx.setZero(g.rows(), K);
    gy.setZero(g.rows(), K);
    gt.setZero(g.rows(), K);
    for (int k = 0; k < K; ++k) {
        for (int iy = 0; iy < ns; ++iy) {
            for (int ix = 0; ix < ns; ++ix) {
                const long n = static_cast<long>(iy) * ns + ix;
                if (ix + 1 < ns) gx(n, k) = g(n + 1, k) - g(n, k);
                if (iy + 1 < ns) gy(n, k) = g(n + ns, k) - g(n, k);
                if (k + 1 < K) gt(n, k) = tw * (g(n, k + 1) - g(n, k));
            }
        }
    }
}

Eigen::MatrixXd tv_adjoint(const Eigen::MatrixXd& px, const Eigen::MatrixXd& py,
                           const Eigen::MatrixXd& pt, int ns, double tw) {
    const int K = static_cast<int>(px.cols());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(px.rows(), K);
    for (int k = 0; k < K; ++k) {
        for (int iy = 0; iy < ns; ++iy) {
            for (int ix = 0; ix < ns; ++ix) {
                const long n = static_cast<long>(iy) * ns + ix;
                double v = 0.0;
                if (ix > 0) v += px(n - 1, k);
                if (ix + 1 < ns) v -= px(n, k);
                if (iy > 0) v += py(n - ns, k);
                if (iy + 1 < ns) v -= py(n, k);
                if (k > 0) v += tw * pt(n, k - 1);
                if (k + 1 < K) v -= tw * pt(n, k);
                out(n, k) = v;
            }
        }
    }
    return out;
}

}  // namespace

void ProxProblem::validate() const {
    if (op == nullptr || data == nullptr) throw std::invalid_argument("problem missing op/data");
    check_shapes(Eigen::MatrixXd::Zero(op->cols(), data->data.cols()), *op, data->data);
    if (gamma < 0) throw std::invalid_argument("gamma must be >= 0");
    if (step < 0) throw std::invalid_argument("step must be >= 0");
    if (max_iter <= 0 || tv_inner_iter <= 0) throw std::invalid_argument("iteration counts");
    if (tv_time_weight < 0) throw std::invalid_argument("time weight must be >= 0");
}

double tv_discrete(const Eigen::MatrixXd& values, int pixels_per_side, double time_weight) {
    const int ns = pixels_per_side;
    if (values.rows() != static_cast<long>(ns) * ns) {
        throw std::invalid_argument("tv_discrete: pixel count mismatch");
    }
    const int K = static_cast<int>(values.cols());
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
        for (int iy = 0; iy < ns; ++iy) {
            for (int ix = 0; ix < ns; ++ix) {
                const long n = static_cast<long>(iy) * ns + ix;
                const double dx = ix + 1 < ns ? values(n + 1, k) - values(n, k) : 0.0;
                const double dy = iy + 1 < ns ? values(n + ns, k) - values(n, k) : 0.0;
                const double dt =
                    k + 1 < K ? time_weight * (values(n, k + 1) - values(n, k)) : 0.0;
                total += std::sqrt(dx * dx + dy * dy + dt * dt);
            }
        }
    }
    return total;
}

Eigen::MatrixXd prox_tv(const Eigen::MatrixXd& values, int pixels_per_side, double weight,
                        int inner_iter, double time_weight) {
    if (weight < 0) throw std::invalid_argument("prox_tv: weight must be >= 0");
    if (weight == 0 || inner_iter <= 0) return values;
    const int ns = pixels_per_side;
    const long N = values.rows();
    const int K = static_cast<int>(values.cols());
    const double tw = time_weight;
    // Dual ascent step: the difference stack has squared norm at most
    // 4 + 4 + 4*tw^2.
    const double step = 1.0 / (4.0 * (2.0 + tw * tw) * weight);

    Eigen::MatrixXd px = Eigen::MatrixXd::Zero(N, K), py = px, pt = px;
    Eigen::MatrixXd rx = px, ry = px, rt = px;
    Eigen::MatrixXd gx, gy, gt;
    double t = 1.0;
    for (int it = 0; it < inner_iter; ++it) {
        const Eigen::MatrixXd g = values - weight * tv_adjoint(rx, ry, rt, ns, tw);
        tv_forward(g, ns, tw, gx, gy, gt);
        gx = rx + step * gx;
        gy = ry + step * gy;
        gt = rt + step * gt;
        // Project each voxel's dual vector onto the unit ball.
        Eigen::ArrayXXd mag =
            (gx.array().square() + gy.array().square() + gt.array().square()).sqrt().max(1.0);
        gx.array() /= mag;
        gy.array() /= mag;
        gt.array() /= mag;
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        rx = gx + beta * (gx - px);
        ry = gy + beta * (gy - py);
        rt = gt + beta * (gt - pt);
        px.swap(gx);
        py.swap(gy);
        pt.swap(gt);
        t = t_next;
    }
    Eigen::MatrixXd out = values - weight * tv_adjoint(px, py, pt, ns, tw);
    const double obj_out = 0.5 * (out - values).squaredNorm() + weight * tv_discrete(out, ns, tw);
    const double obj_in = weight * tv_discrete(values, ns, tw);
    return obj_out <= obj_in ? out : values;
}

Eigen::MatrixXd prox_nuclear(const Eigen::MatrixXd& values, double weight) {
    if (weight < 0) throw std::invalid_argument("prox_nuclear: weight must be >= 0");
    if (weight == 0) return values;
    const Eigen::MatrixXd gram = values.transpose() * values;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const Eigen::VectorXd sig = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::VectorXd factor = Eigen::VectorXd::Zero(sig.size());
    for (long i = 0; i < sig.size(); ++i) {
        if (sig[i] > 0) factor[i] = std::max(1.0 - weight / sig[i], 0.0);
    }
    const Eigen::MatrixXd v = es.eigenvectors();
    return values * (v * factor.asDiagonal() * v.transpose());
}

double nuclear_norm(const Eigen::MatrixXd& values) {
    const Eigen::MatrixXd gram = values.transpose() * values;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

double fidelity_value(const Eigen::MatrixXd& values, const SparseCrtOperator& op,
                      const Eigen::MatrixXd& data, double sigma) {
    check_shapes(values, op, data);
    return 0.5 * discrepancy_sq(values, op, data) / (sigma * sigma);
}

Eigen::MatrixXd fidelity_grad(const Eigen::MatrixXd& values, const SparseCrtOperator& op,
                              const Eigen::MatrixXd& data, double sigma) {
    check_shapes(values, op, data);
    Eigen::MatrixXd grad(values.rows(), values.cols());
    const double inv = 1.0 / (sigma * sigma);
    for (int k = 0; k < values.cols(); ++k) {
        const Eigen::VectorXd res = op.frames[k] * values.col(k) - data.col(k);
        grad.col(k) = inv * (op.frames[k].transpose() * res);
    }
    return grad;
}

double discrepancy_sq(const Eigen::MatrixXd& values, const SparseCrtOperator& op,
                      const Eigen::MatrixXd& data) {
    check_shapes(values, op, data);
    double total = 0.0;
    for (int k = 0; k < values.cols(); ++k) {
        total += (op.frames[k] * values.col(k) - data.col(k)).squaredNorm();
    }
    return total;
}

double lipschitz_estimate(const SparseCrtOperator& op, double sigma, int iterations,
                          std::uint64_t seed) {
    const long N = op.cols();
    const int K = static_cast<int>(op.frames.size());
    Rng rng(seed);
    Eigen::MatrixXd x(N, K);
    for (int k = 0; k < K; ++k) {
        for (long n = 0; n < N; ++n) x(n, k) = rng.uniform(-1.0, 1.0);
    }
    x /= x.norm();
    double lambda = 0.0;
    Eigen::MatrixXd y(N, K);
    for (int it = 0; it < iterations; ++it) {
        for (int k = 0; k < K; ++k) {
            y.col(k) = op.frames[k].transpose() * (op.frames[k] * x.col(k));
        }
        lambda = (x.array() * y.array()).sum();
        const double ny = y.norm();
        if (ny == 0) {
            lambda = 0.0;
            break;
        }
        x = y / ny;
    }
    return 1.05 * lambda / (sigma * sigma);
}

void FistaReport::save_csv(const std::filesystem::path& path) const {
    io::CsvWriter csv;
    csv.comment("best_iter=" + io::format_int(best_iter));
    csv.comment("restarts=" + io::format_int(restarts));
    if (aborted) csv.comment("aborted=1");
    csv.header({"iter", "objective", "fidelity", "reg", "restarted"});
    for (const auto& r : rows) {
        csv.field(r.iter).field(r.objective).field(r.fidelity).field(r.reg);
        csv.field(static_cast<int>(r.restarted));
        csv.end_row();
    }
    csv.save(path);
}

FistaResult fista(const ProxProblem& prob, const Eigen::MatrixXd& start) {
    prob.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const auto& op = *prob.op;
    const Eigen::MatrixXd& d = prob.data->data;
    const double sigma = sigma_eff(*prob.data);
    const int ns = op.pixels_per_side;
    const double step = prob.step > 0 ? prob.step : 1.0 / lipschitz_estimate(op, sigma);

    auto reg_value = [&](const Eigen::MatrixXd& f) {
        if (prob.gamma == 0) return 0.0;
        return prob.reg == Regularizer::SpaceTimeTv ? tv_discrete(f, ns, prob.tv_time_weight)
                                                    : nuclear_norm(f);
    };
    auto apply_prox = [&](const Eigen::MatrixXd& f) -> Eigen::MatrixXd {
        const double w = prob.gamma * step;
        if (w == 0) return f;
        return prob.reg == Regularizer::SpaceTimeTv
                   ? prox_tv(f, ns, w, prob.tv_inner_iter, prob.tv_time_weight)
                   : prox_nuclear(f, w);
    };

    FistaResult out;
    out.values = start;
    Eigen::MatrixXd x = start, x_prev = start, y = start;
    double fid = fidelity_value(x, op, d, sigma);
    double reg = reg_value(x);
    double j_prev = fid + prob.gamma * reg;
    double j_best = j_prev;
    out.report.rows.push_back({0, j_prev, fid, reg, false});
    double t = 1.0;
    for (int it = 1; it <= prob.max_iter; ++it) {
        const Eigen::MatrixXd g = fidelity_grad(y, op, d, sigma);
        x = apply_prox(y - step * g);
        fid = fidelity_value(x, op, d, sigma);
        reg = reg_value(x);
        const double j = fid + prob.gamma * reg;
        if (!std::isfinite(j)) {
            out.report.aborted = true;
            break;
        }
        bool restarted = false;
        if (j > j_prev) {
            // Momentum overshoot: drop it and take a plain step next.
            t = 1.0;
            y = x;
            restarted = true;
            out.report.restarts += 1;
        } else {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            y = x + ((t - 1.0) / t_next) * (x - x_prev);
            t = t_next;
        }
        out.report.rows.push_back({it, j, fid, reg, restarted});
        if (j < j_best) {
            j_best = j;
            out.report.best_iter = it;
            out.values = x;
        }
        x_prev = x;
        j_prev = j;
    }
    out.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::vector<double> geometric_grid(double largest, double ratio, int count) {
    if (!(largest > 0) || !(ratio > 1) || count <= 0) {
        throw std::invalid_argument("geometric_grid: need largest > 0, ratio > 1, count > 0");
    }
    std::vector<double> grid(count);
    double v = largest;
    for (int i = 0; i < count; ++i) {
        grid[i] = v;
        v /= ratio;
    }
    return grid;
}

double morozov_threshold(const Sinogram& data) {
    return data.sigma * data.sigma * static_cast<double>(data.sample_count());
}

}  // namespace dynfield
