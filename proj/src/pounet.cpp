#include "dynfield/pounet.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "dynfield/io.hpp"
#include "dynfield/rng.hpp"

namespace dynfield {

namespace {

constexpr Eigen::Index kChunk = 4096;

void check(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

/// Column-scaled product M * diag(s).
Eigen::MatrixXd col_scaled(const Eigen::MatrixXd& m, const Eigen::RowVectorXd& s) {
    return m * s.asDiagonal();
}

}  // namespace

Eigen::Matrix3Xd normalize_batch(const DomainBox& box, const Eigen::Matrix3Xd& phys) {
    Eigen::Matrix3Xd xn(3, phys.cols());
    const auto sc = box.scale();
    xn.row(0) = phys.row(0) * sc[0];
    xn.row(1) = phys.row(1) * sc[1];
    xn.row(2) = (phys.row(2) * sc[2]).array() - 1.0;
    return xn;
}



void SirenSpec::validate() const {
    check(width >= 1, "partition net width must be positive");
    check(depth >= 1, "partition net needs at least one sine layer");
    check(partitions >= 1, "need at least one partition");
    check(omega_first > 0.0 && omega_hidden > 0.0, "frequency scales must be positive");
}

long PartitionNet::param_count() const {
    long n = 0;
    for (const auto& w : W) n += static_cast<long>(w.size());
    for (const auto& v : b) n += static_cast<long>(v.size());
    return n;
}

void PouNet::validate() const {
    net.spec.validate();
    const int d = net.spec.depth;
    check(static_cast<int>(net.W.size()) == d + 1 && static_cast<int>(net.b.size()) == d + 1,
          "layer count does not match spec");
    check(net.W[0].rows() == net.spec.width && net.W[0].cols() == 3, "bad first layer shape");
    for (int l = 1; l < d; ++l)
        check(net.W[l].rows() == net.spec.width && net.W[l].cols() == net.spec.width,
              "bad hidden layer shape");
    check(net.W[d].rows() == net.spec.partitions && net.W[d].cols() == net.spec.width,
          "bad output layer shape");
    for (int l = 0; l <= d; ++l) check(net.b[l].size() == net.W[l].rows(), "bias size mismatch");
    check(C.rows() == net.spec.partitions && C.cols() == basis.size(),
          "coefficient matrix does not match partitions x features");
    check(domain.half_extent > 0.0 && domain.total_time > 0.0, "degenerate domain box");
}

PouNet init_siren(const SirenSpec& spec, const PolyBasis& basis, const DomainBox& domain,
                  std::uint64_t seed) {
    spec.validate();
    PouNet f;
    f.net.spec = spec;
    f.basis = basis;
    f.domain = domain;

    const int d = spec.depth;
    f.net.W.resize(d + 1);
    f.net.b.resize(d + 1);
    f.net.W[0].resize(spec.width, 3);
    for (int l = 1; l < d; ++l) f.net.W[l].resize(spec.width, spec.width);
    f.net.W[d].resize(spec.partitions, spec.width);
    for (int l = 0; l <= d; ++l) f.net.b[l].resize(f.net.W[l].rows());
    f.C.resize(spec.partitions, basis.size());

    Rng rng(hash_combine(seed, 0x706f756e6574ULL));
    const double wh = std::sqrt(6.0 / spec.width) / spec.omega_hidden;
    const double wo = std::sqrt(6.0 / spec.width);
    // Draw order is part of the reproducibility contract: W then b per
    // layer, rows outer and columns inner, coefficients last.
    for (int l = 0; l <= d; ++l) {
        double bound;
        if (l == 0)
            bound = 1.0 / 3.0;
        else if (l < d)
            bound = wh;
        else
            bound = wo;
        const double bbound = 1.0 / std::sqrt(static_cast<double>(f.net.W[l].cols()));
        for (Eigen::Index i = 0; i < f.net.W[l].rows(); ++i)
            for (Eigen::Index j = 0; j < f.net.W[l].cols(); ++j)
                f.net.W[l](i, j) = rng.uniform(-bound, bound);
        for (Eigen::Index i = 0; i < f.net.b[l].size(); ++i)
            f.net.b[l][i] = rng.uniform(-bbound, bbound);
    }
    for (Eigen::Index i = 0; i < f.C.rows(); ++i)
        for (Eigen::Index j = 0; j < f.C.cols(); ++j) f.C(i, j) = rng.uniform(-0.01, 0.01);

    f.validate();
    return f;
}

void pounet_forward(const PouNet& f, const Eigen::Matrix3Xd& Xn, BatchWork& work, bool with_tangent) {
    const auto& net = f.net;
    const int d = net.spec.depth;
    const Eigen::Index n = Xn.cols();
    const double wf = net.spec.omega_first;
    const double wh = net.spec.omega_hidden;

    work.Xn = Xn;
    work.A.resize(d);
    work.Z.resize(d);
    work.has_tangent = with_tangent;
    if (with_tangent) {
        work.dA.resize(d);
        work.dZ.resize(d);
    }

    for (int l = 0; l < d; ++l) {
        const double w = (l == 0) ? wf : wh;
        if (l == 0)
            work.A[0] = (w * ((net.W[0] * Xn).colwise() + net.b[0])).eval();
        else
            work.A[l] = (w * ((net.W[l] * work.Z[l - 1]).colwise() + net.b[l])).eval();
        work.Z[l] = work.A[l].array().sin().matrix();
        if (with_tangent) {
            auto& dA = work.dA[l];
            auto& dZ = work.dZ[l];
            dA.resize(work.A[l].rows(), 3 * n);
            dZ.resize(work.A[l].rows(), 3 * n);
            const Eigen::ArrayXXd cosA = work.A[l].array().cos();
            for (int j = 0; j < 3; ++j) {
                if (l == 0)
                    dA.middleCols(j * n, n) = wf * net.W[0].col(j) * Eigen::RowVectorXd::Ones(n);
                else
                    dA.middleCols(j * n, n) = wh * net.W[l] * work.dZ[l - 1].middleCols(j * n, n);
                dZ.middleCols(j * n, n) = (cosA * dA.middleCols(j * n, n).array()).matrix();
            }
        }
    }

    work.U = (net.W[d] * work.Z[d - 1]).colwise() + net.b[d];

    // Per-column stable softmax.
    const Eigen::RowVectorXd umax = work.U.colwise().maxCoeff();
    work.Psi = (work.U.rowwise() - umax).array().exp().matrix();
    const Eigen::RowVectorXd norm = work.Psi.colwise().sum();
    work.Psi = col_scaled(work.Psi, norm.cwiseInverse());

    if (with_tangent) {
        work.B.resize(f.basis.size(), n);
        work.Bg.resize(f.basis.size(), 3 * n);
        f.basis.eval_with_grad(Xn, work.B, work.Bg);
    } else {
        f.basis.eval(Xn, work.B);
    }
    work.CB = f.C * work.B;
    work.phi = (work.Psi.array() * work.CB.array()).colwise().sum().matrix();

    if (with_tangent) {
        work.dU.resize(net.spec.partitions, 3 * n);
        work.dPsi.resize(net.spec.partitions, 3 * n);
        work.CdB = f.C * work.Bg;
        work.gradn.resize(3, n);
        for (int j = 0; j < 3; ++j) {
            auto dUj = work.dU.middleCols(j * n, n);
            dUj = net.W[d] * work.dZ[d - 1].middleCols(j * n, n);
            const Eigen::MatrixXd pdu = (work.Psi.array() * dUj.array()).matrix();
            const Eigen::RowVectorXd s1 = pdu.colwise().sum();
            work.dPsi.middleCols(j * n, n) = pdu - col_scaled(work.Psi, s1);
            work.gradn.row(j) =
                ((work.dPsi.middleCols(j * n, n).array() * work.CB.array()).colwise().sum() +
                 (work.Psi.array() * work.CdB.middleCols(j * n, n).array()).colwise().sum())
                    .matrix();
        }
    }
}

ParamGrads ParamGrads::zeros_like(const PouNet& f) {
    ParamGrads g;
    g.dW.reserve(f.net.W.size());
    g.db.reserve(f.net.b.size());
    for (const auto& w : f.net.W) g.dW.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    for (const auto& v : f.net.b) g.db.push_back(Eigen::VectorXd::Zero(v.size()));
    g.dC = Eigen::MatrixXd::Zero(f.C.rows(), f.C.cols());
    return g;
}

void ParamGrads::set_zero() {
    for (auto& w : dW) w.setZero();
    for (auto& v : db) v.setZero();
    dC.setZero();
}

void pounet_backward(const PouNet& f, const BatchWork& work, const SeedSet& seeds, bool eta_grads,
                     ParamGrads& out) {
    const auto& net = f.net;
    const int d = net.spec.depth;
    const Eigen::Index n = work.size();
    const bool want_phi = seeds.phi.size() > 0;
    const bool want_grad = seeds.gradn.size() > 0;
    const bool want_psi = seeds.psi.size() > 0;
    if (want_grad && !work.has_tangent)
        throw std::logic_error("gradient seeds need a tangent-mode forward pass");

    Eigen::MatrixXd Psibar = Eigen::MatrixXd::Zero(net.spec.partitions, n);
    Eigen::MatrixXd dPsibar;
    if (want_grad) dPsibar.resize(net.spec.partitions, 3 * n);

    if (want_phi) {
        Psibar += col_scaled(work.CB, seeds.phi);
        out.dC.noalias() += col_scaled(work.Psi, seeds.phi) * work.B.transpose();
    }
    if (want_grad) {
        for (int j = 0; j < 3; ++j) {
            const Eigen::RowVectorXd sg = seeds.gradn.row(j);
            dPsibar.middleCols(j * n, n) = col_scaled(work.CB, sg);
            Psibar += col_scaled(work.CdB.middleCols(j * n, n), sg);
            out.dC.noalias() += col_scaled(work.dPsi.middleCols(j * n, n), sg) * work.B.transpose();
            out.dC.noalias() +=
                col_scaled(work.Psi, sg) * work.Bg.middleCols(j * n, n).transpose();
        }
    }
    if (want_psi) Psibar += seeds.psi;

    // The tangent softmax depends on Psi itself; fold that dependence into
    // Psibar before converting to a logit cotangent.
    if (want_grad) {
        for (int j = 0; j < 3; ++j) {
            const auto dUj = work.dU.middleCols(j * n, n);
            const auto dPbj = dPsibar.middleCols(j * n, n);
            const Eigen::RowVectorXd s1 = (work.Psi.array() * dUj.array()).colwise().sum().matrix();
            const Eigen::RowVectorXd s2 = (dPbj.array() * work.Psi.array()).colwise().sum().matrix();
            Psibar += dPbj.cwiseProduct(dUj) - col_scaled(dPbj, s1) - col_scaled(dUj, s2);
        }
    }

    if (!eta_grads) return;

    const Eigen::MatrixXd Ubar =
        work.Psi.cwiseProduct(Psibar) -
        col_scaled(work.Psi, (work.Psi.array() * Psibar.array()).colwise().sum().matrix());

    Eigen::MatrixXd dUbar;
    if (want_grad) {
        dUbar.resize(net.spec.partitions, 3 * n);
        for (int j = 0; j < 3; ++j) {
            const auto dPbj = dPsibar.middleCols(j * n, n);
            dUbar.middleCols(j * n, n) =
                work.Psi.cwiseProduct(dPbj) -
                col_scaled(work.Psi, (work.Psi.array() * dPbj.array()).colwise().sum().matrix());
        }
    }

    out.dW[d].noalias() += Ubar * work.Z[d - 1].transpose();
    out.db[d] += Ubar.rowwise().sum();
    Eigen::MatrixXd Zbar = net.W[d].transpose() * Ubar;
    Eigen::MatrixXd dZbar;
    if (want_grad) {
        dZbar.resize(net.spec.width, 3 * n);
        for (int j = 0; j < 3; ++j) {
            out.dW[d].noalias() +=
                dUbar.middleCols(j * n, n) * work.dZ[d - 1].middleCols(j * n, n).transpose();
            dZbar.middleCols(j * n, n) = net.W[d].transpose() * dUbar.middleCols(j * n, n);
        }
    }

    for (int l = d - 1; l >= 0; --l) {
        const double w = (l == 0) ? net.spec.omega_first : net.spec.omega_hidden;
        const Eigen::ArrayXXd cosA = work.A[l].array().cos();
        Eigen::MatrixXd Abar = (cosA * Zbar.array()).matrix();
        Eigen::MatrixXd dAbar;
        if (want_grad) {
            dAbar.resize(Abar.rows(), 3 * n);
            for (int j = 0; j < 3; ++j) {
                Abar.array() -= work.Z[l].array() * work.dA[l].middleCols(j * n, n).array() *
                                dZbar.middleCols(j * n, n).array();
                dAbar.middleCols(j * n, n) = (cosA * dZbar.middleCols(j * n, n).array()).matrix();
            }
        }

        out.db[l] += w * Abar.rowwise().sum();
        if (l > 0) {
            out.dW[l].noalias() += w * Abar * work.Z[l - 1].transpose();
            Zbar.noalias() = w * net.W[l].transpose() * Abar;
            if (want_grad) {
                for (int j = 0; j < 3; ++j) {
                    out.dW[l].noalias() += w * dAbar.middleCols(j * n, n) *
                                           work.dZ[l - 1].middleCols(j * n, n).transpose();
                    dZbar.middleCols(j * n, n) = w * net.W[l].transpose() * dAbar.middleCols(j * n, n);
                }
            }
        } else {
            out.dW[0].noalias() += w * Abar * work.Xn.transpose();
            if (want_grad)
                for (int j = 0; j < 3; ++j)
                    out.dW[0].col(j) += w * dAbar.middleCols(j * n, n).rowwise().sum();
        }
    }
}

Eigen::VectorXd PouNet::eval_pou(double x, double y, double t) const {
    if (!domain.contains(x, y) || !domain.contains_time(t))
        throw std::domain_error("point outside the field's space-time box");
    const auto p = domain.normalize(x, y, t);
    Eigen::Matrix3Xd xn(3, 1);
    xn << p[0], p[1], p[2];
    BatchWork work;
    pounet_forward(*this, xn, work, false);
    return work.Psi.col(0);
}

double PouNet::eval(double x, double y, double t) const {
    if (!domain.contains(x, y) || !domain.contains_time(t))
        throw std::domain_error("point outside the field's space-time box");
    Eigen::Matrix3Xd pts(3, 1);
    pts << x, y, t;
    Eigen::VectorXd out;
    eval_batch(pts, out);
    return out[0];
}

void PouNet::eval_batch(const Eigen::Matrix3Xd& points, Eigen::VectorXd& out) const {
    const Eigen::Index n = points.cols();
    out.resize(n);
    BatchWork work;
    for (Eigen::Index at = 0; at < n; at += kChunk) {
        const Eigen::Index len = std::min(kChunk, n - at);
        const Eigen::Matrix3Xd xn = normalize_batch(domain, points.middleCols(at, len));
        pounet_forward(*this, xn, work, false);
        out.segment(at, len) = work.phi.transpose();
    }
}

std::array<double, 3> PouNet::eval_grad(double x, double y, double t) const {
    if (!domain.contains(x, y) || !domain.contains_time(t))
        throw std::domain_error("point outside the field's space-time box");
    Eigen::Matrix3Xd pts(3, 1);
    pts << x, y, t;
    BatchWork work;
    pounet_forward(*this, normalize_batch(domain, pts), work, true);
    const auto sc = domain.scale();
    return {work.gradn(0, 0) * sc[0], work.gradn(1, 0) * sc[1], work.gradn(2, 0) * sc[2]};
}

void LossSpec::validate(const PouNet& f) const {
    for (const auto& term : residual_terms) {
        check(term.h.size() == term.pts.cols(), "weight count != point count");
        check(static_cast<Eigen::Index>(term.group.size()) == term.pts.cols(),
              "group index count != point count");
        int prev = -1;
        for (const int g : term.group) {
            check(g >= 0 && g < term.d.size(), "group index out of range");
            check(g >= prev, "points of a group must be contiguous and ordered");
            prev = g;
        }
        check(term.weight >= 0.0, "negative residual weight");
    }
    for (const auto& term : tv_terms) check(term.delta > 0.0, "smoothing delta must be positive");
    for (const auto& term : qnorm_terms) {
        check(term.eps > 0.0, "qnorm floor must be positive");
        check(term.q > 0.0 && term.q <= 1.0, "exponent must lie in (0, 1]");
        (void)f;
    }
}

namespace {

/// Shared evaluation core: accumulates the loss value and, when `grads`
/// is non-null, the parameter cotangents. All chunking lives here.
double loss_core(const PouNet& f, const LossSpec& spec, bool eta_grads, ParamGrads* grads) {
    spec.validate(f);
    double total = 0.0;
    BatchWork work;
    SeedSet seeds;
    const auto sc = f.domain.scale();

    for (const auto& term : spec.residual_terms) {
        const Eigen::Index n = term.pts.cols();
        Eigen::Index at = 0;
        // Groups with no points still owe their (0 - d_g)^2 term; the chunk
        // walk attributes every group to exactly one chunk.
        int next_group = 0;
        while (at < n) {
            // Grow the chunk to the next group boundary so every group is
            // seen whole; group sums would otherwise be split.
            Eigen::Index end = std::min(at + kChunk, n);
            while (end < n && term.group[end] == term.group[end - 1]) ++end;
            const Eigen::Index len = end - at;

            pounet_forward(f, normalize_batch(f.domain, term.pts.middleCols(at, len)), work, false);
            const int g0 = next_group;
            const int g1 = term.group[end - 1];
            next_group = g1 + 1;
            Eigen::VectorXd sums = Eigen::VectorXd::Zero(g1 - g0 + 1);
            for (Eigen::Index i = 0; i < len; ++i)
                sums[term.group[at + i] - g0] += term.h[at + i] * work.phi[i];
            Eigen::VectorXd res = sums - term.d.segment(g0, g1 - g0 + 1);
            total += 0.5 * term.weight * res.squaredNorm();

            if (grads) {
                seeds = SeedSet{};
                seeds.phi.resize(len);
                for (Eigen::Index i = 0; i < len; ++i)
                    seeds.phi[i] = term.weight * res[term.group[at + i] - g0] * term.h[at + i];
                pounet_backward(f, work, seeds, eta_grads, *grads);
            }
            at = end;
        }
        if (next_group < term.d.size())
            total += 0.5 * term.weight * term.d.tail(term.d.size() - next_group).squaredNorm();
    }

    for (const auto& term : spec.tv_terms) {
        const Eigen::Index n = term.pts.cols();
        if (n == 0) continue;
        const double inv_n = 1.0 / static_cast<double>(n);
        for (Eigen::Index at = 0; at < n; at += kChunk) {
            const Eigen::Index len = std::min(kChunk, n - at);
            pounet_forward(f, normalize_batch(f.domain, term.pts.middleCols(at, len)), work, true);
            Eigen::Matrix3Xd gp(3, len);
            for (int j = 0; j < 3; ++j) gp.row(j) = work.gradn.row(j) * sc[j];
            const int axes = term.include_time ? 3 : 2;
            Eigen::ArrayXd mag2 = Eigen::ArrayXd::Constant(len, term.delta * term.delta);
            for (int j = 0; j < axes; ++j) mag2 += gp.row(j).array().square().transpose();
            const Eigen::ArrayXd mag = mag2.sqrt();
            total += term.gamma * inv_n * mag.sum();

            if (grads) {
                seeds = SeedSet{};
                seeds.gradn = Eigen::MatrixXd::Zero(3, len);
                for (int j = 0; j < axes; ++j)
                    seeds.gradn.row(j) =
                        (term.gamma * inv_n * sc[j] * gp.row(j).array() / mag.transpose()).matrix();
                pounet_backward(f, work, seeds, eta_grads, *grads);
            }
        }
    }

    for (const auto& term : spec.qnorm_terms) {
        const Eigen::Index n = term.pts.cols();
        if (n == 0) continue;
        const double scale = term.tau * term.volume / static_cast<double>(n);
        for (Eigen::Index at = 0; at < n; at += kChunk) {
            const Eigen::Index len = std::min(kChunk, n - at);
            pounet_forward(f, normalize_batch(f.domain, term.pts.middleCols(at, len)), work, false);
            const Eigen::ArrayXXd shifted = work.Psi.array() + term.eps;
            total += scale * shifted.pow(term.q).sum();
            if (grads && eta_grads) {
                seeds = SeedSet{};
                seeds.psi = (scale * term.q * shifted.pow(term.q - 1.0)).matrix();
                pounet_backward(f, work, seeds, eta_grads, *grads);
            }
        }
    }

    if (spec.frobenius_weight != 0.0) {
        total += 0.5 * spec.frobenius_weight * f.C.squaredNorm();
        if (grads) grads->dC += spec.frobenius_weight * f.C;
    }
    return total;
}

}  // namespace

double loss_value(const PouNet& f, const LossSpec& spec) { return loss_core(f, spec, false, nullptr); }

double loss_and_grads(const PouNet& f, const LossSpec& spec, bool eta_grads, ParamGrads& out) {
    return loss_core(f, spec, eta_grads, &out);
}

Eigen::VectorXd eta_to_vector(const PartitionNet& net) {
    Eigen::VectorXd v(net.param_count());
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < net.W.size(); ++l) {
        for (Eigen::Index i = 0; i < net.W[l].rows(); ++i)
            for (Eigen::Index j = 0; j < net.W[l].cols(); ++j) v[at++] = net.W[l](i, j);
        for (Eigen::Index i = 0; i < net.b[l].size(); ++i) v[at++] = net.b[l][i];
    }
    return v;
}

void eta_from_vector(const Eigen::VectorXd& v, PartitionNet& net) {
    check(v.size() == net.param_count(), "flat parameter size mismatch");
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < net.W.size(); ++l) {
        for (Eigen::Index i = 0; i < net.W[l].rows(); ++i)
            for (Eigen::Index j = 0; j < net.W[l].cols(); ++j) net.W[l](i, j) = v[at++];
        for (Eigen::Index i = 0; i < net.b[l].size(); ++i) net.b[l][i] = v[at++];
    }
}

Eigen::VectorXd eta_grads_to_vector(const PouNet& f, const ParamGrads& g) {
    PartitionNet tmp;
    tmp.spec = f.net.spec;
    tmp.W = g.dW;
    tmp.b = g.db;
    return eta_to_vector(tmp);
}

void save_pounet(const PouNet& f, const std::filesystem::path& path, const std::string& config_hash) {
    f.validate();
    io::TextHeader h;
    h.set("format", "pounet/1");
    h.set("width", f.net.spec.width);
    h.set("depth", f.net.spec.depth);
    h.set("partitions", f.net.spec.partitions);
    h.set("omega_first", f.net.spec.omega_first);
    h.set("omega_hidden", f.net.spec.omega_hidden);
    h.set("half_extent", f.domain.half_extent);
    h.set("total_time", f.domain.total_time);
    h.set("config_hash", config_hash.empty() ? "none" : config_hash);
    std::ostringstream terms;
    for (int i = 0; i < f.basis.size(); ++i) {
        const auto& t = f.basis.terms()[i];
        if (i) terms << ';';
        terms << t.px << ',' << t.py << ',' << t.pt;
    }
    h.set("basis", terms.str());

    auto os = io::open_out(path, true);
    h.write(os);
    const Eigen::VectorXd eta = eta_to_vector(f.net);
    io::write_f64(os, eta.data(), static_cast<std::size_t>(eta.size()));
    std::vector<double> c(static_cast<std::size_t>(f.C.size()));
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < f.C.rows(); ++i)
        for (Eigen::Index j = 0; j < f.C.cols(); ++j) c[static_cast<std::size_t>(at++)] = f.C(i, j);
    io::write_f64(os, c.data(), c.size());
    if (!os) throw std::runtime_error("failed to write field checkpoint: " + path.string());
}

PouNet load_pounet(const std::filesystem::path& path) {
    auto is = io::open_in(path, true);
    const io::TextHeader h = io::TextHeader::read(is);
    if (h.get("format") != "pounet/1")
        throw std::runtime_error("not a field checkpoint: " + path.string());

    std::vector<PolyTerm> terms;
    {
        std::istringstream ss(h.get("basis"));
        std::string piece;
        while (std::getline(ss, piece, ';')) {
            PolyTerm t;
            if (std::sscanf(piece.c_str(), "%d,%d,%d", &t.px, &t.py, &t.pt) != 3)
                throw std::runtime_error("bad basis term in checkpoint header");
            terms.push_back(t);
        }
    }

    SirenSpec spec;
    spec.width = static_cast<int>(h.get_int("width"));
    spec.depth = static_cast<int>(h.get_int("depth"));
    spec.partitions = static_cast<int>(h.get_int("partitions"));
    spec.omega_first = h.get_double("omega_first");
    spec.omega_hidden = h.get_double("omega_hidden");

    PouNet f = init_siren(spec, PolyBasis(std::move(terms)),
                          DomainBox{h.get_double("half_extent"), h.get_double("total_time")}, 0);
    Eigen::VectorXd eta(f.net.param_count());
    io::read_f64(is, eta.data(), static_cast<std::size_t>(eta.size()));
    eta_from_vector(eta, f.net);
    std::vector<double> c(static_cast<std::size_t>(f.C.size()));
    io::read_f64(is, c.data(), c.size());
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < f.C.rows(); ++i)
        for (Eigen::Index j = 0; j < f.C.cols(); ++j) f.C(i, j) = c[static_cast<std::size_t>(at++)];
    if (!is) throw std::runtime_error("truncated field checkpoint: " + path.string());
    f.validate();
    return f;
}

}  // namespace dynfield
