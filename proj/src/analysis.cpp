#include "dynfield/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dynfield {

namespace {

/// Eigen pairs of the K x K Gram matrix, descending by eigenvalue.
void gram_eigen_desc(const Eigen::MatrixXd& values, Eigen::VectorXd& eigvals,
                     Eigen::MatrixXd& eigvecs) {
    const Eigen::MatrixXd gram = values.transpose() * values;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const long k = gram.rows();
    eigvals.resize(k);
    eigvecs.resize(k, k);
    for (long i = 0; i < k; ++i) {
        eigvals[i] = std::max(es.eigenvalues()[k - 1 - i], 0.0);
        eigvecs.col(i) = es.eigenvectors().col(k - 1 - i);
    }
}

Eigen::VectorXd gaussian_window(int n, double std_dev) {
    Eigen::VectorXd w(n);
    const double c = 0.5 * (n - 1);
    for (int i = 0; i < n; ++i) {
        const double d = (i - c) / std_dev;
        w[i] = std::exp(-0.5 * d * d);
    }
    return w / w.sum();
}

/// Weighted sum of an ns x ns frame over the window anchored at (x0, y0).
double window_sum(const Eigen::Ref<const Eigen::VectorXd>& frame, int ns, int x0, int y0,
                  const Eigen::VectorXd& w) {
    const int win = static_cast<int>(w.size());
    double acc = 0.0;
    for (int b = 0; b < win; ++b) {
        double row = 0.0;
        const long base = static_cast<long>(y0 + b) * ns + x0;
        for (int a = 0; a < win; ++a) row += w[a] * frame[base + a];
        acc += w[b] * row;
    }
    return acc;
}

}  // namespace

SemiseparableApprox truncated_svd(const Eigen::MatrixXd& values, int rank_r) {
    const long min_dim = std::min(values.rows(), values.cols());
    if (rank_r < 1 || rank_r > min_dim) throw std::invalid_argument("truncated_svd: rank out of range");
    Eigen::VectorXd eigvals;
    Eigen::MatrixXd v;
    gram_eigen_desc(values, eigvals, v);
    SemiseparableApprox out;
    out.rank_r = rank_r;
    out.spatial = values * v.leftCols(rank_r);
    out.temporal = v.leftCols(rank_r).transpose();
    return out;
}

Eigen::VectorXd singular_spectrum(const Eigen::MatrixXd& values) {
    // Work with the smaller Gram side so tall and wide inputs both stay
    // cheap.
    const bool tall = values.rows() >= values.cols();
    Eigen::VectorXd eigvals;
    Eigen::MatrixXd v;
    if (tall) {
        gram_eigen_desc(values, eigvals, v);
    } else {
        gram_eigen_desc(values.transpose(), eigvals, v);
    }
    return eigvals.cwiseSqrt();
}

double rrmse(const Eigen::MatrixXd& values, const Eigen::MatrixXd& reference) {
    if (values.rows() != reference.rows() || values.cols() != reference.cols()) {
        throw std::invalid_argument("rrmse: shape mismatch");
    }
    const double ref_norm = reference.norm();
    if (ref_norm == 0) throw std::invalid_argument("rrmse: zero reference");
    return (values - reference).norm() / ref_norm;
}

double ssim(const Eigen::MatrixXd& values, const Eigen::MatrixXd& reference, int pixels_per_side,
            int window, double window_std, double k1, double k2) {
    const int ns = pixels_per_side;
    if (values.rows() != reference.rows() || values.cols() != reference.cols()) {
        throw std::invalid_argument("ssim: shape mismatch");
    }
    if (values.rows() != static_cast<long>(ns) * ns) {
        throw std::invalid_argument("ssim: pixel count mismatch");
    }
    if (window > ns) throw std::invalid_argument("ssim: window larger than image");

    double range = reference.maxCoeff() - reference.minCoeff();
    if (range <= 0) range = 1.0;
    const double c1 = (k1 * range) * (k1 * range);
    const double c2 = (k2 * range) * (k2 * range);
    const Eigen::VectorXd w = gaussian_window(window, window_std);

    const int K = static_cast<int>(values.cols());
    const int last = ns - window;
    double frame_mean_acc = 0.0;
    for (int k = 0; k < K; ++k) {
        const auto f = values.col(k);
        const auto g = reference.col(k);
        const Eigen::VectorXd ff = f.cwiseProduct(f);
        const Eigen::VectorXd gg = g.cwiseProduct(g);
        const Eigen::VectorXd fg = f.cwiseProduct(g);
        double acc = 0.0;
        long count = 0;
        for (int y0 = 0; y0 <= last; ++y0) {
            for (int x0 = 0; x0 <= last; ++x0) {
                const double mf = window_sum(f, ns, x0, y0, w);
                const double mg = window_sum(g, ns, x0, y0, w);
                const double vf = window_sum(ff, ns, x0, y0, w) - mf * mf;
                const double vg = window_sum(gg, ns, x0, y0, w) - mg * mg;
                const double cov = window_sum(fg, ns, x0, y0, w) - mf * mg;
                const double num = (2 * mf * mg + c1) * (2 * cov + c2);
                const double den = (mf * mf + mg * mg + c1) * (vf + vg + c2);
                acc += num / den;
                ++count;
            }
        }
        frame_mean_acc += acc / static_cast<double>(count);
    }
    return frame_mean_acc / K;
}

Eigen::MatrixXd time_activity(const GridImage& img,
                              const std::vector<std::array<double, 2>>& points) {
    Eigen::MatrixXd series(img.frames(), static_cast<long>(points.size()));
    for (std::size_t p = 0; p < points.size(); ++p) {
        const long n = img.pixel_index(points[p][0], points[p][1]);
        if (n < 0) throw std::invalid_argument("time_activity: point outside grid");
        for (int k = 0; k < img.frames(); ++k) series(k, static_cast<long>(p)) = img.values(n, k);
    }
    return series;
}

Eigen::MatrixXd time_activity(const SpaceTimeField& field, const DomainBox& box,
                              const std::vector<double>& times,
                              const std::vector<std::array<double, 2>>& points) {
    Eigen::MatrixXd series(static_cast<long>(times.size()), static_cast<long>(points.size()));
    for (std::size_t p = 0; p < points.size(); ++p) {
        if (!box.contains(points[p][0], points[p][1])) {
            throw std::invalid_argument("time_activity: point outside domain");
        }
        for (std::size_t k = 0; k < times.size(); ++k) {
            series(static_cast<long>(k), static_cast<long>(p)) =
                field.eval(points[p][0], points[p][1], times[k]);
        }
    }
    return series;
}

GridImage render_field(const SpaceTimeField& field, double fov_size, int pixels_per_side,
                       const std::vector<double>& times, int supersample) {
    if (supersample < 1) throw std::invalid_argument("render_field: supersample must be >= 1");
    GridImage img = make_grid_image(pixels_per_side, fov_size, times);
    const int ns = pixels_per_side;
    const int ss = supersample;
    const double pitch = img.pixel_pitch;
    const double half = 0.5 * fov_size;
    const double inv = 1.0 / (ss * ss);

    // Batched row-by-row so the field's vectorized path is used without a
    // large point buffer.
    const long row_pts = static_cast<long>(ns) * ss * ss;
    Eigen::Matrix3Xd pts(3, row_pts);
    Eigen::VectorXd vals;
    for (int k = 0; k < img.frames(); ++k) {
        const double t = times[static_cast<std::size_t>(k)];
        for (int iy = 0; iy < ns; ++iy) {
            long col = 0;
            for (int ix = 0; ix < ns; ++ix) {
                for (int b = 0; b < ss; ++b) {
                    const double y = -half + (iy + (b + 0.5) / ss) * pitch;
                    for (int a = 0; a < ss; ++a) {
                        pts(0, col) = -half + (ix + (a + 0.5) / ss) * pitch;
                        pts(1, col) = y;
                        pts(2, col) = t;
                        ++col;
                    }
                }
            }
            field.eval_batch(pts, vals);
            for (int ix = 0; ix < ns; ++ix) {
                img.values(static_cast<long>(iy) * ns + ix, k) =
                    vals.segment(static_cast<long>(ix) * ss * ss, ss * ss).sum() * inv;
            }
        }
    }
    return img;
}

GridImage render_field(const SpaceTimeField& field, const ImagingSystem& sys, int supersample) {
    return render_field(field, sys.fov_size_L, sys.pixels_per_side, frame_times(sys), supersample);
}

}  // namespace dynfield
