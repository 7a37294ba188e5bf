#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "dynfield/field.hpp"
#include "dynfield/geometry.hpp"
#include "dynfield/grid_image.hpp"

namespace dynfield {

/// Rank-r factorization F ~ spatial * temporal with explicit storage
/// cost r * (N + K).
struct SemiseparableApprox {
    Eigen::MatrixXd spatial;   ///< N x r
    Eigen::MatrixXd temporal;  ///< r x K
    int rank_r = 0;

    Eigen::MatrixXd reconstruction() const { return spatial * temporal; }
    long param_count() const { return rank_r * (spatial.rows() + temporal.cols()); }
};

/// Best rank-r approximation in the Frobenius norm, computed through the
/// frames x frames Gram eigendecomposition.
SemiseparableApprox truncated_svd(const Eigen::MatrixXd& values, int rank_r);

/// All min(N, K) singular values, descending.
Eigen::VectorXd singular_spectrum(const Eigen::MatrixXd& values);

/// |F - ref|_F / |ref|_F.
double rrmse(const Eigen::MatrixXd& values, const Eigen::MatrixXd& reference);

/// Mean over frames of the mean local structural similarity computed on
/// fully interior windows. The intensity range is taken from the
/// reference over the whole sequence.
double ssim(const Eigen::MatrixXd& values, const Eigen::MatrixXd& reference, int pixels_per_side,
            int window = 11, double window_std = 1.5, double k1 = 0.01, double k2 = 0.03);

/// Value-vs-time series at fixed spatial points, one column per point.
Eigen::MatrixXd time_activity(const GridImage& img, const std::vector<std::array<double, 2>>& points);
Eigen::MatrixXd time_activity(const SpaceTimeField& field, const DomainBox& box,
                              const std::vector<double>& times,
                              const std::vector<std::array<double, 2>>& points);

/// Rasterizes a field on the usual square grid, averaging supersample^2
/// sub-pixel evaluations per pixel.
GridImage render_field(const SpaceTimeField& field, double fov_size, int pixels_per_side,
                       const std::vector<double>& times, int supersample = 1);
GridImage render_field(const SpaceTimeField& field, const ImagingSystem& sys, int supersample = 1);

}  // namespace dynfield
