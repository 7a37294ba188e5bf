#pragma once

#include <Eigen/SparseCore>
#include <filesystem>
#include <string>
#include <vector>

#include "dynfield/geometry.hpp"
#include "dynfield/grid_image.hpp"
#include "dynfield/sinogram.hpp"

namespace dynfield {

/// Discrete-to-discrete transform: one sparse matrix per frame mapping a
/// flattened pixel image (row-major pixel index) to the per-arc line
/// integrals. Entries are the approximate length of each arc inside each
/// pixel; matrices are stored compressed column-major.
struct SparseCrtOperator {
    std::vector<Eigen::SparseMatrix<double>> frames;
    int pixels_per_side = 0;
    double pixel_pitch = 0.0;
    int num_views = 0;
    int num_rings = 0;
    std::string system_hash;
    int subdivision_factor = 4;  ///< samples per pixel pitch along the arc

    int rows() const { return num_views * num_rings; }
    int cols() const { return pixels_per_side * pixels_per_side; }
    void validate() const;
};

/// Builds by walking each arc at angular steps no longer than
/// pitch / subdivision_factor and crediting each step's length to the
/// pixel under its midpoint.
SparseCrtOperator build_sparse_crt(const ImagingSystem& sys, int pixels_per_side,
                                   int subdivision_factor = 4);

Eigen::VectorXd sparse_apply(const SparseCrtOperator& op, const GridImage& img, int frame);
Sinogram sparse_apply_all(const SparseCrtOperator& op, const GridImage& img);
Eigen::VectorXd sparse_adjoint(const SparseCrtOperator& op, const Eigen::VectorXd& data, int frame);

void save_operator(const SparseCrtOperator& op, const std::filesystem::path& path);
SparseCrtOperator load_operator(const std::filesystem::path& path);

/// Cache filename is derived from the system hash and grid shape; builds
/// and persists on miss.
SparseCrtOperator load_or_build(const ImagingSystem& sys, int pixels_per_side,
                                const std::filesystem::path& cache_dir);

}  // namespace dynfield
