#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

namespace dynfield {

/// Dynamic image on a square pixel grid: one column per frame, pixels in
/// row-major order (index = iy * N_s + ix). Pixel (ix, iy) is centered at
/// (-L/2 + (ix+0.5)*pitch, -L/2 + (iy+0.5)*pitch).
///
/// Persisted as a raw little-endian float32 volume next to a text header
/// (".img" payload, ".hdr" sidecar) carrying dimensions, pitch, frame
/// times and the producing config hash.
struct GridImage {
    int pixels_per_side = 0;
    double pixel_pitch = 0.0;
    std::vector<double> times;  ///< one entry per frame
    Eigen::MatrixXd values;     ///< (N_s*N_s) x K
    std::string config_hash;    ///< hex hash of the producing config ("" if none)

    int frames() const { return static_cast<int>(times.size()); }
    long pixel_count() const { return static_cast<long>(pixels_per_side) * pixels_per_side; }
    double fov_size() const { return pixel_pitch * pixels_per_side; }

    double pixel_center_x(int ix) const { return -0.5 * fov_size() + (ix + 0.5) * pixel_pitch; }
    double pixel_center_y(int iy) const { return -0.5 * fov_size() + (iy + 0.5) * pixel_pitch; }

    /// Row-major pixel index of the pixel containing (x, y); -1 if outside.
    long pixel_index(double x, double y) const;

    void validate() const;
};

GridImage make_grid_image(int pixels_per_side, double fov_size, const std::vector<double>& times);

/// Writes base.img (float32 payload) and base.hdr (text sidecar).
void save_grid_image(const GridImage& img, const std::filesystem::path& base);
GridImage load_grid_image(const std::filesystem::path& base);

/// 8-bit grayscale PGM export, one file per frame ("frame_0000.pgm", ...).
/// The window defaults to the (min, max) over the whole sequence so frames
/// share one intensity scale; pass an explicit window to pin it.
void export_pgm_frames(const GridImage& img, const std::filesystem::path& dir,
                       double window_min = 0.0, double window_max = -1.0);

}  // namespace dynfield
