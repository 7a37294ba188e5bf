#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>

#include "dynfield/geometry.hpp"

namespace dynfield {

/// Measured data: one column per frame, rows indexed m = view*I + ring.
struct Sinogram {
    Eigen::MatrixXd data;  ///< (S*I) x K
    double sigma = 0.0;    ///< noise standard deviation in data units
    int num_views = 0;
    int num_rings = 0;
    std::string system_hash;  ///< hash of the acquiring system, "" if unknown
    std::string config_hash;   ///< hash of the producing config, "" if none

    int num_frames() const { return static_cast<int>(data.cols()); }
    long sample_count() const { return static_cast<long>(data.size()); }
    void validate() const;
};

Sinogram make_sinogram(const ImagingSystem& sys);

/// Adds i.i.d. zero-mean Gaussian noise with sigma = relative_noise times
/// the max-abs of the clean data. The per-entry draws are keyed on
/// (seed, frame, entry), so two noise levels with one seed share the same
/// underlying standard normal field.
Sinogram add_noise(const Sinogram& clean, double relative_noise, std::uint64_t seed);

/// Single file: text header (dims, sigma, system hash) + float64 frames.
void save_sinogram(const Sinogram& s, const std::filesystem::path& path);
Sinogram load_sinogram(const std::filesystem::path& path);

}  // namespace dynfield
