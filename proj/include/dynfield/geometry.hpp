#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace dynfield {

/// Rotating-ring tomographic acquisition with S evenly spaced sensors
/// that advance by a fixed angular offset between frames.
///
/// The field of view is the square [-L/2, L/2]^2; sensors sit on a circle
/// of radius aperture_R around the origin. Each sensor integrates the
/// object over concentric circular arcs (rings) of I radii.
struct ImagingSystem {
    double fov_size_L = 2.9;        ///< side length of the square field of view
    int pixels_per_side = 200;      ///< N_s, reconstruction grid resolution
    double aperture_R = 2.05;       ///< sensor ring radius
    int num_views = 4;              ///< S, sensors per frame
    int num_frames = 180;           ///< K
    int num_rings = 283;            ///< I, integration radii per sensor
    double view_offset_rad = 0.0;   ///< per-frame sensor rotation (stored in radians)
    double total_time_T = 5.0;      ///< acquisition duration
    int quadrature_points_Q = 512;  ///< samples per arc for the continuous operator
    double relative_noise = 0.025;  ///< noise level relative to max |data|

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;

    /// Hash of every geometry-determining field; keys operator caches and
    /// data file headers.
    std::uint64_t hash() const;

    int measurements_per_frame() const { return num_views * num_rings; }
};

/// Acquisition matching the reference full-scale protocol.
ImagingSystem paper_scale_system();

/// Reduced profile for fast experiments: 64x64 grid, 32 frames, 91 rings.
ImagingSystem desk_scale_system();

/// Degrees-to-radians helper for the view offset (configs specify degrees).
double view_offset_from_degrees(double deg);

/// Sensor location for 0-based frame and view indices:
/// theta = 2*pi*view/S + frame*view_offset, position = R*(cos, sin).
std::array<double, 2> sensor_position(const ImagingSystem& sys, int frame, int view);

/// Arc radii l_i = i * dl for i = 1..I with dl = (R + L/sqrt(2)) / I.
std::vector<double> ring_radii(const ImagingSystem& sys);

/// Frame times t_k = k * T / (K-1) for 0-based k; single frame maps to {0}.
std::vector<double> frame_times(const ImagingSystem& sys);

/// Space-time box [-L/2,L/2]^2 x [0,T] with the affine map onto [-1,1]^3
/// used by the neural field.
struct DomainBox {
    double half_extent = 1.45;  ///< L/2
    double total_time = 5.0;    ///< T

    std::array<double, 3> normalize(double x, double y, double t) const {
        return {x / half_extent, y / half_extent, 2.0 * t / total_time - 1.0};
    }
    std::array<double, 3> denormalize(double xn, double yn, double tn) const {
        return {xn * half_extent, yn * half_extent, (tn + 1.0) * 0.5 * total_time};
    }
    /// Per-axis derivative of the normalization map (d normalized / d physical).
    std::array<double, 3> scale() const { return {1.0 / half_extent, 1.0 / half_extent, 2.0 / total_time}; }
    bool contains(double x, double y) const {
        return x >= -half_extent && x <= half_extent && y >= -half_extent && y <= half_extent;
    }
    bool contains_time(double t) const { return t >= 0.0 && t <= total_time; }
    double volume() const { return 4.0 * half_extent * half_extent * total_time; }
};

DomainBox domain_of(const ImagingSystem& sys);

}  // namespace dynfield
