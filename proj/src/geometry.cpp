#include "dynfield/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dynfield/io.hpp"

namespace dynfield {

void ImagingSystem::validate() const {
    if (!(fov_size_L > 0.0)) throw std::invalid_argument("ImagingSystem: fov_size_L must be positive");
    // Sensors must sit outside the reconstructed object. The full-scale
    // protocol places them at R = 2.05 with L = 2.9, which clears the
    // inscribed disk of the field of view but not its corners, so the
    // bound is against L/2, not the half-diagonal.
    if (!(aperture_R > fov_size_L / 2.0))
        throw std::invalid_argument("ImagingSystem: aperture_R must exceed fov_size_L/2");
    if (pixels_per_side < 2) throw std::invalid_argument("ImagingSystem: pixels_per_side must be >= 2");
    if (num_views < 1) throw std::invalid_argument("ImagingSystem: num_views must be >= 1");
    if (num_frames < 1) throw std::invalid_argument("ImagingSystem: num_frames must be >= 1");
    if (num_rings < 1) throw std::invalid_argument("ImagingSystem: num_rings must be >= 1");
    if (quadrature_points_Q < 4) throw std::invalid_argument("ImagingSystem: quadrature_points_Q must be >= 4");
    if (!(total_time_T > 0.0)) throw std::invalid_argument("ImagingSystem: total_time_T must be positive");
    if (relative_noise < 0.0) throw std::invalid_argument("ImagingSystem: relative_noise must be >= 0");
    if (!std::isfinite(view_offset_rad)) throw std::invalid_argument("ImagingSystem: view_offset_rad must be finite");
}

std::uint64_t ImagingSystem::hash() const {
    std::string s;
    s += io::format_double(fov_size_L) + '|';
    s += io::format_int(pixels_per_side) + '|';
    s += io::format_double(aperture_R) + '|';
    s += io::format_int(num_views) + '|';
    s += io::format_int(num_frames) + '|';
    s += io::format_int(num_rings) + '|';
    s += io::format_double(view_offset_rad) + '|';
    s += io::format_double(total_time_T) + '|';
    s += io::format_int(quadrature_points_Q) + '|';
    s += io::format_double(relative_noise);
    return io::fnv1a64(s);
}

double view_offset_from_degrees(double deg) { return deg * std::numbers::pi / 180.0; }

ImagingSystem paper_scale_system() {
    ImagingSystem sys;
    sys.fov_size_L = 2.9;
    sys.pixels_per_side = 200;
    sys.aperture_R = 2.05;
    sys.num_views = 4;
    sys.num_frames = 180;
    sys.num_rings = 283;
    sys.view_offset_rad = view_offset_from_degrees(2.0);
    sys.total_time_T = 5.0;
    sys.quadrature_points_Q = 512;
    sys.relative_noise = 0.025;
    sys.validate();
    return sys;
}

ImagingSystem desk_scale_system() {
    ImagingSystem sys;
    sys.fov_size_L = 2.9;
    sys.pixels_per_side = 64;
    sys.aperture_R = 2.05;
    sys.num_views = 4;
    sys.num_frames = 32;
    sys.num_rings = 91;
    sys.view_offset_rad = view_offset_from_degrees(2.0);
    sys.total_time_T = 5.0;
    sys.quadrature_points_Q = 256;
    sys.relative_noise = 0.025;
    sys.validate();
    return sys;
}

std::array<double, 2> sensor_position(const ImagingSystem& sys, int frame, int view) {
    if (frame < 0 || frame >= sys.num_frames) throw std::invalid_argument("sensor_position: frame out of range");
    if (view < 0 || view >= sys.num_views) throw std::invalid_argument("sensor_position: view out of range");
    const double theta =
        2.0 * std::numbers::pi * static_cast<double>(view) / static_cast<double>(sys.num_views) +
        static_cast<double>(frame) * sys.view_offset_rad;
    return {sys.aperture_R * std::cos(theta), sys.aperture_R * std::sin(theta)};
}

std::vector<double> ring_radii(const ImagingSystem& sys) {
    const double dl = (sys.aperture_R + sys.fov_size_L / std::numbers::sqrt2) / static_cast<double>(sys.num_rings);
    std::vector<double> radii(static_cast<std::size_t>(sys.num_rings));
    for (int i = 0; i < sys.num_rings; ++i) radii[static_cast<std::size_t>(i)] = static_cast<double>(i + 1) * dl;
    return radii;
}

std::vector<double> frame_times(const ImagingSystem& sys) {
    std::vector<double> times(static_cast<std::size_t>(sys.num_frames));
    if (sys.num_frames == 1) {
        times[0] = 0.0;
        return times;
    }
    for (int k = 0; k < sys.num_frames; ++k)
        times[static_cast<std::size_t>(k)] =
            static_cast<double>(k) * sys.total_time_T / static_cast<double>(sys.num_frames - 1);
    return times;
}

DomainBox domain_of(const ImagingSystem& sys) {
    return DomainBox{sys.fov_size_L / 2.0, sys.total_time_T};
}

}  // namespace dynfield
