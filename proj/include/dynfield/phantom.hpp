#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dynfield/field.hpp"
#include "dynfield/grid_image.hpp"

namespace dynfield {

/// One elliptical feature with sinusoidal motion. The center translates
/// and the semi-axes dilate with a shared frequency and phase:
///   center(t) = center0 + center_amp * sin(2*pi*freq*t + phase)
///   axes(t)   = axes0   + axes_amp   * sin(2*pi*freq*t + phase)
/// Values add where components overlap.
struct EllipseComponent {
    double value = 0.0;                      ///< additive intensity, in [0, 1]
    std::array<double, 2> center0{0, 0};
    std::array<double, 2> center_amp{0, 0};  ///< translation amplitude
    std::array<double, 2> axes0{0, 0};       ///< semi-axes at sin() = 0
    std::array<double, 2> axes_amp{0, 0};    ///< dilation amplitude
    double angle_rad = 0.0;                  ///< fixed orientation
    double freq_hz = 0.0;                    ///< motion frequency (0 = static)
    double phase_rad = 0.0;

    bool contains(double x, double y, double t) const;
    /// Axes must stay positive and the support must stay within a disk of
    /// the given radius about the origin for all t.
    void validate(double max_extent) const;
};

/// Procedural dynamic object: a stationary background ellipse plus a
/// handful of moving organ-like components on two time scales (a fast
/// pulsing one and slow drifting ones).
class DynamicPhantom final : public SpaceTimeField {
  public:
    DynamicPhantom(std::vector<EllipseComponent> components, double fov_size, double total_time);

    double eval(double x, double y, double t) const override;

    const std::vector<EllipseComponent>& components() const { return components_; }
    double fov_size() const { return fov_size_; }
    double total_time() const { return total_time_; }

  private:
    std::vector<EllipseComponent> components_;
    double fov_size_;
    double total_time_;
};

/// Deterministic default layout for a given seed. The seed applies small
/// jitters to positions, orientations and phases; the component count and
/// the two motion time scales (>= 3 cycles and <= 1 cycle over the total
/// time) are fixed by construction.
DynamicPhantom phantom_default(std::uint64_t seed, double fov_size, double total_time);

/// Rasterize at the given resolution and frame times. Each pixel value is
/// the average of eval() over supersample^2 equispaced sub-pixel points.
GridImage render(const DynamicPhantom& phantom, int pixels_per_side,
                 const std::vector<double>& times, int supersample);

}  // namespace dynfield
