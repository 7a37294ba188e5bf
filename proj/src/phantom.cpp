#include "dynfield/phantom.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dynfield/rng.hpp"

namespace dynfield {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

bool EllipseComponent::contains(double x, double y, double t) const {
    const double s = std::sin(two_pi * freq_hz * t + phase_rad);
    const double cx = center0[0] + center_amp[0] * s;
    const double cy = center0[1] + center_amp[1] * s;
    const double ax = axes0[0] + axes_amp[0] * s;
    const double ay = axes0[1] + axes_amp[1] * s;
    const double ca = std::cos(angle_rad), sa = std::sin(angle_rad);
    const double dx = x - cx, dy = y - cy;
    const double u = ca * dx + sa * dy;
    const double v = -sa * dx + ca * dy;
    const double ru = u / ax, rv = v / ay;
    return ru * ru + rv * rv <= 1.0;
}

void EllipseComponent::validate(double max_extent) const {
    if (value < 0.0 || value > 1.0) throw std::invalid_argument("EllipseComponent: value must be in [0, 1]");
    if (freq_hz < 0.0) throw std::invalid_argument("EllipseComponent: freq_hz must be >= 0");
    for (int j = 0; j < 2; ++j) {
        if (!(axes0[j] - std::abs(axes_amp[j]) > 0.0))
            throw std::invalid_argument("EllipseComponent: axes collapse for some t");
    }
    const double worst_center = std::hypot(std::abs(center0[0]) + std::abs(center_amp[0]),
                                           std::abs(center0[1]) + std::abs(center_amp[1]));
    const double worst_axis = std::max(axes0[0] + std::abs(axes_amp[0]), axes0[1] + std::abs(axes_amp[1]));
    if (worst_center + worst_axis > max_extent)
        throw std::invalid_argument("EllipseComponent: support can leave the field of view");
}

DynamicPhantom::DynamicPhantom(std::vector<EllipseComponent> components, double fov_size, double total_time)
    : components_(std::move(components)), fov_size_(fov_size), total_time_(total_time) {
    if (!(fov_size_ > 0.0) || !(total_time_ > 0.0))
        throw std::invalid_argument("DynamicPhantom: fov_size and total_time must be positive");
    if (components_.empty()) throw std::invalid_argument("DynamicPhantom: needs at least one component");
    for (const auto& c : components_) c.validate(0.5 * fov_size_);
}

double DynamicPhantom::eval(double x, double y, double t) const {
    double v = 0.0;
    for (const auto& c : components_)
        if (c.contains(x, y, t)) v += c.value;
    return v;
}

DynamicPhantom phantom_default(std::uint64_t seed, double fov_size, double total_time) {
    Rng rng(hash_combine(seed, 0x7068616e746f6dULL));
    const double L = fov_size;
    // >= 3 cycles for the fast component, <= 1 cycle for the slow ones,
    // independent of the configured duration.
    const double fast = 4.0 / total_time;
    const double slow = 0.75 / total_time;
    auto jit = [&](double amp) { return rng.uniform(-amp, amp); };

    std::vector<EllipseComponent> comps;

    EllipseComponent body;
    body.value = 0.5;
    body.center0 = {0.0, 0.01 * L};
    body.axes0 = {0.42 * L, 0.34 * L};
    body.angle_rad = jit(0.05);
    comps.push_back(body);

    EllipseComponent heart;
    heart.value = 0.30;
    heart.center0 = {-0.10 * L + jit(0.01 * L), 0.10 * L + jit(0.01 * L)};
    heart.axes0 = {0.085 * L, 0.070 * L};
    heart.axes_amp = {0.022 * L, 0.018 * L};
    heart.angle_rad = 0.4 + jit(0.1);
    heart.freq_hz = fast;
    heart.phase_rad = rng.uniform(0.0, two_pi);
    comps.push_back(heart);

    EllipseComponent lung;
    lung.value = 0.18;
    lung.center0 = {0.10 * L + jit(0.01 * L), 0.05 * L};
    lung.axes0 = {0.16 * L, 0.11 * L};
    lung.center_amp = {0.0, 0.045 * L};
    lung.axes_amp = {0.012 * L, 0.008 * L};
    lung.angle_rad = -0.3 + jit(0.1);
    lung.freq_hz = slow;
    lung.phase_rad = rng.uniform(0.0, two_pi);
    comps.push_back(lung);

    EllipseComponent liver;
    liver.value = 0.22;
    liver.center0 = {0.02 * L, -0.16 * L + jit(0.01 * L)};
    liver.axes0 = {0.14 * L, 0.09 * L};
    liver.center_amp = {0.010 * L, 0.035 * L};
    liver.angle_rad = 0.1 + jit(0.1);
    liver.freq_hz = slow;
    liver.phase_rad = lung.phase_rad + 0.5;
    comps.push_back(liver);

    EllipseComponent kidney_l;
    kidney_l.value = 0.35;
    kidney_l.center0 = {-0.17 * L, -0.05 * L + jit(0.01 * L)};
    kidney_l.axes0 = {0.045 * L, 0.035 * L};
    kidney_l.center_amp = {0.012 * L, 0.030 * L};
    kidney_l.angle_rad = jit(0.2);
    kidney_l.freq_hz = slow;
    kidney_l.phase_rad = lung.phase_rad;
    comps.push_back(kidney_l);

    EllipseComponent kidney_r;
    kidney_r.value = 0.35;
    kidney_r.center0 = {0.19 * L, -0.02 * L + jit(0.01 * L)};
    kidney_r.axes0 = {0.045 * L, 0.035 * L};
    kidney_r.center_amp = {0.010 * L, 0.028 * L};
    kidney_r.angle_rad = jit(0.2);
    kidney_r.freq_hz = slow;
    kidney_r.phase_rad = lung.phase_rad + std::numbers::pi / 3.0;
    comps.push_back(kidney_r);

    EllipseComponent lesion;
    lesion.value = 0.30;
    lesion.center0 = {0.05 * L + jit(0.01 * L), 0.17 * L};
    lesion.axes0 = {0.035 * L, 0.030 * L};
    lesion.axes_amp = {0.012 * L, 0.010 * L};
    lesion.angle_rad = jit(0.3);
    lesion.freq_hz = fast;
    lesion.phase_rad = heart.phase_rad + rng.uniform(0.5, 1.5);
    comps.push_back(lesion);

    EllipseComponent spine;
    spine.value = 0.40;
    spine.center0 = {-0.01 * L, -0.27 * L};
    spine.axes0 = {0.030 * L, 0.028 * L};
    spine.angle_rad = 0.0;
    comps.push_back(spine);

    return DynamicPhantom(std::move(comps), fov_size, total_time);
}

GridImage render(const DynamicPhantom& phantom, int pixels_per_side,
                 const std::vector<double>& times, int supersample) {
    if (supersample < 1) throw std::invalid_argument("render: supersample must be >= 1");
    GridImage img = make_grid_image(pixels_per_side, phantom.fov_size(), times);
    const int ss = supersample;
    const double inv = 1.0 / (ss * ss);
    const double pitch = img.pixel_pitch;
    const double half = 0.5 * phantom.fov_size();
    for (int k = 0; k < img.frames(); ++k) {
        const double t = times[static_cast<std::size_t>(k)];
        for (int iy = 0; iy < pixels_per_side; ++iy) {
            for (int ix = 0; ix < pixels_per_side; ++ix) {
                double acc = 0.0;
                for (int b = 0; b < ss; ++b) {
                    const double y = -half + (iy + (b + 0.5) / ss) * pitch;
                    for (int a = 0; a < ss; ++a) {
                        const double x = -half + (ix + (a + 0.5) / ss) * pitch;
                        acc += phantom.eval(x, y, t);
                    }
                }
                img.values(static_cast<long>(iy) * pixels_per_side + ix, k) = acc * inv;
            }
        }
    }
    return img;
}

}  // namespace dynfield
