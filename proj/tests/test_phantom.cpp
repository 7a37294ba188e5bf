#include <doctest.h>

#include <stdexcept>

#include "dynfield/analysis.hpp"
#include "dynfield/geometry.hpp"
#include "dynfield/phantom.hpp"

using namespace dynfield;

TEST_CASE("default phantom is deterministic in the seed") {
    const DynamicPhantom a = phantom_default(0, 2.9, 5.0);
    const DynamicPhantom b = phantom_default(0, 2.9, 5.0);
    REQUIRE(a.components().size() == b.components().size());
    for (std::size_t i = 0; i < a.components().size(); ++i) {
        const auto& ca = a.components()[i];
        const auto& cb = b.components()[i];
        CHECK(ca.value == cb.value);
        CHECK(ca.center0 == cb.center0);
        CHECK(ca.axes0 == cb.axes0);
        CHECK(ca.angle_rad == cb.angle_rad);
        CHECK(ca.freq_hz == cb.freq_hz);
        CHECK(ca.phase_rad == cb.phase_rad);
    }
    const DynamicPhantom c = phantom_default(1, 2.9, 5.0);
    bool any_diff = false;
    for (std::size_t i = 0; i < std::min(a.components().size(), c.components().size()); ++i)
        any_diff |= a.components()[i].center0 != c.components()[i].center0;
    CHECK(any_diff);
}

TEST_CASE("phantom values are nonnegative on a dense probe grid") {
    const DynamicPhantom ph = phantom_default(0, 2.9, 5.0);
    double maxv = 0.0;
    for (int it = 0; it < 64; ++it)
        for (int iy = 0; iy < 64; ++iy)
            for (int ix = 0; ix < 64; ++ix) {
                const double x = -1.45 + 2.9 * (ix + 0.5) / 64;
                const double y = -1.45 + 2.9 * (iy + 0.5) / 64;
                const double t = 5.0 * it / 63.0;
                const double v = ph.eval(x, y, t);
                CHECK(v >= 0.0);
                maxv = std::max(maxv, v);
            }
    CHECK(maxv > 0.0);
}

TEST_CASE("rendered sequence is genuinely dynamic, not low rank") {
    const ImagingSystem sys = desk_scale_system();
    const DynamicPhantom ph = phantom_default(0, sys.fov_size_L, sys.total_time_T);
    const GridImage img = render(ph, 64, frame_times(sys), 1);
    const Eigen::VectorXd s = singular_spectrum(img.values);
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] > 1e-6 * s[0]) ++rank;
    CHECK(rank > 5);
}

TEST_CASE("support stays inside the inscribed disk for all times") {
    const DynamicPhantom ph = phantom_default(0, 2.9, 5.0);
    // the square's corner regions lie outside the allowed disk and must stay empty
    for (int it = 0; it <= 20; ++it) {
        const double t = 5.0 * it / 20.0;
        for (int k = 0; k < 100; ++k) {
            const double ang = 6.283185307179586 * k / 100;
            const double r = 1.46 + 0.5 * (k % 7) / 7.0;
            const double x = r * std::cos(ang);
            const double y = r * std::sin(ang);
            if (std::abs(x) <= 1.45 && std::abs(y) <= 1.45) CHECK(ph.eval(x, y, t) == 0.0);
        }
    }
    SUBCASE("a component leaving the square is rejected") {
        EllipseComponent c;
        c.value = 0.5;
        c.center0 = {1.0, 0.0};
        c.center_amp = {0.5, 0.0};
        c.axes0 = {0.3, 0.3};
        CHECK_THROWS_AS(DynamicPhantom({c}, 2.9, 5.0), std::invalid_argument);
    }
    SUBCASE("an ellipse whose axes can collapse is rejected") {
        EllipseComponent c;
        c.value = 0.5;
        c.axes0 = {0.2, 0.2};
        c.axes_amp = {0.25, 0.0};
        CHECK_THROWS_AS(DynamicPhantom({c}, 2.9, 5.0), std::invalid_argument);
    }
}

TEST_CASE("ellipse motion follows the shared sinusoid") {
    EllipseComponent c;
    c.value = 1.0;
    c.center0 = {0.0, 0.0};
    c.center_amp = {0.3, 0.0};
    c.axes0 = {0.2, 0.2};
    c.freq_hz = 0.25;  // sin(2 pi f t) = 1 at t = 1
    // at t=1 center sits at (0.3, 0): x=0.45 inside, x=0.05 outside
    CHECK(c.contains(0.45, 0.0, 1.0));
    CHECK_FALSE(c.contains(0.05, 0.0, 1.0));
    // at t=0 center is back at the origin
    CHECK(c.contains(0.05, 0.0, 0.0));
    CHECK_FALSE(c.contains(0.45, 0.0, 0.0));
}

TEST_CASE("rendering averages sub-pixel samples") {
    // one static component covering exactly the left half plane x < 0
    EllipseComponent c;
    c.value = 1.0;
    c.center0 = {-0.725, 0.0};
    c.axes0 = {0.725, 0.725};
    const DynamicPhantom ph({c}, 2.9, 5.0);
    const GridImage img1 = render(ph, 16, {0.0}, 1);
    const GridImage img4 = render(ph, 16, {0.0}, 4);
    // supersampling must not change pixels far from the boundary
    CHECK(img1.values(8 * 16 + 1, 0) == img4.values(8 * 16 + 1, 0));
    // boundary pixels move toward fractional coverage
    bool any_fractional = false;
    for (int i = 0; i < 16 * 16; ++i)
        any_fractional |= img4.values(i, 0) > 0.0 && img4.values(i, 0) < 1.0;
    CHECK(any_fractional);
}
