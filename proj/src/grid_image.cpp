#include "dynfield/grid_image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dynfield/io.hpp"

namespace dynfield {

long GridImage::pixel_index(double x, double y) const {
    const double half = 0.5 * fov_size();
    if (x < -half || x > half || y < -half || y > half) return -1;
    auto clamp_idx = [&](double v) {
        const long i = static_cast<long>(std::floor((v + half) / pixel_pitch));
        return std::clamp(i, 0L, static_cast<long>(pixels_per_side) - 1);
    };
    return clamp_idx(y) * pixels_per_side + clamp_idx(x);
}

void GridImage::validate() const {
    if (pixels_per_side < 1) throw std::invalid_argument("GridImage: pixels_per_side must be >= 1");
    if (!(pixel_pitch > 0.0)) throw std::invalid_argument("GridImage: pixel_pitch must be positive");
    if (times.empty()) throw std::invalid_argument("GridImage: needs at least one frame");
    if (values.rows() != pixel_count() || values.cols() != frames())
        throw std::invalid_argument("GridImage: value matrix shape mismatch");
}

GridImage make_grid_image(int pixels_per_side, double fov_size, const std::vector<double>& times) {
    GridImage img;
    img.pixels_per_side = pixels_per_side;
    img.pixel_pitch = fov_size / pixels_per_side;
    img.times = times;
    img.values = Eigen::MatrixXd::Zero(img.pixel_count(), img.frames());
    img.validate();
    return img;
}

void save_grid_image(const GridImage& img, const std::filesystem::path& base) {
    img.validate();
    io::require_little_endian();

    io::TextHeader h;
    h.set("format", std::string("gridimage/1"));
    h.set("pixels_per_side", img.pixels_per_side);
    h.set("frames", img.frames());
    h.set("pixel_pitch", img.pixel_pitch);
    h.set("config_hash", img.config_hash.empty() ? std::string("none") : img.config_hash);
    std::string times_str;
    for (std::size_t k = 0; k < img.times.size(); ++k) {
        if (k) times_str += ' ';
        times_str += io::format_double(img.times[k]);
    }
    h.set("times", times_str);

    auto hdr_path = base;
    hdr_path += ".hdr";
    auto os_hdr = io::open_out(hdr_path, false);
    h.write(os_hdr);

    auto img_path = base;
    img_path += ".img";
    auto os_img = io::open_out(img_path, true);
    std::vector<float> buf(static_cast<std::size_t>(img.values.size()));
    for (Eigen::Index i = 0; i < img.values.size(); ++i)
        buf[static_cast<std::size_t>(i)] = static_cast<float>(*(img.values.data() + i));
    io::write_f32(os_img, buf.data(), buf.size());
}

GridImage load_grid_image(const std::filesystem::path& base) {
    io::require_little_endian();
    auto hdr_path = base;
    hdr_path += ".hdr";
    auto is_hdr = io::open_in(hdr_path, false);
    const auto h = io::TextHeader::read(is_hdr);
    if (h.get("format") != "gridimage/1") throw std::runtime_error("load_grid_image: unknown format");

    GridImage img;
    img.pixels_per_side = static_cast<int>(h.get_int("pixels_per_side"));
    const int frames = static_cast<int>(h.get_int("frames"));
    img.pixel_pitch = h.get_double("pixel_pitch");
    img.config_hash = h.get("config_hash");
    if (img.config_hash == "none") img.config_hash.clear();

    {
        const std::string& ts = h.get("times");
        std::size_t pos = 0;
        while (pos < ts.size()) {
            std::size_t next = ts.find(' ', pos);
            if (next == std::string::npos) next = ts.size();
            img.times.push_back(std::stod(ts.substr(pos, next - pos)));
            pos = next + 1;
        }
    }
    if (static_cast<int>(img.times.size()) != frames)
        throw std::runtime_error("load_grid_image: frame count / times mismatch");

    auto img_path = base;
    img_path += ".img";
    auto is_img = io::open_in(img_path, true);
    const std::size_t n = static_cast<std::size_t>(img.pixel_count()) * static_cast<std::size_t>(frames);
    std::vector<float> buf(n);
    io::read_f32(is_img, buf.data(), n);
    img.values.resize(img.pixel_count(), frames);
    for (std::size_t i = 0; i < n; ++i) *(img.values.data() + i) = static_cast<double>(buf[i]);
    img.validate();
    return img;
}

void export_pgm_frames(const GridImage& img, const std::filesystem::path& dir,
                       double window_min, double window_max) {
    img.validate();
    double lo = window_min;
    double hi = window_max;
    if (!(hi > lo)) {
        lo = img.values.minCoeff();
        hi = img.values.maxCoeff();
        if (!(hi > lo)) hi = lo + 1.0;
    }
    const double scale = 255.0 / (hi - lo);
    std::filesystem::create_directories(dir);
    const int ns = img.pixels_per_side;
    for (int k = 0; k < img.frames(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04d.pgm", k);
        auto os = io::open_out(dir / name, true);
        os << "P5\n" << ns << ' ' << ns << "\n255\n";
        std::vector<unsigned char> row(static_cast<std::size_t>(ns));
        // PGM scans top to bottom; grid row 0 is the bottom of the image.
        for (int iy = ns - 1; iy >= 0; --iy) {
            for (int ix = 0; ix < ns; ++ix) {
                const double v = img.values(static_cast<long>(iy) * ns + ix, k);
                const double u = std::clamp((v - lo) * scale, 0.0, 255.0);
                row[static_cast<std::size_t>(ix)] = static_cast<unsigned char>(std::lround(u));
            }
            os.write(reinterpret_cast<const char*>(row.data()), ns);
        }
        if (!os) throw std::runtime_error("export_pgm_frames: write failed");
    }
}

}  // namespace dynfield
