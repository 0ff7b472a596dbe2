#include "ldct/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ldct/errors.hpp"

namespace ldct {

void Geometry::validate() const {
    if (n_channels < 1) throw ConfigError("geometry: n_channels must be >= 1");
    if (n_views < 1) throw ConfigError("geometry: n_views must be >= 1");
    if (image_rows < 1 || image_cols < 1) throw ConfigError("geometry: image dimensions must be >= 1");
    if (!(pixel_size > 0.0)) throw ConfigError("geometry: pixel_size must be > 0");
    if (!(detector_spacing > 0.0)) throw ConfigError("geometry: detector_spacing must be > 0");
    if (!(angular_range > 0.0)) throw ConfigError("geometry: angular_range must be > 0");
    if (mode == ScanMode::fan_arc) {
        if (!(source_to_iso > 0.0 && source_to_iso < source_to_detector)) {
            throw ConfigError("geometry: fan mode needs 0 < source_to_iso < source_to_detector");
        }
        const double half_fan = 0.5 * (n_channels - 1 + 2.0 * std::abs(channel_offset)) *
                                detector_spacing / source_to_detector;
        if (half_fan >= 0.5 * std::numbers::pi) throw ConfigError("geometry: fan angle must be below 180 degrees");
    }
}

double Geometry::channel_position(int channel) const {
    const double u = channel - 0.5 * (n_channels - 1) + channel_offset;
    if (mode == ScanMode::fan_arc) return u * detector_spacing / source_to_detector;
    return u * detector_spacing;
}

Ray Geometry::ray(int view, int channel) const {
    const double theta = view_angle(view);
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    if (mode == ScanMode::parallel) {
        const double t = channel_position(channel);
        const double half_w = 0.5 * pixel_size * std::hypot(image_rows, image_cols);
        const double reach = 2.0 * (half_w + std::hypot(offset_x, offset_y)) + std::abs(t) + 1.0;
        const double px = t * ct, py = t * st;
        const double dx = -st, dy = ct;
        return {px - reach * dx, py - reach * dy, px + reach * dx, py + reach * dy};
    }
    const double gamma = channel_position(channel);
    const double sx = source_to_iso * ct, sy = source_to_iso * st;
    // central ray points from the source to the isocentre, rotated by gamma
    const double cx = -ct, cy = -st;
    const double cg = std::cos(gamma), sg = std::sin(gamma);
    const double dx = cg * cx - sg * cy;
    const double dy = sg * cx + cg * cy;
    return {sx, sy, sx + source_to_detector * dx, sy + source_to_detector * dy};
}

Geometry Geometry::refined(int factor) const {
    if (factor < 1) throw ValidationError("geometry: refinement factor must be >= 1");
    Geometry g = *this;
    g.image_rows *= factor;
    g.image_cols *= factor;
    g.pixel_size /= factor;
    return g;
}

Geometry Geometry::from_config(const KeyValueConfig& cfg) {
    cfg.require_known({"mode", "n_channels", "n_views", "detector_spacing", "source_to_iso",
                       "source_to_detector", "angular_range_deg", "start_angle_deg", "channel_offset",
                       "image_rows", "image_cols", "pixel_size", "offset_x", "offset_y"});
    Geometry g;
    const std::string mode = cfg.get_string("mode", "parallel");
    if (mode == "parallel") {
        g.mode = ScanMode::parallel;
    } else if (mode == "fan" || mode == "fan_arc" || mode == "fan-arc") {
        g.mode = ScanMode::fan_arc;
    } else {
        throw ConfigError("geometry: unknown mode '" + mode + "'");
    }
    constexpr double deg = std::numbers::pi / 180.0;
    g.n_channels = static_cast<int>(cfg.get_int("n_channels", 1));
    g.n_views = static_cast<int>(cfg.get_int("n_views", 1));
    g.detector_spacing = cfg.get_double("detector_spacing", 1.0);
    g.source_to_iso = cfg.get_double("source_to_iso", 0.0);
    g.source_to_detector = cfg.get_double("source_to_detector", 0.0);
    g.angular_range = cfg.get_double("angular_range_deg", g.mode == ScanMode::fan_arc ? 360.0 : 180.0) * deg;
    g.start_angle = cfg.get_double("start_angle_deg", 0.0) * deg;
    g.channel_offset = cfg.get_double("channel_offset", 0.0);
    g.image_rows = static_cast<int>(cfg.get_int("image_rows", 1));
    g.image_cols = static_cast<int>(cfg.get_int("image_cols", g.image_rows));
    g.pixel_size = cfg.get_double("pixel_size", 1.0);
    g.offset_x = cfg.get_double("offset_x", 0.0);
    g.offset_y = cfg.get_double("offset_y", 0.0);
    g.validate();
    return g;
}

Geometry Geometry::load(const std::filesystem::path& path) {
    return from_config(KeyValueConfig::load(path));
}

std::string Geometry::to_config() const {
    constexpr double deg = 180.0 / std::numbers::pi;
    std::ostringstream out;
    out.precision(17);
    out << "mode = " << (mode == ScanMode::fan_arc ? "fan" : "parallel") << "\n"
        << "n_channels = " << n_channels << "\n"
        << "n_views = " << n_views << "\n"
        << "detector_spacing = " << detector_spacing << "\n";
    if (mode == ScanMode::fan_arc) {
        out << "source_to_iso = " << source_to_iso << "\n"
            << "source_to_detector = " << source_to_detector << "\n";
    }
    out << "angular_range_deg = " << angular_range * deg << "\n"
        << "start_angle_deg = " << start_angle * deg << "\n"
        << "channel_offset = " << channel_offset << "\n"
        << "image_rows = " << image_rows << "\n"
        << "image_cols = " << image_cols << "\n"
        << "pixel_size = " << pixel_size << "\n"
        << "offset_x = " << offset_x << "\n"
        << "offset_y = " << offset_y << "\n";
    return out.str();
}

std::vector<int> bit_reversal_order(int n) {
    std::vector<int> order;
    if (n <= 0) return order;
    int bits = 0;
    while ((1 << bits) < n) ++bits;
    for (int i = 0; i < (1 << bits); ++i) {
        int r = 0;
        for (int b = 0; b < bits; ++b) {
            if (i & (1 << b)) r |= 1 << (bits - 1 - b);
        }
        if (r < n) order.push_back(r);
    }
    return order;
}

SubsetPartition partition_subsets(const Geometry& geo, int n_subsets) {
    if (n_subsets < 1) throw ValidationError("partition_subsets: need at least one subset");
    if (n_subsets > geo.n_views) {
        throw ValidationError("partition_subsets: " + std::to_string(n_subsets) + " subsets exceed " +
                              std::to_string(geo.n_views) + " views");
    }
    SubsetPartition p;
    p.views.resize(n_subsets);
    for (int v = 0; v < geo.n_views; ++v) p.views[v % n_subsets].push_back(v);
    p.order = bit_reversal_order(n_subsets);
    return p;
}

}  // namespace ldct
