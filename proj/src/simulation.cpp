#include "ldct/simulation.hpp"

#include <cmath>
#include <numbers>

#include "ldct/image_io.hpp"
#include "ldct/projector.hpp"
#include "ldct/rng.hpp"

namespace ldct {

bool Ellipse::contains(double x, double y) const {
    const double c = std::cos(angle), s = std::sin(angle);
    const double px = x - center_x, py = y - center_y;
    const double u = c * px + s * py;
    const double v = -s * px + c * py;
    return (u * u) / (semi_axis_x * semi_axis_x) + (v * v) / (semi_axis_y * semi_axis_y) <= 1.0;
}

double Ellipse::coverage(double x, double y) const {
    if (!(edge_width > 0.0)) return contains(x, y) ? 1.0 : 0.0;
    const double c = std::cos(angle), s = std::sin(angle);
    const double px = x - center_x, py = y - center_y;
    const double u = (c * px + s * py) / semi_axis_x;
    const double v = (-s * px + c * py) / semi_axis_y;
    const double rho = std::hypot(u, v);
    // first-order distance to the boundary: (rho - 1) / |grad rho|
    double dist = 0.0;
    if (rho > 0.0) {
        const double gx = u / (semi_axis_x * rho), gy = v / (semi_axis_y * rho);
        dist = (rho - 1.0) / std::hypot(gx, gy);
    } else {
        dist = -std::min(semi_axis_x, semi_axis_y);
    }
    const double h = 0.5 * edge_width;
    if (dist <= -h) return 1.0;
    if (dist >= h) return 0.0;
    return 0.5 * (1.0 - std::sin(0.5 * std::numbers::pi * dist / h));
}

Phantom make_phantom(const std::vector<Ellipse>& ellipses, int rows, int cols, double pixel_size, HuScale hu) {
    return make_phantom(ellipses, {}, rows, cols, pixel_size, hu);
}

Phantom make_phantom(const std::vector<Ellipse>& ellipses, const std::vector<Blob>& blobs, int rows, int cols,
                     double pixel_size, HuScale hu) {
    if (rows < 1 || cols < 1 || !(pixel_size > 0.0)) throw ValidationError("phantom: invalid grid");
    Phantom ph{"ellipses", Image(rows, cols, pixel_size), hu};
    for (const auto& e : ellipses) {
        if (!(e.semi_axis_x > 0.0 && e.semi_axis_y > 0.0)) throw ValidationError("phantom: ellipse axes must be > 0");
    }
    for (const auto& b : blobs) {
        if (!(b.sigma > 0.0)) throw ValidationError("phantom: blob width must be > 0");
    }
    auto x_of = [&](int c) { return (c - 0.5 * (cols - 1)) * pixel_size; };
    auto y_of = [&](int r) { return (r - 0.5 * (rows - 1)) * pixel_size; };
    for (int r = 0; r < rows; ++r) {
        const double y = y_of(r);
        for (int c = 0; c < cols; ++c) {
            const double x = x_of(c);
            double v = 0.0;
            for (const auto& e : ellipses) v += e.value * e.coverage(x, y);
            ph.attenuation(r, c) = v;
        }
    }
    for (const auto& b : blobs) {
        const double reach = 4.0 * b.sigma;
        const int c0 = std::max(0, static_cast<int>(std::floor((b.center_x - reach) / pixel_size + 0.5 * (cols - 1))));
        const int c1 = std::min(cols - 1, static_cast<int>(std::ceil((b.center_x + reach) / pixel_size + 0.5 * (cols - 1))));
        const int r0 = std::max(0, static_cast<int>(std::floor((b.center_y - reach) / pixel_size + 0.5 * (rows - 1))));
        const int r1 = std::min(rows - 1, static_cast<int>(std::ceil((b.center_y + reach) / pixel_size + 0.5 * (rows - 1))));
        for (int r = r0; r <= r1; ++r) {
            for (int c = c0; c <= c1; ++c) {
                const double dx = x_of(c) - b.center_x, dy = y_of(r) - b.center_y;
                const double d2 = dx * dx + dy * dy;
                if (d2 <= reach * reach) ph.attenuation(r, c) += b.value * std::exp(-0.5 * d2 / (b.sigma * b.sigma));
            }
        }
    }
    // sums like 0.036 - 0.016 leave rounding residue around zero
    ph.attenuation.values = ph.attenuation.values.unaryExpr([](double v) { return std::abs(v) < 1e-15 ? 0.0 : v; });
    if (ph.attenuation.values.minCoeff() < 0.0) throw ValidationError("phantom: negative attenuation");
    return ph;
}

Phantom make_phantom(const std::filesystem::path& raster, HuScale hu) {
    Image img = read_image(raster);
    if (!img.values.allFinite() || img.values.minCoeff() < 0.0) {
        throw ValidationError("phantom: raster contains negative or non-finite attenuation");
    }
    return Phantom{"raster", std::move(img), hu};
}

namespace {

Ellipse scaled(double radius, double cx, double cy, double ax, double ay, double angle_deg, double value,
               double edge = 0.0) {
    constexpr double deg = std::numbers::pi / 180.0;
    return Ellipse{cx * radius, cy * radius, ax * radius, ay * radius, angle_deg * deg, value, edge};
}

}  // namespace

std::vector<Ellipse> shepp_logan_ellipses(double radius, HuScale hu, double edge_width) {
    auto mu = [&](double delta_hu) { return hu.to_mu(delta_hu); };
    std::vector<Ellipse> out{
        scaled(radius, 0.0, 0.0, 0.69, 0.92, 0.0, mu(1800.0)),       // skull
        scaled(radius, 0.0, -0.0184, 0.6624, 0.874, 0.0, mu(-800.0)),  // brain at water
        scaled(radius, 0.22, 0.0, 0.11, 0.31, -18.0, mu(-60.0)),
        scaled(radius, -0.22, 0.0, 0.16, 0.41, 18.0, mu(-60.0)),
        scaled(radius, 0.0, 0.35, 0.21, 0.25, 0.0, mu(40.0)),
        scaled(radius, 0.0, 0.1, 0.046, 0.046, 0.0, mu(30.0)),
        scaled(radius, 0.0, -0.1, 0.046, 0.046, 0.0, mu(30.0)),
        scaled(radius, -0.08, -0.605, 0.046, 0.023, 0.0, mu(50.0)),
        scaled(radius, 0.0, -0.605, 0.023, 0.023, 0.0, mu(50.0)),
        scaled(radius, 0.06, -0.605, 0.023, 0.046, 0.0, mu(50.0)),
    };
    for (auto& e : out) e.edge_width = edge_width;
    return out;
}

std::vector<Blob> texture_blobs(double radius, std::uint64_t seed, int count, double amplitude_hu, HuScale hu) {
    if (count < 0) throw ValidationError("texture: blob count must be >= 0");
    CounterRng rng(seed, 0x7e47);
    std::vector<Blob> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        // uniform over the brain ellipse, kept 4 sigma inside the inner skull boundary
        const double rr = std::sqrt(rng.uniform());
        const double phi = 2.0 * std::numbers::pi * rng.uniform();
        const double sigma = rng.uniform(0.006, 0.02) * radius;
        const double cx = 0.5 * radius * rr * std::cos(phi), cy = 0.7 * radius * rr * std::sin(phi);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        out.push_back({cx, cy, sigma, hu.to_mu(sign * rng.uniform(0.25, 1.0) * amplitude_hu)});
    }
    return out;
}

std::vector<Ellipse> random_head_ellipses(double radius, std::uint64_t seed, HuScale hu, double edge_width) {
    CounterRng rng(seed, 0x5eed);
    auto mu = [&](double delta_hu) { return hu.to_mu(delta_hu); };
    const double ax = rng.uniform(0.62, 0.74);
    const double ay = rng.uniform(0.82, 0.94);
    const double thick = rng.uniform(0.025, 0.04);
    std::vector<Ellipse> out{
        scaled(radius, 0.0, 0.0, ax, ay, 0.0, mu(rng.uniform(1600.0, 2000.0))),
    };
    const double bone = out.front().value;
    out.push_back(scaled(radius, 0.0, -0.01, ax - thick, ay - thick - 0.01, 0.0, mu(1000.0) - bone));
    const int n_lesions = 6 + static_cast<int>(rng.uniform() * 6.0);
    for (int k = 0; k < n_lesions; ++k) {
        const double rr = 0.5 * std::sqrt(rng.uniform());
        const double phi = 2.0 * std::numbers::pi * rng.uniform();
        const double contrast = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(20.0, 80.0);
        out.push_back(scaled(radius, rr * std::cos(phi) * ax, rr * std::sin(phi) * ay, rng.uniform(0.02, 0.18),
                             rng.uniform(0.02, 0.18), rng.uniform(0.0, 180.0), mu(contrast)));
    }
    for (auto& e : out) e.edge_width = edge_width;
    return out;
}

NoisySinogram simulate_sinogram(const Phantom& phantom, const Geometry& geo_fine, double i0, std::uint64_t seed,
                                bool noiseless) {
    if (!(i0 > 0.0)) throw ValidationError("simulate_sinogram: I0 must be > 0");
    const Image& img = phantom.attenuation;
    if (img.rows != geo_fine.image_rows || img.cols != geo_fine.image_cols) {
        throw ConfigError("simulate_sinogram: phantom grid does not match the simulation geometry");
    }
    const Vector line_integrals = Projector(geo_fine, 1.0, false).forward(img.values);
    const auto n = line_integrals.size();

    NoisySinogram s;
    s.n_views = geo_fine.n_views;
    s.n_channels = geo_fine.n_channels;
    s.i0 = i0;
    s.seed = seed;
    s.y.resize(n);
    s.counts.resize(n);
    s.weights.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double expected = i0 * std::exp(-line_integrals[i]);
        if (noiseless) {
            s.y[i] = line_integrals[i];
            s.counts[i] = expected;
            s.weights[i] = expected;
            continue;
        }
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        const double counts = std::max(poisson_sample(expected, rng), 1.0);
        s.counts[i] = counts;
        s.y[i] = std::log(i0 / counts);
        s.weights[i] = counts;
    }
    return s;
}

Image downsample(const Image& fine, int factor) {
    if (factor < 1) throw ValidationError("downsample: factor must be >= 1");
    if (fine.rows % factor != 0 || fine.cols % factor != 0) {
        throw ValidationError("downsample: image dimensions are not divisible by the factor");
    }
    Image out(fine.rows / factor, fine.cols / factor, fine.pixel_size * factor);
    const double norm = 1.0 / (static_cast<double>(factor) * factor);
    for (int r = 0; r < out.rows; ++r) {
        for (int c = 0; c < out.cols; ++c) {
            double sum = 0.0;
            for (int i = 0; i < factor; ++i) {
                for (int j = 0; j < factor; ++j) sum += fine(r * factor + i, c * factor + j);
            }
            out(r, c) = sum * norm;
        }
    }
    return out;
}

}  // namespace ldct
