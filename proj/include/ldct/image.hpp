#pragma once

#include <Eigen/Core>

#include "ldct/errors.hpp"

namespace ldct {

using Vector = Eigen::VectorXd;

/// A 2D map stored row-major: pixel (r, c) lives at index r * cols + c.
struct Image {
    int rows = 0;
    int cols = 0;
    double pixel_size = 1.0;  // mm
    Vector values;

    Image() = default;
    Image(int r, int c, double dx) : rows(r), cols(c), pixel_size(dx), values(Vector::Zero(r * c)) {}
    Image(int r, int c, double dx, Vector v) : rows(r), cols(c), pixel_size(dx), values(std::move(v)) {
        if (values.size() != static_cast<Eigen::Index>(r) * c) {
            throw ConfigError("image buffer size does not match dimensions");
        }
    }

    Eigen::Index size() const { return values.size(); }
    double& operator()(int r, int c) { return values[static_cast<Eigen::Index>(r) * cols + c]; }
    double operator()(int r, int c) const { return values[static_cast<Eigen::Index>(r) * cols + c]; }
};

/// Modified Hounsfield scale: air is 0, water is 1000.
struct HuScale {
    double mu_water = 0.02;  // mm^-1

    double to_hu(double mu) const { return 1000.0 * mu / mu_water; }
    double to_mu(double hu) const { return hu * mu_water / 1000.0; }
    /// Multiplier turning an HU-valued image into mm^-1.
    double mu_per_hu() const { return mu_water / 1000.0; }
};

}  // namespace ldct
