#include "ldct/projector.hpp"

#include <numeric>

namespace ldct {

Projector::Projector(Geometry geo, double value_scale, bool cache) : geo_(std::move(geo)), scale_(value_scale) {
    geo_.validate();
    all_views_.resize(geo_.n_views);
    std::iota(all_views_.begin(), all_views_.end(), 0);
    if (!cache) return;

    row_ptr_.reserve(geo_.n_rays() + 1);
    row_ptr_.push_back(0);
    for (int v = 0; v < geo_.n_views; ++v) {
        for (int c = 0; c < geo_.n_channels; ++c) {
            trace_ray(geo_, geo_.ray(v, c), [&](long pixel, double len) {
                col_.push_back(static_cast<std::int32_t>(pixel));
                val_.push_back(scale_ * len);
            });
            row_ptr_.push_back(static_cast<std::int64_t>(col_.size()));
        }
    }
    col_.shrink_to_fit();
    val_.shrink_to_fit();
}

void Projector::check_image(const Vector& image) const {
    if (image.size() != geo_.n_pixels()) {
        throw ConfigError("projector: image has " + std::to_string(image.size()) + " pixels, geometry expects " +
                          std::to_string(geo_.n_pixels()));
    }
}

Vector Projector::forward(const Vector& image) const { return forward(image, all_views_); }

Vector Projector::forward(const Vector& image, std::span<const int> views) const {
    check_image(image);
    const int nc = geo_.n_channels;
    Vector out(static_cast<Eigen::Index>(views.size()) * nc);
    for (std::size_t k = 0; k < views.size(); ++k) {
        const int v = views[k];
        if (v < 0 || v >= geo_.n_views) throw ConfigError("projector: view index out of range");
        for (int c = 0; c < nc; ++c) {
            double sum = 0.0;
            for_each_in_row(v, c, [&](long pixel, double a) { sum += a * image[pixel]; });
            out[static_cast<Eigen::Index>(k) * nc + c] = sum;
        }
    }
    return out;
}

Vector Projector::back(const Vector& sino) const { return back(sino, all_views_); }

Vector Projector::back(const Vector& sino, std::span<const int> views) const {
    const int nc = geo_.n_channels;
    if (sino.size() != static_cast<Eigen::Index>(views.size()) * nc) {
        throw ConfigError("projector: sinogram has " + std::to_string(sino.size()) + " samples, expected " +
                          std::to_string(views.size() * nc));
    }
    Vector out = Vector::Zero(geo_.n_pixels());
    for (std::size_t k = 0; k < views.size(); ++k) {
        const int v = views[k];
        if (v < 0 || v >= geo_.n_views) throw ConfigError("projector: view index out of range");
        for (int c = 0; c < nc; ++c) {
            const double u = sino[static_cast<Eigen::Index>(k) * nc + c];
            if (u == 0.0) continue;
            for_each_in_row(v, c, [&](long pixel, double a) { out[pixel] += a * u; });
        }
    }
    return out;
}

Vector forward_project(const Image& img, const Geometry& geo) {
    if (img.rows != geo.image_rows || img.cols != geo.image_cols) {
        throw ConfigError("forward_project: image dimensions do not match geometry");
    }
    return Projector(geo, 1.0, false).forward(img.values);
}

Image back_project(const Vector& sino, const Geometry& geo) {
    return Image(geo.image_rows, geo.image_cols, geo.pixel_size, Projector(geo, 1.0, false).back(sino));
}

Vector compute_majorizer_da(const Projector& proj, const Vector& weights) {
    if (weights.size() != proj.geometry().n_rays()) {
        throw ConfigError("majorizer: weight vector length does not match the number of rays");
    }
    if ((weights.array() < 0.0).any()) throw ValidationError("majorizer: weights must be non-negative");
    const Vector ones = Vector::Ones(proj.geometry().n_pixels());
    const Vector a1 = proj.forward(ones);
    return proj.back(weights.cwiseProduct(a1));
}

}  // namespace ldct
