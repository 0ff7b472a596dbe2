#pragma once

#include <string>
#include <vector>

#include "ldct/image.hpp"

namespace ldct {

Image to_hu(const Image& attenuation, const HuScale& hu);
Image to_attenuation(const Image& hu_image, const HuScale& hu);

/// sqrt(Σ (x̂_i - x*_i)² / N_p) over the whole image; inputs in HU.
double rmse_hu(const Image& x_hat, const Image& x_star);

/// |x̂ - x*| elementwise.
Image difference_image(const Image& x_hat, const Image& x_star);

struct MethodScore {
    std::string method;
    double rmse_hu = 0.0;
    double runtime_s = 0.0;
    std::string difference_image;  // path, empty when not written
};

struct EvalReport {
    double dose = 0.0;  // incident photons per ray
    std::vector<MethodScore> scores;

    /// Rejects duplicate method names and negative RMSE.
    void add(MethodScore score);
    const MethodScore* find(const std::string& method) const;
};

/// Canonical column order; other methods follow in first-seen order.
const std::vector<std::string>& standard_methods();

/// `dose,method,rmse_hu,runtime_s`, one line per (dose, method), doses in input order.
std::string comparison_csv(const std::vector<EvalReport>& reports);
/// One row per dose, one column per method; missing cells are rendered as "—".
std::string comparison_markdown(const std::vector<EvalReport>& reports);

}  // namespace ldct
