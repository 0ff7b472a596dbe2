#include "ldct/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ldct {

namespace {

void check_same_grid(const Image& a, const Image& b) {
    if (a.rows != b.rows || a.cols != b.cols || a.values.size() != b.values.size()) {
        throw ConfigError("evaluation: image dimensions differ");
    }
}

std::string format_number(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::vector<std::string> method_columns(const std::vector<EvalReport>& reports) {
    std::vector<std::string> cols;
    for (const auto& m : standard_methods()) {
        for (const auto& r : reports) {
            if (r.find(m)) {
                cols.push_back(m);
                break;
            }
        }
    }
    for (const auto& r : reports) {
        for (const auto& s : r.scores) {
            if (std::find(cols.begin(), cols.end(), s.method) == cols.end()) cols.push_back(s.method);
        }
    }
    return cols;
}

}  // namespace

Image to_hu(const Image& attenuation, const HuScale& hu) {
    Image out = attenuation;
    out.values *= 1000.0 / hu.mu_water;
    return out;
}

Image to_attenuation(const Image& hu_image, const HuScale& hu) {
    Image out = hu_image;
    out.values *= hu.mu_per_hu();
    return out;
}

double rmse_hu(const Image& x_hat, const Image& x_star) {
    check_same_grid(x_hat, x_star);
    if (x_hat.values.size() == 0) throw ValidationError("rmse: empty images");
    return std::sqrt((x_hat.values - x_star.values).squaredNorm() / static_cast<double>(x_hat.values.size()));
}

Image difference_image(const Image& x_hat, const Image& x_star) {
    check_same_grid(x_hat, x_star);
    return Image(x_hat.rows, x_hat.cols, x_hat.pixel_size, (x_hat.values - x_star.values).cwiseAbs());
}

void EvalReport::add(MethodScore score) {
    if (find(score.method)) throw ValidationError("evaluation: duplicate method '" + score.method + "'");
    if (!(score.rmse_hu >= 0.0)) throw ValidationError("evaluation: RMSE must be >= 0");
    scores.push_back(std::move(score));
}

const MethodScore* EvalReport::find(const std::string& method) const {
    for (const auto& s : scores) {
        if (s.method == method) return &s;
    }
    return nullptr;
}

const std::vector<std::string>& standard_methods() {
    static const std::vector<std::string> methods{"FBP", "PWLS-EP", "PWLS-DCT", "PWLS-ST"};
    return methods;
}

std::string comparison_csv(const std::vector<EvalReport>& reports) {
    const auto cols = method_columns(reports);
    std::ostringstream out;
    out << "dose,method,rmse_hu,runtime_s\n";
    for (const auto& r : reports) {
        for (const auto& m : cols) {
            if (const auto* s = r.find(m)) {
                out << format_number(r.dose, "%g") << "," << m << "," << format_number(s->rmse_hu, "%.6f") << ","
                    << format_number(s->runtime_s, "%.3f") << "\n";
            }
        }
    }
    return out.str();
}

std::string comparison_markdown(const std::vector<EvalReport>& reports) {
    const auto cols = method_columns(reports);
    std::ostringstream out;
    out << "| Intensity |";
    for (const auto& m : cols) out << " " << m << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < cols.size(); ++i) out << "---|";
    out << "\n";
    for (const auto& r : reports) {
        out << "| " << format_number(r.dose, "%.0e") << " |";
        for (const auto& m : cols) {
            const auto* s = r.find(m);
            out << " " << (s ? format_number(s->rmse_hu, "%.1f") : std::string("—")) << " |";
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace ldct
