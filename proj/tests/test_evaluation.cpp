#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "ldct/evaluation.hpp"
#include "ldct/image_io.hpp"
#include "oracles.hpp"
#include "png_reader.hpp"

using namespace ldct;

namespace {

Image random_image(int rows, int cols, std::mt19937_64& gen, double lo = -1000.0, double hi = 2000.0) {
    Image img(rows, cols, 1.0);
    img.values = oracle::random_vector(static_cast<long>(rows) * cols, gen, lo, hi);
    return img;
}

}  // namespace

TEST_CASE("rmse in HU") {
    std::mt19937_64 gen(5);
    const Image a = random_image(8, 9, gen);
    CHECK(rmse_hu(a, a) == 0.0);

    Image shifted = a;
    shifted.values.array() += -17.5;
    CHECK(rmse_hu(shifted, a) == doctest::Approx(17.5).epsilon(1e-12));

    Image p(2, 2, 1.0), q(2, 2, 1.0);
    p.values << 1000.0, 20.0, -3.0, 0.0;
    q.values << 990.0, 24.0, 0.0, 5.0;
    CHECK(rmse_hu(p, q) == doctest::Approx(std::sqrt((100.0 + 16.0 + 9.0 + 25.0) / 4.0)));

    for (int trial = 0; trial < 20; ++trial) {
        const Image x = random_image(5, 7, gen), y = random_image(5, 7, gen);
        CHECK(rmse_hu(x, y) > 0.0);
        CHECK(rmse_hu(x, y) == rmse_hu(y, x));
        const Image z = random_image(5, 7, gen);
        CHECK(rmse_hu(x, z) <= rmse_hu(x, y) + rmse_hu(y, z) + 1e-12);
    }
    CHECK_THROWS_AS(rmse_hu(Image(3, 3, 1.0), Image(3, 4, 1.0)), ConfigError);
}

TEST_CASE("HU conversion") {
    const HuScale hu;
    Image mu(1, 3, 1.0);
    mu.values << 0.0, 0.02, 0.03;
    const Image h = to_hu(mu, hu);
    CHECK(h.values[0] == 0.0);
    CHECK(h.values[1] == doctest::Approx(1000.0));
    CHECK(h.values[2] == doctest::Approx(1500.0));
    CHECK((to_attenuation(h, hu).values - mu.values).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("difference image") {
    std::mt19937_64 gen(9);
    const Image a = random_image(6, 4, gen);
    CHECK(difference_image(a, a).values.isZero(0.0));
    Image neg = a;
    neg.values = -a.values;
    CHECK((difference_image(neg, a).values - 2.0 * a.values.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-12);
    const Image b = random_image(6, 4, gen);
    const Image d = difference_image(a, b);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 4; ++c) CHECK(d(r, c) == std::abs(a(r, c) - b(r, c)));
    CHECK_THROWS_AS(difference_image(a, Image(4, 6, 1.0)), ConfigError);
}

TEST_CASE("comparison tables") {
    EvalReport hi{1e4, {}}, lo{1e3, {}};
    hi.add({"PWLS-ST", 21.0, 10.0, ""});
    hi.add({"FBP", 60.25, 0.5, ""});
    hi.add({"PWLS-EP", 26.5, 3.0, ""});
    hi.add({"PWLS-DCT", 24.0, 9.0, ""});
    lo.add({"FBP", 120.0, 0.5, ""});
    lo.add({"PWLS-EP", 40.0, 3.0, ""});
    lo.add({"PWLS-ST", 30.0, 10.0, ""});
    CHECK_THROWS_AS(lo.add({"FBP", 1.0, 0.0, ""}), ValidationError);
    CHECK_THROWS_AS(lo.add({"X", -1.0, 0.0, ""}), ValidationError);
    CHECK(lo.find("PWLS-DCT") == nullptr);

    const std::string md = comparison_markdown({hi, lo});
    CHECK(md ==
          "| Intensity | FBP | PWLS-EP | PWLS-DCT | PWLS-ST |\n"
          "|---|---|---|---|---|\n"
          "| 1e+04 | 60.2 | 26.5 | 24.0 | 21.0 |\n"
          "| 1e+03 | 120.0 | 40.0 | — | 30.0 |\n");

    const std::string csv = comparison_csv({hi, lo});
    CHECK(csv.rfind("dose,method,rmse_hu,runtime_s\n", 0) == 0);
    CHECK(csv.find("10000,FBP,60.250000,0.500\n") != std::string::npos);
    CHECK(csv.find("1000,PWLS-DCT") == std::string::npos);
    // canonical method order inside each dose
    CHECK(csv.find("10000,FBP") < csv.find("10000,PWLS-EP"));
    CHECK(csv.find("10000,PWLS-DCT") < csv.find("10000,PWLS-ST"));

    EvalReport single{1e5, {}};
    single.add({"PWLS-EP", 19.1, 1.0, ""});
    const std::string one = comparison_markdown({single});
    CHECK(one == "| Intensity | PWLS-EP |\n|---|---|\n| 1e+05 | 19.1 |\n");
    CHECK(comparison_markdown({single}) == one);
}

TEST_CASE("PNG export with display window") {
    CHECK(window_level(800.0, 800.0, 1200.0) == 0);
    CHECK(window_level(1200.0, 800.0, 1200.0) == 65535);
    CHECK(window_level(-50.0, 800.0, 1200.0) == 0);
    CHECK(window_level(5000.0, 800.0, 1200.0) == 65535);
    CHECK(window_level(1000.0, 800.0, 1200.0) == 32768);
    CHECK(window_level(std::nan(""), 800.0, 1200.0) == 0);

    const auto dir = std::filesystem::temp_directory_path() / "ldct_png_test";
    std::filesystem::create_directories(dir);
    Image img(3, 5, 1.0);
    for (int i = 0; i < 15; ++i) img.values[i] = 700.0 + 40.0 * i;
    const Image before = img;
    write_png16(dir / "a.png", img);
    CHECK(img.values == before.values);
    int rows = 0, cols = 0;
    const auto px = read_png16(dir / "a.png", rows, cols);
    CHECK(rows == 3);
    CHECK(cols == 5);
    for (int i = 0; i < 15; ++i) CHECK(px[i] == window_level(img.values[i], 800.0, 1200.0));
    std::ifstream side(dir / "a.png.txt");
    std::string text((std::istreambuf_iterator<char>(side)), {});
    CHECK(text.find("window_lo = 800") != std::string::npos);
    CHECK(text.find("window_hi = 1200") != std::string::npos);
    CHECK(text.find("level = 1000") != std::string::npos);
    CHECK_THROWS_AS(write_png16(dir / "b.png", img, 5.0, 5.0), ValidationError);
    CHECK_THROWS_AS(write_png16(dir / "missing" / "c.png", img), IoError);
    std::filesystem::remove_all(dir);
}
