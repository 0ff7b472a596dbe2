#include "ldct/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace ldct {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

namespace {

struct Header {
    char magic[4];
    std::uint32_t rows;
    std::uint32_t cols;
    float spacing;
};
static_assert(sizeof(Header) == 16);

void write_block(std::ofstream& out, const Vector& v) {
    std::vector<float> buf(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) buf[i] = static_cast<float>(v[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

Vector read_block(std::ifstream& in, std::size_t n, const std::filesystem::path& path) {
    std::vector<float> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!in) throw IoError("truncated data block in " + path.string());
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = buf[i];
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

Header read_header(std::ifstream& in, const char* magic, const std::filesystem::path& path) {
    Header h{};
    in.read(reinterpret_cast<char*>(&h), sizeof h);
    if (!in) throw IoError("cannot read header of " + path.string());
    if (std::memcmp(h.magic, magic, 4) != 0) {
        throw IoError(path.string() + ": bad magic, expected " + std::string(magic, 4));
    }
    if (h.rows == 0 || h.cols == 0) throw IoError(path.string() + ": empty dimensions");
    return h;
}

}  // namespace

void write_image(const std::filesystem::path& path, const Image& img) {
    auto out = open_out(path);
    Header h{{'P', 'H', 'N', 'T'}, static_cast<std::uint32_t>(img.rows), static_cast<std::uint32_t>(img.cols),
             static_cast<float>(img.pixel_size)};
    out.write(reinterpret_cast<const char*>(&h), sizeof h);
    write_block(out, img.values);
    if (!out) throw IoError("write failed for " + path.string());
}

Image read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const Header h = read_header(in, "PHNT", path);
    if (!(h.spacing > 0.0f)) throw IoError(path.string() + ": pixel size must be > 0");
    Vector v = read_block(in, static_cast<std::size_t>(h.rows) * h.cols, path);
    return Image(static_cast<int>(h.rows), static_cast<int>(h.cols), h.spacing, std::move(v));
}

void write_sinogram(const std::filesystem::path& path, const NoisySinogram& sino, double detector_spacing) {
    auto out = open_out(path);
    Header h{{'S', 'I', 'N', 'O'}, static_cast<std::uint32_t>(sino.n_views), static_cast<std::uint32_t>(sino.n_channels),
             static_cast<float>(detector_spacing)};
    out.write(reinterpret_cast<const char*>(&h), sizeof h);
    write_block(out, sino.y);
    write_block(out, sino.weights);
    if (!out) throw IoError("write failed for " + path.string());
}

NoisySinogram read_sinogram(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const Header h = read_header(in, "SINO", path);
    const std::size_t n = static_cast<std::size_t>(h.rows) * h.cols;
    NoisySinogram s;
    s.n_views = static_cast<int>(h.rows);
    s.n_channels = static_cast<int>(h.cols);
    s.y = read_block(in, n, path);
    s.weights = read_block(in, n, path);
    s.counts = s.weights;
    return s;
}

std::uint16_t window_level(double value, double lo, double hi) {
    const double t = std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
    return static_cast<std::uint16_t>(std::lround(t * 65535.0));
}

void write_png16(const std::filesystem::path& path, const Image& img, double lo, double hi) {
    if (!(hi > lo)) throw ValidationError("png export: window upper bound must exceed lower bound");
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("libpng failed writing " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.cols), static_cast<png_uint_32>(img.rows), 16,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(static_cast<std::size_t>(img.cols) * 2);
    for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) {
            const std::uint16_t v = window_level(img(r, c), lo, hi);
            row[2 * c] = static_cast<png_byte>(v >> 8);  // PNG stores 16-bit samples big-endian
            row[2 * c + 1] = static_cast<png_byte>(v & 0xff);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);

    std::ofstream side(path.string() + ".txt", std::ios::trunc);
    if (!side) throw IoError("cannot write sidecar for " + path.string());
    side.precision(17);
    side << "window_lo = " << lo << "\nwindow_hi = " << hi << "\nwidth = " << (hi - lo)
         << "\nlevel = " << 0.5 * (lo + hi) << "\n";
}

}  // namespace ldct
