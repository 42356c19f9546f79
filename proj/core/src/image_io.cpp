#include "cyclegate/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace cyclegate {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Raster load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw io_error("cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error("PNG decode failed for " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    color = png_get_color_type(png, info);
    int channels = (color == PNG_COLOR_TYPE_GRAY) ? 1 : 3;

    Raster out(static_cast<int>(w), static_cast<int>(h), channels);
    std::vector<png_bytep> rows(h);
    std::size_t stride = static_cast<std::size_t>(w) * channels;
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = out.samples().data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void save_png(const Raster& r, const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw io_error("cannot write " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw io_error("PNG encode failed for " + path);
    }
    png_init_io(png, fp.get());
    int color = r.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, r.width(), r.height(), 8, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::size_t stride = static_cast<std::size_t>(r.width()) * r.channels();
    std::vector<png_bytep> rows(r.height());
    for (int y = 0; y < r.height(); ++y)
        rows[y] = const_cast<png_bytep>(r.samples().data()) + y * stride;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// Binary PGM (P5) and PPM (P6), maxval 255.
Raster load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5" && magic != "P6") throw io_error(path + ": unsupported PNM magic '" + magic + "'");
    auto next_token = [&]() {
        // skips whitespace and '#' comment lines
        for (;;) {
            int c = in.peek();
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        long v;
        in >> v;
        return v;
    };
    long w = next_token(), h = next_token(), maxval = next_token();
    if (w < 1 || h < 1 || maxval != 255) throw io_error(path + ": unsupported PNM header");
    in.get();  // single whitespace before raster data
    int channels = magic == "P5" ? 1 : 3;
    std::vector<std::uint8_t> samples(static_cast<std::size_t>(w) * h * channels);
    in.read(reinterpret_cast<char*>(samples.data()), static_cast<std::streamsize>(samples.size()));
    if (static_cast<std::size_t>(in.gcount()) != samples.size())
        throw io_error(path + ": truncated PNM data");
    return Raster(static_cast<int>(w), static_cast<int>(h), channels, std::move(samples));
}

void save_pnm(const Raster& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path);
    out << (r.channels() == 1 ? "P5" : "P6") << "\n"
        << r.width() << " " << r.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(r.samples().data()),
              static_cast<std::streamsize>(r.samples().size()));
    if (!out) throw io_error("write failed for " + path);
}

bool has_png_signature(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), 8);
    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    return in.gcount() == 8 && std::memcmp(sig, png_sig, 8) == 0;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Raster load_raster(const std::string& path) {
    return has_png_signature(path) ? load_png(path) : load_pnm(path);
}

void save_raster(const Raster& r, const std::string& path) {
    if (ends_with(path, ".png")) {
        save_png(r, path);
    } else {
        save_pnm(r, path);
    }
}

BinaryMask load_mask(const std::string& path) {
    Raster r = load_raster(path);
    if (r.channels() != 1) throw io_error(path + ": mask files must be single-channel");
    BinaryMask m(r.width(), r.height());
    for (int y = 0; y < r.height(); ++y)
        for (int x = 0; x < r.width(); ++x) m.set(x, y, r.at(x, y) >= 128);
    return m;
}

void save_mask(const BinaryMask& m, const std::string& path) {
    Raster r(m.width(), m.height(), 1);
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) r.set(x, y, 0, m.at(x, y) ? 255 : 0);
    save_raster(r, path);
}

}  // namespace cyclegate
