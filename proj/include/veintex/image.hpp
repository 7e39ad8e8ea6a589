#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <png.h>

#include "veintex/error.hpp"

namespace veintex {

/**
 * Row-major grid of intensities in [0,1].
 *
 * The constructor enforces the invariants (positive size, matching buffer
 * length, samples in range), so every GrayImage that exists is valid.
 */
class GrayImage {
public:
    GrayImage() = default;

    GrayImage(int width, int height, double fill = 0.0)
        : GrayImage(width, height, std::vector<double>(checked_area(width, height), fill)) {}

    GrayImage(int width, int height, std::vector<double> data)
        : width_(width), height_(height), data_(std::move(data)) {
        if (data_.size() != checked_area(width, height)) {
            fail(ErrorKind::structure, "image buffer length " + std::to_string(data_.size()) +
                                           " does not match " + std::to_string(width) + "x" +
                                           std::to_string(height));
        }
        for (double v : data_) {
            if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::data, "image sample outside [0,1]");
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    static std::size_t checked_area(int width, int height) {
        if (width <= 0 || height <= 0) {
            fail(ErrorKind::format, "image dimensions must be positive, got " + std::to_string(width) +
                                        "x" + std::to_string(height));
        }
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Builds an image from arbitrary reals by clamping into [0,1].
inline GrayImage clamped_image(int width, int height, std::vector<double> data) {
    for (double& v : data) v = std::clamp(v, 0.0, 1.0);
    return GrayImage(width, height, std::move(data));
}

namespace detail {

inline std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

// Reads the next whitespace-delimited PNM header token, skipping '#' comments.
inline bool next_pnm_token(std::istream& in, std::string& token) {
    token.clear();
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) break;
    }
    if (c == EOF) return false;
    token.push_back(static_cast<char>(c));
    while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') token.push_back(static_cast<char>(in.get()));
    return true;
}

inline int parse_header_int(std::istream& in, const std::string& path, const char* field) {
    std::string token;
    if (!next_pnm_token(in, token)) fail(ErrorKind::format, path + ": truncated PGM header (" + field + ")");
    try {
        std::size_t used = 0;
        int value = std::stoi(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        fail(ErrorKind::format, path + ": bad PGM " + field + " '" + token + "'");
    }
}

inline GrayImage read_pgm(std::istream& in, const std::string& path) {
    std::string magic;
    next_pnm_token(in, magic);
    if (magic != "P2" && magic != "P5") fail(ErrorKind::format, path + ": not a P2/P5 PGM file");
    const int width = parse_header_int(in, path, "width");
    const int height = parse_header_int(in, path, "height");
    const int maxval = parse_header_int(in, path, "maxval");
    if (width <= 0 || height <= 0) fail(ErrorKind::format, path + ": zero-dimension image");
    if (maxval != 255) fail(ErrorKind::format, path + ": only maxval 255 is supported");

    const std::size_t n = static_cast<std::size_t>(width) * height;
    std::vector<double> data(n);
    if (magic == "P5") {
        in.get(); // single whitespace byte after maxval
        std::vector<unsigned char> bytes(n);
        in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n) fail(ErrorKind::format, path + ": truncated P5 raster");
        for (std::size_t i = 0; i < n; ++i) data[i] = bytes[i] / 255.0;
    } else {
        std::string token;
        for (std::size_t i = 0; i < n; ++i) {
            if (!next_pnm_token(in, token)) fail(ErrorKind::format, path + ": truncated P2 raster");
            int v = 0;
            try {
                v = std::stoi(token);
            } catch (const std::exception&) {
                fail(ErrorKind::format, path + ": bad P2 sample '" + token + "'");
            }
            if (v < 0 || v > 255) fail(ErrorKind::format, path + ": P2 sample out of range");
            data[i] = v / 255.0;
        }
    }
    return GrayImage(width, height, std::move(data));
}

inline GrayImage read_png(const std::string& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        fail(ErrorKind::format, path + ": " + image.message);
    }
    if (image.width == 0 || image.height == 0) {
        png_image_free(&image);
        fail(ErrorKind::format, path + ": zero-dimension image");
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        fail(ErrorKind::format, path + ": " + msg);
    }
    const int width = static_cast<int>(image.width);
    const int height = static_cast<int>(image.height);
    std::vector<double> data(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (color) {
            const png_byte* px = &buffer[3 * i];
            data[i] = std::clamp((0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) / 255.0, 0.0, 1.0);
        } else {
            data[i] = buffer[i] / 255.0;
        }
    }
    return GrayImage(width, height, std::move(data));
}

inline std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

} // namespace detail

/// Loads an 8-bit PGM (P2/P5) or PNG file; intensities are scaled by 1/255.
inline GrayImage load_image(const std::filesystem::path& path) {
    const std::string name = path.string();
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) fail(ErrorKind::io, name + ": cannot read file");

    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, name + ": cannot open file");
    std::array<unsigned char, 8> signature{};
    in.read(reinterpret_cast<char*>(signature.data()), signature.size());
    const auto got = static_cast<std::size_t>(in.gcount());

    if (got >= 2 && signature[0] == 'P' && (signature[1] == '2' || signature[1] == '5')) {
        in.clear();
        in.seekg(0);
        return detail::read_pgm(in, name);
    }
    if (got == 8 && png_sig_cmp(signature.data(), 0, 8) == 0) {
        in.close();
        return detail::read_png(name);
    }
    fail(ErrorKind::format, name + ": unsupported image format");
}

/// Writes a binary (P5) PGM, quantizing to 8 bits.
inline void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::io, path.string() + ": cannot open for writing");
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    for (double v : img.data()) out.put(static_cast<char>(detail::to_byte(v)));
    if (!out) fail(ErrorKind::io, path.string() + ": write failed");
}

/// Writes an 8-bit grayscale PNG.
inline void write_png(const GrayImage& img, const std::filesystem::path& path) {
    std::vector<png_byte> bytes(img.data().size());
    std::transform(img.data().begin(), img.data().end(), bytes.begin(), detail::to_byte);
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
        fail(ErrorKind::io, path.string() + ": " + image.message);
    }
}

/// 256-bin histogram equalization. Images whose samples all fall in one bin
/// are returned unchanged.
inline GrayImage equalize_histogram(const GrayImage& img) {
    std::array<std::size_t, 256> hist{};
    for (double v : img.data()) ++hist[detail::to_byte(v)];
    std::array<std::size_t, 256> cdf{};
    std::size_t running = 0;
    for (int b = 0; b < 256; ++b) cdf[b] = (running += hist[b]);
    const std::size_t total = img.data().size();
    std::size_t cdf_min = 0;
    for (std::size_t c : cdf) {
        if (c > 0) {
            cdf_min = c;
            break;
        }
    }
    if (cdf_min == total) return img;

    std::vector<double> out(total);
    for (std::size_t i = 0; i < total; ++i) {
        const std::size_t c = cdf[detail::to_byte(img.data()[i])];
        out[i] = static_cast<double>(c - cdf_min) / static_cast<double>(total - cdf_min);
    }
    return GrayImage(img.width(), img.height(), std::move(out));
}

/// Bilinear resize with corner-aligned sampling: output pixel i maps to
/// source coordinate i*(src-1)/(dst-1). A 1-pixel axis samples the centre.
inline GrayImage resize_bilinear(const GrayImage& img, int target_w, int target_h) {
    if (target_w <= 0 || target_h <= 0) fail(ErrorKind::parameter, "resize target must be positive");
    if (target_w == img.width() && target_h == img.height()) return img;

    auto source_coord = [](int i, int src, int dst) {
        if (dst == 1) return 0.5 * (src - 1);
        return static_cast<double>(i) * (src - 1) / (dst - 1);
    };

    std::vector<double> out(static_cast<std::size_t>(target_w) * target_h);
    for (int y = 0; y < target_h; ++y) {
        const double sy = source_coord(y, img.height(), target_h);
        const int y0 = std::min(static_cast<int>(std::floor(sy)), img.height() - 1);
        const int y1 = std::min(y0 + 1, img.height() - 1);
        const double fy = sy - y0;
        for (int x = 0; x < target_w; ++x) {
            const double sx = source_coord(x, img.width(), target_w);
            const int x0 = std::min(static_cast<int>(std::floor(sx)), img.width() - 1);
            const int x1 = std::min(x0 + 1, img.width() - 1);
            const double fx = sx - x0;
            const double top = (1.0 - fx) * img(x0, y0) + fx * img(x1, y0);
            const double bottom = (1.0 - fx) * img(x0, y1) + fx * img(x1, y1);
            out[static_cast<std::size_t>(y) * target_w + x] = std::clamp((1.0 - fy) * top + fy * bottom, 0.0, 1.0);
        }
    }
    return GrayImage(target_w, target_h, std::move(out));
}

struct PreprocessOptions {
    int width = 128;
    int height = 128;
    bool equalize = true;
};

/// Canonicalizes an image: optional equalization, then resize.
inline GrayImage preprocess(const GrayImage& img, int target_w, int target_h, bool equalize) {
    if (target_w <= 0 || target_h <= 0) fail(ErrorKind::parameter, "preprocess target must be positive");
    return resize_bilinear(equalize ? equalize_histogram(img) : img, target_w, target_h);
}

inline GrayImage preprocess(const GrayImage& img, const PreprocessOptions& opt) {
    return preprocess(img, opt.width, opt.height, opt.equalize);
}

} // namespace veintex
