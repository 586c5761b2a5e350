#include "racas/image.hpp"

#include "racas/error.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>

namespace racas {

Raster::Raster(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw InvalidTarget("raster dimensions must be positive");
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3, fill);
}

void Raster::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    auto* p = pixel(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
}

void Raster::fill_rect(const Rect& r, std::uint8_t red, std::uint8_t green, std::uint8_t blue) {
    const int x0 = std::max(0, r.x), y0 = std::max(0, r.y);
    const int x1 = std::min(width_, r.x + r.width), y1 = std::min(height_, r.y + r.height);
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) set(x, y, red, green, blue);
    }
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct ReadCursor {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0;
};

void png_error_fn(png_structp png, png_const_charp msg) {
    auto* what = static_cast<std::string*>(png_get_error_ptr(png));
    if (what) *what = msg;
    png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

void write_fn(png_structp png, png_bytep data, png_size_t len) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + len);
}

void flush_fn(png_structp) {}

void read_fn(png_structp png, png_bytep data, png_size_t len) {
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->pos + len > cur->data.size()) png_error(png, "truncated PNG stream");
    std::memcpy(data, cur->data.data() + cur->pos, len);
    cur->pos += len;
}

// Runs fn with a read struct positioned after the header; fn must not throw
// across libpng frames, so results are passed out by reference.
template <typename Fn>
void with_png_reader(std::span<const std::uint8_t> bytes, Fn&& fn) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw IoFailure("not a PNG stream");
    std::string err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoFailure("libpng allocation failed");
    }
    ReadCursor cursor{bytes, 0};
    volatile bool failed = false;
    if (setjmp(png_jmpbuf(png))) {
        failed = true;
    } else {
        png_set_read_fn(png, &cursor, read_fn);
        png_read_info(png, info);
        fn(png, info);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    if (failed) throw IoFailure("PNG decode failed: " + err);
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Raster& image, const std::optional<std::string>& caption) {
    if (image.empty()) throw IoFailure("cannot encode an empty raster");
    std::vector<std::uint8_t> out;
    std::string err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoFailure("libpng allocation failed");
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
    for (int y = 0; y < image.height(); ++y) {
        rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(image.pixel(0, y));
    }
    std::string key = "Caption";
    std::string value = caption.value_or("");
    volatile bool failed = false;
    if (setjmp(png_jmpbuf(png))) {
        failed = true;
    } else {
        png_set_write_fn(png, &out, write_fn, flush_fn);
        png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
                     PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_text text_chunk{};
        if (caption) {
            text_chunk.compression = PNG_TEXT_COMPRESSION_NONE;
            text_chunk.key = key.data();
            text_chunk.text = value.data();
            text_chunk.text_length = value.size();
            png_set_text(png, info, &text_chunk, 1);
        }
        png_write_info(png, info);
        png_write_image(png, rows.data());
        png_write_end(png, nullptr);
    }
    png_destroy_write_struct(&png, &info);
    if (failed) throw IoFailure("PNG encode failed: " + err);
    return out;
}

Raster decode_png(std::span<const std::uint8_t> bytes) {
    png_uint_32 w = 0, h = 0;
    std::vector<std::uint8_t> buf;
    with_png_reader(bytes, [&](png_structp png, png_infop info) {
        png_set_expand(png);
        png_set_strip_16(png);
        png_set_strip_alpha(png);
        png_set_gray_to_rgb(png);
        png_read_update_info(png, info);
        w = png_get_image_width(png, info);
        h = png_get_image_height(png, info);
        const auto stride = png_get_rowbytes(png, info);
        buf.resize(stride * h);
        std::vector<png_bytep> rows(h);
        for (png_uint_32 y = 0; y < h; ++y) rows[y] = buf.data() + y * stride;
        png_read_image(png, rows.data());
    });
    Raster r(static_cast<int>(w), static_cast<int>(h));
    for (int y = 0; y < r.height(); ++y) {
        std::memcpy(r.pixel(0, y), buf.data() + static_cast<std::size_t>(y) * w * 3, w * 3);
    }
    return r;
}

std::optional<std::string> png_caption(std::span<const std::uint8_t> bytes) {
    std::optional<std::string> caption;
    with_png_reader(bytes, [&](png_structp png, png_infop info) {
        png_textp texts = nullptr;
        int count = 0;
        png_get_text(png, info, &texts, &count);
        for (int i = 0; i < count; ++i) {
            if (std::strcmp(texts[i].key, "Caption") == 0) {
                caption = std::string(texts[i].text, texts[i].text_length);
                break;
            }
        }
    });
    return caption;
}

// ---------------------------------------------------------------------------
// Resampling

namespace {

constexpr int kWeightBits = 8;
constexpr int kWeightOne = 1 << kWeightBits;

struct Tap {
    int i0;
    int i1;
    int w1;  // weight of i1 in 1/256ths; i0 gets kWeightOne - w1
};

// Half-pixel-centre mapping from destination to source coordinates.
std::vector<Tap> taps(int src, int dst) {
    std::vector<Tap> out(static_cast<std::size_t>(dst));
    const double scale = static_cast<double>(src) / dst;
    for (int d = 0; d < dst; ++d) {
        double s = (d + 0.5) * scale - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(src - 1));
        const int i0 = static_cast<int>(s);
        const int i1 = std::min(i0 + 1, src - 1);
        const int w1 = static_cast<int>((s - i0) * kWeightOne + 0.5);
        out[static_cast<std::size_t>(d)] = {i0, i1, std::min(w1, kWeightOne)};
    }
    return out;
}

}  // namespace

Raster BilinearUpscaler::upscale(const Raster& image, Size target) const {
    const auto tx = taps(image.width(), target.width);
    const auto ty = taps(image.height(), target.height);
    Raster out(target.width, target.height);
    constexpr int kRound = 1 << (2 * kWeightBits - 1);
    for (int y = 0; y < target.height; ++y) {
        const auto& vy = ty[static_cast<std::size_t>(y)];
        const int wy1 = vy.w1, wy0 = kWeightOne - vy.w1;
        for (int x = 0; x < target.width; ++x) {
            const auto& vx = tx[static_cast<std::size_t>(x)];
            const int wx1 = vx.w1, wx0 = kWeightOne - vx.w1;
            const auto* p00 = image.pixel(vx.i0, vy.i0);
            const auto* p01 = image.pixel(vx.i1, vy.i0);
            const auto* p10 = image.pixel(vx.i0, vy.i1);
            const auto* p11 = image.pixel(vx.i1, vy.i1);
            auto* q = out.pixel(x, y);
            for (int c = 0; c < 3; ++c) {
                const int top = p00[c] * wx0 + p01[c] * wx1;
                const int bottom = p10[c] * wx0 + p11[c] * wx1;
                q[c] = static_cast<std::uint8_t>((top * wy0 + bottom * wy1 + kRound) >> (2 * kWeightBits));
            }
        }
    }
    return out;
}

Raster upscale(const Raster& image, Size target, const Upscaler& upscaler) {
    if (image.empty()) throw InvalidTarget("cannot upscale an empty raster");
    if (target.width < image.width() || target.height < image.height()) {
        throw InvalidTarget("upscale target " + std::to_string(target.width) + "x" + std::to_string(target.height) +
                            " is smaller than source " + std::to_string(image.width()) + "x" +
                            std::to_string(image.height()));
    }
    if (target == image.size()) return image;
    return upscaler.upscale(image, target);
}

Raster upscale(const Raster& image, Size target) { return upscale(image, target, BilinearUpscaler{}); }

Raster crop(const Raster& image, const Rect& rect) {
    const int x0 = std::max(0, rect.x), y0 = std::max(0, rect.y);
    const int x1 = std::min(image.width(), rect.x + rect.width);
    const int y1 = std::min(image.height(), rect.y + rect.height);
    if (x1 <= x0 || y1 <= y0) throw InvalidTarget("crop rectangle does not intersect the image");
    Raster out(x1 - x0, y1 - y0);
    for (int y = y0; y < y1; ++y) {
        std::memcpy(out.pixel(0, y - y0), image.pixel(x0, y), static_cast<std::size_t>(x1 - x0) * 3);
    }
    return out;
}

}  // namespace racas
