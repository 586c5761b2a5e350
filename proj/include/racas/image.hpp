#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace racas {

struct Size {
    int width = 0;
    int height = 0;
    friend bool operator==(const Size&, const Size&) = default;
};

struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;
};

// 8-bit RGB raster, row-major, tightly packed.
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, std::uint8_t fill = 0);

    int width() const { return width_; }
    int height() const { return height_; }
    Size size() const { return {width_, height_}; }
    bool empty() const { return pixels_.empty(); }

    std::uint8_t* pixel(int x, int y) { return &pixels_[offset(x, y)]; }
    const std::uint8_t* pixel(int x, int y) const { return &pixels_[offset(x, y)]; }
    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
    void fill_rect(const Rect& r, std::uint8_t red, std::uint8_t green, std::uint8_t blue);

    std::span<const std::uint8_t> data() const { return pixels_; }
    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
    }
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

// PNG codec. A caption, when given, is stored as a tEXt chunk with key
// "Caption" so scripted vision backends can key off it.
std::vector<std::uint8_t> encode_png(const Raster& image, const std::optional<std::string>& caption = {});
Raster decode_png(std::span<const std::uint8_t> png);
std::optional<std::string> png_caption(std::span<const std::uint8_t> png);

class Upscaler {
public:
    virtual ~Upscaler() = default;
    virtual Raster upscale(const Raster& image, Size target) const = 0;
};

// Separable bilinear resampling with half-pixel centres and 8-bit fixed-point
// weights; constant images stay exactly constant and monotone rows/columns
// stay monotone.
class BilinearUpscaler final : public Upscaler {
public:
    Raster upscale(const Raster& image, Size target) const override;
};

// Throws InvalidTarget if target is smaller than the source in either axis.
Raster upscale(const Raster& image, Size target, const Upscaler& upscaler);
Raster upscale(const Raster& image, Size target);

// Clips rect to the image bounds; an empty intersection is InvalidTarget.
Raster crop(const Raster& image, const Rect& rect);

}  // namespace racas
