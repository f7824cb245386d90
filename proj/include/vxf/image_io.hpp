#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vxf/render.hpp"
#include "vxf/types.hpp"

namespace vxf {

struct ImageU8 {
  int width = 0, height = 0, channels = 0;  // 3 = rgb, 1 = gray
  std::vector<std::uint8_t> pixels;         // row-major
};

ImageU8 quantize_rgb(const RenderOutput& img);
ImageU8 coverage_mask(const RenderOutput& img);  // 255 covered, 0 sky

// Binary PPM (P6, maxval 255) for rgb, binary PGM (P5) for masks.
void write_ppm(const ImageU8& img, const std::string& path);
void write_pgm(const ImageU8& img, const std::string& path);
ImageU8 read_ppm(const std::string& path);
ImageU8 read_pgm(const std::string& path);

// format is "ppm" (3-channel) or "pgm" (1-channel); anything else errors.
void write_image(const ImageU8& img, const std::string& path, const std::string& format);

}  // namespace vxf
