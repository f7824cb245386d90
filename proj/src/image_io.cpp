#include "vxf/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace vxf {

ImageU8 quantize_rgb(const RenderOutput& img) {
  ImageU8 out;
  out.width = img.width;
  out.height = img.height;
  out.channels = 3;
  out.pixels.resize(img.rgb.size());
  for (std::size_t i = 0; i < img.rgb.size(); ++i)
    out.pixels[i] =
        static_cast<std::uint8_t>(std::lround(std::clamp(img.rgb[i], 0.0f, 1.0f) * 255.0f));
  return out;
}

ImageU8 coverage_mask(const RenderOutput& img) {
  ImageU8 out;
  out.width = img.width;
  out.height = img.height;
  out.channels = 1;
  out.pixels.resize(img.coverage.size());
  for (std::size_t i = 0; i < img.coverage.size(); ++i)
    out.pixels[i] = img.coverage[i] ? 255 : 0;
  return out;
}

namespace {

void write_pnm(const ImageU8& img, const std::string& path, const char* magic, int channels) {
  if (img.channels != channels)
    throw DataError(path + ": image has " + std::to_string(img.channels) + " channels, format needs " +
                    std::to_string(channels));
  if (img.width <= 0 || img.height <= 0) throw DataError(path + ": empty image");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << magic << '\n' << img.width << ' ' << img.height << '\n' << "255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw DataError("write failed for " + path);
}

ImageU8 read_pnm(const std::string& path, const char* magic, int channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::string tag;
  in >> tag;
  if (tag != magic) throw DataError(path + ": expected " + magic + ", got " + tag);
  int width = 0, height = 0, maxval = 0;
  in >> width >> height >> maxval;
  if (!in || width <= 0 || height <= 0) throw DataError(path + ": bad header");
  if (maxval != 255) throw DataError(path + ": only maxval 255 is supported");
  in.get();  // single whitespace after maxval
  ImageU8 img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.pixels.resize(static_cast<std::size_t>(width) * height * channels);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!in) throw DataError(path + ": truncated pixel data");
  return img;
}

}  // namespace

void write_ppm(const ImageU8& img, const std::string& path) { write_pnm(img, path, "P6", 3); }
void write_pgm(const ImageU8& img, const std::string& path) { write_pnm(img, path, "P5", 1); }
ImageU8 read_ppm(const std::string& path) { return read_pnm(path, "P6", 3); }
ImageU8 read_pgm(const std::string& path) { return read_pnm(path, "P5", 1); }

void write_image(const ImageU8& img, const std::string& path, const std::string& format) {
  if (format == "ppm")
    write_ppm(img, path);
  else if (format == "pgm")
    write_pgm(img, path);
  else
    throw DataError("unsupported image format \"" + format + "\" (use ppm or pgm)");
}

}  // namespace vxf
