#include <cstdio>
#include <stdexcept>

#include <png.h>

#include "oracles.hpp"

namespace maploc::test {

std::vector<std::uint16_t> read_png_samples(const std::filesystem::path& path, int& width, int& height,
                                            int& channels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw std::runtime_error("cannot read " + path.string());
  }
  width = static_cast<int>(image.width);
  height = static_cast<int>(image.height);
  const bool gray16 = (image.format & PNG_FORMAT_FLAG_COLOR) == 0 && (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  channels = gray16 ? 1 : 3;
  std::vector<std::uint16_t> out(static_cast<std::size_t>(width) * height * channels);
  if (gray16) {
    image.format = PNG_FORMAT_LINEAR_Y;
    if (!png_image_finish_read(&image, nullptr, out.data(), 0, nullptr)) {
      throw std::runtime_error("cannot decode " + path.string());
    }
  } else {
    image.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> bytes(out.size());
    if (!png_image_finish_read(&image, nullptr, bytes.data(), 0, nullptr)) {
      throw std::runtime_error("cannot decode " + path.string());
    }
    for (std::size_t i = 0; i < bytes.size(); ++i) out[i] = bytes[i];
  }
  return out;
}

}  // namespace maploc::test
