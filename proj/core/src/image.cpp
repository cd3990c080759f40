#include "maploc/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include <png.h>

#include "byte_io.hpp"
#include "maploc/error.hpp"

namespace maploc {

std::size_t DepthImage::nonzero_count() const {
  return static_cast<std::size_t>(
      std::count_if(depth.begin(), depth.end(), [](float d) { return d != 0.0f; }));
}

namespace {

void png_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::byte>*>(png_get_io_ptr(png));
  const auto* first = reinterpret_cast<const std::byte*>(data);
  out->insert(out->end(), first, first + length);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_fail(png_structp, png_const_charp msg) { throw Error(std::string("libpng: ") + msg); }

void png_warn(png_structp, png_const_charp) {}

/// rows: one pointer per row; bit_depth 8 or 16; color_type PNG_COLOR_TYPE_*.
std::vector<std::byte> encode_png(int width, int height, int bit_depth, int color_type,
                                  const std::vector<png_bytep>& rows,
                                  const std::vector<std::pair<std::string, std::string>>& text) {
  std::vector<std::byte> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  if (png == nullptr) {
    throw Error("libpng: cannot create write struct");
  }
  png_infop info = png_create_info_struct(png);
  try {
    png_set_write_fn(png, &out, png_to_vector, png_flush_noop);
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    std::vector<png_text> chunks(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      chunks[i].compression = PNG_TEXT_COMPRESSION_NONE;
      chunks[i].key = const_cast<char*>(text[i].first.c_str());
      chunks[i].text = const_cast<char*>(text[i].second.c_str());
      chunks[i].text_length = text[i].second.size();
    }
    if (!chunks.empty()) {
      png_set_text(png, info, chunks.data(), static_cast<int>(chunks.size()));
    }
    png_write_info(png, info);
    if (bit_depth == 16) {
      png_set_swap(png);  // rows are host (little-endian) uint16
    }
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

std::vector<std::byte> encode_depth_png(const DepthImage& img) {
  std::vector<std::uint16_t> counts(img.depth.size());
  for (std::size_t i = 0; i < img.depth.size(); ++i) {
    const double c = std::floor(static_cast<double>(img.depth[i]) * kDepthPngScale + 0.5);
    counts[i] = static_cast<std::uint16_t>(std::clamp(c, 0.0, 65535.0));
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int v = 0; v < img.height; ++v) {
    rows[static_cast<std::size_t>(v)] =
        reinterpret_cast<png_bytep>(counts.data() + static_cast<std::size_t>(v) * img.width);
  }
  return encode_png(img.width, img.height, 16, PNG_COLOR_TYPE_GRAY, rows,
                    {{"Description", "depth in meters * 256 (256 counts per meter, 0 = no return)"},
                     {"DepthScale", "256"}});
}

void write_depth_png(const DepthImage& img, const std::filesystem::path& path) {
  write_file_atomic(path, encode_depth_png(img));
}

std::vector<std::byte> encode_rgb_png(const RgbImage& img) {
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int v = 0; v < img.height; ++v) {
    rows[static_cast<std::size_t>(v)] =
        const_cast<png_bytep>(img.data.data() + static_cast<std::size_t>(v) * img.width * 3);
  }
  return encode_png(img.width, img.height, 8, PNG_COLOR_TYPE_RGB, rows, {});
}

void write_rgb_png(const RgbImage& img, const std::filesystem::path& path) {
  write_file_atomic(path, encode_rgb_png(img));
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.string().c_str()) == 0) {
    throw Error("cannot read PNG '" + path.string() + "': " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out(static_cast<int>(image.width), static_cast<int>(image.height));
  if (png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr) == 0) {
    png_image_free(&image);
    throw Error("cannot decode PNG '" + path.string() + "': " + image.message);
  }
  return out;
}

std::vector<std::byte> encode_depth_raw(const DepthImage& img) {
  std::vector<std::byte> out;
  out.reserve(kDepthRawHeaderSize + img.depth.size() * 4);
  for (const char ch : std::string_view("MLDEPTH1")) {
    out.push_back(static_cast<std::byte>(ch));
  }
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(img.width));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(img.height));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(img.camera.pad_right));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(img.camera.pad_bottom));
  detail::put_le<std::uint64_t>(out, 0);
  const Eigen::Matrix<double, 3, 4> rt = img.generating_pose.matrix3x4();
  for (int i = 0; i < 12; ++i) {
    detail::put_f64(out, rt(i / 4, i % 4));
  }
  for (const float d : img.depth) {
    detail::put_f32(out, d);
  }
  return out;
}

DepthImage decode_depth_raw(std::span<const std::byte> bytes) {
  if (bytes.size() < kDepthRawHeaderSize) {
    throw FormatError("depth dump truncated inside header", bytes.size());
  }
  if (std::memcmp(bytes.data(), "MLDEPTH1", 8) != 0) {
    throw FormatError("bad depth dump magic", 0);
  }
  const auto w = detail::get_le<std::uint32_t>(bytes, 8);
  const auto h = detail::get_le<std::uint32_t>(bytes, 12);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (w > (1u << 16) || h > (1u << 16) || bytes.size() != kDepthRawHeaderSize + n * 4) {
    throw FormatError("depth payload does not match " + std::to_string(w) + "x" + std::to_string(h),
                      kDepthRawHeaderSize);
  }
  DepthImage img(static_cast<int>(w), static_cast<int>(h));
  img.camera.pad_right = static_cast<int>(detail::get_le<std::uint32_t>(bytes, 16));
  img.camera.pad_bottom = static_cast<int>(detail::get_le<std::uint32_t>(bytes, 20));
  img.camera.width = img.width - img.camera.pad_right;
  img.camera.height = img.height - img.camera.pad_bottom;
  Eigen::Matrix<double, 3, 4> rt;
  for (int i = 0; i < 12; ++i) {
    rt(i / 4, i % 4) = detail::get_f64(bytes, 32 + 8 * static_cast<std::size_t>(i));
  }
  img.generating_pose = PoseSE3::from_matrix3x4(rt);
  for (std::size_t i = 0; i < n; ++i) {
    img.depth[i] = detail::get_f32(bytes, kDepthRawHeaderSize + 4 * i);
  }
  return img;
}

void write_depth_raw(const DepthImage& img, const std::filesystem::path& path) {
  write_file_atomic(path, encode_depth_raw(img));
}

DepthImage read_depth_raw(const std::filesystem::path& path) {
  return decode_depth_raw(read_file_bytes(path));
}

RgbImage depth_overlay(const DepthImage& depth, const RgbImage* background, double max_depth) {
  RgbImage out(depth.width, depth.height);
  if (background != nullptr) {
    for (int v = 0; v < std::min(depth.height, background->height); ++v) {
      for (int u = 0; u < std::min(depth.width, background->width); ++u) {
        std::copy_n(background->px(u, v), 3, out.px(u, v));
      }
    }
  }
  if (max_depth <= 0.0) {
    max_depth = 0.0;
    for (const float d : depth.depth) max_depth = std::max(max_depth, static_cast<double>(d));
  }
  if (max_depth <= 0.0) {
    return out;
  }
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const double d = depth.at(u, v);
      if (d <= 0.0) continue;
      // blue -> cyan -> green -> yellow -> red
      const double t = std::clamp(d / max_depth, 0.0, 1.0) * 4.0;
      double r = 0, g = 0, b = 0;
      if (t < 1.0) {
        b = 1.0; g = t;
      } else if (t < 2.0) {
        g = 1.0; b = 2.0 - t;
      } else if (t < 3.0) {
        g = 1.0; r = t - 2.0;
      } else {
        r = 1.0; g = 4.0 - t;
      }
      std::uint8_t* p = out.px(u, v);
      p[0] = static_cast<std::uint8_t>(std::lround(255.0 * r));
      p[1] = static_cast<std::uint8_t>(std::lround(255.0 * g));
      p[2] = static_cast<std::uint8_t>(std::lround(255.0 * b));
    }
  }
  return out;
}

}  // namespace maploc
