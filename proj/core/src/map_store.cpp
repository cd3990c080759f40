#include "maploc/map_store.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "byte_io.hpp"
#include "maploc/error.hpp"
#include "text_util.hpp"

namespace maploc {

void PointCloudMap::reserve(std::size_t n, bool with_intensity) {
  points.reserve(n);
  if (with_intensity) {
    intensity.reserve(n);
  }
}

void PointCloudMap::append(const PointCloudMap& other) {
  const bool keep_intensity = (empty() || has_intensity()) && other.has_intensity();
  if (!keep_intensity) {
    intensity.clear();
  }
  points.insert(points.end(), other.points.begin(), other.points.end());
  if (keep_intensity) {
    intensity.insert(intensity.end(), other.intensity.begin(), other.intensity.end());
  }
}

void CropSpec::validate() const {
  if (!(forward > 0.0) || !(lateral > 0.0) || !(vertical > 0.0)) {
    throw InvalidArgument("CropSpec: extents must be positive");
  }
}

namespace {

using CellKey = std::array<std::int64_t, 3>;

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto v : k) {
      h ^= static_cast<std::uint64_t>(v) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

struct CellSum {
  double x = 0.0, y = 0.0, z = 0.0, i = 0.0;
  std::size_t count = 0;
};

}  // namespace

PointCloudMap voxel_downsample(const PointCloudMap& cloud, double resolution) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw InvalidArgument("voxel_downsample: resolution must be positive");
  }
  std::unordered_map<CellKey, CellSum, CellKeyHash> cells;
  cells.reserve(cloud.size());
  const bool with_i = cloud.has_intensity();
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    const Eigen::Vector3f& p = cloud.points[k];
    const CellKey key{static_cast<std::int64_t>(std::floor(p.x() / resolution)),
                      static_cast<std::int64_t>(std::floor(p.y() / resolution)),
                      static_cast<std::int64_t>(std::floor(p.z() / resolution))};
    CellSum& s = cells[key];
    s.x += p.x();
    s.y += p.y();
    s.z += p.z();
    if (with_i) {
      s.i += cloud.intensity[k];
    }
    ++s.count;
  }

  std::vector<std::pair<CellKey, CellSum>> sorted(cells.begin(), cells.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });

  PointCloudMap out;
  out.voxel_resolution = resolution;
  out.reserve(sorted.size(), with_i);
  for (const auto& [key, s] : sorted) {
    const double n = static_cast<double>(s.count);
    const Eigen::Vector3f c(static_cast<float>(s.x / n), static_cast<float>(s.y / n),
                            static_cast<float>(s.z / n));
    if (with_i) {
      out.push_back(c, static_cast<float>(s.i / n));
    } else {
      out.push_back(c);
    }
  }
  return out;
}

PointCloudMap crop_local(const PointCloudMap& map, const PoseSE3& h_init, const CropSpec& spec) {
  spec.validate();
  const Eigen::Matrix3d r = h_init.rotation_matrix();
  const Eigen::Vector3d& t = h_init.translation();
  PointCloudMap out;
  out.voxel_resolution = map.voxel_resolution;
  const bool with_i = map.has_intensity();
  for (std::size_t k = 0; k < map.size(); ++k) {
    const Eigen::Vector3f& p = map.points[k];
    const Eigen::Vector3d c = transform_point(r, t, p.x(), p.y(), p.z());
    if (c.z() > 0.0 && c.z() <= spec.forward && std::abs(c.x()) <= spec.lateral &&
        std::abs(c.y()) <= spec.vertical) {
      out.points.push_back(p);
      if (with_i) {
        out.intensity.push_back(map.intensity[k]);
      }
    }
  }
  return out;
}

PointCloudMap transform_cloud(const PointCloudMap& cloud, const PoseSE3& h) {
  const Eigen::Matrix3d r = h.rotation_matrix();
  const Eigen::Vector3d& t = h.translation();
  PointCloudMap out;
  out.intensity = cloud.intensity;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    out.points.push_back(transform_point(r, t, p.x(), p.y(), p.z()).cast<float>());
  }
  return out;
}

std::vector<std::byte> encode_map_binary(const PointCloudMap& map) {
  if (map.has_intensity() && map.intensity.size() != map.size()) {
    throw InvalidArgument("encode_map_binary: intensity count does not match point count");
  }
  const bool with_i = map.has_intensity();
  std::vector<std::byte> out;
  out.reserve(24 + map.size() * (with_i ? 16 : 12));
  for (const char ch : kMapMagic) {
    out.push_back(static_cast<std::byte>(ch));
  }
  detail::put_le<std::uint16_t>(out, kMapVersion);
  detail::put_le<std::uint16_t>(out, with_i ? 1 : 0);
  detail::put_f32(out, static_cast<float>(map.voxel_resolution));
  detail::put_le<std::uint64_t>(out, map.size());
  for (std::size_t k = 0; k < map.size(); ++k) {
    detail::put_f32(out, map.points[k].x());
    detail::put_f32(out, map.points[k].y());
    detail::put_f32(out, map.points[k].z());
    if (with_i) {
      detail::put_f32(out, map.intensity[k]);
    }
  }
  return out;
}

PointCloudMap decode_map_binary(std::span<const std::byte> bytes) {
  if (bytes.size() < 24) {
    throw FormatError("map file truncated inside header", bytes.size());
  }
  for (std::size_t i = 0; i < kMapMagic.size(); ++i) {
    if (static_cast<char>(bytes[i]) != kMapMagic[i]) {
      throw FormatError("bad map magic", i);
    }
  }
  const auto version = detail::get_le<std::uint16_t>(bytes, 8);
  if (version != kMapVersion) {
    throw FormatError("unsupported map version " + std::to_string(version), 8);
  }
  const auto flags = detail::get_le<std::uint16_t>(bytes, 10);
  if ((flags & ~1u) != 0) {
    throw FormatError("unknown map flags", 10);
  }
  const bool with_i = (flags & 1u) != 0;
  const std::size_t stride = with_i ? 16 : 12;
  const auto count = detail::get_le<std::uint64_t>(bytes, 16);
  const std::size_t payload = bytes.size() - 24;
  if (count > payload / stride || payload != count * stride) {
    throw FormatError("map payload size does not match point count " + std::to_string(count),
                      24 + std::min<std::size_t>(payload, (payload / stride) * stride));
  }
  PointCloudMap map;
  map.voxel_resolution = detail::get_f32(bytes, 12);
  map.reserve(count, with_i);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t o = 24 + k * stride;
    const Eigen::Vector3f p(detail::get_f32(bytes, o), detail::get_f32(bytes, o + 4),
                            detail::get_f32(bytes, o + 8));
    if (with_i) {
      map.push_back(p, detail::get_f32(bytes, o + 12));
    } else {
      map.push_back(p);
    }
  }
  return map;
}

void save_map(const PointCloudMap& map, const std::filesystem::path& path) {
  write_file_atomic(path, encode_map_binary(map));
}

PointCloudMap load_map(const std::filesystem::path& path) {
  return decode_map_binary(read_file_bytes(path));
}

std::string encode_map_ascii(const PointCloudMap& map) {
  std::string out;
  const bool with_i = map.has_intensity();
  for (std::size_t k = 0; k < map.size(); ++k) {
    const auto& p = map.points[k];
    out += detail::format_double(p.x()) + ' ' + detail::format_double(p.y()) + ' ' +
           detail::format_double(p.z());
    if (with_i) {
      out += ' ' + detail::format_double(map.intensity[k]);
    }
    out += '\n';
  }
  return out;
}

PointCloudMap decode_map_ascii(std::string_view text) {
  PointCloudMap map;
  int columns = 0;
  const auto lines = detail::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = detail::trim(lines[n]);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto v = detail::parse_doubles(line, n + 1);
    if (v.size() != 3 && v.size() != 4) {
      throw FormatError("expected 3 or 4 numbers per point", n + 1);
    }
    if (columns == 0) {
      columns = static_cast<int>(v.size());
    } else if (columns != static_cast<int>(v.size())) {
      throw FormatError("inconsistent column count", n + 1);
    }
    const Eigen::Vector3f p(static_cast<float>(v[0]), static_cast<float>(v[1]),
                            static_cast<float>(v[2]));
    if (v.size() == 4) {
      map.push_back(p, static_cast<float>(v[3]));
    } else {
      map.push_back(p);
    }
  }
  return map;
}

}  // namespace maploc
