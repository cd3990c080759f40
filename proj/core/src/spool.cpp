#include "maploc/spool.hpp"

#include <thread>

#include "maploc/file_io.hpp"
#include "maploc/image.hpp"
#include "text_util.hpp"

namespace maploc {

namespace {

void check_token(std::string_view what, std::string_view value) {
  if (value.empty()) throw InvalidArgument(std::string("spool: empty ") + std::string(what));
  for (const char c : value) {
    if (detail::is_space(c)) {
      throw InvalidArgument(std::string("spool: ") + std::string(what) + " contains whitespace");
    }
  }
}

std::string_view single_line(std::string_view line) {
  line = detail::trim(line);
  if (line.find('\n') != std::string_view::npos) {
    throw FormatError("spool: record spans several lines", 0);
  }
  return line;
}

}  // namespace

std::string format_request(const SpoolRequest& req) {
  check_token("id", req.id);
  check_token("rgb path", req.rgb.string());
  check_token("lidar path", req.lidar.string());
  return "REQ " + req.id + " " + req.rgb.string() + " " + req.lidar.string() + "\n";
}

SpoolRequest parse_request(std::string_view line) {
  const auto f = detail::split_ws(single_line(line));
  if (f.size() != 4 || f[0] != "REQ") {
    throw FormatError("spool: expected 'REQ <id> <rgb> <lidar>'", 0);
  }
  return {std::string(f[1]), std::filesystem::path(std::string(f[2])),
          std::filesystem::path(std::string(f[3]))};
}

std::string format_response(const SpoolResponse& resp) {
  check_token("id", resp.id);
  const PoseTarget& p = resp.prediction;
  std::string out = "RESP " + resp.id;
  for (const double v : {p.translation.x(), p.translation.y(), p.translation.z(), p.rotation.a,
                         p.rotation.b, p.rotation.c, p.rotation.d}) {
    out += ' ';
    out += detail::format_double(v);
  }
  return out + "\n";
}

std::string format_error(const SpoolError& err) {
  check_token("id", err.id);
  std::string msg = err.message;
  for (char& c : msg) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return "ERR " + err.id + " " + msg + "\n";
}

std::variant<SpoolResponse, SpoolError> parse_response(std::string_view line) {
  line = single_line(line);
  const auto f = detail::split_ws(line);
  if (f.size() >= 2 && f[0] == "ERR") {
    const std::size_t pos = line.find(f[1]) + f[1].size();
    return SpoolError{std::string(f[1]), std::string(detail::trim(line.substr(pos)))};
  }
  if (f.size() != 9 || f[0] != "RESP") {
    throw FormatError("spool: expected 'RESP <id> tx ty tz qa qb qc qd' or 'ERR <id> <message>'", 0);
  }
  double v[7];
  for (std::size_t i = 0; i < 7; ++i) v[i] = detail::parse_double(f[2 + i], 1);
  SpoolResponse r;
  r.id = std::string(f[1]);
  r.prediction.translation = {v[0], v[1], v[2]};
  r.prediction.rotation = {v[3], v[4], v[5], v[6]};
  if (r.prediction.rotation.norm() == 0.0) {
    throw FormatError("spool: response quaternion is zero", 0);
  }
  return r;
}

std::filesystem::path request_path(const std::filesystem::path& dir, std::string_view id) {
  return dir / (std::string(id) + ".req");
}

std::filesystem::path response_path(const std::filesystem::path& dir, std::string_view id) {
  return dir / (std::string(id) + ".resp");
}

ExternalRegressor::ExternalRegressor(std::filesystem::path spool_dir, std::string id_prefix,
                                     std::chrono::milliseconds timeout,
                                     std::chrono::milliseconds poll)
    : dir_(std::move(spool_dir)), prefix_(std::move(id_prefix)), timeout_(timeout), poll_(poll) {
  check_token("id prefix", prefix_);
  if (timeout_.count() <= 0 || poll_.count() <= 0) {
    throw InvalidArgument("ExternalRegressor: timeout and poll interval must be positive");
  }
}

PoseTarget ExternalRegressor::predict(const RgbImage& rgb, const DepthImage& lidar_image) {
  std::filesystem::create_directories(dir_);
  const std::string id = prefix_ + "-" + std::to_string(calls_++);
  const auto rgb_path = dir_ / (id + ".rgb.png");
  const auto lidar_path = dir_ / (id + ".lidar.bin");
  const auto resp_path = response_path(dir_, id);
  std::filesystem::remove(resp_path);
  write_rgb_png(rgb, rgb_path);
  write_depth_raw(lidar_image, lidar_path);
  write_file_atomic(request_path(dir_, id), format_request({id, rgb_path, lidar_path}));

  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  while (!std::filesystem::exists(resp_path)) {
    if (std::chrono::steady_clock::now() >= deadline) {
      throw Error("external regressor: no response for '" + id + "' within " +
                  std::to_string(timeout_.count()) + " ms");
    }
    std::this_thread::sleep_for(poll_);
  }
  const auto parsed = parse_response(read_file_text(resp_path));
  if (const auto* err = std::get_if<SpoolError>(&parsed)) {
    throw Error("external regressor: " + err->message);
  }
  const auto& resp = std::get<SpoolResponse>(parsed);
  if (resp.id != id) {
    throw Error("external regressor: response id '" + resp.id + "' does not match '" + id + "'");
  }
  return resp.prediction;
}

}  // namespace maploc
