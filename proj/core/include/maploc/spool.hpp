#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "maploc/losses.hpp"
#include "maploc/refine.hpp"

namespace maploc {

// File-spool protocol between the refinement loop and an out-of-process
// regressor. Every record is one ASCII line terminated by '\n'; fields are
// separated by single spaces and neither ids nor paths may contain whitespace.
//
//   <dir>/<id>.req    REQ <id> <rgb_png_path> <lidar_raw_path>
//   <dir>/<id>.resp   RESP <id> tx ty tz qa qb qc qd
//                     ERR <id> <free text>
//   <dir>/SHUTDOWN    asks the server to exit
//
// Both sides write to "<file>.tmp" and rename, so a reader never sees a
// partial record. The consumer normalizes the response quaternion.

struct SpoolRequest {
  std::string id;
  std::filesystem::path rgb;
  std::filesystem::path lidar;
};

struct SpoolResponse {
  std::string id;
  PoseTarget prediction;
};

struct SpoolError {
  std::string id;
  std::string message;
};

std::string format_request(const SpoolRequest& req);
SpoolRequest parse_request(std::string_view line);
std::string format_response(const SpoolResponse& resp);
std::string format_error(const SpoolError& err);
/// Parses a RESP or ERR record. A RESP with an all-zero quaternion is rejected.
std::variant<SpoolResponse, SpoolError> parse_response(std::string_view line);

inline constexpr std::string_view kShutdownSentinel = "SHUTDOWN";

std::filesystem::path request_path(const std::filesystem::path& dir, std::string_view id);
std::filesystem::path response_path(const std::filesystem::path& dir, std::string_view id);

/// Regressor binding "external": dumps the inputs into the spool directory,
/// posts a request and polls for the response.
class ExternalRegressor final : public Regressor {
public:
  ExternalRegressor(std::filesystem::path spool_dir, std::string id_prefix,
                    std::chrono::milliseconds timeout = std::chrono::seconds(60),
                    std::chrono::milliseconds poll = std::chrono::milliseconds(5));
  /// Throws Error on timeout or on an ERR response.
  PoseTarget predict(const RgbImage& rgb, const DepthImage& lidar_image) override;

private:
  std::filesystem::path dir_;
  std::string prefix_;
  std::chrono::milliseconds timeout_;
  std::chrono::milliseconds poll_;
  std::size_t calls_ = 0;
};

}  // namespace maploc
