#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "maploc/error.hpp"
#include "maploc/file_io.hpp"
#include "maploc/image.hpp"
#include "maploc/spool.hpp"
#include "support.hpp"

namespace maploc {
namespace {

TEST(SpoolText, RequestRoundTrip) {
  const SpoolRequest req{"f3-g1-0", "/tmp/a.rgb.png", "/tmp/a.lidar.bin"};
  const std::string line = format_request(req);
  EXPECT_EQ(line, "REQ f3-g1-0 /tmp/a.rgb.png /tmp/a.lidar.bin\n");
  const SpoolRequest back = parse_request(line);
  EXPECT_EQ(back.id, req.id);
  EXPECT_EQ(back.lidar, req.lidar);
  EXPECT_THROW(parse_request("REQ only-id\n"), FormatError);
  EXPECT_THROW(format_request({"has space", "a", "b"}), InvalidArgument);
}

TEST(SpoolText, ResponseAndError) {
  SpoolResponse resp{"x-1", {}};
  resp.prediction.translation = {0.5, -1.25, 2.0};
  resp.prediction.rotation = {0.5, 0.5, 0.5, 0.5};
  const auto parsed = parse_response(format_response(resp));
  ASSERT_TRUE(std::holds_alternative<SpoolResponse>(parsed));
  const auto& r = std::get<SpoolResponse>(parsed);
  EXPECT_EQ(r.id, "x-1");
  EXPECT_EQ(r.prediction.translation, resp.prediction.translation);
  EXPECT_EQ(r.prediction.rotation.c, 0.5);

  const auto err = parse_response(format_error({"x-2", "bad input file"}));
  ASSERT_TRUE(std::holds_alternative<SpoolError>(err));
  EXPECT_EQ(std::get<SpoolError>(err).message, "bad input file");

  EXPECT_THROW(parse_response("RESP x 1 2 3 0 0 0 0\n"), FormatError);
  EXPECT_THROW(parse_response("RESP x 1 2 3\n"), FormatError);
  EXPECT_THROW(parse_response("HELLO\n"), FormatError);
}

/// Minimal stand-in for the out-of-process server: answers each request with
/// a fixed translation, or an error for ids ending in "-1".
class FakeServer {
public:
  explicit FakeServer(std::filesystem::path dir) : dir_(std::move(dir)), thread_([this] { run(); }) {}
  ~FakeServer() {
    write_file_atomic(dir_ / kShutdownSentinel, std::string("\n"));
    thread_.join();
  }
  std::atomic<int> served{0};
  std::atomic<int> lidar_width{0};

private:
  void run() {
    while (!std::filesystem::exists(dir_ / kShutdownSentinel)) {
      for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (entry.path().extension() != ".req") continue;
        const SpoolRequest req = parse_request(read_file_text(entry.path()));
        std::filesystem::remove(entry.path());
        lidar_width = read_depth_raw(req.lidar).width;
        const bool fail = req.id.size() > 2 && req.id.substr(req.id.size() - 2) == "-1";
        if (fail) {
          write_file_atomic(response_path(dir_, req.id), format_error({req.id, "cannot decode"}));
        } else {
          SpoolResponse resp{req.id, {}};
          resp.prediction.translation = {0.1, 0.2, 0.3};
          resp.prediction.rotation = {2.0, 0.0, 0.0, 0.0};
          write_file_atomic(response_path(dir_, req.id), format_response(resp));
        }
        ++served;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  }
  std::filesystem::path dir_;
  std::thread thread_;
};

TEST(ExternalRegressorTest, ConsumesResponsesAndErrors) {
  const auto dir = test::scratch_dir("spool");
  FakeServer server(dir);
  ExternalRegressor reg(dir, "f0-ext", std::chrono::seconds(10));
  const RgbImage rgb(8, 4);
  DepthImage lidar(8, 4);
  lidar.at(1, 1) = 5.0f;
  const PoseTarget t = reg.predict(rgb, lidar);
  EXPECT_EQ(t.translation, Eigen::Vector3d(0.1, 0.2, 0.3));
  EXPECT_NEAR(t.to_pose().rotation().a, 1.0, 1e-15);
  EXPECT_EQ(server.lidar_width.load(), 8);
  EXPECT_TRUE(std::filesystem::exists(dir / "f0-ext-0.rgb.png"));
  try {
    reg.predict(rgb, lidar);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("cannot decode"), std::string::npos);
  }
  EXPECT_EQ(server.served.load(), 2);
}

TEST(ExternalRegressorTest, TimesOut) {
  const auto dir = test::scratch_dir("spool_timeout");
  ExternalRegressor reg(dir, "lonely", std::chrono::milliseconds(50), std::chrono::milliseconds(5));
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(reg.predict(RgbImage(2, 2), DepthImage(2, 2)), Error);
  EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(50));
  EXPECT_TRUE(std::filesystem::exists(request_path(dir, "lonely-0")));
}

}  // namespace
}  // namespace maploc
