#include <gtest/gtest.h>

#include <httplib.h>

#include <chrono>
#include <thread>

#include <json.hpp>

#include "terrafuse/error.hpp"
#include "terrafuse/io_util.hpp"
#include "terrafuse/service.hpp"
#include "test_support.hpp"

using namespace terrafuse;
namespace fs = std::filesystem;
using nlohmann::json;
using terrafuse::testing::TempDir;

namespace {

PipelineConfig small_config() { return parse_config(R"({"scene": {"width": 96, "height": 96}})"); }

/// Service on an ephemeral port, served from a background thread.
class Running {
 public:
  explicit Running(const fs::path& out) : service_(Pipeline(small_config(), "digest", out)) {
    port_ = service_.bind_any_port("127.0.0.1");
    thread_ = std::thread([this] { service_.listen_after_bind(); });
    for (int i = 0; i < 200 && !service_.running(); ++i)
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ~Running() {
    service_.stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(120, 0);
    return c;
  }
  const Service& service() const { return service_; }

 private:
  Service service_;
  int port_ = 0;
  std::thread thread_;
};

const char* kPins = R"({"type":"FeatureCollection","features":[
  {"type":"Feature","geometry":{"type":"Point","coordinates":[-94.925,29.389]},"properties":{"class":2,"label":"field"}}]})";

}  // namespace

TEST(Service, MetaDescribesTheScene) {
  TempDir dir;
  Running r(dir.path());
  auto res = r.client().Get("/api/meta");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  json meta = json::parse(res->body);
  EXPECT_EQ(meta["width"], 96);
  EXPECT_EQ(meta["height"], 96);
  EXPECT_EQ(meta["bands"]["fused"].size(), 10u);
  EXPECT_EQ(meta["legend"].size(), 3u);
  EXPECT_EQ(meta["palette"]["water"], json({0, 0, 255}));
  EXPECT_TRUE(meta["trained"].empty());
}

TEST(Service, SamplesRoundTripByteEqual) {
  TempDir dir;
  Running r(dir.path());
  auto client = r.client();
  auto post = client.Post("/api/samples?set=validation", kPins, "application/geo+json");
  ASSERT_TRUE(post);
  ASSERT_EQ(post->status, 200) << post->body;
  EXPECT_EQ(json::parse(post->body)["count"], 1);
  auto get = client.Get("/api/samples?set=validation");
  ASSERT_TRUE(get);
  EXPECT_EQ(get->body, serialize_samples(parse_samples(kPins)));
  EXPECT_EQ(read_text(r.service().session_dir() / "samples" / "validation.geojson"), get->body);

  auto bad = client.Post("/api/samples", R"({"type":"FeatureCollection","features":[{}]})", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(json::parse(bad->body)["error"], "ParseError");
}

TEST(Service, ErrorsMapToStatusCodes) {
  TempDir dir;
  Running r(dir.path());
  auto client = r.client();
  EXPECT_EQ(client.Post("/api/classify", R"({"source":"fused"})", "application/json")->status, 404);
  EXPECT_EQ(client.Get("/api/report/compare")->status, 404);
  EXPECT_EQ(client.Get("/api/render/classmap?source=optical")->status, 404);
  EXPECT_EQ(client.Post("/api/train", R"({"source":"radar"})", "application/json")->status, 400);
  EXPECT_EQ(client.Post("/api/train", R"({"params":{"max_depth":0}})", "application/json")->status, 400);
  EXPECT_EQ(client.Get("/api/render/composite?r=B9")->status, 400);

  ASSERT_EQ(client.Post("/api/samples", R"({"type":"FeatureCollection","features":[]})",
                        "application/json")->status,
            200);
  auto empty = client.Post("/api/train", R"({"source":"fused"})", "application/json");
  EXPECT_EQ(empty->status, 422);
  EXPECT_EQ(json::parse(empty->body)["error"], "EmptyTrainingSet");
}

TEST(Service, MatchesCliReportsAndComparison) {
  TempDir dir;
  {
    Pipeline p(small_config(), "digest", dir.path());
    for (const auto& s : stage_names()) p.run(s);
  }
  Running r(dir.path());
  auto client = r.client();
  for (const char* src : {"optical", "fused"}) {
    auto train = client.Post("/api/train", json{{"source", src}}.dump(), "application/json");
    ASSERT_EQ(train->status, 200) << train->body;
    EXPECT_EQ(json::parse(train->body)["rows"], 201);
    auto classify = client.Post("/api/classify", json{{"source", src}}.dump(), "application/json");
    ASSERT_EQ(classify->status, 200) << classify->body;
    auto validate = client.Post("/api/validate", json{{"samples_ref", "validation"}, {"source", src}}.dump(),
                                "application/json");
    ASSERT_EQ(validate->status, 200) << validate->body;
    fs::path cli_report = dir.path() / "reports" / (std::string(src) + ".json");
    EXPECT_EQ(validate->body, read_text(cli_report)) << src;

    auto map = client.Get((std::string("/api/render/classmap?source=") + src).c_str());
    ASSERT_EQ(map->status, 200);
    EXPECT_EQ(map->body, read_text(dir.path() / "renders" / ("classmap_" + std::string(src) + ".ppm")));
    auto pins = client.Get((std::string("/api/report/pins?source=") + src).c_str());
    ASSERT_EQ(pins->status, 200);
    EXPECT_EQ(json::parse(pins->body).size(), 313u);
  }
  auto compare = client.Get("/api/report/compare");
  ASSERT_EQ(compare->status, 200);
  EXPECT_EQ(compare->body, read_text(dir.path() / "reports" / "compare.json"));

  auto composite = client.Get("/api/render/composite");
  ASSERT_EQ(composite->status, 200);
  auto ppm = terrafuse::testing::decode_ppm({composite->body.begin(), composite->body.end()});
  EXPECT_EQ(ppm.width, 96);
  EXPECT_EQ(ppm.rgb.size(), 96u * 96u * 3u);
}

TEST(Service, ResumesSessionAfterRestart) {
  TempDir dir;
  {
    Running r(dir.path());
    ASSERT_EQ(r.client().Post("/api/train", R"({"source":"optical"})", "application/json")->status, 200);
  }
  Running again(dir.path());
  auto meta = json::parse(again.client().Get("/api/meta")->body);
  EXPECT_EQ(meta["trained"], json({"optical"}));
  EXPECT_EQ(again.client().Post("/api/classify", R"({"source":"optical"})", "application/json")->status, 200);
}

TEST(Service, ConcurrentJobsAreSerializedOrRefused) {
  TempDir dir;
  Running r(dir.path());
  ASSERT_EQ(r.client().Post("/api/train", R"({"source":"fused"})", "application/json")->status, 200);
  std::vector<int> statuses(6, 0);
  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < statuses.size(); ++i)
    workers.emplace_back([&, i] {
      auto res = r.client().Post("/api/classify", R"({"source":"fused"})", "application/json");
      statuses[i] = res ? res->status : -1;
    });
  for (auto& w : workers) w.join();
  int ok = 0;
  for (int s : statuses) {
    EXPECT_TRUE(s == 200 || s == 409) << s;
    ok += s == 200;
  }
  EXPECT_GE(ok, 1);
  EXPECT_EQ(r.client().Get("/api/render/classmap?source=fused")->status, 200);
}

TEST(Service, PortInUse) {
  TempDir dir;
  httplib::Server blocker;
  int port = blocker.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  Service s(Pipeline(small_config(), "digest", dir.path()));
  try {
    s.listen("127.0.0.1", port);
    FAIL() << "expected PortInUse";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PortInUse);
  }
}
