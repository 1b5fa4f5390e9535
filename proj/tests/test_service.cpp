// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "spatialsens/error.hpp"
#include "spatialsens/mesh.hpp"
#include "spatialsens/sampling.hpp"
#include "spatialsens/service.hpp"
#include "support.hpp"

using namespace spatialsens;
using nlohmann::json;
using spatialsens::testing::ScratchDir;

namespace {

// Small preprocessed dataset: synthetic ensemble, delta volumes and a data-driven curve.
class Dataset {
 public:
  explicit Dataset(bool preprocess = true) : dir_("service") {
    SyntheticConfig cfg;
    cfg.dims = {8, 8, 8};
    cfg.run_count = 100;
    const Ensemble e = synthetic_saltelli_ensemble(cfg);
    write_ensemble(e, dir_.path());
    if (preprocess) {
      const DatasetLayout layout{dir_.path()};
      const auto fields = delta_volume(e);
      write_sensitivity(fields, layout.sensitivity(Measure::Delta));
      write_curve(data_driven_curve(fields), layout.curve());
    }
  }
  [[nodiscard]] const std::filesystem::path& path() const { return dir_.path(); }

 private:
  ScratchDir dir_;
};

ServiceOptions options(const Dataset& ds) {
  ServiceOptions o;
  o.dataset = ds.path();
  return o;
}

Request get(const std::string& path, std::map<std::string, std::string> query = {}) {
  Request r;
  r.method = "GET";
  r.path = path;
  r.query = std::move(query);
  return r;
}

Request post(const std::string& path, const std::string& body) {
  Request r;
  r.method = "POST";
  r.path = path;
  r.body = body;
  return r;
}

json ok_json(const Response& r) {
  REQUIRE_MESSAGE(r.status == 200, r.body);
  const json j = json::parse(r.body);
  CHECK(j.at("schemaVersion") == kSchemaVersion);
  return j;
}

}  // namespace

TEST_CASE("meta describes the dataset and session") {
  Dataset ds;
  Service svc(options(ds));
  const json j = ok_json(svc.handle(get("/api/meta")));
  CHECK(j["preprocessed"] == true);
  CHECK(j["runs"] == 100);
  CHECK(j["dims"] == json::array({8, 8, 8}));
  CHECK(j["parameters"].size() == 3);
  CHECK(j["activeMeasure"] == "delta");
  CHECK(j["measures"] == json::array({"delta"}));
  CHECK(j["curve"]["kind"] == "datadriven");
  CHECK(j["session"]["m"] == 2);
}

TEST_CASE("view endpoints answer 409 until the dataset is preprocessed") {
  Dataset ds(false);
  Service svc(options(ds));
  CHECK_FALSE(svc.preprocessed());
  CHECK(svc.handle(get("/api/meta")).status == 200);
  const auto r = svc.handle(get("/api/pcp"));
  CHECK(r.status == 409);
  CHECK(json::parse(r.body)["error"]["code"] == "NotPreprocessed");
}

TEST_CASE("routing errors") {
  Dataset ds;
  Service svc(options(ds));
  CHECK(svc.handle(get("/api/nope")).status == 404);
  CHECK(svc.handle(get("/api/selection")).status == 405);
  CHECK(svc.handle(post("/api/pcp", "")).status == 405);
  CHECK(svc.handle(get("/api/pcp", {{"count", "abc"}})).status == 400);
}

TEST_CASE("PCP payload with filtering and selection flags") {
  Dataset ds;
  Service svc(options(ds));
  const json j = ok_json(svc.handle(get("/api/pcp", {{"count", "40"}, {"seed", "3"}})));
  CHECK(j["axes"].size() == 3);
  CHECK(j["voxels"].size() == 40);
  CHECK(j["polylines"].size() == 40);
  CHECK(j["polylines"][0].size() == 3);
  const json again = ok_json(svc.handle(get("/api/pcp", {{"count", "40"}, {"seed", "3"}})));
  CHECK(again["voxels"] == j["voxels"]);
  CHECK(svc.handle(get("/api/pcp", {{"filterPct", "150"}})).status == 400);
  // P3 has no influence, so a strict filter removes it (or all axes, which is a 400).
  const auto strict = svc.handle(get("/api/pcp", {{"filterPct", "1"}}));
  if (strict.status == 200) {
    const json s = json::parse(strict.body);
    CHECK(std::find(s["excluded"].begin(), s["excluded"].end(), "P3") != s["excluded"].end());
  } else {
    CHECK(strict.status == 400);
  }

  const json sel = ok_json(svc.handle(post("/api/selection", R"({"sfcIntervals": [[0, 99]]})")));
  CHECK(sel["voxelCount"] == 100);
  const json flagged =
      ok_json(svc.handle(get("/api/pcp", {{"count", "512"}, {"selection", sel["selectionId"].get<std::string>()}})));
  std::size_t selected = 0;
  for (const auto& f : flagged["selected"]) selected += f.get<bool>() ? 1 : 0;
  CHECK(selected == 100);
}

TEST_CASE("sensitivity view honours the session m") {
  Dataset ds;
  Service svc(options(ds));
  const json a = ok_json(svc.handle(get("/api/sensitivity-view", {{"count", "64"}})));
  CHECK(a["m"] == 2);
  CHECK(a["horizons"].size() == 2);
  CHECK(a["lines"].size() == 1);
  CHECK(a["positions"].size() == 64);
  const json b = ok_json(svc.handle(get("/api/sensitivity-view", {{"m", "1"}})));
  CHECK(b["horizons"].size() == 1);
  CHECK(b["drawOrder"].size() == 2);
  CHECK(ok_json(svc.handle(get("/api/meta")))["session"]["m"] == 1);
  CHECK(svc.handle(get("/api/sensitivity-view", {{"m", "4"}})).status == 400);
}

TEST_CASE("selections, heatmap and mesh") {
  Dataset ds;
  Service svc(options(ds));
  const json all = ok_json(svc.handle(post("/api/selection", "")));
  CHECK(all["selectionId"] == "0");
  CHECK(all["voxelCount"] == 512);
  const json brushed =
      ok_json(svc.handle(post("/api/selection", R"({"pcpBrushes": [{"axis": "P1", "lo": 0.2, "hi": 1.0}],
                                                     "sfcIntervals": [{"a": 0, "b": 255}]})")));
  CHECK(brushed["selectionId"] == "1");
  CHECK(brushed["voxelCount"].get<std::size_t>() <= 256);
  CHECK(svc.selection_count() == 2);
  CHECK(svc.handle(post("/api/selection", R"({"pcpBrushes": [{"axis": "Q", "lo": 0, "hi": 1}]})")).status == 404);
  CHECK(svc.handle(post("/api/selection", "{oops")).status == 400);
  CHECK(svc.handle(post("/api/selection", R"({"sfcIntervals": [[600, 700]]})")).status == 400);

  const json h = ok_json(svc.handle(get("/api/heatmap", {{"selection", "0"}, {"param", "P1"}})));
  CHECK(h["rows"] == 500);
  CHECK(h["cols"] == 150);
  CHECK(h["values"].size() == 500 * 150);
  CHECK(h["colormap"]["table"].size() == 256);
  bool has_null = false;
  for (const auto& v : h["values"]) has_null = has_null || v.is_null();
  CHECK(has_null);  // 100 runs cannot fill 150 bins
  const json filled = ok_json(svc.handle(get("/api/heatmap", {{"selection", "0"}, {"param", "1"}, {"fill", "1"}})));
  CHECK(filled["param"] == "P2");
  for (const auto& v : filled["values"]) CHECK_FALSE(v.is_null());
  CHECK(svc.handle(get("/api/heatmap", {{"selection", "9"}, {"param", "P1"}})).status == 404);
  CHECK(svc.handle(get("/api/heatmap", {{"selection", "0"}, {"param", "P9"}})).status == 404);
  CHECK(svc.handle(get("/api/heatmap", {{"param", "P1"}})).status == 400);

  const json mj = ok_json(svc.handle(get("/api/mesh", {{"selection", "1"}})));
  CHECK(mj["triangleCount"].get<std::size_t>() > 0);
  Request bin = get("/api/mesh", {{"selection", "1"}});
  bin.accept = "application/octet-stream";
  const auto r = svc.handle(bin);
  CHECK(r.status == 200);
  CHECK(r.content_type == "application/octet-stream");
  const auto mesh = decode_mesh_binary(std::span(reinterpret_cast<const std::uint8_t*>(r.body.data()), r.body.size()));
  CHECK(mesh.triangle_count() == mj["triangleCount"].get<std::size_t>());
}

TEST_CASE("axis order override persists in the session") {
  Dataset ds;
  Service svc(options(ds));
  const json j = ok_json(svc.handle(post("/api/axis-order", R"({"order": ["P3"]})")));
  CHECK(j["axisOrder"][0] == "P3");
  const json p = ok_json(svc.handle(get("/api/pcp", {{"count", "10"}})));
  CHECK(p["axes"][0]["name"] == "P3");
  CHECK(svc.handle(post("/api/axis-order", R"({"order": ["X"]})")).status == 404);
  CHECK(svc.handle(post("/api/axis-order", R"({"wrong": 1})")).status == 400);
}

TEST_CASE("HTTP frontend serves the same responses") {
  Dataset ds;
  Service svc(options(ds));
  HttpFrontend http(svc);
  const int port = http.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread server([&] { http.listen(); });
  http.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  const auto meta = client.Get("/api/meta");
  REQUIRE(meta);
  CHECK(meta->status == 200);
  CHECK(meta->get_header_value("X-Schema-Version") == std::to_string(kSchemaVersion));
  CHECK(json::parse(meta->body)["runs"] == 100);
  const auto sel = client.Post("/api/selection", "", "application/json");
  REQUIRE(sel);
  CHECK(json::parse(sel->body)["voxelCount"] == 512);
  const auto pcp = client.Get("/api/pcp?count=7&filterPct=0");
  REQUIRE(pcp);
  CHECK(json::parse(pcp->body)["voxels"].size() == 7);
  const auto missing = client.Get("/api/unknown");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  http.stop();
  server.join();
}

TEST_CASE("port resolution honours the environment") {
  ::unsetenv("SPATIALSENS_PORT");
  CHECK(resolve_port(8080) == 8080);
  ::setenv("SPATIALSENS_PORT", "9191", 1);
  CHECK(resolve_port(8080) == 9191);
  ::setenv("SPATIALSENS_PORT", "bogus", 1);
  CHECK_THROWS_AS(resolve_port(8080), Error);
  ::unsetenv("SPATIALSENS_PORT");
}
