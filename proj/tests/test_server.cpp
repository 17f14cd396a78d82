#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <set>
#include <thread>

#include "corelens/samples.hpp"
#include "corelens/server.hpp"

using namespace corelens;
using namespace corelens::server;
using nlohmann::json;

namespace {

Session make_session() {
  std::vector<LoadedFile> files;
  files.push_back({"f0", "a.nrdf", {}});
  files[0].reactors.push_back(samples::make_3a(4));
  files.push_back({"f1", "b.nrdf", {}});
  files[1].reactors.push_back(samples::make_sfr7(3));
  return Session(std::move(files));
}

json get(Session& s, const std::string& path, std::map<std::string, std::string> query = {},
         int expect = 200) {
  Request req;
  req.path = path;
  req.query = std::move(query);
  const Response res = s.handle(req);
  CHECK_MESSAGE(res.status == expect, std::string(path + ": " + res.body));
  auto j = json::parse(res.body);
  CHECK(j.at("schema_version") == 1);
  return j;
}

json post(Session& s, const std::string& path, const json& body, int expect = 200) {
  Request req;
  req.method = "POST";
  req.path = path;
  req.body = body.dump();
  const Response res = s.handle(req);
  CHECK_MESSAGE(res.status == expect, std::string(path + ": " + res.body));
  return json::parse(res.body);
}

}  // namespace

TEST_SUITE("server") {
  TEST_CASE("files and reactors") {
    Session s = make_session();
    const auto files = get(s, "/api/files");
    REQUIRE(files["files"].size() == 2);
    CHECK(files["files"][0]["id"] == "f0");
    CHECK(files["files"][0]["reactors"] == json::array({"3a"}));

    const auto r = get(s, "/api/reactors/f1");
    const auto& sfr = r["reactors"][0];
    CHECK(sfr["reactor_type"] == "SFR");
    CHECK(sfr["size"] == 3);
    CHECK(sfr["labels"]["rows"] == json::array({"A", "B", "C"}));
    CHECK(sfr["rod_defs"].size() == 3);

    const auto missing = get(s, "/api/reactors/f9", {}, 404);
    CHECK(missing["error"]["code"] == "not-found");
    get(s, "/api/nothing", {}, 404);
  }

  TEST_CASE("keys are sorted") {
    Session s = make_session();
    Request req;
    req.path = "/api/reactors/f0";
    const auto body = s.handle(req).body;
    // "id" < "path" < "reactors" < "schema_version" in the serialized text.
    const auto id = body.find("\"id\"");
    const auto path = body.find("\"path\"");
    const auto schema = body.find("\"schema_version\"");
    CHECK(id < path);
    CHECK(path < schema);
  }

  TEST_CASE("core view") {
    Session s = make_session();
    const auto core = get(s, "/api/reactors/f0/3a/core");
    CHECK(core["type"] == "fuel");
    CHECK(core["grid"][1][1] == 0);
    CHECK(core["grid"][0][0].is_null());
    const auto banks = get(s, "/api/reactors/f0/3a/core", {{"type", "control_bank"}});
    CHECK(banks["grid"][0][0].is_number());
    CHECK(banks["grid"][1][1].is_null());
    get(s, "/api/reactors/f0/3a/core", {{"type", "reflector"}}, 404);
    get(s, "/api/reactors/f0/3a/core", {{"type", "bogus"}}, 400);
    get(s, "/api/reactors/f0/nope/core", {}, 404);
  }

  TEST_CASE("assembly view") {
    Session s = make_session();
    const auto a = get(s, "/api/reactors/f0/3a/assembly/fuel/B/2", {{"level", "3"}});
    CHECK(a["features"] == json::array({"Axial Power", "Total Power"}));
    CHECK(a["feature"] == "Axial Power");
    CHECK(a["level"] == 3);
    CHECK(a["levels"].size() == 4);
    CHECK(a["values"].size() == 17);
    CHECK(a["values"][0].size() == 17);
    CHECK(a["occupied"][8][8] == true);
    CHECK(a["rod_kinds"]["instrument_tube"] == "empty");
    CHECK(a["scale"]["scope"] == "selected_level");
    CHECK(a["units"] == "W/cm");

    const auto whole = get(s, "/api/reactors/f0/3a/assembly/fuel/B/2",
                           {{"norm", "whole_assembly"}, {"feature", "Axial Power"}});
    CHECK(whole["scale"]["scope"] == "whole_assembly");

    get(s, "/api/reactors/f0/3a/assembly/fuel/B/2", {{"level", "5"}}, 400);
    get(s, "/api/reactors/f0/3a/assembly/fuel/B/2", {{"level", "x"}}, 400);
    get(s, "/api/reactors/f0/3a/assembly/fuel/A/1", {}, 404);
    get(s, "/api/reactors/f0/3a/assembly/fuel/B/2", {{"feature", "Nope"}}, 404);
    get(s, "/api/reactors/f0/3a/assembly/fuel/B/2", {{"norm", "odd"}}, 400);
  }

  TEST_CASE("rod view") {
    Session s = make_session();
    const auto r = get(s, "/api/reactors/f0/3a/rod/B/2/A/1");
    CHECK(r["pin"] == "A1");
    CHECK(r["rod"]["kind"] == "fuel");
    CHECK(r["blocks"][0]["rings"].size() == 3);
    CHECK(r["series"]["Axial Power"]["points"].size() == 4);
    get(s, "/api/reactors/f0/3a/rod/B/2/Z/1", {}, 404);
  }

  TEST_CASE("tools and results") {
    Session s = make_session();
    const auto tools = get(s, "/api/tools");
    REQUIRE(tools["tools"].size() == 2);
    CHECK(tools["tools"][1]["name"] == "pin_diff");
    CHECK(tools["tools"][1]["enabled_by_default"] == true);

    const json in = {{"file", "f0"}, {"type", "fuel"}, {"row", "B"}, {"col", "2"}};
    const auto diff = post(s, "/api/tools/pin_diff",
                           {{"inputs", {in, in}}, {"params", {{"pins", "B2,H7"}}}});
    CHECK(diff["result_id"] == "r1");
    CHECK(diff["tool"] == "pin_diff");
    CHECK(diff["auto_plot"] == true);
    CHECK(diff["tables"][0]["values"][0][0] == 0.0);
    CHECK(diff["series"][1]["points"][0].size() == 2);
    CHECK(s.result_count() == 1);

    const auto km = post(s, "/api/tools/kmeans",
                         {{"inputs", {{{"file", "f0"}, {"assembly", "fuel_17x17"}}}},
                          {"params", {{"k", 2}, {"seed", 4}}}});
    CHECK(km["result_id"] == "r2");
    CHECK(km["scalars"].contains("inertia"));

    const auto list = get(s, "/api/results");
    CHECK(list["results"].size() == 2);
    CHECK(get(s, "/api/results/r2")["tool"] == "kmeans");
    get(s, "/api/results/r9", {}, 404);

    post(s, "/api/tools/nope", {{"inputs", json::array()}}, 404);
    post(s, "/api/tools/kmeans", {{"inputs", {in}}, {"params", {{"k", "x"}}}}, 400);
    post(s, "/api/tools/kmeans", {{"inputs", {in}}, {"params", {{"k", 500}}}}, 400);
    Request bad;
    bad.method = "POST";
    bad.path = "/api/tools/kmeans";
    bad.body = "{not json";
    CHECK(s.handle(bad).status == 400);

    // Mismatched assembly sizes are a shape error.
    const json small = {{"file", "f1"}, {"type", "fuel"}, {"row", "B"}, {"col", "2"}};
    const auto shape = post(s, "/api/tools/pin_diff",
                            {{"inputs", {in, small}}, {"params", {{"pins", "A1"}}}}, 422);
    CHECK(shape["error"]["code"] == "shape-error");
  }

  TEST_CASE("concurrent tool runs get distinct ids") {
    Session s = make_session();
    const json in = {{"file", "f0"}, {"type", "fuel"}, {"row", "B"}, {"col", "2"}};
    Request req;
    req.method = "POST";
    req.path = "/api/tools/kmeans";
    req.body = json{{"inputs", {in}}, {"params", {{"k", 2}}}}.dump();
    std::vector<std::thread> threads;
    std::vector<std::string> ids(8);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      threads.emplace_back([&, i] { ids[i] = json::parse(s.handle(req).body)["result_id"]; });
    }
    for (auto& t : threads) t.join();
    std::set<std::string> unique(ids.begin(), ids.end());
    CHECK(unique.size() == 8);
    CHECK(s.result_count() == 8);
  }

  TEST_CASE("local origins") {
    CHECK(is_local_origin("http://localhost:5173"));
    CHECK(is_local_origin("http://127.0.0.1"));
    CHECK(is_local_origin("https://[::1]:8443"));
    CHECK_FALSE(is_local_origin("http://example.com"));
    CHECK_FALSE(is_local_origin("http://localhost.evil.com"));
    CHECK_FALSE(is_local_origin("file://localhost"));
  }

  TEST_CASE("live http round trip") {
    Session s = make_session();
    HttpServer http(s, {"127.0.0.1", 0, ""});
    const int port = http.bind();
    REQUIRE(port > 0);
    std::thread loop([&] { http.listen(); });
    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(5);
    auto res = client.Get("/api/files", {{"Origin", "http://localhost:3000"}});
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://localhost:3000");
    CHECK(json::parse(res->body)["files"].size() == 2);

    auto foreign = client.Get("/api/files", {{"Origin", "http://example.com"}});
    REQUIRE(foreign);
    CHECK_FALSE(foreign->has_header("Access-Control-Allow-Origin"));

    auto level = client.Get("/api/reactors/f0/3a/assembly/fuel/B/2?level=2&feature=Axial%20Power");
    REQUIRE(level);
    CHECK(level->status == 200);
    CHECK(json::parse(level->body)["level"] == 2);

    auto posted = client.Post("/api/tools/kmeans",
                              R"({"inputs":[{"file":"f0","type":"fuel","row":"B","col":"2"}],"params":{"k":2}})",
                              "application/json");
    REQUIRE(posted);
    CHECK(posted->status == 200);
    http.stop();
    loop.join();
  }
}
