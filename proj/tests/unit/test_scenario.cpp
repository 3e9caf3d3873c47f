#include <doctest.h>

#include <string>

#include "varigeo/errors.hpp"
#include "varigeo/scenario.hpp"

using namespace varigeo;

namespace {

const std::string kDir = VARIGEO_SCENARIO_DIR;

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("bundled scenarios load") {
  auto s = load_scenario(kDir + "/minimal.json");
  CHECK(s.m == 1);
  CHECK(s.n == 1);
  CHECK(s.map.size() == 1);
  CHECK(s.grid.points() == std::vector<int>{9});
  CHECK(s.has_metric("h"));
  CHECK_FALSE(s.has_metric("f"));
  CHECK(s.seed == 0);
  CHECK(s.sample_box == std::vector<std::pair<double, double>>{{0.25, 1.25}});
  CHECK(s.hash.size() == 16);

  for (const char* name : {"identity_harmonic", "exponential", "blowup", "integrable2", "theorem2", "theorem3",
                           "theorem5", "sphere"})
    CHECK_NOTHROW(load_scenario(kDir + "/" + name + ".json"));

  auto sphere = load_scenario(kDir + "/sphere.json");
  CHECK(sphere.orientation == FrameOrientation::AlongPosition);
  CHECK(sphere.metric("gamma").dim() == 9);
  auto t5 = load_scenario(kDir + "/theorem5.json");
  CHECK(t5.lambda0.size() == 8);
}

TEST_CASE("hash is FNV-1a of the bytes") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  const std::string text = R"({"m":1,"n":1,"grid":{"bounds":[[0,1]],"points":[9]}})";
  CHECK(parse_scenario(text).hash == parse_scenario(text).hash);
  CHECK(parse_scenario(text).hash != parse_scenario(text + " ").hash);
}

TEST_CASE("metrics read only the upper triangle") {
  const std::string head = R"({"m":1,"n":2,"grid":{"bounds":[[0,1]],"points":[9]},"metrics":{)";
  auto full = parse_scenario(head + R"("g":[["2","x1"],["","3"]]}})");
  auto short_rows = parse_scenario(head + R"("g":[["2","x1"],["3"]]}})");
  auto with_null = parse_scenario(head + R"("g":[["2","x1"],[null,"3"]]}})");
  std::vector<double> p{0.1, 0.5, 0.2};
  for (const auto* s : {&full, &short_rows, &with_null}) {
    auto G = s->metric("g").value(p);
    CHECK(G(0, 1) == 0.5);
    CHECK(G(1, 0) == 0.5);
    CHECK(G(1, 1) == 3.0);
  }
  const std::string err = error_of(head + R"("f":[["1","0"],["x1","1"]]}})");
  CHECK(err.find("metrics.f[1][0]") != std::string::npos);
  CHECK(err.find("only the upper triangle") != std::string::npos);
  CHECK(error_of(head + R"("g":[["1"],["1"]]}})").find("metrics.g[0]") != std::string::npos);
}

TEST_CASE("variables outside the declared block are rejected") {
  const std::string head = R"({"m":2,"n":2,"grid":{"bounds":[[0,1],[0,1]],"points":[9,9]},)";
  const std::string x3 = error_of(head + R"("tensors":{"X":[["x3","0"],["0","0"]]}})");
  CHECK(x3.find("tensors.X[0][0]") != std::string::npos);
  CHECK(x3.find("x3") != std::string::npos);
  CHECK(error_of(head + R"("map":["t1","x1"]})").find("outside the allowed block") != std::string::npos);
  CHECK(error_of(head + R"("metrics":{"h":[["1+x1","0"],["","1"]]}})").find("metrics.h") != std::string::npos);
  CHECK(error_of(head + R"("metrics":{"g":[["1+t1","0"],["","1"]]}})").find("metrics.g") != std::string::npos);
  CHECK(error_of(head + R"("tensors":{"Y":[["t1","0"],["0","1"]]}})").find("tensors.Y") != std::string::npos);
  CHECK_NOTHROW(parse_scenario(head + R"("tensors":{"X":[["x1+t2","0"],["0","1"]]}})"));
}

TEST_CASE("malformed documents") {
  CHECK(error_of("{").find("invalid JSON") != std::string::npos);
  CHECK(error_of("[]").find("top level") != std::string::npos);
  CHECK(error_of(R"({"n":1,"grid":{"bounds":[[0,1]],"points":[9]}})").find("m: missing") != std::string::npos);
  CHECK(error_of(R"({"m":1,"n":1,"grid":{"bounds":[[0,1]],"points":[9]},"colour":1})").find("colour: unknown field") !=
        std::string::npos);
  CHECK(error_of(R"({"m":1,"n":1,"grid":{"bounds":[[1,0]],"points":[9]}})").find("low must be below high") !=
        std::string::npos);
  CHECK(error_of(R"({"m":1,"n":1,"grid":{"bounds":[[0,1]],"points":[3]}})").find("grid.points[0]") !=
        std::string::npos);
  CHECK(error_of(R"({"m":1,"n":1,"grid":{"bounds":[[0,1]],"points":[9]},"map":["t1","t1"]})").find("map") !=
        std::string::npos);
  CHECK(error_of(R"({"m":1,"n":1,"grid":{"bounds":[[0,1]],"points":[9]},"seed":-1})").find("seed") !=
        std::string::npos);
  CHECK(error_of(R"({"m":1,"n":1,"grid":{"bounds":[[0,1]],"points":[9]},"frame":"inward"})").find("frame") !=
        std::string::npos);
  CHECK(error_of(R"({"m":1,"n":1,"grid":{"bounds":[[0,1]],"points":[9]},"map":["t1+"]})").find("map[0]") !=
        std::string::npos);
  CHECK(error_of(R"({"m":1,"n":1,"grid":{"bounds":[[0,1]],"points":[9]},"metrics":{"g":[["x1-1"]]}})")
            .find("not positive definite") != std::string::npos);
  CHECK(error_of(R"({"m":1,"n":1,"grid":{"bounds":[[0,1]],"points":[5]},"mapData":[0,1,2]})").find("mapData") !=
        std::string::npos);
  CHECK_THROWS_AS(load_scenario(kDir + "/does-not-exist.json"), ScenarioError);
}

TEST_CASE("optional blocks") {
  auto s = parse_scenario(R"({"m":1,"n":1,"grid":{"bounds":[[0,1]],"points":[5]},
    "mapData":[0,0.25,0.5,0.75,1],"x0":[2],"seed":7,"sampleBox":[[-1,1]],
    "tolerances":{"tol":0.01},"tensors":{"c":"t1*x1"},"name":"line","notes":"free text"})");
  CHECK(s.map_data->size() == 5);
  CHECK((*s.x0)[0] == 2.0);
  CHECK(s.seed == 7);
  CHECK(s.sample_box[0].first == -1.0);
  CHECK(s.tolerances.at("tol") == 0.01);
  CHECK(s.c.has_value());
  CHECK_THROWS_AS(s.tensor("X"), ScenarioError);
  CHECK_THROWS_AS(s.metric("h0"), ScenarioError);
}
