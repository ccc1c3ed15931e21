#include <doctest.h>

#include <stdexcept>

#include "accel_alloc/cost_model.hpp"
#include "accel_alloc/workloads.hpp"

using namespace accel_alloc;

TEST_CASE("parse a CONV model") {
  const ModelDesc m = parse_model(R"({"name":"one","layers":[
    {"kind":"CONV","K":4,"C":3,"Y":6,"X":6,"R":3,"S":3,"stride":1}]})");
  CHECK(m.name == "one");
  REQUIRE(m.layers.size() == 1);
  const LayerShape& l = m.layers[0];
  CHECK(l.kind == LayerKind::CONV);
  CHECK(l.K == 4);
  CHECK(l.C == 3);
  CHECK(l.stride == 1);
}

TEST_CASE("stride and name defaults") {
  const ModelDesc m = parse_model(R"({"layers":[{"kind":"DWCONV","K":8,"C":8,"Y":5,"X":5,"R":3,"S":3}]})");
  CHECK(m.name == "unnamed");
  CHECK(m.layers[0].kind == LayerKind::DWCONV);
  CHECK(m.layers[0].stride == 1);
}

TEST_CASE("GEMM entries map onto a convolution shape") {
  const ModelDesc m = parse_model(R"({"layers":[{"kind":"GEMM","M":32,"N":64,"K":128}]})");
  REQUIRE(m.layers.size() == 1);
  const LayerShape& l = m.layers[0];
  CHECK(l.kind == LayerKind::GEMM);
  CHECK(l.K == 64);
  CHECK(l.C == 128);
  CHECK(l.Y == 32);
  CHECK(l.X == 1);
  CHECK(l.R == 1);
  CHECK(l.S == 1);
  CHECK(macs(l) == 262144);

  CHECK(macs(gemm_to_layer(1, 1, 1)) == 1);
  const LayerShape small = gemm_to_layer(5, 1, 7);
  CHECK(small.K == 1);
  CHECK(small.C == 7);
  CHECK(small.Y == 5);
  CHECK(macs(small) == 35);
  CHECK_THROWS_AS(gemm_to_layer(0, 1, 1), std::invalid_argument);
}

TEST_CASE("model validation errors name the layer and field") {
  CHECK_THROWS_WITH_AS(
      parse_model(R"({"layers":[{"kind":"CONV","K":0,"C":3,"Y":6,"X":6,"R":3,"S":3}]})"),
      doctest::Contains("layer 0: K must be >= 1"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      parse_model(R"({"layers":[{"kind":"CONV","K":1,"C":3,"Y":6,"X":6,"R":3,"S":3},
                                {"kind":"DWCONV","K":4,"C":3,"Y":6,"X":6,"R":3,"S":3}]})"),
      doctest::Contains("layer 1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_model(R"({"layers":[]})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_model(R"({"layers":[{"kind":"POOL","K":1}]})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_model(R"({"layers":[{"kind":"CONV","K":1}]})"), std::invalid_argument);
}

TEST_CASE("malformed JSON reports a position") {
  CHECK_THROWS_WITH_AS(parse_model("{\n  \"layers\": [\n  }"), doctest::Contains("line"),
                       std::invalid_argument);
}

TEST_CASE("serialize round-trips") {
  for (const std::string& name : builtin_names()) {
    CAPTURE(name);
    const ModelDesc m = builtin(name);
    CHECK(parse_model(serialize_model(m)) == m);
  }
  const ModelDesc gemm = parse_model(R"({"name":"g","layers":[{"kind":"GEMM","M":3,"N":5,"K":7}]})");
  CHECK(parse_model(serialize_model(gemm)) == gemm);
}

TEST_CASE("builtin fixtures") {
  const ModelDesc toy2 = builtin("toy2");
  REQUIRE(toy2.layers.size() == 2);
  CHECK(toy2.layers[0].kind == LayerKind::CONV);
  CHECK(toy2.layers[1].kind == LayerKind::DWCONV);

  const ModelDesc toy3 = builtin("toy3");
  REQUIRE(toy3.layers.size() == 3);
  CHECK(toy3.layers[2].kind == LayerKind::GEMM);

  const ModelDesc mb = builtin("mobilenet_v2_like");
  CHECK(mb.layers.size() == 52);
  bool has_dw = false;
  for (const auto& l : mb.layers) {
    CHECK_NOTHROW(validate(l));
    has_dw = has_dw || l.kind == LayerKind::DWCONV;
  }
  CHECK(has_dw);

  CHECK_THROWS_WITH_AS(builtin("unknown"), doctest::Contains("toy2"), std::invalid_argument);
}
