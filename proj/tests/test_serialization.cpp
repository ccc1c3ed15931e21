#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "accel_alloc/config.hpp"
#include "accel_alloc/serialization.hpp"

using namespace accel_alloc;

namespace {

SearchResult sample_result(bool feasible) {
  SearchResult r;
  r.method = "sa";
  r.evaluations = 3;
  r.trace = {{1, kInf}, {2, 1234.5}, {3, 0.1 + 0.2}};
  if (feasible) {
    r.feasible = true;
    r.best_value = 0.1 + 0.2;
    r.best_genome = Genome{{3, 1, Dataflow::EYE}, {0, 11, Dataflow::SHI}};
    r.best_design = decode(*r.best_genome, default_levels());
    r.first_feasible = TracePoint{2, 1234.5};
  }
  return r;
}

}  // namespace

TEST_CASE("numbers round-trip exactly") {
  for (double v : {0.0, 1.0, 0.1 + 0.2, 66289.28, 1e-300, 123456789.123, kInf}) {
    CAPTURE(v);
    CHECK(parse_number(format_number(v)) == v);
  }
  CHECK(format_number(kInf) == "inf");
  CHECK(format_number(288.0) == "288");
  CHECK_THROWS_AS(parse_number("12x"), std::invalid_argument);
}

TEST_CASE("trace CSV round-trip") {
  const auto trace = sample_result(false).trace;
  const std::string csv = trace_to_csv(trace);
  CHECK(csv.rfind("epoch,best_value\n", 0) == 0);
  CHECK(trace_from_csv(csv) == trace);
  CHECK_THROWS_AS(trace_from_csv("step,value\n1,2\n"), std::invalid_argument);
}

TEST_CASE("result JSON round-trip") {
  for (bool feasible : {true, false}) {
    CAPTURE(feasible);
    const SearchResult r = sample_result(feasible);
    const RunInfo info{"toy2", "mix", "lp", "latency", "sum", "area:60000", 42};
    const nlohmann::json doc = result_to_json(r, info);
    CHECK(doc["feasible"] == feasible);
    if (!feasible) CHECK(doc["best_value"].is_null());

    RunInfo back_info;
    const SearchResult back = result_from_json(nlohmann::json::parse(doc.dump()), &back_info);
    CHECK(back.method == r.method);
    CHECK(back.best_value == r.best_value);
    CHECK(back.feasible == r.feasible);
    CHECK(back.evaluations == r.evaluations);
    CHECK(back.best_design == r.best_design);
    CHECK(back.best_genome == r.best_genome);
    CHECK(back.first_feasible == r.first_feasible);
    CHECK(back_info.model == "toy2");
    CHECK(back_info.constraint == "area:60000");
    CHECK(back_info.seed == std::optional<std::uint64_t>(42));
    CHECK(result_to_json(back, back_info).dump() == doc.dump());
  }
}

TEST_CASE("design entries") {
  const ActionLevels levels = default_levels();
  const auto by_level = nlohmann::json::parse(R"([{"pe_level":1,"buf_level":1},{"pe_level":0,"buf_level":0}])");
  const Design d = design_from_json(by_level, &levels, Dataflow::SHI);
  CHECK(d == Design{{2, 2, Dataflow::SHI}, {1, 1, Dataflow::SHI}});
  CHECK_THROWS_AS(design_from_json(by_level, nullptr, Dataflow::DLA), std::invalid_argument);

  const auto by_value = nlohmann::json::parse(R"([{"pe":7,"k":3,"dataflow":"eye"}])");
  CHECK(design_from_json(by_value, nullptr, Dataflow::DLA) == Design{{7, 3, Dataflow::EYE}});
  CHECK_THROWS_AS(design_from_json(nlohmann::json::parse(R"([{"pe":0,"k":3}])"), nullptr, Dataflow::DLA),
                  std::invalid_argument);
}

TEST_CASE("config parsing") {
  const AppConfig cfg = parse_config(R"({"bandwidth": 32, "presets": {"edge": "area:5000"},
                                         "levels": {"pe_values": [1, 4], "buf_values": [2, 6]}})");
  CHECK(cfg.hw.bandwidth == 32.0);
  CHECK(cfg.hw.e_dram == HwConstants{}.e_dram);
  CHECK(cfg.levels.pe_values == std::vector<std::int64_t>{1, 4});
  CHECK(cfg.presets.at("edge") == "area:5000");
  CHECK_THROWS_WITH_AS(parse_config(R"({"bandwith": 3})"), doctest::Contains("bandwith"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"bandwidth": -1})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("{"), std::invalid_argument);

  const ConstraintSpec edge = parse_constraint("edge", Deployment::LS, cfg.presets);
  CHECK(edge.kind == ConstraintKind::Area);
  CHECK(edge.area_limit == 5000.0);
  CHECK(edge.deployment == Deployment::LS);
  const ConstraintSpec counts = parse_constraint("counts:256:1024", Deployment::LP);
  CHECK(counts.pe_limit == 256.0);
  CHECK(counts.buf_limit == 1024.0);
  CHECK(parse_constraint("power:500", Deployment::LP).power_limit == 500.0);
  CHECK(parse_constraint("unconstrained", Deployment::LP).is_unconstrained());
  CHECK_THROWS_AS(parse_constraint("area:-5", Deployment::LP), std::invalid_argument);
  CHECK_THROWS_AS(parse_constraint("volume:5", Deployment::LP), std::invalid_argument);
}

TEST_CASE("shipped config") {
  const AppConfig cfg = load_config(ACCEL_ALLOC_SOURCE_DIR "/config/default.json");
  CHECK(cfg.levels == default_levels());
  CHECK(cfg.presets.at("iot") == "area:60000");
  CHECK(cfg.presets.at("cloud") == "area:600000");
  CHECK(default_config().presets == cfg.presets);
  CHECK(default_config().levels == cfg.levels);
}
