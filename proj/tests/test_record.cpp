#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dha/errors.hpp"
#include "dha/generator.hpp"
#include "dha/record.hpp"

#include "json.hpp"

using namespace dha;

namespace {

std::map<std::string, std::string> valid_raw() {
  return {
      {"crash_id", "C1"},      {"driver_index", "1"},
      {"crash_type", "rear_end"}, {"month", "mar"},
      {"weekday", "tue"},      {"hour_band", "midday"},
      {"intersection", "intersection"}, {"hit_and_run", "no"},
      {"age", "34"},           {"sex", "female"},
      {"distracted", "false"}, {"maneuver", "going_straight"},
      {"vehicle_type", "suv"}, {"speed_limit", "45"},
      {"road_condition", "dry"}, {"lanes", "2"},
      {"trafficway", "two_way_undivided"}, {"surface", "asphalt"},
      {"weather", "clear"},    {"lighting", "daylight"},
      {"dha", "Failed to Yield"},
  };
}

}  // namespace

TEST_CASE("valid record passes through unchanged") {
  auto res = filter_record(valid_raw());
  REQUIRE(std::holds_alternative<CrashRecord>(res));
  const CrashRecord& r = std::get<CrashRecord>(res);
  CHECK(r.crash_id == "C1");
  CHECK(r.age == 34);
  CHECK(r.speed_limit == 45);
  CHECK(r.dha == DhaCode::FailedToYield);
  CHECK(record_to_map(r) == valid_raw());
}

TEST_CASE("dha Other/Unknown rejected") {
  for (const char* v : {"Other", "Unknown"}) {
    auto raw = valid_raw();
    raw["dha"] = v;
    auto res = filter_record(raw);
    REQUIRE(std::holds_alternative<Rejection>(res));
    CHECK(std::get<Rejection>(res).reason == RejectReason::DhaOtherUnknown);
  }
}

TEST_CASE("invalid marker rejected before level checks") {
  auto raw = valid_raw();
  raw["weather"] = "invalid";
  auto res = filter_record(raw);
  REQUIRE(std::holds_alternative<Rejection>(res));
  CHECK(std::get<Rejection>(res).reason == RejectReason::FieldInvalid);
  CHECK(std::get<Rejection>(res).detail == "weather");
}

TEST_CASE("out-of-schema levels rejected") {
  auto bad = [](const char* key, const char* value) {
    auto raw = valid_raw();
    raw[key] = value;
    auto res = filter_record(raw);
    REQUIRE(std::holds_alternative<Rejection>(res));
    CHECK(std::get<Rejection>(res).reason == RejectReason::LevelOutOfSchema);
  };
  bad("weather", "hail");
  bad("age", "13");          // below minimum
  bad("age", "forty");
  bad("speed_limit", "95");  // above maximum
  bad("lanes", "0");
  bad("distracted", "maybe");
  bad("dha", "Tailgating");
}

TEST_CASE("malformed maps throw") {
  auto raw = valid_raw();
  raw.erase("weather");
  CHECK_THROWS_AS((void)filter_record(raw), ParseError);

  raw = valid_raw();
  raw["driver_index"] = "3";
  CHECK_THROWS_AS((void)filter_record(raw), ParseError);

  raw = valid_raw();
  raw["extra_field"] = "x";
  CHECK_THROWS_AS((void)filter_record(raw), ParseError);
}

TEST_CASE("filtering is idempotent over a generated corpus") {
  GeneratorConfig cfg = GeneratorConfig::defaults();
  cfg.n_pairs = 200;
  cfg.seed = 99;
  for (const GeneratedPair& p : generate_pairs(cfg)) {
    for (const CrashRecord* rec : {&p.driver1, &p.driver2}) {
      auto once = filter_record(record_to_map(*rec));
      REQUIRE(std::holds_alternative<CrashRecord>(once));
      auto twice = filter_record(record_to_map(std::get<CrashRecord>(once)));
      REQUIRE(std::holds_alternative<CrashRecord>(twice));
      CHECK(std::get<CrashRecord>(once) == std::get<CrashRecord>(twice));
      CHECK(std::get<CrashRecord>(once) == *rec);
    }
  }
}

TEST_CASE("csv and jsonl round trips") {
  auto res = filter_record(valid_raw());
  const CrashRecord& r = std::get<CrashRecord>(res);

  auto from_csv = filter_record(csv_row_to_map(record_to_csv_row(r)));
  REQUIRE(std::holds_alternative<CrashRecord>(from_csv));
  CHECK(std::get<CrashRecord>(from_csv) == r);

  auto from_json = filter_record(json_line_to_map(record_to_json_line(r)));
  REQUIRE(std::holds_alternative<CrashRecord>(from_json));
  CHECK(std::get<CrashRecord>(from_json) == r);

  CHECK_THROWS_AS((void)csv_row_to_map("a,b,c"), ParseError);
}

TEST_CASE("schema file lists every field with level sets") {
  nlohmann::json j = nlohmann::json::parse(schema_json());
  REQUIRE(j.contains("fields"));
  // 18 descriptive + crash_id + driver_index + dha
  CHECK(j["fields"].size() == 21);
  bool saw_weather = false, saw_dha = false;
  for (const auto& f : j["fields"]) {
    if (f["name"] == "weather") {
      saw_weather = true;
      CHECK(f["kind"] == "categorical");
      CHECK(f["levels"].size() == 7);
    }
    if (f["name"] == "dha") {
      saw_dha = true;
      CHECK(f["levels"].size() == 15);
    }
  }
  CHECK(saw_weather);
  CHECK(saw_dha);
}

TEST_CASE("rejection log rows") {
  CHECK(rejections_csv_header() == "crash_id,driver_index,reason");
  Rejection rej{"C7", 2, RejectReason::FieldInvalid, "weather"};
  CHECK(rejection_to_csv_row(rej) == "C7,2,FIELD_INVALID");
}
