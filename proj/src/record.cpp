#include "dha/record.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "dha/errors.hpp"
#include "dha/io_util.hpp"

#include "json.hpp"

namespace dha {

namespace {

using Kind = FieldSpec::Kind;

std::vector<FieldSpec> build_schema() {
  std::vector<FieldSpec> s;
  auto cat = [&](std::string name, std::string group, std::vector<std::string> levels) {
    s.push_back({std::move(name), std::move(group), Kind::Categorical, std::move(levels), 0, 0});
  };
  auto integer = [&](std::string name, std::string group, int min, int max) {
    s.push_back({std::move(name), std::move(group), Kind::Integer, {}, min, max});
  };
  auto boolean = [&](std::string name, std::string group) {
    s.push_back({std::move(name), std::move(group), Kind::Boolean, {"true", "false"}, 0, 0});
  };

  cat("crash_type", "crash_info",
      {"rear_end", "angle", "head_on", "sideswipe_same", "sideswipe_opposite",
       "backing_crash", "other"});
  cat("month", "crash_info",
      {"jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct",
       "nov", "dec"});
  cat("weekday", "crash_info", {"mon", "tue", "wed", "thu", "fri", "sat", "sun"});
  cat("hour_band", "crash_info",
      {"overnight", "morning_rush", "midday", "evening_rush", "night"});
  cat("intersection", "crash_info", {"intersection", "non_intersection", "driveway"});
  cat("hit_and_run", "crash_info", {"yes", "no"});

  integer("age", "driver_info", 14, 97);
  cat("sex", "driver_info", {"male", "female"});
  boolean("distracted", "driver_info");
  cat("maneuver", "driver_info",
      {"going_straight", "turning_left", "turning_right", "backing",
       "changing_lanes", "overtaking", "slowing_or_stopped", "merging"});
  cat("vehicle_type", "driver_info",
      {"passenger_car", "suv", "pickup", "van", "motorcycle", "truck_bus"});

  integer("speed_limit", "road", 5, 85);
  cat("road_condition", "road", {"dry", "wet", "snowy", "icy", "slushy", "debris"});
  integer("lanes", "road", 1, 8);
  cat("trafficway", "road",
      {"two_way_undivided", "divided_with_barrier", "divided_no_barrier",
       "two_way_left_turn_lane", "one_way"});
  cat("surface", "road", {"asphalt", "concrete", "gravel", "unpaved"});

  cat("weather", "environment",
      {"clear", "cloudy", "rain", "snow", "fog", "sleet_hail", "severe_wind"});
  cat("lighting", "environment",
      {"daylight", "dawn", "dusk", "dark_lighted", "dark_unlighted"});
  return s;
}

const std::vector<std::string> kColumnOrder = {
    "crash_id",    "driver_index",   "crash_type", "month",      "weekday",
    "hour_band",   "intersection",   "hit_and_run", "age",       "sex",
    "distracted",  "maneuver",       "vehicle_type", "speed_limit",
    "road_condition", "lanes",       "trafficway", "surface",    "weather",
    "lighting",    "dha"};

bool parse_int_field(const std::string& text, int& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

std::string* field_slot(CrashRecord& r, std::string_view name) {
  if (name == "crash_type") return &r.crash_type;
  if (name == "month") return &r.month;
  if (name == "weekday") return &r.weekday;
  if (name == "hour_band") return &r.hour_band;
  if (name == "intersection") return &r.intersection;
  if (name == "hit_and_run") return &r.hit_and_run;
  if (name == "sex") return &r.sex;
  if (name == "maneuver") return &r.maneuver;
  if (name == "vehicle_type") return &r.vehicle_type;
  if (name == "road_condition") return &r.road_condition;
  if (name == "trafficway") return &r.trafficway;
  if (name == "surface") return &r.surface;
  if (name == "weather") return &r.weather;
  if (name == "lighting") return &r.lighting;
  return nullptr;
}

}  // namespace

const std::vector<FieldSpec>& record_schema() {
  static const std::vector<FieldSpec> schema = build_schema();
  return schema;
}

const FieldSpec& field_spec(std::string_view name) {
  for (const FieldSpec& f : record_schema()) {
    if (f.name == name) return f;
  }
  throw ParseError("unknown field: " + std::string(name));
}

std::string_view reject_reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::DhaOtherUnknown: return "DHA_OTHER_UNKNOWN";
    case RejectReason::FieldInvalid: return "FIELD_INVALID";
    case RejectReason::LevelOutOfSchema: return "LEVEL_OUT_OF_SCHEMA";
  }
  return "UNKNOWN";
}

FilterResult filter_record(const std::map<std::string, std::string>& raw) {
  for (const std::string& key : kColumnOrder) {
    if (!raw.count(key)) throw ParseError("missing field: " + key);
  }
  if (raw.size() != kColumnOrder.size()) {
    throw ParseError("unexpected extra fields in record map");
  }

  const std::string& crash_id = raw.at("crash_id");
  int driver_index = 0;
  if (!parse_int_field(raw.at("driver_index"), driver_index) ||
      (driver_index != 1 && driver_index != 2)) {
    throw ParseError("driver_index must be 1 or 2");
  }

  auto reject = [&](RejectReason reason, std::string detail) {
    return Rejection{crash_id, driver_index, reason, std::move(detail)};
  };

  const std::string& dha_text = raw.at("dha");
  if (dha_text == "Other" || dha_text == "Unknown") {
    return reject(RejectReason::DhaOtherUnknown, "dha");
  }
  for (const FieldSpec& f : record_schema()) {
    if (raw.at(f.name) == "invalid") {
      return reject(RejectReason::FieldInvalid, f.name);
    }
  }
  if (dha_text == "invalid") return reject(RejectReason::FieldInvalid, "dha");

  auto dha = parse_dha_code(dha_text);
  if (!dha) return reject(RejectReason::LevelOutOfSchema, "dha");

  CrashRecord rec;
  rec.crash_id = crash_id;
  rec.driver_index = driver_index;
  rec.dha = *dha;
  for (const FieldSpec& f : record_schema()) {
    const std::string& value = raw.at(f.name);
    switch (f.kind) {
      case Kind::Categorical: {
        if (std::find(f.levels.begin(), f.levels.end(), value) == f.levels.end()) {
          return reject(RejectReason::LevelOutOfSchema, f.name);
        }
        *field_slot(rec, f.name) = value;
        break;
      }
      case Kind::Integer: {
        int v = 0;
        if (!parse_int_field(value, v) || v < f.min || v > f.max) {
          return reject(RejectReason::LevelOutOfSchema, f.name);
        }
        if (f.name == "age") rec.age = v;
        else if (f.name == "speed_limit") rec.speed_limit = v;
        else rec.lanes = v;
        break;
      }
      case Kind::Boolean: {
        if (value != "true" && value != "false") {
          return reject(RejectReason::LevelOutOfSchema, f.name);
        }
        rec.distracted = (value == "true");
        break;
      }
    }
  }
  return rec;
}

std::map<std::string, std::string> record_to_map(const CrashRecord& r) {
  std::map<std::string, std::string> m;
  m["crash_id"] = r.crash_id;
  m["driver_index"] = std::to_string(r.driver_index);
  m["crash_type"] = r.crash_type;
  m["month"] = r.month;
  m["weekday"] = r.weekday;
  m["hour_band"] = r.hour_band;
  m["intersection"] = r.intersection;
  m["hit_and_run"] = r.hit_and_run;
  m["age"] = std::to_string(r.age);
  m["sex"] = r.sex;
  m["distracted"] = r.distracted ? "true" : "false";
  m["maneuver"] = r.maneuver;
  m["vehicle_type"] = r.vehicle_type;
  m["speed_limit"] = std::to_string(r.speed_limit);
  m["road_condition"] = r.road_condition;
  m["lanes"] = std::to_string(r.lanes);
  m["trafficway"] = r.trafficway;
  m["surface"] = r.surface;
  m["weather"] = r.weather;
  m["lighting"] = r.lighting;
  m["dha"] = std::string(dha_code_name(r.dha));
  return m;
}

std::string records_csv_header() {
  std::string out;
  for (std::size_t i = 0; i < kColumnOrder.size(); ++i) {
    if (i) out += ',';
    out += kColumnOrder[i];
  }
  return out;
}

std::string record_to_csv_row(const CrashRecord& r) {
  auto m = record_to_map(r);
  std::string out;
  for (std::size_t i = 0; i < kColumnOrder.size(); ++i) {
    if (i) out += ',';
    out += csv_field(m.at(kColumnOrder[i]));
  }
  return out;
}

std::map<std::string, std::string> csv_row_to_map(const std::string& line) {
  auto fields = split_csv_line(line);
  if (fields.size() != kColumnOrder.size()) {
    throw ParseError("expected " + std::to_string(kColumnOrder.size()) +
                     " CSV fields, got " + std::to_string(fields.size()));
  }
  std::map<std::string, std::string> m;
  for (std::size_t i = 0; i < kColumnOrder.size(); ++i) m[kColumnOrder[i]] = fields[i];
  return m;
}

std::string record_to_json_line(const CrashRecord& r) {
  nlohmann::json j;
  for (auto& [k, v] : record_to_map(r)) j[k] = v;
  return j.dump();
}

std::map<std::string, std::string> json_line_to_map(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  std::map<std::string, std::string> m;
  for (auto it = j.begin(); it != j.end(); ++it) {
    m[it.key()] = it.value().get<std::string>();
  }
  return m;
}

std::string schema_json() {
  nlohmann::json fields = nlohmann::json::array();
  fields.push_back({{"name", "crash_id"}, {"group", "key"}, {"kind", "identifier"}});
  fields.push_back(
      {{"name", "driver_index"}, {"group", "key"}, {"kind", "integer"}, {"min", 1}, {"max", 2}});
  for (const FieldSpec& f : record_schema()) {
    nlohmann::json jf;
    jf["name"] = f.name;
    jf["group"] = f.group;
    switch (f.kind) {
      case Kind::Categorical: jf["kind"] = "categorical"; jf["levels"] = f.levels; break;
      case Kind::Integer: jf["kind"] = "integer"; jf["min"] = f.min; jf["max"] = f.max; break;
      case Kind::Boolean: jf["kind"] = "boolean"; jf["levels"] = f.levels; break;
    }
    fields.push_back(jf);
  }
  nlohmann::json dha_levels = nlohmann::json::array();
  for (DhaCode code : all_dha_codes()) dha_levels.push_back(std::string(dha_code_name(code)));
  fields.push_back({{"name", "dha"}, {"group", "target"}, {"kind", "categorical"},
                    {"levels", dha_levels}});
  nlohmann::json j;
  j["fields"] = fields;
  return j.dump(2) + "\n";
}

std::string rejections_csv_header() { return "crash_id,driver_index,reason"; }

std::string rejection_to_csv_row(const Rejection& rejection) {
  return csv_field(rejection.crash_id) + "," + std::to_string(rejection.driver_index) +
         "," + std::string(reject_reason_name(rejection.reason));
}

}  // namespace dha
