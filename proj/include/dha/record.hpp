#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dha/dha_codes.hpp"

namespace dha {

// One driver's row of a two-vehicle crash. 18 descriptive fields grouped
// 6 (crash) / 5 (driver) / 5 (road) / 2 (environment), plus keys and the
// original DHA code.
struct CrashRecord {
  std::string crash_id;
  int driver_index = 1;  // 1 or 2

  // crash information (shared by both drivers of a crash)
  std::string crash_type;
  std::string month;
  std::string weekday;
  std::string hour_band;
  std::string intersection;
  std::string hit_and_run;

  // driver information
  int age = 14;
  std::string sex;
  bool distracted = false;
  std::string maneuver;
  std::string vehicle_type;

  // road characteristics (shared)
  int speed_limit = 25;
  std::string road_condition;
  int lanes = 2;
  std::string trafficway;
  std::string surface;

  // environmental conditions (shared)
  std::string weather;
  std::string lighting;

  DhaCode dha = DhaCode::None;

  bool operator==(const CrashRecord&) const = default;
};

enum class RejectReason {
  DhaOtherUnknown,
  FieldInvalid,
  LevelOutOfSchema,
};

std::string_view reject_reason_name(RejectReason reason);

struct Rejection {
  std::string crash_id;
  int driver_index = 0;
  RejectReason reason = RejectReason::LevelOutOfSchema;
  std::string detail;  // offending field for diagnostics
};

using FilterResult = std::variant<CrashRecord, Rejection>;

// Field-level schema: categorical level sets and integer ranges.
struct FieldSpec {
  std::string name;
  std::string group;                // crash_info / driver_info / road / environment / key
  enum class Kind { Categorical, Integer, Boolean } kind;
  std::vector<std::string> levels;  // categorical only
  int min = 0, max = 0;             // integer only
};

const std::vector<FieldSpec>& record_schema();
const FieldSpec& field_spec(std::string_view name);

// Raw map -> validated record or rejection. Throws ParseError on structurally
// malformed maps (missing keys, bad driver_index).
FilterResult filter_record(const std::map<std::string, std::string>& raw);

// Field-map view of a record; inverse of the accepting path of filter_record.
std::map<std::string, std::string> record_to_map(const CrashRecord& record);

// CSV with a fixed header, one row per driver.
std::string records_csv_header();
std::string record_to_csv_row(const CrashRecord& record);
std::map<std::string, std::string> csv_row_to_map(const std::string& line);

// Line-delimited JSON twin of the CSV.
std::string record_to_json_line(const CrashRecord& record);
std::map<std::string, std::string> json_line_to_map(const std::string& line);

// Schema file: every field with its level set / range, as JSON.
std::string schema_json();

std::string rejections_csv_header();
std::string rejection_to_csv_row(const Rejection& rejection);

}  // namespace dha
