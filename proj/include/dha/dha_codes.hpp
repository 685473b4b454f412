#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace dha {

// The 15 original UD-10 driver hazardous action levels (14 hazardous + None).
enum class DhaCode : int {
  UnableToStopInAssuredClearDistance = 0,
  SpeedTooFast = 1,
  SpeedTooSlow = 2,
  FailedToYield = 3,
  DisregardTrafficControl = 4,
  ImproperLaneUse = 5,
  DroveLeftOfCenter = 6,
  ImproperPassing = 7,
  DroveWrongWay = 8,
  ImproperTurn = 9,
  ImproperBacking = 10,
  ImproperNoSignal = 11,
  CarelessNegligentDriving = 12,
  RecklessDriving = 13,
  None = 14,
};

inline constexpr int kNumDhaCodes = 15;

// Recoded behavior groups. Narrative-level NHA/BDTHA are not record-level
// groups; they live with NarrativeLabel.
enum class DhaGroup : int {
  SSV = 0,
  RWTCV = 1,
  LDV = 2,
  MSE = 3,
  GUD = 4,
  None = 5,
};

inline constexpr int kNumDhaGroups = 6;

constexpr std::array<DhaCode, kNumDhaCodes> all_dha_codes() {
  return {DhaCode::UnableToStopInAssuredClearDistance,
          DhaCode::SpeedTooFast,
          DhaCode::SpeedTooSlow,
          DhaCode::FailedToYield,
          DhaCode::DisregardTrafficControl,
          DhaCode::ImproperLaneUse,
          DhaCode::DroveLeftOfCenter,
          DhaCode::ImproperPassing,
          DhaCode::DroveWrongWay,
          DhaCode::ImproperTurn,
          DhaCode::ImproperBacking,
          DhaCode::ImproperNoSignal,
          DhaCode::CarelessNegligentDriving,
          DhaCode::RecklessDriving,
          DhaCode::None};
}

std::string_view dha_code_name(DhaCode code);
// Fails explicitly (nullopt) on unknown strings; "Other"/"Unknown" are not codes.
std::optional<DhaCode> parse_dha_code(std::string_view name);

std::string_view dha_group_name(DhaGroup group);
std::optional<DhaGroup> parse_dha_group(std::string_view name);

// Total mapping of the 15 codes onto the 6 groups.
DhaGroup recode_dha(DhaCode code);

// Statewide record count per code; used as within-group sampling weights and
// as a documented cross-check of the recode table.
std::uint64_t dha_code_count(DhaCode code);

}  // namespace dha
