#include "dha/dha_codes.hpp"

#include <cstddef>

namespace dha {

namespace {

struct CodeRow {
  DhaCode code;
  std::string_view name;
  DhaGroup group;
  std::uint64_t count;
};

constexpr CodeRow kCodeTable[kNumDhaCodes] = {
    {DhaCode::UnableToStopInAssuredClearDistance, "Unable to Stop in Assured Clear Distance", DhaGroup::SSV, 216022},
    {DhaCode::SpeedTooFast, "Speed Too Fast", DhaGroup::SSV, 25286},
    {DhaCode::SpeedTooSlow, "Speed Too Slow", DhaGroup::SSV, 339},
    {DhaCode::FailedToYield, "Failed to Yield", DhaGroup::RWTCV, 183069},
    {DhaCode::DisregardTrafficControl, "Disregard Traffic Control", DhaGroup::RWTCV, 39007},
    {DhaCode::ImproperLaneUse, "Improper Lane Use", DhaGroup::LDV, 43250},
    {DhaCode::DroveLeftOfCenter, "Drove Left of Center", DhaGroup::LDV, 6369},
    {DhaCode::ImproperPassing, "Improper Passing", DhaGroup::LDV, 9676},
    {DhaCode::DroveWrongWay, "Drove Wrong Way", DhaGroup::LDV, 1106},
    {DhaCode::ImproperTurn, "Improper Turn", DhaGroup::MSE, 19763},
    {DhaCode::ImproperBacking, "Improper Backing", DhaGroup::MSE, 15651},
    {DhaCode::ImproperNoSignal, "Improper/No Signal", DhaGroup::MSE, 1705},
    {DhaCode::CarelessNegligentDriving, "Careless/Negligent Driving", DhaGroup::GUD, 14846},
    {DhaCode::RecklessDriving, "Reckless Driving", DhaGroup::GUD, 3183},
    {DhaCode::None, "None", DhaGroup::None, 585342},
};

constexpr std::string_view kGroupNames[kNumDhaGroups] = {"SSV", "RWTCV", "LDV",
                                                         "MSE", "GUD", "None"};

}  // namespace

std::string_view dha_code_name(DhaCode code) {
  return kCodeTable[static_cast<int>(code)].name;
}

std::optional<DhaCode> parse_dha_code(std::string_view name) {
  for (const CodeRow& row : kCodeTable) {
    if (row.name == name) return row.code;
  }
  return std::nullopt;
}

std::string_view dha_group_name(DhaGroup group) {
  return kGroupNames[static_cast<int>(group)];
}

std::optional<DhaGroup> parse_dha_group(std::string_view name) {
  for (int i = 0; i < kNumDhaGroups; ++i) {
    if (kGroupNames[i] == name) return static_cast<DhaGroup>(i);
  }
  return std::nullopt;
}

DhaGroup recode_dha(DhaCode code) {
  return kCodeTable[static_cast<int>(code)].group;
}

std::uint64_t dha_code_count(DhaCode code) {
  return kCodeTable[static_cast<int>(code)].count;
}

}  // namespace dha
