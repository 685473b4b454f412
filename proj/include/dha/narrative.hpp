#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dha/labels.hpp"
#include "dha/record.hpp"

namespace dha {

enum class HazardousDriver { Driver1, Driver2, Both, None };

std::string_view hazardous_driver_name(HazardousDriver value);

// A paired two-vehicle crash: both driver records plus the derived 7-class label.
struct TwoVehicleNarrative {
  std::string crash_id;
  CrashRecord driver1;
  CrashRecord driver2;
  NarrativeLabel label = NarrativeLabel::NHA;
  HazardousDriver hazardous = HazardousDriver::None;
};

struct PromptTriple {
  std::string system;
  std::string user;
  std::string assistant_target;  // one of the 7 class-token strings
};

struct SplitManifest {
  std::uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> eval;
  std::vector<std::string> test;
};

// (HA, None) -> that group's class; (None, None) -> NHA; (HA, HA) -> BDTHA,
// including when both groups are equal. Symmetric in its arguments.
NarrativeLabel derive_label(DhaGroup g1, DhaGroup g2);

// Throws PairingError on crash_id mismatch or duplicate driver_index.
TwoVehicleNarrative pair_records(const CrashRecord& r1, const CrashRecord& r2);

const std::string& system_prompt();
// Deterministic rendering of the fixed three-stage prompt template.
PromptTriple render_prompt(const TwoVehicleNarrative& narrative);
// Escapes the record separator ("; "), backslash, and newline in field values.
std::string escape_prompt_value(std::string_view value);

// Seeded uniform shuffle; sizes floor(0.70 n) / floor(0.15 n) / remainder.
SplitManifest split(const std::vector<std::string>& ids, std::uint64_t seed);

std::string split_manifest_to_json(const SplitManifest& manifest);
SplitManifest split_manifest_from_json(const std::string& text);

}  // namespace dha
