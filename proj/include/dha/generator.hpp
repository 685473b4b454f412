#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dha/labels.hpp"
#include "dha/narrative.hpp"
#include "dha/record.hpp"

namespace dha {

// Categorical distribution over a field's levels (parallel to the field's
// level list; integer fields use an explicit value list).
struct LevelTable {
  std::vector<std::string> levels;
  std::vector<double> probs;  // sums to 1
};

// Per-class conditional tables. Shared crash/road/environment fields are
// conditioned on the 7-way narrative label; per-driver fields are conditioned
// on the driver's own recoded group (None for a non-hazardous driver), which
// is what makes single-HA, both-HA and no-HA narratives structurally distinct.
struct ConditionalTables {
  // field name -> 7 tables (NarrativeLabel order)
  std::map<std::string, std::array<LevelTable, kNumClasses>> shared;
  // field name -> 6 tables (DhaGroup order)
  std::map<std::string, std::array<LevelTable, kNumDhaGroups>> driver;
  // joint table over (crash_type, intersection), per class; these two fields
  // carry an interaction pattern, so they are drawn together
  std::array<LevelTable, kNumClasses> crash_type_x_intersection;
};

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::size_t n_pairs = 1000;
  std::array<double, kNumClasses> class_probabilities{};  // sums to 1
  ConditionalTables tables;
  double distraction_base_rate = 0.04;
  double teen_base_rate = 0.04;
  // probability mass placed on a class-characteristic level when building the
  // default tables
  double signal_sharpness = 0.7;

  static GeneratorConfig defaults(double sharpness = 0.7);
};

// Normalized Table-2 test-set supports; the default class prior.
std::array<double, kNumClasses> default_class_probabilities();

// Throws ConfigError when distributions do not sum to 1 (1e-9) or rates are
// outside [0, 1].
void validate(const GeneratorConfig& config);

struct GeneratedPair {
  CrashRecord driver1;
  CrashRecord driver2;
  NarrativeLabel label = NarrativeLabel::NHA;
};

// Deterministic under (config, seed); pair i depends only on its own RNG
// substream, so disjoint index ranges can be produced in parallel with output
// identical to the serial run.
std::vector<GeneratedPair> generate_pairs(const GeneratorConfig& config);
GeneratedPair generate_pair(const GeneratorConfig& config, std::size_t index);

}  // namespace dha
