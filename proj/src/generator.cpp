#include "dha/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dha/errors.hpp"
#include "dha/rng.hpp"

namespace dha {

namespace {

constexpr double kTableTolerance = 1e-9;

// Per-driver hazardous-group prior for BDTHA narratives: statewide code
// counts aggregated by group.
std::array<double, 5> hazardous_group_prior() {
  std::array<double, 5> totals{};
  for (DhaCode code : all_dha_codes()) {
    DhaGroup g = recode_dha(code);
    if (g != DhaGroup::None) totals[static_cast<int>(g)] += static_cast<double>(dha_code_count(code));
  }
  double sum = 0.0;
  for (double t : totals) sum += t;
  for (double& t : totals) t /= sum;
  return totals;
}

LevelTable uniform_table(std::vector<std::string> levels) {
  LevelTable t;
  double p = 1.0 / static_cast<double>(levels.size());
  t.probs.assign(levels.size(), p);
  t.levels = std::move(levels);
  return t;
}

// One characteristic level gets `sharp` mass, the rest is spread evenly.
LevelTable peaked_table(std::vector<std::string> levels, const std::string& peak,
                        double sharp) {
  LevelTable t;
  double rest = (1.0 - sharp) / static_cast<double>(levels.size() - 1);
  t.probs.assign(levels.size(), rest);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == peak) t.probs[i] = sharp;
  }
  t.levels = std::move(levels);
  return t;
}

LevelTable weighted_table(std::vector<std::string> levels, std::vector<double> probs) {
  return LevelTable{std::move(levels), std::move(probs)};
}

std::vector<std::string> schema_levels(const std::string& field) {
  return field_spec(field).levels;
}

std::vector<std::string> int_levels(std::initializer_list<int> values) {
  std::vector<std::string> out;
  for (int v : values) out.push_back(std::to_string(v));
  return out;
}

// Joint (crash_type, intersection) table. SSV and RWTCV place their mass on
// opposite pairings of the same two crash types and the same two intersection
// levels, so their single-field marginals coincide and only the interaction
// separates them. The remaining classes peak on one combination.
LevelTable joint_table(NarrativeLabel label, double sharp) {
  std::vector<std::string> combos;
  for (const std::string& ct : schema_levels("crash_type")) {
    for (const std::string& ix : schema_levels("intersection")) {
      combos.push_back(ct + "|" + ix);
    }
  }
  const double bg = (1.0 - sharp) / static_cast<double>(combos.size());
  LevelTable t;
  t.levels = combos;
  t.probs.assign(combos.size(), bg);
  auto add = [&](const std::string& combo, double mass) {
    for (std::size_t i = 0; i < t.levels.size(); ++i) {
      if (t.levels[i] == combo) t.probs[i] += mass;
    }
  };
  switch (label) {
    case NarrativeLabel::SSV:
      add("rear_end|non_intersection", sharp / 2);
      add("angle|intersection", sharp / 2);
      break;
    case NarrativeLabel::RWTCV:
      add("rear_end|intersection", sharp / 2);
      add("angle|non_intersection", sharp / 2);
      break;
    case NarrativeLabel::LDV: add("sideswipe_opposite|non_intersection", sharp); break;
    case NarrativeLabel::MSE: add("backing_crash|driveway", sharp); break;
    case NarrativeLabel::GUD: add("head_on|non_intersection", sharp); break;
    case NarrativeLabel::NHA: add("other|intersection", sharp); break;
    case NarrativeLabel::BDTHA: add("sideswipe_same|intersection", sharp); break;
  }
  return t;
}

void check_table(const LevelTable& t, const std::string& what) {
  if (t.levels.empty() || t.levels.size() != t.probs.size()) {
    throw ConfigError("malformed conditional table for " + what);
  }
  double sum = 0.0;
  for (double p : t.probs) {
    if (p < 0.0) throw ConfigError("negative probability in table for " + what);
    sum += p;
  }
  if (std::abs(sum - 1.0) > kTableTolerance) {
    throw ConfigError("conditional table for " + what + " sums to " + std::to_string(sum));
  }
}

struct DriverRates {
  // distraction / teen probability per DhaGroup, solved so the configured
  // marginal rates hold over the whole generated population
  std::array<double, kNumDhaGroups> distracted{};
  std::array<double, kNumDhaGroups> teen{};
};

DriverRates solve_rates(const GeneratorConfig& cfg) {
  const auto prior = hazardous_group_prior();
  const auto& q = cfg.class_probabilities;

  // fraction of all drivers whose own group is g
  std::array<double, kNumDhaGroups> f{};
  double one_ha_total = 0.0;
  for (int g = 0; g < 5; ++g) {
    f[g] = (q[g] + 2.0 * q[static_cast<int>(NarrativeLabel::BDTHA)] * prior[g]) / 2.0;
    one_ha_total += q[g];
  }
  f[static_cast<int>(DhaGroup::None)] =
      (one_ha_total + 2.0 * q[static_cast<int>(NarrativeLabel::NHA)]) / 2.0;

  constexpr std::array<double, kNumDhaGroups> kDistractionBoost = {1.5, 1.5, 1.5,
                                                                   1.5, 6.0, 1.0};
  constexpr std::array<double, kNumDhaGroups> kTeenBoost = {2.5, 1.0, 1.5,
                                                            1.0, 2.0, 0.8};
  double db = 0.0, tb = 0.0;
  for (int g = 0; g < kNumDhaGroups; ++g) {
    db += f[g] * kDistractionBoost[g];
    tb += f[g] * kTeenBoost[g];
  }
  DriverRates rates;
  for (int g = 0; g < kNumDhaGroups; ++g) {
    rates.distracted[g] = std::min(1.0, cfg.distraction_base_rate / db * kDistractionBoost[g]);
    rates.teen[g] = std::min(1.0, cfg.teen_base_rate / tb * kTeenBoost[g]);
  }
  return rates;
}

struct AgeBand {
  int lo, hi;
};
constexpr AgeBand kAdultBands[5] = {{18, 24}, {25, 39}, {40, 59}, {60, 79}, {80, 97}};

const std::vector<std::string>& adult_band_levels() {
  static const std::vector<std::string> levels = {"18_24", "25_39", "40_59",
                                                  "60_79", "80_97"};
  return levels;
}

DhaCode sample_code_in_group(DhaGroup group, Rng& rng) {
  std::vector<double> weights;
  std::vector<DhaCode> codes;
  for (DhaCode code : all_dha_codes()) {
    if (recode_dha(code) == group && code != DhaCode::None) {
      codes.push_back(code);
      weights.push_back(static_cast<double>(dha_code_count(code)));
    }
  }
  return codes[rng.categorical(weights)];
}

std::string sample_level(const LevelTable& t, Rng& rng) {
  return t.levels[rng.categorical(t.probs)];
}

}  // namespace

std::array<double, kNumClasses> default_class_probabilities() {
  // Test-split supports (35118, 32273, 8426, 5355, 2515, 2120, 1540) over
  // 87347, kept as exact ratios so the vector sums to 1.
  constexpr std::array<double, kNumClasses> supports = {35118, 32273, 8426, 5355,
                                                        2515, 2120, 1540};
  std::array<double, kNumClasses> p{};
  for (int i = 0; i < kNumClasses; ++i) p[i] = supports[i] / 87347.0;
  double sum = 0.0;
  for (double v : p) sum += v;
  for (double& v : p) v /= sum;
  return p;
}

GeneratorConfig GeneratorConfig::defaults(double sharpness) {
  GeneratorConfig cfg;
  cfg.class_probabilities = default_class_probabilities();
  cfg.signal_sharpness = sharpness;
  const double s = cfg.signal_sharpness;

  ConditionalTables& t = cfg.tables;
  for (int k = 0; k < kNumClasses; ++k) {
    t.crash_type_x_intersection[k] = joint_table(static_cast<NarrativeLabel>(k), s);
  }

  // Shared context fields, conditioned on the narrative label. SSV and RWTCV
  // share every shared-field distribution; the rare classes each get one
  // characteristic level per field.
  auto shared_field = [&](const std::string& name, std::vector<std::string> levels,
                          std::vector<double> common,
                          std::array<const char*, 5> peaks_for_rare) {
    std::array<LevelTable, kNumClasses> per_class;
    per_class[0] = weighted_table(levels, common);
    per_class[1] = per_class[0];
    for (int k = 2; k < kNumClasses; ++k) {
      per_class[k] = peaked_table(levels, peaks_for_rare[k - 2], s);
    }
    t.shared[name] = per_class;
  };

  t.shared["month"] = {};
  for (int k = 0; k < kNumClasses; ++k) t.shared["month"][k] = uniform_table(schema_levels("month"));
  t.shared["weekday"] = {};
  for (int k = 0; k < kNumClasses; ++k) t.shared["weekday"][k] = uniform_table(schema_levels("weekday"));

  shared_field("hour_band", schema_levels("hour_band"),
               {0.08, 0.24, 0.28, 0.30, 0.10},
               {"night", "midday", "overnight", "morning_rush", "evening_rush"});
  shared_field("hit_and_run", schema_levels("hit_and_run"), {0.05, 0.95},
               {"no", "no", "yes", "no", "no"});
  shared_field("speed_limit", int_levels({25, 30, 35, 40, 45, 55, 65, 70}),
               {0.05, 0.10, 0.20, 0.15, 0.25, 0.15, 0.07, 0.03},
               {"55", "25", "70", "30", "45"});
  shared_field("road_condition", schema_levels("road_condition"),
               {0.60, 0.22, 0.10, 0.04, 0.03, 0.01},
               {"icy", "dry", "wet", "dry", "snowy"});
  shared_field("lanes", int_levels({1, 2, 3, 4, 5, 6}),
               {0.05, 0.38, 0.27, 0.18, 0.08, 0.04}, {"5", "1", "3", "2", "4"});
  shared_field("trafficway", schema_levels("trafficway"),
               {0.40, 0.18, 0.22, 0.12, 0.08},
               {"two_way_undivided", "two_way_left_turn_lane", "one_way",
                "divided_with_barrier", "divided_no_barrier"});
  t.shared["surface"] = {};
  for (int k = 0; k < kNumClasses; ++k) {
    t.shared["surface"][k] =
        weighted_table(schema_levels("surface"), {0.72, 0.20, 0.05, 0.03});
  }
  shared_field("weather", schema_levels("weather"),
               {0.50, 0.25, 0.14, 0.08, 0.01, 0.01, 0.01},
               {"snow", "clear", "fog", "clear", "rain"});
  shared_field("lighting", schema_levels("lighting"),
               {0.62, 0.04, 0.06, 0.18, 0.10},
               {"dark_unlighted", "daylight", "dark_lighted", "daylight", "dusk"});

  // Per-driver fields, conditioned on the driver's own group
  // (SSV, RWTCV, LDV, MSE, GUD, None).
  auto set_driver = [&](const std::string& name,
                        std::array<LevelTable, kNumDhaGroups> tables) {
    t.driver[name] = std::move(tables);
  };

  auto maneuvers = schema_levels("maneuver");
  set_driver("maneuver",
             {weighted_table(maneuvers, {0.40, 0.05, 0.05, 0.05, 0.05, 0.05, 0.30, 0.05}),
              weighted_table(maneuvers, {0.40, 0.30, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05}),
              weighted_table(maneuvers, {0.05, 0.05, 0.05, 0.05, 0.40, 0.30, 0.05, 0.05}),
              weighted_table(maneuvers, {0.05, 0.05, 0.35, 0.35, 0.05, 0.05, 0.05, 0.05}),
              weighted_table(maneuvers, {0.20, 0.0833333333333333, 0.0833333333333333,
                                         0.0833333333333333, 0.0833333333333333,
                                         0.0833333333333334, 0.0833333333333333, 0.30}),
              weighted_table(maneuvers, {0.50, 0.12, 0.12, 0.025, 0.025, 0.025, 0.16, 0.025})});

  auto vehicles = schema_levels("vehicle_type");
  LevelTable common_vehicle =
      weighted_table(vehicles, {0.45, 0.25, 0.15, 0.07, 0.03, 0.05});
  set_driver("vehicle_type",
             {common_vehicle, common_vehicle,
              weighted_table(vehicles, {0.30, 0.20, 0.10, 0.05, 0.30, 0.05}),
              weighted_table(vehicles, {0.30, 0.15, 0.07, 0.25, 0.03, 0.20}),
              weighted_table(vehicles, {0.35, 0.20, 0.30, 0.05, 0.07, 0.03}),
              weighted_table(vehicles, {0.50, 0.25, 0.12, 0.08, 0.02, 0.03})});

  auto sexes = schema_levels("sex");
  LevelTable common_sex = weighted_table(sexes, {0.55, 0.45});
  set_driver("sex", {common_sex, common_sex, common_sex, common_sex,
                     weighted_table(sexes, {0.65, 0.35}), weighted_table(sexes, {0.50, 0.50})});

  set_driver("age_band",
             {weighted_table(adult_band_levels(), {0.24, 0.30, 0.26, 0.15, 0.05}),
              weighted_table(adult_band_levels(), {0.24, 0.30, 0.26, 0.15, 0.05}),
              weighted_table(adult_band_levels(), {0.30, 0.32, 0.22, 0.12, 0.04}),
              weighted_table(adult_band_levels(), {0.15, 0.25, 0.28, 0.22, 0.10}),
              weighted_table(adult_band_levels(), {0.35, 0.33, 0.20, 0.09, 0.03}),
              weighted_table(adult_band_levels(), {0.18, 0.28, 0.28, 0.18, 0.08})});

  return cfg;
}

void validate(const GeneratorConfig& cfg) {
  double sum = 0.0;
  for (double p : cfg.class_probabilities) {
    if (p < 0.0) throw ConfigError("negative class probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kTableTolerance) {
    throw ConfigError("class_probabilities sum to " + std::to_string(sum));
  }
  if (cfg.distraction_base_rate < 0.0 || cfg.distraction_base_rate > 1.0) {
    throw ConfigError("distraction_base_rate outside [0, 1]");
  }
  if (cfg.teen_base_rate < 0.0 || cfg.teen_base_rate > 1.0) {
    throw ConfigError("teen_base_rate outside [0, 1]");
  }
  if (cfg.signal_sharpness <= 0.0 || cfg.signal_sharpness > 1.0) {
    throw ConfigError("signal_sharpness outside (0, 1]");
  }
  for (int k = 0; k < kNumClasses; ++k) {
    check_table(cfg.tables.crash_type_x_intersection[k], "crash_type_x_intersection");
  }
  for (const auto& [name, tables] : cfg.tables.shared) {
    for (const LevelTable& t : tables) check_table(t, name);
  }
  for (const auto& [name, tables] : cfg.tables.driver) {
    for (const LevelTable& t : tables) check_table(t, name);
  }
  for (const char* required : {"month", "weekday", "hour_band", "hit_and_run",
                               "speed_limit", "road_condition", "lanes",
                               "trafficway", "surface", "weather", "lighting"}) {
    if (!cfg.tables.shared.count(required)) {
      throw ConfigError(std::string("missing shared table: ") + required);
    }
  }
  for (const char* required : {"maneuver", "vehicle_type", "sex", "age_band"}) {
    if (!cfg.tables.driver.count(required)) {
      throw ConfigError(std::string("missing driver table: ") + required);
    }
  }
}

GeneratedPair generate_pair(const GeneratorConfig& cfg, std::size_t index) {
  Rng rng(cfg.seed, /*stream=*/index + 0x6001);
  const auto prior = hazardous_group_prior();
  const DriverRates rates = solve_rates(cfg);

  GeneratedPair pair;
  std::vector<double> class_probs(cfg.class_probabilities.begin(),
                                  cfg.class_probabilities.end());
  pair.label = static_cast<NarrativeLabel>(rng.categorical(class_probs));

  // DHA codes consistent with the intended label
  std::array<DhaGroup, 2> groups = {DhaGroup::None, DhaGroup::None};
  std::array<DhaCode, 2> codes = {DhaCode::None, DhaCode::None};
  switch (pair.label) {
    case NarrativeLabel::NHA:
      break;
    case NarrativeLabel::BDTHA: {
      std::vector<double> p(prior.begin(), prior.end());
      for (int d = 0; d < 2; ++d) {
        groups[d] = static_cast<DhaGroup>(rng.categorical(p));
        codes[d] = sample_code_in_group(groups[d], rng);
      }
      break;
    }
    default: {
      int hazardous = rng.bernoulli(0.5) ? 0 : 1;
      DhaGroup g = static_cast<DhaGroup>(static_cast<int>(pair.label));
      groups[hazardous] = g;
      codes[hazardous] = sample_code_in_group(g, rng);
      break;
    }
  }

  char id_buf[16];
  std::snprintf(id_buf, sizeof id_buf, "C%08zu", index);

  CrashRecord shared;
  shared.crash_id = id_buf;
  const int k = static_cast<int>(pair.label);

  std::string joint = sample_level(cfg.tables.crash_type_x_intersection[k], rng);
  auto bar = joint.find('|');
  shared.crash_type = joint.substr(0, bar);
  shared.intersection = joint.substr(bar + 1);

  shared.month = sample_level(cfg.tables.shared.at("month")[k], rng);
  shared.weekday = sample_level(cfg.tables.shared.at("weekday")[k], rng);
  shared.hour_band = sample_level(cfg.tables.shared.at("hour_band")[k], rng);
  shared.hit_and_run = sample_level(cfg.tables.shared.at("hit_and_run")[k], rng);
  shared.speed_limit = std::stoi(sample_level(cfg.tables.shared.at("speed_limit")[k], rng));
  shared.road_condition = sample_level(cfg.tables.shared.at("road_condition")[k], rng);
  shared.lanes = std::stoi(sample_level(cfg.tables.shared.at("lanes")[k], rng));
  shared.trafficway = sample_level(cfg.tables.shared.at("trafficway")[k], rng);
  shared.surface = sample_level(cfg.tables.shared.at("surface")[k], rng);
  shared.weather = sample_level(cfg.tables.shared.at("weather")[k], rng);
  shared.lighting = sample_level(cfg.tables.shared.at("lighting")[k], rng);

  std::array<CrashRecord, 2> drivers = {shared, shared};
  for (int d = 0; d < 2; ++d) {
    CrashRecord& r = drivers[d];
    r.driver_index = d + 1;
    r.dha = codes[d];
    const int g = static_cast<int>(groups[d]);
    r.sex = sample_level(cfg.tables.driver.at("sex")[g], rng);
    r.maneuver = sample_level(cfg.tables.driver.at("maneuver")[g], rng);
    r.vehicle_type = sample_level(cfg.tables.driver.at("vehicle_type")[g], rng);
    r.distracted = rng.bernoulli(rates.distracted[g]);
    if (rng.bernoulli(rates.teen[g])) {
      r.age = rng.bernoulli(0.5) ? 16 : 17;
    } else {
      std::size_t band = rng.categorical(cfg.tables.driver.at("age_band")[g].probs);
      r.age = rng.uniform_int(kAdultBands[band].lo, kAdultBands[band].hi);
    }
  }
  pair.driver1 = std::move(drivers[0]);
  pair.driver2 = std::move(drivers[1]);
  return pair;
}

std::vector<GeneratedPair> generate_pairs(const GeneratorConfig& cfg) {
  validate(cfg);
  std::vector<GeneratedPair> pairs;
  pairs.reserve(cfg.n_pairs);
  for (std::size_t i = 0; i < cfg.n_pairs; ++i) pairs.push_back(generate_pair(cfg, i));
  return pairs;
}

}  // namespace dha
