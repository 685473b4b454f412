#include "dha/narrative.hpp"

#include <algorithm>

#include "dha/errors.hpp"
#include "dha/rng.hpp"

#include "json.hpp"

namespace dha {

std::string_view hazardous_driver_name(HazardousDriver value) {
  switch (value) {
    case HazardousDriver::Driver1: return "1";
    case HazardousDriver::Driver2: return "2";
    case HazardousDriver::Both: return "both";
    case HazardousDriver::None: return "none";
  }
  return "none";
}

NarrativeLabel derive_label(DhaGroup g1, DhaGroup g2) {
  bool h1 = g1 != DhaGroup::None;
  bool h2 = g2 != DhaGroup::None;
  if (h1 && h2) return NarrativeLabel::BDTHA;
  if (!h1 && !h2) return NarrativeLabel::NHA;
  DhaGroup g = h1 ? g1 : g2;
  return static_cast<NarrativeLabel>(static_cast<int>(g));
}

TwoVehicleNarrative pair_records(const CrashRecord& r1, const CrashRecord& r2) {
  if (r1.crash_id != r2.crash_id) {
    throw PairingError("crash_id mismatch: " + r1.crash_id + " vs " + r2.crash_id);
  }
  if (r1.driver_index == r2.driver_index) {
    throw PairingError("duplicate driver_index for crash " + r1.crash_id);
  }
  if ((r1.driver_index != 1 && r1.driver_index != 2) ||
      (r2.driver_index != 1 && r2.driver_index != 2)) {
    throw PairingError("driver_index out of range for crash " + r1.crash_id);
  }

  TwoVehicleNarrative n;
  n.crash_id = r1.crash_id;
  n.driver1 = r1.driver_index == 1 ? r1 : r2;
  n.driver2 = r1.driver_index == 1 ? r2 : r1;

  DhaGroup g1 = recode_dha(n.driver1.dha);
  DhaGroup g2 = recode_dha(n.driver2.dha);
  n.label = derive_label(g1, g2);
  bool h1 = g1 != DhaGroup::None;
  bool h2 = g2 != DhaGroup::None;
  n.hazardous = h1 && h2   ? HazardousDriver::Both
                : h1       ? HazardousDriver::Driver1
                : h2       ? HazardousDriver::Driver2
                           : HazardousDriver::None;
  return n;
}

const std::string& system_prompt() {
  static const std::string text =
      "You are a traffic crash analyst. Read the two-vehicle crash description "
      "and answer with exactly one class token: <SSV> <RWTCV> <LDV> <MSE> <GUD> "
      "<NHA> <BDTHA>.";
  return text;
}

std::string escape_prompt_value(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (char c : value) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case ';': out += "\\;"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out;
}

namespace {

std::string driver_block(const CrashRecord& d, int index) {
  std::string out = "DRIVER" + std::to_string(index) + ": ";
  out += "age=" + std::to_string(d.age) + "; ";
  out += "sex=" + escape_prompt_value(d.sex) + "; ";
  out += "distracted=" + std::string(d.distracted ? "true" : "false") + "; ";
  out += "maneuver=" + escape_prompt_value(d.maneuver) + "; ";
  out += "vehicle=" + escape_prompt_value(d.vehicle_type);
  return out;
}

}  // namespace

PromptTriple render_prompt(const TwoVehicleNarrative& n) {
  const CrashRecord& c = n.driver1;  // shared context fields live on both rows
  std::string user = "CRASH: ";
  user += "type=" + escape_prompt_value(c.crash_type) + "; ";
  user += "month=" + escape_prompt_value(c.month) + "; ";
  user += "weekday=" + escape_prompt_value(c.weekday) + "; ";
  user += "hour=" + escape_prompt_value(c.hour_band) + "; ";
  user += "intersection=" + escape_prompt_value(c.intersection) + "; ";
  user += "hit_and_run=" + escape_prompt_value(c.hit_and_run);
  user += "\n" + driver_block(n.driver1, 1);
  user += "\n" + driver_block(n.driver2, 2);
  user += "\nROAD: ";
  user += "speed_limit=" + std::to_string(c.speed_limit) + "; ";
  user += "condition=" + escape_prompt_value(c.road_condition) + "; ";
  user += "lanes=" + std::to_string(c.lanes) + "; ";
  user += "trafficway=" + escape_prompt_value(c.trafficway) + "; ";
  user += "surface=" + escape_prompt_value(c.surface);
  user += "\nENV: ";
  user += "weather=" + escape_prompt_value(c.weather) + "; ";
  user += "lighting=" + escape_prompt_value(c.lighting);

  PromptTriple triple;
  triple.system = system_prompt();
  triple.user = std::move(user);
  triple.assistant_target = std::string(class_token(n.label));
  return triple;
}

SplitManifest split(const std::vector<std::string>& ids, std::uint64_t seed) {
  SplitManifest m;
  m.seed = seed;
  if (ids.empty()) return m;

  std::vector<std::string> shuffled = ids;
  Rng rng(seed, /*stream=*/0x51713);
  rng.shuffle(shuffled);

  // floor(0.70 n) and floor(0.15 n), computed in integers so the boundary
  // cases are exact.
  std::size_t n = shuffled.size();
  std::size_t n_train = 7 * n / 10;
  std::size_t n_eval = 3 * n / 20;
  m.train.assign(shuffled.begin(), shuffled.begin() + n_train);
  m.eval.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_eval);
  m.test.assign(shuffled.begin() + n_train + n_eval, shuffled.end());
  return m;
}

std::string split_manifest_to_json(const SplitManifest& m) {
  nlohmann::json j;
  j["seed"] = m.seed;
  j["train"] = m.train;
  j["eval"] = m.eval;
  j["test"] = m.test;
  return j.dump() + "\n";
}

SplitManifest split_manifest_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SplitManifest m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.train = j.at("train").get<std::vector<std::string>>();
  m.eval = j.at("eval").get<std::vector<std::string>>();
  m.test = j.at("test").get<std::vector<std::string>>();
  return m;
}

}  // namespace dha
