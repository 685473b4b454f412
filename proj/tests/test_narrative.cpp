#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <set>

#include "dha/errors.hpp"
#include "dha/generator.hpp"
#include "dha/io_util.hpp"
#include "dha/narrative.hpp"
#include "dha/rng.hpp"

using namespace dha;

namespace {

CrashRecord sample_record(const std::string& id, int index, DhaCode dha) {
  CrashRecord r;
  r.crash_id = id;
  r.driver_index = index;
  r.crash_type = "rear_end";
  r.month = "mar";
  r.weekday = "tue";
  r.hour_band = "midday";
  r.intersection = "intersection";
  r.hit_and_run = "no";
  r.age = 34;
  r.sex = "female";
  r.distracted = false;
  r.maneuver = "going_straight";
  r.vehicle_type = "suv";
  r.speed_limit = 45;
  r.road_condition = "dry";
  r.lanes = 2;
  r.trafficway = "two_way_undivided";
  r.surface = "asphalt";
  r.weather = "clear";
  r.lighting = "daylight";
  r.dha = dha;
  return r;
}

}  // namespace

TEST_CASE("derive_label covers the three conditions") {
  CHECK(derive_label(DhaGroup::SSV, DhaGroup::None) == NarrativeLabel::SSV);
  CHECK(derive_label(DhaGroup::None, DhaGroup::None) == NarrativeLabel::NHA);
  CHECK(derive_label(DhaGroup::RWTCV, DhaGroup::MSE) == NarrativeLabel::BDTHA);
  CHECK(derive_label(DhaGroup::SSV, DhaGroup::SSV) == NarrativeLabel::BDTHA);
}

TEST_CASE("derive_label is symmetric over all 36 group pairs") {
  for (int a = 0; a < kNumDhaGroups; ++a) {
    for (int b = 0; b < kNumDhaGroups; ++b) {
      auto ga = static_cast<DhaGroup>(a);
      auto gb = static_cast<DhaGroup>(b);
      CHECK(derive_label(ga, gb) == derive_label(gb, ga));
      NarrativeLabel lab = derive_label(ga, gb);
      if (ga == DhaGroup::None && gb == DhaGroup::None) {
        CHECK(lab == NarrativeLabel::NHA);
      } else if (ga != DhaGroup::None && gb != DhaGroup::None) {
        CHECK(lab == NarrativeLabel::BDTHA);
      } else {
        DhaGroup h = ga != DhaGroup::None ? ga : gb;
        CHECK(static_cast<int>(lab) == static_cast<int>(h));
      }
    }
  }
}

TEST_CASE("pair_records construction and errors") {
  auto r1 = sample_record("C1", 1, DhaCode::CarelessNegligentDriving);
  auto r2 = sample_record("C1", 2, DhaCode::None);
  TwoVehicleNarrative n = pair_records(r1, r2);
  CHECK(n.label == NarrativeLabel::GUD);
  CHECK(n.hazardous == HazardousDriver::Driver1);
  CHECK(n.driver1.driver_index == 1);
  CHECK(n.driver2.driver_index == 2);

  // argument order does not matter; blocks are ordered by driver_index
  TwoVehicleNarrative swapped = pair_records(r2, r1);
  CHECK(swapped.driver1.driver_index == 1);
  CHECK(swapped.label == NarrativeLabel::GUD);

  auto other = sample_record("C2", 2, DhaCode::None);
  CHECK_THROWS_AS((void)pair_records(r1, other), PairingError);
  auto dup = sample_record("C1", 1, DhaCode::None);
  CHECK_THROWS_AS((void)pair_records(r1, dup), PairingError);
}

TEST_CASE("rendered prompt matches the golden template byte for byte") {
  auto r1 = sample_record("C1", 1, DhaCode::CarelessNegligentDriving);
  auto r2 = sample_record("C1", 2, DhaCode::None);
  r2.age = 17;
  r2.sex = "male";
  r2.distracted = true;
  r2.maneuver = "turning_left";
  r2.vehicle_type = "pickup";
  TwoVehicleNarrative n = pair_records(r1, r2);
  PromptTriple p = render_prompt(n);

  std::string golden = read_file(std::string(DHA_GOLDEN_DIR) + "/prompt_example.txt");
  std::string rendered = p.system + "\n---\n" + p.user + "\n---\n" + p.assistant_target + "\n";
  CHECK(rendered == golden);

  PromptTriple again = render_prompt(n);
  CHECK(again.system == p.system);
  CHECK(again.user == p.user);
  CHECK(again.assistant_target == p.assistant_target);
}

TEST_CASE("assistant target carries the class token") {
  auto r1 = sample_record("C9", 1, DhaCode::SpeedTooFast);
  auto r2 = sample_record("C9", 2, DhaCode::RecklessDriving);
  TwoVehicleNarrative n = pair_records(r1, r2);
  CHECK(n.label == NarrativeLabel::BDTHA);
  CHECK(render_prompt(n).assistant_target == "<BDTHA>");
}

TEST_CASE("escaping keeps rendering injective") {
  CHECK(escape_prompt_value("a;b") == "a\\;b");
  CHECK(escape_prompt_value("a\\b") == "a\\\\b");
  CHECK(escape_prompt_value("a\nb") == "a\\nb");

  // two records that would collide without escaping
  auto r1 = sample_record("C1", 1, DhaCode::None);
  auto r2 = sample_record("C1", 2, DhaCode::None);
  r1.sex = "female; distracted=true";
  auto n1 = pair_records(r1, r2);
  auto r1b = sample_record("C1", 1, DhaCode::None);
  r1b.sex = "female";
  r1b.distracted = true;
  auto n2 = pair_records(r1b, r2);
  CHECK(render_prompt(n1).user != render_prompt(n2).user);
}

TEST_CASE("prompt rendering is injective over a generated corpus") {
  GeneratorConfig cfg = GeneratorConfig::defaults();
  cfg.n_pairs = 400;
  cfg.seed = 123;
  std::set<std::uint64_t> hashes;
  std::set<std::string> bodies;
  for (const GeneratedPair& p : generate_pairs(cfg)) {
    TwoVehicleNarrative n = pair_records(p.driver1, p.driver2);
    std::string body = render_prompt(n).user;
    if (bodies.insert(body).second) {
      CHECK(hashes.insert(fnv1a64(body)).second);
    }
  }
  // narratives with identical field values are expected to collide; anything
  // else must not
  CHECK(bodies.size() > 390);
}

TEST_CASE("split reproduces the published 70/15/15 sizes") {
  std::vector<std::string> ids(582307);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = "N" + std::to_string(i);
  SplitManifest m = split(ids, 42);
  CHECK(m.train.size() == 407614);
  CHECK(m.eval.size() == 87346);
  CHECK(m.test.size() == 87347);
}

TEST_CASE("split floor arithmetic on small n") {
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) ids.push_back("x" + std::to_string(i));
  SplitManifest m = split(ids, 7);
  CHECK(m.train.size() == 7);
  CHECK(m.eval.size() == 1);
  CHECK(m.test.size() == 2);

  SplitManifest empty = split({}, 7);
  CHECK(empty.train.empty());
  CHECK(empty.eval.empty());
  CHECK(empty.test.empty());
}

TEST_CASE("split is a deterministic partition") {
  std::vector<std::string> ids;
  for (int i = 0; i < 1000; ++i) ids.push_back("id" + std::to_string(i));

  SplitManifest a = split(ids, 5);
  SplitManifest b = split(ids, 5);
  CHECK(a.train == b.train);
  CHECK(a.eval == b.eval);
  CHECK(a.test == b.test);

  std::set<std::string> all(ids.begin(), ids.end());
  std::set<std::string> joined;
  for (const auto* part : {&a.train, &a.eval, &a.test}) {
    for (const std::string& id : *part) {
      CHECK(joined.insert(id).second);  // pairwise disjoint
    }
  }
  CHECK(joined == all);  // multiset equality: a permutation of the input

  SplitManifest c = split(ids, 6);
  CHECK(c.train != a.train);  // seed changes the shuffle
}

TEST_CASE("split manifest json round trip") {
  std::vector<std::string> ids = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
  SplitManifest m = split(ids, 3);
  SplitManifest back = split_manifest_from_json(split_manifest_to_json(m));
  CHECK(back.seed == m.seed);
  CHECK(back.train == m.train);
  CHECK(back.eval == m.eval);
  CHECK(back.test == m.test);
}
