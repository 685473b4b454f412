#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dha/model.hpp"
#include "dha/narrative.hpp"
#include "dha/tokenizer.hpp"

namespace dha {

enum class ScenarioKind {
  SingleDriverDistraction,
  BothDriverDistraction,
  TeenDrivers,
};

std::string_view scenario_kind_name(ScenarioKind kind);

struct Scenario {
  ScenarioKind kind = ScenarioKind::SingleDriverDistraction;
  std::uint64_t seed = 0;
};

// Counterfactual edits of the test narratives. Driver choices are keyed by a
// hash of (crash_id, seed), so perturbation is order-independent; labels and
// all untargeted fields are untouched.
std::vector<TwoVehicleNarrative> perturb(const std::vector<TwoVehicleNarrative>& narratives,
                                         const Scenario& scenario);

// Per class: predicted probability across narratives (column-major sample).
struct ProbabilitySample {
  std::array<std::vector<double>, kNumClasses> per_class;
  std::vector<std::string> narrative_ids;
};

ProbabilitySample collect_probabilities(const MicroLM& model, const Vocab& vocab,
                                        const std::vector<TwoVehicleNarrative>& narratives);

struct QuartileEntry {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
};

struct QuartileSummary {
  std::array<QuartileEntry, kNumClasses> per_class{};
};

// Linear interpolation between closest ranks: h = (n-1) q. Throws StatsError
// on empty input.
QuartileEntry quartiles(const std::vector<double>& values);
QuartileSummary summarize(const ProbabilitySample& sample);

struct ShiftEntry {
  double delta_med_pct = 0.0;
  double delta_iqr_pct = 0.0;
  bool defined = true;  // false when a baseline denominator is under the guard
};

struct ShiftReport {
  std::array<ShiftEntry, kNumClasses> per_class{};
  std::string scenario_id;
  std::string baseline_id;
};

// Percent changes per Delta_med and Delta_IQR with a 1e-9 denominator guard;
// guarded entries are flagged undefined, never non-finite.
ShiftReport delta_metrics(const QuartileSummary& baseline, const QuartileSummary& scenario);

std::string shift_report_to_csv(const ShiftReport& report);
// Dual-ring chart: inner ring IQR change, outer ring median change.
std::string shift_report_to_svg(const ShiftReport& report);
std::string probability_sample_to_csv(const ProbabilitySample& sample);
std::string scenario_manifest_json(const Scenario& scenario, const std::string& source_split);

}  // namespace dha
