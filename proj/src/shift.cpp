#include "dha/shift.hpp"

#include <algorithm>
#include <cmath>

#include "dha/errors.hpp"
#include "dha/io_util.hpp"
#include "dha/parallel.hpp"
#include "dha/rng.hpp"

#include "json.hpp"

namespace dha {

namespace {

constexpr double kDenominatorGuard = 1e-9;

std::uint64_t narrative_coin(const std::string& crash_id, std::uint64_t seed,
                             std::uint64_t salt) {
  return mix64(fnv1a64(crash_id) ^ mix64(seed + salt));
}

}  // namespace

std::string_view scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::SingleDriverDistraction: return "single_driver_distraction";
    case ScenarioKind::BothDriverDistraction: return "both_driver_distraction";
    case ScenarioKind::TeenDrivers: return "teen_drivers";
  }
  return "unknown";
}

std::vector<TwoVehicleNarrative> perturb(const std::vector<TwoVehicleNarrative>& narratives,
                                         const Scenario& scenario) {
  std::vector<TwoVehicleNarrative> out = narratives;
  for (TwoVehicleNarrative& n : out) {
    switch (scenario.kind) {
      case ScenarioKind::SingleDriverDistraction: {
        const bool first = (narrative_coin(n.crash_id, scenario.seed, 0x51) & 1u) == 0;
        n.driver1.distracted = first;
        n.driver2.distracted = !first;
        break;
      }
      case ScenarioKind::BothDriverDistraction:
        n.driver1.distracted = true;
        n.driver2.distracted = true;
        break;
      case ScenarioKind::TeenDrivers: {
        const std::uint64_t coin = narrative_coin(n.crash_id, scenario.seed, 0x7e);
        n.driver1.age = (coin & 1u) == 0 ? 16 : 17;
        n.driver2.age = (coin & 2u) == 0 ? 16 : 17;
        break;
      }
    }
  }
  return out;
}

ProbabilitySample collect_probabilities(const MicroLM& model, const Vocab& vocab,
                                        const std::vector<TwoVehicleNarrative>& narratives) {
  ProbabilitySample sample;
  for (auto& column : sample.per_class) column.assign(narratives.size(), 0.0);
  sample.narrative_ids.resize(narratives.size());

  parallel_for(narratives.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const TwoVehicleNarrative& n = narratives[i];
      PromptTriple prompt = render_prompt(n);
      std::vector<int> ids = vocab.encode_prompt(prompt);
      ClassDistribution dist = class_distribution(model, ids);
      for (int k = 0; k < kNumClasses; ++k) {
        sample.per_class[static_cast<std::size_t>(k)][i] = dist.p[static_cast<std::size_t>(k)];
      }
      sample.narrative_ids[i] = n.crash_id;
    }
  });
  return sample;
}

QuartileEntry quartiles(const std::vector<double>& values) {
  if (values.empty()) throw StatsError("quartiles of empty sample");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  auto at_quantile = [&](double q) {
    const double h = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
  };
  QuartileEntry e;
  e.q1 = at_quantile(0.25);
  e.median = at_quantile(0.50);
  e.q3 = at_quantile(0.75);
  e.iqr = e.q3 - e.q1;
  return e;
}

QuartileSummary summarize(const ProbabilitySample& sample) {
  QuartileSummary s;
  for (int k = 0; k < kNumClasses; ++k) {
    s.per_class[static_cast<std::size_t>(k)] =
        quartiles(sample.per_class[static_cast<std::size_t>(k)]);
  }
  return s;
}

ShiftReport delta_metrics(const QuartileSummary& baseline, const QuartileSummary& scenario) {
  ShiftReport r;
  for (int k = 0; k < kNumClasses; ++k) {
    const QuartileEntry& b = baseline.per_class[static_cast<std::size_t>(k)];
    const QuartileEntry& s = scenario.per_class[static_cast<std::size_t>(k)];
    ShiftEntry& e = r.per_class[static_cast<std::size_t>(k)];
    if (b.median < kDenominatorGuard || b.iqr < kDenominatorGuard) {
      e.defined = false;
      e.delta_med_pct = 0.0;
      e.delta_iqr_pct = 0.0;
      continue;
    }
    e.defined = true;
    e.delta_med_pct = (s.median - b.median) / b.median * 100.0;
    e.delta_iqr_pct = (s.iqr - b.iqr) / b.iqr * 100.0;
  }
  return r;
}

std::string shift_report_to_csv(const ShiftReport& report) {
  std::string out = "class,delta_med_pct,delta_iqr_pct,defined\n";
  for (int k = 0; k < kNumClasses; ++k) {
    const ShiftEntry& e = report.per_class[static_cast<std::size_t>(k)];
    out += std::string(label_name(static_cast<NarrativeLabel>(k))) + ",";
    if (e.defined) {
      out += format_double(e.delta_med_pct, 2) + "," + format_double(e.delta_iqr_pct, 2) +
             ",true\n";
    } else {
      out += ",,false\n";
    }
  }
  return out;
}

namespace {

struct Point {
  double x, y;
};

Point polar(double cx, double cy, double radius, double angle_rad) {
  return {cx + radius * std::cos(angle_rad), cy + radius * std::sin(angle_rad)};
}

// Annular sector path between radius r0 and r1 over [a0, a1].
std::string ring_segment(double cx, double cy, double r0, double r1, double a0, double a1) {
  Point p0 = polar(cx, cy, r1, a0);
  Point p1 = polar(cx, cy, r1, a1);
  Point p2 = polar(cx, cy, r0, a1);
  Point p3 = polar(cx, cy, r0, a0);
  auto f = [](double v) { return format_double(v, 3); };
  std::string d = "M " + f(p0.x) + " " + f(p0.y);
  d += " A " + f(r1) + " " + f(r1) + " 0 0 1 " + f(p1.x) + " " + f(p1.y);
  d += " L " + f(p2.x) + " " + f(p2.y);
  d += " A " + f(r0) + " " + f(r0) + " 0 0 0 " + f(p3.x) + " " + f(p3.y);
  d += " Z";
  return d;
}

}  // namespace

std::string shift_report_to_svg(const ShiftReport& report) {
  const double cx = 260.0, cy = 240.0;
  const double inner_base = 70.0, inner_span = 40.0;
  const double outer_base = 125.0, outer_span = 55.0;
  double max_abs = 1.0;
  for (const ShiftEntry& e : report.per_class) {
    if (!e.defined) continue;
    max_abs = std::max({max_abs, std::abs(e.delta_med_pct), std::abs(e.delta_iqr_pct)});
  }

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"520\" height=\"520\" "
      "viewBox=\"0 0 520 520\">\n"
      "<rect width=\"520\" height=\"520\" fill=\"white\"/>\n"
      "<text x=\"260\" y=\"28\" text-anchor=\"middle\" font-size=\"15\" "
      "font-family=\"sans-serif\">Probability distribution shift: " +
      report.scenario_id + " vs " + report.baseline_id +
      "</text>\n"
      "<text x=\"260\" y=\"48\" text-anchor=\"middle\" font-size=\"11\" "
      "font-family=\"sans-serif\">outer ring: median change %, inner ring: IQR change %"
      "</text>\n";

  const double two_pi = 6.283185307179586476925286766559;
  for (int k = 0; k < kNumClasses; ++k) {
    const ShiftEntry& e = report.per_class[static_cast<std::size_t>(k)];
    const double a0 = two_pi * k / kNumClasses - two_pi / 4.0;
    const double a1 = two_pi * (k + 1) / kNumClasses - two_pi / 4.0 - 0.03;

    auto band = [&](double value, bool defined, double base, double span) {
      double mag = defined ? std::min(1.0, std::abs(value) / max_abs) : 0.0;
      double r1 = base + span * mag;
      std::string fill = !defined ? "#bdbdbd" : value >= 0.0 ? "#2c7fb8" : "#d95f02";
      return "<path d=\"" + ring_segment(cx, cy, base, std::max(r1, base + 1.0), a0, a1) +
             "\" fill=\"" + fill + "\" fill-opacity=\"0.85\"/>\n";
    };
    svg += band(e.delta_iqr_pct, e.defined, inner_base, inner_span);
    svg += band(e.delta_med_pct, e.defined, outer_base, outer_span);

    const double mid = (a0 + a1) / 2.0;
    Point lp = polar(cx, cy, outer_base + outer_span + 28.0, mid);
    std::string label(label_name(static_cast<NarrativeLabel>(k)));
    std::string text = e.defined
                           ? label + " " + format_double(e.delta_med_pct, 2) + "% / " +
                                 format_double(e.delta_iqr_pct, 2) + "%"
                           : label + " (undefined)";
    svg += "<text x=\"" + format_double(lp.x, 1) + "\" y=\"" + format_double(lp.y, 1) +
           "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" +
           text + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string probability_sample_to_csv(const ProbabilitySample& sample) {
  std::string out = "narrative_id";
  for (int k = 0; k < kNumClasses; ++k) {
    out += ",p_";
    out += label_name(static_cast<NarrativeLabel>(k));
  }
  out += "\n";
  for (std::size_t i = 0; i < sample.narrative_ids.size(); ++i) {
    out += csv_field(sample.narrative_ids[i]);
    for (int k = 0; k < kNumClasses; ++k) {
      out += "," + format_double(sample.per_class[static_cast<std::size_t>(k)][i], 9);
    }
    out += "\n";
  }
  return out;
}

std::string scenario_manifest_json(const Scenario& scenario, const std::string& source_split) {
  nlohmann::json j;
  j["kind"] = std::string(scenario_kind_name(scenario.kind));
  j["seed"] = scenario.seed;
  j["source_split"] = source_split;
  return j.dump() + "\n";
}

}  // namespace dha
