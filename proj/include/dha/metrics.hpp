#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dha/labels.hpp"

namespace dha {

// 7x7 count matrix; rows are true classes, columns predicted.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  std::uint64_t total() const;
  std::uint64_t row_sum(int k) const;
  std::uint64_t col_sum(int k) const;
};

ConfusionMatrix confusion(const std::vector<NarrativeLabel>& y_true,
                          const std::vector<NarrativeLabel>& y_pred);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
  // degenerate denominators reported as 0 with the flag cleared
  bool precision_defined = false;
  bool recall_defined = false;
  bool f1_defined = false;
};

struct MetricReport {
  std::array<ClassMetrics, kNumClasses> per_class{};
  double accuracy = 0.0;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
  std::uint64_t total = 0;
};

MetricReport report(const ConfusionMatrix& m);

std::string report_to_csv(const MetricReport& r);
std::string report_to_json(const MetricReport& r);
std::string confusion_to_csv(const ConfusionMatrix& m);

}  // namespace dha
