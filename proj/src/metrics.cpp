#include "dha/metrics.hpp"

#include "dha/errors.hpp"
#include "dha/io_util.hpp"

#include "json.hpp"

namespace dha {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts) {
    for (std::uint64_t c : row) t += c;
  }
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(int k) const {
  std::uint64_t t = 0;
  for (std::uint64_t c : counts[static_cast<std::size_t>(k)]) t += c;
  return t;
}

std::uint64_t ConfusionMatrix::col_sum(int k) const {
  std::uint64_t t = 0;
  for (const auto& row : counts) t += row[static_cast<std::size_t>(k)];
  return t;
}

ConfusionMatrix confusion(const std::vector<NarrativeLabel>& y_true,
                          const std::vector<NarrativeLabel>& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ShapeError("confusion: label sequences differ in length");
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    m.counts[static_cast<std::size_t>(static_cast<int>(y_true[i]))]
            [static_cast<std::size_t>(static_cast<int>(y_pred[i]))] += 1;
  }
  return m;
}

MetricReport report(const ConfusionMatrix& m) {
  MetricReport r;
  r.total = m.total();
  std::uint64_t trace = 0;

  for (int k = 0; k < kNumClasses; ++k) {
    ClassMetrics& cm = r.per_class[static_cast<std::size_t>(k)];
    const std::uint64_t tp = m.counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
    const std::uint64_t col = m.col_sum(k);
    const std::uint64_t row = m.row_sum(k);
    cm.support = row;
    trace += tp;

    cm.precision_defined = col > 0;
    cm.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    cm.recall_defined = row > 0;
    cm.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    const double pr = cm.precision + cm.recall;
    cm.f1_defined = cm.precision_defined && cm.recall_defined && pr > 0.0;
    cm.f1 = pr > 0.0 ? 2.0 * cm.precision * cm.recall / pr : 0.0;
  }

  r.accuracy = r.total > 0 ? static_cast<double>(trace) / static_cast<double>(r.total) : 0.0;

  for (int k = 0; k < kNumClasses; ++k) {
    const ClassMetrics& cm = r.per_class[static_cast<std::size_t>(k)];
    r.macro_precision += cm.precision;
    r.macro_recall += cm.recall;
    r.macro_f1 += cm.f1;
    const double w = static_cast<double>(cm.support);
    r.weighted_precision += w * cm.precision;
    r.weighted_recall += w * cm.recall;
    r.weighted_f1 += w * cm.f1;
  }
  r.macro_precision /= kNumClasses;
  r.macro_recall /= kNumClasses;
  r.macro_f1 /= kNumClasses;
  if (r.total > 0) {
    r.weighted_precision /= static_cast<double>(r.total);
    r.weighted_recall /= static_cast<double>(r.total);
    r.weighted_f1 /= static_cast<double>(r.total);
  }
  return r;
}

std::string report_to_csv(const MetricReport& r) {
  std::string out = "class,precision,recall,f1,support\n";
  for (int k = 0; k < kNumClasses; ++k) {
    const ClassMetrics& cm = r.per_class[static_cast<std::size_t>(k)];
    out += std::string(label_name(static_cast<NarrativeLabel>(k))) + "," +
           format_double(cm.precision, 4) + "," + format_double(cm.recall, 4) + "," +
           format_double(cm.f1, 4) + "," + std::to_string(cm.support) + "\n";
  }
  out += "accuracy,,," + format_double(r.accuracy, 4) + "," + std::to_string(r.total) + "\n";
  out += "macro_avg," + format_double(r.macro_precision, 4) + "," +
         format_double(r.macro_recall, 4) + "," + format_double(r.macro_f1, 4) + "," +
         std::to_string(r.total) + "\n";
  out += "weighted_avg," + format_double(r.weighted_precision, 4) + "," +
         format_double(r.weighted_recall, 4) + "," + format_double(r.weighted_f1, 4) +
         "," + std::to_string(r.total) + "\n";
  return out;
}

std::string report_to_json(const MetricReport& r) {
  nlohmann::json j;
  nlohmann::json classes = nlohmann::json::object();
  for (int k = 0; k < kNumClasses; ++k) {
    const ClassMetrics& cm = r.per_class[static_cast<std::size_t>(k)];
    classes[std::string(label_name(static_cast<NarrativeLabel>(k)))] = {
        {"precision", cm.precision},
        {"recall", cm.recall},
        {"f1", cm.f1},
        {"support", cm.support},
        {"precision_defined", cm.precision_defined},
        {"recall_defined", cm.recall_defined},
        {"f1_defined", cm.f1_defined}};
  }
  j["classes"] = classes;
  j["accuracy"] = r.accuracy;
  j["macro"] = {{"precision", r.macro_precision},
                {"recall", r.macro_recall},
                {"f1", r.macro_f1}};
  j["weighted"] = {{"precision", r.weighted_precision},
                   {"recall", r.weighted_recall},
                   {"f1", r.weighted_f1}};
  j["total"] = r.total;
  return j.dump(2) + "\n";
}

std::string confusion_to_csv(const ConfusionMatrix& m) {
  std::string out = "true\\pred";
  for (int k = 0; k < kNumClasses; ++k) {
    out += ",";
    out += label_name(static_cast<NarrativeLabel>(k));
  }
  out += "\n";
  for (int i = 0; i < kNumClasses; ++i) {
    out += label_name(static_cast<NarrativeLabel>(i));
    for (int j = 0; j < kNumClasses; ++j) {
      out += "," + std::to_string(m.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace dha
