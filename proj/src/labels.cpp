#include "dha/labels.hpp"

namespace dha {

namespace {
constexpr std::string_view kLabelNames[kNumClasses] = {
    "SSV", "RWTCV", "LDV", "MSE", "GUD", "NHA", "BDTHA"};
constexpr std::string_view kClassTokens[kNumClasses] = {
    "<SSV>", "<RWTCV>", "<LDV>", "<MSE>", "<GUD>", "<NHA>", "<BDTHA>"};
}  // namespace

std::string_view label_name(NarrativeLabel label) {
  return kLabelNames[static_cast<int>(label)];
}

std::string_view class_token(NarrativeLabel label) {
  return kClassTokens[static_cast<int>(label)];
}

std::optional<NarrativeLabel> parse_label(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (kLabelNames[i] == name) return static_cast<NarrativeLabel>(i);
  }
  return std::nullopt;
}

}  // namespace dha
