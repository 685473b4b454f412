#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace dha {

// Narrative-level classification target. The order is load-bearing: it fixes
// the indexing of probability vectors, metric rows, and the reserved
// class-token ids in the vocabulary.
enum class NarrativeLabel : int {
  SSV = 0,    // Speed and Stopping Violations
  RWTCV = 1,  // Right-of-Way and Traffic Control Violations
  LDV = 2,    // Lane and Direction Violations
  MSE = 3,    // Maneuvering and Signaling Errors
  GUD = 4,    // General Unsafe Driving
  NHA = 5,    // No Hazardous Action
  BDTHA = 6,  // Both Drivers Took Hazardous Actions
};

inline constexpr int kNumClasses = 7;

constexpr std::array<NarrativeLabel, kNumClasses> all_labels() {
  return {NarrativeLabel::SSV, NarrativeLabel::RWTCV, NarrativeLabel::LDV,
          NarrativeLabel::MSE, NarrativeLabel::GUD,   NarrativeLabel::NHA,
          NarrativeLabel::BDTHA};
}

std::string_view label_name(NarrativeLabel label);
std::string_view class_token(NarrativeLabel label);  // "<SSV>", "<RWTCV>", ...
std::optional<NarrativeLabel> parse_label(std::string_view name);

// Reserved vocabulary layout. The 13 reserved ids occupy the lowest range,
// followed by 256 byte-fallback tokens; corpus-induced words start after.
inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kSysId = 3;
inline constexpr int kUsrId = 4;
inline constexpr int kAsstId = 5;
inline constexpr int kClassTokenBase = 6;
inline constexpr int kReservedTokens = 13;
inline constexpr int kByteTokenBase = 13;
inline constexpr int kByteTokens = 256;
inline constexpr int kFirstWordId = kByteTokenBase + kByteTokens;  // 269

constexpr int class_token_id(NarrativeLabel label) {
  return kClassTokenBase + static_cast<int>(label);
}

}  // namespace dha
