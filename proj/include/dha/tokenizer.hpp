#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dha/labels.hpp"
#include "dha/narrative.hpp"

namespace dha {

// Word-level vocabulary with byte fallback. Layout: 13 reserved control/class
// tokens, then 256 byte tokens, then corpus-induced words. Encoding is
// lossless for arbitrary byte strings.
class Vocab {
 public:
  Vocab() = default;  // empty; fill via build() or from_jsonl()

  // Word induction by frequency (ties broken lexicographically), truncated to
  // max_size. Throws ConfigError when max_size cannot hold the fixed blocks.
  static Vocab build(const std::vector<std::string>& corpus, std::size_t max_size);

  int size() const { return static_cast<int>(id_to_token_.size()); }
  const std::string& token(int id) const { return id_to_token_.at(static_cast<std::size_t>(id)); }
  bool is_reserved(int id) const { return id < kReservedTokens; }

  std::vector<int> encode(std::string_view text) const;
  // Throws ShapeError on out-of-range ids.
  std::string decode(const std::vector<int>& ids) const;

  // Prompt assembly: BOS SYS <system> USR <user> ASST; the class answer is
  // predicted at the final (ASST) position.
  std::vector<int> encode_prompt(const PromptTriple& prompt) const;

  std::uint64_t content_hash() const;

  // Line-delimited JSON {id, token, reserved}, ordered by id.
  std::string to_jsonl() const;
  static Vocab from_jsonl(const std::string& text);

 private:
  void index_tokens();

  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;  // words only
};

}  // namespace dha
