#include "dha/tokenizer.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "dha/errors.hpp"
#include "dha/rng.hpp"

#include "json.hpp"

namespace dha {

namespace {

const char* kControlTokens[6] = {"<PAD>", "<BOS>", "<EOS>", "<SYS>", "<USR>", "<ASST>"};

bool is_word_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_';
}

// Only printable ASCII may become an induced single-character token; every
// other byte always goes through byte fallback so induced tokens stay valid
// UTF-8 in the vocab file.
bool is_inducible_char(unsigned char c) { return c >= 0x20 && c <= 0x7e; }

std::string byte_token_name(int b) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "<0x%02X>", b);
  return buf;
}

// Reserved literals get matched ahead of ordinary segmentation so class
// tokens encode to their single reserved id.
int match_reserved_literal(std::string_view text, std::size_t pos, const Vocab& vocab,
                           std::size_t* length) {
  if (text[pos] != '<') return -1;
  for (int id = 0; id < kReservedTokens; ++id) {
    const std::string& tok = vocab.token(id);
    if (text.compare(pos, tok.size(), tok) == 0) {
      *length = tok.size();
      return id;
    }
  }
  return -1;
}

}  // namespace

void Vocab::index_tokens() {
  token_to_id_.clear();
  for (int id = kFirstWordId; id < size(); ++id) {
    token_to_id_.emplace(id_to_token_[static_cast<std::size_t>(id)], id);
  }
}

Vocab Vocab::build(const std::vector<std::string>& corpus, std::size_t max_size) {
  const std::size_t fixed = static_cast<std::size_t>(kFirstWordId);
  if (max_size < fixed + 1) {
    throw ConfigError("vocab max_size must be at least " + std::to_string(fixed + 1));
  }
  if (corpus.empty()) throw ConfigError("vocab corpus is empty");

  Vocab v;
  for (const char* t : kControlTokens) v.id_to_token_.emplace_back(t);
  for (NarrativeLabel label : all_labels()) {
    v.id_to_token_.emplace_back(class_token(label));
  }
  for (int b = 0; b < kByteTokens; ++b) v.id_to_token_.push_back(byte_token_name(b));

  // frequency count over words and inducible single characters
  std::map<std::string, std::uint64_t> freq;
  for (const std::string& text : corpus) {
    std::size_t i = 0;
    while (i < text.size()) {
      unsigned char c = static_cast<unsigned char>(text[i]);
      if (is_word_char(c)) {
        std::size_t j = i;
        while (j < text.size() && is_word_char(static_cast<unsigned char>(text[j]))) ++j;
        ++freq[text.substr(i, j - i)];
        i = j;
      } else {
        if (is_inducible_char(c)) ++freq[std::string(1, text[i])];
        ++i;
      }
    }
  }

  std::vector<std::pair<std::string, std::uint64_t>> by_freq(freq.begin(), freq.end());
  std::sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::size_t budget = max_size - fixed;
  for (const auto& [word, count] : by_freq) {
    if (budget == 0) break;
    v.id_to_token_.push_back(word);
    --budget;
  }
  v.index_tokens();
  return v;
}

std::vector<int> Vocab::encode(std::string_view text) const {
  std::vector<int> ids;
  ids.reserve(text.size() / 3 + 4);
  std::size_t i = 0;
  auto emit_bytes = [&](std::string_view chunk) {
    for (unsigned char c : chunk) ids.push_back(kByteTokenBase + c);
  };
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == '<') {
      std::size_t len = 0;
      int id = match_reserved_literal(text, i, *this, &len);
      if (id >= 0) {
        ids.push_back(id);
        i += len;
        continue;
      }
    }
    if (is_word_char(c)) {
      std::size_t j = i;
      while (j < text.size() && is_word_char(static_cast<unsigned char>(text[j]))) ++j;
      std::string word(text.substr(i, j - i));
      auto it = token_to_id_.find(word);
      if (it != token_to_id_.end()) {
        ids.push_back(it->second);
      } else {
        emit_bytes(word);
      }
      i = j;
    } else {
      std::string ch(1, text[i]);
      auto it = token_to_id_.find(ch);
      if (it != token_to_id_.end()) {
        ids.push_back(it->second);
      } else {
        emit_bytes(ch);
      }
      ++i;
    }
  }
  return ids;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || id >= size()) {
      throw ShapeError("token id " + std::to_string(id) + " out of range");
    }
    if (id >= kByteTokenBase && id < kByteTokenBase + kByteTokens) {
      out += static_cast<char>(id - kByteTokenBase);
    } else {
      out += id_to_token_[static_cast<std::size_t>(id)];
    }
  }
  return out;
}

std::vector<int> Vocab::encode_prompt(const PromptTriple& prompt) const {
  std::vector<int> ids;
  ids.push_back(kBosId);
  ids.push_back(kSysId);
  std::vector<int> sys = encode(prompt.system);
  ids.insert(ids.end(), sys.begin(), sys.end());
  ids.push_back(kUsrId);
  std::vector<int> usr = encode(prompt.user);
  ids.insert(ids.end(), usr.begin(), usr.end());
  ids.push_back(kAsstId);
  return ids;
}

std::uint64_t Vocab::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const std::string& t : id_to_token_) {
    h = fnv1a64(t.data(), t.size(), h);
    h = fnv1a64("\x1f", 1, h);
  }
  return h;
}

std::string Vocab::to_jsonl() const {
  std::string out;
  for (int id = 0; id < size(); ++id) {
    nlohmann::json j;
    j["id"] = id;
    j["token"] = id_to_token_[static_cast<std::size_t>(id)];
    j["reserved"] = is_reserved(id);
    out += j.dump();
    out += '\n';
  }
  return out;
}

Vocab Vocab::from_jsonl(const std::string& text) {
  Vocab v;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    if (end > pos) {
      nlohmann::json j = nlohmann::json::parse(text.substr(pos, end - pos));
      int id = j.at("id").get<int>();
      if (id != static_cast<int>(v.id_to_token_.size())) {
        throw ParseError("vocab ids out of order at id " + std::to_string(id));
      }
      v.id_to_token_.push_back(j.at("token").get<std::string>());
    }
    pos = end + 1;
  }
  if (v.size() < kFirstWordId) throw ParseError("vocab file truncated");
  v.index_tokens();
  return v;
}

}  // namespace dha
