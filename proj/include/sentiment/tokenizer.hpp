#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sentiment/schemes.hpp"

namespace sentiment {

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kContinuationPrefix = "##";

// Token <-> index table. The file form is one token per line, line number
// (from 0) being the index.
class Vocab {
 public:
  static Vocab load(const std::string& path);
  static Vocab from_tokens(std::vector<std::string> tokens);

  std::optional<int> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }
  const std::string& token(int index) const { return tokens_.at(static_cast<std::size_t>(index)); }
  int size() const { return static_cast<int>(tokens_.size()); }

  int pad_id() const { return pad_; }
  int unk_id() const { return unk_; }
  int cls_id() const { return cls_; }
  int sep_id() const { return sep_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int pad_ = 0, unk_ = 0, cls_ = 0, sep_ = 0;
};

struct InputExample {
  std::string text_a;
  std::string text_b;  // single-sequence classification: always empty
  std::optional<ClassLabel> label;
};

struct EncodedExample {
  std::vector<int> input_ids;
  std::vector<std::uint8_t> attention_mask;
  std::vector<int> segment_ids;  // all zero
  std::optional<ClassLabel> label;

  int unmasked() const;
};

// Lowercase, whitespace split, ASCII punctuation as standalone tokens.
std::vector<std::string> basic_tokenize(std::string_view text);

// Greedy longest-match-first. Yields {"[UNK]"} when a word cannot be covered
// or is longer than max_chars bytes.
std::vector<std::string> wordpiece_split(std::string_view token, const Vocab& vocab,
                                         std::size_t max_chars = 100);

// basic_tokenize followed by wordpiece_split on each word.
std::vector<std::string> tokenize(std::string_view text, const Vocab& vocab);

// [CLS] pieces [SEP], pieces truncated at the tail to fit max_len, then
// right-padded with [PAD].
EncodedExample encode(const InputExample& example, const Vocab& vocab, int max_len);

// One line per example: id, label (-1 if none), ids, mask, segments.
// The three sequences are space separated.
void write_encoded_table(const std::string& path, std::span<const std::string> ids,
                         std::span<const EncodedExample> encoded);

}  // namespace sentiment
