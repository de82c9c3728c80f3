#include "sentiment/tokenizer.hpp"

#include <fstream>

#include "sentiment/error.hpp"

namespace sentiment {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
         (c >= 123 && c <= 126);
}

}  // namespace

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open vocab file " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_tokens(std::move(tokens));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  Vocab v;
  v.tokens_ = std::move(tokens);
  v.index_.reserve(v.tokens_.size());
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (v.tokens_[i].empty()) {
      throw Error(ErrorCode::kMalformedRecord, "empty vocab entry at line " + std::to_string(i + 1));
    }
    if (!v.index_.emplace(v.tokens_[i], static_cast<int>(i)).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate vocab entry '" + v.tokens_[i] + "'");
    }
  }
  auto special = [&](std::string_view name) {
    const auto id = v.find(name);
    if (!id) {
      throw Error(ErrorCode::kMalformedRecord, "vocab lacks special token " + std::string(name));
    }
    return *id;
  };
  v.pad_ = special(kPadToken);
  v.unk_ = special(kUnkToken);
  v.cls_ = special(kClsToken);
  v.sep_ = special(kSepToken);
  return v;
}

std::optional<int> Vocab::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int EncodedExample::unmasked() const {
  int n = 0;
  for (auto m : attention_mask) n += m;
  return n;
}

std::vector<std::string> basic_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c) || c < 0x20 || c == 0x7f) {
      flush();
    } else if (is_punct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      current.push_back(ch);
    }
  }
  flush();
  return out;
}

std::vector<std::string> wordpiece_split(std::string_view token, const Vocab& vocab,
                                         std::size_t max_chars) {
  if (token.size() > max_chars) return {std::string(kUnkToken)};
  std::vector<std::string> pieces;
  std::size_t start = 0;
  std::string candidate;
  while (start < token.size()) {
    std::size_t end = token.size();
    bool matched = false;
    while (start < end) {
      candidate.clear();
      if (start > 0) candidate.append(kContinuationPrefix);
      candidate.append(token.substr(start, end - start));
      if (vocab.contains(candidate)) {
        matched = true;
        break;
      }
      --end;
    }
    if (!matched) return {std::string(kUnkToken)};
    pieces.push_back(candidate);
    start = end;
  }
  return pieces;
}

std::vector<std::string> tokenize(std::string_view text, const Vocab& vocab) {
  std::vector<std::string> pieces;
  for (const auto& word : basic_tokenize(text)) {
    auto sub = wordpiece_split(word, vocab);
    pieces.insert(pieces.end(), std::make_move_iterator(sub.begin()),
                  std::make_move_iterator(sub.end()));
  }
  return pieces;
}

EncodedExample encode(const InputExample& example, const Vocab& vocab, int max_len) {
  if (max_len < 2) {
    throw Error(ErrorCode::kConfig, "max sequence length must be at least 2");
  }
  if (!example.text_b.empty()) {
    throw Error(ErrorCode::kConfig, "sentence pairs are not supported; text_b must be empty");
  }
  const auto pieces = tokenize(example.text_a, vocab);
  const std::size_t keep = std::min(pieces.size(), static_cast<std::size_t>(max_len - 2));

  EncodedExample enc;
  enc.label = example.label;
  const auto len = static_cast<std::size_t>(max_len);
  enc.input_ids.assign(len, vocab.pad_id());
  enc.attention_mask.assign(len, 0);
  enc.segment_ids.assign(len, 0);

  std::size_t pos = 0;
  enc.input_ids[pos++] = vocab.cls_id();
  for (std::size_t i = 0; i < keep; ++i) {
    const auto id = vocab.find(pieces[i]);
    enc.input_ids[pos++] = id ? *id : vocab.unk_id();
  }
  enc.input_ids[pos++] = vocab.sep_id();
  std::fill(enc.attention_mask.begin(), enc.attention_mask.begin() + static_cast<long>(pos), 1);
  return enc;
}

void write_encoded_table(const std::string& path, std::span<const std::string> ids,
                         std::span<const EncodedExample> encoded) {
  if (ids.size() != encoded.size()) throw Error(ErrorCode::kLengthMismatch, "ids and encodings differ in length");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  auto join = [&](const auto& seq) {
    for (std::size_t j = 0; j < seq.size(); ++j) out << (j ? " " : "") << static_cast<int>(seq[j]);
  };
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& e = encoded[i];
    out << ids[i] << '\t' << (e.label ? e.label->index : -1) << '\t';
    join(e.input_ids);
    out << '\t';
    join(e.attention_mask);
    out << '\t';
    join(e.segment_ids);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace sentiment
