#include "qegbs/text_model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qegbs/errors.hpp"

namespace qegbs {

namespace {

bool has_marker(std::string_view token, std::string_view marker) {
  return !marker.empty() && token.size() > marker.size() &&
         token.ends_with(marker);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string item;
  while (in >> item) out.push_back(item);
  return out;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenId eos,
                       std::string continuation_marker)
    : tokens_(std::move(tokens)), eos_(eos), marker_(std::move(continuation_marker)) {
  if (eos_ < 0 || static_cast<std::size_t>(eos_) >= tokens_.size())
    throw SchemaError("eos id out of range");
  index_.reserve(tokens_.size());
  continuation_.resize(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw SchemaError("empty token string at id " + std::to_string(i));
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second)
      throw SchemaError("duplicate token: " + tokens_[i]);
    continuation_[i] = has_marker(tokens_[i], marker_);
  }
  if (continuation_[static_cast<std::size_t>(eos_)])
    throw SchemaError("eos token carries the continuation marker");
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string_view Vocabulary::piece_text(TokenId id) const {
  std::string_view text = token(id);
  if (is_continuation(id)) text.remove_suffix(marker_.size());
  return text;
}

Vocabulary Vocabulary::load(const std::string& path, std::string continuation_marker) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary file: " + path);
  std::string line;
  std::size_t lineno = 0;
  std::string eos_token;
  std::vector<std::string> tokens;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("#eos ", 0) == 0) {
      if (!eos_token.empty()) throw ParseError("repeated #eos header", lineno);
      eos_token = line.substr(5);
      if (eos_token.empty()) throw ParseError("empty #eos declaration", lineno);
      continue;
    }
    if (line.empty()) throw ParseError("empty token line", lineno);
    tokens.push_back(line);
  }
  if (eos_token.empty()) throw DataError("vocabulary file lacks an #eos header: " + path);
  auto it = std::find(tokens.begin(), tokens.end(), eos_token);
  if (it == tokens.end()) throw DataError("eos token not in vocabulary: " + eos_token);
  TokenId eos = static_cast<TokenId>(it - tokens.begin());
  return Vocabulary(std::move(tokens), eos, std::move(continuation_marker));
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vocabulary file: " + path);
  out << "#eos " << token(eos_) << "\n";
  for (const auto& t : tokens_) out << t << "\n";
}

void Lexicon::add(const std::string& word, std::vector<TokenId> pieces,
                  const Vocabulary& vocab) {
  if (word.empty()) throw SchemaError("empty lexicon word");
  if (pieces.empty()) throw SchemaError("empty segmentation for word: " + word);
  std::string joined;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    TokenId id = pieces[i];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab.size())
      throw SchemaError("lexicon piece out of vocabulary for word: " + word);
    if (id == vocab.eos())
      throw SchemaError("eos used as a word piece for word: " + word);
    bool last = (i + 1 == pieces.size());
    if (vocab.is_continuation(id) == last)
      throw SchemaError("continuation markers malformed for word: " + word);
    joined += vocab.piece_text(id);
  }
  if (joined != word)
    throw SchemaError("pieces do not spell the word: " + word + " vs " + joined);
  if (!entries_.emplace(word, std::move(pieces)).second)
    throw SchemaError("duplicate lexicon entry: " + word);
}

const std::vector<TokenId>* Lexicon::find(const std::string& word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::pair<std::string, std::vector<TokenId>>> Lexicon::sorted_entries() const {
  std::vector<std::pair<std::string, std::vector<TokenId>>> out(entries_.begin(), entries_.end());
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

Lexicon Lexicon::load(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon file: " + path);
  Lexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("lexicon line lacks a tab", lineno);
    std::string word = line.substr(0, tab);
    std::vector<TokenId> pieces;
    for (const auto& piece : split_ws(line.substr(tab + 1))) {
      auto id = vocab.find(piece);
      if (!id) throw ParseError("unknown piece '" + piece + "' for word '" + word + "'", lineno);
      pieces.push_back(*id);
    }
    try {
      lex.add(word, std::move(pieces), vocab);
    } catch (const SchemaError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return lex;
}

void Lexicon::save(const std::string& path, const Vocabulary& vocab) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write lexicon file: " + path);
  for (const auto& [word, pieces] : sorted_entries()) {
    out << word << '\t';
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (i) out << ' ';
      out << vocab.token(pieces[i]);
    }
    out << '\n';
  }
}

SegmentedWord segment(const std::string& word, const Vocabulary& vocab,
                      const Lexicon& lexicon) {
  if (word.empty()) throw UnknownWordError("cannot segment an empty word");
  if (const auto* pieces = lexicon.find(word))
    return SegmentedWord{word, *pieces};
  if (auto id = vocab.find(word)) {
    if (!vocab.is_continuation(*id) && *id != vocab.eos())
      return SegmentedWord{word, {*id}};
  }
  if (auto unk = lexicon.unknown_token())
    return SegmentedWord{word, {*unk}};
  throw UnknownWordError("no segmentation for word: " + word);
}

namespace {

// Shared scan for detokenize/word_boundaries. Drops one trailing EOS and
// rejects EOS anywhere else.
std::span<const TokenId> strip_final_eos(std::span<const TokenId> tokens,
                                         const Vocabulary& vocab) {
  if (!tokens.empty() && tokens.back() == vocab.eos())
    tokens = tokens.subspan(0, tokens.size() - 1);
  for (TokenId id : tokens)
    if (id == vocab.eos())
      throw std::invalid_argument("eos inside a token sequence");
  return tokens;
}

}  // namespace

std::vector<std::string> detokenize(std::span<const TokenId> tokens,
                                    const Vocabulary& vocab) {
  tokens = strip_final_eos(tokens, vocab);
  std::vector<std::string> words;
  std::string current;
  for (TokenId id : tokens) {
    current += vocab.piece_text(id);
    if (!vocab.is_continuation(id)) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty())
    throw DanglingContinuationError("token sequence ends mid-word");
  return words;
}

std::vector<std::pair<std::size_t, std::size_t>> word_boundaries(
    std::span<const TokenId> tokens, const Vocabulary& vocab) {
  tokens = strip_final_eos(tokens, vocab);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t start = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!vocab.is_continuation(tokens[i])) {
      pairs.emplace_back(start, i + 1);
      start = i + 1;
    }
  }
  if (start != tokens.size())
    throw DanglingContinuationError("token sequence ends mid-word");
  return pairs;
}

}  // namespace qegbs
