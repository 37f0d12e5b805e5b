#ifndef QEGBS_TEXT_MODEL_HPP_
#define QEGBS_TEXT_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace qegbs {

using TokenId = std::int32_t;

// Token inventory with a designated EOS token. A token ending in the
// continuation marker ("@@" by default) is a non-final piece of a word;
// word boundaries inside token sequences follow from this convention.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens, TokenId eos,
             std::string continuation_marker = "@@");

  // File format: a header line "#eos <token>", then one token per line,
  // line order defining the ids.
  static Vocabulary load(const std::string& path,
                         std::string continuation_marker = "@@");
  void save(const std::string& path) const;

  std::size_t size() const { return tokens_.size(); }
  TokenId eos() const { return eos_; }
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::optional<TokenId> find(std::string_view token) const;
  bool is_continuation(TokenId id) const { return continuation_[static_cast<std::size_t>(id)]; }
  const std::string& continuation_marker() const { return marker_; }

  // Token text with the continuation marker stripped.
  std::string_view piece_text(TokenId id) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::vector<bool> continuation_;
  TokenId eos_;
  std::string marker_;
};

// One surface word and its subword pieces. All pieces except the last carry
// the continuation marker; detokenizing the pieces reproduces the surface.
struct SegmentedWord {
  std::string surface;
  std::vector<TokenId> pieces;
};

// Static word -> pieces table. Segmentation is data, not a learned model;
// entries are validated against the SegmentedWord invariants at load time.
class Lexicon {
 public:
  Lexicon() = default;

  // File format: one entry per line, "word<TAB>piece1 piece2 ...".
  static Lexicon load(const std::string& path, const Vocabulary& vocab);
  void save(const std::string& path, const Vocabulary& vocab) const;

  // Validates the entry invariants; throws SchemaError on violation.
  void add(const std::string& word, std::vector<TokenId> pieces,
           const Vocabulary& vocab);

  const std::vector<TokenId>* find(const std::string& word) const;
  void set_unknown_token(TokenId unk) { unk_ = unk; }
  std::optional<TokenId> unknown_token() const { return unk_; }
  std::size_t size() const { return entries_.size(); }

  // Entries in deterministic (sorted) order, for serialization.
  std::vector<std::pair<std::string, std::vector<TokenId>>> sorted_entries() const;

 private:
  std::unordered_map<std::string, std::vector<TokenId>> entries_;
  std::optional<TokenId> unk_;
};

// Segments one word via the lexicon, falling back to a single-token
// segmentation when the word itself is a (non-continuation, non-EOS) vocab
// token, then to the lexicon's unknown token if one is configured.
// Throws UnknownWordError otherwise.
SegmentedWord segment(const std::string& word, const Vocabulary& vocab,
                      const Lexicon& lexicon);

// Merges continuation-marked pieces with their successors. A single trailing
// EOS is dropped; EOS anywhere else violates the precondition. Throws
// DanglingContinuationError if the sequence ends mid-word.
std::vector<std::string> detokenize(std::span<const TokenId> tokens,
                                    const Vocabulary& vocab);

// (start,end) half-open token index pairs, one per surface word. The pairs
// partition the sequence (after dropping a single trailing EOS).
std::vector<std::pair<std::size_t, std::size_t>> word_boundaries(
    std::span<const TokenId> tokens, const Vocabulary& vocab);

}  // namespace qegbs

#endif  // QEGBS_TEXT_MODEL_HPP_
