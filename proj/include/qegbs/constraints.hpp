#ifndef QEGBS_CONSTRAINTS_HPP_
#define QEGBS_CONSTRAINTS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qegbs/text_model.hpp"

namespace qegbs {

enum class QETag : std::uint8_t { OK, BAD };

std::string_view to_string(QETag tag);
QETag qe_tag_from_string(std::string_view text);

// A run of words that must appear contiguously in the decoded output.
// source_span is the half-open word index range in the MT sentence the run
// came from.
struct Constraint {
  std::vector<SegmentedWord> words;
  std::pair<std::size_t, std::size_t> source_span{0, 0};

  std::vector<TokenId> flattened() const;
  std::size_t token_count() const;
};

struct ConstraintSet {
  std::vector<Constraint> constraints;
  // Flattened token count across all constraints; the grid decoder's numC.
  std::size_t total_tokens = 0;

  bool empty() const { return constraints.empty(); }
  std::vector<std::vector<TokenId>> flattened() const;
};

// Rule for lifting subword-level tags to word level. AllOk is the
// conservative default: one BAD piece taints the word.
enum class TagLift { AllOk, AnyOk };

// One tag per word covered by `boundaries`. Boundaries must partition the
// tagged token range; throws LengthMismatchError if tag count differs from
// the covered token count.
std::vector<QETag> lift_tags_to_words(
    std::span<const QETag> token_tags,
    std::span<const std::pair<std::size_t, std::size_t>> boundaries,
    TagLift rule = TagLift::AllOk);

// Maximal runs of consecutive OK-tagged words become constraints, in
// sentence order. BAD words appear in no constraint; an all-BAD (or empty)
// tagging yields an empty set and the decode degrades to plain beam search.
ConstraintSet extract_constraints(std::span<const std::string> mt_words,
                                  std::span<const QETag> word_tags,
                                  const Vocabulary& vocab,
                                  const Lexicon& lexicon);

}  // namespace qegbs

#endif  // QEGBS_CONSTRAINTS_HPP_
