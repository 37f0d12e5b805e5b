#include "qegbs/constraints.hpp"

#include "qegbs/errors.hpp"

namespace qegbs {

std::string_view to_string(QETag tag) {
  return tag == QETag::OK ? "OK" : "BAD";
}

QETag qe_tag_from_string(std::string_view text) {
  if (text == "OK") return QETag::OK;
  if (text == "BAD") return QETag::BAD;
  throw SchemaError("invalid QE tag: " + std::string(text));
}

std::vector<TokenId> Constraint::flattened() const {
  std::vector<TokenId> out;
  for (const auto& word : words)
    out.insert(out.end(), word.pieces.begin(), word.pieces.end());
  return out;
}

std::size_t Constraint::token_count() const {
  std::size_t n = 0;
  for (const auto& word : words) n += word.pieces.size();
  return n;
}

std::vector<std::vector<TokenId>> ConstraintSet::flattened() const {
  std::vector<std::vector<TokenId>> out;
  out.reserve(constraints.size());
  for (const auto& c : constraints) out.push_back(c.flattened());
  return out;
}

std::vector<QETag> lift_tags_to_words(
    std::span<const QETag> token_tags,
    std::span<const std::pair<std::size_t, std::size_t>> boundaries,
    TagLift rule) {
  std::size_t covered = 0;
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    const auto& [start, end] = boundaries[i];
    if (start != covered || end <= start)
      throw std::invalid_argument("boundaries do not partition the sequence");
    covered = end;
  }
  if (covered != token_tags.size())
    throw LengthMismatchError("tag count " + std::to_string(token_tags.size()) +
                              " does not match token count " + std::to_string(covered));
  std::vector<QETag> word_tags;
  word_tags.reserve(boundaries.size());
  for (const auto& [start, end] : boundaries) {
    std::size_t ok = 0;
    for (std::size_t i = start; i < end; ++i)
      if (token_tags[i] == QETag::OK) ++ok;
    bool word_ok = rule == TagLift::AllOk ? ok == end - start : ok > 0;
    word_tags.push_back(word_ok ? QETag::OK : QETag::BAD);
  }
  return word_tags;
}

ConstraintSet extract_constraints(std::span<const std::string> mt_words,
                                  std::span<const QETag> word_tags,
                                  const Vocabulary& vocab,
                                  const Lexicon& lexicon) {
  if (mt_words.size() != word_tags.size())
    throw LengthMismatchError("word tag count " + std::to_string(word_tags.size()) +
                              " does not match word count " + std::to_string(mt_words.size()));
  ConstraintSet set;
  std::size_t i = 0;
  while (i < mt_words.size()) {
    if (word_tags[i] != QETag::OK) {
      ++i;
      continue;
    }
    std::size_t j = i;
    Constraint constraint;
    while (j < mt_words.size() && word_tags[j] == QETag::OK) {
      constraint.words.push_back(segment(mt_words[j], vocab, lexicon));
      ++j;
    }
    constraint.source_span = {i, j};
    set.total_tokens += constraint.token_count();
    set.constraints.push_back(std::move(constraint));
    i = j;
  }
  return set;
}

}  // namespace qegbs
