#ifndef QEGBS_SCORING_HPP_
#define QEGBS_SCORING_HPP_

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qegbs/text_model.hpp"

namespace qegbs {

// Conditioning context for one next-token query: the source sentence, the
// MT translation being post-edited, and the output prefix so far. Spans
// reference caller-owned storage.
struct ScoreContext {
  std::span<const std::string> source_words;
  std::span<const std::string> mt_words;
  std::span<const TokenId> prefix;
};

// Deterministic next-token distribution over the vocabulary. Outputs are
// proper log-probability vectors: logsumexp(next_logprobs(ctx)) == 0 within
// 1e-6 for every context. Implementations are immutable after construction
// and safe to share across concurrent decodes.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::vector<double> next_logprobs(const ScoreContext& ctx) const = 0;
  const Vocabulary& vocab() const { return *vocab_; }

 protected:
  explicit Scorer(const Vocabulary& vocab) : vocab_(&vocab) {}

 private:
  const Vocabulary* vocab_;
};

// Replays a fixed prefix -> distribution table; prefixes not listed fall
// back to a mandatory default row. Exact-test scorer.
//
// File format, one row per line:
//   prefix_tokens|token:prob,token:prob,...
// where prefix_tokens are space-separated (empty for the empty prefix) and
// "*" marks the default row. Unlisted tokens in a row have probability 0.
class TableScorer : public Scorer {
 public:
  using Row = std::vector<double>;  // probabilities over the vocabulary

  TableScorer(const Vocabulary& vocab,
              std::map<std::vector<TokenId>, Row> rows, Row default_row);
  static TableScorer load(const std::string& path, const Vocabulary& vocab);

  std::vector<double> next_logprobs(const ScoreContext& ctx) const override;

 private:
  struct TokenSeqLess {
    using is_transparent = void;
    bool operator()(std::span<const TokenId> a, std::span<const TokenId> b) const {
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
  };

  std::map<std::vector<TokenId>, std::vector<double>, TokenSeqLess> rows_;  // stored as logprobs
  std::vector<double> default_row_;
};

// Add-k smoothed n-gram scorer:
//   P(t | h) = (count(h,t) + k) / (count(h) + k * |V|)
// with the history truncated to the last n-1 tokens and padded with a
// begin-of-sequence sentinel.
class NgramScorer : public Scorer {
 public:
  static constexpr TokenId kBos = -1;

  static NgramScorer train(const Vocabulary& vocab,
                           std::span<const std::vector<TokenId>> corpus,
                           int order, double add_k);
  // File format: "#order n" and "#addk k" headers, then
  // "history<TAB>token<TAB>count" lines with "<s>" for the BOS sentinel.
  static NgramScorer load(const std::string& path, const Vocabulary& vocab);
  void save(const std::string& path) const;

  std::vector<double> next_logprobs(const ScoreContext& ctx) const override;
  int order() const { return order_; }
  double add_k() const { return add_k_; }

 private:
  NgramScorer(const Vocabulary& vocab, int order, double add_k)
      : Scorer(vocab), order_(order), add_k_(add_k) {}

  std::vector<TokenId> history_for(std::span<const TokenId> prefix) const;

  int order_;
  double add_k_;
  // history -> (total count, per-token counts); ordered for deterministic save
  std::map<std::vector<TokenId>, std::map<TokenId, std::uint64_t>> counts_;
  std::map<std::vector<TokenId>, std::uint64_t> totals_;
};

// Mixes the base distribution with a uniform "copy" distribution over the
// piece tokens of the context's MT and source words plus EOS:
//   p = lambda * base + (1 - lambda) * copy
// Injects the conservatism of a post-editing model that prefers reproducing
// its inputs. lambda == 1 returns the base distribution unchanged.
class CopyBiasScorer : public Scorer {
 public:
  CopyBiasScorer(const Scorer& base, double lambda, const Lexicon& lexicon);
  std::vector<double> next_logprobs(const ScoreContext& ctx) const override;

 private:
  const Scorer* base_;
  double lambda_;
  const Lexicon* lexicon_;
};

// Subtracts beta from the log-probability of every token absent from the
// source and MT piece-token sets (EOS exempt), then renormalizes. beta == 0
// returns the base distribution unchanged.
class SoftPenaltyScorer : public Scorer {
 public:
  SoftPenaltyScorer(const Scorer& base, double beta, const Lexicon& lexicon);
  std::vector<double> next_logprobs(const ScoreContext& ctx) const override;

 private:
  const Scorer* base_;
  double beta_;
  const Lexicon* lexicon_;
};

// Piece-token ids of the given words (union over both lists), skipping words
// with no segmentation. EOS is appended when include_eos is set. Sorted and
// deduplicated.
std::vector<TokenId> input_token_set(std::span<const std::string> source_words,
                                     std::span<const std::string> mt_words,
                                     const Vocabulary& vocab,
                                     const Lexicon& lexicon, bool include_eos);

double logsumexp(std::span<const double> values);

}  // namespace qegbs

#endif  // QEGBS_SCORING_HPP_
