#include "qegbs/decoders.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "qegbs/errors.hpp"
#include "qegbs/rng.hpp"

namespace qegbs {

namespace {

void require_empty_prefix(const ScoreContext& input) {
  if (!input.prefix.empty())
    throw std::invalid_argument("decoders expect an empty output prefix");
}

ScoreContext with_prefix(const ScoreContext& input, std::span<const TokenId> prefix) {
  return ScoreContext{input.source_words, input.mt_words, prefix};
}

// Token ids ordered by probability descending, id ascending.
std::vector<std::size_t> by_probability(std::span<const double> logprobs) {
  std::vector<std::size_t> order(logprobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (logprobs[a] != logprobs[b]) return logprobs[a] > logprobs[b];
    return a < b;
  });
  return order;
}

// Draws one token from the renormalized distribution restricted to
// `allowed` (token ids, ascending). Walks the CDF in id order so that the
// no-truncation case is bit-identical to full sampling.
std::size_t sample_among(std::span<const double> logprobs,
                         std::span<const std::size_t> allowed,
                         std::mt19937_64& rng) {
  double total = 0.0;
  for (std::size_t id : allowed) total += std::exp(logprobs[id]);
  const double u = canonical_draw(rng) * total;
  double cum = 0.0;
  std::size_t last_positive = allowed.front();
  for (std::size_t id : allowed) {
    double p = std::exp(logprobs[id]);
    if (p <= 0.0) continue;
    last_positive = id;
    cum += p;
    if (u < cum) return id;
  }
  return last_positive;  // guards against u landing on accumulated rounding
}

DecodeOutcome sampling_decode(const Scorer& scorer, const ScoreContext& input,
                              std::size_t max_len, std::size_t k_trunc,
                              std::uint64_t seed) {
  require_empty_prefix(input);
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  const Vocabulary& vocab = scorer.vocab();
  std::mt19937_64 rng(seed);
  DecodeOutcome out;
  for (std::size_t t = 0; t < max_len; ++t) {
    auto logprobs = scorer.next_logprobs(with_prefix(input, out.tokens));
    auto order = by_probability(logprobs);
    order.resize(std::min(k_trunc, order.size()));
    std::sort(order.begin(), order.end());
    std::size_t choice = sample_among(logprobs, order, rng);
    out.tokens.push_back(static_cast<TokenId>(choice));
    out.score += logprobs[choice];
    if (static_cast<TokenId>(choice) == vocab.eos()) {
      out.finished = true;
      break;
    }
  }
  return out;
}

}  // namespace

DecodeOutcome decode_greedy(const Scorer& scorer, const ScoreContext& input,
                            std::size_t max_len) {
  require_empty_prefix(input);
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  const Vocabulary& vocab = scorer.vocab();
  DecodeOutcome out;
  for (std::size_t t = 0; t < max_len; ++t) {
    auto logprobs = scorer.next_logprobs(with_prefix(input, out.tokens));
    std::size_t best = 0;
    for (std::size_t v = 1; v < logprobs.size(); ++v)
      if (logprobs[v] > logprobs[best]) best = v;
    out.tokens.push_back(static_cast<TokenId>(best));
    out.score += logprobs[best];
    if (static_cast<TokenId>(best) == vocab.eos()) {
      out.finished = true;
      break;
    }
  }
  return out;
}

DecodeOutcome decode_beam(const Scorer& scorer, const ScoreContext& input,
                          std::size_t max_len, std::size_t beam_width) {
  require_empty_prefix(input);
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  if (beam_width < 1) throw std::invalid_argument("beam width must be >= 1");
  const Vocabulary& vocab = scorer.vocab();

  struct Item {
    std::vector<TokenId> tokens;
    double score = 0.0;
    bool finished = false;
  };
  auto better = [](const Item& a, const Item& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tokens < b.tokens;
  };

  std::vector<Item> beam{Item{}};
  std::vector<Item> finished;
  for (std::size_t t = 0; t < max_len; ++t) {
    std::vector<Item> candidates;
    for (const auto& item : beam) {
      if (item.finished) continue;
      auto logprobs = scorer.next_logprobs(with_prefix(input, item.tokens));
      for (std::size_t v = 0; v < logprobs.size(); ++v) {
        Item next = item;
        next.tokens.push_back(static_cast<TokenId>(v));
        next.score += logprobs[v];
        next.finished = static_cast<TokenId>(v) == vocab.eos();
        candidates.push_back(std::move(next));
      }
    }
    if (candidates.empty()) break;
    std::sort(candidates.begin(), candidates.end(), better);
    if (candidates.size() > beam_width) candidates.resize(beam_width);
    beam.clear();
    bool have_unfinished = false;
    for (auto& item : candidates) {
      if (item.finished) {
        finished.push_back(std::move(item));
      } else {
        have_unfinished = true;
        beam.push_back(std::move(item));
      }
    }
    if (!have_unfinished) break;
    if (!finished.empty()) {
      const Item* best_done = &finished.front();
      for (const auto& f : finished)
        if (better(f, *best_done)) best_done = &f;
      // Log-probabilities only shrink scores, so nothing below the best
      // finished score can ever overtake it.
      if (beam.front().score < best_done->score) break;
    }
  }

  DecodeOutcome out;
  if (!finished.empty()) {
    const Item* best = &finished.front();
    for (const auto& f : finished)
      if (better(f, *best)) best = &f;
    out.tokens = best->tokens;
    out.score = best->score;
    out.finished = true;
    return out;
  }
  // Nothing finished within max_len: force-terminate the best live
  // hypothesis so batch runs still produce an output (flagged via finished
  // == false upstream is not possible here; mirror the grid decoder).
  const Item& best = beam.front();
  out.tokens = best.tokens;
  out.score = best.score;
  auto logprobs = scorer.next_logprobs(with_prefix(input, out.tokens));
  out.score += logprobs[static_cast<std::size_t>(vocab.eos())];
  out.tokens.push_back(vocab.eos());
  out.finished = false;
  return out;
}

DecodeOutcome decode_sample(const Scorer& scorer, const ScoreContext& input,
                            std::size_t max_len, std::uint64_t seed) {
  return sampling_decode(scorer, input, max_len, scorer.vocab().size(), seed);
}

DecodeOutcome decode_topk(const Scorer& scorer, const ScoreContext& input,
                          std::size_t max_len, std::size_t k_trunc,
                          std::uint64_t seed) {
  if (k_trunc < 1) throw std::invalid_argument("top-k truncation must be >= 1");
  return sampling_decode(scorer, input, max_len, k_trunc, seed);
}

DecodeOutcome decode_soft_penalty(const Scorer& scorer, const ScoreContext& input,
                                  std::size_t max_len, std::size_t beam_width,
                                  double beta, const Lexicon& lexicon) {
  SoftPenaltyScorer penalized(scorer, beta, lexicon);
  return decode_beam(penalized, input, max_len, beam_width);
}

}  // namespace qegbs
