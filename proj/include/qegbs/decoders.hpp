#ifndef QEGBS_DECODERS_HPP_
#define QEGBS_DECODERS_HPP_

#include <cstdint>
#include <vector>

#include "qegbs/scoring.hpp"
#include "qegbs/text_model.hpp"

namespace qegbs {

// Output of a baseline decode. tokens includes the final EOS when the
// decode finished; an unfinished decode (max_len reached first) is flagged.
struct DecodeOutcome {
  std::vector<TokenId> tokens;
  double score = 0.0;
  bool finished = false;
};

// Argmax at every step (ties to the lower token id); stops at EOS or max_len.
DecodeOutcome decode_greedy(const Scorer& scorer, const ScoreContext& input,
                            std::size_t max_len);

// Standard beam search over cumulative log-score. Finished hypotheses move
// to a pool; the search stops when the best unfinished score is strictly
// below the best finished score or max_len is reached. k == 1 equals greedy.
DecodeOutcome decode_beam(const Scorer& scorer, const ScoreContext& input,
                          std::size_t max_len, std::size_t beam_width);

// Ancestral sampling from the full distribution. One canonical draw per
// timestep from std::mt19937_64(seed); the CDF is walked in token-id order.
DecodeOutcome decode_sample(const Scorer& scorer, const ScoreContext& input,
                            std::size_t max_len, std::uint64_t seed);

// Samples from the renormalized k_trunc most probable tokens at each step
// (ties to the lower id). Shares the draw discipline with decode_sample, so
// k_trunc == |V| reproduces it exactly; k_trunc == 1 equals greedy.
DecodeOutcome decode_topk(const Scorer& scorer, const ScoreContext& input,
                          std::size_t max_len, std::size_t k_trunc,
                          std::uint64_t seed);

// Beam search over SoftPenaltyScorer(scorer, beta). beta == 0 equals
// decode_beam.
DecodeOutcome decode_soft_penalty(const Scorer& scorer, const ScoreContext& input,
                                  std::size_t max_len, std::size_t beam_width,
                                  double beta, const Lexicon& lexicon);

}  // namespace qegbs

#endif  // QEGBS_DECODERS_HPP_
