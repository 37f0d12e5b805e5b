#ifndef QEGBS_GBS_HPP_
#define QEGBS_GBS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qegbs/constraints.hpp"
#include "qegbs/scoring.hpp"
#include "qegbs/text_model.hpp"

namespace qegbs {

// How the start transition is gated. Token: a constraint may start anywhere,
// its identity checked only through its initial token. Word: a constraint may
// start only at a word boundary of the hypothesis, so shared subword prefixes
// of distinct words can never splice a constraint into the middle of another
// word.
enum class MatchMode { Token, Word };

std::string_view to_string(MatchMode mode);
MatchMode match_mode_from_string(std::string_view text);

struct ConstraintProgress {
  std::uint32_t consumed = 0;   // tokens of this constraint emitted so far
  std::int32_t run_start = -1;  // output position where the run begins
};

// One partial output. Open hypotheses free-generate or start constraints;
// a closed hypothesis only emits the next token of its active constraint.
struct Hypothesis {
  std::vector<TokenId> tokens;
  double score = 0.0;  // cumulative log-probability of the emitted tokens
  std::vector<ConstraintProgress> progress;
  std::uint32_t covered_tokens = 0;       // the grid's c coordinate
  std::int32_t active_constraint = -1;    // >= 0 iff closed
  bool finished = false;                  // last token is EOS
  bool forced_eos = false;                // finished via the fallback path

  bool open() const { return active_constraint < 0; }
};

// Deterministic total order used for pruning and final selection: score
// descending, then lexicographically smaller token sequence, then coverage
// bookkeeping as a final disambiguator.
bool hypothesis_better(const Hypothesis& a, const Hypothesis& b);

// Immutable per-decode view shared by the step functions.
struct GbsProblem {
  const Scorer* scorer = nullptr;
  std::span<const std::string> source_words;
  std::span<const std::string> mt_words;
  std::vector<std::vector<TokenId>> constraint_tokens;  // flattened
  MatchMode mode = MatchMode::Word;

  std::size_t num_constraint_tokens() const;
  ScoreContext context_for(const Hypothesis& hyp) const;
};

// Free generation: one open successor per vocabulary token, none of which
// earns constraint coverage. The EOS successor is kept (marked finished)
// only when the hypothesis already covers all constraint tokens; otherwise
// it is discarded.
std::vector<Hypothesis> step_generate(const GbsProblem& problem,
                                      const Hypothesis& hyp,
                                      std::span<const double> logprobs);

// Starts the given untouched constraint by emitting its first token, or
// returns nullopt when the mode forbids it (Word mode, hypothesis mid-word).
// Single-token constraints complete immediately; otherwise the successor is
// closed on the constraint.
std::optional<Hypothesis> step_start(const GbsProblem& problem,
                                     const Hypothesis& hyp,
                                     std::size_t constraint_index,
                                     std::span<const double> logprobs);

// Emits the next token of the active constraint; reopens the hypothesis when
// the constraint's last token is consumed.
Hypothesis step_continue(const GbsProblem& problem, const Hypothesis& hyp,
                         std::span<const double> logprobs);

// Keeps the k best hypotheses under hypothesis_better, in order.
void prune(std::vector<Hypothesis>& cell, std::size_t k);

// Loop bound for the grid row range at timestep t (Algorithm bound
// c in [max(0, numC + t - maxLen), min(t, numC)]).
std::pair<std::size_t, std::size_t> grid_row_range(std::size_t t, std::size_t max_len,
                                                   std::size_t num_constraint_tokens);

struct DecodeStats {
  std::uint64_t expanded = 0;                // successor hypotheses created
  std::vector<std::uint64_t> row_occupancy;  // kept hypotheses per grid row c
  bool used_fallback = false;                // no finished top-level hypothesis
};

struct GbsOptions {
  std::size_t max_len = 0;
  std::size_t beam_width = 1;
  MatchMode mode = MatchMode::Word;
  // Rank finished hypotheses by score / length instead of raw score.
  // Off by default: the grid scores hypotheses by model score alone.
  bool length_normalize = false;
};

struct GbsResult {
  Hypothesis best;
  DecodeStats stats;
};

// Grid Beam Search. The context's prefix must be empty; source and MT words
// condition the scorer. Throws ConstraintsUnsatisfiableError when max_len
// leaves no room for every constraint token plus EOS. When no top-level
// hypothesis generates EOS within max_len, returns the best top-level
// hypothesis force-terminated with EOS and sets stats.used_fallback.
GbsResult decode_gbs(const Scorer& scorer, const ScoreContext& input,
                     const ConstraintSet& constraints, const GbsOptions& options);

}  // namespace qegbs

#endif  // QEGBS_GBS_HPP_
