#include "qegbs/gbs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qegbs/errors.hpp"

namespace qegbs {

std::string_view to_string(MatchMode mode) {
  return mode == MatchMode::Token ? "token" : "word";
}

MatchMode match_mode_from_string(std::string_view text) {
  if (text == "token") return MatchMode::Token;
  if (text == "word") return MatchMode::Word;
  throw SchemaError("invalid match mode: " + std::string(text));
}

bool hypothesis_better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.tokens != b.tokens) return a.tokens < b.tokens;
  if (a.active_constraint != b.active_constraint)
    return a.active_constraint < b.active_constraint;
  for (std::size_t i = 0; i < a.progress.size() && i < b.progress.size(); ++i) {
    if (a.progress[i].consumed != b.progress[i].consumed)
      return a.progress[i].consumed < b.progress[i].consumed;
    if (a.progress[i].run_start != b.progress[i].run_start)
      return a.progress[i].run_start < b.progress[i].run_start;
  }
  return false;
}

std::size_t GbsProblem::num_constraint_tokens() const {
  std::size_t n = 0;
  for (const auto& c : constraint_tokens) n += c.size();
  return n;
}

ScoreContext GbsProblem::context_for(const Hypothesis& hyp) const {
  return ScoreContext{source_words, mt_words, hyp.tokens};
}

std::vector<Hypothesis> step_generate(const GbsProblem& problem,
                                      const Hypothesis& hyp,
                                      std::span<const double> logprobs) {
  if (!hyp.open() || hyp.finished)
    throw std::invalid_argument("generate requires an open, unfinished hypothesis");
  const Vocabulary& vocab = problem.scorer->vocab();
  const std::size_t num_c = problem.num_constraint_tokens();
  std::vector<Hypothesis> out;
  out.reserve(vocab.size());
  for (std::size_t v = 0; v < vocab.size(); ++v) {
    TokenId token = static_cast<TokenId>(v);
    bool is_eos = token == vocab.eos();
    if (is_eos && hyp.covered_tokens != num_c) continue;  // unfinished constraints forbid EOS
    Hypothesis next = hyp;
    next.tokens.push_back(token);
    next.score += logprobs[v];
    next.finished = is_eos;
    out.push_back(std::move(next));
  }
  return out;
}

std::optional<Hypothesis> step_start(const GbsProblem& problem,
                                     const Hypothesis& hyp,
                                     std::size_t constraint_index,
                                     std::span<const double> logprobs) {
  if (!hyp.open() || hyp.finished)
    throw std::invalid_argument("start requires an open, unfinished hypothesis");
  if (hyp.progress[constraint_index].consumed != 0)
    throw std::invalid_argument("start requires an untouched constraint");
  if (problem.mode == MatchMode::Word && !hyp.tokens.empty() &&
      problem.scorer->vocab().is_continuation(hyp.tokens.back()))
    return std::nullopt;  // never open a constraint mid-word
  const auto& tokens = problem.constraint_tokens[constraint_index];
  Hypothesis next = hyp;
  next.progress[constraint_index].consumed = 1;
  next.progress[constraint_index].run_start = static_cast<std::int32_t>(hyp.tokens.size());
  next.covered_tokens += 1;
  next.score += logprobs[static_cast<std::size_t>(tokens.front())];
  next.tokens.push_back(tokens.front());
  next.active_constraint =
      tokens.size() == 1 ? -1 : static_cast<std::int32_t>(constraint_index);
  return next;
}

Hypothesis step_continue(const GbsProblem& problem, const Hypothesis& hyp,
                         std::span<const double> logprobs) {
  if (hyp.open() || hyp.finished)
    throw std::invalid_argument("continue requires a closed hypothesis");
  const std::size_t index = static_cast<std::size_t>(hyp.active_constraint);
  const auto& tokens = problem.constraint_tokens[index];
  Hypothesis next = hyp;
  TokenId token = tokens[next.progress[index].consumed];
  next.progress[index].consumed += 1;
  next.covered_tokens += 1;
  next.score += logprobs[static_cast<std::size_t>(token)];
  next.tokens.push_back(token);
  if (next.progress[index].consumed == tokens.size()) next.active_constraint = -1;
  return next;
}

void prune(std::vector<Hypothesis>& cell, std::size_t k) {
  std::sort(cell.begin(), cell.end(), hypothesis_better);
  if (cell.size() > k) cell.resize(k);
}

std::pair<std::size_t, std::size_t> grid_row_range(std::size_t t, std::size_t max_len,
                                                   std::size_t num_constraint_tokens) {
  std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(num_constraint_tokens) +
                      static_cast<std::ptrdiff_t>(t) -
                      static_cast<std::ptrdiff_t>(max_len);
  return {static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, lo)),
          std::min(t, num_constraint_tokens)};
}

namespace {

void check_cell_discipline(const std::vector<Hypothesis>& cell, std::size_t t,
                           std::size_t c) {
  for (const auto& hyp : cell) {
    if (hyp.tokens.size() != t || hyp.covered_tokens != c)
      throw Error("grid discipline violated at cell (" + std::to_string(t) + "," +
                  std::to_string(c) + ")");
  }
}

// Final ranking; optionally by length-normalized score.
bool final_better(const Hypothesis& a, const Hypothesis& b, bool length_normalize) {
  if (length_normalize) {
    double na = a.score / static_cast<double>(a.tokens.size());
    double nb = b.score / static_cast<double>(b.tokens.size());
    if (na != nb) return na > nb;
  }
  return hypothesis_better(a, b);
}

}  // namespace

GbsResult decode_gbs(const Scorer& scorer, const ScoreContext& input,
                     const ConstraintSet& constraints, const GbsOptions& options) {
  if (!input.prefix.empty())
    throw std::invalid_argument("decode_gbs expects an empty output prefix");
  if (options.beam_width < 1)
    throw std::invalid_argument("beam width must be >= 1");

  GbsProblem problem;
  problem.scorer = &scorer;
  problem.source_words = input.source_words;
  problem.mt_words = input.mt_words;
  problem.constraint_tokens = constraints.flattened();
  problem.mode = options.mode;

  const Vocabulary& vocab = scorer.vocab();
  for (const auto& tokens : problem.constraint_tokens) {
    if (tokens.empty()) throw DataError("empty constraint");
    for (TokenId id : tokens)
      if (id == vocab.eos()) throw DataError("constraint contains eos");
  }

  const std::size_t num_c = problem.num_constraint_tokens();
  if (constraints.total_tokens != num_c)
    throw DataError("constraint set total_tokens is inconsistent");
  const std::size_t max_len = options.max_len;
  if (max_len < num_c + 1)
    throw ConstraintsUnsatisfiableError(
        "max_len " + std::to_string(max_len) + " cannot fit " + std::to_string(num_c) +
        " constraint tokens plus eos");

  GbsResult result;
  DecodeStats& stats = result.stats;
  stats.row_occupancy.assign(num_c + 1, 0);

  Hypothesis start;
  start.progress.resize(problem.constraint_tokens.size());

  std::vector<std::vector<Hypothesis>> prev(num_c + 1);
  prev[0].push_back(start);
  stats.row_occupancy[0] += 1;

  std::vector<Hypothesis> finished;
  std::optional<Hypothesis> fallback;  // best unfinished top-level hypothesis
  if (num_c == 0) fallback = start;

  for (std::size_t t = 1; t <= max_len; ++t) {
    auto [lo, hi] = grid_row_range(t, max_len, num_c);

    // One scorer call per live hypothesis per timestep, shared between the
    // generate expansion of row c and the start/continue expansion of row c+1.
    std::vector<std::vector<std::vector<double>>> logprobs(num_c + 1);
    std::size_t feed_lo = lo > 0 ? lo - 1 : 0;
    for (std::size_t c = feed_lo; c <= hi; ++c) {
      logprobs[c].resize(prev[c].size());
      for (std::size_t i = 0; i < prev[c].size(); ++i)
        if (!prev[c][i].finished)
          logprobs[c][i] = scorer.next_logprobs(problem.context_for(prev[c][i]));
    }

    std::vector<std::vector<Hypothesis>> cur(num_c + 1);
    for (std::size_t c = lo; c <= hi; ++c) {
      std::vector<Hypothesis> candidates;
      for (std::size_t i = 0; i < prev[c].size(); ++i) {
        const Hypothesis& hyp = prev[c][i];
        if (hyp.finished || !hyp.open()) continue;
        for (auto& next : step_generate(problem, hyp, logprobs[c][i]))
          candidates.push_back(std::move(next));
      }
      if (c > 0) {
        for (std::size_t i = 0; i < prev[c - 1].size(); ++i) {
          const Hypothesis& hyp = prev[c - 1][i];
          if (hyp.finished) continue;
          if (hyp.open()) {
            for (std::size_t ci = 0; ci < problem.constraint_tokens.size(); ++ci) {
              if (hyp.progress[ci].consumed != 0) continue;
              if (auto next = step_start(problem, hyp, ci, logprobs[c - 1][i]))
                candidates.push_back(std::move(*next));
            }
          } else {
            candidates.push_back(step_continue(problem, hyp, logprobs[c - 1][i]));
          }
        }
      }
      stats.expanded += candidates.size();
      prune(candidates, options.beam_width);
      check_cell_discipline(candidates, t, c);
      stats.row_occupancy[c] += candidates.size();
      if (c == num_c) {
        for (const auto& hyp : candidates) {
          if (hyp.finished) {
            finished.push_back(hyp);
          } else if (!fallback || hypothesis_better(hyp, *fallback)) {
            fallback = hyp;
          }
        }
      }
      cur[c] = std::move(candidates);
    }
    prev = std::move(cur);
  }

  if (!finished.empty()) {
    const Hypothesis* best = &finished.front();
    for (const auto& hyp : finished)
      if (final_better(hyp, *best, options.length_normalize)) best = &hyp;
    result.best = *best;
    return result;
  }

  // No top-level hypothesis produced EOS within max_len: force-terminate the
  // best one so the pipeline still gets a constraint-complete output.
  if (!fallback) throw DecodeError("grid produced no top-level hypothesis");
  Hypothesis forced = *fallback;
  auto lp = scorer.next_logprobs(problem.context_for(forced));
  forced.score += lp[static_cast<std::size_t>(vocab.eos())];
  forced.tokens.push_back(vocab.eos());
  forced.finished = true;
  forced.forced_eos = true;
  stats.used_fallback = true;
  result.best = std::move(forced);
  return result;
}

}  // namespace qegbs
