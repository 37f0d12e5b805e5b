#include "qegbs/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qegbs/errors.hpp"

namespace qegbs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> to_logs(const std::vector<double>& probs) {
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    out[i] = probs[i] > 0.0 ? std::log(probs[i]) : kNegInf;
  return out;
}

void validate_row(const std::vector<double>& probs, std::size_t vocab_size,
                  const std::string& what) {
  if (probs.size() != vocab_size)
    throw MalformedTableError(what + ": row length does not match vocabulary");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw MalformedTableError(what + ": negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw MalformedTableError(what + ": probabilities sum to " + std::to_string(sum));
}

}  // namespace

double logsumexp(std::span<const double> values) {
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

TableScorer::TableScorer(const Vocabulary& vocab,
                         std::map<std::vector<TokenId>, Row> rows,
                         Row default_row)
    : Scorer(vocab) {
  validate_row(default_row, vocab.size(), "default row");
  default_row_ = to_logs(default_row);
  for (auto& [prefix, row] : rows) {
    validate_row(row, vocab.size(), "row");
    rows_.emplace(prefix, to_logs(row));
  }
}

std::vector<double> TableScorer::next_logprobs(const ScoreContext& ctx) const {
  auto it = rows_.find(ctx.prefix);
  return it == rows_.end() ? default_row_ : it->second;
}

TableScorer TableScorer::load(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open table scorer file: " + path);
  std::map<std::vector<TokenId>, Row> rows;
  Row default_row;
  bool have_default = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto bar = line.find('|');
    if (bar == std::string::npos) throw ParseError("table row lacks '|'", lineno);
    std::string prefix_text = line.substr(0, bar);
    Row row(vocab.size(), 0.0);
    std::istringstream entries(line.substr(bar + 1));
    std::string entry;
    while (std::getline(entries, entry, ',')) {
      auto colon = entry.rfind(':');
      if (colon == std::string::npos) throw ParseError("table entry lacks ':'", lineno);
      std::string token = entry.substr(0, colon);
      auto id = vocab.find(token);
      if (!id) throw MalformedTableError("unknown token '" + token + "' on line " +
                                         std::to_string(lineno));
      try {
        row[static_cast<std::size_t>(*id)] = std::stod(entry.substr(colon + 1));
      } catch (const std::exception&) {
        throw ParseError("bad probability in entry '" + entry + "'", lineno);
      }
    }
    if (prefix_text == "*") {
      if (have_default) throw MalformedTableError("duplicate default row");
      default_row = std::move(row);
      have_default = true;
      continue;
    }
    std::vector<TokenId> prefix;
    std::istringstream ptoks(prefix_text);
    std::string tok;
    while (ptoks >> tok) {
      auto id = vocab.find(tok);
      if (!id) throw MalformedTableError("unknown prefix token '" + tok + "' on line " +
                                         std::to_string(lineno));
      prefix.push_back(*id);
    }
    if (!rows.emplace(std::move(prefix), std::move(row)).second)
      throw MalformedTableError("duplicate prefix row on line " + std::to_string(lineno));
  }
  if (!have_default) throw MalformedTableError("table lacks a default ('*') row");
  return TableScorer(vocab, std::move(rows), std::move(default_row));
}

NgramScorer NgramScorer::train(const Vocabulary& vocab,
                               std::span<const std::vector<TokenId>> corpus,
                               int order, double add_k) {
  if (order < 1) throw std::invalid_argument("n-gram order must be >= 1");
  if (!(add_k > 0.0)) throw std::invalid_argument("add-k constant must be > 0");
  if (corpus.empty()) throw EmptyCorpusError("empty n-gram training corpus");
  NgramScorer scorer(vocab, order, add_k);
  for (const auto& seq : corpus) {
    if (seq.empty() || seq.back() != vocab.eos())
      throw DataError("training sequence does not end with eos");
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
      if (seq[i] == vocab.eos()) throw DataError("eos inside a training sequence");
    for (std::size_t i = 0; i < seq.size(); ++i) {
      auto history = scorer.history_for(std::span<const TokenId>(seq.data(), i));
      ++scorer.counts_[history][seq[i]];
      ++scorer.totals_[history];
    }
  }
  return scorer;
}

std::vector<TokenId> NgramScorer::history_for(std::span<const TokenId> prefix) const {
  std::vector<TokenId> history(static_cast<std::size_t>(order_ - 1));
  for (std::size_t i = 0; i < history.size(); ++i) {
    std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(prefix.size()) -
                         static_cast<std::ptrdiff_t>(history.size()) +
                         static_cast<std::ptrdiff_t>(i);
    history[i] = pos >= 0 ? prefix[static_cast<std::size_t>(pos)] : kBos;
  }
  return history;
}

std::vector<double> NgramScorer::next_logprobs(const ScoreContext& ctx) const {
  const std::size_t v = vocab().size();
  auto history = history_for(ctx.prefix);
  std::vector<double> out(v);
  auto total_it = totals_.find(history);
  double denom = add_k_ * static_cast<double>(v) +
                 (total_it == totals_.end() ? 0.0 : static_cast<double>(total_it->second));
  const std::map<TokenId, std::uint64_t>* row = nullptr;
  if (auto it = counts_.find(history); it != counts_.end()) row = &it->second;
  for (std::size_t t = 0; t < v; ++t) {
    double count = 0.0;
    if (row) {
      auto it = row->find(static_cast<TokenId>(t));
      if (it != row->end()) count = static_cast<double>(it->second);
    }
    out[t] = std::log((count + add_k_) / denom);
  }
  return out;
}

void NgramScorer::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write n-gram model file: " + path);
  out << "#order " << order_ << "\n";
  out << "#addk " << add_k_ << "\n";
  for (const auto& [history, row] : counts_) {
    std::string history_text;
    for (std::size_t i = 0; i < history.size(); ++i) {
      if (i) history_text += ' ';
      history_text += history[i] == kBos ? "<s>" : vocab().token(history[i]);
    }
    for (const auto& [token, count] : row)
      out << history_text << '\t' << vocab().token(token) << '\t' << count << "\n";
  }
}

NgramScorer NgramScorer::load(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open n-gram model file: " + path);
  std::string line;
  std::size_t lineno = 0;
  int order = 0;
  double add_k = 0.0;
  bool have_order = false, have_addk = false;
  std::vector<std::tuple<std::string, std::string, std::uint64_t>> raw;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("#order ", 0) == 0) {
      order = std::stoi(line.substr(7));
      have_order = true;
      continue;
    }
    if (line.rfind("#addk ", 0) == 0) {
      add_k = std::stod(line.substr(6));
      have_addk = true;
      continue;
    }
    auto tab1 = line.find('\t');
    if (tab1 == std::string::npos) throw ParseError("n-gram line lacks tabs", lineno);
    auto tab2 = line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) throw ParseError("n-gram line lacks a count field", lineno);
    raw.emplace_back(line.substr(0, tab1), line.substr(tab1 + 1, tab2 - tab1 - 1),
                     std::stoull(line.substr(tab2 + 1)));
  }
  if (!have_order || !have_addk)
    throw DataError("n-gram model file lacks #order/#addk headers: " + path);
  if (order < 1 || !(add_k > 0.0)) throw DataError("invalid n-gram headers in " + path);
  NgramScorer scorer(vocab, order, add_k);
  for (const auto& [history_text, token_text, count] : raw) {
    std::vector<TokenId> history;
    std::istringstream htoks(history_text);
    std::string tok;
    while (htoks >> tok) {
      if (tok == "<s>") {
        history.push_back(kBos);
        continue;
      }
      auto id = vocab.find(tok);
      if (!id) throw DataError("unknown history token '" + tok + "' in " + path);
      history.push_back(*id);
    }
    if (history.size() != static_cast<std::size_t>(order - 1))
      throw DataError("history length does not match order in " + path);
    auto token = vocab.find(token_text);
    if (!token) throw DataError("unknown token '" + token_text + "' in " + path);
    scorer.counts_[history][*token] += count;
    scorer.totals_[history] += count;
  }
  return scorer;
}

std::vector<TokenId> input_token_set(std::span<const std::string> source_words,
                                     std::span<const std::string> mt_words,
                                     const Vocabulary& vocab,
                                     const Lexicon& lexicon, bool include_eos) {
  std::vector<TokenId> set;
  auto add_words = [&](std::span<const std::string> words) {
    for (const auto& word : words) {
      try {
        for (TokenId id : segment(word, vocab, lexicon).pieces) set.push_back(id);
      } catch (const UnknownWordError&) {
        // Words outside the target lexicon contribute no tokens.
      }
    }
  };
  add_words(source_words);
  add_words(mt_words);
  if (include_eos) set.push_back(vocab.eos());
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  return set;
}

CopyBiasScorer::CopyBiasScorer(const Scorer& base, double lambda, const Lexicon& lexicon)
    : Scorer(base.vocab()), base_(&base), lambda_(lambda), lexicon_(&lexicon) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("copy-bias lambda must be in [0,1]");
}

std::vector<double> CopyBiasScorer::next_logprobs(const ScoreContext& ctx) const {
  std::vector<double> base_lp = base_->next_logprobs(ctx);
  if (lambda_ == 1.0) return base_lp;
  auto copy_set = input_token_set(ctx.source_words, ctx.mt_words, vocab(),
                                  *lexicon_, /*include_eos=*/true);
  const double copy_p = 1.0 / static_cast<double>(copy_set.size());
  std::vector<double> out(base_lp.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    bool in_copy = std::binary_search(copy_set.begin(), copy_set.end(),
                                      static_cast<TokenId>(t));
    double p = lambda_ * std::exp(base_lp[t]) + (1.0 - lambda_) * (in_copy ? copy_p : 0.0);
    out[t] = p > 0.0 ? std::log(p) : kNegInf;
  }
  return out;
}

SoftPenaltyScorer::SoftPenaltyScorer(const Scorer& base, double beta, const Lexicon& lexicon)
    : Scorer(base.vocab()), base_(&base), beta_(beta), lexicon_(&lexicon) {
  if (!(beta >= 0.0)) throw std::invalid_argument("soft penalty beta must be >= 0");
}

std::vector<double> SoftPenaltyScorer::next_logprobs(const ScoreContext& ctx) const {
  std::vector<double> lp = base_->next_logprobs(ctx);
  if (beta_ == 0.0) return lp;
  auto in_input = input_token_set(ctx.source_words, ctx.mt_words, vocab(),
                                  *lexicon_, /*include_eos=*/true);
  for (std::size_t t = 0; t < lp.size(); ++t)
    if (!std::binary_search(in_input.begin(), in_input.end(), static_cast<TokenId>(t)))
      lp[t] -= beta_;
  double lse = logsumexp(lp);
  for (double& v : lp) v -= lse;
  return lp;
}

}  // namespace qegbs
