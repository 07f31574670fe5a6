#pragma once

// Tuple corpus ingestion: interning, train/dev/test splitting, co-occurrence
// counting and candidate phrase selection.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "adaphrase/types.hpp"

namespace adaphrase {

// Bijective token <-> dense id map. Ids are assigned in first-seen order.
class Vocabulary {
 public:
  std::uint32_t intern(std::string_view token);
  std::optional<std::uint32_t> find(std::string_view token) const;
  const std::string& token(std::uint32_t id) const { return tokens_.at(id); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

// count(V), count(O), count(VO) and count(*) over verb-object occurrences of
// the training split. Both SVO and SVOPN tuples contribute their VO head.
struct CooccurrenceCounts {
  std::vector<std::uint64_t> verb;
  std::vector<std::uint64_t> object;  // indexed by NounId
  std::unordered_map<std::uint64_t, std::uint64_t> pair;
  std::uint64_t total = 0;

  std::uint64_t verb_count(VerbId v) const;
  std::uint64_t object_count(NounId o) const;
  std::uint64_t pair_count(VerbId v, NounId o) const;
};

struct Lexicon {
  Vocabulary nouns;
  Vocabulary verbs;
  Vocabulary preps;
  CooccurrenceCounts counts;

  std::optional<NounId> find_noun(std::string_view token) const;
  std::optional<VerbId> find_verb(std::string_view token) const;
  std::optional<PrepId> find_prep(std::string_view token) const;

  const std::string& noun(NounId id) const { return nouns.token(static_cast<std::uint32_t>(id)); }
  const std::string& verb(VerbId id) const { return verbs.token(static_cast<std::uint32_t>(id)); }
  const std::string& prep(PrepId id) const { return preps.token(static_cast<std::uint32_t>(id)); }

  // "verb object", the display key for a VO phrase.
  std::string phrase_text(VerbId v, NounId o) const;
};

struct TupleCorpus {
  std::vector<SvoTuple> svo;
  std::vector<SvopnTuple> svopn;
  // One entry per tuple; empty until split_corpus has run, at which point
  // sizes match svo/svopn.
  std::vector<Split> svo_split;
  std::vector<Split> svopn_split;

  std::size_t lines_read = 0;       // non-blank lines
  std::vector<std::size_t> malformed_lines;  // 1-based line numbers

  bool is_split() const noexcept {
    return svo_split.size() == svo.size() && svopn_split.size() == svopn.size();
  }
  std::size_t size() const noexcept { return svo.size() + svopn.size(); }

  std::vector<SvoTuple> svo_in(Split part) const;
  std::vector<SvopnTuple> svopn_in(Split part) const;
};

// Fraction of malformed lines above which parsing fails.
inline constexpr double kMaxMalformedFraction = 0.01;

// Reads `S\tV\tO` and `S\tV\tO\tP\tN` lines, interning tokens into `lexicon`.
// Blank lines are ignored. Lines with any other field count or an empty token
// are recorded in malformed_lines; FormatError if they exceed 1% of the
// non-blank lines. IoError if the stream goes bad mid-read.
TupleCorpus parse_tuple_file(std::istream& in, Lexicon& lexicon);
TupleCorpus load_tuple_file(const std::filesystem::path& path, Lexicon& lexicon);

// Appends `more` (parsed against the same lexicon) to `corpus`.
void append_corpus(TupleCorpus& corpus, TupleCorpus&& more);

void write_tuple_file(std::ostream& out, const TupleCorpus& corpus, const Lexicon& lexicon);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

// Seeded shuffle then cut: round(n*train) tuples to train, round(n*dev) to
// dev, remainder to test. SVO and SVOPN lists are split independently.
// ConfigError if a ratio is negative or the sum is off 1 by more than 1e-9.
TupleCorpus split_corpus(const TupleCorpus& corpus, const SplitRatios& ratios, std::uint64_t seed);

CooccurrenceCounts count_training_pairs(const TupleCorpus& corpus, const Lexicon& lexicon);

enum class CandidateRule {
  Strict,     // count(VO) > K
  Inclusive,  // count(VO) >= K
};

class CandidateSet {
 public:
  CandidateSet() = default;
  CandidateSet(std::vector<std::pair<VerbId, NounId>> phrases, std::uint64_t threshold,
               CandidateRule rule);

  std::optional<PhraseId> find(VerbId v, NounId o) const;
  std::pair<VerbId, NounId> phrase(PhraseId id) const { return phrases_.at(index_of(id)); }
  const std::vector<std::pair<VerbId, NounId>>& phrases() const noexcept { return phrases_; }
  std::size_t size() const noexcept { return phrases_.size(); }
  bool empty() const noexcept { return phrases_.empty(); }
  std::uint64_t threshold() const noexcept { return threshold_; }
  CandidateRule rule() const noexcept { return rule_; }

 private:
  std::vector<std::pair<VerbId, NounId>> phrases_;
  std::unordered_map<std::uint64_t, PhraseId> index_;
  std::uint64_t threshold_ = 0;
  CandidateRule rule_ = CandidateRule::Strict;
};

// Every VO pair whose training count exceeds K (or reaches it under the
// inclusive rule). Phrase ids follow (verb id, object id) order.
CandidateSet select_candidates(const CooccurrenceCounts& counts, std::uint64_t threshold,
                               CandidateRule rule = CandidateRule::Strict);

}  // namespace adaphrase
