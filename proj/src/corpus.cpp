#include "adaphrase/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "adaphrase/errors.hpp"
#include "adaphrase/random.hpp"

namespace adaphrase {

std::uint32_t Vocabulary::intern(std::string_view token) {
  auto [it, inserted] =
      ids_.try_emplace(std::string(token), static_cast<std::uint32_t>(tokens_.size()));
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t CooccurrenceCounts::verb_count(VerbId v) const {
  return index_of(v) < verb.size() ? verb[index_of(v)] : 0;
}

std::uint64_t CooccurrenceCounts::object_count(NounId o) const {
  return index_of(o) < object.size() ? object[index_of(o)] : 0;
}

std::uint64_t CooccurrenceCounts::pair_count(VerbId v, NounId o) const {
  const auto it = pair.find(pair_key(v, o));
  return it == pair.end() ? 0 : it->second;
}

std::optional<NounId> Lexicon::find_noun(std::string_view token) const {
  if (auto id = nouns.find(token)) return make_id<NounId>(*id);
  return std::nullopt;
}

std::optional<VerbId> Lexicon::find_verb(std::string_view token) const {
  if (auto id = verbs.find(token)) return make_id<VerbId>(*id);
  return std::nullopt;
}

std::optional<PrepId> Lexicon::find_prep(std::string_view token) const {
  if (auto id = preps.find(token)) return make_id<PrepId>(*id);
  return std::nullopt;
}

std::string Lexicon::phrase_text(VerbId v, NounId o) const { return verb(v) + " " + noun(o); }

namespace {

template <class T>
std::vector<T> select_part(const std::vector<T>& items, const std::vector<Split>& split,
                           Split part) {
  std::vector<T> out;
  if (split.size() != items.size()) {
    // Unsplit corpus: everything counts as training data.
    if (part == Split::Train) out = items;
    return out;
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (split[i] == part) out.push_back(items[i]);
  }
  return out;
}

// Splits on tabs; returns the number of fields (capped at 6 so over-long
// lines are still recognized as malformed).
std::size_t split_fields(std::string_view line, std::array<std::string_view, 6>& fields) {
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    const std::string_view field =
        line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start);
    if (count < fields.size()) fields[count] = field;
    ++count;
    if (tab == std::string_view::npos || count >= fields.size()) break;
    start = tab + 1;
  }
  return count;
}

}  // namespace

std::vector<SvoTuple> TupleCorpus::svo_in(Split part) const {
  return select_part(svo, svo_split, part);
}

std::vector<SvopnTuple> TupleCorpus::svopn_in(Split part) const {
  return select_part(svopn, svopn_split, part);
}

TupleCorpus parse_tuple_file(std::istream& in, Lexicon& lexicon) {
  TupleCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  std::array<std::string_view, 6> fields;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.find_first_not_of(" \t") == std::string_view::npos) continue;
    ++corpus.lines_read;

    const std::size_t n = split_fields(view, fields);
    const bool shape_ok = n == 3 || n == 5;
    const bool tokens_ok =
        shape_ok && std::all_of(fields.begin(), fields.begin() + static_cast<std::ptrdiff_t>(n),
                                [](std::string_view f) { return !f.empty(); });
    if (!tokens_ok) {
      corpus.malformed_lines.push_back(line_no);
      continue;
    }

    const SvoTuple head{make_id<NounId>(lexicon.nouns.intern(fields[0])),
                        make_id<VerbId>(lexicon.verbs.intern(fields[1])),
                        make_id<NounId>(lexicon.nouns.intern(fields[2]))};
    if (n == 3) {
      corpus.svo.push_back(head);
    } else {
      corpus.svopn.push_back({head, make_id<PrepId>(lexicon.preps.intern(fields[3])),
                              make_id<NounId>(lexicon.nouns.intern(fields[4]))});
    }
  }
  if (in.bad()) throw IoError("read error after line " + std::to_string(line_no));

  if (corpus.lines_read > 0) {
    const double fraction = static_cast<double>(corpus.malformed_lines.size()) /
                            static_cast<double>(corpus.lines_read);
    if (fraction > kMaxMalformedFraction) {
      std::ostringstream msg;
      msg << corpus.malformed_lines.size() << " of " << corpus.lines_read
          << " lines are malformed (first at line " << corpus.malformed_lines.front()
          << "); expected 3 or 5 non-empty tab-separated fields";
      throw FormatError(msg.str());
    }
  }
  return corpus;
}

TupleCorpus load_tuple_file(const std::filesystem::path& path, Lexicon& lexicon) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tuple file: " + path.string());
  try {
    return parse_tuple_file(in, lexicon);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void append_corpus(TupleCorpus& corpus, TupleCorpus&& more) {
  const std::size_t offset = corpus.lines_read;
  corpus.svo.insert(corpus.svo.end(), more.svo.begin(), more.svo.end());
  corpus.svopn.insert(corpus.svopn.end(), more.svopn.begin(), more.svopn.end());
  corpus.svo_split.clear();
  corpus.svopn_split.clear();
  corpus.lines_read += more.lines_read;
  for (std::size_t line : more.malformed_lines) corpus.malformed_lines.push_back(offset + line);
}

void write_tuple_file(std::ostream& out, const TupleCorpus& corpus, const Lexicon& lexicon) {
  for (const auto& t : corpus.svo) {
    out << lexicon.noun(t.subject) << '\t' << lexicon.verb(t.verb) << '\t'
        << lexicon.noun(t.object) << '\n';
  }
  for (const auto& t : corpus.svopn) {
    out << lexicon.noun(t.head.subject) << '\t' << lexicon.verb(t.head.verb) << '\t'
        << lexicon.noun(t.head.object) << '\t' << lexicon.prep(t.prep) << '\t'
        << lexicon.noun(t.noun) << '\n';
  }
}

namespace {

std::vector<Split> assign_split(std::size_t n, const SplitRatios& ratios, Rng& rng) {
  auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.train));
  auto n_dev = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.dev));
  n_train = std::min(n_train, n);
  n_dev = std::min(n_dev, n - n_train);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Split> split(n, Split::Test);
  for (std::size_t i = 0; i < n_train; ++i) split[order[i]] = Split::Train;
  for (std::size_t i = n_train; i < n_train + n_dev; ++i) split[order[i]] = Split::Dev;
  return split;
}

}  // namespace

TupleCorpus split_corpus(const TupleCorpus& corpus, const SplitRatios& ratios,
                         std::uint64_t seed) {
  if (ratios.train < 0.0 || ratios.dev < 0.0 || ratios.test < 0.0) {
    throw ConfigError("split ratios must be non-negative");
  }
  if (std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1");
  }
  TupleCorpus out = corpus;
  Rng rng(seed);
  out.svo_split = assign_split(corpus.svo.size(), ratios, rng);
  out.svopn_split = assign_split(corpus.svopn.size(), ratios, rng);
  return out;
}

CooccurrenceCounts count_training_pairs(const TupleCorpus& corpus, const Lexicon& lexicon) {
  CooccurrenceCounts counts;
  counts.verb.assign(lexicon.verbs.size(), 0);
  counts.object.assign(lexicon.nouns.size(), 0);
  auto add = [&](const SvoTuple& t) {
    ++counts.verb[index_of(t.verb)];
    ++counts.object[index_of(t.object)];
    ++counts.pair[pair_key(t.verb, t.object)];
    ++counts.total;
  };
  const bool split = corpus.is_split();
  for (std::size_t i = 0; i < corpus.svo.size(); ++i) {
    if (!split || corpus.svo_split[i] == Split::Train) add(corpus.svo[i]);
  }
  for (std::size_t i = 0; i < corpus.svopn.size(); ++i) {
    if (!split || corpus.svopn_split[i] == Split::Train) add(corpus.svopn[i].head);
  }
  return counts;
}

CandidateSet::CandidateSet(std::vector<std::pair<VerbId, NounId>> phrases,
                           std::uint64_t threshold, CandidateRule rule)
    : phrases_(std::move(phrases)), threshold_(threshold), rule_(rule) {
  index_.reserve(phrases_.size());
  for (std::size_t i = 0; i < phrases_.size(); ++i) {
    index_.emplace(pair_key(phrases_[i].first, phrases_[i].second), make_id<PhraseId>(i));
  }
}

std::optional<PhraseId> CandidateSet::find(VerbId v, NounId o) const {
  const auto it = index_.find(pair_key(v, o));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CandidateSet select_candidates(const CooccurrenceCounts& counts, std::uint64_t threshold,
                               CandidateRule rule) {
  std::vector<std::uint64_t> keys;
  for (const auto& [key, count] : counts.pair) {
    const bool keep = rule == CandidateRule::Strict ? count > threshold : count >= threshold;
    if (keep) keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<std::pair<VerbId, NounId>> phrases;
  phrases.reserve(keys.size());
  for (auto key : keys) phrases.emplace_back(key_verb(key), key_object(key));
  return CandidateSet(std::move(phrases), threshold, rule);
}

}  // namespace adaphrase
