#pragma once

// Seeded generator of topic-structured tuple corpora with known regular and
// idiomatic verb-object pairs, plus matching rating datasets.
//
// Every verb and object has a sparse positive weight vector over topics. A
// regular tuple draws its subject's topic with probability proportional to
// a_v[t] * b_o[t], so the pair's subject distribution is predicted by its
// components. An idiomatic pair draws subjects only from a topic that lies
// outside the support of both its verb and its object.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace adaphrase {

struct SyntheticConfig {
  std::size_t topics = 8;
  std::size_t subjects_per_topic = 12;
  std::size_t verbs = 30;
  std::size_t objects = 80;
  std::size_t verb_support = 2;
  std::size_t object_support = 3;

  std::size_t frequent_regular = 20;
  std::size_t idioms = 2;
  std::size_t frequent_count = 300;  // tuples per frequent regular pair
  std::size_t idiom_count = 300;
  // Every other eligible pair gets a count uniform in [1, background_max].
  std::size_t background_max = 60;
  // Share of tuples extended with a preposition and a noun.
  double svopn_fraction = 0.0;
  std::size_t preps = 4;

  std::uint64_t seed = 7;
};

struct SyntheticTuple {
  std::string subject;
  std::string verb;
  std::string object;
  std::string prep;  // empty for SVO
  std::string noun;
};

struct SyntheticCorpus {
  std::vector<SyntheticTuple> tuples;  // shuffled
  std::vector<std::pair<std::string, std::string>> regular;  // frequent regular pairs
  std::vector<std::pair<std::string, std::string>> idioms;
  // Topic weights, for building graded judgments.
  std::vector<std::vector<double>> verb_topics;
  std::vector<std::vector<double>> object_topics;
};

SyntheticCorpus generate_synthetic(const SyntheticConfig& config);

void write_synthetic_tuples(std::ostream& out, const SyntheticCorpus& corpus);

// verb<TAB>object<TAB>rating lines on a 1..6 scale, `raters` lines per pair:
// regular pairs rate high, idioms low, with seeded noise.
void write_synthetic_ratings(std::ostream& out, const SyntheticCorpus& corpus,
                             std::size_t raters, std::uint64_t seed);

// id<TAB>verb<TAB>subject<TAB>object<TAB>landmark<TAB>rating lines on a 1..7
// scale; the rating grows with the landmark's topic overlap with the target.
void write_synthetic_disambiguation(std::ostream& out, const SyntheticCorpus& corpus,
                                    const SyntheticConfig& config, std::size_t groups,
                                    std::size_t raters, std::uint64_t seed);

}  // namespace adaphrase
