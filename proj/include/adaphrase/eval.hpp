#pragma once

// Measurement: rank correlation against human ratings, ensembles, bootstrap
// confidence intervals, nearest neighbours and per-verb alpha summaries.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adaphrase/datasets.hpp"
#include "adaphrase/model.hpp"

namespace adaphrase {

// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

// Pearson correlation of average ranks. EvalError on length mismatch,
// fewer than two points, or a constant side.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct Coverage {
  std::size_t covered = 0;
  std::size_t total = 0;
};

struct Correlation {
  double rho = 0.0;
  std::vector<std::pair<double, double>> points;  // (gold, predicted)
  Coverage coverage;
};

// alpha for every dataset pair whose verb and object are both in the
// lexicon, keyed "verb object". Non-candidates use partial features.
ScoreTable compositionality_scores(const PhraseModel& model, const RatingDataset& dataset);

// Spearman between mean human ratings and `scores`; items without a score
// are skipped and counted as uncovered.
Correlation correlate_compositionality(const RatingDataset& dataset, const ScoreTable& scores);

struct CompositionalityResult {
  Correlation correlation;
  ScoreTable scores;
};

CompositionalityResult eval_compositionality(const PhraseModel& model, const RatingDataset& dataset);

enum class DisambigMode {
  Averaged,   // one point per (verb, subject, object, landmark) group
  PerRating,  // one point per judgment
};

double cosine(std::span<const double> a, std::span<const double> b);

// Cosine between v(S) .* v(V O) and v(S) .* v(L O) for every group whose
// four words resolve, keyed by DisambigGroup::key().
ScoreTable disambiguation_scores(const PhraseModel& model, const DisambigDataset& dataset);

Correlation correlate_disambiguation(const DisambigDataset& dataset, const ScoreTable& scores,
                                     DisambigMode mode);

struct DisambigResult {
  Correlation correlation;
  ScoreTable scores;
};

DisambigResult eval_disambiguation(const PhraseModel& model, const DisambigDataset& dataset,
                                   DisambigMode mode);

struct EnsembleResult {
  ScoreTable scores;                 // mean over tables, keys present in all
  std::vector<std::string> dropped;  // keys missing from at least one table
};

// EvalError on no tables or an empty intersection.
EnsembleResult ensemble_scores(std::span<const ScoreTable> tables);

struct BootstrapInterval {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t replicates = 0;  // used
  std::size_t skipped = 0;     // constant resample, Spearman undefined
};

// Percentile interval of Spearman over B pair resamples with replacement.
// ConfigError if B < 100 or level outside (0, 1); EvalError if every
// replicate was skipped.
BootstrapInterval bootstrap_ci(std::span<const std::pair<double, double>> pairs, std::size_t B,
                               double level, std::uint64_t seed);

struct PoolEntry {
  std::string key;
  std::vector<double> vec;
};

struct Neighbor {
  std::string key;
  double similarity = 0.0;
};

// Top-k pool entries by cosine to `query`, excluding entries whose key equals
// `query_key`; ties by key. k larger than the pool returns the whole pool.
std::vector<Neighbor> nearest_neighbors(std::span<const double> query, std::string_view query_key,
                                        std::span<const PoolEntry> pool, std::size_t k);

// v(VO) of every candidate phrase.
std::vector<PoolEntry> candidate_pool(const PhraseModel& model);

// LookupError naming the token when the verb or object is unknown.
std::vector<double> phrase_vector(const PhraseModel& model, std::string_view verb,
                                  std::string_view object);
std::vector<double> svo_vector(const PhraseModel& model, std::string_view subject,
                               std::string_view verb, std::string_view object);

struct VerbAlpha {
  std::string verb;
  double mean_alpha = 0.0;
  std::size_t object_types = 0;
};

// Mean alpha over each verb's candidate phrases, for verbs with more than
// `min_object_types` distinct candidate objects; highest first.
std::vector<VerbAlpha> per_verb_average_alpha(const PhraseModel& model,
                                              std::size_t min_object_types);

}  // namespace adaphrase
