#pragma once

// Negative-sampling training of the phrase model with mini-batch AdaGrad.
//
// Each observed tuple (p, a1, a2) is paired with three corruptions
// (p', a1, a2), (p, a1', a2), (p, a1, a2') and contributes
//   -log sigmoid(s(obs)) - sum_neg log sigmoid(-s(neg)).

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "adaphrase/corpus.hpp"
#include "adaphrase/features.hpp"
#include "adaphrase/model.hpp"
#include "adaphrase/random.hpp"

namespace adaphrase {

enum class NegativePolicy {
  ResamplePerEpoch,
  FixedPerRun,
};

struct TrainConfig {
  std::size_t dim = 25;
  std::size_t batch_size = 100;
  double learning_rate = 0.05;
  double l2 = 1e-6;  // applied to W only
  std::size_t max_epochs = 20;
  std::uint64_t seed = 1;
  NegativePolicy negatives = NegativePolicy::ResamplePerEpoch;
  // Fixes alpha for every candidate and freezes W (baselines: 1.0 and 0.5).
  std::optional<double> fix_alpha;
  bool early_stopping = true;

  // ConfigError on out-of-range values.
  void validate() const;
};

template <class Tuple>
struct NegativeSamples {
  // predicate slot, first-argument slot, second-argument slot
  std::array<Tuple, 3> corrupted;
};

using SvoNegatives = NegativeSamples<SvoTuple>;
using SvopnNegatives = NegativeSamples<SvopnTuple>;

// Uniform corruption of one slot at a time, never reproducing the original
// entry. SVO: verb over verbs, subject and object over nouns. SVOPN:
// preposition over prepositions, the SVO head over the pool of training SVO
// tuples, the noun over nouns.
class NegativeSampler {
 public:
  NegativeSampler(const Lexicon& lexicon, std::span<const SvoTuple> svo_pool);

  // SamplingError when a slot's vocabulary (or the SVO pool) has no
  // alternative to offer.
  SvoNegatives sample(const SvoTuple& tuple, Rng& rng) const;
  SvopnNegatives sample(const SvopnTuple& tuple, Rng& rng) const;

 private:
  std::size_t nouns_;
  std::size_t verbs_;
  std::size_t preps_;
  std::span<const SvoTuple> svo_pool_;
};

// Summed gradients for one mini-batch. Rows are dense but only touched rows
// are visited by the optimizer and zeroed by clear().
class GradientBuffer {
 public:
  struct Block {
    std::size_t width = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> touched;
    std::vector<std::uint32_t> touched_rows;

    Block() = default;
    Block(std::size_t rows, std::size_t width);
    std::span<double> row(std::size_t i);
    std::span<const double> peek(std::size_t i) const {
      return {values.data() + i * width, width};
    }
    void clear();
  };

  explicit GradientBuffer(const ModelParams& params);

  std::span<double> noun(NounId id) { return nouns.row(index_of(id)); }
  std::span<double> predicate(std::size_t index) { return predicates.row(index); }
  std::span<double> phrase(PhraseId id) { return phrases.row(index_of(id)); }
  double& scorer(std::size_t index) { return scorer_block.row(index)[0]; }

  void clear();
  bool empty() const;

  Block nouns;
  Block predicates;
  Block phrases;
  Block scorer_block;
};

// Per-scalar sums of squared gradients, shaped like ModelParams.
struct AdaGradState {
  explicit AdaGradState(const ModelParams& params);

  std::vector<double> nouns;
  std::vector<double> predicates;
  std::vector<double> phrases;
  std::vector<double> scorer;
};

double tuple_cost(const PhraseModel& model, const SvoTuple& observed,
                  const SvoNegatives& negatives);
double tuple_cost(const PhraseModel& model, const SvopnTuple& observed,
                  const SvopnNegatives& negatives);

// Accumulates d(cost)/d(params) for one observed tuple and its negatives into
// `buffer`; returns the tuple's cost.
double backward(const PhraseModel& model, const SvoTuple& observed,
                const SvoNegatives& negatives, GradientBuffer& buffer);
double backward(const PhraseModel& model, const SvopnTuple& observed,
                const SvopnNegatives& negatives, GradientBuffer& buffer);

// g = grad / batch_count (+ l2 * W for the scorer); for each touched scalar
// with g != 0: acc += g^2, param -= lr * g / sqrt(acc).
void adagrad_step(ModelParams& params, const GradientBuffer& buffer, AdaGradState& state,
                  double learning_rate, double l2, std::size_t batch_count);

// Dev tuples with negatives drawn once from a fixed seed.
struct DevSet {
  std::vector<SvoTuple> svo;
  std::vector<SvoNegatives> svo_negatives;
  std::vector<SvopnTuple> svopn;
  std::vector<SvopnNegatives> svopn_negatives;

  bool empty() const noexcept { return svo.empty() && svopn.empty(); }
};

DevSet make_dev_set(const TupleCorpus& corpus, const Lexicon& lexicon, std::uint64_t seed);

struct DevEvaluation {
  double accuracy = 0.0;  // fraction of (tuple, corruption) pairs with s(obs) > s(neg)
  double mean_cost = 0.0;
  std::size_t comparisons = 0;
};

// EvalError on an empty dev set.
DevEvaluation evaluate_dev(const PhraseModel& model, const DevSet& dev);
double dev_score(const PhraseModel& model, const DevSet& dev);
double dev_score(const PhraseModel& model, const TupleCorpus& corpus, std::uint64_t seed);

// Mean alpha over the candidate set; NaN when there are no candidates.
double mean_alpha(const PhraseModel& model);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_cost = 0.0;  // mean per observed tuple
  double dev_score = 0.0;
  double dev_cost = 0.0;
  double mean_alpha = 0.0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0: initial parameters
  bool stopped_early = false;
};

// alpha of selected phrases after every epoch; row 0 holds initial values.
struct AlphaTrace {
  std::vector<std::pair<VerbId, NounId>> phrases;
  std::vector<std::vector<double>> values;
};

// A split corpus with its training counts, candidates and features.
struct PreparedCorpus {
  Lexicon lexicon;
  TupleCorpus corpus;
  CandidateSet candidates;
  PhraseFeatureTable features;
};

PreparedCorpus prepare_corpus(Lexicon lexicon, TupleCorpus split, std::uint64_t threshold,
                              CandidateRule rule = CandidateRule::Strict);

struct TrainResult {
  PhraseModel model;
  TrainingLog log;
  AlphaTrace trace;
};

// Shuffled mini-batches over interleaved SVO and SVOPN training tuples;
// after each epoch the dev score is computed and training stops at its first
// decrease. The returned model holds the best epoch's parameters.
TrainResult train(const PreparedCorpus& data, const TrainConfig& config,
                  std::span<const std::pair<VerbId, NounId>> tracked = {});

struct GridCell {
  double learning_rate = 0.0;
  double l2 = 0.0;
  double dev_score = 0.0;
  std::size_t best_epoch = 0;
};

struct GridResult {
  std::vector<GridCell> cells;
  std::size_t best = 0;
  TrainResult best_result;
};

// Highest dev score wins; ties go to the smaller l2, then the smaller rate.
std::size_t pick_best_cell(std::span<const GridCell> cells);

GridResult grid_search(const PreparedCorpus& data, const TrainConfig& base,
                       std::span<const double> learning_rates, std::span<const double> l2s);

void write_training_log(std::ostream& out, const TrainingLog& log);
void write_alpha_trace(std::ostream& out, const AlphaTrace& trace, const Lexicon& lexicon);

}  // namespace adaphrase
