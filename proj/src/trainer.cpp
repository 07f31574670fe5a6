#include "adaphrase/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "adaphrase/errors.hpp"
#include "adaphrase/kernels.hpp"

namespace adaphrase {

void TrainConfig::validate() const {
  if (dim == 0) throw ConfigError("d must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be > 0");
  }
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw ConfigError("l2 must be >= 0");
  if (fix_alpha && !(*fix_alpha >= 0.0 && *fix_alpha <= 1.0)) {
    throw ConfigError("fix_alpha must lie in [0, 1]");
  }
}

// ---------------------------------------------------------------------------
// Negative sampling

NegativeSampler::NegativeSampler(const Lexicon& lexicon, std::span<const SvoTuple> svo_pool)
    : nouns_(lexicon.nouns.size()),
      verbs_(lexicon.verbs.size()),
      preps_(lexicon.preps.size()),
      svo_pool_(svo_pool) {}

namespace {

std::size_t corrupt_index(Rng& rng, std::size_t size, std::size_t original, const char* slot) {
  if (size < 2) {
    throw SamplingError(std::string("cannot corrupt ") + slot + ": vocabulary has " +
                        std::to_string(size) + " entr" + (size == 1 ? "y" : "ies"));
  }
  return uniform_index_except(rng, size, original);
}

}  // namespace

SvoNegatives NegativeSampler::sample(const SvoTuple& t, Rng& rng) const {
  SvoNegatives out{{t, t, t}};
  out.corrupted[0].verb = make_id<VerbId>(corrupt_index(rng, verbs_, index_of(t.verb), "verb"));
  out.corrupted[1].subject =
      make_id<NounId>(corrupt_index(rng, nouns_, index_of(t.subject), "subject"));
  out.corrupted[2].object =
      make_id<NounId>(corrupt_index(rng, nouns_, index_of(t.object), "object"));
  return out;
}

SvopnNegatives NegativeSampler::sample(const SvopnTuple& t, Rng& rng) const {
  SvopnNegatives out{{t, t, t}};
  out.corrupted[0].prep =
      make_id<PrepId>(corrupt_index(rng, preps_, index_of(t.prep), "preposition"));

  // Rejection on value; the pool normally holds many distinct tuples.
  bool found = false;
  if (!svo_pool_.empty()) {
    for (int attempt = 0; attempt < 64 && !found; ++attempt) {
      const SvoTuple& candidate = svo_pool_[uniform_index(rng, svo_pool_.size())];
      if (!(candidate == t.head)) {
        out.corrupted[1].head = candidate;
        found = true;
      }
    }
    if (!found) {
      const auto it = std::find_if(svo_pool_.begin(), svo_pool_.end(),
                                   [&](const SvoTuple& s) { return !(s == t.head); });
      if (it != svo_pool_.end()) {
        out.corrupted[1].head = *it;
        found = true;
      }
    }
  }
  if (!found) throw SamplingError("cannot corrupt SVO head: no other training SVO tuple");

  out.corrupted[2].noun = make_id<NounId>(corrupt_index(rng, nouns_, index_of(t.noun), "noun"));
  return out;
}

// ---------------------------------------------------------------------------
// Gradient buffer and optimizer state

GradientBuffer::Block::Block(std::size_t rows, std::size_t w)
    : width(w), values(rows * w, 0.0), touched(rows, 0) {}

std::span<double> GradientBuffer::Block::row(std::size_t i) {
  if (!touched[i]) {
    touched[i] = 1;
    touched_rows.push_back(static_cast<std::uint32_t>(i));
  }
  return {values.data() + i * width, width};
}

void GradientBuffer::Block::clear() {
  for (auto r : touched_rows) {
    std::fill_n(values.begin() + static_cast<std::ptrdiff_t>(r * width), width, 0.0);
    touched[r] = 0;
  }
  touched_rows.clear();
}

GradientBuffer::GradientBuffer(const ModelParams& params)
    : nouns(params.nouns.rows(), params.nouns.width()),
      predicates(params.predicates.rows(), params.predicates.width()),
      phrases(params.phrases.rows(), params.phrases.width()),
      scorer_block(params.scorer.size(), 1) {}

void GradientBuffer::clear() {
  nouns.clear();
  predicates.clear();
  phrases.clear();
  scorer_block.clear();
}

bool GradientBuffer::empty() const {
  return nouns.touched_rows.empty() && predicates.touched_rows.empty() &&
         phrases.touched_rows.empty() && scorer_block.touched_rows.empty();
}

AdaGradState::AdaGradState(const ModelParams& params)
    : nouns(params.nouns.values().size(), 0.0),
      predicates(params.predicates.values().size(), 0.0),
      phrases(params.phrases.values().size(), 0.0),
      scorer(params.scorer.size(), 0.0) {}

namespace {

void step_block(std::span<double> params, std::vector<double>& acc,
                const GradientBuffer::Block& grad, double lr, double l2, double count) {
  const auto& k = kernels::active();
  for (auto r : grad.touched_rows) {
    const std::size_t offset = static_cast<std::size_t>(r) * grad.width;
    k.adagrad(params.data() + offset, acc.data() + offset, grad.values.data() + offset,
              grad.width, count, lr, l2);
  }
}

}  // namespace

void adagrad_step(ModelParams& params, const GradientBuffer& buffer, AdaGradState& state,
                  double learning_rate, double l2, std::size_t batch_count) {
  const double count = static_cast<double>(std::max<std::size_t>(batch_count, 1));
  step_block(params.nouns.values(), state.nouns, buffer.nouns, learning_rate, 0.0, count);
  step_block(params.predicates.values(), state.predicates, buffer.predicates, learning_rate, 0.0,
             count);
  step_block(params.phrases.values(), state.phrases, buffer.phrases, learning_rate, 0.0, count);
  step_block(params.scorer, state.scorer, buffer.scorer_block, learning_rate, l2, count);
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

// Scratch vectors for scoring and differentiating tuples against one model.
class TupleEngine {
 public:
  explicit TupleEngine(const PhraseModel& model)
      : model_(model), d_(model.dim()), vo_(d_), svo_(d_), proj_(d_), tmp_(d_), delta_(d_) {}

  double score(const SvoTuple& t) {
    forward_vo(t.verb, t.object, vo_);
    return kernels::dot(model_.params.noun(t.subject), vo_.v);
  }

  double score(const SvopnTuple& t) {
    forward_vo(t.head.verb, t.head.object, vo_);
    kernels::hadamard(model_.params.noun(t.head.subject), vo_.v, svo_);
    kernels::gemv(model_.params.prep_matrix(t.prep), model_.params.noun(t.noun), proj_);
    return kernels::dot(svo_, proj_);
  }

  // g = d(cost)/d(score) for this scored tuple.
  void backprop(const SvoTuple& t, double g, GradientBuffer& grad) {
    forward_vo(t.verb, t.object, vo_);
    const auto subject = model_.params.noun(t.subject);
    kernels::axpy(g, vo_.v, grad.noun(t.subject));
    std::fill(delta_.begin(), delta_.end(), 0.0);
    kernels::axpy(g, subject, delta_);
    backprop_vo(t.verb, t.object, delta_, grad);
  }

  void backprop(const SvopnTuple& t, double g, GradientBuffer& grad) {
    const ModelParams& p = model_.params;
    forward_vo(t.head.verb, t.head.object, vo_);
    const auto subject = p.noun(t.head.subject);
    const auto noun = p.noun(t.noun);
    const auto prep = p.prep_matrix(t.prep);
    kernels::hadamard(subject, vo_.v, svo_);
    kernels::gemv(prep, noun, proj_);

    kernels::ger(grad.predicate(p.verb_count + index_of(t.prep)), g, svo_, noun);
    kernels::gemv_t_acc(prep, svo_, g, grad.noun(t.noun));

    // dJ/dv(S) = g * proj .* v(VO)
    kernels::hadamard(proj_, vo_.v, tmp_);
    kernels::axpy(g, tmp_, grad.noun(t.head.subject));
    // dJ/dv(VO) = g * proj .* v(S)
    kernels::hadamard(proj_, subject, tmp_);
    std::fill(delta_.begin(), delta_.end(), 0.0);
    kernels::axpy(g, tmp_, delta_);
    backprop_vo(t.head.verb, t.head.object, delta_, grad);
  }

 private:
  struct VoState {
    explicit VoState(std::size_t d) : c(d), v(d) {}
    std::optional<PhraseId> phrase;
    double alpha = 1.0;
    std::vector<double> c;
    std::vector<double> v;
  };

  void forward_vo(VerbId verb, NounId object, VoState& st) {
    const ModelParams& p = model_.params;
    kernels::gemv(p.verb_matrix(verb), p.noun(object), st.c);
    st.phrase = model_.candidates.find(verb, object);
    if (st.phrase) {
      st.alpha = p.alpha_override ? *p.alpha_override
                                  : score_alpha(model_.features.candidate(*st.phrase), p.scorer);
      blend(st.alpha, st.c, p.phrase(*st.phrase), st.v);
    } else {
      st.alpha = 1.0;
      std::copy(st.c.begin(), st.c.end(), st.v.begin());
    }
  }

  // delta = dJ/dv(VO); vo_ holds the matching forward state.
  void backprop_vo(VerbId verb, NounId object, std::span<const double> delta,
                   GradientBuffer& grad) {
    const ModelParams& p = model_.params;
    const double alpha = vo_.alpha;
    if (vo_.phrase) {
      const auto n = p.phrase(*vo_.phrase);
      if (alpha != 1.0) kernels::axpy(1.0 - alpha, delta, grad.phrase(*vo_.phrase));
      if (!p.alpha_override) {
        // delta_alpha = alpha (1 - alpha) delta . (c - n);  dJ/dW = delta_alpha phi
        const double delta_alpha =
            alpha * (1.0 - alpha) * (kernels::dot(delta, vo_.c) - kernels::dot(delta, n));
        for (const auto& f : model_.features.candidate(*vo_.phrase)) {
          grad.scorer(f.index) += delta_alpha * f.value;
        }
      }
    }
    if (alpha != 0.0) {
      // dJ/dc = alpha delta, pushed through c = M(V) v(O)
      kernels::ger(grad.predicate(index_of(verb)), alpha, delta, p.noun(object));
      kernels::gemv_t_acc(p.verb_matrix(verb), delta, alpha, grad.noun(object));
    }
  }

  const PhraseModel& model_;
  std::size_t d_;
  VoState vo_;
  std::vector<double> svo_;
  std::vector<double> proj_;
  std::vector<double> tmp_;
  std::vector<double> delta_;
};

template <class Tuple>
double cost_of(TupleEngine& engine, const Tuple& observed, const NegativeSamples<Tuple>& negatives) {
  double cost = -log_sigmoid(engine.score(observed));
  for (const auto& neg : negatives.corrupted) cost -= log_sigmoid(-engine.score(neg));
  return cost;
}

template <class Tuple>
double backward_of(TupleEngine& engine, const Tuple& observed,
                   const NegativeSamples<Tuple>& negatives, GradientBuffer& buffer) {
  const double s_obs = engine.score(observed);
  double cost = -log_sigmoid(s_obs);
  // d/ds [-log sigmoid(s)] = -sigmoid(-s)
  engine.backprop(observed, -sigmoid(-s_obs), buffer);
  for (const auto& neg : negatives.corrupted) {
    const double s_neg = engine.score(neg);
    cost -= log_sigmoid(-s_neg);
    // d/ds [-log sigmoid(-s)] = sigmoid(s)
    engine.backprop(neg, sigmoid(s_neg), buffer);
  }
  return cost;
}

}  // namespace

double tuple_cost(const PhraseModel& model, const SvoTuple& observed,
                  const SvoNegatives& negatives) {
  TupleEngine engine(model);
  return cost_of(engine, observed, negatives);
}

double tuple_cost(const PhraseModel& model, const SvopnTuple& observed,
                  const SvopnNegatives& negatives) {
  TupleEngine engine(model);
  return cost_of(engine, observed, negatives);
}

double backward(const PhraseModel& model, const SvoTuple& observed,
                const SvoNegatives& negatives, GradientBuffer& buffer) {
  TupleEngine engine(model);
  return backward_of(engine, observed, negatives, buffer);
}

double backward(const PhraseModel& model, const SvopnTuple& observed,
                const SvopnNegatives& negatives, GradientBuffer& buffer) {
  TupleEngine engine(model);
  return backward_of(engine, observed, negatives, buffer);
}

// ---------------------------------------------------------------------------
// Dev scoring

DevSet make_dev_set(const TupleCorpus& corpus, const Lexicon& lexicon, std::uint64_t seed) {
  DevSet dev;
  dev.svo = corpus.svo_in(Split::Dev);
  dev.svopn = corpus.svopn_in(Split::Dev);
  const std::vector<SvoTuple> pool = corpus.svo_in(Split::Train);
  const NegativeSampler sampler(lexicon, pool);
  Rng rng(seed);
  dev.svo_negatives.reserve(dev.svo.size());
  for (const auto& t : dev.svo) dev.svo_negatives.push_back(sampler.sample(t, rng));
  dev.svopn_negatives.reserve(dev.svopn.size());
  for (const auto& t : dev.svopn) dev.svopn_negatives.push_back(sampler.sample(t, rng));
  return dev;
}

DevEvaluation evaluate_dev(const PhraseModel& model, const DevSet& dev) {
  if (dev.empty()) throw EvalError("dev split is empty");
  TupleEngine engine(model);
  std::size_t wins = 0;
  double cost = 0.0;
  auto run = [&](const auto& tuples, const auto& negatives) {
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      const double s_obs = engine.score(tuples[i]);
      cost -= log_sigmoid(s_obs);
      for (const auto& neg : negatives[i].corrupted) {
        const double s_neg = engine.score(neg);
        cost -= log_sigmoid(-s_neg);
        if (s_obs > s_neg) ++wins;
      }
    }
  };
  run(dev.svo, dev.svo_negatives);
  run(dev.svopn, dev.svopn_negatives);

  const std::size_t tuples = dev.svo.size() + dev.svopn.size();
  DevEvaluation out;
  out.comparisons = 3 * tuples;
  out.accuracy = static_cast<double>(wins) / static_cast<double>(out.comparisons);
  out.mean_cost = cost / static_cast<double>(tuples);
  return out;
}

double dev_score(const PhraseModel& model, const DevSet& dev) {
  return evaluate_dev(model, dev).accuracy;
}

double dev_score(const PhraseModel& model, const TupleCorpus& corpus, std::uint64_t seed) {
  return dev_score(model, make_dev_set(corpus, model.lexicon, seed));
}

double mean_alpha(const PhraseModel& model) {
  if (model.candidates.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (const auto& [v, o] : model.candidates.phrases()) sum += phrase_alpha(model, v, o);
  return sum / static_cast<double>(model.candidates.size());
}

// ---------------------------------------------------------------------------
// Training loop

PreparedCorpus prepare_corpus(Lexicon lexicon, TupleCorpus split, std::uint64_t threshold,
                              CandidateRule rule) {
  PreparedCorpus out;
  lexicon.counts = count_training_pairs(split, lexicon);
  out.candidates = select_candidates(lexicon.counts, threshold, rule);
  out.features = build_feature_table(lexicon, out.candidates);
  out.lexicon = std::move(lexicon);
  out.corpus = std::move(split);
  return out;
}

namespace {

enum Stream : std::uint64_t { kShuffleStream = 10, kNegativeStream = 11, kDevStream = 12 };

struct Example {
  bool svopn = false;
  std::uint32_t index = 0;
};

void check_finite(const ModelParams& params) {
  auto scan = [](std::span<const double> values, std::size_t width, const char* block) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        throw NumericError(std::string("non-finite value in ") + block + " block at row " +
                           std::to_string(i / width) + ", column " + std::to_string(i % width));
      }
    }
  };
  scan(params.nouns.values(), params.nouns.width(), "noun embedding");
  scan(params.predicates.values(), params.predicates.width(), "predicate matrix");
  scan(params.phrases.values(), params.phrases.width(), "phrase embedding");
  scan(params.scorer, 1, "scorer weight");
}

std::vector<double> trace_row(const PhraseModel& model,
                              std::span<const std::pair<VerbId, NounId>> tracked) {
  std::vector<double> row;
  row.reserve(tracked.size());
  for (const auto& [v, o] : tracked) row.push_back(phrase_alpha(model, v, o));
  return row;
}

}  // namespace

TrainResult train(const PreparedCorpus& data, const TrainConfig& config,
                  std::span<const std::pair<VerbId, NounId>> tracked) {
  config.validate();
  TrainResult result;
  PhraseModel& model = result.model;
  model.lexicon = data.lexicon;
  model.candidates = data.candidates;
  model.features = data.features;
  model.params = init_params(model.lexicon, model.candidates, model.features.layout(),
                             config.dim, config.seed);
  model.params.alpha_override = config.fix_alpha;

  result.trace.phrases.assign(tracked.begin(), tracked.end());
  result.trace.values.push_back(trace_row(model, tracked));
  if (config.max_epochs == 0) return result;

  const std::vector<SvoTuple> train_svo = data.corpus.svo_in(Split::Train);
  const std::vector<SvopnTuple> train_svopn = data.corpus.svopn_in(Split::Train);
  const NegativeSampler sampler(model.lexicon, train_svo);
  const DevSet dev = make_dev_set(data.corpus, model.lexicon, derive_seed(config.seed, kDevStream));

  std::vector<Example> examples;
  examples.reserve(train_svo.size() + train_svopn.size());
  for (std::size_t i = 0; i < train_svo.size(); ++i) {
    examples.push_back({false, static_cast<std::uint32_t>(i)});
  }
  for (std::size_t i = 0; i < train_svopn.size(); ++i) {
    examples.push_back({true, static_cast<std::uint32_t>(i)});
  }

  Rng shuffle_rng(derive_seed(config.seed, kShuffleStream));
  Rng negative_rng(derive_seed(config.seed, kNegativeStream));

  std::vector<SvoNegatives> fixed_svo;
  std::vector<SvopnNegatives> fixed_svopn;
  if (config.negatives == NegativePolicy::FixedPerRun) {
    for (const auto& t : train_svo) fixed_svo.push_back(sampler.sample(t, negative_rng));
    for (const auto& t : train_svopn) fixed_svopn.push_back(sampler.sample(t, negative_rng));
  }

  GradientBuffer grad(model.params);
  AdaGradState state(model.params);
  TupleEngine engine(model);

  ModelParams best = model.params;
  double best_score = -std::numeric_limits<double>::infinity();
  double previous_score = -std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(examples.begin(), examples.end(), shuffle_rng);
    double epoch_cost = 0.0;
    for (std::size_t start = 0; start < examples.size(); start += config.batch_size) {
      const std::size_t stop = std::min(examples.size(), start + config.batch_size);
      grad.clear();
      double batch_cost = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const Example& ex = examples[i];
        if (ex.svopn) {
          const SvopnTuple& t = train_svopn[ex.index];
          const SvopnNegatives neg = fixed_svopn.empty() ? sampler.sample(t, negative_rng)
                                                         : fixed_svopn[ex.index];
          batch_cost += backward_of(engine, t, neg, grad);
        } else {
          const SvoTuple& t = train_svo[ex.index];
          const SvoNegatives neg =
              fixed_svo.empty() ? sampler.sample(t, negative_rng) : fixed_svo[ex.index];
          batch_cost += backward_of(engine, t, neg, grad);
        }
      }
      if (!std::isfinite(batch_cost)) {
        throw NumericError("non-finite training cost in epoch " + std::to_string(epoch));
      }
      epoch_cost += batch_cost;
      adagrad_step(model.params, grad, state, config.learning_rate, config.l2, stop - start);
    }
    check_finite(model.params);

    EpochRecord record;
    record.epoch = epoch;
    record.train_cost =
        examples.empty() ? 0.0 : epoch_cost / static_cast<double>(examples.size());
    if (dev.empty()) {
      record.dev_score = record.dev_cost = std::numeric_limits<double>::quiet_NaN();
    } else {
      const DevEvaluation eval = evaluate_dev(model, dev);
      record.dev_score = eval.accuracy;
      record.dev_cost = eval.mean_cost;
    }
    record.mean_alpha = mean_alpha(model);
    result.log.epochs.push_back(record);
    result.trace.values.push_back(trace_row(model, tracked));

    if (dev.empty() || record.dev_score > best_score) {
      best_score = record.dev_score;
      best = model.params;
      result.log.best_epoch = epoch;
    }
    if (config.early_stopping && record.dev_score < previous_score) {
      result.log.stopped_early = true;
      break;
    }
    previous_score = record.dev_score;
  }

  model.params = std::move(best);
  return result;
}

std::size_t pick_best_cell(std::span<const GridCell> cells) {
  if (cells.empty()) throw ConfigError("hyperparameter grid is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const GridCell& a = cells[i];
    const GridCell& b = cells[best];
    const bool better =
        a.dev_score > b.dev_score ||
        (a.dev_score == b.dev_score &&
         (a.l2 < b.l2 || (a.l2 == b.l2 && a.learning_rate < b.learning_rate)));
    if (better) best = i;
  }
  return best;
}

GridResult grid_search(const PreparedCorpus& data, const TrainConfig& base,
                       std::span<const double> learning_rates, std::span<const double> l2s) {
  if (learning_rates.empty() || l2s.empty()) throw ConfigError("hyperparameter grid is empty");
  GridResult out;
  std::optional<std::size_t> kept;
  for (double lr : learning_rates) {
    for (double l2 : l2s) {
      TrainConfig config = base;
      config.learning_rate = lr;
      config.l2 = l2;
      TrainResult run = train(data, config);
      GridCell cell{lr, l2, -std::numeric_limits<double>::infinity(), run.log.best_epoch};
      if (run.log.best_epoch > 0) cell.dev_score = run.log.epochs[run.log.best_epoch - 1].dev_score;
      out.cells.push_back(cell);
      const std::size_t leader = pick_best_cell(out.cells);
      if (leader == out.cells.size() - 1) {
        out.best_result = std::move(run);
        kept = leader;
      }
    }
  }
  out.best = *kept;
  return out;
}

void write_training_log(std::ostream& out, const TrainingLog& log) {
  const auto old_precision = out.precision(10);
  for (const auto& r : log.epochs) {
    out << r.epoch << '\t' << r.train_cost << '\t' << r.dev_score << '\t' << r.mean_alpha << '\n';
  }
  out.precision(old_precision);
}

void write_alpha_trace(std::ostream& out, const AlphaTrace& trace, const Lexicon& lexicon) {
  const auto old_precision = out.precision(10);
  for (std::size_t epoch = 0; epoch < trace.values.size(); ++epoch) {
    for (std::size_t i = 0; i < trace.phrases.size(); ++i) {
      const auto [v, o] = trace.phrases[i];
      out << epoch << '\t' << lexicon.phrase_text(v, o) << '\t' << trace.values[epoch][i] << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace adaphrase
