#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "adaphrase/errors.hpp"
#include "adaphrase/synthetic.hpp"
#include "adaphrase/trainer.hpp"
#include "oracles.hpp"

using namespace adaphrase;

namespace {

PreparedCorpus prepare_split(const std::string& text, std::uint64_t threshold) {
  Lexicon lexicon;
  std::istringstream in(text);
  TupleCorpus corpus = parse_tuple_file(in, lexicon);
  return prepare_corpus(std::move(lexicon), split_corpus(corpus, {0.8, 0.1, 0.1}, 1), threshold);
}

std::string small_synthetic(std::uint64_t seed) {
  SyntheticConfig c;
  c.topics = 6;
  c.subjects_per_topic = 5;
  c.verbs = 8;
  c.objects = 12;
  c.frequent_regular = 4;
  c.idioms = 1;
  c.frequent_count = 60;
  c.idiom_count = 60;
  c.background_max = 6;
  c.svopn_fraction = 0.2;
  c.seed = seed;
  std::ostringstream out;
  write_synthetic_tuples(out, generate_synthetic(c));
  return out.str();
}

TrainConfig small_config() {
  TrainConfig c;
  c.dim = 6;
  c.batch_size = 20;
  c.max_epochs = 4;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("tuple cost matches the naive cost") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = oracle::random_instance(seed, 5);
    CHECK(tuple_cost(inst.model, inst.svo, inst.svo_neg) ==
          doctest::Approx(oracle::naive_cost(inst.model, inst.svo, inst.svo_neg)).epsilon(1e-12));
    CHECK(tuple_cost(inst.model, inst.svopn, inst.svopn_neg) ==
          doctest::Approx(oracle::naive_cost(inst.model, inst.svopn, inst.svopn_neg)).epsilon(1e-12));
    GradientBuffer buffer(inst.model.params);
    CHECK(backward(inst.model, inst.svo, inst.svo_neg, buffer) ==
          doctest::Approx(tuple_cost(inst.model, inst.svo, inst.svo_neg)).epsilon(1e-14));
  }
}

TEST_CASE("cost is 4 ln 2 when every score is zero") {
  auto inst = oracle::random_instance(3, 4);
  for (double& x : inst.model.params.nouns.values()) x = 0.0;
  CHECK(tuple_cost(inst.model, inst.svo, inst.svo_neg) == doctest::Approx(4.0 * std::log(2.0)));
  CHECK(tuple_cost(inst.model, inst.svopn, inst.svopn_neg) == doctest::Approx(4.0 * std::log(2.0)));
}

TEST_CASE("cost is positive and falls as the observed score rises") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = oracle::random_instance(seed, 4);
    CHECK(tuple_cost(inst.model, inst.svo, inst.svo_neg) > 0.0);
    CHECK(tuple_cost(inst.model, inst.svopn, inst.svopn_neg) > 0.0);
  }
}

TEST_CASE("analytic gradients match central differences") {
  for (std::uint64_t seed = 1; seed <= 24; ++seed) {
    CAPTURE(seed);
    const auto inst = oracle::random_instance(seed, 4);
    const auto report = oracle::check_gradients(inst);
    CAPTURE(report.worst_block);
    CHECK(report.worst < 1e-6);
    CHECK(report.nonzero > 0);
  }
}

TEST_CASE("gradient check reaches every parameter block") {
  bool seen[4] = {false, false, false, false};
  for (std::uint64_t seed = 1; seed <= 24; ++seed) {
    const auto report = oracle::check_gradients(oracle::random_instance(seed, 4));
    for (int b = 0; b < 4; ++b) seen[b] |= report.blocks_seen[b];
  }
  for (int b = 0; b < 4; ++b) CHECK(seen[b]);
}

TEST_CASE("adagrad first and second steps") {
  ModelParams p;
  p.dim = 2;
  p.nouns = ParamBlock(1, 2);
  p.predicates = ParamBlock(0, 4);
  p.phrases = ParamBlock(0, 2);
  p.scorer = {0.0, 0.0};
  GradientBuffer buffer(p);
  AdaGradState state(p);
  buffer.noun(make_id<NounId>(0))[0] = 3.0;
  buffer.noun(make_id<NounId>(0))[1] = -0.25;
  adagrad_step(p, buffer, state, 0.1, 0.0, 1);
  CHECK(p.nouns.values()[0] == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(p.nouns.values()[1] == doctest::Approx(0.1).epsilon(1e-15));
  adagrad_step(p, buffer, state, 0.1, 0.0, 1);
  CHECK(p.nouns.values()[0] == doctest::Approx(-0.1 - 0.1 / std::sqrt(2.0)).epsilon(1e-15));

  // Batch mean: a summed gradient of 6 over 2 tuples is the same as 3 over 1.
  ModelParams q = p;
  AdaGradState qs(q);
  AdaGradState ps(p);
  GradientBuffer b2(q);
  b2.noun(make_id<NounId>(0))[0] = 6.0;
  GradientBuffer b1(p);
  b1.noun(make_id<NounId>(0))[0] = 3.0;
  adagrad_step(q, b2, qs, 0.1, 0.0, 2);
  adagrad_step(p, b1, ps, 0.1, 0.0, 1);
  CHECK(q.nouns.values()[0] == p.nouns.values()[0]);
  // Zero gradients leave the accumulator alone.
  CHECK(qs.nouns[1] == 0.0);

  // L2 reaches only touched scorer weights.
  ModelParams w;
  w.dim = 1;
  w.scorer = {1.0, 1.0};
  GradientBuffer wb(w);
  AdaGradState ws(w);
  wb.scorer(0) = 0.0;
  adagrad_step(w, wb, ws, 0.5, 0.1, 1);
  CHECK(w.scorer[0] == doctest::Approx(0.5).epsilon(1e-15));  // g = 0.1 -> step lr * sign
  CHECK(w.scorer[1] == 1.0);
}

TEST_CASE("negative sampler never reproduces the original") {
  const auto inst = oracle::random_instance(9, 3);
  const auto& c = inst.data.corpus;
  NegativeSampler sampler(inst.data.lexicon, c.svo);
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    const auto& t = c.svo[static_cast<std::size_t>(i) % c.svo.size()];
    const auto n = sampler.sample(t, rng);
    CHECK(n.corrupted[0].verb != t.verb);
    CHECK(n.corrupted[0].subject == t.subject);
    CHECK(n.corrupted[0].object == t.object);
    CHECK(n.corrupted[1].subject != t.subject);
    CHECK(n.corrupted[1].verb == t.verb);
    CHECK(n.corrupted[2].object != t.object);
    CHECK(n.corrupted[2].subject == t.subject);
    const auto& u = c.svopn[static_cast<std::size_t>(i) % c.svopn.size()];
    const auto m = sampler.sample(u, rng);
    CHECK(m.corrupted[0].prep != u.prep);
    CHECK(m.corrupted[0].head == u.head);
    CHECK(m.corrupted[1].head != u.head);
    CHECK(m.corrupted[1].prep == u.prep);
    CHECK(m.corrupted[2].noun != u.noun);
  }
}

TEST_CASE("negative sampler: two verbs force the other one") {
  const auto data = oracle::prepare_text("a\tv\tb\nb\tw\ta\n", 0);
  NegativeSampler sampler(data.lexicon, data.corpus.svo);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    CHECK(sampler.sample(data.corpus.svo[0], rng).corrupted[0].verb == data.corpus.svo[1].verb);
  }
}

TEST_CASE("negative sampler is uniform over the alternatives") {
  std::ostringstream text;
  for (int i = 0; i < 10; ++i) text << "a\tv" << i << "\tb\n";
  const auto data = oracle::prepare_text(text.str(), 0);
  NegativeSampler sampler(data.lexicon, data.corpus.svo);
  Rng rng(12);
  std::vector<double> counts(10, 0.0);
  const int draws = 100000;
  const auto& t = data.corpus.svo[0];
  for (int i = 0; i < draws; ++i) counts[index_of(sampler.sample(t, rng).corrupted[0].verb)] += 1.0;
  CHECK(counts[index_of(t.verb)] == 0.0);
  const double expected = draws / 9.0;
  double chi2 = 0.0;
  for (std::size_t v = 0; v < 10; ++v) {
    if (v == index_of(t.verb)) continue;
    chi2 += (counts[v] - expected) * (counts[v] - expected) / expected;
  }
  // 8 degrees of freedom, p = 0.001 critical value.
  CHECK(chi2 < 26.12);
}

TEST_CASE("negative sampler fails on a single-word vocabulary") {
  const auto data = oracle::prepare_text("a\tv\tb\nb\tv\ta\n", 0);
  NegativeSampler sampler(data.lexicon, data.corpus.svo);
  Rng rng(1);
  CHECK_THROWS_AS(sampler.sample(data.corpus.svo[0], rng), SamplingError);
}

TEST_CASE("a gradient step lowers the cost of a tuple") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto inst = oracle::random_instance(seed, 4);
    const double before = oracle::instance_cost(inst, inst.model);
    GradientBuffer buffer(inst.model.params);
    backward(inst.model, inst.svo, inst.svo_neg, buffer);
    backward(inst.model, inst.svopn, inst.svopn_neg, buffer);
    AdaGradState state(inst.model.params);
    adagrad_step(inst.model.params, buffer, state, 1e-4, 0.0, 1);
    CHECK(oracle::instance_cost(inst, inst.model) < before);
  }
}

TEST_CASE("zero epochs returns the initialization") {
  const auto data = prepare_split(small_synthetic(1), 20);
  auto config = small_config();
  config.max_epochs = 0;
  const auto run = train(data, config);
  CHECK(run.log.epochs.empty());
  CHECK(run.log.best_epoch == 0);
  CHECK(run.model.params == init_params(data.lexicon, data.candidates, data.features.layout(),
                                        config.dim, config.seed));
}

TEST_CASE("training is deterministic") {
  const auto data = prepare_split(small_synthetic(2), 20);
  const auto a = train(data, small_config());
  const auto b = train(data, small_config());
  CHECK(a.model.params == b.model.params);
  std::ostringstream la, lb;
  write_training_log(la, a.log);
  write_training_log(lb, b.log);
  CHECK(la.str() == lb.str());
  auto other = small_config();
  other.seed = 4;
  CHECK_FALSE(train(data, other).model.params == a.model.params);
}

TEST_CASE("fixed alpha freezes the scorer and the phrase embeddings") {
  const auto data = prepare_split(small_synthetic(3), 20);
  REQUIRE_FALSE(data.candidates.empty());
  auto config = small_config();
  config.fix_alpha = 1.0;
  config.early_stopping = false;
  const auto run = train(data, config);
  const auto init = init_params(data.lexicon, data.candidates, data.features.layout(), config.dim,
                                config.seed);
  CHECK(run.model.params.scorer == init.scorer);
  CHECK(run.model.params.phrases == init.phrases);
  CHECK_FALSE(run.model.params.nouns == init.nouns);

  // Same run with no candidates at all: word parameters identical.
  const auto bare = prepare_split(small_synthetic(3), 1000000);
  REQUIRE(bare.candidates.empty());
  config.fix_alpha.reset();
  const auto plain = train(bare, config);
  CHECK(plain.model.params.nouns == run.model.params.nouns);
  CHECK(plain.model.params.predicates == run.model.params.predicates);
  REQUIRE(plain.log.epochs.size() == run.log.epochs.size());
  for (std::size_t i = 0; i < run.log.epochs.size(); ++i) {
    CHECK(plain.log.epochs[i].train_cost == run.log.epochs[i].train_cost);
    CHECK(plain.log.epochs[i].dev_score == run.log.epochs[i].dev_score);
  }
  CHECK(std::isnan(mean_alpha(plain.model)));
}

TEST_CASE("fixed alpha 0.5 still trains the phrase embeddings") {
  const auto data = prepare_split(small_synthetic(3), 20);
  auto config = small_config();
  config.fix_alpha = 0.5;
  const auto run = train(data, config);
  const auto init = init_params(data.lexicon, data.candidates, data.features.layout(), config.dim,
                                config.seed);
  CHECK(run.model.params.scorer == init.scorer);
  CHECK_FALSE(run.model.params.phrases == init.phrases);
  CHECK(mean_alpha(run.model) == 0.5);
}

TEST_CASE("dev score of a random model is near chance") {
  const auto data = prepare_split(small_synthetic(4), 20);
  const auto dev = make_dev_set(data.corpus, data.lexicon, 5);
  REQUIRE_FALSE(dev.empty());
  const auto model = oracle::model_from(data, 8, 5);
  const auto eval = evaluate_dev(model, dev);
  CHECK(eval.accuracy > 0.35);
  CHECK(eval.accuracy < 0.65);
  CHECK(eval.comparisons == 3 * (dev.svo.size() + dev.svopn.size()));
  CHECK(dev_score(model, dev) == eval.accuracy);

  DevSet empty;
  CHECK_THROWS_AS(evaluate_dev(model, empty), EvalError);
}

TEST_CASE("dev score is 1 when observed tuples outscore every corruption") {
  // d = 2: subject s = e1, object o = e2, M(v) maps e2 to e1, everything
  // else is zero. The observed score is 1 and every corruption scores 0.
  const auto data = oracle::prepare_text("s\tv\to\nt\tw\tp\n", 100);
  auto model = oracle::model_from(data, 2, 1);
  for (double& x : model.params.nouns.values()) x = 0.0;
  for (double& x : model.params.predicates.values()) x = 0.0;
  const auto s = *model.lexicon.find_noun("s");
  const auto o = *model.lexicon.find_noun("o");
  const auto v = *model.lexicon.find_verb("v");
  model.params.nouns.row(index_of(s))[0] = 1.0;
  model.params.nouns.row(index_of(o))[1] = 1.0;
  model.params.predicates.row(index_of(v))[1] = 1.0;

  const SvoTuple t{s, v, o};
  NegativeSampler sampler(data.lexicon, data.corpus.svo);
  DevSet dev;
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    dev.svo.push_back(t);
    dev.svo_negatives.push_back(sampler.sample(t, rng));
  }
  CHECK(dev_score(model, dev) == 1.0);
}

TEST_CASE("grid tie-break prefers smaller l2, then smaller rate") {
  std::vector<GridCell> cells = {{0.05, 1e-3, 0.9, 1}, {0.01, 1e-3, 0.9, 1}, {0.05, 0.0, 0.9, 1},
                                 {0.01, 0.0, 0.9, 1},  {0.03, 0.0, 0.8, 1}};
  CHECK(pick_best_cell(cells) == 3);
  cells[4].dev_score = 0.95;
  CHECK(pick_best_cell(cells) == 4);
  CHECK_THROWS_AS(pick_best_cell(std::span<const GridCell>{}), ConfigError);
}

TEST_CASE("grid search returns the winning run") {
  const auto data = prepare_split(small_synthetic(5), 20);
  auto config = small_config();
  config.max_epochs = 2;
  const std::vector<double> rates = {0.01, 0.05};
  const std::vector<double> l2s = {0.0, 1e-3};
  const auto grid = grid_search(data, config, rates, l2s);
  REQUIRE(grid.cells.size() == 4);
  CHECK(grid.best == pick_best_cell(grid.cells));
  auto winner = config;
  winner.learning_rate = grid.cells[grid.best].learning_rate;
  winner.l2 = grid.cells[grid.best].l2;
  CHECK(train(data, winner).model.params == grid.best_result.model.params);
}

TEST_CASE("dev score improves before early stopping ends training") {
  const auto data = prepare_split(small_synthetic(6), 20);
  auto config = small_config();
  config.max_epochs = 30;
  const auto run = train(data, config);
  REQUIRE(run.log.epochs.size() >= 2);
  // Early stopping ends at the first decrease.
  for (std::size_t i = 1; i + 1 < run.log.epochs.size(); ++i) {
    CHECK(run.log.epochs[i].dev_score >= run.log.epochs[i - 1].dev_score);
  }
  if (run.log.stopped_early) {
    const auto& e = run.log.epochs;
    CHECK(e.back().dev_score < e[e.size() - 2].dev_score);
  }
  // Best snapshot is kept.
  double best = 0.0;
  for (const auto& r : run.log.epochs) best = std::max(best, r.dev_score);
  CHECK(run.log.epochs[run.log.best_epoch - 1].dev_score == best);
  CHECK(run.log.epochs.back().dev_score > 0.6);
}

TEST_CASE("trace holds initial and per-epoch alphas") {
  const auto data = prepare_split(small_synthetic(7), 20);
  REQUIRE_FALSE(data.candidates.empty());
  auto config = small_config();
  const auto tracked = data.candidates.phrases();
  const auto run = train(data, config, tracked);
  REQUIRE(run.trace.values.size() == run.log.epochs.size() + 1);
  for (double a : run.trace.values[0]) CHECK(a == 0.5);
  std::ostringstream out;
  write_alpha_trace(out, run.trace, data.lexicon);
  CHECK_FALSE(out.str().empty());
}

TEST_CASE("config validation") {
  TrainConfig c;
  c.dim = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.fix_alpha = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.learning_rate = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
