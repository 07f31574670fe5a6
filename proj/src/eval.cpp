#include "adaphrase/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "adaphrase/errors.hpp"
#include "adaphrase/kernels.hpp"
#include "adaphrase/random.hpp"

namespace adaphrase {

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && xs[order[j]] == xs[order[i]]) ++j;
    // positions i..j-1 (0-based) share rank mean((i+1)..j)
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

namespace {

double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw EvalError("correlation undefined: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

bool is_constant(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); });
}

}  // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw EvalError("spearman: length mismatch");
  if (xs.size() < 2) throw EvalError("spearman: need at least two points");
  if (is_constant(xs) || is_constant(ys)) throw EvalError("spearman: constant input");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

namespace {

double correlate_points(const std::vector<std::pair<double, double>>& points) {
  std::vector<double> gold(points.size());
  std::vector<double> pred(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    gold[i] = points[i].first;
    pred[i] = points[i].second;
  }
  return spearman(gold, pred);
}

}  // namespace

ScoreTable compositionality_scores(const PhraseModel& model, const RatingDataset& dataset) {
  ScoreTable scores;
  for (const auto& item : dataset.items) {
    const auto v = model.lexicon.find_verb(item.verb);
    const auto o = model.lexicon.find_noun(item.object);
    if (!v || !o) continue;
    scores[item.key()] = phrase_alpha(model, *v, *o);
  }
  return scores;
}

Correlation correlate_compositionality(const RatingDataset& dataset, const ScoreTable& scores) {
  if (dataset.items.empty()) throw EvalError("compositionality dataset is empty");
  Correlation out;
  out.coverage.total = dataset.items.size();
  for (const auto& item : dataset.items) {
    const auto it = scores.find(item.key());
    if (it == scores.end()) continue;
    out.points.emplace_back(item.mean_rating(), it->second);
  }
  out.coverage.covered = out.points.size();
  out.rho = correlate_points(out.points);
  return out;
}

CompositionalityResult eval_compositionality(const PhraseModel& model,
                                             const RatingDataset& dataset) {
  CompositionalityResult out;
  out.scores = compositionality_scores(model, dataset);
  out.correlation = correlate_compositionality(dataset, out.scores);
  return out;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = kernels::dot(a, a);
  const double nb = kernels::dot(b, b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return kernels::dot(a, b) / std::sqrt(na * nb);
}

ScoreTable disambiguation_scores(const PhraseModel& model, const DisambigDataset& dataset) {
  ScoreTable scores;
  const Lexicon& lex = model.lexicon;
  for (const auto& group : dataset.groups()) {
    const auto v = lex.find_verb(group.verb);
    const auto l = lex.find_verb(group.landmark);
    const auto s = lex.find_noun(group.subject);
    const auto o = lex.find_noun(group.object);
    if (!v || !l || !s || !o) continue;
    const auto subject = model.params.noun(*s);
    const auto target = svo_embedding(subject, vo_embedding(model, *v, *o).v);
    const auto landmark = svo_embedding(subject, vo_embedding(model, *l, *o).v);
    scores[group.key()] = cosine(target, landmark);
  }
  return scores;
}

Correlation correlate_disambiguation(const DisambigDataset& dataset, const ScoreTable& scores,
                                     DisambigMode mode) {
  const auto groups = dataset.groups();
  if (groups.empty()) throw EvalError("disambiguation dataset is empty");
  Correlation out;
  out.coverage.total = groups.size();
  for (const auto& group : groups) {
    const auto it = scores.find(group.key());
    if (it == scores.end()) continue;
    ++out.coverage.covered;
    if (mode == DisambigMode::Averaged) {
      out.points.emplace_back(group.mean_rating(), it->second);
    } else {
      for (double r : group.ratings) out.points.emplace_back(r, it->second);
    }
  }
  out.rho = correlate_points(out.points);
  return out;
}

DisambigResult eval_disambiguation(const PhraseModel& model, const DisambigDataset& dataset,
                                   DisambigMode mode) {
  DisambigResult out;
  out.scores = disambiguation_scores(model, dataset);
  out.correlation = correlate_disambiguation(dataset, out.scores, mode);
  return out;
}

EnsembleResult ensemble_scores(std::span<const ScoreTable> tables) {
  if (tables.empty()) throw EvalError("ensemble needs at least one score table");
  std::set<std::string> all_keys;
  for (const auto& table : tables) {
    for (const auto& entry : table) all_keys.insert(entry.first);
  }
  EnsembleResult out;
  for (const auto& key : all_keys) {
    double sum = 0.0;
    bool everywhere = true;
    bool all_equal = true;
    const double first = tables.front().count(key) ? tables.front().at(key) : 0.0;
    for (const auto& table : tables) {
      const auto it = table.find(key);
      if (it == table.end()) {
        everywhere = false;
        break;
      }
      sum += it->second;
      all_equal &= it->second == first;
    }
    if (everywhere) {
      // Agreeing tables give back their value exactly; n * x / n may not.
      out.scores[key] = all_equal ? first : sum / static_cast<double>(tables.size());
    } else {
      out.dropped.push_back(key);
    }
  }
  if (out.scores.empty()) throw EvalError("ensemble: score tables share no keys");
  return out;
}

BootstrapInterval bootstrap_ci(std::span<const std::pair<double, double>> pairs, std::size_t B,
                               double level, std::uint64_t seed) {
  if (B < 100) throw ConfigError("bootstrap needs at least 100 replicates");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  if (pairs.size() < 2) throw EvalError("bootstrap needs at least two pairs");

  Rng rng(seed);
  const std::size_t n = pairs.size();
  std::vector<double> gold(n);
  std::vector<double> pred(n);
  std::vector<double> rhos;
  rhos.reserve(B);
  BootstrapInterval out;
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = pairs[uniform_index(rng, n)];
      gold[i] = p.first;
      pred[i] = p.second;
    }
    if (is_constant(gold) || is_constant(pred)) {
      ++out.skipped;
      continue;
    }
    rhos.push_back(spearman(gold, pred));
  }
  if (rhos.empty()) throw EvalError("bootstrap: every replicate was degenerate");
  out.replicates = rhos.size();
  std::sort(rhos.begin(), rhos.end());

  // Linear interpolation between order statistics.
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(rhos.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, rhos.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return rhos[lo] + frac * (rhos[hi] - rhos[lo]);
  };
  const double tail = (1.0 - level) / 2.0;
  out.lo = quantile(tail);
  out.hi = quantile(1.0 - tail);
  return out;
}

std::vector<Neighbor> nearest_neighbors(std::span<const double> query, std::string_view query_key,
                                        std::span<const PoolEntry> pool, std::size_t k) {
  std::vector<Neighbor> scored;
  scored.reserve(pool.size());
  for (const auto& entry : pool) {
    if (entry.key == query_key) continue;
    scored.push_back({entry.key, cosine(query, entry.vec)});
  }
  auto better = [](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.key < b.key;
  };
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), better);
  scored.resize(keep);
  return scored;
}

std::vector<PoolEntry> candidate_pool(const PhraseModel& model) {
  std::vector<PoolEntry> pool;
  pool.reserve(model.candidates.size());
  for (const auto& [v, o] : model.candidates.phrases()) {
    pool.push_back({model.lexicon.phrase_text(v, o), vo_embedding(model, v, o).v});
  }
  return pool;
}

namespace {

VerbId require_verb(const PhraseModel& model, std::string_view token) {
  if (auto id = model.lexicon.find_verb(token)) return *id;
  throw LookupError("unknown verb '" + std::string(token) + "'");
}

NounId require_noun(const PhraseModel& model, std::string_view token) {
  if (auto id = model.lexicon.find_noun(token)) return *id;
  throw LookupError("unknown noun '" + std::string(token) + "'");
}

}  // namespace

std::vector<double> phrase_vector(const PhraseModel& model, std::string_view verb,
                                  std::string_view object) {
  const VerbId v = require_verb(model, verb);
  const NounId o = require_noun(model, object);
  return vo_embedding(model, v, o).v;
}

std::vector<double> svo_vector(const PhraseModel& model, std::string_view subject,
                               std::string_view verb, std::string_view object) {
  const NounId s = require_noun(model, subject);
  return svo_embedding(model.params.noun(s), phrase_vector(model, verb, object));
}

std::vector<VerbAlpha> per_verb_average_alpha(const PhraseModel& model,
                                              std::size_t min_object_types) {
  struct Accumulator {
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::map<std::uint32_t, Accumulator> by_verb;
  for (const auto& [v, o] : model.candidates.phrases()) {
    auto& acc = by_verb[static_cast<std::uint32_t>(v)];
    acc.sum += phrase_alpha(model, v, o);
    ++acc.count;  // candidates are distinct pairs, so this counts object types
  }
  std::vector<VerbAlpha> out;
  for (const auto& [verb, acc] : by_verb) {
    if (acc.count <= min_object_types) continue;
    out.push_back({model.lexicon.verb(make_id<VerbId>(verb)),
                   acc.sum / static_cast<double>(acc.count), acc.count});
  }
  std::sort(out.begin(), out.end(), [](const VerbAlpha& a, const VerbAlpha& b) {
    if (a.mean_alpha != b.mean_alpha) return a.mean_alpha > b.mean_alpha;
    return a.verb < b.verb;
  });
  return out;
}

}  // namespace adaphrase
