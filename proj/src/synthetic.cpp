#include "adaphrase/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <tuple>

#include "adaphrase/errors.hpp"
#include "adaphrase/random.hpp"

namespace adaphrase {

namespace {

std::string subject_name(std::size_t topic, std::size_t i) {
  return "s" + std::to_string(topic) + "x" + std::to_string(i);
}
std::string verb_name(std::size_t v) { return "v" + std::to_string(v); }
std::string object_name(std::size_t o) { return "o" + std::to_string(o); }
std::string prep_name(std::size_t p) { return "p" + std::to_string(p); }

std::vector<double> sparse_weights(Rng& rng, std::size_t topics, std::size_t support) {
  std::vector<std::size_t> order(topics);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  std::vector<double> w(topics, 0.0);
  for (std::size_t i = 0; i < support; ++i) w[order[i]] = weight(rng);
  return w;
}

std::vector<double> product(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> p(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) p[t] = a[t] * b[t];
  return p;
}

bool any_positive(const std::vector<double>& xs) {
  return std::any_of(xs.begin(), xs.end(), [](double x) { return x > 0.0; });
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticConfig& config) {
  if (config.topics < 2 || config.verbs == 0 || config.objects == 0 ||
      config.subjects_per_topic == 0) {
    throw ConfigError("synthetic corpus needs topics >= 2 and non-empty vocabularies");
  }
  if (config.verb_support == 0 || config.object_support == 0 ||
      config.verb_support + config.object_support >= config.topics) {
    throw ConfigError("topic supports must leave at least one topic free for idioms");
  }
  if (config.svopn_fraction < 0.0 || config.svopn_fraction > 1.0) {
    throw ConfigError("svopn_fraction must lie in [0, 1]");
  }
  if (config.svopn_fraction > 0.0 && config.preps == 0) {
    throw ConfigError("SVOPN tuples need at least one preposition");
  }

  Rng rng(config.seed);
  SyntheticCorpus out;
  for (std::size_t v = 0; v < config.verbs; ++v) {
    out.verb_topics.push_back(sparse_weights(rng, config.topics, config.verb_support));
  }
  for (std::size_t o = 0; o < config.objects; ++o) {
    out.object_topics.push_back(sparse_weights(rng, config.topics, config.object_support));
  }

  std::vector<std::pair<std::size_t, std::size_t>> eligible;
  for (std::size_t v = 0; v < config.verbs; ++v) {
    for (std::size_t o = 0; o < config.objects; ++o) {
      if (any_positive(product(out.verb_topics[v], out.object_topics[o]))) eligible.emplace_back(v, o);
    }
  }
  if (eligible.size() < config.frequent_regular + config.idioms) {
    throw ConfigError("too few verb-object pairs share a topic");
  }
  std::shuffle(eligible.begin(), eligible.end(), rng);
  const auto frequent_end = eligible.begin() + static_cast<std::ptrdiff_t>(config.frequent_regular);
  const auto idiom_end = frequent_end + static_cast<std::ptrdiff_t>(config.idioms);

  auto emit = [&](std::size_t v, std::size_t o, std::size_t topic) {
    SyntheticTuple t;
    t.subject = subject_name(topic, uniform_index(rng, config.subjects_per_topic));
    t.verb = verb_name(v);
    t.object = object_name(o);
    std::bernoulli_distribution extend(config.svopn_fraction);
    if (config.svopn_fraction > 0.0 && extend(rng)) {
      // The attachment follows the subject's topic: a topic-specific
      // preposition and a noun from an object that supports the topic.
      t.prep = prep_name(topic % config.preps);
      std::vector<std::size_t> fits;
      for (std::size_t k = 0; k < config.objects; ++k) {
        if (out.object_topics[k][topic] > 0.0) fits.push_back(k);
      }
      const std::size_t noun = fits.empty() ? uniform_index(rng, config.objects)
                                            : fits[uniform_index(rng, fits.size())];
      t.noun = object_name(noun);
    }
    out.tuples.push_back(std::move(t));
  };

  auto emit_regular = [&](std::size_t v, std::size_t o, std::size_t count) {
    const auto p = product(out.verb_topics[v], out.object_topics[o]);
    std::discrete_distribution<std::size_t> topic(p.begin(), p.end());
    for (std::size_t i = 0; i < count; ++i) emit(v, o, topic(rng));
  };

  for (auto it = eligible.begin(); it != frequent_end; ++it) {
    emit_regular(it->first, it->second, config.frequent_count);
    out.regular.emplace_back(verb_name(it->first), object_name(it->second));
  }
  for (auto it = frequent_end; it != idiom_end; ++it) {
    const auto [v, o] = *it;
    std::vector<std::size_t> free_topics;
    for (std::size_t t = 0; t < config.topics; ++t) {
      if (out.verb_topics[v][t] == 0.0 && out.object_topics[o][t] == 0.0) free_topics.push_back(t);
    }
    const std::size_t topic = free_topics[uniform_index(rng, free_topics.size())];
    for (std::size_t i = 0; i < config.idiom_count; ++i) emit(v, o, topic);
    out.idioms.emplace_back(verb_name(v), object_name(o));
  }
  if (config.background_max > 0) {
    std::uniform_int_distribution<std::size_t> count(1, config.background_max);
    for (auto it = idiom_end; it != eligible.end(); ++it) {
      emit_regular(it->first, it->second, count(rng));
    }
  }

  std::shuffle(out.tuples.begin(), out.tuples.end(), rng);
  return out;
}

void write_synthetic_tuples(std::ostream& out, const SyntheticCorpus& corpus) {
  for (const auto& t : corpus.tuples) {
    out << t.subject << '\t' << t.verb << '\t' << t.object;
    if (!t.prep.empty()) out << '\t' << t.prep << '\t' << t.noun;
    out << '\n';
  }
}

void write_synthetic_ratings(std::ostream& out, const SyntheticCorpus& corpus,
                             std::size_t raters, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 0.6);
  auto rate = [&](double centre) {
    return std::clamp(std::round(centre + noise(rng)), 1.0, 6.0);
  };
  out << "verb\tobject\trating\n";
  std::uniform_real_distribution<double> regular_centre(3.5, 5.5);
  for (const auto& [verb, object] : corpus.regular) {
    const double centre = regular_centre(rng);
    for (std::size_t r = 0; r < raters; ++r) out << verb << '\t' << object << '\t' << rate(centre) << '\n';
  }
  for (const auto& [verb, object] : corpus.idioms) {
    for (std::size_t r = 0; r < raters; ++r) out << verb << '\t' << object << '\t' << rate(1.5) << '\n';
  }
}

void write_synthetic_disambiguation(std::ostream& out, const SyntheticCorpus& corpus,
                                    const SyntheticConfig& config, std::size_t groups,
                                    std::size_t raters, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 0.8);
  out << "id\tverb\tsubject\tobject\tlandmark\trating\n";
  std::set<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> seen;
  std::size_t id = 0;
  for (std::size_t attempt = 0; seen.size() < groups && attempt < groups * 100; ++attempt) {
    const std::size_t v = uniform_index(rng, config.verbs);
    const std::size_t o = uniform_index(rng, config.objects);
    const auto p = product(corpus.verb_topics[v], corpus.object_topics[o]);
    if (!any_positive(p)) continue;
    std::discrete_distribution<std::size_t> topic_of(p.begin(), p.end());
    const std::size_t topic = topic_of(rng);
    const std::size_t landmark = uniform_index_except(rng, config.verbs, v);
    const std::size_t s = uniform_index(rng, config.subjects_per_topic);
    if (!seen.insert({v, o, landmark, topic * config.subjects_per_topic + s}).second) continue;
    // How well the landmark explains this subject, relative to the verb.
    const double a = corpus.verb_topics[landmark][topic];
    const double share = a / (a + corpus.verb_topics[v][topic]);
    const double centre = 1.0 + 6.0 * std::min(1.0, 2.0 * share);
    for (std::size_t r = 0; r < raters; ++r) {
      const double rating = std::clamp(std::round(centre + noise(rng)), 1.0, 7.0);
      out << "d" << id++ << '\t' << verb_name(v) << '\t' << subject_name(topic, s) << '\t'
          << object_name(o) << '\t' << verb_name(landmark) << '\t' << rating << '\n';
    }
  }
}

}  // namespace adaphrase
