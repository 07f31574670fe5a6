#include "adaphrase/model.hpp"

#include <cassert>
#include <cmath>
#include <random>

#include "adaphrase/errors.hpp"
#include "adaphrase/kernels.hpp"
#include "adaphrase/random.hpp"

namespace adaphrase {

namespace {

enum Stream : std::uint64_t { kNounStream = 1, kPredicateStream = 2, kPhraseStream = 3 };

void fill_gaussian(std::span<double> values, double variance, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(variance));
  for (double& x : values) x = dist(rng);
}

void check_dims(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

ModelParams init_params(const Lexicon& lexicon, const CandidateSet& candidates,
                        const FeatureLayout& layout, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ConfigError("embedding dimensionality must be >= 1");
  const double d = static_cast<double>(dim);

  ModelParams params;
  params.dim = dim;
  params.seed = seed;
  params.verb_count = lexicon.verbs.size();
  params.nouns = ParamBlock(lexicon.nouns.size(), dim);
  params.predicates = ParamBlock(lexicon.verbs.size() + lexicon.preps.size(), dim * dim);
  params.phrases = ParamBlock(candidates.size(), dim);
  params.scorer.assign(layout.dimension, 0.0);

  fill_gaussian(params.nouns.values(), 1.0 / d, derive_seed(seed, kNounStream));
  fill_gaussian(params.predicates.values(), 1.0 / (d * d), derive_seed(seed, kPredicateStream));
  fill_gaussian(params.phrases.values(), 1.0 / d, derive_seed(seed, kPhraseStream));
  return params;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) noexcept {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

void compose_vo(std::span<const double> verb_matrix, std::span<const double> object,
                std::span<double> out) {
  if (verb_matrix.size() != object.size() * object.size() || out.size() != object.size()) {
    throw std::invalid_argument("compose_vo: shape mismatch");
  }
  kernels::gemv(verb_matrix, object, out);
}

std::vector<double> compose_vo(std::span<const double> verb_matrix,
                               std::span<const double> object) {
  std::vector<double> out(object.size());
  compose_vo(verb_matrix, object, out);
  return out;
}

double score_alpha(const SparseFeatures& phi, std::span<const double> weights) {
  double z = 0.0;
  for (const auto& f : phi) {
    assert(f.index < weights.size());
    z += weights[f.index] * f.value;
  }
  return sigmoid(z);
}

void blend(double alpha, std::span<const double> c, std::span<const double> n,
           std::span<double> out) {
  check_dims(c, n, "blend");
  check_dims(c, out, "blend");
  if (alpha == 1.0) {
    std::copy(c.begin(), c.end(), out.begin());
  } else if (alpha == 0.0) {
    std::copy(n.begin(), n.end(), out.begin());
  } else {
    kernels::active().blend(alpha, c.data(), n.data(), out.data(), c.size());
  }
}

std::vector<double> blend(double alpha, std::span<const double> c, std::span<const double> n) {
  std::vector<double> out(c.size());
  blend(alpha, c, n, out);
  return out;
}

double phrase_alpha(const PhraseModel& model, VerbId v, NounId o) {
  const auto phrase = model.candidates.find(v, o);
  if (phrase && model.params.alpha_override) return *model.params.alpha_override;
  const SparseFeatures phi =
      phrase ? model.features.candidate(*phrase)
             : model.features.featurize(v, o, model.lexicon, model.candidates);
  return score_alpha(phi, model.params.scorer);
}

PhraseVectors vo_embedding(const PhraseModel& model, VerbId v, NounId o) {
  if (index_of(v) >= model.params.verb_count) {
    throw LookupError("unknown verb id " + std::to_string(index_of(v)));
  }
  if (index_of(o) >= model.params.nouns.rows()) {
    throw LookupError("unknown noun id " + std::to_string(index_of(o)));
  }
  PhraseVectors out;
  out.alpha = phrase_alpha(model, v, o);
  out.c = compose_vo(model.params.verb_matrix(v), model.params.noun(o));
  if (const auto phrase = model.candidates.find(v, o)) {
    const auto n = model.params.phrase(*phrase);
    out.n.emplace(n.begin(), n.end());
    out.v = blend(out.alpha, out.c, *out.n);
  } else {
    out.v = out.c;
  }
  return out;
}

void svo_embedding(std::span<const double> subject, std::span<const double> vo,
                   std::span<double> out) {
  check_dims(subject, vo, "svo_embedding");
  check_dims(subject, out, "svo_embedding");
  kernels::hadamard(subject, vo, out);
}

std::vector<double> svo_embedding(std::span<const double> subject, std::span<const double> vo) {
  std::vector<double> out(subject.size());
  svo_embedding(subject, vo, out);
  return out;
}

double score_svo(std::span<const double> subject, std::span<const double> vo) {
  check_dims(subject, vo, "score_svo");
  return kernels::dot(subject, vo);
}

double score_svopn(std::span<const double> svo, std::span<const double> prep_matrix,
                   std::span<const double> noun) {
  check_dims(svo, noun, "score_svopn");
  std::vector<double> projected(noun.size());
  compose_vo(prep_matrix, noun, projected);
  return kernels::dot(svo, projected);
}

}  // namespace adaphrase
