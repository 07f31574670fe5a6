#include "adaphrase/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adaphrase {

void SparseFeatures::push(std::uint32_t index, double value) {
  if (size_ == kCapacity) throw std::length_error("SparseFeatures capacity exceeded");
  entries_[size_++] = {index, value};
}

FeatureLayout FeatureLayout::for_sizes(std::size_t verbs, std::size_t nouns,
                                       std::size_t candidates) {
  FeatureLayout layout;
  layout.verb_offset = 0;
  layout.object_offset = verbs;
  layout.phrase_offset = verbs + nouns;
  layout.freq_index = verbs + nouns + candidates;
  layout.pmi_index = layout.freq_index + 1;
  layout.dimension = layout.pmi_index + 1;
  return layout;
}

std::optional<double> freq_feature(std::uint64_t count_vo) {
  if (count_vo == 0) return std::nullopt;
  return std::log(static_cast<double>(count_vo));
}

std::optional<double> pmi_feature(std::uint64_t count_vo, std::uint64_t count_v,
                                  std::uint64_t count_o, std::uint64_t count_star) {
  if (count_vo == 0 || count_v == 0 || count_o == 0 || count_star == 0) return std::nullopt;
  // Sum of logs avoids overflow of the count products on large corpora.
  return std::log(static_cast<double>(count_vo)) + std::log(static_cast<double>(count_star)) -
         std::log(static_cast<double>(count_v)) - std::log(static_cast<double>(count_o));
}

namespace {

struct RawStats {
  std::optional<double> freq;
  std::optional<double> pmi;
};

RawStats raw_stats(VerbId v, NounId o, const CooccurrenceCounts& counts) {
  const std::uint64_t vo = counts.pair_count(v, o);
  return {freq_feature(vo), pmi_feature(vo, counts.verb_count(v), counts.object_count(o),
                                        counts.total)};
}

SparseFeatures assemble(const FeatureLayout& layout, std::optional<VerbId> verb,
                        std::optional<NounId> object, std::optional<PhraseId> phrase,
                        const RawStats& stats, double norm_freq, double norm_pmi) {
  SparseFeatures phi;
  if (verb) phi.push(static_cast<std::uint32_t>(layout.verb_offset + index_of(*verb)), 1.0);
  if (object) phi.push(static_cast<std::uint32_t>(layout.object_offset + index_of(*object)), 1.0);
  if (phrase) phi.push(static_cast<std::uint32_t>(layout.phrase_offset + index_of(*phrase)), 1.0);
  if (stats.freq && *stats.freq != 0.0) {
    phi.push(static_cast<std::uint32_t>(layout.freq_index), *stats.freq / norm_freq);
  }
  if (stats.pmi && *stats.pmi != 0.0) {
    phi.push(static_cast<std::uint32_t>(layout.pmi_index), *stats.pmi / norm_pmi);
  }
  return phi;
}

}  // namespace

PhraseFeatureTable PhraseFeatureTable::with_norms(const Lexicon& lexicon,
                                                  const CandidateSet& candidates,
                                                  double norm_freq, double norm_pmi) {
  PhraseFeatureTable table;
  table.layout_ =
      FeatureLayout::for_sizes(lexicon.verbs.size(), lexicon.nouns.size(), candidates.size());
  table.norm_freq_ = norm_freq;
  table.norm_pmi_ = norm_pmi;
  table.rows_.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto [v, o] = candidates.phrases()[i];
    table.rows_.push_back(assemble(table.layout_, v, o, make_id<PhraseId>(i),
                                   raw_stats(v, o, lexicon.counts), norm_freq, norm_pmi));
  }
  return table;
}

PhraseFeatureTable build_feature_table(const Lexicon& lexicon, const CandidateSet& candidates) {
  double max_freq = 0.0;
  double max_pmi = 0.0;
  for (const auto& [v, o] : candidates.phrases()) {
    const RawStats stats = raw_stats(v, o, lexicon.counts);
    if (stats.freq) max_freq = std::max(max_freq, std::abs(*stats.freq));
    if (stats.pmi) max_pmi = std::max(max_pmi, std::abs(*stats.pmi));
  }
  return PhraseFeatureTable::with_norms(lexicon, candidates, max_freq > 0.0 ? max_freq : 1.0,
                                        max_pmi > 0.0 ? max_pmi : 1.0);
}

SparseFeatures PhraseFeatureTable::featurize(std::optional<VerbId> verb,
                                             std::optional<NounId> object,
                                             const Lexicon& lexicon,
                                             const CandidateSet& candidates) const {
  if (verb && object) {
    if (auto phrase = candidates.find(*verb, *object)) return candidate(*phrase);
    return assemble(layout_, verb, object, std::nullopt,
                    raw_stats(*verb, *object, lexicon.counts), norm_freq_, norm_pmi_);
  }
  // Without both ids there is no pair count, so only indicators can fire.
  return assemble(layout_, verb, object, std::nullopt, RawStats{}, norm_freq_, norm_pmi_);
}

}  // namespace adaphrase
