#pragma once

// Sparse compositionality features for verb-object phrases.
//
// The feature space is the concatenation of four blocks:
//   [verb one-hot | object one-hot | candidate-phrase one-hot | freq, pmi]
// Object indices range over the whole noun vocabulary.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "adaphrase/corpus.hpp"
#include "adaphrase/types.hpp"

namespace adaphrase {

struct FeatureEntry {
  std::uint32_t index = 0;
  double value = 0.0;

  friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

// At most five features fire for a phrase; stored inline.
class SparseFeatures {
 public:
  static constexpr std::size_t kCapacity = 5;

  void push(std::uint32_t index, double value);
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  const FeatureEntry* begin() const noexcept { return entries_.data(); }
  const FeatureEntry* end() const noexcept { return entries_.data() + size_; }
  const FeatureEntry& operator[](std::size_t i) const { return entries_[i]; }

 private:
  std::array<FeatureEntry, kCapacity> entries_{};
  std::size_t size_ = 0;
};

struct FeatureLayout {
  std::size_t verb_offset = 0;
  std::size_t object_offset = 0;
  std::size_t phrase_offset = 0;
  std::size_t freq_index = 0;
  std::size_t pmi_index = 0;
  std::size_t dimension = 0;

  static FeatureLayout for_sizes(std::size_t verbs, std::size_t nouns, std::size_t candidates);
};

// log(count(VO)); nullopt when count is 0.
std::optional<double> freq_feature(std::uint64_t count_vo);

// log(count(VO) * count(*) / (count(V) * count(O))); nullopt if any count is 0.
std::optional<double> pmi_feature(std::uint64_t count_vo, std::uint64_t count_v,
                                  std::uint64_t count_o, std::uint64_t count_star);

class PhraseFeatureTable {
 public:
  PhraseFeatureTable() = default;

  const FeatureLayout& layout() const noexcept { return layout_; }
  std::size_t dimension() const noexcept { return layout_.dimension; }
  double norm_freq() const noexcept { return norm_freq_; }
  double norm_pmi() const noexcept { return norm_pmi_; }
  std::size_t rows() const noexcept { return rows_.size(); }

  const SparseFeatures& candidate(PhraseId id) const { return rows_.at(index_of(id)); }

  // Features for an arbitrary pair. Unknown verb/object leave their
  // indicator out; the VO indicator fires only for candidates; freq and PMI
  // fire whenever the training counts support them.
  SparseFeatures featurize(std::optional<VerbId> verb, std::optional<NounId> object,
                           const Lexicon& lexicon, const CandidateSet& candidates) const;

  // Rebuilds a table from frozen normalization constants (model loading).
  static PhraseFeatureTable with_norms(const Lexicon& lexicon, const CandidateSet& candidates,
                                       double norm_freq, double norm_pmi);

  friend PhraseFeatureTable build_feature_table(const Lexicon& lexicon,
                                                const CandidateSet& candidates);

 private:
  FeatureLayout layout_;
  double norm_freq_ = 1.0;
  double norm_pmi_ = 1.0;
  std::vector<SparseFeatures> rows_;
};

// Normalization constants are the max |freq| and max |PMI| over candidates
// (1 when the set is empty or the max is 0).
PhraseFeatureTable build_feature_table(const Lexicon& lexicon, const CandidateSet& candidates);

}  // namespace adaphrase
