#pragma once

// Learnable parameters and every forward computation of the phrase model:
//
//   c(VO)   = M(V) v(O)
//   alpha   = sigmoid(W . phi(VO))
//   v(VO)   = alpha c(VO) + (1 - alpha) n(VO)     candidates
//           = c(VO)                               everything else
//   v(SVO)  = v(S) .* v(VO)
//   s(V,S,O)   = v(S) . v(VO)
//   s(P,SVO,N) = v(SVO) . (M(P) v(N))

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adaphrase/corpus.hpp"
#include "adaphrase/features.hpp"
#include "adaphrase/types.hpp"

namespace adaphrase {

// A rows x width block of doubles, row-major.
class ParamBlock {
 public:
  ParamBlock() = default;
  ParamBlock(std::size_t rows, std::size_t width) : rows_(rows), width_(width), data_(rows * width) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t width() const noexcept { return width_; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * width_, width_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * width_, width_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  friend bool operator==(const ParamBlock&, const ParamBlock&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

struct ModelParams {
  std::size_t dim = 0;
  std::size_t verb_count = 0;  // predicates [0, verb_count) are verbs, the rest prepositions
  ParamBlock nouns;            // |nouns| x d
  ParamBlock predicates;       // (|verbs| + |preps|) x d*d
  ParamBlock phrases;          // |candidates| x d
  std::vector<double> scorer;  // W, one weight per feature
  std::uint64_t seed = 0;
  // When set, every candidate uses this weight instead of the learned scorer.
  std::optional<double> alpha_override;

  std::span<const double> noun(NounId id) const { return nouns.row(index_of(id)); }
  std::span<const double> verb_matrix(VerbId id) const { return predicates.row(index_of(id)); }
  std::span<const double> prep_matrix(PrepId id) const {
    return predicates.row(verb_count + index_of(id));
  }
  std::span<const double> phrase(PhraseId id) const { return phrases.row(index_of(id)); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Embeddings ~ N(0, 1/d), matrices ~ N(0, 1/d^2), phrase embeddings ~ N(0, 1/d),
// W = 0. Nouns and predicates are drawn before phrase embeddings from their
// own streams so they do not depend on the candidate set.
ModelParams init_params(const Lexicon& lexicon, const CandidateSet& candidates,
                        const FeatureLayout& layout, std::size_t dim, std::uint64_t seed);

// Everything needed to embed and score phrases; what a model file holds.
struct PhraseModel {
  Lexicon lexicon;
  CandidateSet candidates;
  PhraseFeatureTable features;
  ModelParams params;

  std::size_t dim() const noexcept { return params.dim; }
};

double sigmoid(double x) noexcept;
// log(sigmoid(x)) without overflow for large |x|.
double log_sigmoid(double x) noexcept;

void compose_vo(std::span<const double> verb_matrix, std::span<const double> object,
                std::span<double> out);
std::vector<double> compose_vo(std::span<const double> verb_matrix, std::span<const double> object);

double score_alpha(const SparseFeatures& phi, std::span<const double> weights);

// alpha = 1 and alpha = 0 return c and n exactly.
void blend(double alpha, std::span<const double> c, std::span<const double> n,
           std::span<double> out);
std::vector<double> blend(double alpha, std::span<const double> c, std::span<const double> n);

struct PhraseVectors {
  double alpha = 0.5;
  std::vector<double> c;
  std::optional<std::vector<double>> n;  // candidates only
  std::vector<double> v;
};

// The scorer value used for a phrase during training: the override if set,
// otherwise sigmoid(W . phi).
double phrase_alpha(const PhraseModel& model, VerbId v, NounId o);

// LookupError if either id is out of range.
PhraseVectors vo_embedding(const PhraseModel& model, VerbId v, NounId o);

void svo_embedding(std::span<const double> subject, std::span<const double> vo,
                   std::span<double> out);
std::vector<double> svo_embedding(std::span<const double> subject, std::span<const double> vo);

double score_svo(std::span<const double> subject, std::span<const double> vo);
double score_svopn(std::span<const double> svo, std::span<const double> prep_matrix,
                   std::span<const double> noun);

// Binary model file: "ADPHRASE" magic, little-endian fields, CRC-32 trailer.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<unsigned char> encode_model(const PhraseModel& model);
// ModelFileError (Version / Truncated / Checksum / Corrupt) on bad input.
PhraseModel decode_model(std::span<const unsigned char> bytes);

// Written to a temporary sibling then renamed into place.
void save_model(const PhraseModel& model, const std::filesystem::path& path);
PhraseModel load_model(const std::filesystem::path& path);

// One line per parameter vector: name<TAB>shape<TAB>values...
void export_text(const PhraseModel& model, std::ostream& out);

}  // namespace adaphrase
