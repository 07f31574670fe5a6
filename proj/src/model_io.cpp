// Model file layout (all integers little-endian, doubles as IEEE-754 bits):
//
//   "ADPHRASE"  u32 version  u64 payload_size
//   payload:
//     u64 dim  u64 verb_count  u64 seed  u8 has_override  f64 override
//     vocab nouns, verbs, preps    (u64 n, then n x (u32 len, bytes))
//     counts: verb[], object[]     (u64 n, then n x u64)
//             pairs                (u64 n, then n x (u64 key, u64 count), key order)
//             u64 total
//     candidates: u64 threshold  u8 rule  u64 n  n x (u32 verb, u32 object)
//     features:   u64 dimension  f64 norm_freq  f64 norm_pmi
//     blocks nouns, predicates, phrases (u64 rows, u64 width, rows*width f64)
//     scorer (u64 n, n x f64)
//   u32 crc32(header + payload)

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "adaphrase/errors.hpp"
#include "adaphrase/model.hpp"
#include "adaphrase/util.hpp"

namespace adaphrase {
namespace {

constexpr std::array<unsigned char, 8> kMagic{'A', 'D', 'P', 'H', 'R', 'A', 'S', 'E'};
constexpr std::size_t kHeaderSize = kMagic.size() + 4 + 8;
constexpr std::size_t kTrailerSize = 4;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void raw(std::span<const unsigned char> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }

  std::vector<unsigned char>& bytes() { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> data) : data_(data) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t len = u32();
    auto b = take(len);
    return {reinterpret_cast<const char*>(b.data()), b.size()};
  }
  // Element count that must still fit in the remaining bytes.
  std::uint64_t count(std::size_t min_element_size) {
    const std::uint64_t n = u64();
    if (min_element_size > 0 && n > remaining() / min_element_size) corrupt("element count out of range");
    return n;
  }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  [[noreturn]] static void corrupt(const std::string& what) {
    throw ModelFileError(ModelFileError::Kind::Corrupt, "corrupt model file: " + what);
  }

 private:
  std::span<const unsigned char> take(std::size_t n) {
    if (n > remaining()) corrupt("field extends past payload");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::span<const unsigned char> data_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::span<const unsigned char> data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large models.
  std::size_t pos = 0;
  while (pos < data.size()) {
    const std::size_t chunk = std::min<std::size_t>(data.size() - pos, 1u << 30);
    crc = crc32(crc, data.data() + pos, static_cast<uInt>(chunk));
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void write_vocab(ByteWriter& w, const Vocabulary& vocab) {
  w.u64(vocab.size());
  for (const auto& token : vocab.tokens()) w.str(token);
}

Vocabulary read_vocab(ByteReader& r) {
  Vocabulary vocab;
  const std::uint64_t n = r.count(4);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::string token = r.str();
    if (vocab.intern(token) != i) ByteReader::corrupt("duplicate vocabulary token '" + token + "'");
  }
  return vocab;
}

void write_u64s(ByteWriter& w, const std::vector<std::uint64_t>& values) {
  w.u64(values.size());
  for (auto v : values) w.u64(v);
}

std::vector<std::uint64_t> read_u64s(ByteReader& r) {
  std::vector<std::uint64_t> values(r.count(8));
  for (auto& v : values) v = r.u64();
  return values;
}

void write_block(ByteWriter& w, const ParamBlock& block) {
  w.u64(block.rows());
  w.u64(block.width());
  for (double x : block.values()) w.f64(x);
}

ParamBlock read_block(ByteReader& r, std::size_t expected_rows, std::size_t expected_width,
                      const char* name) {
  const std::uint64_t rows = r.u64();
  const std::uint64_t width = r.u64();
  if (rows != expected_rows || width != expected_width) {
    ByteReader::corrupt(std::string("block '") + name + "' has inconsistent shape");
  }
  if (width != 0 && rows > r.remaining() / 8 / width) ByteReader::corrupt("block too large");
  ParamBlock block(rows, width);
  for (double& x : block.values()) x = r.f64();
  return block;
}

}  // namespace

std::vector<unsigned char> encode_model(const PhraseModel& model) {
  const ModelParams& p = model.params;
  ByteWriter w;
  w.u64(p.dim);
  w.u64(p.verb_count);
  w.u64(p.seed);
  w.u8(p.alpha_override ? 1 : 0);
  w.f64(p.alpha_override.value_or(0.0));

  write_vocab(w, model.lexicon.nouns);
  write_vocab(w, model.lexicon.verbs);
  write_vocab(w, model.lexicon.preps);

  const CooccurrenceCounts& counts = model.lexicon.counts;
  write_u64s(w, counts.verb);
  write_u64s(w, counts.object);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs(counts.pair.begin(), counts.pair.end());
  std::sort(pairs.begin(), pairs.end());
  w.u64(pairs.size());
  for (const auto& [key, count] : pairs) {
    w.u64(key);
    w.u64(count);
  }
  w.u64(counts.total);

  w.u64(model.candidates.threshold());
  w.u8(model.candidates.rule() == CandidateRule::Strict ? 0 : 1);
  w.u64(model.candidates.size());
  for (const auto& [v, o] : model.candidates.phrases()) {
    w.u32(static_cast<std::uint32_t>(v));
    w.u32(static_cast<std::uint32_t>(o));
  }

  w.u64(model.features.dimension());
  w.f64(model.features.norm_freq());
  w.f64(model.features.norm_pmi());

  write_block(w, p.nouns);
  write_block(w, p.predicates);
  write_block(w, p.phrases);
  w.u64(p.scorer.size());
  for (double x : p.scorer) w.f64(x);

  ByteWriter file;
  file.raw(kMagic);
  file.u32(kModelFormatVersion);
  file.u64(w.bytes().size());
  file.raw(w.bytes());
  file.u32(crc32_of(file.bytes()));
  return std::move(file.bytes());
}

PhraseModel decode_model(std::span<const unsigned char> bytes) {
  using Kind = ModelFileError::Kind;
  if (bytes.size() < kMagic.size() ||
      !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw ModelFileError(Kind::Version, "not a model file (bad magic bytes)");
  }
  if (bytes.size() < kHeaderSize) throw ModelFileError(Kind::Truncated, "model file truncated in header");

  ByteReader header(bytes.subspan(kMagic.size(), 12));
  const std::uint32_t version = header.u32();
  if (version != kModelFormatVersion) {
    throw ModelFileError(Kind::Version, "unsupported model format version " +
                                            std::to_string(version) + " (expected " +
                                            std::to_string(kModelFormatVersion) + ")");
  }
  const std::uint64_t payload_size = header.u64();
  const std::uint64_t available = bytes.size() - kHeaderSize;
  if (available < kTrailerSize || payload_size > available - kTrailerSize) {
    throw ModelFileError(Kind::Truncated, "model file truncated: payload declares " +
                                              std::to_string(payload_size) + " bytes, " +
                                              std::to_string(available) + " present");
  }
  if (payload_size != available - kTrailerSize) {
    throw ModelFileError(Kind::Corrupt, "trailing bytes after model payload");
  }
  const auto covered = bytes.first(kHeaderSize + payload_size);
  ByteReader trailer(bytes.subspan(kHeaderSize + payload_size));
  if (trailer.u32() != crc32_of(covered)) {
    throw ModelFileError(Kind::Checksum, "model file checksum mismatch");
  }

  ByteReader r(bytes.subspan(kHeaderSize, payload_size));
  PhraseModel model;
  ModelParams& p = model.params;
  p.dim = r.u64();
  p.verb_count = r.u64();
  p.seed = r.u64();
  const bool has_override = r.u8() != 0;
  const double override_value = r.f64();
  if (has_override) p.alpha_override = override_value;
  if (p.dim == 0 || p.dim > 4096) ByteReader::corrupt("implausible dimensionality");

  model.lexicon.nouns = read_vocab(r);
  model.lexicon.verbs = read_vocab(r);
  model.lexicon.preps = read_vocab(r);
  if (p.verb_count != model.lexicon.verbs.size()) ByteReader::corrupt("verb count mismatch");

  CooccurrenceCounts& counts = model.lexicon.counts;
  counts.verb = read_u64s(r);
  counts.object = read_u64s(r);
  const std::uint64_t n_pairs = r.count(16);
  counts.pair.reserve(n_pairs);
  for (std::uint64_t i = 0; i < n_pairs; ++i) {
    const std::uint64_t key = r.u64();
    counts.pair[key] = r.u64();
  }
  counts.total = r.u64();

  const std::uint64_t threshold = r.u64();
  const CandidateRule rule = r.u8() == 0 ? CandidateRule::Strict : CandidateRule::Inclusive;
  std::vector<std::pair<VerbId, NounId>> phrases(r.count(8));
  for (auto& [v, o] : phrases) {
    v = make_id<VerbId>(r.u32());
    o = make_id<NounId>(r.u32());
    if (index_of(v) >= model.lexicon.verbs.size() || index_of(o) >= model.lexicon.nouns.size()) {
      ByteReader::corrupt("candidate references unknown word");
    }
  }
  model.candidates = CandidateSet(std::move(phrases), threshold, rule);

  const std::uint64_t feature_dim = r.u64();
  const double norm_freq = r.f64();
  const double norm_pmi = r.f64();
  model.features =
      PhraseFeatureTable::with_norms(model.lexicon, model.candidates, norm_freq, norm_pmi);
  if (model.features.dimension() != feature_dim) ByteReader::corrupt("feature dimension mismatch");

  const std::size_t d = p.dim;
  p.nouns = read_block(r, model.lexicon.nouns.size(), d, "nouns");
  p.predicates = read_block(r, model.lexicon.verbs.size() + model.lexicon.preps.size(), d * d,
                            "predicates");
  p.phrases = read_block(r, model.candidates.size(), d, "phrases");
  const std::uint64_t n_weights = r.count(8);
  if (n_weights != feature_dim) ByteReader::corrupt("scorer size mismatch");
  p.scorer.resize(n_weights);
  for (double& x : p.scorer) x = r.f64();
  if (r.remaining() != 0) ByteReader::corrupt("unread bytes in payload");
  return model;
}

void save_model(const PhraseModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_model(model);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

PhraseModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on model file: " + path.string());
  try {
    return decode_model(bytes);
  } catch (const ModelFileError& e) {
    throw ModelFileError(e.kind(), path.string() + ": " + e.what());
  }
}

namespace {

void export_row(std::ostream& out, const std::string& name, const std::string& shape,
                std::span<const double> values) {
  out << name << '\t' << shape;
  for (double x : values) out << '\t' << x;
  out << '\n';
}

}  // namespace

void export_text(const PhraseModel& model, std::ostream& out) {
  const ModelParams& p = model.params;
  const Lexicon& lex = model.lexicon;
  const std::string vec_shape = std::to_string(p.dim);
  const std::string mat_shape = vec_shape + "x" + vec_shape;
  const auto old_precision = out.precision(17);

  for (std::size_t i = 0; i < lex.nouns.size(); ++i) {
    export_row(out, "noun/" + lex.nouns.token(static_cast<std::uint32_t>(i)), vec_shape,
               p.nouns.row(i));
  }
  for (std::size_t i = 0; i < lex.verbs.size(); ++i) {
    export_row(out, "verb/" + lex.verbs.token(static_cast<std::uint32_t>(i)), mat_shape,
               p.predicates.row(i));
  }
  for (std::size_t i = 0; i < lex.preps.size(); ++i) {
    export_row(out, "prep/" + lex.preps.token(static_cast<std::uint32_t>(i)), mat_shape,
               p.predicates.row(p.verb_count + i));
  }
  for (std::size_t i = 0; i < model.candidates.size(); ++i) {
    const auto [v, o] = model.candidates.phrases()[i];
    export_row(out, "phrase/" + lex.phrase_text(v, o), vec_shape, p.phrases.row(i));
  }
  export_row(out, "scorer/W", std::to_string(p.scorer.size()), p.scorer);
  out.precision(old_precision);
}

}  // namespace adaphrase
