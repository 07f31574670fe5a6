#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "adaphrase/corpus.hpp"
#include "adaphrase/synthetic.hpp"

using namespace adaphrase;

namespace {

SyntheticConfig small() {
  SyntheticConfig c;
  c.topics = 6;
  c.subjects_per_topic = 4;
  c.verbs = 10;
  c.objects = 20;
  c.frequent_regular = 5;
  c.idioms = 2;
  c.frequent_count = 40;
  c.idiom_count = 40;
  c.background_max = 5;
  c.svopn_fraction = 0.3;
  return c;
}

std::size_t topic_of(const std::string& subject) {
  // "s<t>x<i>"
  return std::stoul(subject.substr(1, subject.find('x') - 1));
}

std::size_t index_of_token(const std::string& token) { return std::stoul(token.substr(1)); }

}  // namespace

TEST_CASE("generator is deterministic per seed") {
  auto c = small();
  std::ostringstream a, b, other;
  write_synthetic_tuples(a, generate_synthetic(c));
  write_synthetic_tuples(b, generate_synthetic(c));
  c.seed = 8;
  write_synthetic_tuples(other, generate_synthetic(c));
  CHECK(a.str() == b.str());
  CHECK(a.str() != other.str());
}

TEST_CASE("idiom subjects come from a topic outside both supports") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto c = small();
    c.seed = seed;
    const auto corpus = generate_synthetic(c);
    REQUIRE(corpus.idioms.size() == 2);
    REQUIRE(corpus.regular.size() == 5);
    for (const auto& [verb, object] : corpus.idioms) {
      const auto& vt = corpus.verb_topics[index_of_token(verb)];
      const auto& ot = corpus.object_topics[index_of_token(object)];
      std::size_t seen = 0;
      for (const auto& t : corpus.tuples) {
        if (t.verb != verb || t.object != object) continue;
        ++seen;
        const auto topic = topic_of(t.subject);
        CHECK(vt[topic] == 0.0);
        CHECK(ot[topic] == 0.0);
      }
      CHECK(seen == c.idiom_count);
    }
    // Regular pairs draw subjects only from shared topics.
    for (const auto& [verb, object] : corpus.regular) {
      const auto& vt = corpus.verb_topics[index_of_token(verb)];
      const auto& ot = corpus.object_topics[index_of_token(object)];
      for (const auto& t : corpus.tuples) {
        if (t.verb != verb || t.object != object) continue;
        const auto topic = topic_of(t.subject);
        CHECK(vt[topic] * ot[topic] > 0.0);
      }
    }
  }
}

TEST_CASE("generated tuples parse cleanly") {
  const auto corpus = generate_synthetic(small());
  std::stringstream text;
  write_synthetic_tuples(text, corpus);
  Lexicon lexicon;
  const auto parsed = parse_tuple_file(text, lexicon);
  CHECK(parsed.malformed_lines.empty());
  CHECK(parsed.size() == corpus.tuples.size());
  CHECK(parsed.svopn.size() > 0);
}

TEST_CASE("ratings put idioms below regular pairs") {
  const auto corpus = generate_synthetic(small());
  std::ostringstream out;
  write_synthetic_ratings(out, corpus, 5, 3);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);  // header
  std::map<std::string, std::pair<double, int>> sums;
  while (std::getline(in, line)) {
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 + 1);
    const double r = std::stod(line.substr(t2 + 1));
    CHECK(r >= 1.0);
    CHECK(r <= 6.0);
    auto& s = sums[line.substr(0, t2)];
    s.first += r;
    s.second += 1;
  }
  double worst_regular = 10.0;
  for (const auto& [v, o] : corpus.regular) {
    const auto& s = sums.at(v + "\t" + o);
    worst_regular = std::min(worst_regular, s.first / s.second);
  }
  for (const auto& [v, o] : corpus.idioms) {
    const auto& s = sums.at(v + "\t" + o);
    CHECK(s.first / s.second < worst_regular);
  }
}
