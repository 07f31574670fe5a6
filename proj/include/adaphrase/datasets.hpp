#pragma once

// Readers for human-rating datasets and per-item score dumps.
//
//   compositionality:  verb<TAB>object<TAB>rating
//   disambiguation:    id<TAB>verb<TAB>subject<TAB>object<TAB>landmark<TAB>rating
//   score dump:        key<TAB>score
//
// Lines starting with '#' are comments. A first line whose rating column is
// not numeric is taken as a header and skipped.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace adaphrase {

struct RatingItem {
  std::string verb;
  std::string object;
  std::vector<double> ratings;

  double mean_rating() const;
  std::string key() const { return verb + " " + object; }
};

struct RatingDataset {
  std::string name;
  double scale_min = 1.0;
  double scale_max = 6.0;
  std::vector<RatingItem> items;  // repeated (verb, object) lines are merged
};

struct DisambigJudgment {
  std::string id;
  std::string verb;
  std::string subject;
  std::string object;
  std::string landmark;
  double rating = 0.0;
};

struct DisambigGroup {
  std::string verb;
  std::string subject;
  std::string object;
  std::string landmark;
  std::vector<double> ratings;

  double mean_rating() const;
  std::string key() const { return verb + " " + subject + " " + object + " " + landmark; }
};

struct DisambigDataset {
  std::string name;
  std::vector<DisambigJudgment> judgments;

  // Judgments grouped by (verb, subject, object, landmark), first-seen order.
  std::vector<DisambigGroup> groups() const;
};

// FormatError on a bad line or a rating outside [scale_min, scale_max].
RatingDataset read_rating_dataset(std::istream& in, std::string name, double scale_min = 1.0,
                                  double scale_max = 6.0);
RatingDataset load_rating_dataset(const std::filesystem::path& path, double scale_min = 1.0,
                                  double scale_max = 6.0);

DisambigDataset read_disambig_dataset(std::istream& in, std::string name);
DisambigDataset load_disambig_dataset(const std::filesystem::path& path);

using ScoreTable = std::map<std::string, double>;

void write_score_dump(std::ostream& out, const ScoreTable& scores);
ScoreTable read_score_dump(std::istream& in);
ScoreTable load_score_dump(const std::filesystem::path& path);

}  // namespace adaphrase
