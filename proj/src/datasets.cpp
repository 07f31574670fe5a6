#include "adaphrase/datasets.hpp"

#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "adaphrase/errors.hpp"
#include "adaphrase/util.hpp"

namespace adaphrase {

namespace {

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Iterates data lines: strips '\r', skips blanks and '#' comments.
template <class Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty() || view.front() == '#') continue;
    fn(view, line_no);
  }
  if (in.bad()) throw IoError("read error after line " + std::to_string(line_no));
}

std::string line_error(const std::string& name, std::size_t line_no, const std::string& what) {
  return name + ":" + std::to_string(line_no) + ": " + what;
}

}  // namespace

double RatingItem::mean_rating() const { return mean_of(ratings); }
double DisambigGroup::mean_rating() const { return mean_of(ratings); }

RatingDataset read_rating_dataset(std::istream& in, std::string name, double scale_min,
                                  double scale_max) {
  RatingDataset ds;
  ds.name = std::move(name);
  ds.scale_min = scale_min;
  ds.scale_max = scale_max;
  std::unordered_map<std::string, std::size_t> index;
  bool first = true;
  for_each_line(in, [&](std::string_view line, std::size_t line_no) {
    const auto fields = split_tabs(line);
    double rating = 0.0;
    const bool numeric = fields.size() == 3 && parse_double(fields[2], rating);
    if (first && fields.size() == 3 && !numeric) {
      first = false;  // header
      return;
    }
    first = false;
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw FormatError(line_error(ds.name, line_no, "expected verb<TAB>object<TAB>rating"));
    }
    if (!numeric) throw FormatError(line_error(ds.name, line_no, "rating is not a number"));
    if (rating < scale_min || rating > scale_max) {
      throw FormatError(line_error(ds.name, line_no, "rating outside the declared scale"));
    }
    RatingItem probe{std::string(fields[0]), std::string(fields[1]), {}};
    auto [it, inserted] = index.try_emplace(probe.key(), ds.items.size());
    if (inserted) ds.items.push_back(std::move(probe));
    ds.items[it->second].ratings.push_back(rating);
  });
  return ds;
}

RatingDataset load_rating_dataset(const std::filesystem::path& path, double scale_min,
                                  double scale_max) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rating dataset: " + path.string());
  return read_rating_dataset(in, path.filename().string(), scale_min, scale_max);
}

DisambigDataset read_disambig_dataset(std::istream& in, std::string name) {
  DisambigDataset ds;
  ds.name = std::move(name);
  bool first = true;
  for_each_line(in, [&](std::string_view line, std::size_t line_no) {
    const auto fields = split_tabs(line);
    double rating = 0.0;
    const bool numeric = fields.size() == 6 && parse_double(fields[5], rating);
    if (first && fields.size() == 6 && !numeric) {
      first = false;
      return;
    }
    first = false;
    if (fields.size() != 6) {
      throw FormatError(line_error(
          ds.name, line_no, "expected id<TAB>verb<TAB>subject<TAB>object<TAB>landmark<TAB>rating"));
    }
    for (std::size_t i = 1; i < 5; ++i) {
      if (fields[i].empty()) throw FormatError(line_error(ds.name, line_no, "empty token"));
    }
    if (!numeric) throw FormatError(line_error(ds.name, line_no, "rating is not a number"));
    ds.judgments.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2]),
                            std::string(fields[3]), std::string(fields[4]), rating});
  });
  return ds;
}

DisambigDataset load_disambig_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open disambiguation dataset: " + path.string());
  return read_disambig_dataset(in, path.filename().string());
}

std::vector<DisambigGroup> DisambigDataset::groups() const {
  std::vector<DisambigGroup> out;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& j : judgments) {
    DisambigGroup probe{j.verb, j.subject, j.object, j.landmark, {}};
    auto [it, inserted] = index.try_emplace(probe.key(), out.size());
    if (inserted) out.push_back(std::move(probe));
    out[it->second].ratings.push_back(j.rating);
  }
  return out;
}

void write_score_dump(std::ostream& out, const ScoreTable& scores) {
  const auto old_precision = out.precision(17);
  for (const auto& [key, score] : scores) out << key << '\t' << score << '\n';
  out.precision(old_precision);
}

ScoreTable read_score_dump(std::istream& in) {
  ScoreTable table;
  for_each_line(in, [&](std::string_view line, std::size_t line_no) {
    const auto fields = split_tabs(line);
    double score = 0.0;
    if (fields.size() != 2 || fields[0].empty() || !parse_double(fields[1], score)) {
      throw FormatError("score dump line " + std::to_string(line_no) +
                        ": expected key<TAB>score");
    }
    table[std::string(fields[0])] = score;
  });
  return table;
}

ScoreTable load_score_dump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open score dump: " + path.string());
  try {
    return read_score_dump(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace adaphrase
