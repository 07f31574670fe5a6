// Writes a synthetic tuple corpus and matching rating files.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "adaphrase/errors.hpp"
#include "adaphrase/synthetic.hpp"
#include "adaphrase/util.hpp"

int main(int argc, char** argv) {
  adaphrase::SyntheticConfig config;
  std::filesystem::path dir = ".";
  std::size_t raters = 3;
  std::size_t groups = 60;

  CLI::App app{"synthetic corpus generator", "adaphrase-synth"};
  app.add_option("--out-dir", dir, "directory for tuples.tsv, comp.tsv, disambig.tsv");
  app.add_option("--seed", config.seed, "generator seed");
  app.add_option("--topics", config.topics);
  app.add_option("--subjects-per-topic", config.subjects_per_topic);
  app.add_option("--verbs", config.verbs);
  app.add_option("--objects", config.objects);
  app.add_option("--frequent-regular", config.frequent_regular);
  app.add_option("--idioms", config.idioms);
  app.add_option("--frequent-count", config.frequent_count);
  app.add_option("--idiom-count", config.idiom_count);
  app.add_option("--background-max", config.background_max);
  app.add_option("--svopn-fraction", config.svopn_fraction);
  app.add_option("--raters", raters);
  app.add_option("--groups", groups, "disambiguation groups");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto corpus = adaphrase::generate_synthetic(config);
    std::ostringstream tuples, comp, disambig;
    adaphrase::write_synthetic_tuples(tuples, corpus);
    adaphrase::write_synthetic_ratings(comp, corpus, raters, config.seed + 1);
    adaphrase::write_synthetic_disambiguation(disambig, corpus, config, groups, raters,
                                              config.seed + 2);
    std::filesystem::create_directories(dir);
    adaphrase::write_file_atomic(dir / "tuples.tsv", tuples.str());
    adaphrase::write_file_atomic(dir / "comp.tsv", comp.str());
    adaphrase::write_file_atomic(dir / "disambig.tsv", disambig.str());
    std::cout << corpus.tuples.size() << " tuples\n";
  } catch (const adaphrase::ConfigError& e) {
    std::cerr << "adaphrase-synth: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "adaphrase-synth: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
