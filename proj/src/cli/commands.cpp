#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "adaphrase/cli.hpp"
#include "adaphrase/datasets.hpp"
#include "adaphrase/errors.hpp"
#include "adaphrase/eval.hpp"
#include "adaphrase/model.hpp"
#include "adaphrase/util.hpp"

namespace adaphrase {

namespace {

using KeyList = std::vector<std::string_view>;

const KeyList kTrainKeys = {"tuples",     "model",          "log",   "trace",      "dim",
                            "batch_size", "learning_rate",  "l2",    "max_epochs", "seed",
                            "negatives",  "fix_alpha",      "early_stopping",      "split",
                            "split_seed", "threshold",      "candidate_rule"};

KeyList grid_keys() {
  KeyList keys = kTrainKeys;
  keys.insert(keys.end(), {"grid_learning_rates", "grid_l2", "report"});
  return keys;
}

const KeyList kEvalKeys = {"model",     "comp",  "disambig",       "report",     "dump",
                           "bootstrap", "level", "bootstrap_seed", "rating_min", "rating_max"};
const KeyList kEnsembleKeys = {"comp",  "disambig",       "report",     "dump",      "bootstrap",
                               "level", "bootstrap_seed", "rating_min", "rating_max"};
const KeyList kScoreKeys = {"model", "report"};
const KeyList kNeighborKeys = {"model", "k", "pool", "report"};
const KeyList kExportKeys = {"model", "output"};

std::string flag_name(std::string_view key) {
  std::string name = "--";
  for (char ch : key) name += ch == '_' ? '-' : ch;
  return name;
}

std::string_view help_for(std::string_view key) {
  for (const auto& k : config_keys()) {
    if (k.name == key) return k.help;
  }
  return {};
}

// Per-subcommand state: bound flags, positionals and the stage being run.
struct Invocation {
  KeyList keys;
  std::string config_path;
  std::vector<std::pair<std::string, CLI::Option*>> flag_options;
  std::map<std::string, std::string> flag_text;
  std::vector<std::string> positionals;
  ConfigValues values;
  RunConfig run;
  std::string stage = "config";
};

void bind_keys(CLI::App* sub, Invocation& inv) {
  sub->add_option("--config", inv.config_path, "key=value run configuration file");
  for (const auto key : inv.keys) {
    auto& slot = inv.flag_text[std::string(key)];
    auto* opt = sub->add_option(flag_name(key), slot, std::string(help_for(key)))
                    ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    inv.flag_options.emplace_back(std::string(key), opt);
  }
}

void require_file(const std::filesystem::path& path, std::string_view what) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw ConfigError(std::string(what) + " not found: " + path.string());
  }
}

void resolve(Invocation& inv) {
  ConfigValues file;
  if (!inv.config_path.empty()) {
    require_file(inv.config_path, "config file");
    file = load_config_file(inv.config_path);
  }
  ConfigValues flags;
  for (const auto& [key, opt] : inv.flag_options) {
    if (opt->count() > 0) flags[key] = inv.flag_text.at(key);
  }
  inv.values = resolve_config(file, flags);
  inv.run = parse_run_config(inv.values);
}

std::filesystem::path require_model_path(const RunConfig& run) {
  if (run.model.empty()) throw ConfigError("no model path given (--model)");
  return run.model;
}

void emit(const std::filesystem::path& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_file_atomic(path, text);
  }
}

std::string fixed(double x, int digits) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

constexpr const char* kRankNote = "# spearman\tties=average-rank\n";

std::string coverage_text(const Coverage& c) {
  return std::to_string(c.covered) + "/" + std::to_string(c.total);
}

// Appends a '#' note with the replicate counts to `notes`.
std::string report_line(std::string_view metric, std::string_view dataset, const Correlation& corr,
                        const RunConfig& run, std::string& notes) {
  const auto ci = bootstrap_ci(corr.points, run.bootstrap, run.level, run.bootstrap_seed);
  notes += "# bootstrap\t" + std::string(metric) + "\t" + std::string(dataset) +
           "\treplicates=" + std::to_string(ci.replicates) +
           "\tskipped_constant=" + std::to_string(ci.skipped) + "\n";
  std::string line(metric);
  line += '\t';
  line += dataset;
  line += '\t' + fixed(corr.rho, 6) + '\t' + fixed(ci.lo, 6) + '\t' + fixed(ci.hi, 6) + '\t' +
          coverage_text(corr.coverage) + '\n';
  return line;
}

// Throws EvalError if the dataset and the model share too few items.
Correlation checked(const std::function<Correlation()>& fn, const std::string& dataset,
                    std::size_t covered) {
  if (covered < 2) {
    throw EvalError("dataset " + dataset + " shares fewer than two items with the model vocabulary");
  }
  return fn();
}

std::string score_dump_text(const ScoreTable& scores) {
  std::ostringstream out;
  write_score_dump(out, scores);
  return out.str();
}

struct PreparedTraining {
  PreparedCorpus data;
  std::size_t tuples = 0;
};

PreparedTraining ingest(Invocation& inv) {
  const RunConfig& run = inv.run;
  if (run.tuples.empty()) throw ConfigError("no tuple files given (--tuples)");
  for (const auto& path : run.tuples) require_file(path, "tuple file");
  require_model_path(run);

  inv.stage = "ingest";
  Lexicon lexicon;
  TupleCorpus corpus;
  for (const auto& path : run.tuples) append_corpus(corpus, load_tuple_file(path, lexicon));
  if (corpus.size() == 0) throw FormatError("tuple files hold no tuples");

  inv.stage = "split";
  TupleCorpus split = split_corpus(corpus, run.split, run.split_seed);

  inv.stage = "candidates";
  PreparedTraining out;
  out.tuples = corpus.size();
  out.data = prepare_corpus(std::move(lexicon), std::move(split), run.threshold, run.rule);
  return out;
}

std::string log_text(const std::string& header, const TrainingLog& log) {
  std::ostringstream out;
  out << header << "epoch\ttrain_cost\tdev_score\tmean_alpha\n";
  write_training_log(out, log);
  return out.str();
}

void save_outputs(Invocation& inv, const TrainResult& result, const std::string& header) {
  const RunConfig& run = inv.run;
  inv.stage = "save";
  save_model(result.model, run.model);
  std::filesystem::path log_path = run.log;
  if (log_path.empty()) {
    log_path = run.model;
    log_path += ".log";
  }
  write_file_atomic(log_path, log_text(header, result.log));
  if (!run.trace.empty()) {
    std::ostringstream trace;
    trace << header << "epoch\tphrase\talpha\n";
    write_alpha_trace(trace, result.trace, result.model.lexicon);
    write_file_atomic(run.trace, trace.str());
  }
}

std::string training_summary(const TrainResult& result, const PreparedTraining& prepared) {
  std::ostringstream out;
  const auto& log = result.log;
  out << "tuples\t" << prepared.tuples << '\n';
  out << "nouns\t" << result.model.lexicon.nouns.size() << '\n';
  out << "verbs\t" << result.model.lexicon.verbs.size() << '\n';
  out << "candidates\t" << result.model.candidates.size() << '\n';
  out << "epochs\t" << log.epochs.size() << '\n';
  out << "best_epoch\t" << log.best_epoch << '\n';
  if (log.best_epoch > 0) {
    out << "dev_score\t" << fixed(log.epochs[log.best_epoch - 1].dev_score, 6) << '\n';
  }
  out << "stopped_early\t" << (log.stopped_early ? "true" : "false") << '\n';
  return out.str();
}

std::vector<std::pair<VerbId, NounId>> tracked_phrases(const Invocation& inv,
                                                       const PreparedCorpus& data) {
  if (inv.run.trace.empty()) return {};
  return data.candidates.phrases();
}

void cmd_train(Invocation& inv, std::ostream& out, std::ostream& /*err*/) {
  resolve(inv);
  auto prepared = ingest(inv);
  const std::string header = report_header(inv.values, inv.keys, inv.run.train.seed);
  inv.stage = "train";
  const auto tracked = tracked_phrases(inv, prepared.data);
  const TrainResult result = train(prepared.data, inv.run.train, tracked);
  save_outputs(inv, result, header);
  out << header << training_summary(result, prepared);
}

void cmd_grid(Invocation& inv, std::ostream& out, std::ostream& /*err*/) {
  resolve(inv);
  if (inv.run.grid_learning_rates.empty() || inv.run.grid_l2.empty()) {
    throw ConfigError("grid needs at least one learning rate and one l2 value");
  }
  auto prepared = ingest(inv);
  const std::string header = report_header(inv.values, inv.keys, inv.run.train.seed);
  inv.stage = "grid";
  GridResult grid =
      grid_search(prepared.data, inv.run.train, inv.run.grid_learning_rates, inv.run.grid_l2);
  save_outputs(inv, grid.best_result, header);

  std::ostringstream report;
  report << header << "learning_rate\tl2\tdev_score\tbest_epoch\tselected\n";
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const auto& cell = grid.cells[i];
    report << cell.learning_rate << '\t' << cell.l2 << '\t' << fixed(cell.dev_score, 6) << '\t'
           << cell.best_epoch << '\t' << (i == grid.best ? "*" : "") << '\n';
  }
  emit(inv.run.report, report.str(), out);
}

struct NamedTable {
  std::string name;
  ScoreTable scores;
};

void write_dumps(const RunConfig& run, const std::vector<NamedTable>& tables) {
  if (run.dump.empty()) return;
  if (tables.size() == 1) {
    write_file_atomic(run.dump, score_dump_text(tables.front().scores));
    return;
  }
  for (const auto& t : tables) {
    std::filesystem::path path = run.dump;
    path += "." + t.name;
    write_file_atomic(path, score_dump_text(t.scores));
  }
}

std::string dataset_name(const std::filesystem::path& path) { return path.stem().string(); }

void cmd_eval(Invocation& inv, std::ostream& out, std::ostream& /*err*/) {
  resolve(inv);
  const RunConfig& run = inv.run;
  require_file(require_model_path(run), "model file");
  if (run.comp.empty() && run.disambig.empty()) {
    throw ConfigError("eval needs --comp or --disambig datasets");
  }
  for (const auto& p : run.comp) require_file(p, "rating dataset");
  for (const auto& p : run.disambig) require_file(p, "disambiguation dataset");

  inv.stage = "load";
  const PhraseModel model = load_model(run.model);

  inv.stage = "eval";
  std::string report = report_header(inv.values, inv.keys, run.bootstrap_seed);
  std::string notes = kRankNote;
  std::string body = "metric\tdataset\tvalue\tci_lo\tci_hi\tcoverage\n";
  std::vector<NamedTable> dumps;
  for (const auto& path : run.comp) {
    const auto dataset = load_rating_dataset(path, run.rating_min, run.rating_max);
    const auto name = dataset_name(path);
    const auto scores = compositionality_scores(model, dataset);
    const auto corr = checked([&] { return correlate_compositionality(dataset, scores); }, name,
                              scores.size());
    body += report_line("comp_spearman", name, corr, run, notes);
    dumps.push_back({name, scores});
  }
  for (const auto& path : run.disambig) {
    const auto dataset = load_disambig_dataset(path);
    const auto name = dataset_name(path);
    const auto scores = disambiguation_scores(model, dataset);
    for (const auto mode : {DisambigMode::Averaged, DisambigMode::PerRating}) {
      const auto corr = checked(
          [&] { return correlate_disambiguation(dataset, scores, mode); }, name, scores.size());
      body += report_line(mode == DisambigMode::Averaged ? "disambig_a_spearman"
                                                           : "disambig_b_spearman",
                            name, corr, run, notes);
    }
    dumps.push_back({name, scores});
  }
  inv.stage = "write";
  write_dumps(run, dumps);
  emit(run.report, report + notes + body, out);
}

void cmd_ensemble(Invocation& inv, std::ostream& out, std::ostream& err) {
  resolve(inv);
  const RunConfig& run = inv.run;
  if (inv.positionals.size() < 2) {
    throw ConfigError("ensemble needs at least two score dumps, got " +
                      std::to_string(inv.positionals.size()));
  }
  if (run.comp.size() + run.disambig.size() != 1) {
    throw ConfigError("ensemble needs exactly one gold dataset (--comp or --disambig)");
  }
  for (const auto& p : inv.positionals) require_file(p, "score dump");
  for (const auto& p : run.comp) require_file(p, "rating dataset");
  for (const auto& p : run.disambig) require_file(p, "disambiguation dataset");

  inv.stage = "load";
  std::vector<ScoreTable> tables;
  for (const auto& p : inv.positionals) tables.push_back(load_score_dump(p));

  inv.stage = "ensemble";
  const EnsembleResult ensemble = ensemble_scores(tables);
  if (!ensemble.dropped.empty()) {
    err << "ensemble: " << ensemble.dropped.size() << " keys missing from some dump were dropped\n";
  }
  std::string report = report_header(inv.values, inv.keys, run.bootstrap_seed);
  report += "# dumps=" + std::to_string(tables.size()) +
            "\tshared=" + std::to_string(ensemble.scores.size()) +
            "\tdropped=" + std::to_string(ensemble.dropped.size()) + "\n";
  std::string notes = kRankNote;
  std::string body = "metric\tdataset\tvalue\tci_lo\tci_hi\tcoverage\n";
  if (!run.comp.empty()) {
    const auto dataset = load_rating_dataset(run.comp.front(), run.rating_min, run.rating_max);
    const auto name = dataset_name(run.comp.front());
    const auto corr = checked([&] { return correlate_compositionality(dataset, ensemble.scores); },
                              name, ensemble.scores.size());
    body += report_line("comp_spearman", name, corr, run, notes);
  } else {
    const auto dataset = load_disambig_dataset(run.disambig.front());
    const auto name = dataset_name(run.disambig.front());
    for (const auto mode : {DisambigMode::Averaged, DisambigMode::PerRating}) {
      const auto corr =
          checked([&] { return correlate_disambiguation(dataset, ensemble.scores, mode); }, name,
                  ensemble.scores.size());
      body += report_line(mode == DisambigMode::Averaged ? "disambig_a_spearman"
                                                           : "disambig_b_spearman",
                            name, corr, run, notes);
    }
  }
  inv.stage = "write";
  if (!run.dump.empty()) write_file_atomic(run.dump, score_dump_text(ensemble.scores));
  emit(run.report, report + notes + body, out);
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

// alpha from whatever features fire: unknown tokens contribute nothing.
double query_alpha(const PhraseModel& model, const std::string& verb, const std::string& object,
                   std::ostream& err) {
  const auto v = model.lexicon.find_verb(verb);
  const auto o = model.lexicon.find_noun(object);
  if (v && o) return phrase_alpha(model, *v, *o);
  if (!v) err << "score: unknown verb '" << verb << "', its features do not fire\n";
  if (!o) err << "score: unknown object '" << object << "', its features do not fire\n";
  const auto phi = model.features.featurize(v, o, model.lexicon, model.candidates);
  return score_alpha(phi, model.params.scorer);
}

void cmd_score(Invocation& inv, std::ostream& out, std::ostream& err) {
  resolve(inv);
  const RunConfig& run = inv.run;
  require_file(require_model_path(run), "model file");
  if (inv.positionals.empty()) throw ConfigError("score needs at least one \"verb object\" phrase");
  std::vector<std::pair<std::string, std::string>> phrases;
  for (const auto& p : inv.positionals) {
    const auto w = words(p);
    if (w.size() != 2) throw ConfigError("expected \"verb object\", got '" + p + "'");
    phrases.emplace_back(w[0], w[1]);
  }
  inv.stage = "load";
  const PhraseModel model = load_model(run.model);
  inv.stage = "score";
  std::string report = report_header(inv.values, inv.keys, model.params.seed);
  report += "phrase\talpha\n";
  for (const auto& [verb, object] : phrases) {
    report += verb + " " + object + "\t" + format_2dp(query_alpha(model, verb, object, err)) + "\n";
  }
  emit(run.report, report, out);
}

std::vector<PoolEntry> load_pool(const PhraseModel& model, const std::filesystem::path& path,
                                 bool svo) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pool file: " + path.string());
  std::vector<PoolEntry> pool;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> w;
    for (const auto f : split_tabs(line)) w.emplace_back(f);
    if (w.size() == 1) w = words(w.front());
    const std::size_t want = svo ? 3 : 2;
    if (w.size() != want) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(want) + " tokens");
    }
    std::string key = w[0];
    for (std::size_t i = 1; i < w.size(); ++i) key += " " + w[i];
    auto vec = svo ? svo_vector(model, w[0], w[1], w[2]) : phrase_vector(model, w[0], w[1]);
    pool.push_back({std::move(key), std::move(vec)});
  }
  return pool;
}

void cmd_neighbors(Invocation& inv, std::ostream& out, std::ostream& /*err*/) {
  resolve(inv);
  const RunConfig& run = inv.run;
  require_file(require_model_path(run), "model file");
  if (inv.positionals.size() != 1) {
    throw ConfigError("neighbors needs one query: \"verb object\" or \"subject verb object\"");
  }
  const auto query = words(inv.positionals.front());
  if (query.size() != 2 && query.size() != 3) {
    throw ConfigError("query must be \"verb object\" or \"subject verb object\"");
  }
  const bool svo = query.size() == 3;
  if (svo && run.pool.empty()) throw ConfigError("an SVO query needs --pool with SVO entries");
  if (!run.pool.empty()) require_file(run.pool, "pool file");
  if (run.k == 0) throw ConfigError("k must be >= 1");

  inv.stage = "load";
  const PhraseModel model = load_model(run.model);
  inv.stage = "neighbors";
  const auto vec = svo ? svo_vector(model, query[0], query[1], query[2])
                       : phrase_vector(model, query[0], query[1]);
  std::string key = query[0];
  for (std::size_t i = 1; i < query.size(); ++i) key += " " + query[i];
  const auto pool = run.pool.empty() ? candidate_pool(model) : load_pool(model, run.pool, svo);
  if (pool.empty()) throw EvalError("neighbor pool is empty");
  const auto neighbors = nearest_neighbors(vec, key, pool, run.k);

  std::string report = report_header(inv.values, inv.keys, model.params.seed);
  report += "# query=" + key + "\n";
  report += "neighbor\tsimilarity\n";
  for (const auto& n : neighbors) report += n.key + "\t" + fixed(n.similarity, 6) + "\n";
  emit(run.report, report, out);
}

void cmd_export(Invocation& inv, std::ostream& out, std::ostream& /*err*/) {
  resolve(inv);
  const RunConfig& run = inv.run;
  require_file(require_model_path(run), "model file");
  inv.stage = "load";
  const PhraseModel model = load_model(run.model);
  inv.stage = "export";
  std::ostringstream text;
  text << report_header(inv.values, inv.keys, model.params.seed);
  export_text(model, text);
  emit(run.output, text.str(), out);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const LookupError*>(&e)) {
    return kExitUsage;
  }
  return kExitInternal;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"adaptive joint learning of compositional and non-compositional phrase embeddings",
               "adaphrase"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  struct Command {
    std::string name;
    std::string help;
    KeyList keys;
    void (*run)(Invocation&, std::ostream&, std::ostream&);
    std::string positional;  // empty: none
    std::string positional_help;
  };
  const std::vector<Command> commands = {
      {"train", "ingest tuples, train and save a model", kTrainKeys, cmd_train, "", ""},
      {"grid", "train over a learning-rate x l2 grid and keep the best dev score", grid_keys(),
       cmd_grid, "", ""},
      {"eval", "correlate a model with rating datasets", kEvalKeys, cmd_eval, "", ""},
      {"ensemble", "average score dumps and correlate with a rating dataset", kEnsembleKeys,
       cmd_ensemble, "dumps", "score dump files"},
      {"score", "print alpha for phrases", kScoreKeys, cmd_score, "phrases",
       "phrases as \"verb object\""},
      {"neighbors", "list the closest phrases to a query", kNeighborKeys, cmd_neighbors, "query",
       "\"verb object\" or \"subject verb object\""},
      {"export", "write model parameters as text", kExportKeys, cmd_export, "", ""},
  };

  std::vector<Invocation> invocations(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto* sub = app.add_subcommand(commands[i].name, commands[i].help);
    invocations[i].keys = commands[i].keys;
    bind_keys(sub, invocations[i]);
    if (!commands[i].positional.empty()) {
      sub->add_option(commands[i].positional, invocations[i].positionals,
                      commands[i].positional_help);
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    Invocation& inv = invocations[i];
    try {
      commands[i].run(inv, out, err);
      return kExitOk;
    } catch (const std::exception& e) {
      err << "adaphrase " << commands[i].name << ": " << inv.stage << ": " << e.what() << '\n';
      return exit_code_for(e);
    }
  }
  return kExitUsage;
}

}  // namespace adaphrase
