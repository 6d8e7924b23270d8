// elsa: build LSA semantic spaces and answer multiple choice questionnaires.

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <tuple>

#include "elsa/cli.hpp"

namespace {

using elsa::cli::Settings;

struct Overrides {
  Settings values;
  std::string config_path;
};

/// Registers the shared flags on a subcommand. Values land in `o.values`
/// under config-file key names, so command-line flags override the file.
void add_shared_flags(CLI::App* cmd, Overrides& o) {
  auto text = [&](const std::string& flag, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [&o, key](const std::string& v) { o.values[key] = v; }, help);
  };
  auto toggle = [&](const std::string& flag, const std::string& key, bool negate,
                    const std::string& help) {
    cmd->add_flag_function(
        flag, [&o, key, negate](std::int64_t count) {
          o.values[key] = ((count > 0) != negate) ? "true" : "false";
        },
        help);
  };

  cmd->add_option("--config", o.config_path, "flat key = value configuration file");
  text("--corpus", "corpus", "corpus file or directory of .txt documents");
  text("--mcq", "mcq", "multiple choice questionnaire file");
  text("--rules", "rules", "suffix-pair rule file");
  text("--exceptions", "exceptions", "lemmatization exception pairs");
  text("--stoplist", "stoplist", "stop-list file (one word per line)");
  text("--k", "k", "semantic space dimensionality, or 'full'");
  text("--min-stem", "min_stem", "minimum stem length for suffix rules");
  text("--local", "local", "local weighting: log1p or raw");
  text("--global", "global", "global weighting: entropy or none");
  text("--out", "out", "output directory");
  text("--locale", "locale", "decimal separator: point or comma");
  toggle("--titles", "titles", false, "include document titles");
  toggle("--doc-norm", "doc_norm", false, "unit-norm document columns before weighting");
  toggle("--freq-norm", "freq_norm", false, "normalize document frequencies to sum to 1");
  toggle("--no-joint-lemma", "joint_lemma", true, "lemmatize the corpus vocabulary alone");
  toggle("--no-3set", "three_set", true, "weight answers with corpus weights instead of 3-set entropy");
  toggle("--no-stoplist", "use_stoplist", true, "do not remove stop words");
  toggle("--no-timestamp", "timestamp", true, "omit the timestamp header in outputs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"elsa: tunable LSA semantic spaces for multiple choice questions"};
  app.require_subcommand(1);

  using Command = std::function<int(const elsa::cli::ProjectConfig&, std::ostream&, std::ostream&)>;
  std::map<CLI::App*, Command> commands;
  Overrides overrides;

  auto* build = app.add_subcommand("build-space", "build and save the semantic space with corpus statistics");
  add_shared_flags(build, overrides);
  build->add_flag_function("--dump-matrix", [&](std::int64_t) { overrides.values["dump_matrix"] = "true"; },
                           "also write the term-document counts as triplets");
  commands[build] = elsa::cli::cmd_build_space;

  auto* answer = app.add_subcommand("answer", "answer the questionnaire and write verdicts");
  add_shared_flags(answer, overrides);
  commands[answer] = elsa::cli::cmd_answer;

  auto* scan = app.add_subcommand("scan-dims", "score every dimensionality k");
  add_shared_flags(scan, overrides);
  for (auto [flag, key, help] : {std::tuple{"--k-min", "k_min", "smallest k to score (default 1)"},
                                  {"--k-max", "k_max", "largest k to score (default: rank)"},
                                  {"--stride", "stride", "step between scored values of k"}}) {
    scan->add_option_function<std::string>(
        flag, [&, key = std::string(key)](const std::string& v) { overrides.values[key] = v; }, help);
  }
  commands[scan] = elsa::cli::cmd_scan_dims;

  auto* abl = app.add_subcommand("ablate", "unset one parameter at a time from the best setting");
  add_shared_flags(abl, overrides);
  commands[abl] = elsa::cli::cmd_ablate;

  auto* stop = app.add_subcommand("stoplist-suggest", "rank stop-word candidates by entropy weight");
  add_shared_flags(stop, overrides);
  stop->add_option_function<std::string>("--n", [&](const std::string& v) { overrides.values["n"] = v; },
                                         "number of candidates");
  commands[stop] = elsa::cli::cmd_stoplist_suggest;

  auto* corr = app.add_subcommand("correlate", "correlate answer angles with choice frequencies");
  add_shared_flags(corr, overrides);
  corr->add_option_function<std::string>("--choices", [&](const std::string& v) { overrides.values["choices"] = v; },
                                         "CSV question_id,answer_index,frequency");
  commands[corr] = elsa::cli::cmd_correlate;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : elsa::cli::kExitConfig;
  }

  try {
    Settings settings;
    if (!overrides.config_path.empty()) settings = elsa::cli::load_settings(overrides.config_path);
    for (const auto& [key, value] : overrides.values) settings[key] = value;
    const auto config = elsa::cli::ProjectConfig::from_settings(settings);
    for (const auto& [cmd, run] : commands) {
      if (cmd->parsed()) return run(config, std::cout, std::cerr);
    }
  } catch (const elsa::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return elsa::cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return elsa::cli::kExitPipeline;
  }
  return elsa::cli::kExitConfig;
}
