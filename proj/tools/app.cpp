#include "app.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "hpm/csv.hpp"
#include "hpm/design.hpp"
#include "hpm/events.hpp"
#include "hpm/metrics.hpp"
#include "hpm/selection.hpp"
#include "hpm/solver.hpp"
#include "hpm/synth.hpp"

#ifndef HPM_VERSION
#define HPM_VERSION "0.0.0"
#endif

namespace hpm::app {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kFitManifest = "manifest.json";
constexpr const char* kRankManifest = "rank_manifest.json";
constexpr const char* kSimulateManifest = "simulate_manifest.json";
constexpr const char* kDefaultBins = "0,500000,1000000,2000000,4000000,8000000,16000000";

struct Settings {
  std::vector<std::pair<std::string, std::string>> values;

  void add(const std::string& key, const std::string& value) { values.emplace_back(key, value); }
  void add(const std::string& key, double value) { add(key, csv::exact(value)); }
  void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
  void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
};

struct FitArgs {
  std::string events;
  std::string out_dir = ".";
  std::string response = "goal";
  std::string selection = "aicc";
  std::string model = "full";
  std::string k_rule = "with_unpenalized";
  std::size_t folds = 5;
  bool cv_1se = false;
  std::size_t nlambda = 100;
  double lambda_min_ratio = 0.01;
  double tol = 1e-9;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct RankArgs {
  std::string fit_dir;
  std::string events;
  std::string out_dir;
  std::string salaries;
  std::string names;
  std::string salary_bins = kDefaultBins;
  std::size_t top = 25;
  std::size_t bottom = 20;
};

struct SimulateArgs {
  std::string config;
  std::string out_dir = ".";
  std::string seed;
};

struct ValidateArgs {
  std::string events;
};

struct ReplayArgs {
  std::string manifest;
  std::string out_dir;
  std::string threads;
};

Json file_entry(const std::string& path) {
  return Json{{"path", path}, {"fnv1a64", hex64(fnv1a64(read_file(path)))}};
}

Json settings_json(const Settings& s) {
  Json j = Json::object();
  for (const auto& [k, v] : s.values) j[k] = v;
  return j;
}

void write_manifest(const fs::path& path, const std::string& command, const Json& inputs,
                    const Settings& settings, Json extra = Json::object()) {
  Json m;
  m["tool"] = "hpm";
  m["version"] = HPM_VERSION;
  m["command"] = command;
  m["inputs"] = inputs;
  m["settings"] = settings_json(settings);
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_file(path.string(), m.dump(2) + "\n");
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path + ": invalid JSON: " + e.what());
  }
}

DesignOptions model_options(const std::string& model, bool has_seasons) {
  if (model == "players") return DesignOptions::players_only();
  DesignOptions o = DesignOptions::full();
  o.player_season = has_seasons;
  return o;
}

std::vector<EventRecord> load_events(const std::string& path, ResponseKind kind,
                                     std::ostream& err) {
  std::vector<std::string> warnings;
  auto events = parse_events_file(path, ParseOptions{&warnings});
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  auto kept = filter_by_response(events, kind);
  if (kept.empty()) {
    throw std::runtime_error(path + ": no " + std::string(to_string(kind)) + " events");
  }
  return kept;
}

bool multi_season(const std::vector<EventRecord>& events) {
  for (const auto& e : events) {
    if (e.season != events.front().season) return true;
  }
  return false;
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  const auto events = parse_events_file(a.events, ParseOptions{&warnings});
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  std::array<std::size_t, 4> types{};
  std::set<std::string> players, seasons, teams;
  std::size_t playoff = 0;
  for (const auto& e : events) {
    ++types[static_cast<std::size_t>(e.event_type)];
    seasons.insert(e.season);
    teams.insert(e.home_team);
    teams.insert(e.away_team);
    players.insert(e.home_players.begin(), e.home_players.end());
    players.insert(e.away_players.begin(), e.away_players.end());
    playoff += e.playoffs;
  }
  out << "rows: " << events.size() << "\n";
  for (std::size_t t = 0; t < types.size(); ++t) {
    out << to_string(static_cast<EventType>(t)) << ": " << types[t] << "\n";
  }
  for (auto kind : {ResponseKind::Goal, ResponseKind::Fenwick, ResponseKind::Corsi}) {
    std::size_t n = 0;
    for (const auto& e : events) n += included_in(e.event_type, kind);
    out << to_string(kind) << "_rows: " << n << "\n";
  }
  out << "playoff_rows: " << playoff << "\n";
  out << "players: " << players.size() << "\n";
  out << "teams: " << teams.size() << "\n";
  out << "seasons: " << seasons.size() << "\n";
  out << "warnings: " << warnings.size() << "\n";
  return 0;
}

std::string coefs_csv(const SingleFit& fit, const ColumnCatalog& catalog) {
  std::string out = "col_index,block,term,value\n";
  out += "-1,intercept,intercept," + csv::exact(fit.alpha) + "\n";
  for (std::size_t j = 0; j < fit.beta.size(); ++j) {
    out += std::to_string(j) + "," + std::string(to_string(catalog.block_of(j))) + "," +
           catalog.label(j) + "," + csv::exact(fit.beta[j]) + "\n";
  }
  return out;
}

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const auto kind = parse_response_kind(a.response);
  const auto events = load_events(a.events, kind, err);
  const auto catalog = build_catalog(events, model_options(a.model, multi_season(events)));
  const auto build = build_design(events, catalog);
  const auto penalty = PenaltySpec::for_catalog(catalog);
  const std::size_t n = build.matrix.n_rows();
  if (const auto j = one_signed_column(build.matrix, build.y, penalty)) {
    throw std::runtime_error(
        *j == static_cast<std::size_t>(-1)
            ? std::string("every event was produced by the same side")
            : "events involving '" + catalog.label(*j) +
                  "' all favor one side; the unpenalized model has no finite fit");
  }

  FitConfig cfg;
  cfg.n_lambda = a.nlambda;
  cfg.lambda_min_ratio = a.lambda_min_ratio;
  cfg.tol = a.tol;
  cfg.validate();
  const auto path = fit_path(build.matrix, build.y, penalty, cfg);

  SelectionResult sel;
  if (a.selection == "cv") {
    const auto splits = make_folds(n, a.folds, a.seed);
    sel = cross_validate(build.matrix, build.y, penalty, cfg, path.lambdas, splits,
                         CvOptions{a.cv_1se, a.threads});
    for (const auto& w : sel.warnings) err << "warning: " << w << "\n";
  } else {
    sel = select_aicc(path, n,
                      a.k_rule == "nonzero_only" ? KRule::NonzeroOnly : KRule::WithUnpenalized);
  }

  double worst_kkt = 0.0;
  std::size_t violations = 0;
  for (const auto& f : path.fits) {
    const auto report = kkt_check(f, build.matrix, build.y, penalty, 1e-6 * static_cast<double>(n));
    worst_kkt = std::max(worst_kkt, report.max_residual);
    violations += report.violations.size();
  }
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!path.fits[i].converged) err << "warning: lambda index " << i << " hit the sweep limit\n";
  }

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  std::string path_text = "index,lambda,deviance,k,n_penalized,criterion,criterion_se,converged\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto& f = path.fits[i];
    path_text += std::to_string(i) + "," + csv::exact(path.lambdas[i]) + "," +
                 csv::exact(f.deviance()) + "," + std::to_string(f.n_nonzero) + "," +
                 std::to_string(f.n_nonzero_penalized) + "," + csv::exact(sel.criterion[i]) + "," +
                 (sel.cv_se.empty() ? std::string() : csv::exact(sel.cv_se[i])) + "," +
                 (f.converged ? "1" : "0") + "\n";
  }
  write_file((dir / "path.csv").string(), path_text);
  const auto& chosen = path.fits[sel.chosen_index];
  write_file((dir / "coefs.csv").string(), coefs_csv(chosen, catalog));
  write_file((dir / "catalog.csv").string(), catalog.to_csv());
  std::string sel_text = "method,chosen_index,lambda,criterion,k,deviance,skipped_folds\n";
  sel_text += std::string(to_string(sel.method)) + "," + std::to_string(sel.chosen_index) + "," +
              csv::exact(path.lambdas[sel.chosen_index]) + "," +
              csv::exact(sel.criterion[sel.chosen_index]) + "," +
              std::to_string(chosen.n_nonzero) + "," + csv::exact(chosen.deviance()) + "," +
              std::to_string(sel.skipped_folds.size()) + "\n";
  write_file((dir / "selection.csv").string(), sel_text);

  Settings s;
  s.add("events", a.events);
  s.add("response", a.response);
  s.add("model", a.model);
  s.add("selection", a.selection);
  s.add("k-rule", a.k_rule);
  s.add("folds", a.folds);
  s.add("cv-1se", a.cv_1se);
  s.add("nlambda", a.nlambda);
  s.add("lambda-min-ratio", a.lambda_min_ratio);
  s.add("tol", a.tol);
  s.add("seed", std::to_string(a.seed));
  s.add("threads", std::to_string(a.threads));
  s.add("out-dir", a.out_dir);
  Json extra;
  extra["catalog_hash"] = hex64(catalog.hash());
  extra["rows"] = n;
  extra["columns"] = catalog.total_cols();
  extra["kkt"] = Json{{"tolerance", 1e-6 * static_cast<double>(n)},
                      {"max_residual", worst_kkt},
                      {"violations", violations}};
  write_manifest(dir / kFitManifest, "fit", Json{{"events", file_entry(a.events)}}, s, extra);

  out << "rows: " << n << ", columns: " << catalog.total_cols() << "\n";
  out << "selected index " << sel.chosen_index << " of " << path.size() << " ("
      << to_string(sel.method) << "), lambda " << csv::exact(path.lambdas[sel.chosen_index])
      << ", k " << chosen.n_nonzero << "\n";
  out << "kkt: " << (violations == 0 ? "clean" : std::to_string(violations) + " violations")
      << ", max residual " << csv::exact(worst_kkt) << "\n";
  return 0;
}

SingleFit read_coefs(const std::string& path, const ColumnCatalog& catalog) {
  const auto t = csv::read_table_file(path, {"col_index", "block", "term", "value"});
  SingleFit fit;
  fit.beta.assign(catalog.total_cols(), 0.0);
  std::vector<bool> seen(catalog.total_cols(), false);
  bool intercept = false;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto line = t.line_numbers[r];
    const long long index = csv::parse_int(row[0], line, "col_index");
    const double value = csv::parse_double(row[3], line, "value");
    if (index == -1) {
      fit.alpha = value;
      intercept = true;
      continue;
    }
    if (index < 0 || static_cast<std::size_t>(index) >= catalog.total_cols()) {
      throw ParseError(line, "column index outside the catalog");
    }
    const auto j = static_cast<std::size_t>(index);
    if (row[2] != catalog.label(j) || row[1] != to_string(catalog.block_of(j))) {
      throw ParseError(line, "term '" + row[2] + "' does not match catalog column " + row[0]);
    }
    fit.beta[j] = value;
    seen[j] = true;
  }
  if (!intercept || std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw std::runtime_error(path + ": coefficient file is missing rows");
  }
  return fit;
}

std::vector<double> parse_bins(const std::string& text) {
  std::vector<double> edges;
  for (auto field : csv::split(text, ',')) edges.push_back(csv::parse_double(field, 0, "salary-bins"));
  return edges;
}

int cmd_rank(const RankArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path fit_dir(a.fit_dir);
  const auto manifest = read_json((fit_dir / kFitManifest).string());
  const auto& fit_settings = manifest.at("settings");
  const std::string events_path =
      a.events.empty() ? fit_settings.at("events").get<std::string>() : a.events;
  const auto kind = parse_response_kind(fit_settings.at("response").get<std::string>());
  const auto events = load_events(events_path, kind, err);
  const auto catalog = build_catalog(
      events, model_options(fit_settings.at("model").get<std::string>(), multi_season(events)));
  const auto expected = manifest.at("catalog_hash").get<std::string>();
  if (hex64(catalog.hash()) != expected) {
    throw std::runtime_error("catalog hash mismatch: events give " + hex64(catalog.hash()) +
                             ", fit was made with " + expected);
  }
  if (read_file((fit_dir / "catalog.csv").string()) != catalog.to_csv()) {
    throw std::runtime_error("catalog.csv in " + a.fit_dir + " does not match the events");
  }
  const auto fit = read_coefs((fit_dir / "coefs.csv").string(), catalog);
  const SalaryTable salaries = a.salaries.empty() ? SalaryTable{} : read_salaries(a.salaries);
  const NameTable names = a.names.empty() ? NameTable{} : read_names(a.names);
  const auto metrics = assemble_metrics(fit, catalog, events, salaries);

  const fs::path dir(a.out_dir.empty() ? a.fit_dir : a.out_dir);
  fs::create_directories(dir);
  const auto rank_text = rank_csv(rank_table(metrics, a.top, a.bottom), names);
  const auto value_text = value_csv(value_rank(metrics, a.top), names);
  const auto hist_text = histogram_csv(effect_salary_histogram(metrics, parse_bins(a.salary_bins)));
  write_file((dir / "rank.csv").string(), rank_text);
  write_file((dir / "value.csv").string(), value_text);
  write_file((dir / "histogram.csv").string(), hist_text);
  const auto playoff = playoff_effects(fit, catalog);
  if (!playoff.empty()) write_file((dir / "playoff.csv").string(), playoff_csv(playoff, names));

  Settings s;
  s.add("fit-dir", a.fit_dir);
  s.add("events", events_path);
  s.add("top", a.top);
  s.add("bottom", a.bottom);
  s.add("salary-bins", a.salary_bins);
  if (!a.salaries.empty()) s.add("salaries", a.salaries);
  if (!a.names.empty()) s.add("names", a.names);
  s.add("out-dir", dir.string());
  Json inputs{{"events", file_entry(events_path)},
              {"coefs", file_entry((fit_dir / "coefs.csv").string())}};
  if (!a.salaries.empty()) inputs["salaries"] = file_entry(a.salaries);
  if (!a.names.empty()) inputs["names"] = file_entry(a.names);
  write_manifest(dir / kRankManifest, "rank", inputs, s,
                 Json{{"catalog_hash", expected}, {"player_seasons", metrics.size()}});

  out << "player-seasons: " << metrics.size() << "\n";
  out << "rank rows: " << count_lines(rank_text) - 1 << ", value rows: "
      << count_lines(value_text) - 1 << "\n";
  return 0;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream&) {
  auto kv = read_kv(read_file(a.config));
  if (!a.seed.empty()) kv["seed"] = a.seed;
  const auto config = SynthConfig::from_kv(kv);
  const auto gen = generate(config);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  std::ostringstream events;
  write_events(events, gen.events);
  write_file((dir / "events.csv").string(), events.str());
  write_file((dir / "truth.csv").string(), gen.truth.truth_csv());

  Settings s;
  s.add("config-file", a.config);
  if (!a.seed.empty()) s.add("seed", a.seed);
  s.add("out-dir", a.out_dir);
  write_manifest(dir / kSimulateManifest, "simulate", Json{{"config", file_entry(a.config)}}, s);
  out << "events: " << gen.events.size() << "\n";
  return 0;
}

// Settings live in the manifest as flag -> text; replay rebuilds the command
// line from them after checking that every input still hashes the same.
std::vector<std::string> replay_args(const ReplayArgs& a) {
  const auto m = read_json(a.manifest);
  const auto command = m.at("command").get<std::string>();
  for (const auto& [name, entry] : m.at("inputs").items()) {
    const auto path = entry.at("path").get<std::string>();
    const auto want = entry.at("fnv1a64").get<std::string>();
    const auto got = hex64(fnv1a64(read_file(path)));
    if (got != want) {
      throw std::runtime_error("input '" + name + "' (" + path + ") changed: hash " + got +
                               ", manifest has " + want);
    }
  }
  std::vector<std::string> args{command};
  for (const auto& [key, value] : m.at("settings").items()) {
    std::string v = value.get<std::string>();
    if (key == "out-dir" && !a.out_dir.empty()) v = a.out_dir;
    if (key == "threads" && !a.threads.empty()) v = a.threads;
    args.push_back("--" + key + "=" + v);
  }
  return args;
}

// Prepends `--key=value` for every entry of a --config file so that flags on
// the command line, which come later, take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  if (args.size() < 2) return args;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::vector<std::string> from_file;
  for (const auto& [key, value] : read_kv(read_file(path))) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    from_file.push_back("--" + flag + "=" + value);
  }
  args.insert(args.begin() + 1, from_file.begin(), from_file.end());
  return args;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regularized logistic regression player ratings from on-ice event data", "hpm"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", HPM_VERSION);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Parse an event file and report counts");
  validate->add_option("events,--events", va.events, "Event CSV")->required();

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit the lasso path and select a model");
  fit->add_option("events,--events", fa.events, "Event CSV")->required();
  fit->add_option("--out-dir", fa.out_dir, "Output directory")->capture_default_str();
  fit->add_option("--response", fa.response, "Event kinds used as the response")
      ->check(CLI::IsMember({"goal", "corsi", "fenwick"}))
      ->capture_default_str();
  fit->add_option("--model", fa.model, "full or players")
      ->check(CLI::IsMember({"full", "players"}))
      ->capture_default_str();
  fit->add_option("--selection", fa.selection, "aicc or cv")
      ->check(CLI::IsMember({"aicc", "cv"}))
      ->capture_default_str();
  fit->add_option("--k-rule", fa.k_rule, "AICc degrees of freedom rule")
      ->check(CLI::IsMember({"with_unpenalized", "nonzero_only"}))
      ->capture_default_str();
  fit->add_option("--folds", fa.folds, "Cross-validation folds")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  fit->add_flag("--cv-1se", fa.cv_1se, "One-standard-error rule for cross-validation");
  fit->add_option("--nlambda", fa.nlambda, "Path length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit->add_option("--lambda-min-ratio", fa.lambda_min_ratio, "Smallest lambda / lambda_max")
      ->capture_default_str();
  fit->add_option("--tol", fa.tol, "Relative objective tolerance")->capture_default_str();
  fit->add_option("--seed", fa.seed, "Fold assignment seed")->capture_default_str();
  fit->add_option("--threads", fa.threads, "Worker threads for cross-validation")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  RankArgs ra;
  auto* rank = app.add_subcommand("rank", "Player-season tables from a fit");
  rank->add_option("--fit-dir", ra.fit_dir, "Directory written by `hpm fit`")->required();
  rank->add_option("events,--events", ra.events, "Event CSV (default: the one the fit used)");
  rank->add_option("--out-dir", ra.out_dir, "Output directory (default: the fit directory)");
  rank->add_option("--salaries", ra.salaries, "CSV player,season,salary_usd");
  rank->add_option("--names", ra.names, "CSV player,display_name");
  rank->add_option("--top", ra.top, "Top rows; also the value table size")->capture_default_str();
  rank->add_option("--bottom", ra.bottom, "Bottom rows")->capture_default_str();
  rank->add_option("--salary-bins", ra.salary_bins, "Comma-separated histogram edges")
      ->capture_default_str();

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic season");
  simulate->add_option("config,--config-file", sa.config, "key = value generator settings")
      ->required();
  simulate->add_option("--out-dir", sa.out_dir, "Output directory")->capture_default_str();
  simulate->add_option("--seed", sa.seed, "Overrides the config seed");

  ReplayArgs pa;
  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("manifest", pa.manifest, "manifest.json")->required();
  replay->add_option("--out-dir", pa.out_dir, "Write outputs here instead");
  replay->add_option("--threads", pa.threads, "Override the thread count");

  try {
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*validate) return cmd_validate(va, out, err);
    if (*fit) return cmd_fit(fa, out, err);
    if (*rank) return cmd_rank(ra, out, err);
    if (*simulate) return cmd_simulate(sa, out, err);
    if (*replay) return run(replay_args(pa), out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace hpm::app
