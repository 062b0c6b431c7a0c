#include "hpm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

#include "hpm/csv.hpp"
#include "hpm/rng.hpp"

namespace hpm {

namespace {

constexpr std::size_t kSkatersOnIce = 5;

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  }
}

struct Roster {
  std::vector<std::string> goalies;
  std::vector<std::string> skaters;
  std::vector<double> line_weights;  // one per complete trio
};

// Top lines skate more: weights 1, 1/2, 1/3, ...
std::vector<double> trio_weights(std::size_t n_skaters) {
  std::vector<double> w(n_skaters / 3);
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = 1.0 / static_cast<double>(k + 1);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= total;
  return w;
}

std::size_t pick_weighted(Rng& rng, const std::vector<double>& weights) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return k;
  }
  return weights.size() - 1;
}

// `count` distinct indices from [0, n) not in `taken`, by partial shuffle.
void sample_distinct(Rng& rng, std::size_t n, std::size_t count, std::vector<std::size_t>& taken) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::find(taken.begin(), taken.end(), i) == taken.end()) pool.push_back(i);
  }
  for (std::size_t k = 0; k < count && k < pool.size(); ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.below(pool.size() - k));
    std::swap(pool[k], pool[pick]);
    taken.push_back(pool[k]);
  }
}

std::vector<std::string> lineup(Rng& rng, const Roster& roster, std::size_t on_ice,
                                bool with_goalie, double line_strength) {
  std::vector<std::string> out;
  if (with_goalie) {
    // Starter plays most games.
    const std::size_t g =
        roster.goalies.size() == 1 || rng.bernoulli(0.75)
            ? 0
            : 1 + static_cast<std::size_t>(rng.below(roster.goalies.size() - 1));
    out.push_back(roster.goalies[g]);
  }
  const std::size_t skaters = on_ice - (with_goalie ? 1 : 0);
  std::vector<std::size_t> taken;
  if (!roster.line_weights.empty() && rng.bernoulli(line_strength)) {
    const std::size_t trio = pick_weighted(rng, roster.line_weights);
    for (std::size_t k = 0; k < 3 && taken.size() < skaters; ++k) taken.push_back(3 * trio + k);
  }
  sample_distinct(rng, roster.skaters.size(), skaters - taken.size(), taken);
  for (std::size_t i : taken) out.push_back(roster.skaters[i]);
  return out;
}

double sum_effects(const std::vector<std::string>& players,
                   const std::map<std::string, double>& effects) {
  double s = 0.0;
  for (const auto& p : players) {
    if (const auto it = effects.find(p); it != effects.end()) s += it->second;
  }
  return s;
}

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

std::string season_label(int first_year) {
  return std::to_string(first_year) + "-" + std::to_string(first_year + 1);
}

std::string team_code(std::size_t team) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "T%02zu", team + 1);
  return buf;
}

std::string player_id(std::size_t team, std::size_t slot, bool goalie) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "T%02zu%c%02zu", team + 1, goalie ? 'G' : 'S', slot + 1);
  return buf;
}

void SynthConfig::validate() const {
  if (n_teams < 2) throw std::invalid_argument("n_teams must be at least 2");
  if (goalies_per_team < 1) throw std::invalid_argument("goalies_per_team must be at least 1");
  if (players_per_team < goalies_per_team + kSkatersOnIce + 1) {
    throw std::invalid_argument("players_per_team must leave at least 6 skaters");
  }
  if (n_seasons < 1) throw std::invalid_argument("n_seasons must be at least 1");
  if (n_events < 1) throw std::invalid_argument("n_events must be at least 1");
  double total = 0.0;
  for (double f : scenario_frequency) {
    require_probability(f, "scenario_frequency");
    total += f;
  }
  if (total > 1.0) throw std::invalid_argument("scenario frequencies sum above 1");
  require_probability(pulled_goalie_frequency, "pulled_goalie_frequency");
  require_probability(line_strength, "line_strength");
  require_probability(playoff_fraction, "playoff_fraction");
  double type_total = 0.0;
  for (double w : type_weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("type weights must be nonnegative");
    type_total += w;
  }
  if (!(type_total > 0.0)) throw std::invalid_argument("type weights must not all be zero");
  if (!(team_effect_sd >= 0.0)) throw std::invalid_argument("team_effect_sd must be >= 0");
  if (!(planted_magnitude >= 0.0)) throw std::invalid_argument("planted_magnitude must be >= 0");
  const std::size_t skaters = n_teams * (players_per_team - goalies_per_team);
  if (n_planted > skaters) throw std::invalid_argument("n_planted exceeds the skater count");
}

SynthConfig SynthConfig::from_kv(const std::map<std::string, std::string>& kv) {
  SynthConfig c;
  const auto num = [](const std::string& key, const std::string& v) {
    return csv::parse_double(v, 0, key);
  };
  const auto count = [](const std::string& key, const std::string& v) {
    const auto n = csv::parse_int(v, 0, key);
    if (n < 0) throw std::invalid_argument(key + " must be nonnegative");
    return static_cast<std::size_t>(n);
  };
  static const std::array<std::string, kScenarioCount> freq_keys{
      "freq_6v5", "freq_6v4", "freq_6v3", "freq_5v4", "freq_5v3", "freq_4v3"};
  static const std::array<std::string, 4> type_keys{"weight_goal", "weight_shot", "weight_miss",
                                                    "weight_block"};
  for (const auto& [key, value] : kv) {
    if (key == "n_teams") c.n_teams = count(key, value);
    else if (key == "players_per_team") c.players_per_team = count(key, value);
    else if (key == "goalies_per_team") c.goalies_per_team = count(key, value);
    else if (key == "n_seasons") c.n_seasons = count(key, value);
    else if (key == "first_season") c.first_season = static_cast<int>(csv::parse_int(value, 0, key));
    else if (key == "true_alpha") c.true_alpha = num(key, value);
    else if (key == "n_planted") c.n_planted = count(key, value);
    else if (key == "planted_magnitude") c.planted_magnitude = num(key, value);
    else if (key == "team_effect_sd") c.team_effect_sd = num(key, value);
    else if (key == "special_effect") c.special_effect = num(key, value);
    else if (key == "pulled_goalie_frequency") c.pulled_goalie_frequency = num(key, value);
    else if (key == "line_strength") c.line_strength = num(key, value);
    else if (key == "playoff_fraction") c.playoff_fraction = num(key, value);
    else if (key == "n_events") c.n_events = count(key, value);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(csv::parse_int(value, 0, key));
    else if (key == "planted") {
      // "id:value;id:value"
      for (auto item : csv::split(value, ';')) {
        if (item.empty()) continue;
        const auto colon = item.rfind(':');
        if (colon == std::string_view::npos) {
          throw std::invalid_argument("planted entries must be id:value");
        }
        c.player_effects[std::string(item.substr(0, colon))] =
            csv::parse_double(item.substr(colon + 1), 0, "planted");
      }
    } else {
      bool matched = false;
      for (std::size_t k = 0; k < freq_keys.size(); ++k) {
        if (key == freq_keys[k]) c.scenario_frequency[k] = num(key, value), matched = true;
      }
      for (std::size_t k = 0; k < type_keys.size(); ++k) {
        if (key == type_keys[k]) c.type_weights[k] = num(key, value), matched = true;
      }
      if (!matched) throw std::invalid_argument("unknown simulation setting '" + key + "'");
    }
  }
  c.validate();
  return c;
}

std::map<std::string, std::string> read_kv(const std::string& text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  for (auto raw : csv::split(text, '\n')) {
    ++line_no;
    auto line = csv::chomp(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto trim = [](std::string_view s) {
      const auto b = s.find_first_not_of(" \t");
      if (b == std::string_view::npos) return std::string_view{};
      const auto e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    auto key = std::string(trim(line.substr(0, eq)));
    auto value = std::string(trim(line.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    std::replace(key.begin(), key.end(), '-', '_');
    out[key] = value;
  }
  return out;
}

std::string GroundTruth::truth_csv() const {
  std::string out = "term,block,value\n";
  out += "alpha,intercept," + csv::exact(alpha) + "\n";
  for (const auto& [key, v] : team_effects) {
    out += key.first + "|" + key.second + ",team_season," + csv::exact(v) + "\n";
  }
  for (const auto& [code, v] : special_effects) out += code + ",special," + csv::exact(v) + "\n";
  for (const auto& [p, v] : player_effects) out += p + ",player," + csv::exact(v) + "\n";
  return out;
}

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  SynthOutput out;
  auto& truth = out.truth;
  truth.alpha = config.true_alpha;

  std::vector<Roster> rosters(config.n_teams);
  std::vector<std::string> all_skaters;
  std::set<std::string> known;
  for (std::size_t t = 0; t < config.n_teams; ++t) {
    auto& r = rosters[t];
    for (std::size_t g = 0; g < config.goalies_per_team; ++g) {
      r.goalies.push_back(player_id(t, g, true));
    }
    for (std::size_t s = 0; s < config.players_per_team - config.goalies_per_team; ++s) {
      r.skaters.push_back(player_id(t, s, false));
      all_skaters.push_back(r.skaters.back());
    }
    r.line_weights = trio_weights(r.skaters.size());
    known.insert(r.goalies.begin(), r.goalies.end());
    known.insert(r.skaters.begin(), r.skaters.end());
  }

  std::vector<std::string> seasons;
  for (std::size_t s = 0; s < config.n_seasons; ++s) {
    seasons.push_back(season_label(config.first_season + static_cast<int>(s)));
  }
  for (std::size_t t = 0; t < config.n_teams; ++t) {
    for (const auto& season : seasons) {
      const double effect = config.team_effect_sd > 0.0 ? config.team_effect_sd * rng.normal() : 0.0;
      truth.team_effects[{team_code(t), season}] = effect;
    }
  }

  for (const auto& [p, v] : config.player_effects) {
    if (!known.count(p)) throw std::invalid_argument("planted player '" + p + "' not on any roster");
    truth.player_effects[p] = v;
  }
  {
    std::vector<std::string> pool;
    for (const auto& p : all_skaters) {
      if (!truth.player_effects.count(p)) pool.push_back(p);
    }
    const std::size_t n = std::min(config.n_planted, pool.size());
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t pick = k + static_cast<std::size_t>(rng.below(pool.size() - k));
      std::swap(pool[k], pool[pick]);
      // Alternate signs so the planted set is balanced.
      truth.player_effects[pool[k]] = (k % 2 == 0 ? 1.0 : -1.0) * config.planted_magnitude;
    }
  }
  if (config.special_effect != 0.0) {
    for (std::size_t k = 0; k < kScenarioCount; ++k) {
      if (config.scenario_frequency[k] > 0.0) {
        truth.special_effects[std::string(to_string(static_cast<ScenarioCode>(k + 1)))] =
            config.special_effect;
      }
    }
  }

  const double type_total =
      std::accumulate(config.type_weights.begin(), config.type_weights.end(), 0.0);
  std::vector<double> type_probs;
  for (double w : config.type_weights) type_probs.push_back(w / type_total);

  out.events.reserve(config.n_events);
  for (std::size_t i = 0; i < config.n_events; ++i) {
    EventRecord e;
    const std::size_t s = static_cast<std::size_t>(rng.below(seasons.size()));
    const std::size_t home = static_cast<std::size_t>(rng.below(config.n_teams));
    std::size_t away = static_cast<std::size_t>(rng.below(config.n_teams - 1));
    if (away >= home) ++away;
    e.season = seasons[s];
    e.home_team = team_code(home);
    e.away_team = team_code(away);
    e.playoffs = config.playoff_fraction > 0.0 && rng.bernoulli(config.playoff_fraction);

    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k < kScenarioCount; ++k) {
      acc += config.scenario_frequency[k];
      if (u < acc) {
        e.scenario.code = static_cast<ScenarioCode>(k + 1);
        break;
      }
    }
    if (e.scenario.code != ScenarioCode::Even) {
      e.scenario.advantaged_side = rng.bernoulli(0.5) ? Side::Home : Side::Away;
    }
    if (config.pulled_goalie_frequency > 0.0 && rng.bernoulli(config.pulled_goalie_frequency)) {
      e.goalie_pulled = rng.bernoulli(0.5) ? Side::Home : Side::Away;
    }

    auto [adv, dis] = manpower(e.scenario.code);
    std::size_t home_n = static_cast<std::size_t>(adv), away_n = static_cast<std::size_t>(dis);
    if (e.scenario.advantaged_side == Side::Away) std::swap(home_n, away_n);
    e.home_players = lineup(rng, rosters[home], home_n, e.goalie_pulled != Side::Home,
                            config.line_strength);
    e.away_players = lineup(rng, rosters[away], away_n, e.goalie_pulled != Side::Away,
                            config.line_strength);

    e.event_type = static_cast<EventType>(pick_weighted(rng, type_probs));

    double eta = truth.alpha + truth.team_effects[{e.home_team, e.season}] -
                 truth.team_effects[{e.away_team, e.season}];
    if (e.scenario.code != ScenarioCode::Even) {
      const auto it = truth.special_effects.find(std::string(to_string(e.scenario.code)));
      if (it != truth.special_effects.end()) {
        eta += (e.scenario.advantaged_side == Side::Home ? 1.0 : -1.0) * it->second;
      }
    }
    eta += sum_effects(e.home_players, truth.player_effects) -
           sum_effects(e.away_players, truth.player_effects);
    e.by_side = rng.bernoulli(logistic(eta)) ? Side::Home : Side::Away;

    ++truth.type_counts[static_cast<std::size_t>(e.event_type)];
    const bool home_for = e.by_side == Side::Home;
    for (const auto& p : e.home_players) {
      auto& t = truth.tallies[{p, e.season}];
      (home_for ? t.first : t.second) += 1;
    }
    for (const auto& p : e.away_players) {
      auto& t = truth.tallies[{p, e.season}];
      (home_for ? t.second : t.first) += 1;
    }
    out.events.push_back(std::move(e));
  }
  return out;
}

}  // namespace hpm
