#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hpm/events.hpp"
#include "hpm/metrics.hpp"

namespace hpm {

/// Generator settings for seasons drawn from the logistic on-ice model.
struct SynthConfig {
  std::size_t n_teams = 10;
  std::size_t players_per_team = 20;  // goalies included
  std::size_t goalies_per_team = 2;
  std::size_t n_seasons = 1;
  int first_season = 2002;  // labels "2002-2003", "2003-2004", ...

  double true_alpha = 0.1;
  /// Explicit planted effects by player id.
  std::map<std::string, double> player_effects;
  /// Additional randomly planted skaters with effect +/- planted_magnitude.
  std::size_t n_planted = 0;
  double planted_magnitude = 0.8;
  double team_effect_sd = 0.0;
  /// Log-odds shift toward the advantaged side in non-even scenarios.
  double special_effect = 0.0;

  /// Per-event probability of each non-even code, in ScenarioCode order
  /// (6v5, 6v4, 6v3, 5v4, 5v3, 4v3). The default totals 0.35.
  std::array<double, kScenarioCount> scenario_frequency{0.06, 0.05, 0.01, 0.17, 0.03, 0.03};
  double pulled_goalie_frequency = 0.02;
  /// Probability that a side's skaters are drawn around a fixed forward trio.
  double line_strength = 0.7;
  double playoff_fraction = 0.0;
  /// Relative weights of GOAL, SHOT, MISS, BLOCK.
  std::array<double, 4> type_weights{1.0, 0.0, 0.0, 0.0};

  std::size_t n_events = 10000;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument with the offending field name.
  void validate() const;

  /// Flat `key = value` settings; unknown keys are rejected.
  static SynthConfig from_kv(const std::map<std::string, std::string>& kv);
};

struct GroundTruth {
  double alpha = 0.0;
  std::map<std::pair<std::string, std::string>, double> team_effects;  // (team, season)
  std::map<std::string, double> special_effects;
  std::map<std::string, double> player_effects;
  std::array<std::size_t, 4> type_counts{};  // by EventType
  std::map<PlayerSeason, std::pair<std::size_t, std::size_t>> tallies;  // (for, against)

  std::string truth_csv() const;
};

struct SynthOutput {
  std::vector<EventRecord> events;
  GroundTruth truth;
};

SynthOutput generate(const SynthConfig& config);

std::string season_label(int first_year);
std::string team_code(std::size_t team);
std::string player_id(std::size_t team, std::size_t slot, bool goalie);

/// Parses `key = value` lines; '#' starts a comment.
std::map<std::string, std::string> read_kv(const std::string& text);

}  // namespace hpm
