#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hpm/design.hpp"
#include "hpm/events.hpp"
#include "hpm/solver.hpp"

namespace hpm {

using PlayerSeason = std::pair<std::string, std::string>;  // (player, season)

/// On-ice tallies for one player-season.
struct MarginalStats {
  std::size_t events_for = 0;
  std::size_t events_against = 0;
  std::map<std::string, std::size_t> team_events;  // team -> events on ice for that team

  std::size_t g() const noexcept { return events_for + events_against; }
  long long pm() const noexcept {
    return static_cast<long long>(events_for) - static_cast<long long>(events_against);
  }
  double fp() const noexcept {
    return g() ? static_cast<double>(events_for) / static_cast<double>(g()) : 0.0;
  }
  /// Most frequent team; lexicographically smallest on ties.
  std::string modal_team() const;
};

std::map<PlayerSeason, MarginalStats> marginal_stats(const std::vector<EventRecord>& events);

/// Logistic transform of a player's log-odds effect.
double pfp(double beta_total);

/// Inverse of pfp for 0 < p < 1.
double logit(double p);

/// Signed on-ice event count: g*pfp - g*(1-pfp) = g*(2*pfp - 1).
double ppm(double g, double pfp_value);

struct PlayerSeasonMetrics {
  std::string player;
  std::string season;
  std::string team;
  double beta_total = 0.0;
  double pfp = 0.5;
  std::size_t g = 0;
  double ppm = 0.0;
  double fp = 0.0;
  long long pm = 0;
  std::optional<double> salary_usd;
};

using SalaryTable = std::map<PlayerSeason, double>;
using NameTable = std::map<std::string, std::string>;

SalaryTable read_salaries(const std::string& path);
NameTable read_names(const std::string& path);

/// Regular-season metrics per player-season: beta_total = base + season
/// innovation (the playoff innovation is left out), tallies from the
/// regular-season rows of `events`. Player-seasons without events are omitted.
/// Throws std::invalid_argument when the fit and catalog disagree in size.
std::vector<PlayerSeasonMetrics> assemble_metrics(const SingleFit& fit,
                                                  const ColumnCatalog& catalog,
                                                  const std::vector<EventRecord>& events,
                                                  const SalaryTable& salaries = {});

struct PlayoffEffect {
  std::string player;
  std::string season;
  double beta_playoff = 0.0;
  double beta_total = 0.0;  // base + season + playoff
};

std::vector<PlayoffEffect> playoff_effects(const SingleFit& fit, const ColumnCatalog& catalog);

struct RankRow {
  std::size_t rank = 0;
  const PlayerSeasonMetrics* metrics = nullptr;
};

/// Descending PPM, ties by (player, season). Returns the first `top_n` and
/// the last `bottom_n` rows of the full ordering, each row appearing once.
std::vector<RankRow> rank_table(const std::vector<PlayerSeasonMetrics>& metrics,
                                std::size_t top_n, std::size_t bottom_n);

std::string rank_csv(const std::vector<RankRow>& rows, const NameTable& names = {});

struct ValueRow {
  std::size_t rank = 0;
  const PlayerSeasonMetrics* metrics = nullptr;
  double score = 0.0;  // PPM per million dollars
};

/// PPM per $1M of salary, descending; rows without a positive salary are dropped.
std::vector<ValueRow> value_rank(const std::vector<PlayerSeasonMetrics>& metrics,
                                 std::size_t top_n = static_cast<std::size_t>(-1));

double value_score(double ppm_value, double salary_usd);

std::string value_csv(const std::vector<ValueRow>& rows, const NameTable& names = {});

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t negative = 0;
  std::size_t zero = 0;
  std::size_t positive = 0;
};

/// Bins [e_k, e_{k+1}), the last bin closed. Rows without salary, or outside
/// the edges, are not counted. Throws std::invalid_argument for fewer than two
/// or non-increasing edges.
std::vector<HistogramBin> effect_salary_histogram(const std::vector<PlayerSeasonMetrics>& metrics,
                                                  const std::vector<double>& bin_edges);

std::string histogram_csv(const std::vector<HistogramBin>& bins);

std::string playoff_csv(const std::vector<PlayoffEffect>& rows, const NameTable& names = {});

}  // namespace hpm
