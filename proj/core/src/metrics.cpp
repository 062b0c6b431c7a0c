#include "hpm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hpm/csv.hpp"

namespace hpm {

namespace {

const std::string& display(const NameTable& names, const std::string& player) {
  const auto it = names.find(player);
  return it == names.end() ? player : it->second;
}

bool ppm_order(const PlayerSeasonMetrics* a, const PlayerSeasonMetrics* b) {
  if (a->ppm != b->ppm) return a->ppm > b->ppm;
  if (a->player != b->player) return a->player < b->player;
  return a->season < b->season;
}

}  // namespace

std::string MarginalStats::modal_team() const {
  std::string best;
  std::size_t count = 0;
  for (const auto& [team, n] : team_events) {
    if (n > count) {
      best = team;
      count = n;
    }
  }
  return best;
}

std::map<PlayerSeason, MarginalStats> marginal_stats(const std::vector<EventRecord>& events) {
  std::map<PlayerSeason, MarginalStats> out;
  for (const auto& e : events) {
    const bool home_for = e.by_side == Side::Home;
    for (const auto& p : e.home_players) {
      auto& s = out[{p, e.season}];
      (home_for ? s.events_for : s.events_against) += 1;
      ++s.team_events[e.home_team];
    }
    for (const auto& p : e.away_players) {
      auto& s = out[{p, e.season}];
      (home_for ? s.events_against : s.events_for) += 1;
      ++s.team_events[e.away_team];
    }
  }
  return out;
}

double pfp(double beta_total) { return 1.0 / (1.0 + std::exp(-beta_total)); }

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("logit needs 0 < p < 1");
  return std::log(p) - std::log1p(-p);
}

double ppm(double g, double pfp_value) { return g * (2.0 * pfp_value - 1.0); }

SalaryTable read_salaries(const std::string& path) {
  const auto t = csv::read_table_file(path, {"player", "season", "salary_usd"});
  SalaryTable out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const double salary = csv::parse_double(row[2], t.line_numbers[r], "salary_usd");
    if (!(salary >= 0.0)) throw ParseError(t.line_numbers[r], "negative salary");
    if (!out.emplace(PlayerSeason{row[0], row[1]}, salary).second) {
      throw ParseError(t.line_numbers[r], "duplicate salary for " + row[0] + " " + row[1]);
    }
  }
  return out;
}

NameTable read_names(const std::string& path) {
  const auto t = csv::read_table_file(path, {"player", "display_name"});
  NameTable out;
  for (const auto& row : t.rows) out[row[0]] = row[1];
  return out;
}

std::vector<PlayerSeasonMetrics> assemble_metrics(const SingleFit& fit,
                                                  const ColumnCatalog& catalog,
                                                  const std::vector<EventRecord>& events,
                                                  const SalaryTable& salaries) {
  if (fit.beta.size() != catalog.total_cols()) {
    throw std::invalid_argument("fit has " + std::to_string(fit.beta.size()) +
                                " coefficients but catalog has " +
                                std::to_string(catalog.total_cols()) + " columns");
  }
  std::vector<EventRecord> regular;
  for (const auto& e : events) {
    if (!e.playoffs) regular.push_back(e);
  }
  const auto tallies = marginal_stats(regular);

  std::vector<PlayerSeasonMetrics> out;
  out.reserve(tallies.size());
  for (const auto& [key, stats] : tallies) {
    if (stats.g() == 0) continue;
    const auto& [player, season] = key;
    double beta = 0.0;
    if (const auto c = catalog.find(Block::PlayerBase, player); c != ColumnCatalog::npos) {
      beta += fit.beta[c];
    }
    if (const auto c = catalog.find(Block::PlayerSeason, player, season);
        c != ColumnCatalog::npos) {
      beta += fit.beta[c];
    }
    PlayerSeasonMetrics m;
    m.player = player;
    m.season = season;
    m.team = stats.modal_team();
    m.beta_total = beta;
    m.pfp = pfp(beta);
    m.g = stats.g();
    m.ppm = ppm(static_cast<double>(m.g), m.pfp);
    m.fp = stats.fp();
    m.pm = stats.pm();
    if (const auto it = salaries.find(key); it != salaries.end()) m.salary_usd = it->second;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<PlayoffEffect> playoff_effects(const SingleFit& fit, const ColumnCatalog& catalog) {
  if (fit.beta.size() != catalog.total_cols()) {
    throw std::invalid_argument("fit and catalog sizes differ");
  }
  std::vector<PlayoffEffect> out;
  const std::size_t off = catalog.block_offset(Block::PlayerPlayoff);
  for (std::size_t i = 0; i < catalog.player_playoff.size(); ++i) {
    const auto& [player, season] = catalog.player_playoff[i];
    PlayoffEffect p{player, season, fit.beta[off + i], fit.beta[off + i]};
    if (const auto c = catalog.find(Block::PlayerBase, player); c != ColumnCatalog::npos) {
      p.beta_total += fit.beta[c];
    }
    if (const auto c = catalog.find(Block::PlayerSeason, player, season);
        c != ColumnCatalog::npos) {
      p.beta_total += fit.beta[c];
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<RankRow> rank_table(const std::vector<PlayerSeasonMetrics>& metrics,
                                std::size_t top_n, std::size_t bottom_n) {
  std::vector<const PlayerSeasonMetrics*> order;
  order.reserve(metrics.size());
  for (const auto& m : metrics) order.push_back(&m);
  std::sort(order.begin(), order.end(), ppm_order);

  const std::size_t n = order.size();
  std::vector<RankRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < top_n || i + bottom_n >= n) rows.push_back({i + 1, order[i]});
  }
  return rows;
}

std::string rank_csv(const std::vector<RankRow>& rows, const NameTable& names) {
  std::string out = "Rank,Player,Season,Team,PFP,FP,PPM,PM\n";
  for (const auto& r : rows) {
    const auto& m = *r.metrics;
    out += std::to_string(r.rank) + "," + display(names, m.player) + "," + m.season + "," +
           m.team + "," + csv::fixed(m.pfp, 2) + "," + csv::fixed(m.fp, 2) + "," +
           csv::fixed(m.ppm, 2) + "," + std::to_string(m.pm) + "\n";
  }
  return out;
}

double value_score(double ppm_value, double salary_usd) { return ppm_value / (salary_usd / 1e6); }

std::vector<ValueRow> value_rank(const std::vector<PlayerSeasonMetrics>& metrics,
                                 std::size_t top_n) {
  std::vector<ValueRow> rows;
  for (const auto& m : metrics) {
    if (!m.salary_usd || !(*m.salary_usd > 0.0)) continue;
    rows.push_back({0, &m, value_score(m.ppm, *m.salary_usd)});
  }
  std::sort(rows.begin(), rows.end(), [](const ValueRow& a, const ValueRow& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.metrics->player != b.metrics->player) return a.metrics->player < b.metrics->player;
    return a.metrics->season < b.metrics->season;
  });
  if (rows.size() > top_n) rows.resize(top_n);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;
  return rows;
}

std::string value_csv(const std::vector<ValueRow>& rows, const NameTable& names) {
  std::string out = "Rank,Player,Season,Team,PPM,Salary,PPMPerMillion\n";
  for (const auto& r : rows) {
    const auto& m = *r.metrics;
    out += std::to_string(r.rank) + "," + display(names, m.player) + "," + m.season + "," +
           m.team + "," + csv::fixed(m.ppm, 2) + "," + csv::fixed(*m.salary_usd, 0) + "," +
           csv::fixed(r.score, 2) + "\n";
  }
  return out;
}

std::vector<HistogramBin> effect_salary_histogram(const std::vector<PlayerSeasonMetrics>& metrics,
                                                  const std::vector<double>& bin_edges) {
  if (bin_edges.size() < 2) throw std::invalid_argument("histogram needs at least two bin edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > bin_edges[i - 1])) {
      throw std::invalid_argument("histogram bin edges must be strictly increasing");
    }
  }
  std::vector<HistogramBin> bins(bin_edges.size() - 1);
  for (std::size_t b = 0; b < bins.size(); ++b) {
    bins[b].lo = bin_edges[b];
    bins[b].hi = bin_edges[b + 1];
  }
  for (const auto& m : metrics) {
    if (!m.salary_usd) continue;
    const double s = *m.salary_usd;
    if (s < bin_edges.front() || s > bin_edges.back()) continue;
    auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), s);
    std::size_t b = static_cast<std::size_t>(it - bin_edges.begin());
    b = std::min(b, bins.size()) - 1;
    auto& bin = bins[b];
    if (m.beta_total < 0.0) ++bin.negative;
    else if (m.beta_total > 0.0) ++bin.positive;
    else ++bin.zero;
  }
  return bins;
}

std::string histogram_csv(const std::vector<HistogramBin>& bins) {
  std::string out = "salary_lo,salary_hi,negative,zero,positive\n";
  for (const auto& b : bins) {
    out += csv::fixed(b.lo, 0) + "," + csv::fixed(b.hi, 0) + "," + std::to_string(b.negative) +
           "," + std::to_string(b.zero) + "," + std::to_string(b.positive) + "\n";
  }
  return out;
}

std::string playoff_csv(const std::vector<PlayoffEffect>& rows, const NameTable& names) {
  std::string out = "Player,Season,BetaPlayoff,BetaTotal,PFP\n";
  for (const auto& r : rows) {
    out += display(names, r.player) + "," + r.season + "," + csv::exact(r.beta_playoff) + "," +
           csv::exact(r.beta_total) + "," + csv::fixed(pfp(r.beta_total), 2) + "\n";
  }
  return out;
}

}  // namespace hpm
