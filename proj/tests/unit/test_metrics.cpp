#include <cmath>
#include <limits>

#include "doctest.h"
#include "hpm/metrics.hpp"
#include "hpm/selection.hpp"
#include "../support/instances.hpp"

using namespace hpm;
namespace t = hpm::testing;

namespace {

EventRecord goal(Side by, std::vector<std::string> home, std::vector<std::string> away,
                 std::string season = "2009-2010", bool playoffs = false) {
  EventRecord e;
  e.season = std::move(season);
  e.playoffs = playoffs;
  e.home_team = "CHI";
  e.away_team = "BOS";
  e.by_side = by;
  e.home_players = std::move(home);
  e.away_players = std::move(away);
  return e;
}

PlayerSeasonMetrics row(std::string player, std::string season, double ppm_value,
                        std::optional<double> salary = std::nullopt) {
  PlayerSeasonMetrics m;
  m.player = std::move(player);
  m.season = std::move(season);
  m.team = "T";
  m.ppm = ppm_value;
  m.beta_total = ppm_value / 10.0;
  m.pfp = pfp(m.beta_total);
  m.g = 10;
  m.salary_usd = salary;
  return m;
}

}  // namespace

TEST_CASE("marginal stats on a single goal") {
  const std::vector<EventRecord> events{goal(Side::Home, {"A"}, {"B"})};
  const auto s = marginal_stats(events);
  const auto& a = s.at({"A", "2009-2010"});
  const auto& b = s.at({"B", "2009-2010"});
  CHECK(a.g() == 1);
  CHECK(a.pm() == 1);
  CHECK(a.fp() == 1.0);
  CHECK(b.g() == 1);
  CHECK(b.pm() == -1);
  CHECK(b.fp() == 0.0);
  CHECK(a.modal_team() == "CHI");
  CHECK(b.modal_team() == "BOS");
}

TEST_CASE("on ice for 8 goals for and 4 against gives +4") {
  std::vector<EventRecord> events;
  for (int i = 0; i < 8; ++i) events.push_back(goal(Side::Home, {"keith", "toews"}, {"chara"}));
  for (int i = 0; i < 4; ++i) events.push_back(goal(Side::Away, {"keith"}, {"chara", "lucic"}));
  const auto s = marginal_stats(events);
  const auto& k = s.at({"keith", "2009-2010"});
  CHECK(k.pm() == 4);
  CHECK(k.g() == 12);
  CHECK(k.fp() == doctest::Approx(8.0 / 12.0));
  CHECK(s.at({"chara", "2009-2010"}).pm() == -4);
  CHECK(s.at({"lucic", "2009-2010"}).pm() == 4);
  CHECK(s.at({"toews", "2009-2010"}).pm() == 8);
}

TEST_CASE("marginal stats match generator tallies") {
  SynthConfig c;
  c.n_events = 3000;
  c.n_seasons = 2;
  c.n_planted = 6;
  c.seed = 17;
  const auto gen = generate(c);
  const auto s = marginal_stats(gen.events);
  REQUIRE(s.size() == gen.truth.tallies.size());
  for (const auto& [key, tally] : gen.truth.tallies) {
    const auto& m = s.at(key);
    CHECK(m.events_for == tally.first);
    CHECK(m.events_against == tally.second);
  }
  // Per event: one +1 per producing-side skater, one -1 per opposing skater.
  std::size_t plus = 0, minus = 0;
  for (const auto& e : gen.events) {
    const bool home = e.by_side == Side::Home;
    plus += home ? e.home_players.size() : e.away_players.size();
    minus += home ? e.away_players.size() : e.home_players.size();
  }
  std::size_t got_for = 0, got_against = 0;
  for (const auto& [key, m] : s) {
    got_for += m.events_for;
    got_against += m.events_against;
  }
  CHECK(got_for == plus);
  CHECK(got_against == minus);
}

TEST_CASE("modal team breaks ties toward the smaller code") {
  MarginalStats m;
  m.team_events = {{"NYR", 3}, {"ANA", 3}, {"BUF", 1}};
  CHECK(m.modal_team() == "ANA");
}

TEST_CASE("pfp and logit") {
  CHECK(pfp(0.0) == 0.5);
  CHECK(pfp(logit(0.68)) == 0.68);
  CHECK(pfp(0.7538) == doctest::Approx(0.68).epsilon(0.005 / 0.68));
  CHECK(std::abs(pfp(0.7538) - 0.68) <= 0.005);
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const double b = 6.0 * rng.normal();
    CHECK(pfp(-b) == doctest::Approx(1.0 - pfp(b)).epsilon(1e-14));
    CHECK(pfp(b + 1e-3) > pfp(b));
  }
  CHECK(pfp(800.0) == 1.0);
  CHECK(pfp(-800.0) >= 0.0);
  CHECK_THROWS_AS(logit(1.0), std::invalid_argument);
  CHECK_THROWS_AS(logit(0.0), std::invalid_argument);
}

TEST_CASE("ppm against tabled values") {
  for (double g : {0.0, 1.0, 37.0, 500.0}) CHECK(ppm(g, 0.5) == 0.0);
  CHECK(ppm(154, 0.68) == doctest::Approx(55.44).epsilon(1e-14));
  CHECK(std::abs(ppm(154, 0.68) - 55.52) <= 0.15);
  CHECK(ppm(205, 0.33) == doctest::Approx(-69.7).epsilon(1e-14));
  CHECK(std::abs(ppm(205, 0.33) - -69.62) <= 0.2);
  CHECK(ppm(10, 0.6) > ppm(10, 0.55));
  CHECK(ppm(10, 0.3) < 0.0);
}

TEST_CASE("value score") {
  CHECK(value_score(29.1, 500000.0) == doctest::Approx(58.2).epsilon(1e-14));
  CHECK(std::abs(value_score(29.1, 500000.0) - 58.27) <= 0.2);
  CHECK(value_score(0.0, 3.0e6) == 0.0);
  CHECK(value_score(10.0, 2.0e6) == value_score(10.0, 1.0e6) / 2.0);
}

TEST_CASE("assemble_metrics with an all-zero fit") {
  SynthConfig c;
  c.n_events = 1500;
  c.n_seasons = 2;
  c.playoff_fraction = 0.1;
  const auto gen = generate(c);
  const auto cat = build_catalog(gen.events);
  SingleFit fit;
  fit.beta.assign(cat.total_cols(), 0.0);
  const auto metrics = assemble_metrics(fit, cat, gen.events);
  std::vector<EventRecord> regular;
  for (const auto& e : gen.events) {
    if (!e.playoffs) regular.push_back(e);
  }
  const auto raw = marginal_stats(regular);
  CHECK(metrics.size() == raw.size());
  for (const auto& m : metrics) {
    CHECK(m.pfp == 0.5);
    CHECK(m.ppm == 0.0);
    const auto& r = raw.at({m.player, m.season});
    CHECK(m.pm == r.pm());
    CHECK(m.fp == r.fp());
    CHECK(m.g == r.g());
    CHECK(m.team == r.modal_team());
  }
  SingleFit wrong;
  wrong.beta.assign(3, 0.0);
  CHECK_THROWS_AS(assemble_metrics(wrong, cat, gen.events), std::invalid_argument);
}

TEST_CASE("beta_total adds the base and season terms only") {
  const std::vector<EventRecord> events{
      goal(Side::Home, {"a"}, {"b"}, "S1"), goal(Side::Away, {"a"}, {"b"}, "S2"),
      goal(Side::Home, {"a"}, {"b"}, "S2", true)};
  const auto cat = build_catalog(events);
  SingleFit fit;
  fit.beta.assign(cat.total_cols(), 0.0);
  fit.beta[cat.find(Block::PlayerBase, "a")] = 0.4;
  fit.beta[cat.find(Block::PlayerSeason, "a", "S2")] = -0.1;
  fit.beta[cat.find(Block::PlayerPlayoff, "a", "S2")] = 2.0;
  const auto metrics = assemble_metrics(fit, cat, events);
  REQUIRE(metrics.size() == 4);
  for (const auto& m : metrics) {
    if (m.player != "a") continue;
    CHECK(m.beta_total == doctest::Approx(m.season == "S1" ? 0.4 : 0.3));
    CHECK(m.g == 1);
  }
  const auto po = playoff_effects(fit, cat);
  REQUIRE(po.size() == 2);
  CHECK(po[0].player == "a");
  CHECK(po[0].beta_playoff == 2.0);
  CHECK(po[0].beta_total == doctest::Approx(2.3));
}

TEST_CASE("rank_table ordering and ties") {
  const std::vector<PlayerSeasonMetrics> m{row("c", "S1", 5.0), row("a", "S2", 5.0),
                                           row("a", "S1", 5.0), row("d", "S1", -2.0),
                                           row("b", "S1", 9.0)};
  const auto all = rank_table(m, 10, 0);
  REQUIRE(all.size() == 5);
  CHECK(all[0].metrics->player == "b");
  CHECK(all[1].metrics->player == "a");
  CHECK(all[1].metrics->season == "S1");
  CHECK(all[2].metrics->season == "S2");
  CHECK(all[3].metrics->player == "c");
  CHECK(all[4].metrics->player == "d");
  for (std::size_t i = 0; i < 5; ++i) CHECK(all[i].rank == i + 1);

  const auto ends = rank_table(m, 1, 2);
  REQUIRE(ends.size() == 3);
  CHECK(ends[0].rank == 1);
  CHECK(ends[1].rank == 4);
  CHECK(ends[2].rank == 5);
  CHECK(rank_table(m, 4, 4).size() == 5);

  const std::string want =
      "Rank,Player,Season,Team,PFP,FP,PPM,PM\n"
      "1,Bee,S1,T,0.71,0.00,9.00,0\n"
      "4,c,S1,T,0.62,0.00,5.00,0\n"
      "5,d,S1,T,0.45,0.00,-2.00,0\n";
  CHECK(rank_csv(rank_table(m, 1, 2), {{"b", "Bee"}}) == want);
}

TEST_CASE("value_rank") {
  std::vector<PlayerSeasonMetrics> m{row("a", "S1", 29.1, 500000.0), row("b", "S1", 40.0, 2e6),
                                     row("c", "S1", 10.0), row("d", "S1", 5.0, 0.0),
                                     row("e", "S1", 0.0, 1e6)};
  const auto v = value_rank(m);
  REQUIRE(v.size() == 3);
  CHECK(v[0].metrics->player == "a");
  CHECK(v[0].score == doctest::Approx(58.2));
  CHECK(v[1].metrics->player == "b");
  CHECK(v[2].score == 0.0);
  CHECK(value_rank(m, 1).size() == 1);
  CHECK(value_csv(value_rank(m, 1)) ==
        "Rank,Player,Season,Team,PPM,Salary,PPMPerMillion\n1,a,S1,T,29.10,500000,58.20\n");

  auto doubled = m;
  for (auto& r : doubled) {
    if (r.salary_usd) *r.salary_usd *= 2.0;
  }
  const auto d = value_rank(doubled);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(d[i].metrics->player == v[i].metrics->player);
    CHECK(d[i].score == doctest::Approx(v[i].score / 2.0));
  }
  auto scaled = m;
  for (auto& r : scaled) r.ppm *= 3.0;
  const auto s = value_rank(scaled);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(s[i].metrics->player == v[i].metrics->player);
}

TEST_CASE("effect-salary histogram") {
  std::vector<PlayerSeasonMetrics> m{row("a", "S1", 1.0, 5e5), row("b", "S1", -1.0, 2e6),
                                     row("c", "S1", 0.0, 2e6), row("d", "S1", 2.0, 4e6),
                                     row("e", "S1", 2.0), row("f", "S1", 2.0, 9e6)};
  const auto h = effect_salary_histogram(m, {0.0, 1e6, 4e6});
  REQUIRE(h.size() == 2);
  CHECK(h[0].positive == 1);
  CHECK(h[0].negative == 0);
  CHECK(h[1].negative == 1);
  CHECK(h[1].zero == 1);
  CHECK(h[1].positive == 1);  // the upper edge is inclusive
  CHECK(histogram_csv(h) ==
        "salary_lo,salary_hi,negative,zero,positive\n0,1000000,0,0,1\n1000000,4000000,1,1,1\n");

  for (auto& r : m) r.beta_total = 0.0;
  const auto z = effect_salary_histogram(m, {0.0, 1e7});
  CHECK(z[0].zero == 5);
  CHECK(z[0].negative + z[0].positive == 0);

  CHECK_THROWS_AS(effect_salary_histogram(m, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(effect_salary_histogram(m, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("histogram sign counts follow planted signals") {
  SynthConfig c;
  c.n_events = 100;
  c.player_effects = {{"T01S01", 0.8}, {"T02S03", -0.8}, {"T03S05", 0.8}};
  const auto gen = generate(c);
  const auto cat = build_catalog(gen.events, DesignOptions::players_only());
  SingleFit truth;
  truth.beta.assign(cat.total_cols(), 0.0);
  for (const auto& [p, v] : gen.truth.player_effects) {
    const auto j = cat.find(Block::PlayerBase, p);
    if (j != ColumnCatalog::npos) truth.beta[j] = v;
  }
  auto metrics = assemble_metrics(truth, cat, gen.events);
  for (auto& r : metrics) r.salary_usd = 1e6;
  std::size_t planted_pos = 0, planted_neg = 0;
  for (const auto& m : metrics) {
    const auto it = gen.truth.player_effects.find(m.player);
    if (it == gen.truth.player_effects.end()) continue;
    (it->second > 0 ? planted_pos : planted_neg) += 1;
  }
  const auto h = effect_salary_histogram(metrics, {0.0, 2e6});
  CHECK(h[0].positive == planted_pos);
  CHECK(h[0].negative == planted_neg);
  CHECK(h[0].zero == metrics.size() - planted_pos - planted_neg);
}

TEST_CASE("a strong planted player tops the PPM ranking") {
  SynthConfig c;
  c.n_teams = 4;
  c.players_per_team = 12;
  c.n_events = 8000;
  c.player_effects = {{"T02S04", 1.0}};
  c.seed = 12;
  const auto inst = t::make_instance(c, DesignOptions::players_only());
  const auto path = fit_path(inst.build.matrix, inst.build.y, inst.penalty, FitConfig{});
  const auto sel = select_aicc(path, inst.build.matrix.n_rows());
  const auto metrics =
      assemble_metrics(path.fits[sel.chosen_index], inst.build.catalog, inst.synth.events);
  const auto top = rank_table(metrics, 1, 0);
  REQUIRE(top.size() == 1);
  CHECK(top[0].metrics->player == "T02S04");
  CHECK(top[0].metrics->ppm > 0.0);
}
