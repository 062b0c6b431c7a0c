#include <sstream>

#include "doctest.h"
#include "hpm/csv.hpp"
#include "hpm/events.hpp"
#include "hpm/synth.hpp"

using namespace hpm;

namespace {

std::string with_header(const std::string& rows) { return std::string(kEventHeader) + "\n" + rows; }

std::vector<EventRecord> parse_text(const std::string& text,
                                    std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  return parse_events(in, ParseOptions{warnings});
}

}  // namespace

TEST_CASE("parse_events maps a full-strength row field by field") {
  const auto events = parse_text(with_header(
      "2002-2003,0,COL,DET,GOAL,HOME,EVEN,NONE,f1;f2;f3;d1;d2;g1,F1;F2;F3;D1;D2;G1\n"));
  REQUIRE(events.size() == 1);
  const auto& e = events[0];
  CHECK(e.season == "2002-2003");
  CHECK_FALSE(e.playoffs);
  CHECK(e.home_team == "COL");
  CHECK(e.away_team == "DET");
  CHECK(e.event_type == EventType::Goal);
  CHECK(e.by_side == Side::Home);
  CHECK(e.scenario == SpecialScenario{});
  CHECK(e.goalie_pulled == Side::None);
  CHECK(e.home_players.size() == 6);
  CHECK(e.away_players.size() == 6);
  CHECK(e.home_players.front() == "f1");
  CHECK(e.away_players.back() == "G1");
}

TEST_CASE("parse_events reads side-tagged scenarios") {
  const auto events = parse_text(with_header(
      "2003-2004,1,A,B,SHOT,AWAY,5v4:AWAY,HOME,a1;a2;a3;a4,b1;b2;b3;b4;b5\n"));
  REQUIRE(events.size() == 1);
  CHECK(events[0].playoffs);
  CHECK(events[0].scenario.code == ScenarioCode::S5v4);
  CHECK(events[0].scenario.advantaged_side == Side::Away);
  CHECK(events[0].goalie_pulled == Side::Home);
}

TEST_CASE("parse_events rejects invalid rows with line numbers") {
  const std::string good = "2002-2003,0,COL,DET,GOAL,HOME,EVEN,NONE,a;b,c;d\n";
  const auto line_of = [&](const std::string& bad) {
    try {
      parse_text(with_header(good + bad));
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };

  SUBCASE("seven home players") {
    CHECK(line_of("2002-2003,0,COL,DET,GOAL,HOME,EVEN,NONE,a;b;c;d;e;f;g,h\n") == 3);
  }
  SUBCASE("duplicate player within a side") {
    CHECK(line_of("2002-2003,0,COL,DET,GOAL,HOME,EVEN,NONE,a;a,c\n") == 3);
  }
  SUBCASE("player on both sides") {
    CHECK(line_of("2002-2003,0,COL,DET,GOAL,HOME,EVEN,NONE,a;b,b\n") == 3);
  }
  SUBCASE("unknown event type") {
    CHECK(line_of("2002-2003,0,COL,DET,HIT,HOME,EVEN,NONE,a,b\n") == 3);
  }
  SUBCASE("unknown scenario code") {
    CHECK(line_of("2002-2003,0,COL,DET,GOAL,HOME,7v5:HOME,NONE,a,b\n") == 3);
  }
  SUBCASE("scenario without side") {
    CHECK(line_of("2002-2003,0,COL,DET,GOAL,HOME,5v4,NONE,a,b\n") == 3);
  }
  SUBCASE("same team twice") {
    CHECK(line_of("2002-2003,0,COL,COL,GOAL,HOME,EVEN,NONE,a,b\n") == 3);
  }
  SUBCASE("field count") {
    CHECK(line_of("2002-2003,0,COL,DET,GOAL,HOME,EVEN,NONE,a\n") == 3);
  }
  SUBCASE("empty side") {
    CHECK(line_of("2002-2003,0,COL,DET,GOAL,HOME,EVEN,NONE,,b\n") == 3);
  }
  SUBCASE("bad playoffs flag") {
    CHECK(line_of("2002-2003,2,COL,DET,GOAL,HOME,EVEN,NONE,a,b\n") == 3);
  }
}

TEST_CASE("parse_events rejects a wrong header") {
  std::istringstream in("season,home\n");
  CHECK_THROWS_AS(parse_events(in), ParseError);
}

TEST_CASE("scenario and player-count mismatch is a warning, not an error") {
  std::vector<std::string> warnings;
  const auto events = parse_text(
      with_header("2002-2003,0,COL,DET,GOAL,HOME,5v4:HOME,NONE,a;b;c;d;e;f,g;h;i;j;k;l\n"),
      &warnings);
  CHECK(events.size() == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("line 2") != std::string::npos);
}

TEST_CASE("synthetic files round-trip through write and parse") {
  SynthConfig c;
  c.n_events = 1000;
  c.n_teams = 6;
  c.n_seasons = 2;
  c.playoff_fraction = 0.2;
  c.type_weights = {1, 2, 1, 1};
  const auto gen = generate(c);
  std::ostringstream out;
  write_events(out, gen.events);
  const auto parsed = parse_text(out.str());
  CHECK(parsed == gen.events);

  // And serialize is stable on the parsed copy.
  std::ostringstream again;
  write_events(again, parsed);
  CHECK(again.str() == out.str());
}

TEST_CASE("filter_by_response") {
  EventRecord base;
  base.season = "s";
  base.home_team = "A";
  base.away_team = "B";
  base.home_players = {"a"};
  base.away_players = {"b"};
  auto goal = base, block = base, miss = base;
  block.event_type = EventType::Block;
  miss.event_type = EventType::Miss;
  const std::vector<EventRecord> events{goal, block, miss};

  const auto fenwick = filter_by_response(events, ResponseKind::Fenwick);
  REQUIRE(fenwick.size() == 2);
  CHECK(fenwick[0].event_type == EventType::Goal);
  CHECK(fenwick[1].event_type == EventType::Miss);
  CHECK(filter_by_response(events, ResponseKind::Corsi) == events);
  CHECK(filter_by_response(events, ResponseKind::Goal).size() == 1);
}

TEST_CASE("response filters nest and match generator counts") {
  SynthConfig c;
  c.n_events = 3000;
  c.type_weights = {1, 4, 2, 2};
  c.seed = 9;
  const auto gen = generate(c);
  const auto& n = gen.truth.type_counts;
  const auto goal = filter_by_response(gen.events, ResponseKind::Goal);
  const auto fenwick = filter_by_response(gen.events, ResponseKind::Fenwick);
  const auto corsi = filter_by_response(gen.events, ResponseKind::Corsi);
  CHECK(goal.size() == n[0]);
  CHECK(fenwick.size() == n[0] + n[1] + n[2]);
  CHECK(corsi.size() == n[0] + n[1] + n[2] + n[3]);

  // GOAL is a sub-list of FENWICK which is a sub-list of CORSI.
  const auto is_sublist = [](const std::vector<EventRecord>& a, const std::vector<EventRecord>& b) {
    std::size_t j = 0;
    for (const auto& e : b) {
      if (j < a.size() && a[j] == e) ++j;
    }
    return j == a.size();
  };
  CHECK(is_sublist(goal, fenwick));
  CHECK(is_sublist(fenwick, corsi));
}

TEST_CASE("response_vector signs by producing side") {
  SynthConfig c;
  c.n_events = 500;
  const auto gen = generate(c);
  const auto y = response_vector(gen.events);
  REQUIRE(y.size() == gen.events.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(y[i] == (gen.events[i].by_side == Side::Home ? 1.0 : -1.0));
  }
  auto flipped = gen.events;
  for (auto& e : flipped) e.by_side = e.by_side == Side::Home ? Side::Away : Side::Home;
  const auto yf = response_vector(flipped);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(yf[i] == -y[i]);
}
