#include "hpm/events.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "hpm/csv.hpp"

namespace hpm {

namespace {

constexpr std::size_t kFieldCount = 10;
constexpr std::size_t kMaxOnIce = 6;

std::vector<std::string> parse_players(std::string_view field, std::size_t line,
                                       std::string_view side) {
  std::vector<std::string> out;
  if (field.empty()) return out;
  for (auto id : csv::split(field, ';')) {
    if (id.empty()) throw ParseError(line, "empty player id in " + std::string(side) + "_players");
    out.emplace_back(id);
  }
  return out;
}

std::string join_players(const std::vector<std::string>& players) {
  return csv::join(players, ';');
}

}  // namespace

std::string_view to_string(Side side) {
  switch (side) {
    case Side::None: return "NONE";
    case Side::Home: return "HOME";
    case Side::Away: return "AWAY";
  }
  return "?";
}

std::string_view to_string(EventType type) {
  switch (type) {
    case EventType::Goal: return "GOAL";
    case EventType::Shot: return "SHOT";
    case EventType::Miss: return "MISS";
    case EventType::Block: return "BLOCK";
  }
  return "?";
}

std::string_view to_string(ResponseKind kind) {
  switch (kind) {
    case ResponseKind::Goal: return "goal";
    case ResponseKind::Corsi: return "corsi";
    case ResponseKind::Fenwick: return "fenwick";
  }
  return "?";
}

std::string_view to_string(ScenarioCode code) {
  switch (code) {
    case ScenarioCode::Even: return "EVEN";
    case ScenarioCode::S6v5: return "6v5";
    case ScenarioCode::S6v4: return "6v4";
    case ScenarioCode::S6v3: return "6v3";
    case ScenarioCode::S5v4: return "5v4";
    case ScenarioCode::S5v3: return "5v3";
    case ScenarioCode::S4v3: return "4v3";
  }
  return "?";
}

std::string to_string(const SpecialScenario& scenario) {
  if (scenario.code == ScenarioCode::Even) return "EVEN";
  return std::string(to_string(scenario.code)) + ":" +
         std::string(to_string(scenario.advantaged_side));
}

Side parse_side(std::string_view text, std::size_t line) {
  if (text == "NONE") return Side::None;
  if (text == "HOME") return Side::Home;
  if (text == "AWAY") return Side::Away;
  throw ParseError(line, "unknown side '" + std::string(text) + "'");
}

EventType parse_event_type(std::string_view text, std::size_t line) {
  if (text == "GOAL") return EventType::Goal;
  if (text == "SHOT") return EventType::Shot;
  if (text == "MISS") return EventType::Miss;
  if (text == "BLOCK") return EventType::Block;
  throw ParseError(line, "unknown event_type '" + std::string(text) + "'");
}

ResponseKind parse_response_kind(std::string_view text) {
  if (text == "goal") return ResponseKind::Goal;
  if (text == "corsi") return ResponseKind::Corsi;
  if (text == "fenwick") return ResponseKind::Fenwick;
  throw std::invalid_argument("unknown response kind '" + std::string(text) +
                              "' (expected goal, corsi or fenwick)");
}

SpecialScenario parse_scenario(std::string_view text, std::size_t line) {
  if (text == "EVEN") return {};
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError(line, "unknown scenario '" + std::string(text) +
                               "' (expected EVEN or <code>:<HOME|AWAY>)");
  }
  const auto code = text.substr(0, colon);
  SpecialScenario s;
  if (code == "6v5") s.code = ScenarioCode::S6v5;
  else if (code == "6v4") s.code = ScenarioCode::S6v4;
  else if (code == "6v3") s.code = ScenarioCode::S6v3;
  else if (code == "5v4") s.code = ScenarioCode::S5v4;
  else if (code == "5v3") s.code = ScenarioCode::S5v3;
  else if (code == "4v3") s.code = ScenarioCode::S4v3;
  else throw ParseError(line, "unknown scenario code '" + std::string(code) + "'");
  s.advantaged_side = parse_side(text.substr(colon + 1), line);
  if (s.advantaged_side == Side::None) {
    throw ParseError(line, "scenario " + std::string(code) + " needs an advantaged side");
  }
  return s;
}

std::pair<int, int> manpower(ScenarioCode code) {
  switch (code) {
    case ScenarioCode::Even: return {6, 6};
    case ScenarioCode::S6v5: return {6, 5};
    case ScenarioCode::S6v4: return {6, 4};
    case ScenarioCode::S6v3: return {6, 3};
    case ScenarioCode::S5v4: return {5, 4};
    case ScenarioCode::S5v3: return {5, 3};
    case ScenarioCode::S4v3: return {4, 3};
  }
  return {6, 6};
}

void validate(const EventRecord& e, std::size_t line) {
  if (e.season.empty()) throw ParseError(line, "empty season");
  if (e.home_team.empty() || e.away_team.empty()) throw ParseError(line, "empty team code");
  if (e.home_team == e.away_team) throw ParseError(line, "home_team equals away_team");
  if (e.by_side == Side::None) throw ParseError(line, "by_side must be HOME or AWAY");
  if ((e.scenario.code == ScenarioCode::Even) != (e.scenario.advantaged_side == Side::None)) {
    throw ParseError(line, "scenario code and advantaged side disagree");
  }
  const auto check_side = [&](const std::vector<std::string>& players, std::string_view side) {
    if (players.empty() || players.size() > kMaxOnIce) {
      throw ParseError(line, std::string(side) + "_players must list 1-6 ids, got " +
                                 std::to_string(players.size()));
    }
    std::set<std::string_view> seen;
    for (const auto& p : players) {
      if (!seen.insert(p).second) {
        throw ParseError(line, "duplicate player '" + p + "' in " + std::string(side) + "_players");
      }
    }
  };
  check_side(e.home_players, "home");
  check_side(e.away_players, "away");
  for (const auto& p : e.home_players) {
    if (std::find(e.away_players.begin(), e.away_players.end(), p) != e.away_players.end()) {
      throw ParseError(line, "player '" + p + "' on ice for both sides");
    }
  }
}

std::vector<EventRecord> parse_events(std::istream& in, const ParseOptions& options) {
  std::vector<EventRecord> events;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "empty file (missing header)");
  if (csv::chomp(line) != kEventHeader) {
    throw ParseError(1, "unexpected header; expected '" + std::string(kEventHeader) + "'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = csv::chomp(line);
    if (body.empty()) continue;
    const auto f = csv::split(body, ',');
    if (f.size() != kFieldCount) {
      throw ParseError(line_no, "expected " + std::to_string(kFieldCount) + " fields, got " +
                                    std::to_string(f.size()));
    }
    EventRecord e;
    e.season = std::string(f[0]);
    if (f[1] == "1") e.playoffs = true;
    else if (f[1] != "0") throw ParseError(line_no, "playoffs must be 0 or 1");
    e.home_team = std::string(f[2]);
    e.away_team = std::string(f[3]);
    e.event_type = parse_event_type(f[4], line_no);
    e.by_side = parse_side(f[5], line_no);
    e.scenario = parse_scenario(f[6], line_no);
    e.goalie_pulled = parse_side(f[7], line_no);
    e.home_players = parse_players(f[8], line_no, "home");
    e.away_players = parse_players(f[9], line_no, "away");
    validate(e, line_no);

    if (options.warnings) {
      auto [adv, dis] = manpower(e.scenario.code);
      std::size_t home_n = static_cast<std::size_t>(adv), away_n = static_cast<std::size_t>(dis);
      if (e.scenario.advantaged_side == Side::Away) std::swap(home_n, away_n);
      if (e.home_players.size() != home_n || e.away_players.size() != away_n) {
        options.warnings->push_back("line " + std::to_string(line_no) + ": scenario " +
                                    to_string(e.scenario) + " but " +
                                    std::to_string(e.home_players.size()) + "v" +
                                    std::to_string(e.away_players.size()) + " players listed");
      }
    }
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<EventRecord> parse_events_file(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return parse_events(in, options);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.reason(), path);
  }
}

std::string serialize_event(const EventRecord& e) {
  std::string out;
  out += e.season;
  out += e.playoffs ? ",1," : ",0,";
  out += e.home_team + "," + e.away_team + ",";
  out += to_string(e.event_type);
  out += ",";
  out += to_string(e.by_side);
  out += "," + to_string(e.scenario) + ",";
  out += to_string(e.goalie_pulled);
  out += "," + join_players(e.home_players) + "," + join_players(e.away_players);
  return out;
}

void write_events(std::ostream& out, const std::vector<EventRecord>& events) {
  out << kEventHeader << '\n';
  for (const auto& e : events) out << serialize_event(e) << '\n';
}

bool included_in(EventType type, ResponseKind kind) {
  switch (kind) {
    case ResponseKind::Goal: return type == EventType::Goal;
    case ResponseKind::Fenwick: return type != EventType::Block;
    case ResponseKind::Corsi: return true;
  }
  return false;
}

std::vector<EventRecord> filter_by_response(const std::vector<EventRecord>& events,
                                            ResponseKind kind) {
  std::vector<EventRecord> out;
  for (const auto& e : events) {
    if (included_in(e.event_type, kind)) out.push_back(e);
  }
  return out;
}

std::vector<double> response_vector(const std::vector<EventRecord>& events) {
  std::vector<double> y;
  y.reserve(events.size());
  for (const auto& e : events) y.push_back(e.by_side == Side::Home ? 1.0 : -1.0);
  return y;
}

}  // namespace hpm
