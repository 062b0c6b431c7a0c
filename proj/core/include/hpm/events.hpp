#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hpm {

enum class Side { None, Home, Away };
enum class EventType { Goal, Shot, Miss, Block };
enum class ResponseKind { Goal, Corsi, Fenwick };

/// Manpower situation. The advantaged side skates the first number of the
/// code, e.g. {S5v4, Home} means the home team has five on the ice.
enum class ScenarioCode { Even, S6v5, S6v4, S6v3, S5v4, S5v3, S4v3 };

struct SpecialScenario {
  ScenarioCode code = ScenarioCode::Even;
  Side advantaged_side = Side::None;

  friend bool operator==(const SpecialScenario&, const SpecialScenario&) = default;
};

/// One on-ice event. Player lists keep file order; duplicates within a side
/// and players appearing on both sides are rejected at parse time.
struct EventRecord {
  std::string season;
  bool playoffs = false;
  std::string home_team;
  std::string away_team;
  EventType event_type = EventType::Goal;
  Side by_side = Side::Home;
  SpecialScenario scenario;
  std::vector<std::string> home_players;
  std::vector<std::string> away_players;
  Side goalie_pulled = Side::None;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

inline constexpr std::string_view kEventHeader =
    "season,playoffs,home_team,away_team,event_type,by_side,scenario,goalie_pulled,"
    "home_players,away_players";

inline constexpr int kScenarioCount = 6;  // non-even codes

std::string_view to_string(Side side);
std::string_view to_string(EventType type);
std::string_view to_string(ResponseKind kind);
std::string_view to_string(ScenarioCode code);
std::string to_string(const SpecialScenario& scenario);

Side parse_side(std::string_view text, std::size_t line = 0);
EventType parse_event_type(std::string_view text, std::size_t line = 0);
ResponseKind parse_response_kind(std::string_view text);
SpecialScenario parse_scenario(std::string_view text, std::size_t line = 0);

/// Players on the ice for each side in a non-even scenario code.
std::pair<int, int> manpower(ScenarioCode code);

/// Checks the EventRecord invariants; throws ParseError tagged with `line`.
void validate(const EventRecord& event, std::size_t line = 0);

struct ParseOptions {
  /// Receives one message per scenario/player-count mismatch. Such rows are
  /// still accepted.
  std::vector<std::string>* warnings = nullptr;
};

std::vector<EventRecord> parse_events(std::istream& in, const ParseOptions& options = {});
std::vector<EventRecord> parse_events_file(const std::string& path,
                                           const ParseOptions& options = {});

std::string serialize_event(const EventRecord& event);
void write_events(std::ostream& out, const std::vector<EventRecord>& events);

bool included_in(EventType type, ResponseKind kind);
std::vector<EventRecord> filter_by_response(const std::vector<EventRecord>& events,
                                            ResponseKind kind);

/// +1 for events produced by the home side, -1 otherwise.
std::vector<double> response_vector(const std::vector<EventRecord>& events);

}  // namespace hpm
