#include "hpm/design.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "hpm/csv.hpp"

namespace hpm {

namespace {

constexpr std::size_t kBlockCount = 5;

std::string index_key(Block block, const std::string& key, const std::string& season) {
  std::string k;
  k.reserve(key.size() + season.size() + 3);
  k += static_cast<char>('0' + static_cast<int>(block));
  k += '\x1f';
  k += key;
  k += '\x1f';
  k += season;
  return k;
}

Side flip(Side s) {
  if (s == Side::Home) return Side::Away;
  if (s == Side::Away) return Side::Home;
  return Side::None;
}

double sign_of(Side s) { return s == Side::Home ? 1.0 : -1.0; }

}  // namespace

std::string_view to_string(Block block) {
  switch (block) {
    case Block::TeamSeason: return "team_season";
    case Block::Special: return "special";
    case Block::PlayerBase: return "player";
    case Block::PlayerSeason: return "player_season";
    case Block::PlayerPlayoff: return "player_playoff";
  }
  return "?";
}

Block parse_block(std::string_view text) {
  for (std::size_t b = 0; b < kBlockCount; ++b) {
    if (to_string(static_cast<Block>(b)) == text) return static_cast<Block>(b);
  }
  throw std::invalid_argument("unknown block '" + std::string(text) + "'");
}

std::size_t ColumnCatalog::block_size(Block block) const noexcept {
  switch (block) {
    case Block::TeamSeason: return team_season.size();
    case Block::Special: return special.size();
    case Block::PlayerBase: return player_base.size();
    case Block::PlayerSeason: return player_season.size();
    case Block::PlayerPlayoff: return player_playoff.size();
  }
  return 0;
}

std::size_t ColumnCatalog::block_offset(Block block) const noexcept {
  std::size_t off = 0;
  for (std::size_t b = 0; b < static_cast<std::size_t>(block); ++b) {
    off += block_size(static_cast<Block>(b));
  }
  return off;
}

std::size_t ColumnCatalog::total_cols() const noexcept {
  return team_season.size() + special.size() + player_base.size() + player_season.size() +
         player_playoff.size();
}

Block ColumnCatalog::block_of(std::size_t col) const {
  std::size_t off = 0;
  for (std::size_t b = 0; b < kBlockCount; ++b) {
    off += block_size(static_cast<Block>(b));
    if (col < off) return static_cast<Block>(b);
  }
  throw std::out_of_range("column " + std::to_string(col) + " outside catalog");
}

TermRef ColumnCatalog::term(std::size_t col) const {
  const Block b = block_of(col);
  const std::size_t i = col - block_offset(b);
  switch (b) {
    case Block::TeamSeason: return {b, team_season[i].first, team_season[i].second};
    case Block::Special: return {b, special[i], {}};
    case Block::PlayerBase: return {b, player_base[i], {}};
    case Block::PlayerSeason: return {b, player_season[i].first, player_season[i].second};
    case Block::PlayerPlayoff: return {b, player_playoff[i].first, player_playoff[i].second};
  }
  return {b, {}, {}};
}

std::string ColumnCatalog::label(std::size_t col) const {
  const auto t = term(col);
  return t.season.empty() ? t.key : t.key + "|" + t.season;
}

std::size_t ColumnCatalog::find(Block block, const std::string& key,
                                const std::string& season) const {
  const auto it = index_.find(index_key(block, key, season));
  return it == index_.end() ? npos : it->second;
}

void ColumnCatalog::reindex() {
  index_.clear();
  const std::size_t k = total_cols();
  index_.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto t = term(c);
    index_.emplace(index_key(t.block, t.key, t.season), c);
  }
}

std::uint64_t ColumnCatalog::hash() const {
  std::uint64_t h = fnv1a64("");
  for (std::size_t c = 0; c < total_cols(); ++c) {
    const std::string line = std::string(to_string(block_of(c))) + "," + label(c) + "\n";
    h = fnv1a64(line, h);
  }
  return h;
}

std::string ColumnCatalog::to_csv() const {
  std::string out = "col_index,block,term\n";
  for (std::size_t c = 0; c < total_cols(); ++c) {
    out += std::to_string(c) + "," + std::string(to_string(block_of(c))) + "," + label(c) + "\n";
  }
  return out;
}

ColumnCatalog build_catalog(const std::vector<EventRecord>& events, const DesignOptions& options) {
  if (events.empty()) throw std::invalid_argument("build_catalog: empty event list");

  std::set<std::pair<std::string, std::string>> team_season, player_season, player_playoff;
  std::set<std::string> players;
  bool scenario_seen[kScenarioCount + 1] = {};
  bool pulled_seen = false;

  for (const auto& e : events) {
    team_season.emplace(e.home_team, e.season);
    team_season.emplace(e.away_team, e.season);
    scenario_seen[static_cast<int>(e.scenario.code)] = true;
    if (e.goalie_pulled != Side::None) pulled_seen = true;
    for (const auto* side : {&e.home_players, &e.away_players}) {
      for (const auto& p : *side) {
        players.insert(p);
        player_season.emplace(p, e.season);
        if (e.playoffs) player_playoff.emplace(p, e.season);
      }
    }
  }

  ColumnCatalog cat;
  if (options.team_season) cat.team_season.assign(team_season.begin(), team_season.end());
  if (options.special) {
    for (int c = 1; c <= kScenarioCount; ++c) {
      if (scenario_seen[c]) cat.special.emplace_back(to_string(static_cast<ScenarioCode>(c)));
    }
    if (pulled_seen) cat.special.emplace_back(kPulledGoalieTerm);
  }
  cat.player_base.assign(players.begin(), players.end());
  if (options.player_season) cat.player_season.assign(player_season.begin(), player_season.end());
  if (options.player_playoff) {
    cat.player_playoff.assign(player_playoff.begin(), player_playoff.end());
  }
  cat.reindex();
  return cat;
}

DesignBuild build_design(const std::vector<EventRecord>& events, const ColumnCatalog& catalog) {
  const bool with_team_season = !catalog.team_season.empty();
  const bool with_special = !catalog.special.empty();
  const bool with_player_season = !catalog.player_season.empty();
  const bool with_player_playoff = !catalog.player_playoff.empty();

  DesignBuild out;
  out.catalog = catalog;
  out.y = response_vector(events);
  out.row_meta.reserve(events.size());

  std::vector<Triplet> trips;
  trips.reserve(events.size() * 40);

  const auto need = [&](std::size_t row, Block block, const std::string& key,
                        const std::string& season) {
    const std::size_t c = catalog.find(block, key, season);
    if (c == ColumnCatalog::npos) {
      throw std::invalid_argument("event " + std::to_string(row + 1) + " references " +
                                  std::string(to_string(block)) + " term '" +
                                  (season.empty() ? key : key + "|" + season) +
                                  "' missing from catalog");
    }
    return c;
  };

  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    out.row_meta.push_back(
        {e.season, e.playoffs, e.home_team, e.away_team, e.home_players.size(),
         e.away_players.size()});

    if (with_team_season) {
      trips.push_back({i, need(i, Block::TeamSeason, e.home_team, e.season), 1.0});
      trips.push_back({i, need(i, Block::TeamSeason, e.away_team, e.season), -1.0});
    }
    if (with_special) {
      if (e.scenario.code != ScenarioCode::Even) {
        const std::string code(to_string(e.scenario.code));
        trips.push_back({i, need(i, Block::Special, code, {}), sign_of(e.scenario.advantaged_side)});
      }
      if (e.goalie_pulled != Side::None) {
        trips.push_back({i, need(i, Block::Special, std::string(kPulledGoalieTerm), {}),
                         sign_of(e.goalie_pulled)});
      }
    }
    for (int s = 0; s < 2; ++s) {
      const auto& players = s == 0 ? e.home_players : e.away_players;
      const double sign = s == 0 ? 1.0 : -1.0;
      for (const auto& p : players) {
        trips.push_back({i, need(i, Block::PlayerBase, p, {}), sign});
        if (with_player_season) {
          trips.push_back({i, need(i, Block::PlayerSeason, p, e.season), sign});
        }
        if (with_player_playoff && e.playoffs) {
          trips.push_back({i, need(i, Block::PlayerPlayoff, p, e.season), sign});
        }
      }
    }
  }
  out.matrix = SparseColumnMatrix::from_triplets(events.size(), catalog.total_cols(), trips);
  return out;
}

EventRecord swap_sides(const EventRecord& e) {
  EventRecord s = e;
  std::swap(s.home_team, s.away_team);
  std::swap(s.home_players, s.away_players);
  s.by_side = flip(e.by_side);
  s.scenario.advantaged_side = flip(e.scenario.advantaged_side);
  s.goalie_pulled = flip(e.goalie_pulled);
  return s;
}

}  // namespace hpm
