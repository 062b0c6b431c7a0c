#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "hpm/events.hpp"
#include "hpm/sparse.hpp"

namespace hpm {

/// Column blocks, in catalog order.
enum class Block { TeamSeason, Special, PlayerBase, PlayerSeason, PlayerPlayoff };

std::string_view to_string(Block block);
Block parse_block(std::string_view text);

inline constexpr std::string_view kPulledGoalieTerm = "PULLED_GOALIE";

/// Which blocks of the full model to include. `players_only()` keeps just the
/// constant per-player effects.
struct DesignOptions {
  bool team_season = true;
  bool special = true;
  bool player_season = true;
  bool player_playoff = true;

  static DesignOptions full() { return {}; }
  static DesignOptions players_only() { return {false, false, false, false}; }
};

struct TermRef {
  Block block;
  std::string key;     // team, scenario code, or player id
  std::string season;  // empty for Special and PlayerBase
};

/// Bijection between model terms and design columns. Blocks are concatenated
/// in `Block` order; within a block entries are sorted by (key, season).
class ColumnCatalog {
 public:
  std::vector<std::pair<std::string, std::string>> team_season;  // (team, season)
  std::vector<std::string> special;                              // scenario codes, PULLED_GOALIE
  std::vector<std::string> player_base;
  std::vector<std::pair<std::string, std::string>> player_season;   // (player, season)
  std::vector<std::pair<std::string, std::string>> player_playoff;  // (player, season)

  std::size_t total_cols() const noexcept;
  std::size_t block_offset(Block block) const noexcept;
  std::size_t block_size(Block block) const noexcept;
  Block block_of(std::size_t col) const;
  TermRef term(std::size_t col) const;
  /// Human-readable term, e.g. "COL|2002-2003" or "f1".
  std::string label(std::size_t col) const;

  /// Column index, or npos when the term is not in the catalog.
  std::size_t find(Block block, const std::string& key, const std::string& season = {}) const;

  std::size_t player_count() const noexcept { return player_base.size(); }

  /// FNV-1a over "block,term" lines; identifies the column layout.
  std::uint64_t hash() const;

  /// `col_index,block,term` CSV.
  std::string to_csv() const;

  void reindex();

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

/// Throws std::invalid_argument on an empty event list.
ColumnCatalog build_catalog(const std::vector<EventRecord>& events,
                            const DesignOptions& options = {});

struct RowMeta {
  std::string season;
  bool playoffs = false;
  std::string home_team;
  std::string away_team;
  std::size_t home_count = 0;
  std::size_t away_count = 0;
};

struct DesignBuild {
  SparseColumnMatrix matrix;
  std::vector<double> y;
  ColumnCatalog catalog;
  std::vector<RowMeta> row_meta;
};

/// Rows follow event order. Home-side terms get +1, away-side terms -1.
/// A block is filled only when the catalog has it. Throws
/// std::invalid_argument if an event references a term missing from the
/// catalog.
DesignBuild build_design(const std::vector<EventRecord>& events, const ColumnCatalog& catalog);

/// Mirror image of an event: home and away roles swapped.
EventRecord swap_sides(const EventRecord& event);

}  // namespace hpm
