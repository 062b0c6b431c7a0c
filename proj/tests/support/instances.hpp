#pragma once

#include <cstdint>

#include "hpm/design.hpp"
#include "hpm/rng.hpp"
#include "hpm/solver.hpp"
#include "hpm/synth.hpp"

namespace hpm::testing {

struct Instance {
  SynthOutput synth;
  DesignBuild build;
  PenaltySpec penalty;
};

inline Instance make_instance(const SynthConfig& config, const DesignOptions& options) {
  Instance inst;
  inst.synth = generate(config);
  const auto catalog = build_catalog(inst.synth.events, options);
  inst.build = build_design(inst.synth.events, catalog);
  inst.penalty = PenaltySpec::for_catalog(inst.build.catalog);
  return inst;
}

/// The i-th of a family of random league instances spanning 500-5000 events
/// and 30-200 columns, with unpenalized team-season and scenario blocks next
/// to penalized player blocks. Draws outside the column range or whose
/// unpenalized block is one-signed (no finite fit) are redrawn.
inline Instance random_league_instance(std::uint64_t index) {
  Rng rng(0x5eed0000ULL + index);
  for (std::uint64_t attempt = 0;; ++attempt) {
    SynthConfig c;
    c.n_teams = 2 + static_cast<std::size_t>(rng.below(5));           // 2..6
    c.players_per_team = 8 + static_cast<std::size_t>(rng.below(10));  // 8..17
    c.goalies_per_team = 1 + static_cast<std::size_t>(rng.below(2));
    c.n_seasons = 1 + static_cast<std::size_t>(rng.below(2));
    c.n_events = 500 + static_cast<std::size_t>(rng.below(4501));
    c.n_planted = static_cast<std::size_t>(rng.below(6));
    c.true_alpha = 0.1;
    c.team_effect_sd = 0.1;
    c.special_effect = 0.5;
    c.line_strength = rng.uniform();
    c.playoff_fraction = rng.bernoulli(0.5) ? 0.1 : 0.0;
    c.seed = 1000 + index + 1000000 * attempt;
    DesignOptions o = DesignOptions::full();
    o.player_season = c.n_seasons > 1;
    auto inst = make_instance(c, o);
    const std::size_t cols = inst.build.matrix.n_cols();
    if (cols < 30 || cols > 200) continue;
    if (!one_signed_column(inst.build.matrix, inst.build.y, inst.penalty)) return inst;
  }
}

}  // namespace hpm::testing
