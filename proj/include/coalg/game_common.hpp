#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace coalg
{

enum class game_phase
{
    await_spoiler_pick,      // Step 1
    await_defender_predicate, // Step 2
    await_spoiler_state,     // Step 3
    await_defender_state,    // Step 4
    won,
};

enum class player
{
    spoiler,
    defender,
};

inline const char* to_string( game_phase p )
{
    switch ( p )
    {
    case game_phase::await_spoiler_pick:
        return "AwaitSpoilerPick";
    case game_phase::await_defender_predicate:
        return "AwaitDefenderPredicate";
    case game_phase::await_spoiler_state:
        return "AwaitSpoilerState";
    case game_phase::await_defender_state:
        return "AwaitDefenderState";
    case game_phase::won:
        return "Won";
    }
    return "?";
}

inline const char* to_string( player p ) { return p == player::spoiler ? "spoiler" : "defender"; }

inline player to_move( game_phase p )
{
    return p == game_phase::await_spoiler_pick || p == game_phase::await_spoiler_state ? player::spoiler
                                                                                        : player::defender;
}

/// Per-map outcome of a Step-2 check: `slack` = ε - d_⊖(lhs, rhs) in the metric
/// game; in the classical game slack is 0 or -1.
struct map_check
{
    std::string name;
    std::string lhs;
    std::string rhs;
    std::string slack;
    bool ok = true;
};

/// A move that the rules do not allow in the current phase; carries the violated
/// condition and, for Step 2, the per-map report.
class illegal_move : public std::invalid_argument
{
public:
    illegal_move( const std::string& why, std::vector< map_check > report = {} )
        : std::invalid_argument( why ), _report( std::move( report ) )
    {}

    [[nodiscard]] const std::vector< map_check >& report() const { return _report; }

private:
    std::vector< map_check > _report;
};

} // namespace coalg
