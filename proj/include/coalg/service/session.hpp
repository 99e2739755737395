#pragma once

#include "../classical/game.hpp"
#include "../classical/synthesis.hpp"
#include "../dsl.hpp"
#include "../metric/distance.hpp"
#include "../metric/game.hpp"
#include "../metric/synthesis.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

namespace coalg::service
{

using json = nlohmann::json;

inline constexpr int schema_version = 1;

enum class game_kind
{
    classical,
    metric,
};

enum class human_role
{
    spoiler,
    defender,
    both, // hot-seat: every move comes from the client
    none,
};

/// Client errors, mapped to HTTP status codes by the server.
class request_error : public std::invalid_argument
{
public:
    request_error( int status, const std::string& what ) : std::invalid_argument( what ), _status( status ) {}
    [[nodiscard]] int status() const { return _status; }

private:
    int _status;
};

struct session_config
{
    std::string system_text;
    std::map< std::string, Rational > params;
    std::optional< Rational > default_top;
    game_kind kind = game_kind::classical;
    human_role human = human_role::defender;
    std::string x, y;
    Rational budget = 0;
    step2_mode mode = step2_mode::per_lambda;
    Rational slack = 0;
    std::size_t round_cap = 50; // the defender survives once this many rounds are complete
};

inline std::string utc_timestamp()
{
    using namespace std::chrono;
    const auto now = system_clock::now();
    const auto t = system_clock::to_time_t( now );
    const auto ms = duration_cast< milliseconds >( now.time_since_epoch() ).count() % 1000;
    std::tm tm{};
    gmtime_r( &t, &tm );
    std::ostringstream os;
    os << std::put_time( &tm, "%Y-%m-%dT%H:%M:%S" ) << '.' << std::setw( 3 ) << std::setfill( '0' ) << ms << 'Z';
    return os.str();
}

inline Rational json_rational( const json& v, const std::string& what )
{
    try
    {
        if ( v.is_string() )
            return parse_rational( v.get< std::string >() );
        if ( v.is_number_integer() )
            return Rational( v.get< long >() );
        if ( v.is_boolean() )
            return Rational( v.get< bool >() ? 1 : 0 );
    }
    catch ( const rational_syntax_error& e )
    {
        throw request_error( 400, what + ": " + e.what() );
    }
    throw request_error( 400, what + ": expected a rational string p/q" );
}

inline json predicate_json( const System& sys, const PredicateR& p )
{
    json o = json::object();
    for ( state_id z = 0; z < p.size(); ++z )
        o[ sys.states[ z ] ] = to_string( p[ z ] );
    return o;
}

inline json predicate_json( const System& sys, const Predicate2& p )
{
    json o = json::object();
    for ( state_id z = 0; z < p.size(); ++z )
        o[ sys.states[ z ] ] = p[ z ] ? "1" : "0";
    return o;
}

/// {state: "p/q"}; states left out are 0.
inline PredicateR parse_predicate( const System& sys, const json& o )
{
    if ( !o.is_object() )
        throw request_error( 400, "predicate must be an object mapping state ids to rationals" );
    PredicateR p( sys.size(), Rational( 0 ) );
    for ( auto it = o.begin(); it != o.end(); ++it )
    {
        auto z = sys.find( it.key() );
        if ( !z )
            throw request_error( 400, "predicate names unknown state '" + it.key() + "'" );
        p[ *z ] = json_rational( it.value(), "predicate value at " + it.key() );
    }
    return p;
}

inline Predicate2 parse_predicate2( const System& sys, const json& o )
{
    const auto r = parse_predicate( sys, o );
    Predicate2 p( r.size() );
    for ( state_id z = 0; z < r.size(); ++z )
    {
        if ( r[ z ] != 0 && r[ z ] != 1 )
            throw request_error( 400, "classical predicate values must be 0 or 1 (state " + sys.states[ z ] + ")" );
        p[ z ] = r[ z ] == 1;
    }
    return p;
}

inline json report_json( const std::vector< map_check >& report )
{
    json a = json::array();
    for ( const auto& r : report )
        a.push_back( { { "map", r.name }, { "lhs", r.lhs }, { "rhs", r.rhs }, { "slack", r.slack }, { "ok", r.ok } } );
    return a;
}

struct history_entry
{
    std::size_t seq = 0;
    std::string timestamp;
    player actor = player::spoiler;
    bool by_engine = false;
    json move;
    std::string phase_after;
    json position; // round, pair and budget before the move
};

/// One game between a human (or nobody) and the engine. All public members
/// except the constructor expect the caller to hold `mutex`.
class session
{
public:
    session( std::string id, session_config cfg ) : _id( std::move( id ) ), _cfg( std::move( cfg ) )
    {
        parse_options po;
        po.params = _cfg.params;
        po.top = _cfg.default_top;
        try
        {
            _sys = std::make_unique< System >( parse_system( _cfg.system_text, po ) );
        }
        catch ( const parse_error& e )
        {
            throw request_error( 400, std::string( "invalid system: " ) + e.what() );
        }
        auto x = _sys->find( _cfg.x ), y = _sys->find( _cfg.y );
        if ( !x || !y )
            throw request_error( 400, "unknown state in pair (" + _cfg.x + "," + _cfg.y + ")" );
        if ( _cfg.kind == game_kind::classical )
            init_classical( *x, *y );
        else
            init_metric( *x, *y );
        advance_engine();
    }

    mutable std::mutex mutex;
    std::condition_variable_any changed;

    [[nodiscard]] const std::string& id() const { return _id; }
    [[nodiscard]] const System& system() const { return *_sys; }
    [[nodiscard]] const std::vector< history_entry >& entries() const { return _history; }

    [[nodiscard]] game_phase phase() const { return _cfg.kind == game_kind::classical ? _cstate.phase : _mstate.phase; }
    [[nodiscard]] std::size_t round() const { return _cfg.kind == game_kind::classical ? _cstate.round : _mstate.round; }
    [[nodiscard]] bool finished() const
    {
        return phase() == game_phase::won || round() >= _cfg.round_cap;
    }

    /// Canonical serialization of the game state.
    [[nodiscard]] json state_json() const
    {
        return _cfg.kind == game_kind::classical ? classical_state_json( _cstate ) : metric_state_json( _mstate );
    }

    [[nodiscard]] json view() const
    {
        json v;
        v[ "schema_version" ] = schema_version;
        v[ "id" ] = _id;
        v[ "kind" ] = _cfg.kind == game_kind::classical ? "classical" : "metric";
        v[ "human" ] = role_name( _cfg.human );
        v[ "system" ] = system_to_json( *_sys );
        v[ "state" ] = state_json();
        v[ "to_move" ] = finished() ? json( nullptr ) : json( to_string( to_move( phase() ) ) );
        v[ "finished" ] = finished();
        v[ "round_cap" ] = _cfg.round_cap;
        v[ "history_length" ] = _history.size();
        if ( _cfg.kind == game_kind::classical )
        {
            v[ "step2" ] = _cfg.mode == step2_mode::per_lambda ? "per-lambda" : "lifted-order";
            v[ "maps" ] = map_names( _cgame->lambdas() );
        }
        else
        {
            v[ "maps" ] = map_names( _mgame->gammas() );
            v[ "distance" ] = to_string( _dist( _mstart.x, _mstart.y ) );
        }
        if ( _cformula )
            v[ "engine_formula" ] = to_string( *_cformula );
        if ( _mformula )
            v[ "engine_formula" ] = to_string( *_mformula );
        return v;
    }

    [[nodiscard]] json history() const
    {
        json a = json::array();
        for ( const auto& h : _history )
            a.push_back( entry_json( h ) );
        return { { "schema_version", schema_version }, { "id", _id }, { "entries", a } };
    }

    [[nodiscard]] static json entry_json( const history_entry& h )
    {
        return { { "seq", h.seq },         { "timestamp", h.timestamp }, { "actor", to_string( h.actor ) },
                 { "engine", h.by_engine }, { "move", h.move },           { "phase_after", h.phase_after },
                 { "position", h.position } };
    }

    /// Applies a human move, then lets the engine play up to the next human
    /// phase. Returns the new view plus the engine's moves.
    json submit( const json& body )
    {
        if ( phase() == game_phase::won )
            throw request_error( 409, "the game is over" );
        if ( finished() )
            throw request_error( 409, "the round cap is reached; the defender survives" );
        const auto mover = to_move( phase() );
        if ( !human_plays( mover ) )
            throw request_error( 409, std::string( "it is the " ) + to_string( mover ) + "'s turn, played by the engine" );
        if ( body.contains( "role" ) && body[ "role" ] != to_string( mover ) )
            throw request_error( 409, std::string( "it is the " ) + to_string( mover ) + "'s turn" );
        const auto before = _history.size();
        apply_json( body, false );
        advance_engine();
        json engine = json::array();
        for ( std::size_t k = before + 1; k < _history.size(); ++k )
            engine.push_back( entry_json( _history[ k ] ) );
        auto v = view();
        v[ "engine_moves" ] = engine;
        return v;
    }

    /// The move the engine would play for the side to move, without playing it.
    [[nodiscard]] json hint() const
    {
        json h;
        h[ "schema_version" ] = schema_version;
        if ( finished() )
        {
            h[ "move" ] = nullptr;
            h[ "strategy" ] = "none";
            h[ "rationale" ] = "the game is over";
            return h;
        }
        const auto mover = to_move( phase() );
        h[ "role" ] = to_string( mover );
        auto [ mv, strategy, rationale ] = engine_move( mover, true );
        h[ "move" ] = mv;
        h[ "strategy" ] = strategy;
        h[ "rationale" ] = rationale;
        return h;
    }

    /// The state obtained by folding the recorded moves from the start.
    [[nodiscard]] json replay_state() const
    {
        if ( _cfg.kind == game_kind::classical )
        {
            auto st = _cstart;
            for ( const auto& h : _history )
                st = _cgame->apply( st, classical_from_json( h.move ) );
            return classical_state_json( st );
        }
        auto st = _mstart;
        for ( const auto& h : _history )
            st = _mgame->apply( st, metric_from_json( h.move ) );
        return metric_state_json( st );
    }

private:
    static const char* role_name( human_role r )
    {
        switch ( r )
        {
        case human_role::spoiler:
            return "spoiler";
        case human_role::defender:
            return "defender";
        case human_role::both:
            return "both";
        case human_role::none:
            break;
        }
        return "none";
    }

    [[nodiscard]] bool human_plays( player p ) const
    {
        return _cfg.human == human_role::both ||
               _cfg.human == ( p == player::spoiler ? human_role::spoiler : human_role::defender );
    }

    static json map_names( const std::vector< eval_map >& maps )
    {
        json a = json::array();
        for ( const auto& m : maps )
            a.push_back( m.name );
        return a;
    }

    void init_classical( state_id x, state_id y )
    {
        _cgame = std::make_unique< classical_game >( *_sys, _cfg.mode );
        _cstart = _cgame->start( x, y );
        _cstate = _cstart;
        _cdefender = std::make_unique< classical_defender_engine >( *_cgame );
        if ( !_cdefender->partition().equivalent( x, y ) )
        {
            _cformula = synthesize_distinguishing_formula( *_sys, x, y );
            _cspoiler = std::make_unique< classical_spoiler_engine >( *_cgame, _cformula );
        }
    }

    void init_metric( state_id x, state_id y )
    {
        _mgame = std::make_unique< metric_game >( *_sys );
        try
        {
            _mstart = _mgame->start( x, y, _cfg.budget );
        }
        catch ( const illegal_move& e )
        {
            throw request_error( 400, e.what() );
        }
        _mstate = _mstart;
        auto dist = behavioural_distance( *_sys );
        _dist = dist.d;
        _mdefender = std::make_unique< metric_defender_engine >( *_mgame, _dist, _cfg.slack );
        if ( _dist( x, y ) > 0 )
        {
            metric_synthesizer syn( *_sys, std::move( dist ) );
            const auto depth = syn.distance().certificate.iterations;
            // a formula beating the budget if there is one, else the largest gap
            if ( auto c = syn.search_chain( x, y, depth, _cfg.budget, true ) )
                _mformula = *c;
            else
                _mformula = logical_distance( syn, x, y, depth ).formula;
            _mspoiler = std::make_unique< metric_spoiler_engine >( *_mgame, _mformula );
        }
    }

    json classical_state_json( const classical_game_state& st ) const
    {
        const auto& S = _sys->states;
        json j;
        j[ "phase" ] = to_string( st.phase );
        j[ "winner" ] = st.winner ? json( to_string( *st.winner ) ) : json( nullptr );
        j[ "reason" ] = st.reason;
        j[ "pair" ] = { S[ st.x ], S[ st.y ] };
        j[ "round" ] = st.round;
        if ( st.phase != game_phase::await_spoiler_pick || st.winner )
        {
            j[ "s" ] = S[ st.s ];
            j[ "t" ] = S[ st.t ];
            j[ "p1" ] = predicate_json( *_sys, st.p1 );
        }
        if ( !st.p2.empty() )
            j[ "p2" ] = predicate_json( *_sys, st.p2 );
        if ( st.phase == game_phase::await_defender_state )
        {
            j[ "i" ] = st.i;
            j[ "x_prime" ] = S[ st.x_prime ];
        }
        j[ "report" ] = report_json( st.last_report );
        return j;
    }

    json metric_state_json( const metric_game_state& st ) const
    {
        const auto& S = _sys->states;
        json j;
        j[ "phase" ] = to_string( st.phase );
        j[ "winner" ] = st.winner ? json( to_string( *st.winner ) ) : json( nullptr );
        j[ "reason" ] = st.reason;
        j[ "pair" ] = { S[ st.x ], S[ st.y ] };
        j[ "budget" ] = to_string( st.eps );
        j[ "round" ] = st.round;
        if ( st.phase != game_phase::await_spoiler_pick || st.winner )
        {
            j[ "s" ] = S[ st.s ];
            j[ "t" ] = S[ st.t ];
            j[ "p1" ] = predicate_json( *_sys, st.p1 );
        }
        if ( !st.p2.empty() )
            j[ "p2" ] = predicate_json( *_sys, st.p2 );
        if ( st.phase == game_phase::await_defender_state )
        {
            j[ "i" ] = st.i;
            j[ "x_prime" ] = S[ st.x_prime ];
        }
        j[ "report" ] = report_json( st.last_report );
        return j;
    }

    state_id state_arg( const json& body, const char* key ) const
    {
        if ( !body.contains( key ) || !body[ key ].is_string() )
            throw request_error( 400, std::string( "move needs a state id in '" ) + key + "'" );
        auto z = _sys->find( body[ key ].get< std::string >() );
        if ( !z )
            throw request_error( 400, "unknown state '" + body[ key ].get< std::string >() + "'" );
        return *z;
    }

    static std::string type_of( const json& body )
    {
        if ( !body.is_object() || !body.contains( "type" ) || !body[ "type" ].is_string() )
            throw request_error( 400, "move needs a 'type' of pick, predicate, choose or answer" );
        return body[ "type" ].get< std::string >();
    }

    int index_arg( const json& body ) const
    {
        if ( !body.contains( "index" ) || !body[ "index" ].is_number_integer() )
            throw request_error( 400, "choose needs an integer 'index' (1 or 2)" );
        return body[ "index" ].get< int >();
    }

    const json& predicate_arg( const json& body ) const
    {
        if ( !body.contains( "predicate" ) )
            throw request_error( 400, "move needs a 'predicate'" );
        return body[ "predicate" ];
    }

    classical_move classical_from_json( const json& body ) const
    {
        const auto t = type_of( body );
        if ( t == "pick" )
            return classical_move::pick( state_arg( body, "state" ), parse_predicate2( *_sys, predicate_arg( body ) ) );
        if ( t == "predicate" )
            return classical_move::reply( parse_predicate2( *_sys, predicate_arg( body ) ) );
        if ( t == "choose" )
            return classical_move::choose( index_arg( body ), state_arg( body, "state" ) );
        if ( t == "answer" )
            return classical_move::answer( state_arg( body, "state" ) );
        throw request_error( 400, "unknown move type '" + t + "'" );
    }

    metric_move metric_from_json( const json& body ) const
    {
        const auto t = type_of( body );
        if ( t == "pick" )
            return metric_move::pick( state_arg( body, "state" ), parse_predicate( *_sys, predicate_arg( body ) ) );
        if ( t == "predicate" )
            return metric_move::reply( parse_predicate( *_sys, predicate_arg( body ) ) );
        if ( t == "choose" )
            return metric_move::choose( index_arg( body ), state_arg( body, "state" ) );
        if ( t == "answer" )
            return metric_move::answer( state_arg( body, "state" ) );
        throw request_error( 400, "unknown move type '" + t + "'" );
    }

    template < class Move >
    json move_json( const Move& mv ) const
    {
        const auto& S = _sys->states;
        switch ( mv.k )
        {
        case Move::kind::pick:
            return { { "type", "pick" }, { "state", S[ mv.state ] }, { "predicate", predicate_json( *_sys, mv.predicate ) } };
        case Move::kind::predicate:
            return { { "type", "predicate" }, { "predicate", predicate_json( *_sys, mv.predicate ) } };
        case Move::kind::choose:
            return { { "type", "choose" }, { "index", mv.index }, { "state", S[ mv.state ] } };
        case Move::kind::answer:
            return { { "type", "answer" }, { "state", S[ mv.state ] } };
        }
        return {};
    }

    /// Normalizes, applies and records one move (human or engine).
    void apply_json( const json& body, bool by_engine )
    {
        const auto mover = to_move( phase() );
        json position = state_json();
        for ( const char* k : { "phase", "winner", "reason", "s", "t", "p1", "p2", "i", "x_prime", "report" } )
            position.erase( k );
        json canonical;
        if ( _cfg.kind == game_kind::classical )
        {
            const auto mv = classical_from_json( body );
            _cstate = _cgame->apply( _cstate, mv );
            canonical = move_json( mv );
        }
        else
        {
            const auto mv = metric_from_json( body );
            _mstate = _mgame->apply( _mstate, mv );
            canonical = move_json( mv );
        }
        _history.push_back( { _history.size() + 1, utc_timestamp(), mover, by_engine, canonical, to_string( phase() ),
                              std::move( position ) } );
        changed.notify_all();
    }

    struct engine_choice
    {
        json move;
        std::string strategy;
        std::string rationale;
    };

    /// The engine's move for `who`; with `dry` the spoiler's formula tracker is
    /// not advanced.
    engine_choice engine_move( player who, bool dry ) const
    {
        const auto& S = _sys->states;
        if ( _cfg.kind == game_kind::classical )
        {
            const auto& st = _cstate;
            if ( who == player::defender )
            {
                auto mv = _cdefender->reply( st );
                if ( !mv )
                    return { nullptr, "resign", "no admissible move exists" };
                std::string strat = "closure";
                if ( mv->k == classical_move::kind::predicate && mv->predicate != closure( _cdefender->partition(), st.p1 ) )
                    strat = "lexicographic-admissible";
                if ( mv->k == classical_move::kind::answer )
                    strat = _cdefender->partition().equivalent( mv->state, st.x_prime ) ? "equivalent-state" : "first-legal";
                return { move_json( *mv ), strat, "close p1 under behavioural equivalence; answer with an equivalent state" };
            }
            if ( _cspoiler )
            {
                auto eng = *_cspoiler;
                auto mv = eng.reply( st );
                if ( !dry )
                    *_cspoiler = eng;
                return { move_json( mv ), "formula", "follow " + to_string( *eng.current() ) };
            }
            return { move_json( fallback_spoiler_classical( st ) ), "fallback", "the pair is equivalent; no formula separates it" };
        }
        const auto& st = _mstate;
        if ( who == player::defender )
        {
            auto mv = _mdefender->reply( st );
            if ( !mv )
                return { nullptr, "resign", "no admissible move exists" };
            std::string strat = "envelope";
            if ( mv->k == metric_move::kind::predicate &&
                 std::all_of( mv->predicate.begin(), mv->predicate.end(), [ & ]( const Rational& v ) { return v == _sys->top; } ) )
                strat = "constant-top";
            if ( mv->k == metric_move::kind::answer )
                strat = st.i == 1 && mv->state == st.x_prime ? "copycat" : "argmax";
            return { move_json( *mv ), strat, "nonexpansive upper envelope of p1 for the behavioural distance" };
        }
        if ( _mspoiler )
        {
            auto eng = *_mspoiler;
            auto mv = eng.reply( st );
            if ( !dry )
                *_mspoiler = eng;
            std::string why = "follow " + to_string( *eng.current() );
            if ( mv.k == metric_move::kind::pick && eng.current()->k == metric_formula::kind::modal )
                why = "play " + S[ mv.state ] + ", p1 = [[" + to_string( *eng.current()->sub() ) + "]]";
            return { move_json( mv ), "formula", why };
        }
        return { move_json( fallback_spoiler_metric( st ) ), "fallback", "the pair is at distance 0" };
    }

    classical_move fallback_spoiler_classical( const classical_game_state& st ) const
    {
        if ( st.phase == game_phase::await_spoiler_pick )
            return classical_move::pick( st.x, Predicate2( _sys->size(), true ) );
        return classical_move::choose( 1, st.s );
    }

    metric_move fallback_spoiler_metric( const metric_game_state& st ) const
    {
        if ( st.phase == game_phase::await_spoiler_pick )
            return metric_move::pick( st.x, PredicateR( _sys->size(), _sys->top ) );
        return metric_move::choose( 1, st.s );
    }

    void advance_engine()
    {
        while ( !finished() )
        {
            const auto mover = to_move( phase() );
            if ( human_plays( mover ) )
                return;
            auto choice = engine_move( mover, false );
            if ( choice.move.is_null() )
            {
                // resignation ends the game
                if ( _cfg.kind == game_kind::classical )
                {
                    _cstate.phase = game_phase::won;
                    _cstate.winner = mover == player::spoiler ? player::defender : player::spoiler;
                    _cstate.reason = std::string( to_string( mover ) ) + " resigns";
                }
                else
                {
                    _mstate.phase = game_phase::won;
                    _mstate.winner = mover == player::spoiler ? player::defender : player::spoiler;
                    _mstate.reason = std::string( to_string( mover ) ) + " resigns";
                }
                changed.notify_all();
                return;
            }
            apply_json( choice.move, true );
        }
    }

    std::string _id;
    session_config _cfg;
    std::unique_ptr< System > _sys;
    std::vector< history_entry > _history;

    std::unique_ptr< classical_game > _cgame;
    classical_game_state _cstart, _cstate;
    std::unique_ptr< classical_defender_engine > _cdefender;
    mutable std::unique_ptr< classical_spoiler_engine > _cspoiler;
    cformula _cformula;

    std::unique_ptr< metric_game > _mgame;
    metric_game_state _mstart, _mstate;
    pmetric _dist;
    std::unique_ptr< metric_defender_engine > _mdefender;
    mutable std::unique_ptr< metric_spoiler_engine > _mspoiler;
    mformula _mformula;
};

/// Sessions by id; concurrent lookups, exclusive inserts.
class session_store
{
public:
    std::shared_ptr< session > create( session_config cfg )
    {
        auto id = next_id();
        auto s = std::make_shared< session >( id, std::move( cfg ) );
        std::unique_lock lock( _mutex );
        _sessions.emplace( id, s );
        return s;
    }

    [[nodiscard]] std::shared_ptr< session > find( const std::string& id ) const
    {
        std::shared_lock lock( _mutex );
        auto it = _sessions.find( id );
        return it == _sessions.end() ? nullptr : it->second;
    }

    [[nodiscard]] std::size_t size() const
    {
        std::shared_lock lock( _mutex );
        return _sessions.size();
    }

private:
    std::string next_id()
    {
        static constexpr char hex[] = "0123456789abcdef";
        std::string s = "s" + std::to_string( ++_counter ) + "-";
        std::lock_guard lock( _rng_mutex );
        for ( int i = 0; i < 8; ++i )
            s += hex[ _rng() % 16 ];
        return s;
    }

    mutable std::shared_mutex _mutex;
    std::map< std::string, std::shared_ptr< session > > _sessions;
    std::atomic< std::size_t > _counter{ 0 };
    std::mutex _rng_mutex;
    std::mt19937 _rng{ std::random_device{}() };
};

inline session_config config_from_json( const json& body )
{
    if ( !body.is_object() )
        throw request_error( 400, "request body must be a JSON object" );
    session_config c;
    if ( !body.contains( "system" ) || !body[ "system" ].is_string() )
        throw request_error( 400, "'system' must hold the system document text" );
    c.system_text = body[ "system" ].get< std::string >();
    if ( body.contains( "params" ) )
    {
        if ( !body[ "params" ].is_object() )
            throw request_error( 400, "'params' must be an object" );
        for ( auto it = body[ "params" ].begin(); it != body[ "params" ].end(); ++it )
            c.params[ it.key() ] = json_rational( it.value(), "parameter " + it.key() );
    }
    const auto kind = body.value( "kind", std::string( "classical" ) );
    if ( kind != "classical" && kind != "metric" )
        throw request_error( 400, "'kind' must be classical or metric" );
    c.kind = kind == "classical" ? game_kind::classical : game_kind::metric;
    const auto human = body.value( "human", std::string( "defender" ) );
    if ( human == "spoiler" )
        c.human = human_role::spoiler;
    else if ( human == "defender" )
        c.human = human_role::defender;
    else if ( human == "both" )
        c.human = human_role::both;
    else if ( human == "none" )
        c.human = human_role::none;
    else
        throw request_error( 400, "'human' must be spoiler, defender, both or none" );
    if ( !body.contains( "pair" ) || !body[ "pair" ].is_array() || body[ "pair" ].size() != 2 ||
         !body[ "pair" ][ 0 ].is_string() || !body[ "pair" ][ 1 ].is_string() )
        throw request_error( 400, "'pair' must be two state ids" );
    c.x = body[ "pair" ][ 0 ].get< std::string >();
    c.y = body[ "pair" ][ 1 ].get< std::string >();
    if ( body.contains( "budget" ) )
        c.budget = json_rational( body[ "budget" ], "budget" );
    const auto step2 = body.value( "step2", std::string( "per-lambda" ) );
    if ( step2 != "per-lambda" && step2 != "lifted-order" )
        throw request_error( 400, "'step2' must be per-lambda or lifted-order" );
    c.mode = step2 == "per-lambda" ? step2_mode::per_lambda : step2_mode::lifted_order;
    if ( body.contains( "slack" ) )
        c.slack = json_rational( body[ "slack" ], "slack" );
    if ( body.contains( "round_cap" ) )
    {
        if ( !body[ "round_cap" ].is_number_unsigned() )
            throw request_error( 400, "'round_cap' must be a non-negative integer" );
        c.round_cap = body[ "round_cap" ].get< std::size_t >();
    }
    return c;
}

} // namespace coalg::service
