#pragma once

#include "../game_common.hpp"
#include "../system.hpp"
#include "formula.hpp"
#include "partition.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace coalg
{

/// How Step 2 is judged: for every generated λ separately (default), or by the
/// lifted order ≤^F on F2.
enum class step2_mode
{
    per_lambda,
    lifted_order,
};

struct classical_check
{
    bool ok = true;
    std::vector< map_check > report;
};

/// Step-2 condition for D's predicate p2 against S's p1 (played at s, answered at t).
inline classical_check check_defender_predicate( const System& sys, const std::vector< eval_map >& lambdas, state_id s,
                                                 state_id t, const Predicate2& p1, const Predicate2& p2,
                                                 step2_mode mode = step2_mode::per_lambda )
{
    classical_check c;
    const auto a = image( sys, p1, s ), b = image( sys, p2, t );
    if ( mode == step2_mode::lifted_order )
    {
        c.ok = lifted_order_leq( *sys.expr, a, b );
        c.report.push_back( { "<=F", "", "", c.ok ? "0" : "-1", c.ok } );
        return c;
    }
    for ( const auto& m : lambdas )
    {
        const bool l = eval_lambda( m.steps, *sys.expr, a );
        const bool r = eval_lambda( m.steps, *sys.expr, b );
        const bool ok = !l || r;
        c.report.push_back( { m.name, l ? "1" : "0", r ? "1" : "0", ok ? "0" : "-1", ok } );
        c.ok = c.ok && ok;
    }
    return c;
}

struct classical_move
{
    enum class kind
    {
        pick,      // Step 1: state s and predicate p1
        predicate, // Step 2: predicate p2
        choose,    // Step 3: index i and state x'
        answer,    // Step 4: state y'
    } k = kind::pick;
    state_id state = 0;
    Predicate2 predicate;
    int index = 0;

    static classical_move pick( state_id s, Predicate2 p ) { return { kind::pick, s, std::move( p ), 0 }; }
    static classical_move reply( Predicate2 p ) { return { kind::predicate, 0, std::move( p ), 0 }; }
    static classical_move choose( int i, state_id x ) { return { kind::choose, x, {}, i }; }
    static classical_move answer( state_id y ) { return { kind::answer, y, {}, 0 }; }
};

struct classical_game_state
{
    game_phase phase = game_phase::await_spoiler_pick;
    std::optional< player > winner;
    std::string reason;
    state_id x = 0, y = 0;
    state_id s = 0, t = 0;
    Predicate2 p1, p2;
    int i = 0;
    state_id x_prime = 0;
    std::size_t round = 0;
    std::vector< map_check > last_report;
};

/// Rules of the classical game for one system: a pure transition function on
/// classical_game_state.
class classical_game
{
public:
    explicit classical_game( const System& sys, step2_mode mode = step2_mode::per_lambda )
        : _sys( &sys ), _lambdas( lambdas_of( sys ) ), _mode( mode )
    {}

    [[nodiscard]] const System& system() const { return *_sys; }
    [[nodiscard]] const std::vector< eval_map >& lambdas() const { return _lambdas; }
    [[nodiscard]] step2_mode mode() const { return _mode; }

    [[nodiscard]] classical_game_state start( state_id x, state_id y ) const
    {
        check_state( x );
        check_state( y );
        classical_game_state st;
        st.x = x;
        st.y = y;
        return st;
    }

    [[nodiscard]] classical_check check( state_id s, state_id t, const Predicate2& p1, const Predicate2& p2 ) const
    {
        return check_defender_predicate( *_sys, _lambdas, s, t, p1, p2, _mode );
    }

    [[nodiscard]] classical_game_state apply( classical_game_state st, const classical_move& mv ) const
    {
        using K = classical_move::kind;
        const auto n = _sys->size();
        auto expect_phase = [ & ]( game_phase p, K k ) {
            if ( st.phase == game_phase::won )
                throw illegal_move( "the game is over" );
            if ( st.phase != p || mv.k != k )
                throw illegal_move( std::string( "move not allowed in phase " ) + to_string( st.phase ) );
        };
        auto check_predicate = [ & ]( const Predicate2& p ) {
            if ( p.size() != n )
                throw illegal_move( "predicate must assign a value to each of the " + std::to_string( n ) + " states" );
        };
        switch ( st.phase )
        {
        case game_phase::await_spoiler_pick:
        {
            expect_phase( game_phase::await_spoiler_pick, K::pick );
            check_predicate( mv.predicate );
            if ( mv.state != st.x && mv.state != st.y )
                throw illegal_move( "Step 1: s must be one of the current pair" );
            st.s = mv.state;
            st.t = mv.state == st.x ? st.y : st.x;
            st.p1 = mv.predicate;
            st.p2.clear();
            st.last_report.clear();
            st.phase = game_phase::await_defender_predicate;
            // monotone maps: if even the constant-1 predicate fails, nothing passes
            if ( !check( st.s, st.t, st.p1, Predicate2( n, true ) ).ok )
                return win( std::move( st ), player::spoiler, "defender has no admissible predicate at Step 2" );
            return st;
        }
        case game_phase::await_defender_predicate:
        {
            expect_phase( game_phase::await_defender_predicate, K::predicate );
            check_predicate( mv.predicate );
            auto c = check( st.s, st.t, st.p1, mv.predicate );
            if ( !c.ok )
            {
                std::string failed;
                for ( const auto& r : c.report )
                    if ( !r.ok )
                        failed += ( failed.empty() ? "" : ", " ) + r.name;
                throw illegal_move( "Step 2: predicate violates " + failed, c.report );
            }
            st.p2 = mv.predicate;
            st.last_report = std::move( c.report );
            st.phase = game_phase::await_spoiler_state;
            if ( none( st.p1 ) && none( st.p2 ) )
                return win( std::move( st ), player::defender, "spoiler has no state to pick at Step 3" );
            return st;
        }
        case game_phase::await_spoiler_state:
        {
            expect_phase( game_phase::await_spoiler_state, K::choose );
            if ( mv.index != 1 && mv.index != 2 )
                throw illegal_move( "Step 3: index must be 1 or 2" );
            check_state( mv.state );
            const auto& pi = mv.index == 1 ? st.p1 : st.p2;
            if ( !pi[ mv.state ] )
                throw illegal_move( "Step 3: p" + std::to_string( mv.index ) + "(" + _sys->states[ mv.state ] + ") must be 1" );
            st.i = mv.index;
            st.x_prime = mv.state;
            st.phase = game_phase::await_defender_state;
            if ( none( mv.index == 1 ? st.p2 : st.p1 ) )
                return win( std::move( st ), player::spoiler, "defender has no state to answer at Step 4" );
            return st;
        }
        case game_phase::await_defender_state:
        {
            expect_phase( game_phase::await_defender_state, K::answer );
            check_state( mv.state );
            const auto& pj = st.i == 1 ? st.p2 : st.p1;
            if ( !pj[ mv.state ] )
                throw illegal_move( "Step 4: p" + std::to_string( st.i == 1 ? 2 : 1 ) + "(" + _sys->states[ mv.state ] +
                                    ") must be 1" );
            st.x = st.x_prime;
            st.y = mv.state;
            ++st.round;
            st.phase = game_phase::await_spoiler_pick;
            return st;
        }
        case game_phase::won:
            throw illegal_move( "the game is over" );
        }
        return st;
    }

private:
    static bool none( const Predicate2& p )
    {
        for ( bool b : p )
            if ( b )
                return false;
        return true;
    }

    static classical_game_state win( classical_game_state st, player w, std::string why )
    {
        st.phase = game_phase::won;
        st.winner = w;
        st.reason = std::move( why );
        return st;
    }

    void check_state( state_id z ) const
    {
        if ( z >= _sys->size() )
            throw illegal_move( "unknown state #" + std::to_string( z ) );
    }

    const System* _sys;
    std::vector< eval_map > _lambdas;
    step2_mode _mode;
};

/// Predicates in lexicographic order of (p(x_0), ..., p(x_{n-1})) with 0 < 1.
inline Predicate2 nth_predicate( std::size_t n, std::uint64_t m )
{
    Predicate2 p( n );
    for ( std::size_t k = 0; k < n; ++k )
        p[ k ] = m >> ( n - 1 - k ) & 1;
    return p;
}

/// Defender from the behavioural equivalence: close p1 under ∼ at Step 2, answer
/// with an equivalent state at Step 4. When the pair is not equivalent the
/// closure may fail; then the lexicographically smallest admissible predicate is
/// played (|X| ≤ 16), else the constant-1 predicate.
class classical_defender_engine
{
public:
    explicit classical_defender_engine( const classical_game& g ) : _g( &g ), _part( behavioural_equivalence( g.system() ) )
    {}

    [[nodiscard]] const Partition& partition() const { return _part; }

    /// nullopt: the defender resigns.
    [[nodiscard]] std::optional< classical_move > reply( const classical_game_state& st ) const
    {
        const auto n = _g->system().size();
        if ( st.phase == game_phase::await_defender_predicate )
        {
            auto p2 = closure( _part, st.p1 );
            if ( _g->check( st.s, st.t, st.p1, p2 ).ok )
                return classical_move::reply( p2 );
            if ( n <= 16 )
            {
                for ( std::uint64_t m = 0; m < ( std::uint64_t( 1 ) << n ); ++m )
                {
                    auto p = nth_predicate( n, m );
                    if ( _g->check( st.s, st.t, st.p1, p ).ok )
                        return classical_move::reply( p );
                }
                return std::nullopt;
            }
            Predicate2 all( n, true );
            if ( _g->check( st.s, st.t, st.p1, all ).ok )
                return classical_move::reply( all );
            return std::nullopt;
        }
        if ( st.phase == game_phase::await_defender_state )
        {
            const auto& pj = st.i == 1 ? st.p2 : st.p1;
            std::optional< state_id > fallback;
            for ( state_id z = 0; z < n; ++z )
            {
                if ( !pj[ z ] )
                    continue;
                if ( _part.equivalent( z, st.x_prime ) )
                    return classical_move::answer( z );
                if ( !fallback )
                    fallback = z;
            }
            if ( fallback )
                return classical_move::answer( *fallback );
        }
        return std::nullopt;
    }

private:
    const classical_game* _g;
    Partition _part;
};

/// Spoiler driven by a distinguishing formula. Conjunction: descend into a
/// conjunct failing at the weaker state; negation: swap roles; [λ]ψ: play the
/// satisfying state with p1 = ⟦ψ⟧, then at Step 3 pick from p2 a state violating ψ.
class classical_spoiler_engine
{
public:
    classical_spoiler_engine( const classical_game& g, cformula phi )
        : _g( &g ), _eval( std::make_shared< classical_evaluator >( g.system() ) ), _current( std::move( phi ) )
    {}

    [[nodiscard]] const cformula& current() const { return _current; }

    /// The move for a spoiler phase; updates the tracked subformula.
    classical_move reply( const classical_game_state& st )
    {
        const auto n = _g->system().size();
        if ( st.phase == game_phase::await_spoiler_pick )
        {
            auto f = _current;
            const auto& v0 = ( *_eval )( f );
            state_id sat = v0[ st.x ] ? st.x : st.y;
            state_id unsat = sat == st.x ? st.y : st.x;
            if ( v0[ sat ] == v0[ unsat ] )
                return classical_move::pick( st.x, Predicate2( n, true ) ); // formula no longer distinguishes
            while ( f->k != classical_formula::kind::modal )
            {
                if ( f->k == classical_formula::kind::neg )
                {
                    f = f->sub();
                    std::swap( sat, unsat );
                    continue;
                }
                for ( const auto& c : f->subs )
                    if ( !( *_eval )( c )[ unsat ] )
                    {
                        f = c;
                        break;
                    }
            }
            _current = f;
            return classical_move::pick( sat, ( *_eval )( f->sub() ) );
        }
        if ( st.phase == game_phase::await_spoiler_state )
        {
            auto psi = _current->k == classical_formula::kind::modal ? _current->sub() : _current;
            const auto& v = ( *_eval )( psi );
            _current = psi;
            for ( state_id z = 0; z < n; ++z )
                if ( st.p2[ z ] && !v[ z ] )
                    return classical_move::choose( 2, z );
            for ( state_id z = 0; z < n; ++z )
                if ( st.p1[ z ] )
                    return classical_move::choose( 1, z );
            for ( state_id z = 0; z < n; ++z )
                if ( st.p2[ z ] )
                    return classical_move::choose( 2, z );
        }
        throw illegal_move( "spoiler engine asked to move outside a spoiler phase" );
    }

private:
    const classical_game* _g;
    std::shared_ptr< classical_evaluator > _eval;
    cformula _current;
};

struct playout_result
{
    std::optional< player > winner; // nullopt: round cap reached with no winner
    std::size_t rounds = 0;
    std::vector< std::string > transcript;
};

inline std::string format_predicate( const System& sys, const Predicate2& p )
{
    std::string s = "{";
    bool first = true;
    for ( state_id z = 0; z < p.size(); ++z )
        if ( p[ z ] )
        {
            s += ( first ? "" : "," ) + sys.states[ z ];
            first = false;
        }
    return s + "}";
}

inline std::string describe( const System& sys, const classical_move& mv )
{
    switch ( mv.k )
    {
    case classical_move::kind::pick:
        return "S: s=" + sys.states[ mv.state ] + " p1=" + format_predicate( sys, mv.predicate );
    case classical_move::kind::predicate:
        return "D: p2=" + format_predicate( sys, mv.predicate );
    case classical_move::kind::choose:
        return "S: p" + std::to_string( mv.index ) + " x'=" + sys.states[ mv.state ];
    case classical_move::kind::answer:
        return "D: y'=" + sys.states[ mv.state ];
    }
    return {};
}

/// Engine-vs-engine (or any two move sources) playout up to a round cap.
template < class Spoiler, class Defender >
playout_result play_classical( const classical_game& g, classical_game_state st, Spoiler&& spoiler, Defender&& defender,
                               std::size_t round_cap )
{
    playout_result r;
    const auto& sys = g.system();
    while ( st.phase != game_phase::won && st.round < round_cap )
    {
        if ( st.phase == game_phase::await_spoiler_pick )
            r.transcript.push_back( "round " + std::to_string( st.round + 1 ) + ": (" + sys.states[ st.x ] + "," +
                                    sys.states[ st.y ] + ")" );
        std::optional< classical_move > mv;
        if ( to_move( st.phase ) == player::spoiler )
            mv = spoiler( st );
        else
            mv = defender( st );
        if ( !mv )
        {
            r.transcript.push_back( std::string( to_string( to_move( st.phase ) ) ) + " resigns" );
            r.winner = to_move( st.phase ) == player::spoiler ? player::defender : player::spoiler;
            r.rounds = st.round + 1;
            return r;
        }
        r.transcript.push_back( describe( sys, *mv ) );
        st = g.apply( std::move( st ), *mv );
    }
    if ( st.phase == game_phase::won )
    {
        r.winner = st.winner;
        r.transcript.push_back( std::string( to_string( *st.winner ) ) + " wins: " + st.reason );
        r.rounds = st.round + 1;
    }
    else
        r.rounds = st.round;
    return r;
}

class arena_too_large : public std::runtime_error
{
public:
    arena_too_large( std::size_t n, std::size_t bound )
        : std::runtime_error( "arena has " + std::to_string( n ) + " states; exhaustive solving is limited to " +
                              std::to_string( bound ) )
    {}
};

struct classical_solution
{
    player winner = player::defender;
    /// Pairs from which the defender wins (symmetric, reflexive).
    std::vector< std::vector< bool > > defender_region;
    /// For each spoiler-won pair: the Step-1 move that wins and the attractor rank.
    struct spoiler_entry
    {
        state_id s;
        Predicate2 p1;
        std::size_t rank;
    };
    std::map< std::pair< state_id, state_id >, spoiler_entry > spoiler_strategy;

    /// The defender's positional reply: every state related to some member of p1.
    [[nodiscard]] Predicate2 defender_reply( const Predicate2& p1 ) const
    {
        Predicate2 out( p1.size(), false );
        for ( state_id u = 0; u < p1.size(); ++u )
            if ( p1[ u ] )
                for ( state_id z = 0; z < p1.size(); ++z )
                    if ( defender_region[ u ][ z ] )
                        out[ z ] = true;
        return out;
    }
};

/// Greatest fixpoint of the defender's safe region. With monotone maps the best
/// reply to p1 against a region W is its W-image: it is the largest predicate
/// every member of which the defender can match at Step 4, so a pair survives
/// iff that reply passes Step 2 for every s and p1.
inline classical_solution solve_classical_game( const classical_game& g, state_id x, state_id y, std::size_t bound = 10 )
{
    const auto& sys = g.system();
    const auto n = sys.size();
    if ( n > bound )
        throw arena_too_large( n, bound );
    classical_solution sol;
    auto& W = sol.defender_region;
    W.assign( n, std::vector< bool >( n, true ) );

    // λ-vectors of Fp(α(s)) depend only on p restricted to the successors of s
    std::vector< std::vector< state_id > > succ( n );
    for ( state_id s = 0; s < n; ++s )
        succ[ s ] = successors( sys, s );
    std::map< std::pair< state_id, std::uint64_t >, std::vector< bool > > cache;
    auto signature = [ & ]( state_id s, const Predicate2& p ) -> const std::vector< bool >& {
        std::uint64_t key = 0;
        for ( std::size_t k = 0; k < succ[ s ].size(); ++k )
            key |= std::uint64_t( p[ succ[ s ][ k ] ] ) << k;
        auto [ it, fresh ] = cache.try_emplace( { s, key } );
        if ( fresh )
        {
            const auto v = image( sys, p, s );
            for ( const auto& m : g.lambdas() )
                it->second.push_back( eval_lambda( m.steps, *sys.expr, v ) );
        }
        return it->second;
    };
    auto admissible = [ & ]( state_id s, state_id t, const Predicate2& p1, const Predicate2& p2 ) {
        if ( g.mode() == step2_mode::lifted_order )
            return g.check( s, t, p1, p2 ).ok;
        const auto& a = signature( s, p1 );
        const auto& b = signature( t, p2 );
        for ( std::size_t k = 0; k < a.size(); ++k )
            if ( a[ k ] && !b[ k ] )
                return false;
        return true;
    };

    for ( std::size_t rank = 1;; ++rank )
    {
        std::vector< std::pair< state_id, state_id > > removed;
        for ( state_id a = 0; a < n; ++a )
            for ( state_id b = a + 1; b < n; ++b )
            {
                if ( !W[ a ][ b ] )
                    continue;
                std::optional< classical_solution::spoiler_entry > win;
                for ( int side = 0; side < 2 && !win; ++side )
                {
                    const auto s = side == 0 ? a : b, t = side == 0 ? b : a;
                    for ( std::uint64_t m = 0; m < ( std::uint64_t( 1 ) << n ) && !win; ++m )
                    {
                        auto p1 = nth_predicate( n, m );
                        if ( !admissible( s, t, p1, sol.defender_reply( p1 ) ) )
                            win = classical_solution::spoiler_entry{ s, p1, rank };
                    }
                }
                if ( win )
                {
                    removed.emplace_back( a, b );
                    sol.spoiler_strategy[ { a, b } ] = *win;
                    sol.spoiler_strategy[ { b, a } ] = *win;
                }
            }
        if ( removed.empty() )
            break;
        for ( auto [ a, b ] : removed )
            W[ a ][ b ] = W[ b ][ a ] = false;
    }
    sol.winner = W[ x ][ y ] ? player::defender : player::spoiler;
    return sol;
}

/// Does the formula-driven spoiler beat every defender strategy from `st` within
/// `rounds` rounds? Enumerates all admissible Step-2 predicates and all legal
/// Step-4 answers.
inline bool spoiler_beats_all_defenders( const classical_game& g, const classical_game_state& st,
                                         const classical_spoiler_engine& spoiler, std::size_t rounds,
                                         std::size_t* positions = nullptr )
{
    const auto n = g.system().size();
    std::map< std::tuple< state_id, state_id, const classical_formula*, std::size_t >, bool > memo;
    auto rec = [ & ]( auto&& self, const classical_game_state& s0, classical_spoiler_engine sp, std::size_t left ) -> bool {
        if ( s0.phase == game_phase::won )
            return s0.winner == player::spoiler;
        if ( left == 0 )
            return false;
        const auto key = std::tuple{ s0.x, s0.y, sp.current().get(), left };
        if ( auto it = memo.find( key ); it != memo.end() )
            return it->second;
        if ( positions )
            ++*positions;
        auto s1 = g.apply( s0, sp.reply( s0 ) );
        bool all = true;
        if ( s1.phase == game_phase::won )
            all = s1.winner == player::spoiler;
        else
            for ( std::uint64_t m = 0; m < ( std::uint64_t( 1 ) << n ) && all; ++m )
            {
                auto p2 = nth_predicate( n, m );
                if ( !g.check( s1.s, s1.t, s1.p1, p2 ).ok )
                    continue;
                auto s2 = g.apply( s1, classical_move::reply( p2 ) );
                if ( s2.phase == game_phase::won )
                {
                    all = s2.winner == player::spoiler;
                    continue;
                }
                auto sp2 = sp;
                auto s3 = g.apply( s2, sp2.reply( s2 ) );
                if ( s3.phase == game_phase::won )
                {
                    all = s3.winner == player::spoiler;
                    continue;
                }
                const auto& pj = s3.i == 1 ? s3.p2 : s3.p1;
                for ( state_id z = 0; z < n && all; ++z )
                    if ( pj[ z ] )
                        all = self( self, g.apply( s3, classical_move::answer( z ) ), sp2, left - 1 );
            }
        memo[ key ] = all;
        return all;
    };
    return rec( rec, st, spoiler, rounds );
}

} // namespace coalg
