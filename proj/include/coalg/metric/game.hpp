#pragma once

#include "../game_common.hpp"
#include "../system.hpp"
#include "formula.hpp"
#include "pmetric.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace coalg
{

struct metric_check
{
    bool ok = true;
    std::vector< map_check > report;
};

/// Step 2 of the metric game: d_⊖(F̃_γ p1(α(s)), F̃_γ p2(α(t))) <= ε for every γ.
inline metric_check check_defender_predicate_metric( const System& sys, const std::vector< eval_map >& gammas, state_id s,
                                                     state_id t, const PredicateR& p1, const PredicateR& p2,
                                                     const Rational& eps )
{
    metric_check c;
    const auto a = image( sys, p1, s ), b = image( sys, p2, t );
    for ( const auto& g : gammas )
    {
        const auto l = eval_gamma( g.steps, *sys.expr, a, sys.top );
        const auto r = eval_gamma( g.steps, *sys.expr, b, sys.top );
        const Rational slack = eps - monus( l, r );
        const bool ok = slack >= 0;
        c.report.push_back( { g.name, to_string( l ), to_string( r ), to_string( slack ), ok } );
        c.ok = c.ok && ok;
    }
    return c;
}

struct metric_move
{
    enum class kind
    {
        pick,
        predicate,
        choose,
        answer,
    } k = kind::pick;
    state_id state = 0;
    PredicateR predicate;
    int index = 0;

    static metric_move pick( state_id s, PredicateR p ) { return { kind::pick, s, std::move( p ), 0 }; }
    static metric_move reply( PredicateR p ) { return { kind::predicate, 0, std::move( p ), 0 }; }
    static metric_move choose( int i, state_id x ) { return { kind::choose, x, {}, i }; }
    static metric_move answer( state_id y ) { return { kind::answer, y, {}, 0 }; }
};

struct metric_game_state
{
    game_phase phase = game_phase::await_spoiler_pick;
    std::optional< player > winner;
    std::string reason;
    state_id x = 0, y = 0;
    Rational eps;
    state_id s = 0, t = 0;
    PredicateR p1, p2;
    int i = 0;
    state_id x_prime = 0;
    std::size_t round = 0;
    std::vector< map_check > last_report;
};

/// Rules of the metric game (x, y, ε) as a pure transition function.
class metric_game
{
public:
    explicit metric_game( const System& sys ) : _sys( &sys ), _gammas( gammas_of( sys ) ) {}

    [[nodiscard]] const System& system() const { return *_sys; }
    [[nodiscard]] const std::vector< eval_map >& gammas() const { return _gammas; }

    [[nodiscard]] metric_game_state start( state_id x, state_id y, const Rational& eps ) const
    {
        check_state( x );
        check_state( y );
        if ( eps < 0 || eps > _sys->top )
            throw illegal_move( "budget " + to_string( eps ) + " outside [0, " + to_string( _sys->top ) + "]" );
        metric_game_state st;
        st.x = x;
        st.y = y;
        st.eps = eps;
        return st;
    }

    [[nodiscard]] metric_check check( state_id s, state_id t, const PredicateR& p1, const PredicateR& p2,
                                      const Rational& eps ) const
    {
        return check_defender_predicate_metric( *_sys, _gammas, s, t, p1, p2, eps );
    }

    [[nodiscard]] metric_game_state apply( metric_game_state st, const metric_move& mv ) const
    {
        using K = metric_move::kind;
        const auto n = _sys->size();
        if ( st.phase == game_phase::won )
            throw illegal_move( "the game is over" );
        const K wanted = st.phase == game_phase::await_spoiler_pick         ? K::pick
                         : st.phase == game_phase::await_defender_predicate ? K::predicate
                         : st.phase == game_phase::await_spoiler_state      ? K::choose
                                                                            : K::answer;
        if ( mv.k != wanted )
            throw illegal_move( std::string( "move not allowed in phase " ) + to_string( st.phase ) );
        switch ( st.phase )
        {
        case game_phase::await_spoiler_pick:
        {
            check_predicate( mv.predicate );
            if ( mv.state != st.x && mv.state != st.y )
                throw illegal_move( "Step 1: s must be one of the current pair" );
            st.s = mv.state;
            st.t = mv.state == st.x ? st.y : st.x;
            st.p1 = mv.predicate;
            st.p2.clear();
            st.last_report.clear();
            st.phase = game_phase::await_defender_predicate;
            // monotone maps: the constant-⊤ reply is the most permissive one
            if ( !check( st.s, st.t, st.p1, PredicateR( n, _sys->top ), st.eps ).ok )
                return win( std::move( st ), player::spoiler, "defender has no admissible predicate at Step 2" );
            return st;
        }
        case game_phase::await_defender_predicate:
        {
            check_predicate( mv.predicate );
            auto c = check( st.s, st.t, st.p1, mv.predicate, st.eps );
            if ( !c.ok )
            {
                std::string failed;
                for ( const auto& r : c.report )
                    if ( !r.ok )
                        failed += ( failed.empty() ? "" : ", " ) + r.name + " (slack " + r.slack + ")";
                throw illegal_move( "Step 2: predicate exceeds the budget at " + failed, c.report );
            }
            st.p2 = mv.predicate;
            st.last_report = std::move( c.report );
            st.phase = game_phase::await_spoiler_state;
            return st;
        }
        case game_phase::await_spoiler_state:
        {
            if ( mv.index != 1 && mv.index != 2 )
                throw illegal_move( "Step 3: index must be 1 or 2" );
            check_state( mv.state );
            st.i = mv.index;
            st.x_prime = mv.state;
            st.phase = game_phase::await_defender_state;
            const auto& pi = st.i == 1 ? st.p1 : st.p2;
            const auto& pj = st.i == 1 ? st.p2 : st.p1;
            for ( const auto& v : pj )
                if ( pi[ st.x_prime ] <= v )
                    return st;
            return win( std::move( st ), player::spoiler, "defender has no state to answer at Step 4" );
        }
        case game_phase::await_defender_state:
        {
            check_state( mv.state );
            const auto& pi = st.i == 1 ? st.p1 : st.p2;
            const auto& pj = st.i == 1 ? st.p2 : st.p1;
            const int j = st.i == 1 ? 2 : 1;
            if ( pi[ st.x_prime ] > pj[ mv.state ] )
                throw illegal_move( "Step 4: p" + std::to_string( j ) + "(" + _sys->states[ mv.state ] + ") = " +
                                    to_string( pj[ mv.state ] ) + " is below p" + std::to_string( st.i ) + "(" +
                                    _sys->states[ st.x_prime ] + ") = " + to_string( pi[ st.x_prime ] ) );
            st.eps = pj[ mv.state ] - pi[ st.x_prime ];
            st.x = st.x_prime;
            st.y = mv.state;
            ++st.round;
            st.phase = game_phase::await_spoiler_pick;
            return st;
        }
        case game_phase::won:
            break;
        }
        return st;
    }

private:
    static metric_game_state win( metric_game_state st, player w, std::string why )
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

    void check_predicate( const PredicateR& p ) const
    {
        if ( p.size() != _sys->size() )
            throw illegal_move( "predicate must assign a value to each of the " + std::to_string( _sys->size() ) +
                                " states" );
        for ( state_id z = 0; z < p.size(); ++z )
            if ( p[ z ] < 0 || p[ z ] > _sys->top )
                throw illegal_move( "predicate value " + to_string( p[ z ] ) + " at " + _sys->states[ z ] +
                                    " outside [0, " + to_string( _sys->top ) + "]" );
    }

    const System* _sys;
    std::vector< eval_map > _gammas;
};

/// Defender from the behavioural distance: at Step 2 the nonexpansive upper
/// envelope of p1 (lowered by δ), at Step 4 copycat for i = 1 and the maximizer
/// of p1(u) - d(u, x') for i = 2.
class metric_defender_engine
{
public:
    metric_defender_engine( const metric_game& g, pmetric d, Rational slack = 0 )
        : _g( &g ), _d( std::move( d ) ), _slack( std::move( slack ) )
    {}

    [[nodiscard]] const pmetric& metric() const { return _d; }

    [[nodiscard]] std::optional< metric_move > reply( const metric_game_state& st ) const
    {
        const auto n = _g->system().size();
        if ( st.phase == game_phase::await_defender_predicate )
        {
            auto p2 = nonexpansive_upper_envelope( st.p1, _d );
            for ( auto& v : p2 )
                v = monus( v, _slack );
            if ( _g->check( st.s, st.t, st.p1, p2, st.eps ).ok )
                return metric_move::reply( std::move( p2 ) );
            PredicateR all( n, _g->system().top );
            if ( _g->check( st.s, st.t, st.p1, all, st.eps ).ok )
                return metric_move::reply( std::move( all ) );
            return std::nullopt;
        }
        if ( st.phase == game_phase::await_defender_state )
        {
            const auto& pi = st.i == 1 ? st.p1 : st.p2;
            const auto& pj = st.i == 1 ? st.p2 : st.p1;
            const auto& need = pi[ st.x_prime ];
            if ( st.i == 1 && pj[ st.x_prime ] >= need )
                return metric_move::answer( st.x_prime );
            if ( st.i == 2 )
            {
                std::optional< state_id > best;
                Rational score;
                for ( state_id u = 0; u < n; ++u )
                {
                    Rational v = st.p1[ u ] - _d( u, st.x_prime );
                    if ( !best || v > score )
                    {
                        best = u;
                        score = v;
                    }
                }
                if ( best && pj[ *best ] >= need )
                    return metric_move::answer( *best );
            }
            // off-strategy position: the legal answer leaving the largest budget
            std::optional< state_id > best;
            for ( state_id u = 0; u < n; ++u )
                if ( pj[ u ] >= need && ( !best || pj[ u ] > pj[ *best ] ) )
                    best = u;
            if ( best )
                return metric_move::answer( *best );
        }
        return std::nullopt;
    }

private:
    const metric_game* _g;
    pmetric _d;
    Rational _slack;
};

/// Spoiler driven by a formula with gap above the budget: min picks a conjunct
/// keeping the gap, not swaps roles, - q descends, [γ]ψ plays p1 = ⟦ψ⟧ at the
/// larger state and then the state where p2 most exceeds ⟦ψ⟧.
class metric_spoiler_engine
{
public:
    metric_spoiler_engine( const metric_game& g, mformula phi )
        : _g( &g ), _eval( std::make_shared< metric_evaluator >( g.system() ) ), _current( std::move( phi ) )
    {}

    [[nodiscard]] const mformula& current() const { return _current; }

    /// Values of ⟦ψ⟧ for the tracked subformula, for hints and tests.
    const PredicateR& values( const mformula& f ) { return ( *_eval )( f ); }

    metric_move reply( const metric_game_state& st )
    {
        const auto n = _g->system().size();
        if ( st.phase == game_phase::await_spoiler_pick )
        {
            auto f = _current;
            const auto& v0 = ( *_eval )( f );
            state_id hi = v0[ st.x ] >= v0[ st.y ] ? st.x : st.y;
            state_id lo = hi == st.x ? st.y : st.x;
            while ( f->k != metric_formula::kind::modal && f->k != metric_formula::kind::top )
            {
                if ( f->k == metric_formula::kind::neg )
                {
                    f = f->sub();
                    std::swap( hi, lo );
                }
                else if ( f->k == metric_formula::kind::minus )
                    f = f->sub();
                else
                {
                    // a conjunct whose gap exceeds ε; else the one minimal at lo
                    mformula pick;
                    for ( const auto& c : f->subs )
                    {
                        const auto& v = ( *_eval )( c );
                        if ( v[ hi ] - v[ lo ] > st.eps )
                        {
                            pick = c;
                            break;
                        }
                    }
                    if ( !pick )
                    {
                        pick = f->subs[ 0 ];
                        for ( const auto& c : f->subs )
                            if ( ( *_eval )( c )[ lo ] < ( *_eval )( pick )[ lo ] )
                                pick = c;
                    }
                    f = pick;
                }
            }
            _current = f;
            if ( f->k == metric_formula::kind::top )
                return metric_move::pick( hi, PredicateR( n, _g->system().top ) ); // no gap left to exploit
            return metric_move::pick( hi, ( *_eval )( f->sub() ) );
        }
        if ( st.phase == game_phase::await_spoiler_state )
        {
            auto psi = _current->k == metric_formula::kind::modal ? _current->sub() : _current;
            const auto& v = ( *_eval )( psi );
            _current = psi;
            std::optional< state_id > best;
            Rational excess;
            for ( state_id z = 0; z < n; ++z )
            {
                Rational e = st.p2[ z ] - v[ z ];
                if ( !best || e > excess )
                {
                    best = z;
                    excess = e;
                }
            }
            return metric_move::choose( 2, *best );
        }
        throw illegal_move( "spoiler engine asked to move outside a spoiler phase" );
    }

private:
    const metric_game* _g;
    std::shared_ptr< metric_evaluator > _eval;
    mformula _current;
};

inline std::string format_predicate( const System& sys, const PredicateR& p )
{
    std::string s = "{";
    for ( state_id z = 0; z < p.size(); ++z )
        s += ( z ? ", " : "" ) + sys.states[ z ] + ": " + to_string( p[ z ] );
    return s + "}";
}

inline std::string describe( const System& sys, const metric_move& mv )
{
    switch ( mv.k )
    {
    case metric_move::kind::pick:
        return "S: s=" + sys.states[ mv.state ] + " p1=" + format_predicate( sys, mv.predicate );
    case metric_move::kind::predicate:
        return "D: p2=" + format_predicate( sys, mv.predicate );
    case metric_move::kind::choose:
        return "S: p" + std::to_string( mv.index ) + " x'=" + sys.states[ mv.state ];
    case metric_move::kind::answer:
        return "D: y'=" + sys.states[ mv.state ];
    }
    return {};
}

struct metric_playout
{
    std::optional< player > winner; // nullopt: the defender survived the round cap
    std::size_t rounds = 0;
    std::vector< std::string > transcript;
    metric_game_state final_state;
};

template < class Spoiler, class Defender >
metric_playout play_metric( const metric_game& g, metric_game_state st, Spoiler&& spoiler, Defender&& defender,
                            std::size_t round_cap )
{
    metric_playout r;
    const auto& sys = g.system();
    while ( st.phase != game_phase::won && st.round < round_cap )
    {
        if ( st.phase == game_phase::await_spoiler_pick )
            r.transcript.push_back( "round " + std::to_string( st.round + 1 ) + ": (" + sys.states[ st.x ] + "," +
                                    sys.states[ st.y ] + ") budget " + to_string( st.eps ) );
        std::optional< metric_move > mv;
        if ( to_move( st.phase ) == player::spoiler )
            mv = spoiler( st );
        else
            mv = defender( st );
        if ( !mv )
        {
            r.transcript.push_back( std::string( to_string( to_move( st.phase ) ) ) + " resigns" );
            r.winner = to_move( st.phase ) == player::spoiler ? player::defender : player::spoiler;
            r.rounds = st.round + 1;
            r.final_state = st;
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
    r.final_state = st;
    return r;
}

} // namespace coalg
