#pragma once

#include "distance.hpp"
#include "formula.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace coalg
{

/// Raised when no formula with the requested gap can be produced.
class metric_refusal : public std::runtime_error
{
public:
    metric_refusal( const std::string& why, Rational best_gap )
        : std::runtime_error( why + " (best achievable gap " + to_string( best_gap ) + ")" ), _best( std::move( best_gap ) )
    {}

    [[nodiscard]] const Rational& best_gap() const { return _best; }

private:
    Rational _best;
};

/// Builds formulas from the iterates of the behavioural distance. For a depth-i
/// pair (u,v) with witness (γ, f), [γ]F or not [γ]F separates u and v by exactly
/// d_i(u,v) once ⟦F⟧ = f; F is assembled as max_u min_v of shifted depth-(i-1)
/// pair formulas, which is exact because f is nonexpansive for d_{i-1}.
class metric_synthesizer
{
public:
    metric_synthesizer( const System& sys, distance_result dist )
        : _sys( sys ), _dist( std::move( dist ) ), _eval( sys ), _gammas( gammas_of( sys ) )
    {}

    [[nodiscard]] const distance_result& distance() const { return _dist; }
    metric_evaluator& evaluator() { return _eval; }

    Rational gap( const mformula& f, state_id x, state_id y )
    {
        const auto& v = _eval( f );
        return rabs( v[ x ] - v[ y ] );
    }

    /// ⟦ψ⟧(u) - ⟦ψ⟧(v) = d_i(u,v) > 0, md(ψ) <= i.
    mformula pair_formula( std::size_t i, state_id u, state_id v )
    {
        i = clamp( i );
        if ( auto it = _pair.find( { i, u, v } ); it != _pair.end() )
            return it->second;
        if ( auto it = _pair.find( { i, v, u } ); it != _pair.end() )
            return _pair[ { i, u, v } ] = metric_formula::neg( it->second );
        const auto& d = _dist.iterates[ i ];
        if ( i == 0 || d( u, v ) == 0 )
            throw std::logic_error( "no separation at this depth" );
        const auto& w = _dist.witnesses[ i ][ u ][ v ];
        auto inner = function_formula( i - 1, w.f );
        auto psi = metric_formula::modal( w.gamma, inner );
        if ( !w.forward )
            psi = metric_formula::neg( psi );
        const auto& val = _eval( psi );
        if ( val[ u ] - val[ v ] != d( u, v ) )
            throw std::logic_error( "pair formula does not attain the distance" );
        return _pair[ { i, u, v } ] = psi;
    }

    /// ⟦F⟧ = f exactly, md(F) <= i; f must be nonexpansive for d_i.
    mformula function_formula( std::size_t i, const PredicateR& f )
    {
        i = clamp( i );
        const auto n = _sys.size();
        if ( auto it = _func.find( { i, f } ); it != _func.end() )
            return it->second;
        bool flat = true;
        for ( const auto& v : f )
            flat = flat && v == f[ 0 ];
        mformula out;
        if ( n == 0 || flat )
            out = constant( n ? f[ 0 ] : Rational( 0 ) );
        else
        {
            for ( state_id u = 0; u < n; ++u )
            {
                mformula row;
                for ( state_id v = 0; v < n; ++v )
                {
                    if ( v == u || f[ u ] == f[ v ] )
                        continue;
                    const bool up = f[ u ] > f[ v ];
                    const auto hi = up ? u : v, lo = up ? v : u;
                    auto g = metric_formula::max( shift_to( pair_formula( i, hi, lo ), hi, f[ hi ] ), constant( f[ lo ] ) );
                    row = row ? metric_formula::min( row, g ) : g;
                }
                if ( !row )
                    row = constant( f[ u ] );
                out = out ? metric_formula::max( out, row ) : row;
            }
        }
        if ( _eval( out ) != f )
            throw std::logic_error( "function formula does not reproduce its target" );
        return _func[ { i, f } ] = out;
    }

    /// Chains [γ1](not)[γ2]...T up to `depth` modalities, shortest first; the
    /// innermost level prefers γ that ignore the predicate (observations).
    std::optional< mformula > search_chain( state_id x, state_id y, std::size_t depth, const Rational& want,
                                            bool strictly_above, std::size_t budget = 4096 )
    {
        std::vector< const eval_map* > inner;
        for ( const auto& g : _gammas )
            if ( !reads_state( g ) )
                inner.push_back( &g );
        for ( const auto& g : _gammas )
            if ( reads_state( g ) )
                inner.push_back( &g );
        std::vector< mformula > level{ metric_formula::top() };
        std::size_t used = 0;
        for ( std::size_t j = 1; j <= depth; ++j )
        {
            std::vector< mformula > next;
            for ( const auto* g : j == 1 ? inner : pointers() )
                for ( const auto& phi : level )
                {
                    if ( ++used > budget )
                        return std::nullopt;
                    auto m = metric_formula::modal( g->name, phi );
                    for ( auto cand : { m, metric_formula::neg( m ) } )
                    {
                        const auto gp = gap( cand, x, y );
                        if ( strictly_above ? gp > want : gp >= want )
                            return cand;
                        next.push_back( cand );
                    }
                }
            level = std::move( next );
        }
        return std::nullopt;
    }

private:
    static bool reads_state( const eval_map& g )
    {
        return !g.steps.empty() && g.steps.back().kind == step_kind::identity;
    }

    std::vector< const eval_map* > pointers() const
    {
        std::vector< const eval_map* > out;
        for ( const auto& g : _gammas )
            out.push_back( &g );
        return out;
    }

    std::size_t clamp( std::size_t i ) const { return std::min( i, _dist.iterates.size() - 1 ); }

    mformula constant( const Rational& c )
    {
        auto it = _const.find( c );
        if ( it == _const.end() )
            it = _const.emplace( c, metric_formula::constant( c, _sys.top ) ).first;
        return it->second;
    }

    /// A formula equal to ψ moved by a constant so that its value at u is `target`,
    /// clipped to [0,⊤]: ψ - s to go down, not(not ψ - s) to go up.
    mformula shift_to( const mformula& psi, state_id u, const Rational& target )
    {
        const Rational a = _eval( psi )[ u ];
        if ( a == target )
            return psi;
        if ( a > target )
            return metric_formula::minus( psi, a - target );
        return metric_formula::neg( metric_formula::minus( metric_formula::neg( psi ), target - a ) );
    }

    const System& _sys;
    distance_result _dist;
    metric_evaluator _eval;
    std::vector< eval_map > _gammas;
    std::map< std::tuple< std::size_t, state_id, state_id >, mformula > _pair;
    std::map< std::pair< std::size_t, PredicateR >, mformula > _func;
    std::map< Rational, mformula > _const;
};

struct logical_distance_result
{
    Rational value;
    mformula formula;
    std::size_t depth = 0;
};

/// max |⟦φ⟧(x) - ⟦φ⟧(y)| over the synthesized formulas of modal depth <= depth;
/// equals d_depth(x,y) whenever synthesis succeeds.
inline logical_distance_result logical_distance( metric_synthesizer& syn, state_id x, state_id y, std::size_t depth )
{
    logical_distance_result r;
    r.depth = depth;
    const auto& target = syn.distance().at_depth( depth )( x, y );
    if ( target == 0 )
    {
        r.value = 0;
        r.formula = metric_formula::top();
        return r;
    }
    if ( auto f = syn.search_chain( x, y, depth, target, false ) )
        r.formula = *f;
    else
        r.formula = syn.pair_formula( depth, x, y );
    r.value = syn.gap( r.formula, x, y );
    return r;
}

inline logical_distance_result logical_distance( const System& sys, state_id x, state_id y, std::size_t depth )
{
    distance_options opt;
    opt.max_iter = depth;
    metric_synthesizer syn( sys, behavioural_distance( sys, opt ) );
    return logical_distance( syn, x, y, depth );
}

/// A formula with gap > ε at (x,y), validated by evaluation. Refuses when
/// ε >= d(x,y) - tol.
inline mformula synthesize_metric_distinguishing_formula( const System& sys, state_id x, state_id y, const Rational& eps,
                                                          const Rational& tol = 0, std::size_t max_iter = 100 )
{
    distance_options opt;
    opt.max_iter = max_iter;
    opt.tol = tol > 0 ? tol : Rational( 1, 1000 );
    metric_synthesizer syn( sys, behavioural_distance( sys, opt ) );
    const auto& d = syn.distance().d( x, y );
    if ( x == y || eps >= d - tol )
        throw metric_refusal( "no formula separates " + sys.states[ x ] + " and " + sys.states[ y ] + " by more than " +
                                  to_string( eps ),
                              d );
    const auto depth = syn.distance().certificate.iterations;
    mformula f;
    if ( auto c = syn.search_chain( x, y, depth, eps, true ) )
        f = *c;
    else
        f = syn.pair_formula( depth, x, y );
    if ( !( syn.gap( f, x, y ) > eps ) )
        throw metric_refusal( "synthesized formula failed validation", syn.gap( f, x, y ) );
    return f;
}

} // namespace coalg
