#pragma once

// Seeded property suites shared by the unit tests and the acceptance binary.
// Each returns a description of the first counterexample, or nothing.

#include "support.hpp"

#include "coalg/metric/distance.hpp"
#include "coalg/metric/formula.hpp"

#include <optional>
#include <random>
#include <string>

namespace property_suites
{

using namespace coalg;
using failure = std::optional< std::string >;

inline System random_case( std::mt19937_64& rng, std::size_t max_states = 4 )
{
    std::uniform_int_distribution< std::size_t > size( 1, max_states );
    std::uniform_int_distribution< int > fam( 0, 2 );
    return random_system( static_cast< random_family >( fam( rng ) ), size( rng ), rng, 4 );
}

inline pmetric lifted( const System& sys, const pmetric& d ) { return lift_metric( sys, gammas_of( sys ), d ).first; }

// min(⊤, a + b) is again a pseudometric and dominates a
inline pmetric truncated_sum( const pmetric& a, const pmetric& b )
{
    auto out = a;
    for ( std::size_t i = 0; i < a.size(); ++i )
        for ( std::size_t j = 0; j < a.size(); ++j )
            out.d[ i ][ j ] = rmin( a.top, a( i, j ) + b( i, j ) );
    return out;
}

inline mformula random_formula( const std::vector< eval_map >& gammas, const Rational& top, std::mt19937_64& rng, int depth )
{
    std::uniform_int_distribution< int > pick( 0, depth > 0 ? 5 : 1 );
    std::uniform_int_distribution< std::size_t > g( 0, gammas.size() - 1 );
    std::uniform_int_distribution< long > w( 0, 4 );
    switch ( pick( rng ) )
    {
    case 0:
        return metric_formula::top();
    case 1:
        return metric_formula::constant( top * make_rational( w( rng ), 4 ), top );
    case 2:
    case 3:
        return metric_formula::modal( gammas[ g( rng ) ].name, random_formula( gammas, top, rng, depth - 1 ) );
    case 4:
        if ( std::bernoulli_distribution( 0.5 )( rng ) )
            return metric_formula::neg( random_formula( gammas, top, rng, depth - 1 ) );
        return metric_formula::minus( random_formula( gammas, top, rng, depth - 1 ), top * make_rational( w( rng ), 4 ) );
    default: {
        auto a = random_formula( gammas, top, rng, depth - 1 );
        return metric_formula::min( a, random_formula( gammas, top, rng, depth - 1 ) );
    }
    }
}

inline std::string at_case( int k, const System& sys ) { return "case " + std::to_string( k ) + ":\n" + serialize_system( sys ); }

inline failure lifting_preserves_pseudometrics( int cases, std::uint64_t seed )
{
    std::mt19937_64 rng( seed );
    for ( int k = 0; k < cases; ++k )
    {
        const auto sys = random_case( rng );
        const auto d = k % 2 ? testing_support::random_pmetric( sys.size(), rng, sys.top, 4 ) : pmetric::zero( sys.size(), sys.top );
        const auto up = lifted( sys, d );
        if ( const auto err = check_pseudometric( up ) )
            return *err + " in " + at_case( k, sys );
        for ( std::size_t i = 0; i < up.size(); ++i )
            for ( std::size_t j = 0; j < up.size(); ++j )
                if ( up( i, j ) > sys.top )
                    return "lifted distance above top in " + at_case( k, sys );
    }
    return std::nullopt;
}

inline failure monotone_predicate_lifting( int cases, std::uint64_t seed )
{
    std::mt19937_64 rng( seed );
    std::bernoulli_distribution coin( 0.5 );
    for ( int k = 0; k < cases; ++k )
    {
        const auto sys = random_case( rng, 5 );
        Predicate2 lo( sys.size() ), hi( sys.size() );
        for ( std::size_t z = 0; z < sys.size(); ++z )
        {
            lo[ z ] = coin( rng );
            hi[ z ] = lo[ z ] || coin( rng );
        }
        for ( state_id x = 0; x < sys.size(); ++x )
            if ( !lifted_order_leq( *sys.expr, image( sys, lo, x ), image( sys, hi, x ) ) )
                return "F p1 not below F p2 at " + sys.states[ x ] + " in " + at_case( k, sys );
    }
    return std::nullopt;
}

inline failure upper_envelope( int cases, std::uint64_t seed )
{
    std::mt19937_64 rng( seed );
    std::uniform_int_distribution< std::size_t > size( 1, 6 );
    for ( int k = 0; k < cases; ++k )
    {
        const auto n = size( rng );
        const auto m = testing_support::random_pmetric( n, rng );
        const auto f = testing_support::random_predicate( n, rng );
        const auto h = nonexpansive_upper_envelope( f, m );
        const auto where = "case " + std::to_string( k );
        if ( !is_nonexpansive( h, m ) )
            return "envelope not nonexpansive, " + where;
        for ( std::size_t z = 0; z < n; ++z )
        {
            if ( f[ z ] > h[ z ] )
                return "envelope below f, " + where;
            Rational sup = 0;
            for ( std::size_t u = 0; u < n; ++u )
                sup = rmax( sup, f[ u ] - m( u, z ) );
            if ( h[ z ] != sup )
                return "envelope differs from max_u f(u) - d(u,z), " + where;
        }
        if ( nonexpansive_upper_envelope( h, m ) != h )
            return "envelope moves a nonexpansive input, " + where;

        // any nonexpansive g above f is above h
        auto g = h;
        const auto bump = testing_support::random_predicate( n, rng );
        for ( std::size_t z = 0; z < n; ++z )
            g[ z ] = rmin( Rational( 1 ), g[ z ] + bump[ z ] );
        g = nonexpansive_upper_envelope( g, m );
        for ( std::size_t z = 0; z < n; ++z )
            if ( h[ z ] > g[ z ] )
                return "envelope not minimal, " + where;
    }
    return std::nullopt;
}

inline failure formulas_nonexpansive( int cases, std::uint64_t seed )
{
    std::mt19937_64 rng( seed );
    for ( int k = 0; k < cases; ++k )
    {
        const auto sys = random_case( rng );
        const auto gammas = gammas_of( sys );
        std::vector< pmetric > iter{ pmetric::zero( sys.size(), sys.top ) };
        for ( int i = 0; i < 3; ++i )
            iter.push_back( lift_metric( sys, gammas, iter.back() ).first );
        const auto phi = random_formula( gammas, sys.top, rng, 3 );
        const auto v = eval_metric( sys, phi );
        const auto& d = iter.at( modal_depth( *phi ) );
        for ( state_id x = 0; x < sys.size(); ++x )
        {
            if ( v[ x ] < 0 || v[ x ] > sys.top )
                return to_string( *phi ) + " leaves [0,top] in " + at_case( k, sys );
            for ( state_id y = 0; y < sys.size(); ++y )
                if ( rabs( v[ x ] - v[ y ] ) > d( x, y ) )
                    return to_string( *phi ) + " expands d_md at (" + sys.states[ x ] + "," + sys.states[ y ] + ") in " +
                           at_case( k, sys );
        }
    }
    return std::nullopt;
}

inline failure lifting_decomposes( int cases, std::uint64_t seed )
{
    std::mt19937_64 rng( seed );
    for ( int k = 0; k < cases; ++k )
    {
        const auto sys = random_case( rng );
        const auto gammas = gammas_of( sys );
        const auto d = testing_support::random_pmetric( sys.size(), rng, sys.top, 4 );
        std::uniform_int_distribution< state_id > st( 0, sys.size() - 1 );
        const auto& t1 = sys.alpha[ st( rng ) ];
        const auto& t2 = sys.alpha[ st( rng ) ];
        const auto whole = lift_distance( sys, gammas, d, t1, t2 );
        Rational best = 0;
        for ( const auto& g : gammas )
        {
            const auto one = lift_distance( sys, { g }, d, t1, t2 );
            best = rmax( best, one.value );

            // the witness is nonexpansive and attains the per-γ value
            const auto& w = one.per_gamma.at( 0 );
            if ( !is_nonexpansive( w.witness, d ) )
                return "witness for " + g.name + " expands d in " + at_case( k, sys );
            auto at = [ & ]( const state_value& t ) {
                const auto ft = apply_map( [ & ]( state_id z ) { return w.witness[ z ]; }, *sys.expr, t );
                return eval_gamma( g.steps, *sys.expr, ft, sys.top );
            };
            if ( rabs( at( t1 ) - at( t2 ) ) != w.value )
                return "witness for " + g.name + " misses the value in " + at_case( k, sys );
        }
        if ( whole.value != best )
            return "lifting is not the max over single gammas in " + at_case( k, sys );
    }
    return std::nullopt;
}

inline failure lifting_monotone_and_nonexpansive( int cases, std::uint64_t seed )
{
    std::mt19937_64 rng( seed );
    for ( int k = 0; k < cases; ++k )
    {
        const auto sys = random_case( rng );
        const auto a = testing_support::random_pmetric( sys.size(), rng, sys.top, 4 );
        const auto b = testing_support::random_pmetric( sys.size(), rng, sys.top, 4 );
        const auto la = lifted( sys, a ), lb = lifted( sys, b ), labove = lifted( sys, truncated_sum( a, b ) );
        for ( std::size_t i = 0; i < sys.size(); ++i )
            for ( std::size_t j = 0; j < sys.size(); ++j )
                if ( la( i, j ) > labove( i, j ) )
                    return "lifting not monotone in " + at_case( k, sys );
        if ( sup_distance( la, lb ) > sup_distance( a, b ) )
            return "lifting expands the sup distance in " + at_case( k, sys );
    }
    return std::nullopt;
}

} // namespace property_suites
