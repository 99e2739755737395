#pragma once

#include "dsl.hpp"

#include <random>
#include <string>
#include <vector>

namespace coalg
{

enum class random_family
{
    dist_term,    // Dist(Id) + One
    real_pow,     // Real(top=1) x Pow(Id)
    labelled_pow, // Pow(Labels{a, b} x Id)
};

inline const char* to_string( random_family f )
{
    switch ( f )
    {
    case random_family::dist_term:
        return "Dist(Id) + One";
    case random_family::real_pow:
        return "Real(top=1) x Pow(Id)";
    case random_family::labelled_pow:
        return "Pow(Labels{a, b} x Id)";
    }
    return "?";
}

/// Source text of a random system with `n` states s0..s{n-1}. Weights and
/// reals are multiples of 1/`grid`.
template < class Rng >
std::string random_system_text( random_family fam, std::size_t n, Rng& rng, long grid = 8 )
{
    auto uniform = [ & ]( long lo, long hi ) { return std::uniform_int_distribution< long >( lo, hi )( rng ); };
    auto name = []( std::size_t i ) { return "s" + std::to_string( i ); };
    std::string out = "system random\nfunctor: " + std::string( to_string( fam ) ) + "\nstates: ";
    for ( std::size_t i = 0; i < n; ++i )
        out += ( i ? ", " : "" ) + name( i );
    out += "\n";
    for ( std::size_t i = 0; i < n; ++i )
    {
        out += "alpha " + name( i ) + " = ";
        switch ( fam )
        {
        case random_family::dist_term:
        {
            if ( uniform( 0, 3 ) == 0 )
            {
                out += "unit";
                break;
            }
            // split `grid` units of mass over a random multiset of successors
            std::vector< long > mass( n, 0 );
            const auto support = static_cast< std::size_t >( uniform( 1, static_cast< long >( n ) ) );
            std::vector< std::size_t > targets;
            for ( std::size_t k = 0; k < support; ++k )
                targets.push_back( static_cast< std::size_t >( uniform( 0, static_cast< long >( n ) - 1 ) ) );
            for ( long u = 0; u < grid; ++u )
                ++mass[ targets[ static_cast< std::size_t >( uniform( 0, static_cast< long >( support ) - 1 ) ) ] ];
            out += "dist{";
            bool first = true;
            for ( std::size_t z = 0; z < n; ++z )
                if ( mass[ z ] )
                {
                    out += ( first ? "" : ", " ) + name( z ) + ": " + to_string( make_rational( mass[ z ], grid ) );
                    first = false;
                }
            out += "}";
            break;
        }
        case random_family::real_pow:
        {
            out += "(real " + to_string( Rational( uniform( 0, grid ), grid ) ) + ", {";
            bool first = true;
            for ( std::size_t z = 0; z < n; ++z )
                if ( uniform( 0, 2 ) == 0 )
                {
                    out += ( first ? "" : ", " ) + name( z );
                    first = false;
                }
            out += "})";
            break;
        }
        case random_family::labelled_pow:
        {
            out += "{";
            bool first = true;
            for ( const char* l : { "a", "b" } )
                for ( std::size_t z = 0; z < n; ++z )
                    if ( uniform( 0, 3 ) == 0 )
                    {
                        out += ( first ? "(" : ", (" ) + std::string( l ) + ", " + name( z ) + ")";
                        first = false;
                    }
            out += "}";
            break;
        }
        }
        out += "\n";
    }
    return out;
}

template < class Rng >
System random_system( random_family fam, std::size_t n, Rng& rng, long grid = 8 )
{
    return parse_system( random_system_text( fam, n, rng, grid ) );
}

} // namespace coalg
