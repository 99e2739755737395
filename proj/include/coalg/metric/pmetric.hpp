#pragma once

#include "../rational.hpp"
#include "../system.hpp"

#include <optional>
#include <string>
#include <vector>

namespace coalg
{

/// Rational pseudometric on the states of one system, bounded by ⊤.
struct pmetric
{
    std::vector< std::vector< Rational > > d;
    Rational top = 1;

    static pmetric zero( std::size_t n, const Rational& top = 1 )
    {
        return { std::vector< std::vector< Rational > >( n, std::vector< Rational >( n, Rational( 0 ) ) ), top };
    }

    static pmetric discrete( std::size_t n, const Rational& top = 1 )
    {
        auto m = zero( n, top );
        for ( std::size_t i = 0; i < n; ++i )
            for ( std::size_t j = 0; j < n; ++j )
                if ( i != j )
                    m.d[ i ][ j ] = top;
        return m;
    }

    [[nodiscard]] std::size_t size() const { return d.size(); }
    [[nodiscard]] const Rational& operator()( state_id x, state_id y ) const { return d[ x ][ y ]; }

    friend bool operator==( const pmetric& a, const pmetric& b ) { return a.top == b.top && a.d == b.d; }
};

/// First violated pseudometric axiom, if any.
inline std::optional< std::string > check_pseudometric( const pmetric& m )
{
    const auto n = m.size();
    for ( std::size_t x = 0; x < n; ++x )
    {
        if ( m.d[ x ].size() != n )
            return "row " + std::to_string( x ) + " has the wrong length";
        if ( m.d[ x ][ x ] != 0 )
            return "d(" + std::to_string( x ) + "," + std::to_string( x ) + ") != 0";
    }
    for ( std::size_t x = 0; x < n; ++x )
        for ( std::size_t y = 0; y < n; ++y )
        {
            const auto& v = m.d[ x ][ y ];
            if ( v < 0 || v > m.top )
                return "d(" + std::to_string( x ) + "," + std::to_string( y ) + ") = " + to_string( v ) + " outside [0, top]";
            if ( v != m.d[ y ][ x ] )
                return "d(" + std::to_string( x ) + "," + std::to_string( y ) + ") is not symmetric";
            for ( std::size_t z = 0; z < n; ++z )
                if ( m.d[ x ][ z ] > v + m.d[ y ][ z ] )
                    return "triangle inequality fails for (" + std::to_string( x ) + "," + std::to_string( y ) + "," +
                           std::to_string( z ) + ")";
        }
    return std::nullopt;
}

/// sup over all pairs of |a - b|.
inline Rational sup_distance( const pmetric& a, const pmetric& b )
{
    Rational best = 0;
    for ( std::size_t x = 0; x < a.size(); ++x )
        for ( std::size_t y = 0; y < a.size(); ++y )
            best = rmax( best, rabs( a.d[ x ][ y ] - b.d[ x ][ y ] ) );
    return best;
}

inline bool is_nonexpansive( const PredicateR& f, const pmetric& m )
{
    for ( std::size_t x = 0; x < f.size(); ++x )
        for ( std::size_t y = 0; y < f.size(); ++y )
            if ( f[ x ] - f[ y ] > m.d[ x ][ y ] )
                return false;
    return true;
}

/// h(z) = max_u f(u) - d(u,z): the least nonexpansive function above f.
inline PredicateR nonexpansive_upper_envelope( const PredicateR& f, const pmetric& m )
{
    PredicateR h( f.size() );
    for ( std::size_t z = 0; z < f.size(); ++z )
    {
        h[ z ] = f[ z ];
        for ( std::size_t u = 0; u < f.size(); ++u )
            h[ z ] = rmax( h[ z ], f[ u ] - m.d[ u ][ z ] );
    }
    return h;
}

/// McShane extension of a nonexpansive f given on `domain`, capped at ⊤.
inline PredicateR extend_nonexpansive( const std::vector< state_id >& domain, const std::vector< Rational >& f,
                                       const pmetric& m )
{
    PredicateR h( m.size(), m.top );
    for ( std::size_t z = 0; z < m.size(); ++z )
        for ( std::size_t k = 0; k < domain.size(); ++k )
            h[ z ] = rmin( h[ z ], f[ k ] + m.d[ domain[ k ] ][ z ] );
    return h;
}

} // namespace coalg
