#pragma once

// Helpers shared by the test files, plus reference implementations written
// directly from the textbook definitions. They avoid the library's lifting,
// transport and refinement code so they can serve as independent oracles.

#include "coalg/dsl.hpp"
#include "coalg/metric/pmetric.hpp"
#include "coalg/random_systems.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace testing_support
{

using namespace coalg;

inline std::string sample_path( const std::string& name ) { return std::string( COALG_SAMPLES_DIR ) + "/" + name; }

inline std::string sample_text( const std::string& name )
{
    std::ifstream in( sample_path( name ) );
    if ( !in )
        throw std::runtime_error( "missing sample " + name );
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline System load_sample( const std::string& name, std::map< std::string, Rational > params = {} )
{
    parse_options po;
    po.params = std::move( params );
    return parse_system( sample_text( name ), po );
}

inline System fig1a( const Rational& eps ) { return load_sample( "fig1a.coalg", { { "eps", eps } } ); }

inline Rational q( long n, long d = 1 ) { return make_rational( n, d ); }

/// Row-major extreme points of the transportation polytope: every choice of
/// m+n-1 cells whose marginal system has a unique nonnegative solution.
inline Rational w1_by_vertices( const std::vector< Rational >& p, const std::vector< Rational >& r,
                                const std::vector< std::vector< Rational > >& cost )
{
    const std::size_t m = p.size(), n = r.size(), cells = m * n, k = m + n - 1;
    std::optional< Rational > best;
    std::vector< std::size_t > pick( k );
    // enumerate k-subsets of the cells
    std::vector< bool > sel( cells, false );
    std::fill( sel.begin(), sel.begin() + static_cast< long >( std::min( k, cells ) ), true );
    do
    {
        std::vector< std::size_t > chosen;
        for ( std::size_t c = 0; c < cells; ++c )
            if ( sel[ c ] )
                chosen.push_back( c );
        // solve the m+n marginal equations (one redundant) by Gauss-Jordan
        const std::size_t rows = m + n, cols = chosen.size();
        std::vector< std::vector< Rational > > a( rows, std::vector< Rational >( cols + 1, Rational( 0 ) ) );
        for ( std::size_t j = 0; j < cols; ++j )
        {
            a[ chosen[ j ] / n ][ j ] = 1;
            a[ m + chosen[ j ] % n ][ j ] = 1;
        }
        for ( std::size_t i = 0; i < m; ++i )
            a[ i ][ cols ] = p[ i ];
        for ( std::size_t j = 0; j < n; ++j )
            a[ m + j ][ cols ] = r[ j ];
        std::size_t rank = 0;
        std::vector< std::size_t > pivot_col;
        for ( std::size_t c = 0; c < cols && rank < rows; ++c )
        {
            std::size_t piv = rank;
            while ( piv < rows && a[ piv ][ c ] == 0 )
                ++piv;
            if ( piv == rows )
                continue;
            std::swap( a[ piv ], a[ rank ] );
            const Rational lead = a[ rank ][ c ];
            for ( auto& v : a[ rank ] )
                v /= lead;
            for ( std::size_t i = 0; i < rows; ++i )
                if ( i != rank && a[ i ][ c ] != 0 )
                {
                    const Rational f = a[ i ][ c ];
                    for ( std::size_t j = 0; j <= cols; ++j )
                        a[ i ][ j ] -= f * a[ rank ][ j ];
                }
            pivot_col.push_back( c );
            ++rank;
        }
        if ( rank != cols )
            continue; // not a basis
        bool consistent = true;
        for ( std::size_t i = rank; i < rows; ++i )
            consistent = consistent && a[ i ][ cols ] == 0;
        if ( !consistent )
            continue;
        Rational value = 0;
        bool nonneg = true;
        for ( std::size_t i = 0; i < rank; ++i )
        {
            const auto& x = a[ i ][ cols ];
            nonneg = nonneg && x >= 0;
            const auto cell = chosen[ pivot_col[ i ] ];
            value += x * cost[ cell / n ][ cell % n ];
        }
        if ( nonneg && ( !best || value < *best ) )
            best = value;
    } while ( std::prev_permutation( sel.begin(), sel.end() ) );
    if ( !best )
        throw std::logic_error( "no vertex found" );
    return *best;
}

/// Dist(Id) + One as successor weights or termination.
struct dist_term_view
{
    std::vector< bool > terminates;
    std::vector< std::map< state_id, Rational > > step;
};

inline dist_term_view view_dist_term( const System& sys )
{
    dist_term_view v;
    for ( const auto& a : sys.alpha )
    {
        const bool term = a.kind == value_kind::inr;
        v.terminates.push_back( term );
        std::map< state_id, Rational > m;
        if ( !term )
        {
            const auto& d = a.injected();
            for ( std::size_t i = 0; i < d.items.size(); ++i )
                m[ d.items[ i ].atom ] += d.weights[ i ];
        }
        v.step.push_back( m );
    }
    return v;
}

/// d_{i+1}(x,y) = 1 on a terminating/non-terminating pair, 0 on two terminating
/// states, and W1 for d_i between the successor distributions otherwise.
inline std::vector< pmetric > dist_term_iterates( const System& sys, std::size_t steps )
{
    const auto v = view_dist_term( sys );
    const auto n = sys.size();
    std::vector< pmetric > out{ pmetric::zero( n, sys.top ) };
    for ( std::size_t k = 0; k < steps; ++k )
    {
        const auto& d = out.back();
        auto next = pmetric::zero( n, sys.top );
        for ( state_id x = 0; x < n; ++x )
            for ( state_id y = 0; y < n; ++y )
            {
                if ( v.terminates[ x ] != v.terminates[ y ] )
                    next.d[ x ][ y ] = sys.top;
                else if ( !v.terminates[ x ] )
                {
                    std::vector< state_id > a, b;
                    std::vector< Rational > pa, pb;
                    for ( const auto& [ s, w ] : v.step[ x ] )
                        a.push_back( s ), pa.push_back( w );
                    for ( const auto& [ s, w ] : v.step[ y ] )
                        b.push_back( s ), pb.push_back( w );
                    std::vector< std::vector< Rational > > c( a.size(), std::vector< Rational >( b.size() ) );
                    for ( std::size_t i = 0; i < a.size(); ++i )
                        for ( std::size_t j = 0; j < b.size(); ++j )
                            c[ i ][ j ] = d( a[ i ], b[ j ] );
                    next.d[ x ][ y ] = w1_by_vertices( pa, pb, c );
                }
            }
        out.push_back( next );
    }
    return out;
}

/// Real(top) x Pow(Id): d_{i+1}(x,y) = max(|r_x - r_y|, Hausdorff_{d_i}(S_x, S_y)),
/// with the empty set at distance ⊤ from any non-empty set.
inline std::vector< pmetric > real_pow_iterates( const System& sys, std::size_t steps )
{
    const auto n = sys.size();
    std::vector< Rational > r;
    std::vector< std::vector< state_id > > succ;
    for ( const auto& a : sys.alpha )
    {
        r.push_back( a.first().real );
        std::vector< state_id > s;
        for ( const auto& e : a.second().items )
            s.push_back( e.atom );
        succ.push_back( s );
    }
    std::vector< pmetric > out{ pmetric::zero( n, sys.top ) };
    for ( std::size_t k = 0; k < steps; ++k )
    {
        const auto& d = out.back();
        auto next = pmetric::zero( n, sys.top );
        auto directed = [ & ]( const std::vector< state_id >& a, const std::vector< state_id >& b ) {
            Rational worst = 0;
            for ( auto u : a )
            {
                if ( b.empty() )
                    return sys.top;
                Rational near = sys.top;
                for ( auto v : b )
                    near = std::min( near, d( u, v ) );
                worst = std::max( worst, near );
            }
            return worst;
        };
        for ( state_id x = 0; x < n; ++x )
            for ( state_id y = 0; y < n; ++y )
            {
                Rational h = std::max( directed( succ[ x ], succ[ y ] ), directed( succ[ y ], succ[ x ] ) );
                Rational diff = r[ x ] - r[ y ];
                next.d[ x ][ y ] = std::max( h, Rational( diff < 0 ? Rational( -diff ) : diff ) );
            }
        out.push_back( next );
    }
    return out;
}

/// Largest strong bisimulation of a labelled transition system Pow(Labels x Id),
/// by naive relation refinement.
inline std::vector< std::vector< bool > > lts_bisimilarity( const System& sys )
{
    const auto n = sys.size();
    std::vector< std::set< std::pair< std::string, state_id > > > tr( n );
    for ( state_id x = 0; x < n; ++x )
        for ( const auto& e : sys.alpha[ x ].items )
            tr[ x ].insert( { e.first().label, e.second().atom } );
    std::vector< std::vector< bool > > rel( n, std::vector< bool >( n, true ) );
    for ( bool changed = true; changed; )
    {
        changed = false;
        for ( state_id x = 0; x < n; ++x )
            for ( state_id y = 0; y < n; ++y )
            {
                if ( !rel[ x ][ y ] )
                    continue;
                auto simulates = [ & ]( state_id a, state_id b ) {
                    for ( const auto& [ l, u ] : tr[ a ] )
                    {
                        bool matched = false;
                        for ( const auto& [ l2, v ] : tr[ b ] )
                            matched = matched || ( l2 == l && rel[ u ][ v ] );
                        if ( !matched )
                            return false;
                    }
                    return true;
                };
                if ( !simulates( x, y ) || !simulates( y, x ) )
                {
                    rel[ x ][ y ] = false;
                    changed = true;
                }
            }
    }
    return rel;
}

/// Larsen-Skou probabilistic bisimilarity for Dist(Id) + One by refinement of
/// an equivalence: equal termination, equal mass into every class.
inline std::vector< std::vector< bool > > prob_bisimilarity( const System& sys )
{
    const auto v = view_dist_term( sys );
    const auto n = sys.size();
    std::vector< std::size_t > cls( n );
    for ( state_id x = 0; x < n; ++x )
        cls[ x ] = v.terminates[ x ] ? 1 : 0;
    while ( true )
    {
        std::map< std::pair< std::size_t, std::map< std::size_t, Rational > >, std::size_t > ids;
        std::vector< std::size_t > next( n );
        for ( state_id x = 0; x < n; ++x )
        {
            std::map< std::size_t, Rational > mass;
            for ( const auto& [ s, w ] : v.step[ x ] )
                mass[ cls[ s ] ] += w;
            next[ x ] = ids.emplace( std::make_pair( cls[ x ], mass ), ids.size() ).first->second;
        }
        std::set< std::size_t > before( cls.begin(), cls.end() ), after( next.begin(), next.end() );
        cls = next;
        if ( before.size() == after.size() )
            break;
    }
    std::vector< std::vector< bool > > rel( n, std::vector< bool >( n ) );
    for ( state_id x = 0; x < n; ++x )
        for ( state_id y = 0; y < n; ++y )
            rel[ x ][ y ] = cls[ x ] == cls[ y ];
    return rel;
}

/// A random pseudometric on n points: shortest paths over random edge weights
/// on the grid top/den, so the triangle inequality holds by construction.
template < class Rng >
pmetric random_pmetric( std::size_t n, Rng& rng, const Rational& top = 1, long den = 8 )
{
    auto m = pmetric::zero( n, top );
    std::uniform_int_distribution< long > w( 0, den );
    for ( std::size_t i = 0; i < n; ++i )
        for ( std::size_t j = i + 1; j < n; ++j )
            m.d[ i ][ j ] = m.d[ j ][ i ] = top * make_rational( w( rng ), den );
    for ( std::size_t k = 0; k < n; ++k )
        for ( std::size_t i = 0; i < n; ++i )
            for ( std::size_t j = 0; j < n; ++j )
                if ( m.d[ i ][ k ] + m.d[ k ][ j ] < m.d[ i ][ j ] )
                    m.d[ i ][ j ] = m.d[ i ][ k ] + m.d[ k ][ j ];
    return m;
}

template < class Rng >
PredicateR random_predicate( std::size_t n, Rng& rng, const Rational& top = 1, long den = 8 )
{
    std::uniform_int_distribution< long > w( 0, den );
    PredicateR p( n );
    for ( auto& v : p )
        v = top * make_rational( w( rng ), den );
    return p;
}

} // namespace testing_support
