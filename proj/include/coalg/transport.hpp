#pragma once

#include "rational.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

namespace coalg
{

using rational_matrix = std::vector< std::vector< Rational > >;

struct transport_problem
{
    std::vector< Rational > supply; // row masses
    std::vector< Rational > demand; // column masses
    rational_matrix cost;           // supply.size() x demand.size(), entries >= 0
};

struct transport_solution
{
    Rational value;
    rational_matrix coupling;
    std::vector< Rational > row_potential; // u, with u_i + v_j <= c_ij
    std::vector< Rational > col_potential; // v
};

class marginal_mismatch : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail
{

inline void check_marginals( const std::vector< Rational >& supply, const std::vector< Rational >& demand )
{
    Rational s = 0, d = 0;
    for ( const auto& x : supply )
    {
        if ( x < 0 )
            throw marginal_mismatch( "negative supply" );
        s += x;
    }
    for ( const auto& x : demand )
    {
        if ( x < 0 )
            throw marginal_mismatch( "negative demand" );
        d += x;
    }
    if ( s != d )
        throw marginal_mismatch( "total supply " + to_string( s ) + " differs from total demand " + to_string( d ) );
}

} // namespace detail

/// Exact transportation simplex. The basis is a spanning tree of the bipartite
/// row/column graph (m + n - 1 cells, degenerate cells allowed); entering and
/// leaving cells follow Bland's rule, so the method terminates on degenerate
/// instances.
inline transport_solution solve_transport( const transport_problem& p )
{
    const std::size_t m = p.supply.size();
    const std::size_t n = p.demand.size();
    detail::check_marginals( p.supply, p.demand );
    if ( m == 0 || n == 0 )
        throw marginal_mismatch( "transport problem with an empty side" );
    if ( p.cost.size() != m )
        throw std::invalid_argument( "cost matrix has wrong row count" );
    for ( const auto& row : p.cost )
        if ( row.size() != n )
            throw std::invalid_argument( "cost matrix has wrong column count" );

    transport_solution sol;
    sol.coupling.assign( m, std::vector< Rational >( n, Rational( 0 ) ) );
    std::vector< std::vector< bool > > basic( m, std::vector< bool >( n, false ) );

    // north-west corner start
    {
        auto rs = p.supply;
        auto cs = p.demand;
        std::size_t i = 0, j = 0;
        while ( true )
        {
            const Rational q = rmin( rs[ i ], cs[ j ] );
            sol.coupling[ i ][ j ] = q;
            basic[ i ][ j ] = true;
            rs[ i ] -= q;
            cs[ j ] -= q;
            if ( i + 1 == m && j + 1 == n )
                break;
            if ( ( rs[ i ] == 0 && i + 1 < m ) || j + 1 == n )
                ++i;
            else
                ++j;
        }
    }

    // nodes 0..m-1 are rows, m..m+n-1 are columns
    auto tree_path = [ & ]( std::size_t from, std::size_t to ) {
        std::vector< std::vector< std::size_t > > adj( m + n );
        for ( std::size_t i = 0; i < m; ++i )
            for ( std::size_t j = 0; j < n; ++j )
                if ( basic[ i ][ j ] )
                {
                    adj[ i ].push_back( m + j );
                    adj[ m + j ].push_back( i );
                }
        std::vector< std::size_t > parent( m + n, std::numeric_limits< std::size_t >::max() );
        std::queue< std::size_t > bfs;
        bfs.push( from );
        parent[ from ] = from;
        while ( !bfs.empty() )
        {
            const auto a = bfs.front();
            bfs.pop();
            for ( auto b : adj[ a ] )
                if ( parent[ b ] == std::numeric_limits< std::size_t >::max() )
                {
                    parent[ b ] = a;
                    bfs.push( b );
                }
        }
        std::vector< std::size_t > nodes{ to };
        while ( nodes.back() != from )
            nodes.push_back( parent[ nodes.back() ] );
        return nodes; // to ... from
    };

    auto compute_potentials = [ & ]() {
        std::vector< std::optional< Rational > > u( m ), v( n );
        u[ 0 ] = Rational( 0 );
        bool changed = true;
        while ( changed )
        {
            changed = false;
            for ( std::size_t i = 0; i < m; ++i )
                for ( std::size_t j = 0; j < n; ++j )
                {
                    if ( !basic[ i ][ j ] )
                        continue;
                    if ( u[ i ] && !v[ j ] )
                    {
                        v[ j ] = p.cost[ i ][ j ] - *u[ i ];
                        changed = true;
                    }
                    else if ( !u[ i ] && v[ j ] )
                    {
                        u[ i ] = p.cost[ i ][ j ] - *v[ j ];
                        changed = true;
                    }
                }
        }
        sol.row_potential.assign( m, Rational( 0 ) );
        sol.col_potential.assign( n, Rational( 0 ) );
        for ( std::size_t i = 0; i < m; ++i )
            sol.row_potential[ i ] = u[ i ].value();
        for ( std::size_t j = 0; j < n; ++j )
            sol.col_potential[ j ] = v[ j ].value();
    };

    while ( true )
    {
        compute_potentials();
        std::optional< std::pair< std::size_t, std::size_t > > entering;
        for ( std::size_t i = 0; i < m && !entering; ++i )
            for ( std::size_t j = 0; j < n; ++j )
                if ( !basic[ i ][ j ] && p.cost[ i ][ j ] - sol.row_potential[ i ] - sol.col_potential[ j ] < 0 )
                {
                    entering = { i, j };
                    break;
                }
        if ( !entering )
            break;

        const auto [ ei, ej ] = *entering;
        // cycle: entering cell (+), then the tree path from column ej back to row ei
        const auto nodes = tree_path( ei, m + ej ); // m+ej ... ei
        std::vector< std::pair< std::size_t, std::size_t > > minus_cells, plus_cells;
        for ( std::size_t k = 0; k + 1 < nodes.size(); ++k )
        {
            const auto a = nodes[ k ], b = nodes[ k + 1 ];
            const auto cell = a >= m ? std::make_pair( b, a - m ) : std::make_pair( a, b - m );
            ( k % 2 == 0 ? minus_cells : plus_cells ).push_back( cell );
        }
        std::optional< std::pair< std::size_t, std::size_t > > leaving;
        Rational theta;
        for ( const auto& c : minus_cells )
        {
            const auto& q = sol.coupling[ c.first ][ c.second ];
            if ( !leaving || q < theta || ( q == theta && c < *leaving ) )
            {
                leaving = c;
                theta = q;
            }
        }
        sol.coupling[ ei ][ ej ] += theta;
        for ( const auto& c : minus_cells )
            sol.coupling[ c.first ][ c.second ] -= theta;
        for ( const auto& c : plus_cells )
            sol.coupling[ c.first ][ c.second ] += theta;
        basic[ ei ][ ej ] = true;
        basic[ leaving->first ][ leaving->second ] = false;
    }

    sol.value = 0;
    for ( std::size_t i = 0; i < m; ++i )
        for ( std::size_t j = 0; j < n; ++j )
            sol.value += sol.coupling[ i ][ j ] * p.cost[ i ][ j ];
    return sol;
}

/// Dual objective Σ u·supply + Σ v·demand; equals the primal value at optimum.
inline Rational dual_value( const transport_problem& p, const transport_solution& s )
{
    Rational d = 0;
    for ( std::size_t i = 0; i < p.supply.size(); ++i )
        d += s.row_potential[ i ] * p.supply[ i ];
    for ( std::size_t j = 0; j < p.demand.size(); ++j )
        d += s.col_potential[ j ] * p.demand[ j ];
    return d;
}

/// Decides whether some coupling of the two mass vectors is supported on the
/// admissible cells (Edmonds-Karp max-flow saturation, exact).
inline bool coupling_feasible( const std::vector< std::vector< bool > >& admissible, const std::vector< Rational >& left,
                               const std::vector< Rational >& right )
{
    detail::check_marginals( left, right );
    const std::size_t m = left.size(), n = right.size();
    const std::size_t source = m + n, sink = m + n + 1, nodes = m + n + 2;
    Rational total = 0;
    for ( const auto& x : left )
        total += x;
    if ( total == 0 )
        return true;

    rational_matrix cap( nodes, std::vector< Rational >( nodes, Rational( 0 ) ) );
    for ( std::size_t i = 0; i < m; ++i )
        cap[ source ][ i ] = left[ i ];
    for ( std::size_t j = 0; j < n; ++j )
        cap[ m + j ][ sink ] = right[ j ];
    for ( std::size_t i = 0; i < m; ++i )
        for ( std::size_t j = 0; j < n; ++j )
            if ( admissible[ i ][ j ] )
                cap[ i ][ m + j ] = total;

    Rational flow = 0;
    while ( true )
    {
        std::vector< std::size_t > parent( nodes, nodes );
        parent[ source ] = source;
        std::queue< std::size_t > bfs;
        bfs.push( source );
        while ( !bfs.empty() && parent[ sink ] == nodes )
        {
            const auto a = bfs.front();
            bfs.pop();
            for ( std::size_t b = 0; b < nodes; ++b )
                if ( parent[ b ] == nodes && cap[ a ][ b ] > 0 )
                {
                    parent[ b ] = a;
                    bfs.push( b );
                }
        }
        if ( parent[ sink ] == nodes )
            break;
        Rational push = total;
        for ( auto b = sink; b != source; b = parent[ b ] )
            push = rmin( push, cap[ parent[ b ] ][ b ] );
        for ( auto b = sink; b != source; b = parent[ b ] )
        {
            cap[ parent[ b ] ][ b ] -= push;
            cap[ b ][ parent[ b ] ] += push;
        }
        flow += push;
    }
    return flow == total;
}

using point_mass = std::pair< std::size_t, Rational >;
using ground_cost = std::function< Rational( std::size_t, std::size_t ) >;

struct wasserstein_result
{
    Rational value;
    std::vector< std::size_t > left_points;
    std::vector< std::size_t > right_points;
    transport_solution solution;
    /// Witness potential f on `domain`, with f(a) - f(b) <= c(a,b) and min f = 0,
    /// attaining Σ f·(p - q) = value.
    std::vector< std::size_t > domain;
    std::vector< Rational > potential;
};

/// Wasserstein-1 / Kantorovich distance between two finitely supported
/// distributions over point ids, for a (possibly directed) ground cost that
/// satisfies c(a,a) = 0 and the triangle inequality. The witness potential is the
/// c-transform of the optimal column potentials over the joint support plus any
/// extra points requested.
inline wasserstein_result wasserstein1( const std::vector< point_mass >& p, const std::vector< point_mass >& q,
                                        const ground_cost& c, const std::vector< std::size_t >& extra_domain = {} )
{
    wasserstein_result r;
    transport_problem prob;
    for ( const auto& [ x, w ] : p )
        if ( w > 0 )
        {
            r.left_points.push_back( x );
            prob.supply.push_back( w );
        }
    for ( const auto& [ y, w ] : q )
        if ( w > 0 )
        {
            r.right_points.push_back( y );
            prob.demand.push_back( w );
        }
    prob.cost.assign( r.left_points.size(), std::vector< Rational >( r.right_points.size() ) );
    for ( std::size_t i = 0; i < r.left_points.size(); ++i )
        for ( std::size_t j = 0; j < r.right_points.size(); ++j )
            prob.cost[ i ][ j ] = c( r.left_points[ i ], r.right_points[ j ] );
    r.solution = solve_transport( prob );
    r.value = r.solution.value;

    r.domain = r.left_points;
    r.domain.insert( r.domain.end(), r.right_points.begin(), r.right_points.end() );
    r.domain.insert( r.domain.end(), extra_domain.begin(), extra_domain.end() );
    std::sort( r.domain.begin(), r.domain.end() );
    r.domain.erase( std::unique( r.domain.begin(), r.domain.end() ), r.domain.end() );

    r.potential.reserve( r.domain.size() );
    for ( auto z : r.domain )
    {
        std::optional< Rational > best;
        for ( std::size_t j = 0; j < r.right_points.size(); ++j )
        {
            Rational cand = c( z, r.right_points[ j ] ) - r.solution.col_potential[ j ];
            if ( !best || cand < *best )
                best = cand;
        }
        r.potential.push_back( *best );
    }
    if ( !r.potential.empty() )
    {
        const Rational lo = *std::min_element( r.potential.begin(), r.potential.end() );
        for ( auto& f : r.potential )
            f -= lo;
    }
    return r;
}

/// Debug dump of a coupling: one `row<TAB>col<TAB>mass` line per non-zero cell.
inline void write_coupling_tsv( std::ostream& os, const wasserstein_result& r )
{
    os << "from\tto\tmass\n";
    for ( std::size_t i = 0; i < r.left_points.size(); ++i )
        for ( std::size_t j = 0; j < r.right_points.size(); ++j )
            if ( r.solution.coupling[ i ][ j ] != 0 )
                os << r.left_points[ i ] << '\t' << r.right_points[ j ] << '\t'
                   << to_string( r.solution.coupling[ i ][ j ] ) << '\n';
}

} // namespace coalg
