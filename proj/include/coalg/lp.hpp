#pragma once

#include "rational.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace coalg
{

enum class lp_status
{
    optimal,
    infeasible,
    unbounded,
};

struct lp_result
{
    lp_status status = lp_status::infeasible;
    Rational value;
    std::vector< Rational > x;
};

/// maximize c·x subject to A x <= b, x >= 0 (b of any sign).
/// Two-phase dictionary simplex over exact rationals; Bland's rule for both the
/// entering and the leaving variable.
class lp_solver
{
public:
    lp_solver( const std::vector< std::vector< Rational > >& A, const std::vector< Rational >& b,
               const std::vector< Rational >& c )
        : _m( static_cast< int >( b.size() ) ), _n( static_cast< int >( c.size() ) ), _basis( _m ), _nonbasis( _n + 1 ),
          _d( _m + 2, std::vector< Rational >( _n + 2, Rational( 0 ) ) )
    {
        for ( int i = 0; i < _m; ++i )
        {
            for ( int j = 0; j < _n; ++j )
                _d[ i ][ j ] = A[ i ][ j ];
            _basis[ i ] = _n + i;
            _d[ i ][ _n ] = -1;
            _d[ i ][ _n + 1 ] = b[ i ];
        }
        for ( int j = 0; j < _n; ++j )
        {
            _nonbasis[ j ] = j;
            _d[ _m ][ j ] = -c[ j ];
        }
        _nonbasis[ _n ] = -1;
        _d[ _m + 1 ][ _n ] = 1;
    }

    lp_result solve()
    {
        lp_result res;
        int r = 0;
        for ( int i = 1; i < _m; ++i )
            if ( _d[ i ][ _n + 1 ] < _d[ r ][ _n + 1 ] )
                r = i;
        if ( _m > 0 && _d[ r ][ _n + 1 ] < 0 )
        {
            pivot( r, _n );
            if ( !run( 1 ) || _d[ _m + 1 ][ _n + 1 ] < 0 )
            {
                res.status = lp_status::infeasible;
                return res;
            }
            for ( int i = 0; i < _m; ++i )
                if ( _basis[ i ] == -1 )
                    for ( int j = 0; j <= _n; ++j )
                        if ( _d[ i ][ j ] != 0 && _nonbasis[ j ] != -1 )
                        {
                            pivot( i, j );
                            break;
                        }
        }
        if ( !run( 2 ) )
        {
            res.status = lp_status::unbounded;
            return res;
        }
        res.status = lp_status::optimal;
        res.x.assign( _n, Rational( 0 ) );
        for ( int i = 0; i < _m; ++i )
            if ( _basis[ i ] >= 0 && _basis[ i ] < _n )
                res.x[ _basis[ i ] ] = _d[ i ][ _n + 1 ];
        res.value = _d[ _m ][ _n + 1 ];
        return res;
    }

private:
    void pivot( int r, int s )
    {
        const Rational inv = 1 / _d[ r ][ s ];
        for ( int i = 0; i < _m + 2; ++i )
        {
            if ( i == r || _d[ i ][ s ] == 0 )
                continue;
            const Rational f = _d[ i ][ s ] * inv;
            for ( int j = 0; j < _n + 2; ++j )
                if ( j != s && _d[ r ][ j ] != 0 )
                    _d[ i ][ j ] -= _d[ r ][ j ] * f;
            _d[ i ][ s ] = -f;
        }
        for ( int j = 0; j < _n + 2; ++j )
            if ( j != s )
                _d[ r ][ j ] *= inv;
        _d[ r ][ s ] = inv;
        std::swap( _basis[ r ], _nonbasis[ s ] );
    }

    bool run( int phase )
    {
        const int obj = phase == 1 ? _m + 1 : _m;
        while ( true )
        {
            int s = -1;
            for ( int j = 0; j <= _n; ++j )
            {
                if ( phase == 2 && _nonbasis[ j ] == -1 )
                    continue;
                if ( _d[ obj ][ j ] < 0 && ( s == -1 || _nonbasis[ j ] < _nonbasis[ s ] ) )
                    s = j;
            }
            if ( s == -1 )
                return true;
            int r = -1;
            Rational best;
            for ( int i = 0; i < _m; ++i )
            {
                if ( _d[ i ][ s ] <= 0 )
                    continue;
                Rational ratio = _d[ i ][ _n + 1 ] / _d[ i ][ s ];
                if ( r == -1 || ratio < best || ( ratio == best && _basis[ i ] < _basis[ r ] ) )
                {
                    r = i;
                    best = ratio;
                }
            }
            if ( r == -1 )
                return false;
            pivot( r, s );
        }
    }

    int _m;
    int _n;
    std::vector< int > _basis;
    std::vector< int > _nonbasis;
    std::vector< std::vector< Rational > > _d;
};

inline lp_result solve_lp( const std::vector< std::vector< Rational > >& A, const std::vector< Rational >& b,
                           const std::vector< Rational >& c )
{
    return lp_solver( A, b, c ).solve();
}

} // namespace coalg
