#pragma once

#include "../system.hpp"
#include "../value.hpp"

#include <map>
#include <vector>

namespace coalg
{

/// One stage of the final-chain refinement: block ids are numbered by first
/// occurrence in state order. `split` lists the blocks of the previous stage
/// that were divided to reach this one.
struct partition_level
{
    std::vector< std::size_t > block_of;
    std::size_t block_count = 0;
    std::vector< std::size_t > split;
};

struct Partition
{
    std::vector< std::size_t > block_of;
    std::size_t block_count = 0;
    std::vector< partition_level > trace; // trace[0] is the one-block partition

    [[nodiscard]] bool equivalent( state_id x, state_id y ) const { return block_of.at( x ) == block_of.at( y ); }

    [[nodiscard]] std::vector< std::vector< state_id > > blocks() const
    {
        std::vector< std::vector< state_id > > out( block_count );
        for ( state_id x = 0; x < block_of.size(); ++x )
            out[ block_of[ x ] ].push_back( x );
        return out;
    }

    /// First stage at which x and y sit in different blocks; 0 if they never do.
    [[nodiscard]] std::size_t split_level( state_id x, state_id y ) const
    {
        for ( std::size_t i = 0; i < trace.size(); ++i )
            if ( trace[ i ].block_of[ x ] != trace[ i ].block_of[ y ] )
                return i;
        return 0;
    }
};

/// Refines by the signature F(block)(α(x)) until the number of blocks is stable;
/// on a finite coalgebra of these functors the result is behavioural equivalence.
inline Partition behavioural_equivalence( const System& sys )
{
    Partition p;
    partition_level cur;
    cur.block_of.assign( sys.size(), 0 );
    cur.block_count = sys.size() ? 1 : 0;
    p.trace.push_back( cur );
    while ( true )
    {
        std::map< std::pair< std::size_t, fvalue< std::size_t > >, std::size_t > ids;
        partition_level next;
        next.block_of.resize( sys.size() );
        std::vector< std::size_t > children( cur.block_count, 0 );
        for ( state_id x = 0; x < sys.size(); ++x )
        {
            auto sig = apply_map( [ & ]( state_id s ) { return cur.block_of[ s ]; }, *sys.expr, sys.alpha[ x ] );
            auto [ it, fresh ] = ids.emplace( std::pair{ cur.block_of[ x ], std::move( sig ) }, ids.size() );
            next.block_of[ x ] = it->second;
            if ( fresh )
                ++children[ cur.block_of[ x ] ];
        }
        next.block_count = ids.size();
        if ( next.block_count == cur.block_count )
            break;
        for ( std::size_t b = 0; b < children.size(); ++b )
            if ( children[ b ] > 1 )
                next.split.push_back( b );
        p.trace.push_back( next );
        cur = std::move( next );
    }
    p.block_of = cur.block_of;
    p.block_count = cur.block_count;
    return p;
}

/// The ∼-closure of p: every state equivalent to a member of p.
inline Predicate2 closure( const Partition& part, const Predicate2& p )
{
    std::vector< bool > hit( part.block_count, false );
    for ( state_id x = 0; x < p.size(); ++x )
        if ( p[ x ] )
            hit[ part.block_of[ x ] ] = true;
    Predicate2 out( p.size() );
    for ( state_id x = 0; x < p.size(); ++x )
        out[ x ] = hit[ part.block_of[ x ] ];
    return out;
}

} // namespace coalg
