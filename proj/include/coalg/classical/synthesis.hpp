#pragma once

#include "formula.hpp"
#include "partition.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace coalg
{

/// Raised when asked to distinguish two equivalent states; names their block.
class equivalent_states : public std::invalid_argument
{
public:
    equivalent_states( const System& sys, const Partition& p, state_id x, state_id y )
        : std::invalid_argument( describe( sys, p, x, y ) )
    {}

private:
    static std::string describe( const System& sys, const Partition& p, state_id x, state_id y )
    {
        std::string s = "states " + sys.states[ x ] + " and " + sys.states[ y ] + " are behaviourally equivalent (block {";
        bool first = true;
        for ( state_id z = 0; z < sys.size(); ++z )
            if ( p.block_of[ z ] == p.block_of[ x ] )
            {
                s += ( first ? "" : "," ) + sys.states[ z ];
                first = false;
            }
        return s + "})";
    }
};

class separation_failure : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Hennessy-Milner style synthesis over the refinement trace. Each block B of
/// stage i gets a characteristic formula χ_i(B) of depth ≤ i; two blocks split at
/// stage i+1 are told apart by [λ]P where P is a union of stage-i blocks.
class classical_synthesizer
{
public:
    explicit classical_synthesizer( const System& sys )
        : _sys( sys ), _part( behavioural_equivalence( sys ) ), _lambdas( lambdas_of( sys ) )
    {}

    [[nodiscard]] const Partition& partition() const { return _part; }
    [[nodiscard]] const std::vector< eval_map >& lambdas() const { return _lambdas; }

    /// A formula with ⟦φ⟧(x) = 1 and ⟦φ⟧(y) = 0, checked by evaluation.
    cformula distinguish( state_id x, state_id y )
    {
        if ( _part.equivalent( x, y ) )
            throw equivalent_states( _sys, _part, x, y );
        const auto level = _part.split_level( x, y );
        const auto& lv = _part.trace[ level ];
        auto f = separator( level, lv.block_of[ x ], lv.block_of[ y ] );
        const auto v = eval_classical( _sys, f );
        if ( !v[ x ] || v[ y ] )
            throw separation_failure( "synthesized formula failed validation: " + to_string( *f ) );
        return f;
    }

    /// χ_level(block): true exactly on the block.
    cformula characteristic( std::size_t level, std::size_t block )
    {
        if ( level == 0 )
            return classical_formula::top();
        if ( auto it = _chi.find( { level, block } ); it != _chi.end() )
            return it->second;
        const auto& lv = _part.trace[ level ];
        const auto& prev = _part.trace[ level - 1 ];
        const auto rep = representative( lv, block );
        const auto parent = prev.block_of[ rep ];
        std::vector< cformula > parts;
        std::set< std::string > seen;
        auto add = [ & ]( const cformula& f ) {
            auto flat = f->k == classical_formula::kind::conj ? f->subs : std::vector< cformula >{ f };
            for ( const auto& g : flat )
                if ( seen.insert( to_string( *g ) ).second )
                    parts.push_back( g );
        };
        add( characteristic( level - 1, parent ) );
        for ( std::size_t other = 0; other < lv.block_count; ++other )
            if ( other != block && prev.block_of[ representative( lv, other ) ] == parent )
                add( separator( level, block, other ) );
        auto f = parts.size() == 1 ? parts.front() : classical_formula::conj( parts );
        _chi.emplace( std::pair{ level, block }, f );
        return f;
    }

private:
    static state_id representative( const partition_level& lv, std::size_t block )
    {
        for ( state_id x = 0; x < lv.block_of.size(); ++x )
            if ( lv.block_of[ x ] == block )
                return x;
        throw std::out_of_range( "empty block" );
    }

    /// Formula true on block c and false on block d of stage `level` (same parent).
    cformula separator( std::size_t level, std::size_t c, std::size_t d )
    {
        const auto& lv = _part.trace[ level ];
        const auto& prev = _part.trace[ level - 1 ];
        const auto xc = representative( lv, c ), xd = representative( lv, d );

        // candidate predicates: unions of stage-(level-1) blocks
        struct candidate
        {
            std::vector< bool > members; // per previous block
            bool complement;
        };
        std::vector< candidate > cands;
        const auto nb = prev.block_count;
        for ( std::size_t b = 0; b < nb; ++b )
        {
            std::vector< bool > m( nb, false );
            m[ b ] = true;
            cands.push_back( { m, false } );
        }
        for ( std::size_t b = 0; b < nb; ++b )
        {
            std::vector< bool > m( nb, false );
            m[ b ] = true;
            cands.push_back( { m, true } );
        }
        if ( nb <= 12 )
            for ( std::size_t mask = 1; mask + 1 < ( std::size_t( 1 ) << nb ); ++mask )
            {
                if ( __builtin_popcountll( mask ) == 1 || __builtin_popcountll( mask ) + 1 == static_cast< int >( nb ) )
                    continue;
                std::vector< bool > m( nb );
                for ( std::size_t b = 0; b < nb; ++b )
                    m[ b ] = mask >> b & 1;
                cands.push_back( { m, false } );
            }

        std::optional< cformula > fallback;
        for ( const auto& cand : cands )
        {
            Predicate2 p( _sys.size() );
            for ( state_id z = 0; z < _sys.size(); ++z )
                p[ z ] = cand.members[ prev.block_of[ z ] ] != cand.complement;
            const auto tc = image( _sys, p, xc ), td = image( _sys, p, xd );
            for ( const auto& m : _lambdas )
            {
                const bool vc = eval_lambda( m.steps, *_sys.expr, tc );
                const bool vd = eval_lambda( m.steps, *_sys.expr, td );
                if ( vc == vd )
                    continue;
                auto make = [ & ] { return classical_formula::modal( m.name, predicate_formula( level - 1, cand.members, cand.complement ) ); };
                if ( vc )
                    return make();
                if ( !fallback )
                    fallback = classical_formula::neg( make() );
            }
        }
        if ( fallback )
            return *fallback;
        throw separation_failure( "no generated evaluation map separates states " + _sys.states[ xc ] + " and " +
                                  _sys.states[ xd ] );
    }

    cformula predicate_formula( std::size_t level, const std::vector< bool >& members, bool complement )
    {
        std::vector< std::size_t > in;
        for ( std::size_t b = 0; b < members.size(); ++b )
            if ( members[ b ] )
                in.push_back( b );
        cformula f;
        if ( in.size() == 1 )
            f = characteristic( level, in.front() );
        else
        {
            // disjunction as not and(not ..)
            std::vector< cformula > negs;
            for ( auto b : in )
                negs.push_back( classical_formula::neg( characteristic( level, b ) ) );
            f = classical_formula::neg( classical_formula::conj( negs ) );
        }
        return complement ? classical_formula::neg( f ) : f;
    }

    const System& _sys;
    Partition _part;
    std::vector< eval_map > _lambdas;
    std::map< std::pair< std::size_t, std::size_t >, cformula > _chi;
};

inline cformula synthesize_distinguishing_formula( const System& sys, state_id x, state_id y )
{
    classical_synthesizer s( sys );
    return s.distinguish( x, y );
}

} // namespace coalg
