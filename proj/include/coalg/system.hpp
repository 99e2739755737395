#pragma once

#include "evaluation_maps.hpp"
#include "functor.hpp"
#include "rational.hpp"
#include "value.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace coalg
{

/// A finite coalgebra α: X → FX. States are addressed by their index into
/// `states`, which keeps the source identifiers.
struct System
{
    std::string name;
    functor_ptr expr;
    std::vector< std::string > states;
    std::vector< state_value > alpha;
    Rational top = 1;

    [[nodiscard]] std::size_t size() const { return states.size(); }

    [[nodiscard]] std::optional< state_id > find( const std::string& id ) const
    {
        auto it = std::find( states.begin(), states.end(), id );
        if ( it == states.end() )
            return std::nullopt;
        return static_cast< state_id >( it - states.begin() );
    }

    [[nodiscard]] state_id index_of( const std::string& id ) const
    {
        if ( auto i = find( id ) )
            return *i;
        throw std::invalid_argument( "unknown state '" + id + "'" );
    }
};

/// p: X → 2, indexed by state.
using Predicate2 = std::vector< bool >;
/// p: X → [0,⊤], indexed by state.
using PredicateR = std::vector< Rational >;

inline Predicate2 indicator( std::size_t n, std::initializer_list< state_id > members )
{
    Predicate2 p( n, false );
    for ( auto m : members )
        p.at( m ) = true;
    return p;
}

inline PredicateR to_real( const Predicate2& p, const Rational& top = 1 )
{
    PredicateR r;
    r.reserve( p.size() );
    for ( bool b : p )
        r.push_back( b ? top : Rational( 0 ) );
    return r;
}

inline bit_value image( const System& sys, const Predicate2& p, state_id x )
{
    return apply_map( [ & ]( state_id s ) -> bool { return p[ s ]; }, *sys.expr, sys.alpha.at( x ) );
}

inline real_value image( const System& sys, const PredicateR& p, state_id x )
{
    return apply_map( [ & ]( state_id s ) -> Rational { return p[ s ]; }, *sys.expr, sys.alpha.at( x ) );
}

/// Distinct states referenced by α(x), sorted.
inline std::vector< state_id > successors( const System& sys, state_id x )
{
    std::vector< state_id > out;
    collect_atoms( sys.alpha.at( x ), out );
    std::sort( out.begin(), out.end() );
    out.erase( std::unique( out.begin(), out.end() ), out.end() );
    return out;
}

namespace detail
{

template < class Atom, class Visit >
void visit_nodes( const functor_expr& e, const fvalue< Atom >& v, const Visit& visit )
{
    visit( e, v );
    switch ( e.kind )
    {
    case functor_kind::pow:
    case functor_kind::dist:
        for ( const auto& c : v.items )
            visit_nodes( *e.left, c, visit );
        break;
    case functor_kind::product:
        visit_nodes( *e.left, v.items[ 0 ], visit );
        visit_nodes( *e.right, v.items[ 1 ], visit );
        break;
    case functor_kind::coproduct:
        visit_nodes( v.kind == value_kind::inl ? *e.left : *e.right, v.items[ 0 ], visit );
        break;
    default:
        break;
    }
}

} // namespace detail

/// Mass thresholds for the Dist nodes: every subset sum of the weights of a
/// distribution occurring in the system (these are exactly the masses a
/// predicate can give the true elements), plus the midpoints between
/// consecutive values. Supports wider than 16 contribute their prefix sums only.
inline lambda_context make_lambda_context( const System& sys )
{
    std::set< Rational > sums, reals;
    for ( const auto& a : sys.alpha )
        detail::visit_nodes( *sys.expr, a, [ & ]( const functor_expr& e, const state_value& v ) {
            if ( e.kind == functor_kind::const_real )
                reals.insert( v.real );
            if ( e.kind != functor_kind::dist )
                return;
            const auto n = v.weights.size();
            if ( n <= 16 )
            {
                for ( std::size_t mask = 1; mask < ( std::size_t( 1 ) << n ); ++mask )
                {
                    Rational s = 0;
                    for ( std::size_t k = 0; k < n; ++k )
                        if ( mask >> k & 1 )
                            s += v.weights[ k ];
                    sums.insert( s );
                }
            }
            else
            {
                Rational s = 0;
                for ( const auto& w : v.weights )
                    sums.insert( s += w );
            }
        } );
    lambda_context ctx;
    Rational prev = 0;
    for ( const auto& s : sums )
    {
        ctx.thresholds.push_back( ( prev + s ) / 2 );
        ctx.thresholds.push_back( s );
        prev = s;
    }
    std::sort( ctx.thresholds.begin(), ctx.thresholds.end() );
    ctx.reals.assign( reals.begin(), reals.end() );
    return ctx;
}

inline std::vector< eval_map > lambdas_of( const System& sys )
{
    return generate_lambdas( *sys.expr, make_lambda_context( sys ) );
}

inline std::vector< eval_map > gammas_of( const System& sys ) { return generate_gammas( *sys.expr ); }

/// Every distinct Fp(α(x)) for p: X → 2 and x ∈ X; nullopt when a state has
/// more than `max_support` successors.
inline std::optional< std::vector< bit_value > > reachable_bit_values( const System& sys, std::size_t max_support = 12 )
{
    std::set< bit_value > out;
    for ( state_id x = 0; x < sys.size(); ++x )
    {
        const auto succ = successors( sys, x );
        if ( succ.size() > max_support )
            return std::nullopt;
        Predicate2 p( sys.size(), false );
        for ( std::size_t mask = 0; mask < ( std::size_t( 1 ) << succ.size() ); ++mask )
        {
            for ( std::size_t k = 0; k < succ.size(); ++k )
                p[ succ[ k ] ] = mask >> k & 1;
            out.insert( image( sys, p, x ) );
        }
    }
    return std::vector< bit_value >( out.begin(), out.end() );
}

struct validation_finding
{
    enum class severity
    {
        error,
        warning,
        info,
    } level = severity::error;
    std::string message;
};

struct validation_report
{
    std::vector< validation_finding > findings;
    std::optional< bool > separating; // nullopt: too large to check

    [[nodiscard]] bool valid() const
    {
        return std::none_of( findings.begin(), findings.end(),
                             []( const auto& f ) { return f.level == validation_finding::severity::error; } );
    }
};

inline std::function< std::string( const state_id& ) > state_checker( const System& sys )
{
    return [ n = sys.size() ]( const state_id& s ) -> std::string {
        return s < n ? std::string() : "unknown state #" + std::to_string( s );
    };
}

/// Checks every α(x) against the functor, ⊤ consistency, and the separation of
/// the generated classical family on the reachable F2 values.
inline validation_report validate_system( const System& sys )
{
    validation_report r;
    auto error = [ & ]( std::string m ) { r.findings.push_back( { validation_finding::severity::error, std::move( m ) } ); };
    if ( !sys.expr )
    {
        error( "missing functor" );
        return r;
    }
    try
    {
        if ( auto t = shared_top( *sys.expr ); t && *t != sys.top )
            error( "⊤ = " + to_string( sys.top ) + " differs from Real(top=" + to_string( *t ) + ")" );
    }
    catch ( const std::exception& e )
    {
        error( e.what() );
    }
    if ( sys.top <= 0 )
        error( "⊤ must be positive" );
    if ( sys.states.empty() )
        error( "no states declared" );
    std::set< std::string > seen;
    for ( const auto& s : sys.states )
        if ( !seen.insert( s ).second )
            error( "state '" + s + "' declared twice" );
    if ( sys.alpha.size() != sys.states.size() )
    {
        error( "alpha is not total" );
        return r;
    }
    validation_options opts;
    opts.top = sys.top;
    for ( state_id x = 0; x < sys.size(); ++x )
        if ( auto e = validate( *sys.expr, sys.alpha[ x ], state_checker( sys ), opts ) )
            error( "alpha " + sys.states[ x ] + ": " + e->what() );
    if ( !r.valid() )
        return r;

    if ( auto values = reachable_bit_values( sys ) )
    {
        const auto family = lambdas_of( sys );
        auto clash = find_unseparated( *sys.expr, family, *values );
        r.separating = !clash.has_value();
        if ( clash )
            r.findings.push_back( { validation_finding::severity::warning,
                                    "generated evaluation maps do not separate two reachable F2 values" } );
    }
    return r;
}

} // namespace coalg
