#pragma once

#include "../classical/formula.hpp"
#include "../system.hpp"

#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace coalg
{

class metric_formula;
using mformula = std::shared_ptr< const metric_formula >;

/// φ ::= T | [γ]φ | min(φ, φ) | not φ | φ - q. Immutable nodes, shared freely.
class metric_formula
{
public:
    enum class kind
    {
        top,
        modal,
        min,
        neg,
        minus,
    };

    kind k = kind::top;
    std::vector< mformula > subs;
    std::string gamma; // modal
    Rational q;        // minus

    static mformula top() { return std::make_shared< metric_formula >(); }

    static mformula modal( std::string gamma, mformula sub )
    {
        auto f = std::make_shared< metric_formula >();
        f->k = kind::modal;
        f->gamma = std::move( gamma );
        f->subs.push_back( std::move( sub ) );
        return f;
    }

    static mformula min( mformula a, mformula b )
    {
        auto f = std::make_shared< metric_formula >();
        f->k = kind::min;
        f->subs.push_back( std::move( a ) );
        f->subs.push_back( std::move( b ) );
        return f;
    }

    static mformula neg( mformula sub )
    {
        auto f = std::make_shared< metric_formula >();
        f->k = kind::neg;
        f->subs.push_back( std::move( sub ) );
        return f;
    }

    static mformula minus( mformula sub, Rational q )
    {
        auto f = std::make_shared< metric_formula >();
        f->k = kind::minus;
        f->subs.push_back( std::move( sub ) );
        f->q = std::move( q );
        return f;
    }

    /// max(a, b) = not min(not a, not b)
    static mformula max( mformula a, mformula b ) { return neg( min( neg( std::move( a ) ), neg( std::move( b ) ) ) ); }

    /// The constant c = T - (⊤ - c).
    static mformula constant( const Rational& c, const Rational& top )
    {
        return c == top ? metric_formula::top() : minus( metric_formula::top(), top - c );
    }

    [[nodiscard]] const mformula& sub() const { return subs.at( 0 ); }
};

inline std::size_t modal_depth( const metric_formula& f )
{
    std::unordered_map< const metric_formula*, std::size_t > memo;
    auto rec = [ & ]( auto&& self, const metric_formula& g ) -> std::size_t {
        if ( auto it = memo.find( &g ); it != memo.end() )
            return it->second;
        std::size_t d = 0;
        for ( const auto& s : g.subs )
            d = std::max( d, self( self, *s ) );
        d += g.k == metric_formula::kind::modal ? 1 : 0;
        memo.emplace( &g, d );
        return d;
    };
    return rec( rec, f );
}

/// Number of nodes when the DAG is unfolded into a tree (saturating).
inline std::size_t tree_size( const metric_formula& f )
{
    constexpr auto cap = std::numeric_limits< std::size_t >::max() / 4;
    std::unordered_map< const metric_formula*, std::size_t > memo;
    auto rec = [ & ]( auto&& self, const metric_formula& g ) -> std::size_t {
        if ( auto it = memo.find( &g ); it != memo.end() )
            return it->second;
        std::size_t n = 1;
        for ( const auto& s : g.subs )
            n = std::min( cap, n + self( self, *s ) );
        memo.emplace( &g, n );
        return n;
    };
    return rec( rec, f );
}

inline std::string to_string( const metric_formula& f )
{
    auto atom = []( const metric_formula& g ) {
        auto s = to_string( g );
        return g.k == metric_formula::kind::minus ? "(" + s + ")" : s;
    };
    switch ( f.k )
    {
    case metric_formula::kind::top:
        return "T";
    case metric_formula::kind::modal:
        return "[" + f.gamma + "]" + atom( *f.sub() );
    case metric_formula::kind::min:
        return "min(" + to_string( *f.subs[ 0 ] ) + ", " + to_string( *f.subs[ 1 ] ) + ")";
    case metric_formula::kind::neg:
        return "not " + atom( *f.sub() );
    case metric_formula::kind::minus:
        return to_string( *f.sub() ) + " - " + to_string( f.q );
    }
    return {};
}

/// Shared nodes printed once, as numbered definitions; the last line is the root.
inline std::string to_dag_string( const mformula& f )
{
    std::unordered_map< const metric_formula*, std::size_t > id;
    std::string out;
    auto rec = [ & ]( auto&& self, const mformula& g ) -> std::string {
        if ( g->k == metric_formula::kind::top )
            return "T";
        if ( auto it = id.find( g.get() ); it != id.end() )
            return "$" + std::to_string( it->second );
        std::vector< std::string > kids;
        for ( const auto& s : g->subs )
            kids.push_back( self( self, s ) );
        std::string body;
        switch ( g->k )
        {
        case metric_formula::kind::modal:
            body = "[" + g->gamma + "]" + kids[ 0 ];
            break;
        case metric_formula::kind::min:
            body = "min(" + kids[ 0 ] + ", " + kids[ 1 ] + ")";
            break;
        case metric_formula::kind::neg:
            body = "not " + kids[ 0 ];
            break;
        case metric_formula::kind::minus:
            body = kids[ 0 ] + " - " + to_string( g->q );
            break;
        default:
            break;
        }
        const auto n = id.size() + 1;
        id.emplace( g.get(), n );
        out += "$" + std::to_string( n ) + " = " + body + "\n";
        return "$" + std::to_string( n );
    };
    const auto root = rec( rec, f );
    if ( out.empty() )
        return root + "\n";
    return out;
}

namespace detail
{

inline mformula parse_metric_postfix( formula_scanner& sc );

inline mformula parse_metric_atom( formula_scanner& sc )
{
    if ( sc.accept( "T" ) )
        return metric_formula::top();
    if ( sc.accept( "not" ) )
        return metric_formula::neg( parse_metric_atom( sc ) );
    if ( sc.accept( "min" ) )
    {
        sc.expect( "(" );
        auto a = parse_metric_postfix( sc );
        sc.expect( "," );
        auto b = parse_metric_postfix( sc );
        sc.expect( ")" );
        return metric_formula::min( a, b );
    }
    if ( sc.accept( "max" ) )
    {
        sc.expect( "(" );
        auto a = parse_metric_postfix( sc );
        sc.expect( "," );
        auto b = parse_metric_postfix( sc );
        sc.expect( ")" );
        return metric_formula::max( a, b );
    }
    if ( sc.accept( "[" ) )
    {
        auto name = sc.until( ']' );
        return metric_formula::modal( name, parse_metric_atom( sc ) );
    }
    if ( sc.accept( "(" ) )
    {
        auto f = parse_metric_postfix( sc );
        sc.expect( ")" );
        return f;
    }
    sc.fail( "expected 'T', 'min(', 'max(', 'not', '[' or '('" );
}

inline mformula parse_metric_postfix( formula_scanner& sc )
{
    auto f = parse_metric_atom( sc );
    while ( sc.peek() == '-' )
    {
        sc.expect( "-" );
        f = metric_formula::minus( f, sc.rational() );
    }
    return f;
}

} // namespace detail

/// Parses `T`, `[name] φ`, `min(φ, φ)`, `max(φ, φ)`, `not φ`, `φ - q`. The
/// prefix operators bind tighter than `- q`.
inline mformula parse_metric_formula( std::string_view text )
{
    detail::formula_scanner sc( text );
    auto f = detail::parse_metric_postfix( sc );
    if ( !sc.done() )
        sc.fail( "unexpected trailing input" );
    return f;
}

/// Memoizing evaluator for the real-valued logic.
class metric_evaluator
{
public:
    metric_evaluator( const System& sys, map_table gammas ) : _sys( &sys ), _gammas( std::move( gammas ) ) {}
    explicit metric_evaluator( const System& sys ) : metric_evaluator( sys, map_table( gammas_of( sys ) ) ) {}

    const PredicateR& operator()( const mformula& f )
    {
        if ( auto it = _memo.find( f.get() ); it != _memo.end() )
            return it->second;
        const auto n = _sys->size();
        const auto& top = _sys->top;
        PredicateR out( n, top );
        switch ( f->k )
        {
        case metric_formula::kind::top:
            break;
        case metric_formula::kind::modal:
        {
            const auto& m = _gammas.at( f->gamma );
            const PredicateR v = ( *this )( f->sub() );
            for ( state_id x = 0; x < n; ++x )
                out[ x ] = eval_gamma( m.steps, *_sys->expr, image( *_sys, v, x ), top );
            break;
        }
        case metric_formula::kind::min:
        {
            const PredicateR a = ( *this )( f->subs[ 0 ] );
            const auto& b = ( *this )( f->subs[ 1 ] );
            for ( state_id x = 0; x < n; ++x )
                out[ x ] = rmin( a[ x ], b[ x ] );
            break;
        }
        case metric_formula::kind::neg:
        {
            const auto& v = ( *this )( f->sub() );
            for ( state_id x = 0; x < n; ++x )
                out[ x ] = top - v[ x ];
            break;
        }
        case metric_formula::kind::minus:
        {
            const auto& v = ( *this )( f->sub() );
            for ( state_id x = 0; x < n; ++x )
                out[ x ] = monus( v[ x ], f->q );
            break;
        }
        }
        _keep.push_back( f );
        return _memo.emplace( f.get(), std::move( out ) ).first->second;
    }

    [[nodiscard]] const map_table& gammas() const { return _gammas; }

private:
    const System* _sys;
    map_table _gammas;
    std::unordered_map< const metric_formula*, PredicateR > _memo;
    std::vector< mformula > _keep;
};

inline PredicateR eval_metric( const System& sys, const mformula& f )
{
    metric_evaluator ev( sys );
    return ev( f );
}

/// Checks that every modality names a generated γ and every q lies in [0, ⊤].
inline void check_metric_formula( const map_table& gammas, const mformula& f, const Rational& top )
{
    std::unordered_map< const metric_formula*, bool > seen;
    auto rec = [ & ]( auto&& self, const mformula& g ) -> void {
        if ( !seen.emplace( g.get(), true ).second )
            return;
        if ( g->k == metric_formula::kind::modal )
            (void)gammas.at( g->gamma );
        if ( g->k == metric_formula::kind::minus && ( g->q < 0 || g->q > top ) )
            throw std::invalid_argument( "constant " + to_string( g->q ) + " outside [0, " + to_string( top ) + "]" );
        for ( const auto& s : g->subs )
            self( self, s );
    };
    rec( rec, f );
}

} // namespace coalg
