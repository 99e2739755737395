#pragma once

#include "functor.hpp"
#include "rational.hpp"
#include "transport.hpp"
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

/// One step of an evaluation-map path, read from the root of the functor tree
/// towards a leaf.
enum class step_kind
{
    // selectors
    select_left,  // product: first component
    select_right, // product: second component
    guard,        // product with a Labels side: [label = a] and the other component
    implication,  // product with a Labels side: [label != a] or the other component
    carry_left,   // coproduct: inner map on inl, 0 on inr
    carry_right,
    // modalities
    sup,           // metric, Pow
    expect,        // metric, Dist
    dia,           // classical, Pow: some element
    box,           // classical, Pow: every element
    mass_at_least, // classical, Dist: mass of true elements >= q
    // leaves
    identity,
    constant_top, // metric One: ⊤
    constant_one, // classical One: 1
    real_value,   // metric Real: the value itself
    real_equals,  // classical Real: value = q
    label_is,     // Labels: indicator of one label
    side_left,    // classical coproduct side indicators
    side_right,
};

struct map_step
{
    step_kind kind = step_kind::identity;
    std::string label;
    Rational q;

    friend bool operator==( const map_step& a, const map_step& b )
    {
        return a.kind == b.kind && a.label == b.label && a.q == b.q;
    }
};

using map_path = std::vector< map_step >;

/// A generated evaluation map: its path and its stable, human-facing name.
struct eval_map
{
    map_path steps;
    std::string name;
};

namespace detail
{

inline bool is_selector( step_kind k )
{
    switch ( k )
    {
    case step_kind::select_left:
    case step_kind::select_right:
    case step_kind::guard:
    case step_kind::implication:
    case step_kind::carry_left:
    case step_kind::carry_right:
    case step_kind::label_is:
        return true;
    default:
        return false;
    }
}

inline std::string segment( const map_step& s )
{
    switch ( s.kind )
    {
    case step_kind::select_left:
        return "fst";
    case step_kind::select_right:
        return "snd";
    case step_kind::guard:
    case step_kind::implication:
    case step_kind::label_is:
        return s.label;
    case step_kind::carry_left:
        return "l";
    case step_kind::carry_right:
        return "r";
    case step_kind::sup:
        return "sup";
    case step_kind::expect:
        return "exp";
    case step_kind::dia:
        return "dia";
    case step_kind::box:
        return "box";
    case step_kind::mass_at_least:
        return "mass>=" + to_string( s.q );
    case step_kind::constant_top:
        return "term";
    case step_kind::constant_one:
        return "one";
    case step_kind::real_equals:
        return "real=" + to_string( s.q );
    case step_kind::side_left:
    case step_kind::side_right:
        return "side";
    case step_kind::identity:
    case step_kind::real_value:
        return "";
    }
    return "";
}

} // namespace detail

/// Operator segments in root-to-leaf order, then selector segments in
/// root-to-leaf order, joined by '.'; "id" when both are empty.
inline std::string path_name( const map_path& p )
{
    std::vector< std::string > ops, sels;
    for ( const auto& s : p )
    {
        auto seg = detail::segment( s );
        if ( s.kind == step_kind::side_left || s.kind == step_kind::side_right )
        {
            ops.push_back( seg );
            sels.push_back( s.kind == step_kind::side_left ? "l" : "r" );
            continue;
        }
        if ( seg.empty() )
            continue;
        ( detail::is_selector( s.kind ) ? sels : ops ).push_back( seg );
    }
    std::string name;
    for ( const auto* part : { &ops, &sels } )
        for ( const auto& seg : *part )
            name += ( name.empty() ? "" : "." ) + seg;
    return name.empty() ? "id" : name;
}

namespace detail
{

inline map_path prepend( map_step s, const map_path& rest )
{
    map_path p;
    p.reserve( rest.size() + 1 );
    p.push_back( std::move( s ) );
    p.insert( p.end(), rest.begin(), rest.end() );
    return p;
}

/// The side of a product that is a Labels constant, when exactly one is.
inline std::optional< bool > labels_side( const functor_expr& e )
{
    const bool l = e.left->kind == functor_kind::const_labels;
    const bool r = e.right->kind == functor_kind::const_labels;
    if ( l == r )
        return std::nullopt;
    return l; // true: labels on the left
}

inline std::vector< map_path > gamma_paths( const functor_expr& e )
{
    std::vector< map_path > out;
    switch ( e.kind )
    {
    case functor_kind::identity:
        out.push_back( { { step_kind::identity, {}, {} } } );
        break;
    case functor_kind::const_real:
        out.push_back( { { step_kind::real_value, {}, {} } } );
        break;
    case functor_kind::const_one:
        out.push_back( { { step_kind::constant_top, {}, {} } } );
        break;
    case functor_kind::const_labels:
        for ( const auto& l : e.labels )
            out.push_back( { { step_kind::label_is, l, {} } } );
        break;
    case functor_kind::pow:
    case functor_kind::dist:
        for ( const auto& p : gamma_paths( *e.left ) )
            out.push_back( prepend( { e.kind == functor_kind::pow ? step_kind::sup : step_kind::expect, {}, {} }, p ) );
        break;
    case functor_kind::product:
    {
        for ( const auto& p : gamma_paths( *e.left ) )
            out.push_back( prepend( { step_kind::select_left, {}, {} }, p ) );
        for ( const auto& p : gamma_paths( *e.right ) )
            out.push_back( prepend( { step_kind::select_right, {}, {} }, p ) );
        if ( auto side = labels_side( e ) )
        {
            const auto& labels = *side ? e.left->labels : e.right->labels;
            const auto inner = gamma_paths( *side ? *e.right : *e.left );
            for ( const auto& l : labels )
                for ( const auto& p : inner )
                    out.push_back( prepend( { step_kind::guard, l, {} }, p ) );
        }
        break;
    }
    case functor_kind::coproduct:
        for ( const auto& p : gamma_paths( *e.left ) )
            out.push_back( prepend( { step_kind::carry_left, {}, {} }, p ) );
        for ( const auto& p : gamma_paths( *e.right ) )
            out.push_back( prepend( { step_kind::carry_right, {}, {} }, p ) );
        break;
    }
    return out;
}

inline std::vector< eval_map > named( const std::vector< map_path >& paths )
{
    std::vector< eval_map > out;
    std::map< std::string, int > seen;
    for ( const auto& p : paths )
    {
        auto name = path_name( p );
        if ( const int n = seen[ name ]++; n > 0 )
            name += "#" + std::to_string( n + 1 );
        out.push_back( { p, name } );
    }
    return out;
}

} // namespace detail

/// The metric evaluation maps γ: F[0,⊤] → [0,⊤] built compositionally over the
/// functor (selection at products, carrying at coproducts, sup at Pow,
/// expectation at Dist; identity, value, ⊤ and per-label ⊤-indicators at leaves).
inline std::vector< eval_map > generate_gammas( const functor_expr& e ) { return detail::named( detail::gamma_paths( e ) ); }

/// System-dependent parameters of the classical family: the mass thresholds used
/// at Dist nodes and the constants that occur under Real nodes.
struct lambda_context
{
    std::vector< Rational > thresholds;
    std::vector< Rational > reals;
};

namespace detail
{

inline bool is_constant_one( const map_path& p ) { return p.size() == 1 && p[ 0 ].kind == step_kind::constant_one; }

inline std::vector< map_path > lambda_paths( const functor_expr& e, const lambda_context& ctx, bool under_box )
{
    std::vector< map_path > out;
    switch ( e.kind )
    {
    case functor_kind::identity:
        out.push_back( { { step_kind::identity, {}, {} } } );
        break;
    case functor_kind::const_one:
        out.push_back( { { step_kind::constant_one, {}, {} } } );
        break;
    case functor_kind::const_real:
        for ( const auto& q : ctx.reals )
            out.push_back( { { step_kind::real_equals, {}, q } } );
        break;
    case functor_kind::const_labels:
        for ( const auto& l : e.labels )
            out.push_back( { { step_kind::label_is, l, {} } } );
        break;
    case functor_kind::pow:
        for ( const auto& p : lambda_paths( *e.left, ctx, false ) )
            out.push_back( prepend( { step_kind::dia, {}, {} }, p ) );
        for ( const auto& p : lambda_paths( *e.left, ctx, true ) )
            out.push_back( prepend( { step_kind::box, {}, {} }, p ) );
        break;
    case functor_kind::dist:
    {
        const auto inner = lambda_paths( *e.left, ctx, false );
        for ( const auto& q : ctx.thresholds )
            for ( const auto& p : inner )
                out.push_back( prepend( { step_kind::mass_at_least, {}, q }, p ) );
        break;
    }
    case functor_kind::product:
    {
        for ( const auto& p : lambda_paths( *e.left, ctx, under_box ) )
            out.push_back( prepend( { step_kind::select_left, {}, {} }, p ) );
        for ( const auto& p : lambda_paths( *e.right, ctx, under_box ) )
            out.push_back( prepend( { step_kind::select_right, {}, {} }, p ) );
        if ( auto side = labels_side( e ) )
        {
            const auto& labels = *side ? e.left->labels : e.right->labels;
            const auto inner = lambda_paths( *side ? *e.right : *e.left, ctx, under_box );
            const auto kind = under_box ? step_kind::implication : step_kind::guard;
            for ( const auto& l : labels )
                for ( const auto& p : inner )
                    out.push_back( prepend( { kind, l, {} }, p ) );
        }
        break;
    }
    case functor_kind::coproduct:
        out.push_back( { { step_kind::side_left, {}, {} } } );
        out.push_back( { { step_kind::side_right, {}, {} } } );
        for ( const auto& p : lambda_paths( *e.left, ctx, under_box ) )
            if ( !is_constant_one( p ) )
                out.push_back( prepend( { step_kind::carry_left, {}, {} }, p ) );
        for ( const auto& p : lambda_paths( *e.right, ctx, under_box ) )
            if ( !is_constant_one( p ) )
                out.push_back( prepend( { step_kind::carry_right, {}, {} }, p ) );
        break;
    }
    return out;
}

} // namespace detail

/// The classical evaluation maps λ: F2 → 2. Pow contributes diamond and box,
/// Dist the thresholds [mass of 1 >= q] for q in the context, Labels products a
/// guarded (diamond side) or implicational (box side) per-label combination,
/// coproducts their side indicators.
inline std::vector< eval_map > generate_lambdas( const functor_expr& e, const lambda_context& ctx = {} )
{
    return detail::named( detail::lambda_paths( e, ctx, false ) );
}

class path_mismatch : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail
{

[[noreturn]] inline void mismatch( const map_step& s, const char* what )
{
    throw path_mismatch( "evaluation map step '" + segment( s ) + "': " + what );
}

/// Returns the label-side and the carried-side component of a Labels product.
template < class Atom >
std::pair< const fvalue< Atom >*, const fvalue< Atom >* > split_labelled( const functor_expr& e, const fvalue< Atom >& t,
                                                                          const map_step& s )
{
    auto side = labels_side( e );
    if ( e.kind != functor_kind::product || !side || t.kind != value_kind::pair )
        mismatch( s, "label combination needs a product with one Labels side" );
    return *side ? std::pair{ &t.items[ 0 ], &t.items[ 1 ] } : std::pair{ &t.items[ 1 ], &t.items[ 0 ] };
}

inline const functor_expr& carried_expr( const functor_expr& e )
{
    return *labels_side( e ) ? *e.right : *e.left;
}

inline Rational eval_gamma_at( const map_path& p, std::size_t i, const functor_expr& e, const real_value& t,
                               const Rational& top )
{
    if ( i >= p.size() )
        throw path_mismatch( "evaluation map path ended early" );
    const auto& s = p[ i ];
    switch ( s.kind )
    {
    case step_kind::identity:
        if ( t.kind != value_kind::atom )
            mismatch( s, "expected a predicate value" );
        return t.atom;
    case step_kind::real_value:
        if ( t.kind != value_kind::real )
            mismatch( s, "expected a real" );
        return t.real;
    case step_kind::constant_top:
        return top;
    case step_kind::label_is:
        if ( t.kind != value_kind::label )
            mismatch( s, "expected a label" );
        return t.label == s.label ? top : Rational( 0 );
    case step_kind::sup:
    {
        if ( e.kind != functor_kind::pow || t.kind != value_kind::set )
            mismatch( s, "expected a set" );
        Rational best = 0;
        for ( const auto& c : t.items )
            best = rmax( best, eval_gamma_at( p, i + 1, *e.left, c, top ) );
        return best;
    }
    case step_kind::expect:
    {
        if ( e.kind != functor_kind::dist || t.kind != value_kind::dist )
            mismatch( s, "expected a distribution" );
        Rational sum = 0;
        for ( std::size_t k = 0; k < t.items.size(); ++k )
            sum += t.weights[ k ] * eval_gamma_at( p, i + 1, *e.left, t.items[ k ], top );
        return sum;
    }
    case step_kind::select_left:
    case step_kind::select_right:
    {
        if ( e.kind != functor_kind::product || t.kind != value_kind::pair )
            mismatch( s, "expected a pair" );
        const bool left = s.kind == step_kind::select_left;
        return eval_gamma_at( p, i + 1, left ? *e.left : *e.right, t.items[ left ? 0 : 1 ], top );
    }
    case step_kind::guard:
    {
        auto [ lab, rest ] = split_labelled( e, t, s );
        if ( lab->label != s.label )
            return 0;
        return eval_gamma_at( p, i + 1, carried_expr( e ), *rest, top );
    }
    case step_kind::carry_left:
    case step_kind::carry_right:
    {
        if ( e.kind != functor_kind::coproduct )
            mismatch( s, "expected a coproduct" );
        const bool left = s.kind == step_kind::carry_left;
        if ( t.kind != ( left ? value_kind::inl : value_kind::inr ) )
        {
            if ( t.kind != value_kind::inl && t.kind != value_kind::inr )
                mismatch( s, "expected inl or inr" );
            return 0;
        }
        return eval_gamma_at( p, i + 1, left ? *e.left : *e.right, t.items[ 0 ], top );
    }
    default:
        mismatch( s, "not a metric evaluation-map step" );
    }
}

inline bool eval_lambda_at( const map_path& p, std::size_t i, const functor_expr& e, const bit_value& t )
{
    if ( i >= p.size() )
        throw path_mismatch( "evaluation map path ended early" );
    const auto& s = p[ i ];
    switch ( s.kind )
    {
    case step_kind::identity:
        if ( t.kind != value_kind::atom )
            mismatch( s, "expected a predicate value" );
        return t.atom;
    case step_kind::constant_one:
        return true;
    case step_kind::real_equals:
        if ( t.kind != value_kind::real )
            mismatch( s, "expected a real" );
        return t.real == s.q;
    case step_kind::label_is:
        if ( t.kind != value_kind::label )
            mismatch( s, "expected a label" );
        return t.label == s.label;
    case step_kind::side_left:
    case step_kind::side_right:
        if ( t.kind != value_kind::inl && t.kind != value_kind::inr )
            mismatch( s, "expected inl or inr" );
        return ( t.kind == value_kind::inl ) == ( s.kind == step_kind::side_left );
    case step_kind::dia:
    case step_kind::box:
    {
        if ( e.kind != functor_kind::pow || t.kind != value_kind::set )
            mismatch( s, "expected a set" );
        for ( const auto& c : t.items )
        {
            const bool v = eval_lambda_at( p, i + 1, *e.left, c );
            if ( s.kind == step_kind::dia && v )
                return true;
            if ( s.kind == step_kind::box && !v )
                return false;
        }
        return s.kind == step_kind::box;
    }
    case step_kind::mass_at_least:
    {
        if ( e.kind != functor_kind::dist || t.kind != value_kind::dist )
            mismatch( s, "expected a distribution" );
        Rational mass = 0;
        for ( std::size_t k = 0; k < t.items.size(); ++k )
            if ( eval_lambda_at( p, i + 1, *e.left, t.items[ k ] ) )
                mass += t.weights[ k ];
        return mass >= s.q;
    }
    case step_kind::select_left:
    case step_kind::select_right:
    {
        if ( e.kind != functor_kind::product || t.kind != value_kind::pair )
            mismatch( s, "expected a pair" );
        const bool left = s.kind == step_kind::select_left;
        return eval_lambda_at( p, i + 1, left ? *e.left : *e.right, t.items[ left ? 0 : 1 ] );
    }
    case step_kind::guard:
    case step_kind::implication:
    {
        auto [ lab, rest ] = split_labelled( e, t, s );
        const bool match = lab->label == s.label;
        if ( s.kind == step_kind::guard && !match )
            return false;
        if ( s.kind == step_kind::implication && !match )
            return true;
        return eval_lambda_at( p, i + 1, carried_expr( e ), *rest );
    }
    case step_kind::carry_left:
    case step_kind::carry_right:
    {
        if ( e.kind != functor_kind::coproduct )
            mismatch( s, "expected a coproduct" );
        const bool left = s.kind == step_kind::carry_left;
        if ( t.kind != ( left ? value_kind::inl : value_kind::inr ) )
        {
            if ( t.kind != value_kind::inl && t.kind != value_kind::inr )
                mismatch( s, "expected inl or inr" );
            return false;
        }
        return eval_lambda_at( p, i + 1, left ? *e.left : *e.right, t.items[ 0 ] );
    }
    default:
        mismatch( s, "not a classical evaluation-map step" );
    }
}

} // namespace detail

/// γ(t) for t ∈ F[0,⊤] (atoms are the predicate values).
inline Rational eval_gamma( const map_path& p, const functor_expr& e, const real_value& t, const Rational& top = 1 )
{
    return detail::eval_gamma_at( p, 0, e, t, top );
}

/// λ(t) for t ∈ F2.
inline bool eval_lambda( const map_path& p, const functor_expr& e, const bit_value& t )
{
    return detail::eval_lambda_at( p, 0, e, t );
}

/// t1 ≤^F t2 on F2: 0 ≤ 1 at Id, equality at constants, componentwise at
/// products, same side at coproducts, Egli-Milner at Pow, and an order-supported
/// coupling at Dist.
inline bool lifted_order_leq( const functor_expr& e, const bit_value& t1, const bit_value& t2 )
{
    switch ( e.kind )
    {
    case functor_kind::identity:
        return !t1.atom || t2.atom;
    case functor_kind::const_real:
    case functor_kind::const_one:
    case functor_kind::const_labels:
        return t1 == t2;
    case functor_kind::product:
        return lifted_order_leq( *e.left, t1.items[ 0 ], t2.items[ 0 ] ) &&
               lifted_order_leq( *e.right, t1.items[ 1 ], t2.items[ 1 ] );
    case functor_kind::coproduct:
        if ( t1.kind != t2.kind )
            return false;
        return lifted_order_leq( t1.kind == value_kind::inl ? *e.left : *e.right, t1.items[ 0 ], t2.items[ 0 ] );
    case functor_kind::pow:
    {
        auto covered = [ & ]( const bit_value& a, const bit_value& b, bool a_is_lower ) {
            for ( const auto& x : a.items )
            {
                bool found = false;
                for ( const auto& y : b.items )
                    if ( a_is_lower ? lifted_order_leq( *e.left, x, y ) : lifted_order_leq( *e.left, y, x ) )
                    {
                        found = true;
                        break;
                    }
                if ( !found )
                    return false;
            }
            return true;
        };
        return covered( t1, t2, true ) && covered( t2, t1, false );
    }
    case functor_kind::dist:
    {
        std::vector< std::vector< bool > > adm( t1.items.size(), std::vector< bool >( t2.items.size() ) );
        for ( std::size_t i = 0; i < t1.items.size(); ++i )
            for ( std::size_t j = 0; j < t2.items.size(); ++j )
                adm[ i ][ j ] = lifted_order_leq( *e.left, t1.items[ i ], t2.items[ j ] );
        return coupling_feasible( adm, t1.weights, t2.weights );
    }
    }
    return false;
}

/// Finds two distinct values that no map in the family tells apart.
inline std::optional< std::pair< bit_value, bit_value > > find_unseparated( const functor_expr& e,
                                                                           const std::vector< eval_map >& family,
                                                                           const std::vector< bit_value >& values )
{
    std::map< std::vector< bool >, const bit_value* > seen;
    std::set< bit_value > distinct( values.begin(), values.end() );
    for ( const auto& v : distinct )
    {
        std::vector< bool > sig;
        sig.reserve( family.size() );
        for ( const auto& m : family )
            sig.push_back( eval_lambda( m.steps, e, v ) );
        auto [ it, fresh ] = seen.emplace( sig, &v );
        if ( !fresh )
            return std::pair{ *it->second, v };
    }
    return std::nullopt;
}

/// Finds a map and an ordered pair t1 ≤^F t2 with λ(t1) = 1, λ(t2) = 0.
inline std::optional< std::pair< std::string, std::pair< bit_value, bit_value > > >
find_non_monotone( const functor_expr& e, const std::vector< eval_map >& family, const std::vector< bit_value >& values )
{
    for ( const auto& a : values )
        for ( const auto& b : values )
        {
            if ( !lifted_order_leq( e, a, b ) )
                continue;
            for ( const auto& m : family )
                if ( eval_lambda( m.steps, e, a ) && !eval_lambda( m.steps, e, b ) )
                    return std::pair{ m.name, std::pair{ a, b } };
        }
    return std::nullopt;
}

/// Enumerates F2 with distribution weights on the grid 1/denominator; stops
/// (returns nullopt) when more than `cap` values would be produced.
inline std::optional< std::vector< bit_value > > enumerate_bit_values( const functor_expr& e, int denominator,
                                                                       std::size_t cap, const lambda_context& ctx = {} )
{
    using list = std::vector< bit_value >;
    auto rec = [ & ]( auto&& self, const functor_expr& f ) -> std::optional< list > {
        list out;
        switch ( f.kind )
        {
        case functor_kind::identity:
            return list{ bit_value::of_atom( false ), bit_value::of_atom( true ) };
        case functor_kind::const_one:
            return list{ bit_value::unit() };
        case functor_kind::const_real:
            for ( const auto& q : ctx.reals )
                out.push_back( bit_value::of_real( q ) );
            if ( out.empty() )
                out.push_back( bit_value::of_real( 0 ) );
            return out;
        case functor_kind::const_labels:
            for ( const auto& l : f.labels )
                out.push_back( bit_value::of_label( l ) );
            return out;
        case functor_kind::product:
        case functor_kind::coproduct:
        {
            auto l = self( self, *f.left );
            auto r = self( self, *f.right );
            if ( !l || !r )
                return std::nullopt;
            if ( f.kind == functor_kind::product )
            {
                if ( l->size() * r->size() > cap )
                    return std::nullopt;
                for ( const auto& a : *l )
                    for ( const auto& b : *r )
                        out.push_back( bit_value::pair_of( a, b ) );
            }
            else
            {
                for ( const auto& a : *l )
                    out.push_back( bit_value::inl( a ) );
                for ( const auto& b : *r )
                    out.push_back( bit_value::inr( b ) );
            }
            break;
        }
        case functor_kind::pow:
        {
            auto in = self( self, *f.left );
            if ( !in || in->size() > 20 || ( std::size_t( 1 ) << in->size() ) > cap )
                return std::nullopt;
            for ( std::size_t mask = 0; mask < ( std::size_t( 1 ) << in->size() ); ++mask )
            {
                list elems;
                for ( std::size_t k = 0; k < in->size(); ++k )
                    if ( mask >> k & 1 )
                        elems.push_back( ( *in )[ k ] );
                out.push_back( bit_value::set_of( std::move( elems ) ) );
            }
            break;
        }
        case functor_kind::dist:
        {
            auto in = self( self, *f.left );
            if ( !in )
                return std::nullopt;
            // weight vectors (k_1..k_n) with Σk = denominator, k_i >= 0
            std::vector< int > k( in->size(), 0 );
            auto emit = [ & ]() {
                std::vector< std::pair< bit_value, Rational > > sup;
                for ( std::size_t j = 0; j < k.size(); ++j )
                    if ( k[ j ] > 0 )
                        sup.emplace_back( ( *in )[ j ], make_rational( k[ j ], denominator ) );
                out.push_back( bit_value::dist_of( std::move( sup ) ) );
            };
            auto fill = [ & ]( auto&& again, std::size_t j, int left ) -> bool {
                if ( j + 1 == k.size() )
                {
                    k[ j ] = left;
                    emit();
                    return out.size() <= cap;
                }
                for ( int c = 0; c <= left; ++c )
                {
                    k[ j ] = c;
                    if ( !again( again, j + 1, left - c ) )
                        return false;
                }
                return true;
            };
            if ( !in->empty() && !fill( fill, 0, denominator ) )
                return std::nullopt;
            break;
        }
        }
        if ( out.size() > cap )
            return std::nullopt;
        for ( auto& v : out )
            normalize( v );
        return out;
    };
    return rec( rec, e );
}

} // namespace coalg
