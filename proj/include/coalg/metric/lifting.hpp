#pragma once

#include "../evaluation_maps.hpp"
#include "../lp.hpp"
#include "../system.hpp"
#include "../transport.hpp"
#include "pmetric.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace coalg
{

/// F̃_γ f(t) as an expression in the unknown predicate f: constants, f(x), sup
/// and expectation nodes.
struct lift_node
{
    enum class kind
    {
        constant,
        var,
        sup,
        exp,
    } k = kind::constant;
    Rational c;
    state_id x = 0;
    std::vector< lift_node > kids;
    std::vector< Rational > w; // exp only

    static lift_node constant( Rational v ) { return { kind::constant, std::move( v ), 0, {}, {} }; }
    static lift_node var( state_id s ) { return { kind::var, 0, s, {}, {} }; }
};

class lift_refused : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

namespace detail
{

inline lift_node fold( lift_node n )
{
    if ( n.k != lift_node::kind::sup && n.k != lift_node::kind::exp )
        return n;
    for ( const auto& c : n.kids )
        if ( c.k != lift_node::kind::constant )
            return n;
    Rational v = 0;
    for ( std::size_t i = 0; i < n.kids.size(); ++i )
        v = n.k == lift_node::kind::sup ? rmax( v, n.kids[ i ].c ) : Rational( v + n.w[ i ] * n.kids[ i ].c );
    return lift_node::constant( v );
}

inline lift_node build_lift_at( const map_path& p, std::size_t i, const functor_expr& e, const state_value& t,
                                const Rational& top )
{
    if ( i >= p.size() )
        throw path_mismatch( "evaluation map path ended early" );
    const auto& s = p[ i ];
    switch ( s.kind )
    {
    case step_kind::identity:
        if ( t.kind != value_kind::atom )
            mismatch( s, "expected a state" );
        return lift_node::var( t.atom );
    case step_kind::real_value:
        if ( t.kind != value_kind::real )
            mismatch( s, "expected a real" );
        return lift_node::constant( t.real );
    case step_kind::constant_top:
        return lift_node::constant( top );
    case step_kind::label_is:
        if ( t.kind != value_kind::label )
            mismatch( s, "expected a label" );
        return lift_node::constant( t.label == s.label ? top : Rational( 0 ) );
    case step_kind::sup:
    case step_kind::expect:
    {
        const bool sup = s.kind == step_kind::sup;
        if ( e.kind != ( sup ? functor_kind::pow : functor_kind::dist ) ||
             t.kind != ( sup ? value_kind::set : value_kind::dist ) )
            mismatch( s, sup ? "expected a set" : "expected a distribution" );
        lift_node n;
        n.k = sup ? lift_node::kind::sup : lift_node::kind::exp;
        for ( std::size_t k = 0; k < t.items.size(); ++k )
        {
            n.kids.push_back( build_lift_at( p, i + 1, *e.left, t.items[ k ], top ) );
            if ( !sup )
                n.w.push_back( t.weights[ k ] );
        }
        return fold( std::move( n ) );
    }
    case step_kind::select_left:
    case step_kind::select_right:
    {
        if ( e.kind != functor_kind::product || t.kind != value_kind::pair )
            mismatch( s, "expected a pair" );
        const bool left = s.kind == step_kind::select_left;
        return build_lift_at( p, i + 1, left ? *e.left : *e.right, t.items[ left ? 0 : 1 ], top );
    }
    case step_kind::guard:
    {
        auto [ lab, rest ] = split_labelled( e, t, s );
        if ( lab->label != s.label )
            return lift_node::constant( 0 );
        return build_lift_at( p, i + 1, carried_expr( e ), *rest, top );
    }
    case step_kind::carry_left:
    case step_kind::carry_right:
    {
        if ( e.kind != functor_kind::coproduct )
            mismatch( s, "expected a coproduct" );
        const bool left = s.kind == step_kind::carry_left;
        if ( t.kind != ( left ? value_kind::inl : value_kind::inr ) )
            return lift_node::constant( 0 );
        return build_lift_at( p, i + 1, left ? *e.left : *e.right, t.items[ 0 ], top );
    }
    default:
        mismatch( s, "not a metric evaluation-map step" );
    }
}

inline void collect_vars( const lift_node& n, std::set< state_id >& out )
{
    if ( n.k == lift_node::kind::var )
        out.insert( n.x );
    for ( const auto& c : n.kids )
        collect_vars( c, out );
}

/// The node as a distribution over states and ★ (a point where f is 0), when it
/// is a state, the constant 0 or an expectation of those.
inline std::optional< std::vector< point_mass > > as_distribution( const lift_node& n, std::size_t star )
{
    std::map< std::size_t, Rational > mass;
    auto leaf = [ & ]( const lift_node& c, const Rational& w ) {
        if ( c.k == lift_node::kind::var )
            mass[ c.x ] += w;
        else if ( c.k == lift_node::kind::constant && c.c == 0 )
            mass[ star ] += w;
        else
            return false;
        return true;
    };
    if ( n.k == lift_node::kind::exp )
    {
        for ( std::size_t i = 0; i < n.kids.size(); ++i )
            if ( !leaf( n.kids[ i ], n.w[ i ] ) )
                return std::nullopt;
    }
    else if ( !leaf( n, 1 ) )
        return std::nullopt;
    return std::vector< point_mass >( mass.begin(), mass.end() );
}

/// The node as a finite set of states under sup (the constant 0 is the empty set).
inline std::optional< std::vector< state_id > > as_set( const lift_node& n )
{
    std::set< state_id > out;
    auto leaf = [ & ]( const lift_node& c ) {
        if ( c.k == lift_node::kind::var )
            out.insert( c.x );
        else if ( !( c.k == lift_node::kind::constant && c.c == 0 ) )
            return false;
        return true;
    };
    if ( n.k == lift_node::kind::sup )
    {
        for ( const auto& c : n.kids )
            if ( !leaf( c ) )
                return std::nullopt;
    }
    else if ( !leaf( n ) )
        return std::nullopt;
    return std::vector< state_id >( out.begin(), out.end() );
}

/// One direction of the lifting: max over nonexpansive f of E1(f) - E2(f).
struct directed_lift
{
    Rational value;
    std::vector< state_id > domain;
    std::vector< Rational > f; // on domain
    const char* method = "";
};

struct linear_form
{
    Rational c0;
    std::map< std::size_t, Rational > coef; // variable index -> coefficient
};

inline void add_scaled( linear_form& acc, const linear_form& x, const Rational& w )
{
    acc.c0 += w * x.c0;
    for ( const auto& [ k, v ] : x.coef )
        acc.coef[ k ] += w * v;
}

/// Every linear form obtained by fixing one child at each reachable sup node.
inline std::vector< linear_form > selections( const lift_node& n, const std::map< state_id, std::size_t >& var_of,
                                              std::size_t cap )
{
    switch ( n.k )
    {
    case lift_node::kind::constant:
        return { linear_form{ n.c, {} } };
    case lift_node::kind::var:
        return { linear_form{ 0, { { var_of.at( n.x ), Rational( 1 ) } } } };
    case lift_node::kind::sup:
    {
        std::vector< linear_form > out;
        for ( const auto& c : n.kids )
        {
            auto s = selections( c, var_of, cap );
            out.insert( out.end(), s.begin(), s.end() );
            if ( out.size() > cap )
                throw lift_refused( "lifting needs more than " + std::to_string( cap ) + " linear programs" );
        }
        return out;
    }
    case lift_node::kind::exp:
    {
        std::vector< linear_form > acc{ linear_form{} };
        for ( std::size_t i = 0; i < n.kids.size(); ++i )
        {
            auto s = selections( n.kids[ i ], var_of, cap );
            if ( acc.size() * s.size() > cap )
                throw lift_refused( "lifting needs more than " + std::to_string( cap ) + " linear programs" );
            std::vector< linear_form > next;
            for ( const auto& a : acc )
                for ( const auto& b : s )
                {
                    auto c = a;
                    add_scaled( c, b, n.w[ i ] );
                    next.push_back( std::move( c ) );
                }
            acc = std::move( next );
        }
        return acc;
    }
    }
    return {};
}

/// Linear upper description of E2: each sup node becomes a fresh variable z with
/// z >= every child; minimizing pushes z down to the max.
inline linear_form upper_form( const lift_node& n, const std::map< state_id, std::size_t >& var_of, std::size_t& next_var,
                               std::vector< linear_form >& le_zero )
{
    switch ( n.k )
    {
    case lift_node::kind::constant:
        return { n.c, {} };
    case lift_node::kind::var:
        return { 0, { { var_of.at( n.x ), Rational( 1 ) } } };
    case lift_node::kind::exp:
    {
        linear_form acc;
        for ( std::size_t i = 0; i < n.kids.size(); ++i )
            add_scaled( acc, upper_form( n.kids[ i ], var_of, next_var, le_zero ), n.w[ i ] );
        return acc;
    }
    case lift_node::kind::sup:
    {
        const auto z = next_var++;
        for ( const auto& c : n.kids )
        {
            auto g = upper_form( c, var_of, next_var, le_zero );
            g.coef[ z ] -= 1; // child - z <= 0
            le_zero.push_back( std::move( g ) );
        }
        return { 0, { { z, Rational( 1 ) } } };
    }
    }
    return {};
}

inline directed_lift directed_by_lp( const lift_node& e1, const lift_node& e2, const pmetric& d, std::size_t cap )
{
    std::set< state_id > vars;
    collect_vars( e1, vars );
    collect_vars( e2, vars );
    directed_lift r;
    r.method = "lp";
    r.domain.assign( vars.begin(), vars.end() );
    std::map< state_id, std::size_t > var_of;
    for ( std::size_t k = 0; k < r.domain.size(); ++k )
        var_of[ r.domain[ k ] ] = k;
    const auto m = r.domain.size();

    std::size_t nvar = m;
    std::vector< linear_form > le_zero;
    const auto upper = upper_form( e2, var_of, nvar, le_zero );
    const auto forms = selections( e1, var_of, cap );

    std::vector< std::vector< Rational > > A;
    std::vector< Rational > b;
    auto row = [ & ]() -> std::vector< Rational >& {
        A.emplace_back( nvar, Rational( 0 ) );
        return A.back();
    };
    for ( std::size_t u = 0; u < m; ++u )
    {
        auto& r0 = row();
        r0[ u ] = 1;
        b.push_back( d.top );
        for ( std::size_t v = 0; v < m; ++v )
            if ( u != v )
            {
                auto& r1 = row();
                r1[ u ] = 1;
                r1[ v ] = -1;
                b.push_back( d.d[ r.domain[ u ] ][ r.domain[ v ] ] );
            }
    }
    for ( const auto& g : le_zero )
    {
        auto& r2 = row();
        for ( const auto& [ k, v ] : g.coef )
            r2[ k ] = v;
        b.push_back( -g.c0 );
    }

    bool have = false;
    for ( const auto& form : forms )
    {
        std::vector< Rational > c( nvar, Rational( 0 ) );
        for ( const auto& [ k, v ] : form.coef )
            c[ k ] += v;
        for ( const auto& [ k, v ] : upper.coef )
            c[ k ] -= v;
        auto res = solve_lp( A, b, c );
        if ( res.status != lp_status::optimal )
            throw std::logic_error( "lifting LP is not bounded and feasible" );
        Rational val = res.value + form.c0 - upper.c0;
        if ( !have || val > r.value )
        {
            have = true;
            r.value = val;
            r.f.assign( res.x.begin(), res.x.begin() + static_cast< std::ptrdiff_t >( m ) );
        }
    }
    return r;
}

inline directed_lift directed( const lift_node& e1, const lift_node& e2, const pmetric& d, std::size_t cap )
{
    const auto n = d.size();
    const auto star = n;
    if ( auto s1 = as_set( e1 ), s2 = as_set( e2 ); s1 && s2 )
    {
        // directed Hausdorff; witness f(z) = distance from z to the second set
        directed_lift r;
        r.method = "hausdorff";
        std::vector< Rational > dist_to( n, d.top );
        for ( state_id z = 0; z < n; ++z )
            for ( auto b : *s2 )
                dist_to[ z ] = rmin( dist_to[ z ], d.d[ z ][ b ] );
        r.value = 0;
        for ( auto a : *s1 )
            r.value = rmax( r.value, dist_to[ a ] );
        for ( state_id z = 0; z < n; ++z )
        {
            r.domain.push_back( z );
            r.f.push_back( dist_to[ z ] );
        }
        return r;
    }
    if ( auto p = as_distribution( e1, star ), q = as_distribution( e2, star ); p && q )
    {
        directed_lift r;
        r.method = "wasserstein";
        const ground_cost cost = [ & ]( std::size_t a, std::size_t b ) -> Rational {
            if ( a == b )
                return 0;
            if ( b == star )
                return d.top;
            if ( a == star )
                return 0;
            return d.d[ a ][ b ];
        };
        auto w = wasserstein1( *p, *q, cost, { star } );
        r.value = w.value;
        Rational at_star = 0;
        for ( std::size_t k = 0; k < w.domain.size(); ++k )
            if ( w.domain[ k ] == star )
                at_star = w.potential[ k ];
        for ( std::size_t k = 0; k < w.domain.size(); ++k )
            if ( w.domain[ k ] != star )
            {
                r.domain.push_back( w.domain[ k ] );
                r.f.push_back( w.potential[ k ] - at_star );
            }
        return r;
    }
    return directed_by_lp( e1, e2, d, cap );
}

inline Rational eval_node( const lift_node& n, const PredicateR& f )
{
    switch ( n.k )
    {
    case lift_node::kind::constant:
        return n.c;
    case lift_node::kind::var:
        return f[ n.x ];
    case lift_node::kind::sup:
    {
        Rational v = 0;
        for ( const auto& c : n.kids )
            v = rmax( v, eval_node( c, f ) );
        return v;
    }
    case lift_node::kind::exp:
    {
        Rational v = 0;
        for ( std::size_t i = 0; i < n.kids.size(); ++i )
            v += n.w[ i ] * eval_node( n.kids[ i ], f );
        return v;
    }
    }
    return 0;
}

} // namespace detail

/// F̃_γ f(t) symbolically in f.
inline lift_node build_lift_expr( const map_path& p, const functor_expr& e, const state_value& t, const Rational& top )
{
    return detail::build_lift_at( p, 0, e, t, top );
}

/// The lifting for one γ: value = c · sup_f |F̃_γ f(t1) - F̃_γ f(t2)| over
/// nonexpansive f: X → [0,⊤], with an attaining f.
struct gamma_lift
{
    std::string gamma;
    Rational value;
    PredicateR witness;
    bool forward = true; // F̃_γ f(t1) >= F̃_γ f(t2)
    std::string method;
};

struct lift_result
{
    Rational value;
    std::vector< gamma_lift > per_gamma;
    std::optional< std::size_t > best; // index into per_gamma
};

struct lift_options
{
    Rational discount = 1;
    std::size_t lp_cap = 20000;
};

inline gamma_lift lift_gamma( const System& sys, const eval_map& g, const pmetric& d, const state_value& t1,
                              const state_value& t2, const lift_options& opt = {} )
{
    const auto e1 = build_lift_expr( g.steps, *sys.expr, t1, d.top );
    const auto e2 = build_lift_expr( g.steps, *sys.expr, t2, d.top );
    gamma_lift r;
    r.gamma = g.name;
    if ( e1.k == lift_node::kind::constant && e2.k == lift_node::kind::constant )
    {
        r.value = rabs( e1.c - e2.c ) * opt.discount;
        r.forward = e1.c >= e2.c;
        r.witness.assign( d.size(), Rational( 0 ) );
        r.method = "constant";
        return r;
    }
    auto fw = detail::directed( e1, e2, d, opt.lp_cap );
    auto bw = detail::directed( e2, e1, d, opt.lp_cap );
    r.forward = fw.value >= bw.value;
    auto& best = r.forward ? fw : bw;
    r.value = rmax( best.value, Rational( 0 ) ) * opt.discount;
    r.method = best.method;
    r.witness = extend_nonexpansive( best.domain, best.f, d );
    return r;
}

/// d^{↑Γ}(t1, t2): the maximum over the generated γ of the per-γ lifting.
inline lift_result lift_distance( const System& sys, const std::vector< eval_map >& gammas, const pmetric& d,
                                  const state_value& t1, const state_value& t2, const lift_options& opt = {} )
{
    lift_result r;
    r.value = 0;
    for ( const auto& g : gammas )
    {
        r.per_gamma.push_back( lift_gamma( sys, g, d, t1, t2, opt ) );
        if ( !r.best || r.per_gamma.back().value > r.per_gamma[ *r.best ].value )
            r.best = r.per_gamma.size() - 1;
    }
    if ( r.best )
        r.value = r.per_gamma[ *r.best ].value;
    return r;
}

inline lift_result lift_distance( const System& sys, const pmetric& d, const state_value& t1, const state_value& t2,
                                  const lift_options& opt = {} )
{
    return lift_distance( sys, gammas_of( sys ), d, t1, t2, opt );
}

/// Enclosure of the lifting by brute force over grid-valued f.
struct lift_interval
{
    Rational lo;
    Rational hi;
    std::size_t candidates = 0;

    [[nodiscard]] bool contains( const Rational& v ) const { return lo <= v && v <= hi; }
};

/// lo: best grid f that is nonexpansive. hi: best grid g with |g(u) - g(v)| <=
/// d(u,v) + h, plus h; rounding any nonexpansive f to the nearest grid point gives
/// such a g and moves each γ-difference by at most h.
inline lift_interval lift_distance_oracle( const System& sys, const std::vector< eval_map >& gammas, const pmetric& d,
                                           const state_value& t1, const state_value& t2, const Rational& grid,
                                           std::size_t max_states = 4 )
{
    if ( sys.size() > max_states )
        throw lift_refused( "oracle enumerates at most " + std::to_string( max_states ) + " states, system has " +
                            std::to_string( sys.size() ) );
    const Rational steps_q = d.top / grid;
    if ( grid <= 0 || steps_q.get_den() != 1 )
        throw std::invalid_argument( "grid step must divide top" );
    const auto steps = steps_q.get_num().get_ui();

    std::vector< state_id > support;
    collect_atoms( t1, support );
    collect_atoms( t2, support );
    std::sort( support.begin(), support.end() );
    support.erase( std::unique( support.begin(), support.end() ), support.end() );

    lift_interval out;
    out.lo = 0;
    Rational relaxed = 0;
    PredicateR f( sys.size(), Rational( 0 ) );
    std::vector< unsigned long > idx( support.size(), 0 );
    while ( true )
    {
        for ( std::size_t k = 0; k < support.size(); ++k )
            f[ support[ k ] ] = grid * idx[ k ];
        bool strict = true, loose = true;
        for ( std::size_t a = 0; a < support.size() && loose; ++a )
            for ( std::size_t b = 0; b < support.size(); ++b )
            {
                const Rational gap = f[ support[ a ] ] - f[ support[ b ] ];
                const auto& dd = d.d[ support[ a ] ][ support[ b ] ];
                if ( gap > dd )
                    strict = false;
                if ( gap > dd + grid )
                {
                    loose = false;
                    break;
                }
            }
        if ( loose )
        {
            ++out.candidates;
            auto fm = [ & ]( state_id s ) { return f[ s ]; };
            const auto v1 = apply_map( fm, *sys.expr, t1 );
            const auto v2 = apply_map( fm, *sys.expr, t2 );
            Rational best = 0;
            for ( const auto& g : gammas )
                best = rmax( best, rabs( eval_gamma( g.steps, *sys.expr, v1, d.top ) -
                                         eval_gamma( g.steps, *sys.expr, v2, d.top ) ) );
            relaxed = rmax( relaxed, best );
            if ( strict )
                out.lo = rmax( out.lo, best );
        }
        std::size_t k = 0;
        while ( k < idx.size() && idx[ k ] == steps )
            idx[ k++ ] = 0;
        if ( k == idx.size() )
            break;
        ++idx[ k ];
    }
    out.hi = rmin( d.top, relaxed + grid );
    return out;
}

inline lift_interval lift_distance_oracle( const System& sys, const pmetric& d, const state_value& t1,
                                           const state_value& t2, const Rational& grid )
{
    return lift_distance_oracle( sys, gammas_of( sys ), d, t1, t2, grid );
}

} // namespace coalg
