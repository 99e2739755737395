#pragma once

#include "functor.hpp"
#include "rational.hpp"

#include <algorithm>
#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coalg
{

using state_id = std::size_t;

enum class value_kind
{
    atom,  // StateRef over X, or a point of 2 / [0,⊤] after mapping
    real,  // element of a Real(top) constant
    unit,  // the element of One
    label, // element of Labels{...}
    set,
    dist,
    pair,
    inl,
    inr,
};

inline std::strong_ordering compare_atoms( std::size_t a, std::size_t b ) { return a <=> b; }
inline std::strong_ordering compare_atoms( bool a, bool b ) { return a <=> b; }
inline std::strong_ordering compare_atoms( const Rational& a, const Rational& b ) { return compare( a, b ); }

/// An element of F(A), shaped like the governing functor_expr. Sets are kept
/// sorted and duplicate-free; distributions sorted by support element with
/// merged weights (see normalize()).
template < class Atom >
class fvalue
{
public:
    value_kind kind = value_kind::unit;
    Atom atom{};
    Rational real;
    std::string label;
    std::vector< fvalue > items;     // set elements, dist support, pair (2), inl/inr (1)
    std::vector< Rational > weights; // dist only, parallel to items

    static fvalue of_atom( Atom a )
    {
        fvalue v;
        v.kind = value_kind::atom;
        v.atom = std::move( a );
        return v;
    }
    static fvalue of_real( Rational r )
    {
        fvalue v;
        v.kind = value_kind::real;
        v.real = std::move( r );
        return v;
    }
    static fvalue unit() { return fvalue{}; }
    static fvalue of_label( std::string l )
    {
        fvalue v;
        v.kind = value_kind::label;
        v.label = std::move( l );
        return v;
    }
    static fvalue set_of( std::vector< fvalue > elems )
    {
        fvalue v;
        v.kind = value_kind::set;
        v.items = std::move( elems );
        return v;
    }
    static fvalue dist_of( std::vector< std::pair< fvalue, Rational > > support )
    {
        fvalue v;
        v.kind = value_kind::dist;
        for ( auto& [ e, w ] : support )
        {
            v.items.push_back( std::move( e ) );
            v.weights.push_back( std::move( w ) );
        }
        return v;
    }
    static fvalue pair_of( fvalue a, fvalue b )
    {
        fvalue v;
        v.kind = value_kind::pair;
        v.items.push_back( std::move( a ) );
        v.items.push_back( std::move( b ) );
        return v;
    }
    static fvalue inl( fvalue a ) { return injection( value_kind::inl, std::move( a ) ); }
    static fvalue inr( fvalue a ) { return injection( value_kind::inr, std::move( a ) ); }

    [[nodiscard]] const fvalue& first() const { return items.at( 0 ); }
    [[nodiscard]] const fvalue& second() const { return items.at( 1 ); }
    [[nodiscard]] const fvalue& injected() const { return items.at( 0 ); }

    friend std::strong_ordering operator<=>( const fvalue& a, const fvalue& b ) { return compare_values( a, b ); }
    friend bool operator==( const fvalue& a, const fvalue& b ) { return compare_values( a, b ) == 0; }

private:
    static fvalue injection( value_kind k, fvalue a )
    {
        fvalue v;
        v.kind = k;
        v.items.push_back( std::move( a ) );
        return v;
    }

    static std::strong_ordering compare_values( const fvalue& a, const fvalue& b )
    {
        if ( a.kind != b.kind )
            return static_cast< int >( a.kind ) <=> static_cast< int >( b.kind );
        switch ( a.kind )
        {
        case value_kind::atom:
            return compare_atoms( a.atom, b.atom );
        case value_kind::real:
            return compare( a.real, b.real );
        case value_kind::unit:
            return std::strong_ordering::equal;
        case value_kind::label:
            return a.label <=> b.label;
        default:
            break;
        }
        const auto n = std::min( a.items.size(), b.items.size() );
        for ( std::size_t i = 0; i < n; ++i )
        {
            if ( auto c = compare_values( a.items[ i ], b.items[ i ] ); c != 0 )
                return c;
            if ( a.kind == value_kind::dist )
                if ( auto c = compare( a.weights[ i ], b.weights[ i ] ); c != 0 )
                    return c;
        }
        return a.items.size() <=> b.items.size();
    }
};

using state_value = fvalue< state_id >;
using bit_value = fvalue< bool >;
using real_value = fvalue< Rational >;

/// Sorts and deduplicates sets, merges equal distribution keys (summing
/// weights), recursively. Returns the number of duplicate set elements removed.
template < class Atom >
std::size_t normalize( fvalue< Atom >& v )
{
    std::size_t dropped = 0;
    for ( auto& c : v.items )
        dropped += normalize( c );
    if ( v.kind == value_kind::set )
    {
        std::sort( v.items.begin(), v.items.end() );
        const auto before = v.items.size();
        v.items.erase( std::unique( v.items.begin(), v.items.end() ), v.items.end() );
        dropped += before - v.items.size();
    }
    else if ( v.kind == value_kind::dist )
    {
        std::vector< std::size_t > order( v.items.size() );
        for ( std::size_t i = 0; i < order.size(); ++i )
            order[ i ] = i;
        std::stable_sort( order.begin(), order.end(),
                          [ & ]( std::size_t a, std::size_t b ) { return v.items[ a ] < v.items[ b ]; } );
        std::vector< fvalue< Atom > > keys;
        std::vector< Rational > weights;
        for ( auto i : order )
        {
            if ( !keys.empty() && keys.back() == v.items[ i ] )
                weights.back() += v.weights[ i ];
            else
            {
                keys.push_back( std::move( v.items[ i ] ) );
                weights.push_back( v.weights[ i ] );
            }
        }
        v.items = std::move( keys );
        v.weights = std::move( weights );
    }
    return dropped;
}

class shape_error : public std::invalid_argument
{
public:
    shape_error( const std::string& path, const std::string& what )
        : std::invalid_argument( "at " + ( path.empty() ? std::string( "/" ) : path ) + ": " + what ), _path( path )
    {}

    [[nodiscard]] const std::string& path() const { return _path; }

private:
    std::string _path;
};

struct validation_options
{
    Rational top = 1;
    bool require_normalized = true;
};

/// Checks that v is an element of F(A) for the given functor. `atom_ok` vets each
/// atom leaf (state membership, {0,1} range, [0,⊤] range) and returns an error
/// message or an empty string.
template < class Atom >
std::optional< shape_error > validate( const functor_expr& f, const fvalue< Atom >& v,
                                       const std::function< std::string( const Atom& ) >& atom_ok,
                                       const validation_options& opts = {}, const std::string& path = "" )
{
    auto err = [ & ]( const std::string& what ) { return std::optional< shape_error >( shape_error( path, what ) ); };
    switch ( f.kind )
    {
    case functor_kind::identity:
        if ( v.kind != value_kind::atom )
            return err( "expected a state" );
        if ( auto m = atom_ok( v.atom ); !m.empty() )
            return err( m );
        return std::nullopt;
    case functor_kind::const_real:
        if ( v.kind != value_kind::real )
            return err( "expected a real" );
        if ( v.real < 0 || v.real > f.top )
            return err( "real " + to_string( v.real ) + " outside [0," + to_string( f.top ) + "]" );
        return std::nullopt;
    case functor_kind::const_one:
        if ( v.kind != value_kind::unit )
            return err( "expected unit" );
        return std::nullopt;
    case functor_kind::const_labels:
        if ( v.kind != value_kind::label )
            return err( "expected a label" );
        if ( !f.has_label( v.label ) )
            return err( "unknown label '" + v.label + "'" );
        return std::nullopt;
    case functor_kind::pow:
        if ( v.kind != value_kind::set )
            return err( "expected a set" );
        for ( std::size_t i = 0; i < v.items.size(); ++i )
        {
            if ( auto e = validate( *f.left, v.items[ i ], atom_ok, opts, path + "/set[" + std::to_string( i ) + "]" ) )
                return e;
            if ( opts.require_normalized && i > 0 && !( v.items[ i - 1 ] < v.items[ i ] ) )
                return err( "set elements are not pairwise distinct" );
        }
        return std::nullopt;
    case functor_kind::dist:
    {
        if ( v.kind != value_kind::dist )
            return err( "expected a distribution" );
        if ( v.items.empty() )
            return err( "empty distribution" );
        Rational total = 0;
        for ( std::size_t i = 0; i < v.items.size(); ++i )
        {
            const auto sub = path + "/dist[" + std::to_string( i ) + "]";
            if ( v.weights[ i ] <= 0 )
                return std::optional< shape_error >( shape_error( sub, "weight must be positive" ) );
            total += v.weights[ i ];
            if ( auto e = validate( *f.left, v.items[ i ], atom_ok, opts, sub ) )
                return e;
            if ( opts.require_normalized && i > 0 && !( v.items[ i - 1 ] < v.items[ i ] ) )
                return err( "distribution support is not duplicate-free" );
        }
        if ( total != 1 )
            return err( "weights sum to " + to_string( total ) + " ≠ 1" );
        return std::nullopt;
    }
    case functor_kind::product:
        if ( v.kind != value_kind::pair )
            return err( "expected a pair" );
        if ( auto e = validate( *f.left, v.items[ 0 ], atom_ok, opts, path + "/fst" ) )
            return e;
        return validate( *f.right, v.items[ 1 ], atom_ok, opts, path + "/snd" );
    case functor_kind::coproduct:
        if ( v.kind == value_kind::inl )
            return validate( *f.left, v.items[ 0 ], atom_ok, opts, path + "/inl" );
        if ( v.kind == value_kind::inr )
            return validate( *f.right, v.items[ 0 ], atom_ok, opts, path + "/inr" );
        return err( "expected inl or inr" );
    }
    return err( "unknown functor node" );
}

/// Functorial action Ff: replaces every atom a by f(a) and renormalizes (equal
/// images merge in distributions and collapse in sets).
template < class From, class Map >
auto apply_map( const Map& f, const functor_expr& expr, const fvalue< From >& t, const std::string& path = "" )
    -> fvalue< std::decay_t< std::invoke_result_t< const Map&, const From& > > >
{
    using To = std::decay_t< std::invoke_result_t< const Map&, const From& > >;
    auto mismatch = [ & ]( const char* what ) { return shape_error( path, what ); };
    fvalue< To > out;
    out.kind = t.kind;
    switch ( expr.kind )
    {
    case functor_kind::identity:
        if ( t.kind != value_kind::atom )
            throw mismatch( "expected a state" );
        out.atom = f( t.atom );
        return out;
    case functor_kind::const_real:
        if ( t.kind != value_kind::real )
            throw mismatch( "expected a real" );
        out.real = t.real;
        return out;
    case functor_kind::const_one:
        if ( t.kind != value_kind::unit )
            throw mismatch( "expected unit" );
        return out;
    case functor_kind::const_labels:
        if ( t.kind != value_kind::label )
            throw mismatch( "expected a label" );
        out.label = t.label;
        return out;
    case functor_kind::pow:
    case functor_kind::dist:
        if ( t.kind != ( expr.kind == functor_kind::pow ? value_kind::set : value_kind::dist ) )
            throw mismatch( expr.kind == functor_kind::pow ? "expected a set" : "expected a distribution" );
        out.items.reserve( t.items.size() );
        for ( std::size_t i = 0; i < t.items.size(); ++i )
            out.items.push_back( apply_map( f, *expr.left, t.items[ i ], path + "/" + std::to_string( i ) ) );
        out.weights = t.weights;
        normalize( out );
        return out;
    case functor_kind::product:
        if ( t.kind != value_kind::pair )
            throw mismatch( "expected a pair" );
        out.items.push_back( apply_map( f, *expr.left, t.items[ 0 ], path + "/fst" ) );
        out.items.push_back( apply_map( f, *expr.right, t.items[ 1 ], path + "/snd" ) );
        return out;
    case functor_kind::coproduct:
        if ( t.kind == value_kind::inl )
            out.items.push_back( apply_map( f, *expr.left, t.items[ 0 ], path + "/inl" ) );
        else if ( t.kind == value_kind::inr )
            out.items.push_back( apply_map( f, *expr.right, t.items[ 0 ], path + "/inr" ) );
        else
            throw mismatch( "expected inl or inr" );
        return out;
    }
    throw mismatch( "unknown functor node" );
}

/// Collects every atom occurring in v (with repetition, in tree order).
template < class Atom >
void collect_atoms( const fvalue< Atom >& v, std::vector< Atom >& out )
{
    if ( v.kind == value_kind::atom )
        out.push_back( v.atom );
    for ( const auto& c : v.items )
        collect_atoms( c, out );
}

} // namespace coalg
