#pragma once

#include "rational.hpp"

#include <algorithm>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace coalg
{

enum class functor_kind
{
    identity,
    const_real,   // [0, top]
    const_one,    // 1 = {unit}
    const_labels, // finite label alphabet
    pow,          // finite powerset
    dist,         // finitely supported distributions
    product,
    coproduct,
};

class functor_expr;
using functor_ptr = std::shared_ptr< const functor_expr >;

/// Syntax tree of a branching type F. Nodes are immutable and shared.
class functor_expr
{
public:
    functor_kind kind = functor_kind::identity;
    Rational top;                    // const_real only
    std::vector< std::string > labels; // const_labels only, declaration order
    functor_ptr left;                // pow/dist inner, product/coproduct left
    functor_ptr right;               // product/coproduct right

    [[nodiscard]] const functor_expr& inner() const { return *left; }

    static functor_ptr identity() { return make( functor_kind::identity ); }
    static functor_ptr one() { return make( functor_kind::const_one ); }

    static functor_ptr real( Rational top )
    {
        if ( top <= 0 )
            throw std::invalid_argument( "Real(top=...) requires top > 0" );
        auto f = std::make_shared< functor_expr >();
        f->kind = functor_kind::const_real;
        f->top = std::move( top );
        return f;
    }

    static functor_ptr label_set( std::vector< std::string > labels )
    {
        if ( labels.empty() )
            throw std::invalid_argument( "Labels{...} must not be empty" );
        auto sorted = labels;
        std::sort( sorted.begin(), sorted.end() );
        if ( std::adjacent_find( sorted.begin(), sorted.end() ) != sorted.end() )
            throw std::invalid_argument( "Labels{...} contains a duplicate label" );
        auto f = std::make_shared< functor_expr >();
        f->kind = functor_kind::const_labels;
        f->labels = std::move( labels );
        return f;
    }

    static functor_ptr powerset( functor_ptr inner ) { return unary( functor_kind::pow, std::move( inner ) ); }
    static functor_ptr distribution( functor_ptr inner ) { return unary( functor_kind::dist, std::move( inner ) ); }

    static functor_ptr product( functor_ptr l, functor_ptr r )
    {
        return binary( functor_kind::product, std::move( l ), std::move( r ) );
    }

    static functor_ptr coproduct( functor_ptr l, functor_ptr r )
    {
        return binary( functor_kind::coproduct, std::move( l ), std::move( r ) );
    }

    [[nodiscard]] bool has_label( const std::string& l ) const
    {
        return std::find( labels.begin(), labels.end(), l ) != labels.end();
    }

private:
    static functor_ptr make( functor_kind k )
    {
        auto f = std::make_shared< functor_expr >();
        f->kind = k;
        return f;
    }

    static functor_ptr unary( functor_kind k, functor_ptr inner )
    {
        auto f = std::make_shared< functor_expr >();
        f->kind = k;
        f->left = std::move( inner );
        return f;
    }

    static functor_ptr binary( functor_kind k, functor_ptr l, functor_ptr r )
    {
        auto f = std::make_shared< functor_expr >();
        f->kind = k;
        f->left = std::move( l );
        f->right = std::move( r );
        return f;
    }
};

inline bool structurally_equal( const functor_expr& a, const functor_expr& b )
{
    if ( a.kind != b.kind )
        return false;
    switch ( a.kind )
    {
    case functor_kind::identity:
    case functor_kind::const_one:
        return true;
    case functor_kind::const_real:
        return a.top == b.top;
    case functor_kind::const_labels:
        return a.labels == b.labels;
    case functor_kind::pow:
    case functor_kind::dist:
        return structurally_equal( *a.left, *b.left );
    case functor_kind::product:
    case functor_kind::coproduct:
        return structurally_equal( *a.left, *b.left ) && structurally_equal( *a.right, *b.right );
    }
    return false;
}

/// The bound ⊤ shared by every Real(top=...) occurrence; nullopt when there is none.
/// Throws when two occurrences disagree.
inline std::optional< Rational > shared_top( const functor_expr& f )
{
    std::optional< Rational > found;
    auto visit = [ & ]( auto&& self, const functor_expr& e ) -> void {
        if ( e.kind == functor_kind::const_real )
        {
            if ( found && *found != e.top )
                throw std::invalid_argument( "all Real(top=...) occurrences must share the same top" );
            found = e.top;
        }
        if ( e.left )
            self( self, *e.left );
        if ( e.right )
            self( self, *e.right );
    };
    visit( visit, f );
    return found;
}

inline std::string to_string( const functor_expr& f )
{
    switch ( f.kind )
    {
    case functor_kind::identity:
        return "Id";
    case functor_kind::const_one:
        return "One";
    case functor_kind::const_real:
        return "Real(top=" + to_string( f.top ) + ")";
    case functor_kind::const_labels:
    {
        std::string s = "Labels{";
        for ( std::size_t i = 0; i < f.labels.size(); ++i )
            s += ( i ? "," : "" ) + f.labels[ i ];
        return s + "}";
    }
    case functor_kind::pow:
        return "Pow(" + to_string( *f.left ) + ")";
    case functor_kind::dist:
        return "Dist(" + to_string( *f.left ) + ")";
    case functor_kind::product:
    {
        // x binds tighter than +, both associate to the left
        auto side = [ & ]( const functor_expr& c, bool is_right ) {
            const bool wrap = c.kind == functor_kind::coproduct || ( is_right && c.kind == functor_kind::product );
            return wrap ? "(" + to_string( c ) + ")" : to_string( c );
        };
        return side( *f.left, false ) + " x " + side( *f.right, true );
    }
    case functor_kind::coproduct:
    {
        const auto r = to_string( *f.right );
        return to_string( *f.left ) + " + " + ( f.right->kind == functor_kind::coproduct ? "(" + r + ")" : r );
    }
    }
    return {};
}

} // namespace coalg
