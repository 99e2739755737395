#pragma once

#include "functor.hpp"
#include "rational.hpp"
#include "system.hpp"
#include "value.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace coalg
{

/// Any failure to turn source text into a valid System. Carries the 1-based
/// position of the offending token (0 when the error is not positional).
class parse_error : public std::runtime_error
{
public:
    parse_error( std::size_t line, std::size_t column, const std::string& what, std::vector< std::string > expected = {} )
        : std::runtime_error( format( line, column, what, expected ) ), _line( line ), _column( column ),
          _expected( std::move( expected ) )
    {}

    [[nodiscard]] std::size_t line() const { return _line; }
    [[nodiscard]] std::size_t column() const { return _column; }
    [[nodiscard]] const std::vector< std::string >& expected() const { return _expected; }

private:
    static std::string format( std::size_t line, std::size_t column, const std::string& what,
                               const std::vector< std::string >& expected )
    {
        std::string s;
        if ( line > 0 )
            s = "line " + std::to_string( line ) + ", column " + std::to_string( column ) + ": ";
        s += what;
        if ( !expected.empty() )
        {
            s += " (expected ";
            for ( std::size_t i = 0; i < expected.size(); ++i )
                s += ( i ? i + 1 == expected.size() ? " or " : ", " : "" ) + expected[ i ];
            s += ")";
        }
        return s;
    }

    std::size_t _line;
    std::size_t _column;
    std::vector< std::string > _expected;
};

struct parse_options
{
    /// Values for `param` declarations, overriding the defaults in the source.
    std::map< std::string, Rational > params;
    /// Default ⊤ when the source has neither `top:` nor a Real(top=...) node.
    std::optional< Rational > top;
};

struct parse_result
{
    System system;
    std::vector< std::string > warnings;
};

namespace detail
{

enum class token_kind
{
    word,
    symbol,
    end,
};

struct token
{
    token_kind kind = token_kind::end;
    std::string text;
    std::size_t line = 0;
    std::size_t column = 0;

    [[nodiscard]] bool is( std::string_view s ) const { return kind != token_kind::end && text == s; }
    [[nodiscard]] bool is_number() const
    {
        return kind == token_kind::word && !text.empty() &&
               std::all_of( text.begin(), text.end(), []( unsigned char c ) { return std::isdigit( c ); } );
    }
    [[nodiscard]] std::string describe() const
    {
        return kind == token_kind::end ? "end of input" : "'" + text + "'";
    }
};

inline bool word_char( char c ) { return std::isalnum( static_cast< unsigned char >( c ) ) || c == '_' || c == '\''; }

inline std::vector< token > lex( std::string_view src )
{
    std::vector< token > out;
    std::size_t line = 1, col = 1, i = 0;
    auto advance = [ & ]( std::size_t n ) {
        for ( std::size_t k = 0; k < n; ++k, ++i )
        {
            if ( src[ i ] == '\n' )
            {
                ++line;
                col = 1;
            }
            else if ( ( static_cast< unsigned char >( src[ i ] ) & 0xC0 ) != 0x80 )
                ++col;
        }
    };
    while ( i < src.size() )
    {
        const char c = src[ i ];
        if ( std::isspace( static_cast< unsigned char >( c ) ) )
        {
            advance( 1 );
            continue;
        }
        if ( c == '#' )
        {
            while ( i < src.size() && src[ i ] != '\n' )
                advance( 1 );
            continue;
        }
        token t;
        t.line = line;
        t.column = col;
        if ( word_char( c ) )
        {
            std::size_t j = i;
            while ( j < src.size() && word_char( src[ j ] ) )
                ++j;
            t.kind = token_kind::word;
            t.text = std::string( src.substr( i, j - i ) );
            if ( j < src.size() && src[ j ] == '.' && t.is_number() )
                throw parse_error( line, col, "floating-point literal; write rationals as p/q" );
            advance( j - i );
            out.push_back( std::move( t ) );
            continue;
        }
        if ( std::string_view( ":,={}()+-*/" ).find( c ) == std::string_view::npos )
            throw parse_error( line, col, std::string( "unexpected character '" ) + c + "'" );
        t.kind = token_kind::symbol;
        t.text = std::string( 1, c );
        advance( 1 );
        out.push_back( std::move( t ) );
    }
    token end;
    end.line = line;
    end.column = col;
    out.push_back( end );
    return out;
}

/// Untyped value syntax; resolved against the functor afterwards so that bare
/// identifiers can be either states or labels and injections may be implicit.
struct value_ast
{
    enum class kind
    {
        ident,
        dist,
        set,
        pair,
        inl,
        inr,
        unit,
        real,
        label,
    } k = kind::unit;
    std::string text;
    Rational number;
    std::vector< value_ast > items;
    std::vector< Rational > weights;
    std::size_t line = 0, column = 0;
};

inline const std::set< std::string >& keywords()
{
    static const std::set< std::string > k{ "dist", "inl", "inr", "unit", "real", "label" };
    return k;
}

class parser
{
public:
    parser( std::vector< token > toks, const parse_options& opts ) : _t( std::move( toks ) ), _opts( opts ) {}

    parse_result parse_document()
    {
        parse_result res;
        System& sys = res.system;
        if ( accept( "system" ) )
            sys.name = expect_word( "system name" ).text;
        expect( "functor" );
        expect( ":" );
        sys.expr = parse_functor();
        std::optional< Rational > top;
        while ( peek().is( "top" ) || peek().is( "param" ) )
        {
            if ( accept( "top" ) )
            {
                expect( ":" );
                const auto& at = peek();
                top = parse_rat();
                if ( *top <= 0 )
                    throw parse_error( at.line, at.column, "top must be positive" );
            }
            else
            {
                advance();
                const auto& name = expect_word( "parameter name" );
                expect( "=" );
                Rational v = parse_weight();
                if ( auto it = _opts.params.find( name.text ); it != _opts.params.end() )
                    v = it->second;
                _params[ name.text ] = v;
            }
        }
        for ( const auto& [ k, v ] : _opts.params )
            if ( !_params.count( k ) )
                res.warnings.push_back( "parameter '" + k + "' is not declared by the system" );

        expect( "states" );
        expect( ":" );
        std::vector< token > ids{ expect_word( "state id" ) };
        while ( accept( "," ) )
            ids.push_back( expect_word( "state id" ) );
        for ( const auto& id : ids )
        {
            if ( keywords().count( id.text ) )
                throw parse_error( id.line, id.column, "'" + id.text + "' is reserved and cannot name a state" );
            if ( sys.find( id.text ) )
                throw parse_error( id.line, id.column, "state '" + id.text + "' declared twice" );
            sys.states.push_back( id.text );
        }

        std::optional< Rational > functor_top;
        try
        {
            functor_top = shared_top( *sys.expr );
        }
        catch ( const std::invalid_argument& e )
        {
            throw parse_error( 0, 0, e.what() );
        }
        if ( top && functor_top && *top != *functor_top )
            throw parse_error( 0, 0, "top: " + to_string( *top ) + " disagrees with Real(top=" +
                                         to_string( *functor_top ) + ")" );
        sys.top = top ? *top : functor_top ? *functor_top : _opts.top ? *_opts.top : Rational( 1 );

        std::vector< std::optional< state_value > > alpha( sys.size() );
        while ( peek().kind != token_kind::end )
        {
            expect( "alpha" );
            const auto id = expect_word( "state id" );
            auto x = sys.find( id.text );
            if ( !x )
                throw parse_error( id.line, id.column, "unknown state '" + id.text + "'" );
            if ( alpha[ *x ] )
                throw parse_error( id.line, id.column, "alpha " + id.text + " defined twice" );
            expect( "=" );
            const auto ast = parse_value();
            auto v = resolve( *sys.expr, ast, sys );
            if ( const auto dropped = normalize( v ) )
                res.warnings.push_back( "alpha " + id.text + ": " + std::to_string( dropped ) +
                                        " duplicate set element(s) removed" );
            validation_options vo;
            vo.top = sys.top;
            if ( auto e = validate( *sys.expr, v, state_checker( sys ), vo ) )
                throw parse_error( ast.line, ast.column, "alpha " + id.text + ": " + e->what() );
            alpha[ *x ] = std::move( v );
        }
        for ( state_id x = 0; x < sys.size(); ++x )
        {
            if ( !alpha[ x ] )
                throw parse_error( 0, 0, "alpha missing for state '" + sys.states[ x ] + "'" );
            sys.alpha.push_back( std::move( *alpha[ x ] ) );
        }
        return res;
    }

    functor_ptr parse_functor_only()
    {
        auto f = parse_functor();
        if ( peek().kind != token_kind::end )
            fail( { "end of input" } );
        return f;
    }

private:
    const token& peek( std::size_t ahead = 0 ) const { return _t[ std::min( _pos + ahead, _t.size() - 1 ) ]; }
    const token& advance() { return _t[ _pos < _t.size() - 1 ? _pos++ : _pos ]; }

    bool accept( std::string_view s )
    {
        if ( !peek().is( s ) )
            return false;
        advance();
        return true;
    }

    [[noreturn]] void fail( std::vector< std::string > expected ) const
    {
        const auto& t = peek();
        throw parse_error( t.line, t.column, "unexpected " + t.describe(), std::move( expected ) );
    }

    const token& expect( std::string_view s )
    {
        if ( !peek().is( s ) )
            fail( { "'" + std::string( s ) + "'" } );
        return advance();
    }

    const token& expect_word( const std::string& what )
    {
        if ( peek().kind != token_kind::word )
            fail( { what } );
        return advance();
    }

    // fexpr ::= prod ('+' prod)* ; prod ::= atom ('x' atom)*
    functor_ptr parse_functor()
    {
        auto f = parse_product();
        while ( accept( "+" ) )
            f = functor_expr::coproduct( f, parse_product() );
        return f;
    }

    functor_ptr parse_product()
    {
        auto f = parse_functor_atom();
        while ( accept( "x" ) )
            f = functor_expr::product( f, parse_functor_atom() );
        return f;
    }

    functor_ptr parse_functor_atom()
    {
        const auto& t = peek();
        if ( accept( "Id" ) )
            return functor_expr::identity();
        if ( accept( "One" ) )
            return functor_expr::one();
        if ( accept( "Real" ) )
        {
            expect( "(" );
            expect( "top" );
            expect( "=" );
            const auto& at = peek();
            auto top = parse_rat();
            expect( ")" );
            if ( top <= 0 )
                throw parse_error( at.line, at.column, "Real(top=...) requires top > 0" );
            return functor_expr::real( top );
        }
        if ( accept( "Labels" ) )
        {
            expect( "{" );
            std::vector< std::string > labels;
            std::set< std::string > seen;
            do
            {
                const auto& l = expect_word( "label" );
                if ( !seen.insert( l.text ).second )
                    throw parse_error( l.line, l.column, "duplicate label '" + l.text + "'" );
                labels.push_back( l.text );
            } while ( accept( "," ) );
            expect( "}" );
            return functor_expr::label_set( labels );
        }
        if ( accept( "Pow" ) || accept( "Dist" ) )
        {
            const bool pow = t.text == "Pow";
            expect( "(" );
            auto inner = parse_functor();
            expect( ")" );
            return pow ? functor_expr::powerset( inner ) : functor_expr::distribution( inner );
        }
        if ( accept( "(" ) )
        {
            auto f = parse_functor();
            expect( ")" );
            return f;
        }
        fail( { "'Id'", "'One'", "'Real'", "'Labels'", "'Pow'", "'Dist'", "'('" } );
    }

    Rational parse_rat()
    {
        bool negative = accept( "-" );
        if ( !peek().is_number() )
            fail( { "rational p/q" } );
        mpz_class num( advance().text, 10 );
        mpz_class den = 1;
        if ( accept( "/" ) )
        {
            const auto& d = peek();
            if ( !d.is_number() )
                fail( { "denominator" } );
            den = mpz_class( advance().text, 10 );
            if ( den == 0 )
                throw parse_error( d.line, d.column, "zero denominator" );
        }
        Rational r( negative ? mpz_class( -num ) : num, den );
        r.canonicalize();
        return r;
    }

    // weight ::= term (('+'|'-') term)* ; term ::= ['-'] (rat ['*' param] | param)
    Rational parse_weight()
    {
        Rational total = parse_weight_term();
        while ( peek().is( "+" ) || peek().is( "-" ) )
        {
            const bool minus = advance().text == "-";
            Rational t = parse_weight_term();
            total += minus ? Rational( -t ) : t;
        }
        return total;
    }

    Rational parse_weight_term()
    {
        const bool negative = accept( "-" );
        Rational v;
        if ( peek().is_number() )
        {
            v = parse_rat();
            if ( accept( "*" ) )
                v *= param_value();
        }
        else if ( peek().kind == token_kind::word )
            v = param_value();
        else
            fail( { "rational p/q", "parameter" } );
        return negative ? Rational( -v ) : v;
    }

    Rational param_value()
    {
        const auto& t = expect_word( "parameter" );
        auto it = _params.find( t.text );
        if ( it == _params.end() )
            throw parse_error( t.line, t.column, "unknown parameter '" + t.text + "'" );
        return it->second;
    }

    value_ast parse_value()
    {
        const auto& t = peek();
        value_ast v;
        v.line = t.line;
        v.column = t.column;
        if ( accept( "dist" ) )
        {
            v.k = value_ast::kind::dist;
            expect( "{" );
            do
            {
                v.items.push_back( parse_value() );
                expect( ":" );
                v.weights.push_back( parse_weight() );
            } while ( accept( "," ) );
            expect( "}" );
            return v;
        }
        if ( accept( "{" ) )
        {
            v.k = value_ast::kind::set;
            while ( !peek().is( "}" ) )
            {
                v.items.push_back( parse_value() );
                accept( "," );
            }
            expect( "}" );
            return v;
        }
        if ( accept( "(" ) )
        {
            v.k = value_ast::kind::pair;
            v.items.push_back( parse_value() );
            expect( "," );
            v.items.push_back( parse_value() );
            expect( ")" );
            return v;
        }
        if ( accept( "inl" ) || accept( "inr" ) )
        {
            v.k = t.text == "inl" ? value_ast::kind::inl : value_ast::kind::inr;
            v.items.push_back( parse_value() );
            return v;
        }
        if ( accept( "unit" ) )
        {
            v.k = value_ast::kind::unit;
            return v;
        }
        if ( accept( "real" ) )
        {
            v.k = value_ast::kind::real;
            v.number = parse_weight();
            return v;
        }
        if ( accept( "label" ) )
        {
            v.k = value_ast::kind::label;
            v.text = expect_word( "label" ).text;
            return v;
        }
        if ( t.kind == token_kind::word )
        {
            v.k = value_ast::kind::ident;
            v.text = advance().text;
            return v;
        }
        fail( { "state id", "'dist'", "'{'", "'('", "'inl'", "'inr'", "'unit'", "'real'", "'label'" } );
    }

    state_value resolve( const functor_expr& e, const value_ast& a, const System& sys ) const
    {
        auto bad = [ & ]( const std::string& what ) { return parse_error( a.line, a.column, what ); };
        using K = value_ast::kind;
        switch ( e.kind )
        {
        case functor_kind::identity:
            if ( a.k != K::ident )
                throw bad( "expected a state for " + to_string( e ) );
            if ( auto x = sys.find( a.text ) )
                return state_value::of_atom( *x );
            throw bad( "unknown state '" + a.text + "'" );
        case functor_kind::const_real:
            if ( a.k != K::real )
                throw bad( "expected 'real q' for " + to_string( e ) );
            return state_value::of_real( a.number );
        case functor_kind::const_one:
            if ( a.k != K::unit )
                throw bad( "expected 'unit' for One" );
            return state_value::unit();
        case functor_kind::const_labels:
            if ( a.k != K::ident && a.k != K::label )
                throw bad( "expected a label for " + to_string( e ) );
            if ( !e.has_label( a.text ) )
                throw bad( "unknown label '" + a.text + "' for " + to_string( e ) );
            return state_value::of_label( a.text );
        case functor_kind::pow:
        {
            if ( a.k != K::set )
                throw bad( "expected a set {...} for " + to_string( e ) );
            std::vector< state_value > elems;
            for ( const auto& c : a.items )
                elems.push_back( resolve( *e.left, c, sys ) );
            return state_value::set_of( std::move( elems ) );
        }
        case functor_kind::dist:
        {
            if ( a.k != K::dist )
                throw bad( "expected dist{...} for " + to_string( e ) );
            std::vector< std::pair< state_value, Rational > > sup;
            for ( std::size_t i = 0; i < a.items.size(); ++i )
                sup.emplace_back( resolve( *e.left, a.items[ i ], sys ), a.weights[ i ] );
            return state_value::dist_of( std::move( sup ) );
        }
        case functor_kind::product:
            if ( a.k != K::pair )
                throw bad( "expected a pair (.., ..) for " + to_string( e ) );
            return state_value::pair_of( resolve( *e.left, a.items[ 0 ], sys ), resolve( *e.right, a.items[ 1 ], sys ) );
        case functor_kind::coproduct:
        {
            if ( a.k == K::inl )
                return state_value::inl( resolve( *e.left, a.items[ 0 ], sys ) );
            if ( a.k == K::inr )
                return state_value::inr( resolve( *e.right, a.items[ 0 ], sys ) );
            // implicit injection: exactly one side must accept the value
            std::optional< state_value > l, r;
            std::string why;
            try
            {
                l = state_value::inl( resolve( *e.left, a, sys ) );
            }
            catch ( const parse_error& err )
            {
                why = err.what();
            }
            try
            {
                r = state_value::inr( resolve( *e.right, a, sys ) );
            }
            catch ( const parse_error& )
            {
            }
            if ( l && r )
                throw bad( "ambiguous injection into " + to_string( e ) + "; write inl or inr" );
            if ( l )
                return *l;
            if ( r )
                return *r;
            throw bad( "value fits neither side of " + to_string( e ) );
        }
        }
        throw bad( "unknown functor node" );
    }

    std::vector< token > _t;
    std::size_t _pos = 0;
    const parse_options& _opts;
    std::map< std::string, Rational > _params;
};

} // namespace detail

/// Parses a `.coalg` document. Throws parse_error with a position for lexical,
/// syntactic, shape and semantic problems.
inline parse_result parse_system_with_warnings( std::string_view text, const parse_options& opts = {} )
{
    detail::parser p( detail::lex( text ), opts );
    return p.parse_document();
}

inline System parse_system( std::string_view text, const parse_options& opts = {} )
{
    return parse_system_with_warnings( text, opts ).system;
}

inline functor_ptr parse_functor( std::string_view text )
{
    parse_options opts;
    detail::parser p( detail::lex( text ), opts );
    return p.parse_functor_only();
}

inline std::string format_value( const System& sys, const functor_expr& e, const state_value& v )
{
    switch ( e.kind )
    {
    case functor_kind::identity:
        return sys.states.at( v.atom );
    case functor_kind::const_real:
        return "real " + to_string( v.real );
    case functor_kind::const_one:
        return "unit";
    case functor_kind::const_labels:
        return detail::keywords().count( v.label ) ? "label " + v.label : v.label;
    case functor_kind::pow:
    {
        std::string s = "{";
        for ( std::size_t i = 0; i < v.items.size(); ++i )
            s += ( i ? ", " : "" ) + format_value( sys, *e.left, v.items[ i ] );
        return s + "}";
    }
    case functor_kind::dist:
    {
        std::string s = "dist{";
        for ( std::size_t i = 0; i < v.items.size(); ++i )
            s += ( i ? ", " : "" ) + format_value( sys, *e.left, v.items[ i ] ) + ": " + to_string( v.weights[ i ] );
        return s + "}";
    }
    case functor_kind::product:
        return "(" + format_value( sys, *e.left, v.items[ 0 ] ) + ", " + format_value( sys, *e.right, v.items[ 1 ] ) + ")";
    case functor_kind::coproduct:
        return v.kind == value_kind::inl ? "inl " + format_value( sys, *e.left, v.items[ 0 ] )
                                         : "inr " + format_value( sys, *e.right, v.items[ 0 ] );
    }
    return {};
}

/// Writes the resolved system: explicit injections, rationals in lowest terms,
/// parameters substituted.
inline std::string serialize_system( const System& sys )
{
    std::ostringstream os;
    if ( !sys.name.empty() )
        os << "system " << sys.name << "\n";
    os << "functor: " << to_string( *sys.expr ) << "\n";
    if ( sys.top != 1 )
        os << "top: " << to_string( sys.top ) << "\n";
    os << "states: ";
    for ( std::size_t i = 0; i < sys.states.size(); ++i )
        os << ( i ? ", " : "" ) << sys.states[ i ];
    os << "\n";
    for ( state_id x = 0; x < sys.size(); ++x )
        os << "alpha " << sys.states[ x ] << " = " << format_value( sys, *sys.expr, sys.alpha[ x ] ) << "\n";
    return os.str();
}

inline bool structurally_equal( const System& a, const System& b )
{
    return a.name == b.name && structurally_equal( *a.expr, *b.expr ) && a.states == b.states && a.alpha == b.alpha &&
           a.top == b.top;
}

inline nlohmann::json value_to_json( const System& sys, const functor_expr& e, const state_value& v )
{
    using nlohmann::json;
    switch ( e.kind )
    {
    case functor_kind::identity:
        return { { "kind", "state" }, { "id", sys.states.at( v.atom ) } };
    case functor_kind::const_real:
        return { { "kind", "real" }, { "value", to_string( v.real ) } };
    case functor_kind::const_one:
        return { { "kind", "unit" } };
    case functor_kind::const_labels:
        return { { "kind", "label" }, { "label", v.label } };
    case functor_kind::pow:
    {
        json elems = json::array();
        for ( const auto& c : v.items )
            elems.push_back( value_to_json( sys, *e.left, c ) );
        return { { "kind", "set" }, { "elements", elems } };
    }
    case functor_kind::dist:
    {
        json sup = json::array();
        for ( std::size_t i = 0; i < v.items.size(); ++i )
            sup.push_back( { { "value", value_to_json( sys, *e.left, v.items[ i ] ) },
                             { "weight", to_string( v.weights[ i ] ) } } );
        return { { "kind", "dist" }, { "support", sup } };
    }
    case functor_kind::product:
        return { { "kind", "pair" },
                 { "fst", value_to_json( sys, *e.left, v.items[ 0 ] ) },
                 { "snd", value_to_json( sys, *e.right, v.items[ 1 ] ) } };
    case functor_kind::coproduct:
    {
        const bool l = v.kind == value_kind::inl;
        return { { "kind", l ? "inl" : "inr" }, { "value", value_to_json( sys, l ? *e.left : *e.right, v.items[ 0 ] ) } };
    }
    }
    return {};
}

/// JSON mirror of the system: {name, functor, states, alpha, top}.
inline nlohmann::json system_to_json( const System& sys )
{
    nlohmann::json alpha = nlohmann::json::object();
    for ( state_id x = 0; x < sys.size(); ++x )
        alpha[ sys.states[ x ] ] = value_to_json( sys, *sys.expr, sys.alpha[ x ] );
    return { { "name", sys.name },
             { "functor", to_string( *sys.expr ) },
             { "states", sys.states },
             { "alpha", alpha },
             { "top", to_string( sys.top ) } };
}

} // namespace coalg
