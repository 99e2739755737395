#pragma once

#include "../evaluation_maps.hpp"
#include "../system.hpp"

#include <cctype>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace coalg
{

class classical_formula;
using cformula = std::shared_ptr< const classical_formula >;

/// φ ::= and(Φ) | not φ | [λ]φ, with T = and() (finite conjunction). Nodes are
/// immutable and may be shared, so formulas are DAGs.
class classical_formula
{
public:
    enum class kind
    {
        conj,
        neg,
        modal,
    };

    kind k = kind::conj;
    std::vector< cformula > subs; // conj: conjuncts; neg/modal: one
    std::string lambda;           // modal only

    static cformula top() { return std::make_shared< classical_formula >(); }

    static cformula conj( std::vector< cformula > parts )
    {
        auto f = std::make_shared< classical_formula >();
        f->subs = std::move( parts );
        return f;
    }

    static cformula neg( cformula sub )
    {
        auto f = std::make_shared< classical_formula >();
        f->k = kind::neg;
        f->subs.push_back( std::move( sub ) );
        return f;
    }

    static cformula modal( std::string lambda, cformula sub )
    {
        auto f = std::make_shared< classical_formula >();
        f->k = kind::modal;
        f->lambda = std::move( lambda );
        f->subs.push_back( std::move( sub ) );
        return f;
    }

    [[nodiscard]] const cformula& sub() const { return subs.at( 0 ); }
};

inline std::size_t modal_depth( const classical_formula& f )
{
    std::size_t d = 0;
    for ( const auto& s : f.subs )
        d = std::max( d, modal_depth( *s ) );
    return d + ( f.k == classical_formula::kind::modal ? 1 : 0 );
}

inline std::string to_string( const classical_formula& f )
{
    switch ( f.k )
    {
    case classical_formula::kind::conj:
    {
        if ( f.subs.empty() )
            return "T";
        std::string s = "and(";
        for ( std::size_t i = 0; i < f.subs.size(); ++i )
            s += ( i ? ", " : "" ) + to_string( *f.subs[ i ] );
        return s + ")";
    }
    case classical_formula::kind::neg:
        return "not " + to_string( *f.sub() );
    case classical_formula::kind::modal:
        return "[" + f.lambda + "]" + to_string( *f.sub() );
    }
    return {};
}

class formula_syntax_error : public std::invalid_argument
{
public:
    formula_syntax_error( std::size_t pos, const std::string& what )
        : std::invalid_argument( "column " + std::to_string( pos + 1 ) + ": " + what ), _pos( pos )
    {}

    [[nodiscard]] std::size_t position() const { return _pos; }

private:
    std::size_t _pos;
};

namespace detail
{

/// Shared scanner for the two formula languages.
class formula_scanner
{
public:
    explicit formula_scanner( std::string_view s ) : _s( s ) {}

    void skip()
    {
        while ( _i < _s.size() && std::isspace( static_cast< unsigned char >( _s[ _i ] ) ) )
            ++_i;
    }

    bool accept( std::string_view tok )
    {
        skip();
        if ( _s.substr( _i, tok.size() ) != tok )
            return false;
        // keywords must not run into an identifier
        if ( std::isalpha( static_cast< unsigned char >( tok.back() ) ) && _i + tok.size() < _s.size() &&
             std::isalnum( static_cast< unsigned char >( _s[ _i + tok.size() ] ) ) )
            return false;
        _i += tok.size();
        return true;
    }

    void expect( std::string_view tok )
    {
        if ( !accept( tok ) )
            fail( "expected '" + std::string( tok ) + "'" );
    }

    std::string until( char stop )
    {
        const auto j = _s.find( stop, _i );
        if ( j == std::string_view::npos )
            fail( std::string( "missing '" ) + stop + "'" );
        std::string out( _s.substr( _i, j - _i ) );
        _i = j + 1;
        return out;
    }

    Rational rational()
    {
        skip();
        std::size_t j = _i;
        while ( j < _s.size() && ( std::isalnum( static_cast< unsigned char >( _s[ j ] ) ) || _s[ j ] == '/' ||
                                   _s[ j ] == '.' || _s[ j ] == '-' ) )
            ++j;
        try
        {
            auto r = parse_rational( _s.substr( _i, j - _i ) );
            _i = j;
            return r;
        }
        catch ( const rational_syntax_error& e )
        {
            fail( e.what() );
        }
    }

    [[nodiscard]] bool done()
    {
        skip();
        return _i >= _s.size();
    }

    [[nodiscard]] char peek()
    {
        skip();
        return _i < _s.size() ? _s[ _i ] : '\0';
    }

    [[noreturn]] void fail( const std::string& what ) const { throw formula_syntax_error( _i, what ); }

private:
    std::string_view _s;
    std::size_t _i = 0;
};

inline cformula parse_classical_at( formula_scanner& sc )
{
    if ( sc.accept( "T" ) )
        return classical_formula::top();
    if ( sc.accept( "not" ) )
        return classical_formula::neg( parse_classical_at( sc ) );
    if ( sc.accept( "and" ) )
    {
        sc.expect( "(" );
        std::vector< cformula > parts;
        if ( !sc.accept( ")" ) )
        {
            do
                parts.push_back( parse_classical_at( sc ) );
            while ( sc.accept( "," ) );
            sc.expect( ")" );
        }
        return classical_formula::conj( std::move( parts ) );
    }
    if ( sc.accept( "[" ) )
    {
        auto name = sc.until( ']' );
        return classical_formula::modal( name, parse_classical_at( sc ) );
    }
    if ( sc.accept( "(" ) )
    {
        auto f = parse_classical_at( sc );
        sc.expect( ")" );
        return f;
    }
    sc.fail( "expected 'T', 'and(', 'not', '[' or '('" );
}

} // namespace detail

/// Parses `T`, `and(φ, ...)`, `not φ`, `[name] φ`.
inline cformula parse_classical_formula( std::string_view text )
{
    detail::formula_scanner sc( text );
    auto f = detail::parse_classical_at( sc );
    if ( !sc.done() )
        sc.fail( "unexpected trailing input" );
    return f;
}

class unknown_modality : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Lookup of evaluation maps by name.
class map_table
{
public:
    map_table() = default;
    explicit map_table( std::vector< eval_map > maps ) : _maps( std::move( maps ) )
    {
        for ( std::size_t i = 0; i < _maps.size(); ++i )
            _index.emplace( _maps[ i ].name, i );
    }

    [[nodiscard]] const eval_map& at( const std::string& name ) const
    {
        auto it = _index.find( name );
        if ( it == _index.end() )
            throw unknown_modality( "unknown modality [" + name + "]" );
        return _maps[ it->second ];
    }

    [[nodiscard]] const std::vector< eval_map >& maps() const { return _maps; }

private:
    std::vector< eval_map > _maps;
    std::map< std::string, std::size_t > _index;
};

/// Memoizing evaluator: shared subformulas are computed once.
class classical_evaluator
{
public:
    classical_evaluator( const System& sys, map_table lambdas ) : _sys( sys ), _lambdas( std::move( lambdas ) ) {}
    explicit classical_evaluator( const System& sys ) : classical_evaluator( sys, map_table( lambdas_of( sys ) ) ) {}

    const Predicate2& operator()( const cformula& f )
    {
        if ( auto it = _memo.find( f.get() ); it != _memo.end() )
            return it->second;
        Predicate2 out( _sys.size(), true );
        switch ( f->k )
        {
        case classical_formula::kind::conj:
            for ( const auto& s : f->subs )
            {
                const auto& v = ( *this )( s );
                for ( state_id x = 0; x < out.size(); ++x )
                    out[ x ] = out[ x ] && v[ x ];
            }
            break;
        case classical_formula::kind::neg:
        {
            const auto& v = ( *this )( f->sub() );
            for ( state_id x = 0; x < out.size(); ++x )
                out[ x ] = !v[ x ];
            break;
        }
        case classical_formula::kind::modal:
        {
            const auto& m = _lambdas.at( f->lambda );
            const Predicate2 v = ( *this )( f->sub() );
            for ( state_id x = 0; x < out.size(); ++x )
                out[ x ] = eval_lambda( m.steps, *_sys.expr, image( _sys, v, x ) );
            break;
        }
        }
        _keep.push_back( f );
        return _memo.emplace( f.get(), std::move( out ) ).first->second;
    }

    [[nodiscard]] const map_table& lambdas() const { return _lambdas; }

private:
    const System& _sys;
    map_table _lambdas;
    std::unordered_map< const classical_formula*, Predicate2 > _memo;
    std::vector< cformula > _keep;
};

inline Predicate2 eval_classical( const System& sys, const cformula& f )
{
    classical_evaluator ev( sys );
    return ev( f );
}

} // namespace coalg
