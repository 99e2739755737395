#pragma once

#include <gmpxx.h>

#include <cctype>
#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coalg
{

/// Exact rational number. Every quantity in the library (weights, distances,
/// predicate values, budgets) is carried as a Rational; no floating point is used.
using Rational = mpq_class;

inline Rational make_rational( long num, long den = 1 )
{
    Rational r( num, den );
    r.canonicalize();
    return r;
}

inline std::strong_ordering compare( const Rational& a, const Rational& b )
{
    const int c = cmp( a, b );
    if ( c < 0 )
        return std::strong_ordering::less;
    if ( c > 0 )
        return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

inline Rational rmin( const Rational& a, const Rational& b ) { return a < b ? a : b; }
inline Rational rmax( const Rational& a, const Rational& b ) { return a < b ? b : a; }
inline Rational rabs( const Rational& a ) { return a < 0 ? Rational( -a ) : a; }

/// Truncated subtraction a ⊖ b = max(a - b, 0).
inline Rational monus( const Rational& a, const Rational& b )
{
    Rational d = a - b;
    return d < 0 ? Rational( 0 ) : d;
}

/// Lowest-terms `p/q` text, or `p` when the denominator is 1.
inline std::string to_string( const Rational& r )
{
    Rational c = r;
    c.canonicalize();
    if ( c.get_den() == 1 )
        return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

class rational_syntax_error : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Parses `p`, `-p` or `p/q`. Decimal points and exponents are rejected: inputs
/// must stay exact.
inline Rational parse_rational( std::string_view text )
{
    auto fail = [ & ]( const std::string& why ) {
        throw rational_syntax_error( "invalid rational '" + std::string( text ) + "': " + why );
    };
    std::size_t i = 0;
    while ( i < text.size() && std::isspace( static_cast< unsigned char >( text[ i ] ) ) )
        ++i;
    std::size_t end = text.size();
    while ( end > i && std::isspace( static_cast< unsigned char >( text[ end - 1 ] ) ) )
        --end;
    std::string_view body = text.substr( i, end - i );
    if ( body.empty() )
        fail( "empty" );

    bool negative = false;
    if ( body.front() == '-' || body.front() == '+' )
    {
        negative = body.front() == '-';
        body.remove_prefix( 1 );
    }
    const auto slash = body.find( '/' );
    std::string_view num = body.substr( 0, slash );
    std::string_view den = slash == std::string_view::npos ? std::string_view{} : body.substr( slash + 1 );

    auto digits_only = [ & ]( std::string_view s ) {
        if ( s.empty() )
            return false;
        for ( char c : s )
            if ( !std::isdigit( static_cast< unsigned char >( c ) ) )
                return false;
        return true;
    };
    if ( body.find_first_of( ".eE" ) != std::string_view::npos )
        fail( "floating-point notation is not accepted, write p/q" );
    if ( !digits_only( num ) )
        fail( "expected digits" );
    if ( slash != std::string_view::npos && !digits_only( den ) )
        fail( "expected digits after '/'" );

    mpz_class n( std::string( num ), 10 );
    mpz_class d = slash == std::string_view::npos ? mpz_class( 1 ) : mpz_class( std::string( den ), 10 );
    if ( d == 0 )
        fail( "zero denominator" );
    Rational r( negative ? mpz_class( -n ) : n, d );
    r.canonicalize();
    return r;
}

} // namespace coalg
