#include "support.hpp"

#include "coalg/evaluation_maps.hpp"
#include "coalg/system.hpp"

#include <gtest/gtest.h>

using namespace coalg;
using testing_support::q;

namespace
{

std::vector< std::string > names( const std::vector< eval_map >& ms )
{
    std::vector< std::string > out;
    for ( const auto& m : ms )
        out.push_back( m.name );
    return out;
}

const eval_map& by_name( const std::vector< eval_map >& ms, const std::string& n )
{
    for ( const auto& m : ms )
        if ( m.name == n )
            return m;
    throw std::out_of_range( n );
}

bit_value bits( std::initializer_list< bool > members )
{
    std::vector< bit_value > items;
    for ( bool b : members )
        items.push_back( bit_value::of_atom( b ) );
    auto v = bit_value::set_of( items );
    normalize( v );
    return v;
}

bit_value coin( const Rational& p_one )
{
    std::vector< std::pair< bit_value, Rational > > s;
    if ( p_one != 1 )
        s.push_back( { bit_value::of_atom( false ), 1 - p_one } );
    if ( p_one != 0 )
        s.push_back( { bit_value::of_atom( true ), p_one } );
    return bit_value::dist_of( s );
}

} // namespace

TEST( Rational, ParsesExactForms )
{
    EXPECT_EQ( parse_rational( "3/6" ), q( 1, 2 ) );
    EXPECT_EQ( parse_rational( " -2 " ), q( -2 ) );
    EXPECT_EQ( to_string( q( 10, 4 ) ), "5/2" );
    EXPECT_EQ( to_string( q( 0 ) ), "0" );
    EXPECT_THROW( parse_rational( "0.5" ), rational_syntax_error );
    EXPECT_THROW( parse_rational( "1e3" ), rational_syntax_error );
    EXPECT_THROW( parse_rational( "1/0" ), rational_syntax_error );
    EXPECT_THROW( parse_rational( "" ), rational_syntax_error );
    EXPECT_EQ( monus( q( 1, 4 ), q( 1, 2 ) ), 0 );
    EXPECT_EQ( monus( q( 3, 4 ), q( 1, 2 ) ), q( 1, 4 ) );
}

TEST( Functor, RejectsBadConstants )
{
    EXPECT_THROW( functor_expr::real( 0 ), std::invalid_argument );
    EXPECT_THROW( functor_expr::label_set( {} ), std::invalid_argument );
    EXPECT_THROW( functor_expr::label_set( { "a", "a" } ), std::invalid_argument );
    EXPECT_EQ( to_string( *parse_functor( "Pow(Labels{a,b,c} x Id)" ) ), "Pow(Labels{a,b,c} x Id)" );
}

TEST( ApplyMap, IdentityLeavesValueUnchanged )
{
    const auto sys = testing_support::load_sample( "fig1b.coalg" );
    for ( const auto& a : sys.alpha )
        EXPECT_EQ( apply_map( []( state_id x ) { return x; }, *sys.expr, a ), a );
}

TEST( ApplyMap, CharacteristicFunctionOnLabelledSuccessors )
{
    // α(1) = {(a,3),(a,4)} under χ{3} is {(a,1),(a,0)}
    const auto sys = testing_support::load_sample( "fig1b.coalg" );
    const auto three = sys.index_of( "3" );
    const auto img = apply_map( [ & ]( state_id x ) { return x == three; }, *sys.expr, sys.alpha[ sys.index_of( "1" ) ] );
    ASSERT_EQ( img.items.size(), 2u );
    std::set< std::pair< std::string, bool > > got;
    for ( const auto& e : img.items )
        got.insert( { e.first().label, e.second().atom } );
    EXPECT_EQ( got, ( std::set< std::pair< std::string, bool > >{ { "a", false }, { "a", true } } ) );
}

TEST( ApplyMap, MergesEqualImagesInDistributions )
{
    const auto e = parse_functor( "Dist(Id)" );
    const auto t = state_value::dist_of( { { state_value::of_atom( 0 ), q( 1, 2 ) }, { state_value::of_atom( 1 ), q( 1, 2 ) } } );
    const auto img = apply_map( []( state_id ) { return q( 3, 4 ); }, *e, t );
    ASSERT_EQ( img.items.size(), 1u );
    EXPECT_EQ( img.items[ 0 ].atom, q( 3, 4 ) );
    EXPECT_EQ( img.weights[ 0 ], 1 );
}

TEST( ApplyMap, ShapeMismatchNamesThePath )
{
    const auto e = parse_functor( "Pow(Id) x Id" );
    const auto bad = state_value::pair_of( state_value::of_atom( 0 ), state_value::of_atom( 0 ) );
    try
    {
        apply_map( []( state_id x ) { return x; }, *e, bad );
        FAIL() << "expected a shape error";
    }
    catch ( const shape_error& err )
    {
        EXPECT_NE( std::string( err.what() ).find( "fst" ), std::string::npos ) << err.what();
    }
}

TEST( Gammas, ProbabilisticWithTermination )
{
    EXPECT_EQ( names( generate_gammas( *parse_functor( "Dist(Id) + One" ) ) ),
               ( std::vector< std::string >{ "exp.l", "term.r" } ) );
}

TEST( Gammas, MetricTransitionSystem )
{
    EXPECT_EQ( names( generate_gammas( *parse_functor( "Real(top=1) x Pow(Id)" ) ) ),
               ( std::vector< std::string >{ "fst", "sup.snd" } ) );
}

TEST( Gammas, IdentityHasOneMap ) { EXPECT_EQ( names( generate_gammas( *parse_functor( "Id" ) ) ).size(), 1u ); }

TEST( EvalGamma, ExpectationOfTerminationIndicator )
{
    // successors of state 1 in Fig. 1a under the terminating-state predicate
    const auto sys = testing_support::fig1a( q( 1, 8 ) );
    const auto gs = gammas_of( sys );
    PredicateR term( sys.size(), Rational( 0 ) );
    for ( const char* s : { "4", "5", "7" } )
        term[ sys.index_of( s ) ] = 1;
    const auto& exp = by_name( gs, "exp.l" );
    EXPECT_EQ( eval_gamma( exp.steps, *sys.expr, image( sys, term, sys.index_of( "1" ) ) ), q( 1, 2 ) );
    EXPECT_EQ( eval_gamma( exp.steps, *sys.expr, image( sys, term, sys.index_of( "2" ) ) ), q( 1, 2 ) + q( 1, 8 ) );
}

TEST( EvalGamma, TerminationMapIsSideIndicator )
{
    const auto e = parse_functor( "Dist(Id) + One" );
    const auto gammas = generate_gammas( *e );
    const auto& term = by_name( gammas, "term.r" );
    const auto inl = real_value::inl( real_value::dist_of( { { real_value::of_atom( q( 1, 3 ) ), 1 } } ) );
    EXPECT_EQ( eval_gamma( term.steps, *e, inl ), 0 );
    EXPECT_EQ( eval_gamma( term.steps, *e, real_value::inr( real_value::unit() ) ), 1 );
}

TEST( EvalGamma, SupOfEmptySetIsZero )
{
    const auto e = parse_functor( "Pow(Id)" );
    EXPECT_EQ( eval_gamma( by_name( generate_gammas( *e ), "sup" ).steps, *e, real_value::set_of( {} ) ), 0 );
}

TEST( EvalGamma, RealConstantScalesWithTop )
{
    const auto e = parse_functor( "Real(top=2) x Labels{a,b}" );
    const auto gs = generate_gammas( *e );
    const auto t = real_value::pair_of( real_value::of_real( q( 3, 2 ) ), real_value::of_label( "b" ) );
    EXPECT_EQ( eval_gamma( by_name( gs, "fst" ).steps, *e, t, 2 ), q( 3, 2 ) );
    EXPECT_EQ( eval_gamma( by_name( gs, "snd.a" ).steps, *e, t, 2 ), 0 );
    EXPECT_EQ( eval_gamma( by_name( gs, "snd.b" ).steps, *e, t, 2 ), 2 );
}

TEST( Lambdas, PowersetHasDiamondAndBox )
{
    const auto e = parse_functor( "Pow(Id)" );
    const auto ls = generate_lambdas( *e );
    EXPECT_EQ( names( ls ), ( std::vector< std::string >{ "dia", "box" } ) );
    // exhaustive over F2 = {∅, {0}, {1}, {0,1}}: jointly injective and monotone
    const std::vector< bit_value > all{ bits( {} ), bits( { false } ), bits( { true } ), bits( { false, true } ) };
    EXPECT_FALSE( find_unseparated( *e, ls, all ) );
    EXPECT_FALSE( find_non_monotone( *e, ls, all ) );
    const auto& box = by_name( ls, "box" );
    // vacuously true on ∅; this is what separates ∅ from {0}
    EXPECT_TRUE( eval_lambda( box.steps, *e, bits( {} ) ) );
    EXPECT_FALSE( eval_lambda( box.steps, *e, bits( { false, true } ) ) );
    EXPECT_TRUE( eval_lambda( box.steps, *e, bits( { true } ) ) );
}

TEST( Lambdas, TerminalFunctorHasConstantOne )
{
    const auto e = parse_functor( "One" );
    const auto ls = generate_lambdas( *e );
    ASSERT_EQ( ls.size(), 1u );
    EXPECT_TRUE( eval_lambda( ls[ 0 ].steps, *e, bit_value::unit() ) );
}

TEST( Lambdas, ThresholdsSeparateReachableValuesOfFig1a )
{
    for ( const auto& eps : { q( 0 ), q( 1, 8 ), q( 1, 4 ) } )
    {
        const auto sys = testing_support::fig1a( eps );
        const auto ls = lambdas_of( sys );
        const auto values = reachable_bit_values( sys );
        ASSERT_TRUE( values );
        EXPECT_FALSE( find_unseparated( *sys.expr, ls, *values ) ) << to_string( eps );
        EXPECT_FALSE( find_non_monotone( *sys.expr, ls, *values ) ) << to_string( eps );
        EXPECT_TRUE( validate_system( sys ).separating.value_or( false ) );
    }
}

TEST( LiftedOrder, PowersetIsEgliMilner )
{
    const auto e = parse_functor( "Pow(Id)" );
    EXPECT_TRUE( lifted_order_leq( *e, bits( { false } ), bits( { false, true } ) ) );
    EXPECT_TRUE( lifted_order_leq( *e, bits( { false, true } ), bits( { true } ) ) );
    EXPECT_TRUE( lifted_order_leq( *e, bits( {} ), bits( {} ) ) );
    EXPECT_FALSE( lifted_order_leq( *e, bits( {} ), bits( { true } ) ) );
    EXPECT_FALSE( lifted_order_leq( *e, bits( { true } ), bits( {} ) ) );
    EXPECT_FALSE( lifted_order_leq( *e, bits( { true } ), bits( { false, true } ) ) );
}

TEST( LiftedOrder, DistributionsCompareByMassOnOne )
{
    const auto e = parse_functor( "Dist(Id)" );
    for ( long a = 0; a <= 4; ++a )
        for ( long b = 0; b <= 4; ++b )
            EXPECT_EQ( lifted_order_leq( *e, coin( q( a, 4 ) ), coin( q( b, 4 ) ) ), a <= b ) << a << " " << b;
}

TEST( LiftedOrder, ReflexiveAndTransitiveOnSmallFunctors )
{
    for ( const char* text : { "Pow(Id)", "Dist(Id) + One", "Pow(Labels{a,b} x Id)", "Id x Pow(Id)" } )
    {
        const auto e = parse_functor( text );
        const auto values = enumerate_bit_values( *e, 4, 1024 );
        ASSERT_TRUE( values ) << text;
        for ( const auto& a : *values )
            EXPECT_TRUE( lifted_order_leq( *e, a, a ) ) << text;
        for ( const auto& a : *values )
            for ( const auto& b : *values )
            {
                if ( !lifted_order_leq( *e, a, b ) )
                    continue;
                for ( const auto& c : *values )
                    if ( lifted_order_leq( *e, b, c ) )
                    {
                        EXPECT_TRUE( lifted_order_leq( *e, a, c ) ) << text;
                    }
            }
    }
}
