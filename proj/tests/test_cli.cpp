#include "support.hpp"

#include "coalg/cli/app.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using coalg::cli::json;
using testing_support::sample_path;

namespace
{

struct outcome
{
    int code;
    std::string out;
    std::string err;
};

outcome run( std::vector< std::string > args, const std::string& input = "" )
{
    std::istringstream in( input );
    std::ostringstream out, err;
    const int code = coalg::cli::app( in, out, err ).run( std::move( args ) );
    return { code, out.str(), err.str() };
}

bool has( const std::string& hay, const std::string& needle ) { return hay.find( needle ) != std::string::npos; }

std::string temp_file( const std::string& name, const std::string& text )
{
    const auto path = ::testing::TempDir() + name;
    std::ofstream( path ) << text;
    return path;
}

} // namespace

TEST( Cli, EquivPrintsBlocksAndFormula )
{
    const auto r = run( { "equiv", sample_path( "fig1b.coalg" ), "--pair", "1,2", "--formula" } );
    ASSERT_EQ( r.code, 0 ) << r.err;
    EXPECT_TRUE( has( r.out, "6 blocks: {1} {2} {3} {4} {5} {6,7,8,9}" ) ) << r.out;
    EXPECT_TRUE( has( r.out, "1 !~ 2" ) );
    EXPECT_TRUE( has( r.out, "holds at 1: yes, at 2: no" ) ) << r.out;
}

TEST( Cli, EquivRespectsTheParameter )
{
    auto r = run( { "equiv", sample_path( "fig1a.coalg" ), "--eps", "0", "--pair", "1,2" } );
    ASSERT_EQ( r.code, 0 ) << r.err;
    EXPECT_TRUE( has( r.out, "1 ~ 2" ) ) << r.out;
    r = run( { "equiv", sample_path( "fig1a.coalg" ), "--param", "eps=1/4", "--pair", "1,2", "--format", "json" } );
    ASSERT_EQ( r.code, 0 ) << r.err;
    const auto j = json::parse( r.out );
    EXPECT_FALSE( j[ "equivalent" ] );
    EXPECT_EQ( j[ "blocks" ].size(), 4u );
}

TEST( Cli, DistanceMatrixAndCertificate )
{
    auto r = run( { "distance", sample_path( "fig1a.coalg" ), "--eps", "1/8", "--pair", "1,2" } );
    ASSERT_EQ( r.code, 0 ) << r.err;
    EXPECT_TRUE( has( r.out, "d(1,2) = 1/8" ) ) << r.out;
    EXPECT_TRUE( has( r.out, "stabilized-exact" ) );
    r = run( { "distance", sample_path( "fig1a.coalg" ), "--eps", "1/4", "--format", "json" } );
    ASSERT_EQ( r.code, 0 );
    const auto j = json::parse( r.out );
    EXPECT_EQ( j[ "matrix" ][ 0 ][ 1 ], "1/4" );
    EXPECT_EQ( j[ "certificate" ][ "mode" ], "stabilized-exact" );
    r = run( { "distance", sample_path( "fig1a.coalg" ), "--format", "tsv" } );
    EXPECT_TRUE( has( r.out, "# mode\tstabilized-exact" ) ) << r.out;
    EXPECT_EQ( run( { "distance", sample_path( "fig1a.coalg" ), "--discount", "2" } ).code, 1 );
}

TEST( Cli, EvalBothLogics )
{
    auto r = run( { "eval", sample_path( "fig1b.coalg" ), "[dia.a]T" } );
    ASSERT_EQ( r.code, 0 ) << r.err;
    EXPECT_TRUE( has( r.out, "1\t1" ) ) << r.out;
    EXPECT_TRUE( has( r.out, "9\t0" ) ) << r.out;
    r = run( { "eval", sample_path( "fig1a.coalg" ), "--eps", "1/8", "--metric", "[exp.l][term.r]T", "--format", "json" } );
    ASSERT_EQ( r.code, 0 ) << r.err;
    const auto j = json::parse( r.out );
    EXPECT_EQ( j[ "logic" ], "metric" );
    EXPECT_EQ( j[ "values" ][ "1" ], "1/2" );
    EXPECT_EQ( j[ "values" ][ "2" ], "5/8" );
    EXPECT_EQ( run( { "eval", sample_path( "fig1b.coalg" ), "[nope]T" } ).code, 2 );
    EXPECT_EQ( run( { "eval", sample_path( "fig1b.coalg" ), "and(" } ).code, 2 );
}

TEST( Cli, SynthClassicalAndMetric )
{
    auto r = run( { "synth", sample_path( "fig1b.coalg" ), "--pair", "1,2", "--format", "json" } );
    ASSERT_EQ( r.code, 0 ) << r.err;
    auto j = json::parse( r.out );
    EXPECT_LE( j[ "modal_depth" ], 3 );
    EXPECT_EQ( j[ "values" ][ 0 ], "1" );
    EXPECT_EQ( j[ "values" ][ 1 ], "0" );
    r = run( { "synth", sample_path( "fig1a.coalg" ), "--eps", "1/4", "--pair", "1,2", "--metric", "--gap", "1/8" } );
    ASSERT_EQ( r.code, 0 ) << r.err;
    EXPECT_TRUE( has( r.out, "modal depth: 2" ) ) << r.out;
    EXPECT_EQ( run( { "synth", sample_path( "fig1a.coalg" ), "--eps", "0", "--pair", "1,2" } ).code, 3 );
    EXPECT_EQ( run( { "synth", sample_path( "fig1a.coalg" ), "--eps", "1/8", "--pair", "1,2", "--metric", "--gap", "1/8" } ).code,
               3 );
}

TEST( Cli, PlayEngineAgainstEngine )
{
    auto r = run( { "play", sample_path( "fig1b.coalg" ), "--pair", "1,2" } );
    ASSERT_EQ( r.code, 0 ) << r.err;
    EXPECT_TRUE( has( r.out, "round 1: (1,2)" ) ) << r.out;
    EXPECT_TRUE( has( r.out, "spoiler wins" ) ) << r.out;
    r = run( { "play", sample_path( "fig1a.coalg" ), "--eps", "1/8", "--pair", "1,2", "--metric", "--eps-budget", "1/8", "--rounds",
               "20" } );
    ASSERT_EQ( r.code, 0 ) << r.err;
    EXPECT_TRUE( has( r.out, "defender survives 20 rounds" ) ) << r.out;
    r = run( { "play", sample_path( "fig1a.coalg" ), "--eps", "1/8", "--metric", "--eps-budget", "1/16", "--format", "json" } );
    ASSERT_EQ( r.code, 0 ) << r.err;
    EXPECT_EQ( json::parse( r.out )[ "state" ][ "winner" ], "spoiler" );
}

TEST( Cli, PlayInteractiveDefender )
{
    const auto r = run( { "play", sample_path( "fig1b.coalg" ), "--pair", "1,2", "--engine", "spoiler", "--interactive" },
                        "hint\npredicate 9\npredicate 5\nanswer 3\n" );
    ASSERT_EQ( r.code, 0 ) << r.err;
    EXPECT_TRUE( has( r.out, "hint (" ) ) << r.out;
    EXPECT_TRUE( has( r.out, "rejected:" ) ) << r.out;
    EXPECT_TRUE( has( r.out, "spoiler wins" ) ) << r.out;
    EXPECT_EQ( run( { "play", sample_path( "fig1b.coalg" ), "--interactive" } ).code, 1 );
}

TEST( Cli, OracleOnSamplesAndRandomSystems )
{
    auto r = run( { "oracle", sample_path( "metric-ts.coalg" ) } );
    ASSERT_EQ( r.code, 0 ) << r.err << r.out;
    EXPECT_TRUE( has( r.out, "0 violations" ) );
    r = run( { "oracle", "--random", "5", "--seed", "9", "--format", "json" } );
    ASSERT_EQ( r.code, 0 ) << r.err << r.out;
    EXPECT_TRUE( json::parse( r.out )[ "violations" ].empty() );
    EXPECT_EQ( run( { "oracle", sample_path( "fig1b.coalg" ) } ).code, 3 );
    EXPECT_EQ( run( { "oracle" } ).code, 1 );
}

TEST( Cli, ExitCodesForBadInput )
{
    EXPECT_EQ( run( {} ).code, 1 );
    EXPECT_EQ( run( { "frobnicate" } ).code, 1 );
    EXPECT_EQ( run( { "equiv", "/nonexistent.coalg" } ).code, 2 );
    const auto bad = temp_file( "bad.coalg", "functor: Pow(Id)\nstates: a\nalpha a = {b}\n" );
    const auto r = run( { "equiv", bad } );
    EXPECT_EQ( r.code, 2 );
    EXPECT_TRUE( has( r.err, "bad.coalg:" ) ) << r.err;
    EXPECT_EQ( run( { "equiv", sample_path( "fig1b.coalg" ), "--pair", "1" } ).code, 1 );
    EXPECT_EQ( run( { "equiv", sample_path( "fig1b.coalg" ), "--pair", "1,99" } ).code, 2 );
    EXPECT_EQ( run( { "equiv", sample_path( "fig1b.coalg" ), "--format", "xml" } ).code, 1 );
    EXPECT_EQ( run( { "distance", sample_path( "fig1a.coalg" ), "--eps", "0.1" } ).code, 1 );
    EXPECT_EQ( run( { "--help" } ).code, 0 );
}

TEST( Cli, DefaultTopFromFlag )
{
    const auto path = temp_file( "pow.coalg", "functor: Pow(Id)\nstates: a, b\nalpha a = {a}\nalpha b = {}\n" );
    const auto r = run( { "distance", path, "--top", "2", "--pair", "a,b" } );
    ASSERT_EQ( r.code, 0 ) << r.err;
    EXPECT_TRUE( has( r.out, "d(a,b) = 2" ) ) << r.out;
}
