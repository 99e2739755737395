// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include "property_suites.hpp"
#include "support.hpp"

#include "coalg/classical/formula.hpp"
#include "coalg/classical/game.hpp"
#include "coalg/classical/synthesis.hpp"
#include "coalg/cli/app.hpp"
#include "coalg/metric/game.hpp"
#include "coalg/metric/lifting.hpp"
#include "coalg/metric/synthesis.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace coalg;
using testing_support::q;
using json = nlohmann::json;

namespace
{

struct verdict
{
    bool ok = true;
    std::string detail;

    void fail( const std::string& why )
    {
        if ( ok )
            detail = why;
        ok = false;
    }
};

struct cli_run
{
    int code;
    std::string out;
};

cli_run run_cli( std::vector< std::string > args )
{
    std::istringstream in;
    std::ostringstream out, err;
    const int code = cli::app( in, out, err ).run( std::move( args ) );
    return { code, out.str() + err.str() };
}

std::string ms( double v )
{
    std::ostringstream os;
    os.precision( 3 );
    os << std::fixed << v / 1000.0 << "s";
    return os.str();
}

// Uniformly random metric spoiler on the grid ⊤/8.
struct random_metric_spoiler
{
    const System* sys;
    std::mt19937_64* rng;

    metric_move operator()( const metric_game_state& st ) const
    {
        std::bernoulli_distribution coin( 0.5 );
        if ( st.phase == game_phase::await_spoiler_pick )
            return metric_move::pick( coin( *rng ) ? st.x : st.y, testing_support::random_predicate( sys->size(), *rng, sys->top ) );
        std::uniform_int_distribution< state_id > any( 0, sys->size() - 1 );
        return metric_move::choose( coin( *rng ) ? 1 : 2, any( *rng ) );
    }
};

verdict fig1a_classical()
{
    verdict v;
    for ( const char* eps : { "0", "1/8", "1/4" } )
    {
        const auto r = run_cli( { "equiv", testing_support::sample_path( "fig1a.coalg" ), "--eps", eps, "--pair", "1,2",
                                  "--formula", "--format", "json" } );
        if ( r.code != 0 )
        {
            v.fail( std::string( "equiv failed at eps=" ) + eps + ": " + r.out );
            return v;
        }
        const auto j = json::parse( r.out );
        const bool want_equiv = std::string( eps ) == "0";
        if ( j[ "equivalent" ] != want_equiv )
            v.fail( std::string( "wrong verdict at eps=" ) + eps );
        if ( want_equiv )
            continue;
        const auto sys = testing_support::fig1a( parse_rational( eps ) );
        const auto phi = parse_classical_formula( j[ "formula" ].get< std::string >() );
        const auto val = eval_classical( sys, phi );
        if ( val[ sys.index_of( "1" ) ] == val[ sys.index_of( "2" ) ] )
            v.fail( std::string( "formula does not separate at eps=" ) + eps );
        v.detail = "formula " + j[ "formula" ].get< std::string >();
    }
    return v;
}

verdict fig1a_metric()
{
    verdict v;
    for ( const char* eps : { "0", "1/8", "1/4" } )
    {
        const auto r = run_cli( { "distance", testing_support::sample_path( "fig1a.coalg" ), "--eps", eps, "--format", "json" } );
        if ( r.code != 0 )
        {
            v.fail( std::string( "distance failed at eps=" ) + eps + ": " + r.out );
            return v;
        }
        const auto j = json::parse( r.out );
        if ( j[ "matrix" ][ 0 ][ 1 ] != eps )
            v.fail( std::string( "d(1,2) = " ) + j[ "matrix" ][ 0 ][ 1 ].get< std::string >() + " at eps=" + eps );
        if ( j[ "certificate" ][ "mode" ] != "stabilized-exact" )
            v.fail( std::string( "certificate " ) + j[ "certificate" ][ "mode" ].get< std::string >() + " at eps=" + eps );
    }
    if ( v.ok )
        v.detail = "d(1,2) = eps for eps in {0, 1/8, 1/4}, stabilized-exact";
    return v;
}

verdict fig1b_spoiler()
{
    verdict v;
    const auto sys = testing_support::load_sample( "fig1b.coalg" );
    const classical_game g( sys );
    const auto x = sys.index_of( "1" ), y = sys.index_of( "2" );
    const auto phi = synthesize_distinguishing_formula( sys, x, y );
    const auto md = modal_depth( *phi );
    classical_spoiler_engine spoiler( g, phi );
    const classical_defender_engine defender( g );
    const auto r = play_classical(
        g, g.start( x, y ), [ & ]( const auto& st ) { return std::optional( spoiler.reply( st ) ); },
        [ & ]( const auto& st ) { return defender.reply( st ); }, 50 );
    if ( r.winner != std::optional( player::spoiler ) || r.rounds > md )
        v.fail( "engine defender not beaten within md" );
    std::size_t positions = 0;
    if ( !spoiler_beats_all_defenders( g, g.start( x, y ), classical_spoiler_engine( g, phi ), md, &positions ) )
        v.fail( "some defender strategy survives md rounds" );
    if ( v.ok )
        v.detail = to_string( *phi ) + ", md " + std::to_string( md ) + ", " + std::to_string( positions ) +
                   " spoiler positions against all 2^9 predicates";
    return v;
}

verdict oracle_equivalence()
{
    verdict v;
    std::mt19937_64 rng( 20250101 );
    std::size_t checks = 0, violations = 0;
    for ( int k = 0; k < 200; ++k )
    {
        const auto fam = static_cast< random_family >( k % 3 );
        const auto n = std::uniform_int_distribution< std::size_t >( 1, 4 )( rng );
        const auto sys = random_system( fam, n, rng );
        const auto gammas = gammas_of( sys );
        distance_options opt;
        opt.max_iter = 20;
        auto metrics = behavioural_distance( sys, opt ).iterates;
        metrics.push_back( testing_support::random_pmetric( n, rng, sys.top ) );
        for ( const auto& d : metrics )
            for ( state_id a = 0; a < n; ++a )
                for ( state_id b = a + 1; b < n; ++b )
                {
                    const auto val = lift_distance( sys, gammas, d, sys.alpha[ a ], sys.alpha[ b ] ).value;
                    const auto iv = lift_distance_oracle( sys, gammas, d, sys.alpha[ a ], sys.alpha[ b ], sys.top / 8 );
                    ++checks;
                    if ( !iv.contains( val ) )
                    {
                        ++violations;
                        v.fail( "lift " + to_string( val ) + " outside [" + to_string( iv.lo ) + ", " + to_string( iv.hi ) +
                                "] on\n" + serialize_system( sys ) );
                    }
                }
    }
    if ( v.ok )
        v.detail = std::to_string( checks ) + " liftings on 200 systems, " + std::to_string( violations ) + " violations";
    return v;
}

verdict quantitative_hm()
{
    verdict v;
    std::mt19937_64 rng( 20250102 );
    int found = 0, attempts = 0;
    std::size_t pairs = 0;
    Rational worst = 0;
    while ( found < 100 && attempts < 2000 )
    {
        ++attempts;
        const auto n = std::uniform_int_distribution< std::size_t >( 1, 5 )( rng );
        const auto sys = random_system( random_family::dist_term, n, rng );
        distance_options opt;
        opt.max_iter = 20;
        auto dist = behavioural_distance( sys, opt );
        if ( dist.certificate.mode != certificate_mode::stabilized_exact )
            continue;
        ++found;
        const auto depth = dist.certificate.iterations;
        const auto d = dist.d;
        metric_synthesizer syn( sys, std::move( dist ) );
        for ( state_id x = 0; x < n; ++x )
            for ( state_id y = x + 1; y < n; ++y )
            {
                ++pairs;
                const auto l = logical_distance( syn, x, y, depth );
                const auto diff = rabs( l.value - d( x, y ) );
                worst = rmax( worst, diff );
                if ( diff > q( 1, 64 ) )
                    v.fail( "logical " + to_string( l.value ) + " vs behavioural " + to_string( d( x, y ) ) + " on\n" +
                            serialize_system( sys ) );
            }
    }
    if ( found < 100 )
        v.fail( "only " + std::to_string( found ) + " stabilizing systems in " + std::to_string( attempts ) + " draws" );
    if ( v.ok )
        v.detail = std::to_string( found ) + " systems, " + std::to_string( pairs ) + " pairs, max deviation " + to_string( worst );
    return v;
}

verdict metric_game_strategies()
{
    verdict v;
    std::vector< System > corpus;
    for ( const auto& eps : { q( 0 ), q( 1, 8 ), q( 1, 4 ) } )
        corpus.push_back( testing_support::fig1a( eps ) );
    std::mt19937_64 rng( 20250103 );
    for ( int k = 0; k < 24; ++k )
        corpus.push_back( random_system( static_cast< random_family >( k % 3 ), 2 + k % 3, rng ) );

    struct instance
    {
        std::size_t sys;
        state_id x, y;
    };
    std::vector< instance > all;
    std::vector< pmetric > dists;
    for ( std::size_t s = 0; s < corpus.size(); ++s )
    {
        dists.push_back( behavioural_distance( corpus[ s ] ).d );
        for ( state_id x = 0; x < corpus[ s ].size(); ++x )
            for ( state_id y = 0; y < corpus[ s ].size(); ++y )
                all.push_back( { s, x, y } );
    }

    std::size_t formula_games = 0, random_games = 0, completeness_games = 0;
    for ( const auto& in : all )
    {
        const auto& sys = corpus[ in.sys ];
        const auto& d = dists[ in.sys ];
        const metric_game g( sys );
        const metric_defender_engine defender( g, d );
        auto def = [ & ]( const metric_game_state& st ) { return defender.reply( st ); };
        const auto dxy = d( in.x, in.y );
        if ( dxy == 0 )
            continue;
        const auto phi = logical_distance( sys, in.x, in.y, 100 ).formula;
        const auto ev = eval_metric( sys, phi );
        const auto gap = rabs( ev[ in.x ] - ev[ in.y ] );

        // soundness against the formula spoiler from budget d
        metric_spoiler_engine sp( g, phi );
        auto r = play_metric( g, g.start( in.x, in.y, dxy ), [ & ]( const auto& st ) { return std::optional( sp.reply( st ) ); }, def, 50 );
        ++formula_games;
        if ( r.winner == std::optional( player::spoiler ) )
            v.fail( "formula spoiler beats the defender from d on\n" + serialize_system( sys ) );

        // completeness from g/2 and 3g/4
        for ( const Rational& eps : { Rational( gap / 2 ), Rational( gap * 3 / 4 ) } )
        {
            metric_spoiler_engine attacker( g, phi );
            r = play_metric( g, g.start( in.x, in.y, eps ), [ & ]( const auto& st ) { return std::optional( attacker.reply( st ) ); },
                             def, 50 );
            ++completeness_games;
            if ( r.winner != std::optional( player::spoiler ) || r.rounds > modal_depth( *phi ) )
                v.fail( "formula spoiler fails from budget " + to_string( eps ) + " on\n" + serialize_system( sys ) );
        }
    }

    // 1000 seeded random spoilers spread over every pair of the corpus
    for ( int k = 0; k < 1000; ++k )
    {
        const auto& in = all[ static_cast< std::size_t >( k ) % all.size() ];
        const auto& sys = corpus[ in.sys ];
        const metric_game g( sys );
        const metric_defender_engine defender( g, dists[ in.sys ] );
        std::mt19937_64 srng( 7000 + k );
        const auto r = play_metric( g, g.start( in.x, in.y, dists[ in.sys ]( in.x, in.y ) ), random_metric_spoiler{ &sys, &srng },
                                    [ & ]( const auto& st ) { return defender.reply( st ); }, 50 );
        ++random_games;
        if ( r.winner == std::optional( player::spoiler ) )
            v.fail( "random spoiler #" + std::to_string( k ) + " wins on\n" + serialize_system( sys ) );
    }
    if ( v.ok )
        v.detail = std::to_string( formula_games ) + " formula and " + std::to_string( random_games ) +
                   " random spoilers held off for 50 rounds; " + std::to_string( completeness_games ) +
                   " spoiler wins within md";
    return v;
}

verdict property_suites_all()
{
    verdict v;
    const std::pair< const char*, std::function< property_suites::failure() > > suites[] = {
        { "pseudometric", [] { return property_suites::lifting_preserves_pseudometrics( 1000, 4001 ); } },
        { "monotone", [] { return property_suites::monotone_predicate_lifting( 1000, 4002 ); } },
        { "envelope", [] { return property_suites::upper_envelope( 1000, 4003 ); } },
        { "formula", [] { return property_suites::formulas_nonexpansive( 1000, 4004 ); } },
        { "decomposition", [] { return property_suites::lifting_decomposes( 1000, 4005 ); } },
        { "prop38", [] { return property_suites::lifting_monotone_and_nonexpansive( 1000, 4006 ); } },
    };
    for ( const auto& [ name, run ] : suites )
        if ( const auto f = run() )
            v.fail( std::string( name ) + ": " + *f );
    if ( v.ok )
        v.detail = "6 suites x 1000 cases";
    return v;
}

verdict fig2_truncation()
{
    verdict v;
    Rational previous = 2;
    for ( const int k : { 4, 8 } )
    {
        const auto sys = testing_support::load_sample( "fig2-k" + std::to_string( k ) + ".coalg" );
        const auto r = behavioural_distance( sys );
        const auto d = r.d( sys.index_of( "x" ), sys.index_of( "y" ) );
        const Rational bound( 1, 1L << k );
        if ( r.certificate.mode != certificate_mode::stabilized_exact )
            v.fail( "k=" + std::to_string( k ) + " not certified" );
        if ( d > bound )
            v.fail( "k=" + std::to_string( k ) + ": d = " + to_string( d ) + " above " + to_string( bound ) );
        if ( !( d < previous ) )
            v.fail( "distance does not decrease in k" );
        v.detail += ( v.detail.empty() ? "" : ", " ) + std::string( "k=" ) + std::to_string( k ) + ": " + to_string( d );
        previous = d;
    }
    return v;
}

} // namespace

int main()
{
    struct criterion
    {
        const char* name;
        double limit_ms;
        std::function< verdict() > check;
    };
    const criterion criteria[] = {
        { "Fig. 1a classical equivalence", 1000, fig1a_classical },
        { "Fig. 1a metric distance", 1000, fig1a_metric },
        { "Fig. 1b spoiler beats all defenders", 30000, fig1b_spoiler },
        { "lifting within oracle interval", 0, oracle_equivalence },
        { "logical distance matches behavioural distance", 0, quantitative_hm },
        { "metric game soundness and completeness", 0, metric_game_strategies },
        { "property suites", 0, property_suites_all },
        { "Fig. 2 truncation", 0, fig2_truncation },
    };
    int failed = 0, n = 0;
    for ( const auto& c : criteria )
    {
        ++n;
        const auto t0 = std::chrono::steady_clock::now();
        verdict v;
        try
        {
            v = c.check();
        }
        catch ( const std::exception& e )
        {
            v.fail( std::string( "exception: " ) + e.what() );
        }
        const double elapsed = std::chrono::duration< double, std::milli >( std::chrono::steady_clock::now() - t0 ).count();
        if ( c.limit_ms > 0 && elapsed > c.limit_ms )
            v.fail( "took " + ms( elapsed ) + ", limit " + ms( c.limit_ms ) );
        failed += !v.ok;
        std::cout << ( v.ok ? "PASS" : "FAIL" ) << " [" << n << "] " << c.name << " (" << ms( elapsed ) << "): " << v.detail
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
