#pragma once

#include "../classical/formula.hpp"
#include "../classical/partition.hpp"
#include "../classical/synthesis.hpp"
#include "../dsl.hpp"
#include "../metric/distance.hpp"
#include "../metric/formula.hpp"
#include "../metric/synthesis.hpp"
#include "../random_systems.hpp"
#include "../service/server.hpp"
#include "../service/session.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace coalg::cli
{

using json = nlohmann::json;

enum exit_code : int
{
    exit_ok = 0,
    exit_usage = 1,
    exit_input = 2,
    exit_refusal = 3,
    exit_check_failed = 4,
};

/// Bad flag values; reported like CLI11 parse errors.
class usage_error : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Unreadable or invalid input files and formulas.
class input_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A computation declined because of its size or precision bounds.
class refusal : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

inline Rational flag_rational( const std::string& flag, const std::string& text )
{
    try
    {
        return parse_rational( text );
    }
    catch ( const rational_syntax_error& e )
    {
        throw usage_error( flag + ": " + e.what() );
    }
}

inline std::optional< Rational > env_rational( const char* name )
{
    const char* v = std::getenv( name );
    if ( !v || !*v )
        return std::nullopt;
    try
    {
        return parse_rational( v );
    }
    catch ( const rational_syntax_error& e )
    {
        throw usage_error( std::string( name ) + ": " + e.what() );
    }
}

/// Flags shared by the commands that read a system.
struct input_flags
{
    std::string path;
    std::vector< std::string > params;
    std::string eps;
    std::string top;
    std::string format = "text";

    void add_to( CLI::App& cmd, bool file_required = true )
    {
        auto* f = cmd.add_option( "file", path, "system document (.coalg)" );
        if ( file_required )
            f->required();
        cmd.add_option( "--param", params, "override a declared parameter, NAME=p/q" );
        cmd.add_option( "--eps", eps, "shorthand for --param eps=p/q" );
        cmd.add_option( "--top", top, "default top when the document sets none (env COALGEBRA_TOP)" );
        cmd.add_option( "--format", format, "output format" )->check( CLI::IsMember( { "text", "json", "tsv" } ) );
    }

    [[nodiscard]] std::map< std::string, Rational > param_map() const
    {
        std::map< std::string, Rational > m;
        for ( const auto& p : params )
        {
            const auto eq = p.find( '=' );
            if ( eq == std::string::npos || eq == 0 )
                throw usage_error( "--param expects NAME=p/q, got '" + p + "'" );
            m[ p.substr( 0, eq ) ] = flag_rational( "--param " + p.substr( 0, eq ), p.substr( eq + 1 ) );
        }
        if ( !eps.empty() )
            m[ "eps" ] = flag_rational( "--eps", eps );
        return m;
    }

    [[nodiscard]] std::optional< Rational > default_top() const
    {
        if ( !top.empty() )
            return flag_rational( "--top", top );
        return env_rational( "COALGEBRA_TOP" );
    }

    [[nodiscard]] std::string read_text() const
    {
        std::ifstream in( path );
        if ( !in )
            throw input_error( path + ": cannot open file" );
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
};

inline std::pair< state_id, state_id > parse_pair( const System& sys, const std::string& text )
{
    if ( text.empty() )
    {
        if ( sys.size() < 2 )
            return { 0, 0 };
        return { 0, 1 };
    }
    const auto comma = text.find( ',' );
    if ( comma == std::string::npos )
        throw usage_error( "--pair expects two state ids separated by a comma" );
    const auto a = text.substr( 0, comma ), b = text.substr( comma + 1 );
    auto x = sys.find( a ), y = sys.find( b );
    if ( !x )
        throw input_error( "unknown state '" + a + "'" );
    if ( !y )
        throw input_error( "unknown state '" + b + "'" );
    return { *x, *y };
}

class app
{
public:
    app( std::istream& in, std::ostream& out, std::ostream& err ) : _in( in ), _out( out ), _err( err ) {}

    int run( std::vector< std::string > args )
    {
        CLI::App cli{ "Coalgebraic behavioural equivalence, distances, logics and games", "coalg" };
        cli.require_subcommand( 1 );
        cli.set_help_all_flag( "--help-all" );
        std::function< void() > action;

        // equiv
        auto* equiv = cli.add_subcommand( "equiv", "behavioural equivalence classes and distinguishing formulas" );
        input_flags eq_in;
        std::string eq_pair;
        bool eq_formula = false;
        eq_in.add_to( *equiv );
        equiv->add_option( "--pair", eq_pair, "x,y (default: the first two states)" );
        equiv->add_flag( "--formula", eq_formula, "print a distinguishing formula for an inequivalent pair" );
        equiv->callback( [ & ] { action = [ & ] { cmd_equiv( eq_in, eq_pair, eq_formula ); }; } );

        // distance
        auto* dist = cli.add_subcommand( "distance", "behavioural distance matrix with a convergence certificate" );
        input_flags di_in;
        std::string di_pair, di_discount = "1", di_tol;
        std::size_t di_max_iter = 100;
        di_in.add_to( *dist );
        dist->add_option( "--pair", di_pair, "x,y to report separately" );
        dist->add_option( "--discount", di_discount, "discount factor c in (0,1]" );
        dist->add_option( "--tol", di_tol, "tolerance for the contractive bound (env COALGEBRA_TOL)" );
        dist->add_option( "--max-iter", di_max_iter, "iteration cap" );
        dist->callback( [ & ] { action = [ & ] { cmd_distance( di_in, di_pair, di_discount, di_tol, di_max_iter ); }; } );

        // eval
        auto* eval = cli.add_subcommand( "eval", "evaluate a formula at every state" );
        input_flags ev_in;
        std::string ev_formula;
        bool ev_metric = false, ev_classical = false;
        ev_in.add_to( *eval );
        eval->add_option( "formula", ev_formula, "formula text" )->required();
        auto* m_flag = eval->add_flag( "--metric", ev_metric, "real-valued logic" );
        eval->add_flag( "--classical", ev_classical, "two-valued logic" )->excludes( m_flag );
        eval->callback( [ & ] { action = [ & ] { cmd_eval( ev_in, ev_formula, ev_metric, ev_classical ); }; } );

        // synth
        auto* synth = cli.add_subcommand( "synth", "synthesize a distinguishing formula" );
        input_flags sy_in;
        std::string sy_pair, sy_gap = "0", sy_tol = "0";
        bool sy_metric = false, sy_dag = false;
        std::size_t sy_max_iter = 100;
        sy_in.add_to( *synth );
        synth->add_option( "--pair", sy_pair, "x,y (default: the first two states)" );
        synth->add_flag( "--metric", sy_metric, "real-valued formula with a gap above --gap" );
        synth->add_option( "--gap", sy_gap, "required gap: the formula separates by more than this" );
        synth->add_option( "--tol", sy_tol, "refuse when the gap is within tol of the distance" );
        synth->add_option( "--max-iter", sy_max_iter, "iteration cap for the distance" );
        synth->add_flag( "--dag", sy_dag, "print shared subformulas once" );
        synth->callback(
            [ & ] { action = [ & ] { cmd_synth( sy_in, sy_pair, sy_metric, sy_gap, sy_tol, sy_max_iter, sy_dag ); }; } );

        // play
        auto* play = cli.add_subcommand( "play", "play the classical or metric game" );
        input_flags pl_in;
        std::string pl_pair, pl_budget = "0", pl_engine = "both", pl_step2 = "per-lambda", pl_slack = "0";
        bool pl_metric = false, pl_interactive = false;
        std::size_t pl_rounds = 50;
        pl_in.add_to( *play );
        play->add_option( "--pair", pl_pair, "x,y (default: the first two states)" );
        play->add_flag( "--metric", pl_metric, "play the metric game" );
        play->add_option( "--eps-budget", pl_budget, "initial budget of the metric game" );
        play->add_option( "--engine", pl_engine, "roles played by the engine" )
            ->check( CLI::IsMember( { "both", "spoiler", "defender" } ) );
        play->add_flag( "--interactive", pl_interactive, "read the other role's moves from the terminal" );
        play->add_option( "--rounds", pl_rounds, "round cap; the defender survives at the cap" );
        play->add_option( "--step2", pl_step2, "classical Step-2 condition" )
            ->check( CLI::IsMember( { "per-lambda", "lifted-order" } ) );
        play->add_option( "--slack", pl_slack, "metric defender plays its envelope minus this slack" );
        play->callback( [ & ] {
            action = [ & ] {
                cmd_play( pl_in, pl_pair, pl_metric, pl_budget, pl_engine, pl_interactive, pl_rounds, pl_step2, pl_slack );
            };
        } );

        // oracle
        auto* oracle = cli.add_subcommand( "oracle", "compare the lifting with the brute-force oracle interval" );
        input_flags or_in;
        std::string or_grid;
        std::size_t or_random = 0, or_max_states = 4;
        std::uint64_t or_seed = 1;
        or_in.add_to( *oracle, false );
        oracle->add_option( "--grid", or_grid, "grid step (default top/8)" );
        oracle->add_option( "--random", or_random, "check this many random systems instead of a file" );
        oracle->add_option( "--seed", or_seed, "seed for --random" );
        oracle->add_option( "--max-states", or_max_states, "refuse systems larger than this" );
        oracle->callback( [ & ] { action = [ & ] { cmd_oracle( or_in, or_grid, or_random, or_seed, or_max_states ); }; } );

        // serve
        auto* serve = cli.add_subcommand( "serve", "run the HTTP game service" );
        std::string host = "127.0.0.1";
        int port = 8080;
        serve->add_option( "--host", host, "bind address" );
        serve->add_option( "--port", port, "TCP port (0 picks a free one)" );
        serve->callback( [ & ] { action = [ & ] { cmd_serve( host, port ); }; } );

        try
        {
            std::reverse( args.begin(), args.end() );
            cli.parse( args );
        }
        catch ( const CLI::ParseError& e )
        {
            if ( e.get_exit_code() == 0 )
            {
                cli.exit( e, _out, _err );
                return exit_ok;
            }
            _err << "error: " << e.what() << "\n";
            return exit_usage;
        }
        try
        {
            action();
            return _status;
        }
        catch ( const usage_error& e )
        {
            _err << "error: " << e.what() << "\n";
            return exit_usage;
        }
        catch ( const input_error& e )
        {
            _err << "error: " << e.what() << "\n";
            return exit_input;
        }
        catch ( const refusal& e )
        {
            _err << "refused: " << e.what() << "\n";
            return exit_refusal;
        }
        catch ( const metric_refusal& e )
        {
            _err << "refused: " << e.what() << "\n";
            return exit_refusal;
        }
        catch ( const equivalent_states& e )
        {
            _err << "refused: " << e.what() << "\n";
            return exit_refusal;
        }
        catch ( const lift_refused& e )
        {
            _err << "refused: " << e.what() << "\n";
            return exit_refusal;
        }
        catch ( const arena_too_large& e )
        {
            _err << "refused: " << e.what() << "\n";
            return exit_refusal;
        }
        catch ( const service::request_error& e )
        {
            _err << "error: " << e.what() << "\n";
            return exit_input;
        }
        catch ( const std::exception& e )
        {
            _err << "error: " << e.what() << "\n";
            return exit_input;
        }
    }

private:
    System load( const input_flags& f )
    {
        parse_options po;
        po.params = f.param_map();
        po.top = f.default_top();
        const auto text = f.read_text();
        parse_result r;
        try
        {
            r = parse_system_with_warnings( text, po );
        }
        catch ( const parse_error& e )
        {
            throw input_error( f.path + ":" + e.what() );
        }
        for ( const auto& w : r.warnings )
            _err << "warning: " << w << "\n";
        const auto v = validate_system( r.system );
        for ( const auto& finding : v.findings )
            if ( finding.level != validation_finding::severity::info )
                _err << ( finding.level == validation_finding::severity::error ? "invalid: " : "warning: " ) << finding.message
                     << "\n";
        if ( !v.valid() )
            throw input_error( f.path + ": system failed validation" );
        return std::move( r.system );
    }

    std::string block_text( const System& sys, const std::vector< state_id >& b ) const
    {
        std::string s = "{";
        for ( std::size_t i = 0; i < b.size(); ++i )
            s += ( i ? "," : "" ) + sys.states[ b[ i ] ];
        return s + "}";
    }

    void cmd_equiv( const input_flags& f, const std::string& pair, bool want_formula )
    {
        const auto sys = load( f );
        const auto part = behavioural_equivalence( sys );
        const auto blocks = part.blocks();
        const auto [ x, y ] = parse_pair( sys, pair );
        const bool same = part.equivalent( x, y );
        cformula phi;
        if ( want_formula && !same )
            phi = synthesize_distinguishing_formula( sys, x, y );

        if ( f.format == "json" )
        {
            json j{ { "schema_version", 1 }, { "system", sys.name } };
            j[ "blocks" ] = json::array();
            for ( const auto& b : blocks )
            {
                json a = json::array();
                for ( auto z : b )
                    a.push_back( sys.states[ z ] );
                j[ "blocks" ].push_back( a );
            }
            j[ "pair" ] = { sys.states[ x ], sys.states[ y ] };
            j[ "equivalent" ] = same;
            if ( phi )
            {
                j[ "formula" ] = to_string( *phi );
                j[ "modal_depth" ] = modal_depth( *phi );
            }
            _out << j.dump( 2 ) << "\n";
            return;
        }
        if ( f.format == "tsv" )
        {
            _out << "state\tblock\n";
            for ( state_id z = 0; z < sys.size(); ++z )
                _out << sys.states[ z ] << "\t" << part.block_of[ z ] << "\n";
            return;
        }
        _out << blocks.size() << ( blocks.size() == 1 ? " block:" : " blocks:" );
        for ( const auto& b : blocks )
            _out << " " << block_text( sys, b );
        _out << "\n";
        _out << sys.states[ x ] << ( same ? " ~ " : " !~ " ) << sys.states[ y ] << "\n";
        if ( phi )
        {
            const auto v = eval_classical( sys, phi );
            _out << "formula: " << to_string( *phi ) << "\n";
            _out << "modal depth: " << modal_depth( *phi ) << "\n";
            _out << "holds at " << sys.states[ x ] << ": " << ( v[ x ] ? "yes" : "no" ) << ", at " << sys.states[ y ]
                 << ": " << ( v[ y ] ? "yes" : "no" ) << "\n";
        }
    }

    void cmd_distance( const input_flags& f, const std::string& pair, const std::string& discount, const std::string& tol,
                       std::size_t max_iter )
    {
        const auto sys = load( f );
        distance_options opt;
        opt.discount = flag_rational( "--discount", discount );
        if ( opt.discount <= 0 || opt.discount > 1 )
            throw usage_error( "--discount must lie in (0,1]" );
        if ( !tol.empty() )
            opt.tol = flag_rational( "--tol", tol );
        else if ( auto t = env_rational( "COALGEBRA_TOL" ) )
            opt.tol = *t;
        if ( opt.tol <= 0 )
            throw usage_error( "tolerance must be positive" );
        opt.max_iter = max_iter;
        const auto r = behavioural_distance( sys, opt );
        const auto n = sys.size();
        std::optional< std::pair< state_id, state_id > > p;
        if ( !pair.empty() || n >= 2 )
            p = parse_pair( sys, pair );
        const auto& c = r.certificate;

        if ( f.format == "json" )
        {
            json j{ { "schema_version", 1 }, { "system", sys.name }, { "top", to_string( sys.top ) } };
            j[ "states" ] = sys.states;
            j[ "matrix" ] = json::array();
            for ( state_id a = 0; a < n; ++a )
            {
                json row = json::array();
                for ( state_id b = 0; b < n; ++b )
                    row.push_back( to_string( r.d( a, b ) ) );
                j[ "matrix" ].push_back( row );
            }
            j[ "certificate" ] = { { "mode", to_string( c.mode ) },
                                   { "iterations", c.iterations },
                                   { "bound", to_string( c.bound ) } };
            if ( p )
                j[ "pair" ] = { { "x", sys.states[ p->first ] },
                                { "y", sys.states[ p->second ] },
                                { "distance", to_string( r.d( p->first, p->second ) ) } };
            _out << j.dump( 2 ) << "\n";
            return;
        }
        if ( f.format == "tsv" )
        {
            for ( state_id b = 0; b < n; ++b )
                _out << "\t" << sys.states[ b ];
            _out << "\n";
            for ( state_id a = 0; a < n; ++a )
            {
                _out << sys.states[ a ];
                for ( state_id b = 0; b < n; ++b )
                    _out << "\t" << to_string( r.d( a, b ) );
                _out << "\n";
            }
            _out << "\n# mode\t" << to_string( c.mode ) << "\n# iterations\t" << c.iterations << "\n# bound\t"
                 << to_string( c.bound ) << "\n";
            return;
        }
        std::size_t w = 1;
        for ( state_id a = 0; a < n; ++a )
        {
            w = std::max( w, sys.states[ a ].size() );
            for ( state_id b = 0; b < n; ++b )
                w = std::max( w, to_string( r.d( a, b ) ).size() );
        }
        _out << std::setw( static_cast< int >( w ) ) << "";
        for ( state_id b = 0; b < n; ++b )
            _out << "  " << std::setw( static_cast< int >( w ) ) << sys.states[ b ];
        _out << "\n";
        for ( state_id a = 0; a < n; ++a )
        {
            _out << std::setw( static_cast< int >( w ) ) << sys.states[ a ];
            for ( state_id b = 0; b < n; ++b )
                _out << "  " << std::setw( static_cast< int >( w ) ) << to_string( r.d( a, b ) );
            _out << "\n";
        }
        if ( p )
            _out << "d(" << sys.states[ p->first ] << "," << sys.states[ p->second ] << ") = "
                 << to_string( r.d( p->first, p->second ) ) << "\n";
        _out << "certificate: " << to_string( c.mode ) << " after " << c.iterations << " iterations, error bound "
             << to_string( c.bound ) << "\n";
    }

    void cmd_eval( const input_flags& f, const std::string& text, bool metric, bool classical )
    {
        const auto sys = load( f );
        std::vector< std::string > values;
        std::string logic;
        auto run_classical = [ & ] {
            auto phi = parse_classical_formula( text );
            const auto v = eval_classical( sys, phi );
            for ( bool b : v )
                values.push_back( b ? "1" : "0" );
            logic = "classical";
        };
        auto run_metric = [ & ] {
            auto phi = parse_metric_formula( text );
            metric_evaluator ev( sys );
            check_metric_formula( ev.gammas(), phi, sys.top );
            for ( const auto& v : ev( phi ) )
                values.push_back( to_string( v ) );
            logic = "metric";
        };
        try
        {
            if ( classical )
                run_classical();
            else if ( metric )
                run_metric();
            else
            {
                // classical when the text parses and its modalities are λs, else metric
                try
                {
                    run_classical();
                }
                catch ( const std::exception& )
                {
                    values.clear();
                    run_metric();
                }
            }
        }
        catch ( const formula_syntax_error& e )
        {
            throw input_error( "formula: " + std::string( e.what() ) );
        }
        catch ( const std::out_of_range& e )
        {
            throw input_error( "formula: unknown modality" );
        }
        catch ( const std::invalid_argument& e )
        {
            throw input_error( "formula: " + std::string( e.what() ) );
        }

        if ( f.format == "json" )
        {
            json j{ { "schema_version", 1 }, { "logic", logic }, { "formula", text } };
            j[ "values" ] = json::object();
            for ( state_id z = 0; z < sys.size(); ++z )
                j[ "values" ][ sys.states[ z ] ] = values[ z ];
            _out << j.dump( 2 ) << "\n";
            return;
        }
        if ( f.format == "tsv" )
            _out << "state\tvalue\n";
        for ( state_id z = 0; z < sys.size(); ++z )
            _out << sys.states[ z ] << ( f.format == "tsv" ? "\t" : "\t" ) << values[ z ] << "\n";
    }

    void cmd_synth( const input_flags& f, const std::string& pair, bool metric, const std::string& gap_text,
                    const std::string& tol_text, std::size_t max_iter, bool dag )
    {
        const auto sys = load( f );
        const auto [ x, y ] = parse_pair( sys, pair );
        std::string text, logic;
        std::size_t depth = 0, size = 0;
        std::string vx, vy;
        if ( metric )
        {
            const auto gap = flag_rational( "--gap", gap_text );
            const auto tol = flag_rational( "--tol", tol_text );
            auto phi = synthesize_metric_distinguishing_formula( sys, x, y, gap, tol, max_iter );
            const auto v = eval_metric( sys, phi );
            text = dag ? to_dag_string( phi ) : to_string( *phi ) + "\n";
            depth = modal_depth( *phi );
            size = tree_size( *phi );
            vx = to_string( v[ x ] );
            vy = to_string( v[ y ] );
            logic = "metric";
        }
        else
        {
            auto phi = synthesize_distinguishing_formula( sys, x, y );
            const auto v = eval_classical( sys, phi );
            text = to_string( *phi ) + "\n";
            depth = modal_depth( *phi );
            vx = v[ x ] ? "1" : "0";
            vy = v[ y ] ? "1" : "0";
            logic = "classical";
        }
        if ( f.format == "json" )
        {
            json j{ { "schema_version", 1 },
                    { "logic", logic },
                    { "pair", { sys.states[ x ], sys.states[ y ] } },
                    { "formula", text.substr( 0, text.size() - 1 ) },
                    { "modal_depth", depth },
                    { "values", { vx, vy } } };
            if ( metric )
                j[ "tree_size" ] = size;
            _out << j.dump( 2 ) << "\n";
            return;
        }
        _out << text;
        _out << "modal depth: " << depth << "\n";
        if ( metric )
            _out << "tree size: " << size << "\n";
        _out << "value at " << sys.states[ x ] << ": " << vx << ", at " << sys.states[ y ] << ": " << vy << "\n";
    }

    static std::string predicate_text( const System& sys, const json& p )
    {
        std::string s = "{";
        for ( state_id z = 0; z < sys.size(); ++z )
            s += ( z ? ", " : "" ) + sys.states[ z ] + ": " + p.value( sys.states[ z ], std::string( "0" ) );
        return s + "}";
    }

    static std::string move_text( const System& sys, const json& e )
    {
        const auto& m = e[ "move" ];
        const auto actor = e[ "actor" ].get< std::string >();
        const auto type = m[ "type" ].get< std::string >();
        std::string s = actor + ": ";
        if ( type == "pick" )
            s += "s = " + m[ "state" ].get< std::string >() + ", p1 = " + predicate_text( sys, m[ "predicate" ] );
        else if ( type == "predicate" )
            s += "p2 = " + predicate_text( sys, m[ "predicate" ] );
        else if ( type == "choose" )
            s += "p" + std::to_string( m[ "index" ].get< int >() ) + ", x' = " + m[ "state" ].get< std::string >();
        else
            s += "y' = " + m[ "state" ].get< std::string >();
        return s;
    }

    void cmd_play( const input_flags& f, const std::string& pair, bool metric, const std::string& budget,
                   const std::string& engine, bool interactive, std::size_t rounds, const std::string& step2,
                   const std::string& slack )
    {
        if ( interactive && engine == "both" )
            throw usage_error( "--interactive needs --engine spoiler or --engine defender" );
        if ( !interactive && engine != "both" )
            throw usage_error( "--engine " + engine + " needs --interactive" );
        const auto sys = load( f );
        const auto [ x, y ] = parse_pair( sys, pair );
        service::session_config cfg;
        cfg.system_text = f.read_text();
        cfg.params = f.param_map();
        cfg.default_top = f.default_top();
        cfg.kind = metric ? service::game_kind::metric : service::game_kind::classical;
        cfg.human = engine == "both"      ? service::human_role::none
                    : engine == "spoiler" ? service::human_role::defender
                                          : service::human_role::spoiler;
        cfg.x = sys.states[ x ];
        cfg.y = sys.states[ y ];
        cfg.budget = flag_rational( "--eps-budget", budget );
        cfg.mode = step2 == "per-lambda" ? step2_mode::per_lambda : step2_mode::lifted_order;
        cfg.slack = flag_rational( "--slack", slack );
        cfg.round_cap = rounds;
        service::session s( "cli", cfg );
        std::size_t shown = 0;
        auto flush = [ & ] {
            const auto h = s.history()[ "entries" ];
            for ( ; shown < h.size(); ++shown )
            {
                const auto& e = h[ shown ];
                if ( e[ "move" ][ "type" ] == "pick" )
                    round_header( e, f.format );
                if ( f.format == "text" )
                    _out << "  " << move_text( s.system(), e ) << "\n";
            }
        };
        if ( interactive )
        {
            while ( true )
            {
                flush();
                if ( s.finished() )
                    break;
                prompt( s );
                std::string line;
                if ( !std::getline( _in, line ) )
                {
                    _out << "input closed, game abandoned\n";
                    return;
                }
                auto mv = parse_move_line( s, line );
                if ( !mv )
                    continue;
                try
                {
                    s.submit( *mv );
                }
                catch ( const service::request_error& e )
                {
                    _out << "rejected: " << e.what() << "\n";
                }
                catch ( const illegal_move& e )
                {
                    _out << "rejected: " << e.what() << "\n";
                    for ( const auto& r : e.report() )
                        _out << "  " << r.name << ": " << r.lhs << " vs " << r.rhs << ", slack " << r.slack
                             << ( r.ok ? "" : "  (violated)" ) << "\n";
                }
            }
        }
        else
            flush();
        const auto st = s.state_json();
        if ( f.format == "json" )
        {
            auto v = s.view();
            v.erase( "system" );
            v[ "history" ] = s.history()[ "entries" ];
            _out << v.dump( 2 ) << "\n";
            return;
        }
        if ( f.format == "tsv" )
        {
            _out << "seq\tactor\tmove\tphase_after\n";
            for ( const auto& e : s.history()[ "entries" ] )
                _out << e[ "seq" ] << "\t" << e[ "actor" ].get< std::string >() << "\t" << e[ "move" ].dump() << "\t"
                     << e[ "phase_after" ].get< std::string >() << "\n";
        }
        if ( st[ "winner" ].is_null() )
            _out << "defender survives " << st[ "round" ] << " rounds\n";
        else
            _out << st[ "winner" ].get< std::string >() << " wins: " << st[ "reason" ].get< std::string >() << "\n";
    }

    void round_header( const json& e, const std::string& format )
    {
        if ( format != "text" )
            return;
        const auto& pos = e[ "position" ];
        _out << "round " << pos[ "round" ].get< std::size_t >() + 1 << ": (" << pos[ "pair" ][ 0 ].get< std::string >() << ","
             << pos[ "pair" ][ 1 ].get< std::string >() << ")";
        if ( pos.contains( "budget" ) )
            _out << " budget " << pos[ "budget" ].get< std::string >();
        _out << "\n";
    }

    void prompt( const service::session& s )
    {
        const auto st = s.state_json();
        const auto& sys = s.system();
        _out << "[" << st[ "phase" ].get< std::string >() << "] pair (" << st[ "pair" ][ 0 ].get< std::string >() << ","
             << st[ "pair" ][ 1 ].get< std::string >() << ")";
        if ( st.contains( "budget" ) )
            _out << " budget " << st[ "budget" ].get< std::string >();
        _out << "\n";
        if ( st.contains( "p1" ) )
            _out << "  s = " << st[ "s" ].get< std::string >() << ", p1 = " << predicate_text( sys, st[ "p1" ] ) << "\n";
        if ( st.contains( "p2" ) )
            _out << "  p2 = " << predicate_text( sys, st[ "p2" ] ) << "\n";
        _out << "moves: pick STATE [Z=q ...] | predicate [Z=q ...] | choose 1|2 STATE | answer STATE | hint | quit\n> "
             << std::flush;
    }

    /// `pick 1 4=1 5=1/2`, `predicate 4 5 7` (a bare state means top),
    /// `choose 2 5`, `answer 3`, `hint`, `quit`.
    std::optional< json > parse_move_line( const service::session& s, const std::string& line )
    {
        std::istringstream is( line );
        std::vector< std::string > w;
        for ( std::string t; is >> t; )
            w.push_back( t );
        if ( w.empty() )
            return std::nullopt;
        auto predicate = [ & ]( std::size_t from ) {
            json p = json::object();
            for ( std::size_t k = from; k < w.size(); ++k )
            {
                const auto eq = w[ k ].find( '=' );
                if ( eq == std::string::npos )
                    p[ w[ k ] ] = to_string( s.system().top );
                else
                    p[ w[ k ].substr( 0, eq ) ] = w[ k ].substr( eq + 1 );
            }
            return p;
        };
        const auto& c = w[ 0 ];
        if ( c == "quit" )
            throw input_error( "game abandoned" );
        if ( c == "hint" )
        {
            const auto h = s.hint();
            _out << "hint (" << h[ "strategy" ].get< std::string >() << "): " << h[ "move" ].dump() << "\n  "
                 << h[ "rationale" ].get< std::string >() << "\n";
            return std::nullopt;
        }
        if ( c == "pick" && w.size() >= 2 )
            return json{ { "type", "pick" }, { "state", w[ 1 ] }, { "predicate", predicate( 2 ) } };
        if ( c == "predicate" )
            return json{ { "type", "predicate" }, { "predicate", predicate( 1 ) } };
        if ( c == "choose" && w.size() == 3 && ( w[ 1 ] == "1" || w[ 1 ] == "2" ) )
            return json{ { "type", "choose" }, { "index", std::stoi( w[ 1 ] ) }, { "state", w[ 2 ] } };
        if ( c == "answer" && w.size() == 2 )
            return json{ { "type", "answer" }, { "state", w[ 1 ] } };
        _out << "unrecognized move '" << line << "'\n";
        return std::nullopt;
    }

    void cmd_oracle( const input_flags& f, const std::string& grid_text, std::size_t random, std::uint64_t seed,
                     std::size_t max_states )
    {
        struct tally
        {
            std::size_t checks = 0, systems = 0;
            std::vector< std::string > violations;
        } t;
        auto check_system = [ & ]( const System& sys, const std::string& label ) {
            if ( sys.size() > max_states )
                throw refusal( label + ": the oracle enumerates at most " + std::to_string( max_states ) +
                               " states, system has " + std::to_string( sys.size() ) );
            const Rational grid = grid_text.empty() ? Rational( sys.top / 8 ) : flag_rational( "--grid", grid_text );
            const auto gammas = gammas_of( sys );
            distance_options opt;
            opt.max_iter = 20;
            const auto dist = behavioural_distance( sys, opt );
            ++t.systems;
            for ( std::size_t i = 0; i < dist.iterates.size(); ++i )
                for ( state_id a = 0; a < sys.size(); ++a )
                    for ( state_id b = a + 1; b < sys.size(); ++b )
                    {
                        const auto& d = dist.iterates[ i ];
                        const auto v = lift_distance( sys, gammas, d, sys.alpha[ a ], sys.alpha[ b ] ).value;
                        const auto iv =
                            lift_distance_oracle( sys, gammas, d, sys.alpha[ a ], sys.alpha[ b ], grid, max_states );
                        ++t.checks;
                        if ( !iv.contains( v ) )
                            t.violations.push_back( label + " d_" + std::to_string( i ) + " (" + sys.states[ a ] + "," +
                                                    sys.states[ b ] + "): lift " + to_string( v ) + " outside [" +
                                                    to_string( iv.lo ) + ", " + to_string( iv.hi ) + "]" );
                    }
        };
        if ( random > 0 )
        {
            std::mt19937_64 rng( seed );
            for ( std::size_t k = 0; k < random; ++k )
            {
                const auto fam = static_cast< random_family >( k % 3 );
                const auto n = 1 + static_cast< std::size_t >( rng() % max_states );
                check_system( random_system( fam, n, rng ), "random#" + std::to_string( k ) );
            }
        }
        else
        {
            if ( f.path.empty() )
                throw usage_error( "oracle needs a file or --random N" );
            check_system( load( f ), f.path );
        }
        if ( f.format == "json" )
        {
            json j{ { "schema_version", 1 },
                    { "systems", t.systems },
                    { "checks", t.checks },
                    { "violations", t.violations } };
            _out << j.dump( 2 ) << "\n";
        }
        else
        {
            for ( const auto& v : t.violations )
                _out << "violation: " << v << "\n";
            _out << "checked " << t.checks << " liftings on " << t.systems << ( t.systems == 1 ? " system" : " systems" )
                 << ", " << t.violations.size() << " violations\n";
        }
        if ( !t.violations.empty() )
            _status = exit_check_failed;
    }

    void cmd_serve( const std::string& host, int port )
    {
        service::game_server server;
        if ( server.bind( host, port ) < 0 )
            throw input_error( "cannot bind " + host + ":" + std::to_string( port ) );
        _out << "listening on http://" << host << ":" << server.port() << std::endl;
        server.run();
    }

    std::istream& _in;
    std::ostream& _out;
    std::ostream& _err;
    int _status = exit_ok;
};

inline int run( int argc, char** argv )
{
    std::vector< std::string > args( argv + 1, argv + argc );
    app a( std::cin, std::cout, std::cerr );
    return a.run( std::move( args ) );
}

} // namespace coalg::cli
