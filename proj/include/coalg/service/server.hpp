#pragma once

#include "session.hpp"

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <memory>
#include <string>
#include <thread>

namespace coalg::service
{

/// HTTP front end for a session_store:
///   POST /sessions, GET /sessions/:id, POST /sessions/:id/moves,
///   GET /sessions/:id/hint, GET /sessions/:id/history,
///   GET /sessions/:id/events (server-sent events, one per move).
class game_server
{
public:
    game_server()
    {
        _http.set_default_headers( { { "Access-Control-Allow-Origin", "*" },
                                     { "Access-Control-Allow-Headers", "Content-Type" },
                                     { "Access-Control-Allow-Methods", "GET, POST, OPTIONS" } } );
        _http.Options( ".*", []( const httplib::Request&, httplib::Response& res ) { res.status = 204; } );
        _http.Get( "/health", []( const httplib::Request&, httplib::Response& res ) {
            send( res, 200, { { "status", "ok" }, { "schema_version", schema_version } } );
        } );
        _http.Post( "/sessions", [ this ]( const httplib::Request& req, httplib::Response& res ) {
            guarded( res, [ & ] {
                auto s = _store.create( config_from_json( body_of( req ) ) );
                std::lock_guard lock( s->mutex );
                res.set_header( "Location", "/sessions/" + s->id() );
                send( res, 201, s->view() );
            } );
        } );
        _http.Get( "/sessions/:id", [ this ]( const httplib::Request& req, httplib::Response& res ) {
            with_session( req, res, [ & ]( session& s ) { send( res, 200, s.view() ); } );
        } );
        _http.Post( "/sessions/:id/moves", [ this ]( const httplib::Request& req, httplib::Response& res ) {
            with_session( req, res, [ & ]( session& s ) { send( res, 200, s.submit( body_of( req ) ) ); } );
        } );
        _http.Get( "/sessions/:id/hint", [ this ]( const httplib::Request& req, httplib::Response& res ) {
            with_session( req, res, [ & ]( session& s ) { send( res, 200, s.hint() ); } );
        } );
        _http.Get( "/sessions/:id/history", [ this ]( const httplib::Request& req, httplib::Response& res ) {
            with_session( req, res, [ & ]( session& s ) { send( res, 200, s.history() ); } );
        } );
        _http.Get( "/sessions/:id/events", [ this ]( const httplib::Request& req, httplib::Response& res ) {
            events( req, res );
        } );
    }

    ~game_server() { stop(); }

    game_server( const game_server& ) = delete;
    game_server& operator=( const game_server& ) = delete;

    session_store& store() { return _store; }

    /// Binds to `host`; port 0 picks a free port. Returns the bound port or -1.
    int bind( const std::string& host = "127.0.0.1", int port = 0 )
    {
        _port = port == 0 ? _http.bind_to_any_port( host ) : ( _http.bind_to_port( host, port ) ? port : -1 );
        return _port;
    }

    /// Serves on a background thread after bind().
    void start()
    {
        _running = true;
        _thread = std::thread( [ this ] { _http.listen_after_bind(); } );
        _http.wait_until_ready();
    }

    /// Serves on the calling thread after bind().
    bool run()
    {
        _running = true;
        return _http.listen_after_bind();
    }

    void stop()
    {
        _running = false;
        if ( _http.is_running() )
            _http.stop();
        if ( _thread.joinable() )
            _thread.join();
    }

    [[nodiscard]] int port() const { return _port; }

private:
    static void send( httplib::Response& res, int status, const json& body )
    {
        res.status = status;
        res.set_content( body.dump(), "application/json" );
    }

    static json error_body( const std::string& why ) { return { { "schema_version", schema_version }, { "error", why } }; }

    static json body_of( const httplib::Request& req )
    {
        try
        {
            return json::parse( req.body );
        }
        catch ( const json::parse_error& e )
        {
            throw request_error( 400, std::string( "malformed JSON: " ) + e.what() );
        }
    }

    template < class F >
    static void guarded( httplib::Response& res, F&& f )
    {
        try
        {
            f();
        }
        catch ( const request_error& e )
        {
            send( res, e.status(), error_body( e.what() ) );
        }
        catch ( const illegal_move& e )
        {
            auto b = error_body( e.what() );
            b[ "report" ] = report_json( e.report() );
            send( res, 422, b );
        }
        catch ( const std::exception& e )
        {
            send( res, 500, error_body( e.what() ) );
        }
    }

    template < class F >
    void with_session( const httplib::Request& req, httplib::Response& res, F&& f )
    {
        guarded( res, [ & ] {
            auto s = _store.find( req.path_params.at( "id" ) );
            if ( !s )
                throw request_error( 404, "no session '" + req.path_params.at( "id" ) + "'" );
            std::lock_guard lock( s->mutex );
            f( *s );
        } );
    }

    /// One SSE `move` event per history entry from `?from=` on, then `end`
    /// once the game is over. Comment lines keep idle connections alive.
    void events( const httplib::Request& req, httplib::Response& res )
    {
        auto s = _store.find( req.path_params.at( "id" ) );
        if ( !s )
            return send( res, 404, error_body( "no session '" + req.path_params.at( "id" ) + "'" ) );
        std::size_t from = 0;
        if ( req.has_param( "from" ) )
        {
            try
            {
                from = std::stoul( req.get_param_value( "from" ) );
            }
            catch ( const std::exception& )
            {
                return send( res, 400, error_body( "'from' must be a non-negative integer" ) );
            }
        }
        res.set_header( "Cache-Control", "no-cache" );
        auto next = std::make_shared< std::size_t >( from );
        res.set_chunked_content_provider(
            "text/event-stream", [ this, s, next ]( std::size_t, httplib::DataSink& sink ) {
                std::unique_lock lock( s->mutex );
                s->changed.wait_for( lock, std::chrono::milliseconds( 250 ), [ & ] {
                    return !_running || *next < s->entries().size() || s->finished();
                } );
                std::string out;
                while ( *next < s->entries().size() )
                {
                    const auto& e = s->entries()[ *next ];
                    out += "id: " + std::to_string( e.seq ) + "\nevent: move\ndata: " + session::entry_json( e ).dump() + "\n\n";
                    ++*next;
                }
                const bool over = s->finished();
                if ( over )
                    out += "event: end\ndata: " + s->state_json().dump() + "\n\n";
                lock.unlock();
                if ( out.empty() )
                    out = ": keepalive\n\n";
                if ( !sink.write( out.data(), out.size() ) )
                    return false;
                if ( over || !_running )
                {
                    sink.done();
                    return true;
                }
                return true;
            } );
    }

    httplib::Server _http;
    session_store _store;
    std::thread _thread;
    std::atomic< bool > _running{ false };
    int _port = -1;
};

} // namespace coalg::service
