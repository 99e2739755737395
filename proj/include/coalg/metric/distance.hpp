#pragma once

#include "lifting.hpp"
#include "pmetric.hpp"

#include <string>
#include <vector>

namespace coalg
{

enum class certificate_mode
{
    stabilized_exact,  // d_k = d_{k+1}: d_k is the least fixpoint
    contractive_bound, // discount c < 1: d_α - d_k <= c^k ⊤ / (1 - c)
    iteration_capped,  // only d_k <= d_α is known
};

inline const char* to_string( certificate_mode m )
{
    switch ( m )
    {
    case certificate_mode::stabilized_exact:
        return "stabilized-exact";
    case certificate_mode::contractive_bound:
        return "contractive-bound";
    case certificate_mode::iteration_capped:
        return "iteration-capped";
    }
    return "?";
}

/// Witness for d_{i}(x,y) = lifting of d_{i-1}: the γ and the nonexpansive f.
struct pair_witness
{
    std::string gamma;
    PredicateR f;
    bool forward = true;
    std::string method;
};

struct distance_certificate
{
    std::size_t iterations = 0;
    certificate_mode mode = certificate_mode::iteration_capped;
    Rational bound;
    /// witness[x][y] for the final iterate (x < y filled, mirrored to y > x).
    std::vector< std::vector< pair_witness > > witness;
};

struct distance_options
{
    Rational tol = Rational( 1, 1000 );
    std::size_t max_iter = 100;
    Rational discount = 1;
};

struct distance_result
{
    pmetric d;
    distance_certificate certificate;
    std::vector< pmetric > iterates; // d_0 = 0, d_1, ..., d_k
    /// witnesses[i] explains iterates[i] (witnesses[0] is empty).
    std::vector< std::vector< std::vector< pair_witness > > > witnesses;

    /// d_i, continuing with the final iterate past stabilization.
    [[nodiscard]] const pmetric& at_depth( std::size_t i ) const
    {
        return iterates[ std::min( i, iterates.size() - 1 ) ];
    }
    [[nodiscard]] const std::vector< std::vector< pair_witness > >& witness_at( std::size_t i ) const
    {
        return witnesses[ std::min( i, witnesses.size() - 1 ) ];
    }
};

/// One application of the lifting to every pair of states.
inline std::pair< pmetric, std::vector< std::vector< pair_witness > > >
lift_metric( const System& sys, const std::vector< eval_map >& gammas, const pmetric& d, const lift_options& opt = {} )
{
    const auto n = sys.size();
    auto next = pmetric::zero( n, d.top );
    std::vector< std::vector< pair_witness > > wit( n, std::vector< pair_witness >( n ) );
    for ( state_id x = 0; x < n; ++x )
    {
        wit[ x ][ x ] = { gammas.empty() ? "" : gammas.front().name, PredicateR( n, Rational( 0 ) ), true, "constant" };
        for ( state_id y = x + 1; y < n; ++y )
        {
            auto r = lift_distance( sys, gammas, d, sys.alpha[ x ], sys.alpha[ y ], opt );
            next.d[ x ][ y ] = next.d[ y ][ x ] = r.value;
            if ( r.best )
            {
                const auto& g = r.per_gamma[ *r.best ];
                wit[ x ][ y ] = { g.gamma, g.witness, g.forward, g.method };
                wit[ y ][ x ] = { g.gamma, g.witness, !g.forward, g.method };
            }
        }
    }
    return { std::move( next ), std::move( wit ) };
}

/// Least fixpoint of d ↦ d^{↑Γ} ∘ (α × α) by iteration from the zero metric.
inline distance_result behavioural_distance( const System& sys, const distance_options& opt = {} )
{
    const auto gammas = gammas_of( sys );
    lift_options lo;
    lo.discount = opt.discount;
    distance_result r;
    r.iterates.push_back( pmetric::zero( sys.size(), sys.top ) );
    r.witnesses.emplace_back();
    auto& cert = r.certificate;
    const bool contractive = opt.discount < 1;
    Rational ck = 1; // c^k
    std::vector< std::vector< pair_witness > > last_wit;
    while ( true )
    {
        const auto k = r.iterates.size() - 1;
        if ( contractive )
        {
            Rational bound = ck * sys.top / ( 1 - opt.discount );
            if ( bound <= opt.tol )
            {
                cert.mode = certificate_mode::contractive_bound;
                cert.bound = bound;
                break;
            }
        }
        if ( k >= opt.max_iter )
        {
            cert.mode = certificate_mode::iteration_capped;
            cert.bound = sys.top;
            break;
        }
        auto [ next, wit ] = lift_metric( sys, gammas, r.iterates.back(), lo );
        ck *= opt.discount;
        last_wit = std::move( wit );
        if ( next == r.iterates.back() )
        {
            cert.mode = certificate_mode::stabilized_exact;
            cert.bound = 0;
            break;
        }
        r.iterates.push_back( std::move( next ) );
        r.witnesses.push_back( last_wit );
    }
    cert.iterations = r.iterates.size() - 1;
    cert.witness = last_wit.empty() ? r.witnesses.back() : last_wit;
    r.d = r.iterates.back();
    return r;
}

} // namespace coalg
