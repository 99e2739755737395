#include "property_suites.hpp"

#include <gtest/gtest.h>

namespace
{

constexpr int cases = 1000;

void expect_none( const property_suites::failure& f )
{
    EXPECT_FALSE( f ) << *f;
}

} // namespace

TEST( Properties, LiftingPreservesPseudometricAxioms ) { expect_none( property_suites::lifting_preserves_pseudometrics( cases, 4001 ) ); }

TEST( Properties, MonotonePredicateLifting ) { expect_none( property_suites::monotone_predicate_lifting( cases, 4002 ) ); }

TEST( Properties, UpperEnvelope ) { expect_none( property_suites::upper_envelope( cases, 4003 ) ); }

TEST( Properties, FormulasAreNonexpansiveAtTheirDepth ) { expect_none( property_suites::formulas_nonexpansive( cases, 4004 ) ); }

TEST( Properties, LiftingDecomposesOverGammas ) { expect_none( property_suites::lifting_decomposes( cases, 4005 ) ); }

TEST( Properties, LiftingMonotoneAndNonexpansiveInTheMetric )
{
    expect_none( property_suites::lifting_monotone_and_nonexpansive( cases, 4006 ) );
}
