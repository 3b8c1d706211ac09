#include "omp_oracle_helpers.hpp"

#include <doctest.h>

TEST_SUITE("omp_oracle") {

TEST_CASE("constructed instances satisfy the coherence bound") {
    for (std::uint32_t seed : {1u, 17u, 90210u}) {
        const auto instance = mprd::test::make_oracle_instance(seed);
        CHECK(mprd::test::mutual_coherence(instance.A) < 1.0 / 3.0);
        CHECK(instance.A.rows() >= 8);
        CHECK(instance.A.cols() <= 32);
    }
}

TEST_CASE("omp equals exhaustive least squares on 2-sparse instances") {
    // the full 200-instance run lives in the acceptance suite; this is the
    // same oracle on a faster sample
    for (std::uint32_t seed = 1; seed <= 40; ++seed)
        REQUIRE(mprd::test::omp_matches_oracle(seed));
}

}  // TEST_SUITE
