#include <doctest.h>

#include <cmath>

#include "lif/lattice.hpp"
#include "oracles.hpp"

using namespace lif;

TEST_SUITE("lattice") {

TEST_CASE("delta=0 reproduces the regular grid exactly") {
    const Lattice lat = build_perturbed_lattice(2, 1, 1.0, 0.0, 123);
    REQUIRE(lat.n() == 2);
    CHECK(lat.points[0] == 0.5);
    CHECK(lat.points[1] == 1.0);

    const Lattice g2 = build_perturbed_lattice(4, 2, 1.0, 0.0, 99);
    for (std::size_t s = 0; s < g2.n(); ++s)
        for (int a = 0; a < 2; ++a) {
            const double c = g2.point(s)[a];
            const double snapped = std::round(c * 4.0) / 4.0;
            CHECK(c == snapped);
        }
}

TEST_CASE("perturbation stays within one cell of the anchor") {
    const int N = 100;
    const double T = 5.0;
    const Lattice lat = build_perturbed_lattice(N, 2, T, 1.0, 2024);
    REQUIRE(lat.n() == 10000);
    const Lattice grid = build_perturbed_lattice(N, 2, T, 0.0, 2024);
    const double h = T / N;
    for (std::size_t s = 0; s < lat.n(); ++s)
        for (int a = 0; a < 2; ++a)
            CHECK(std::abs(lat.point(s)[a] - grid.point(s)[a]) <= h);
}

TEST_CASE("identical args and seed give bit-identical lattices") {
    const Lattice a = build_perturbed_lattice(10, 2, 1.0, 0.5, 7);
    const Lattice b = build_perturbed_lattice(10, 2, 1.0, 0.5, 7);
    CHECK(a.points == b.points);
    const Lattice c = build_perturbed_lattice(10, 2, 1.0, 0.5, 8);
    CHECK(a.points != c.points);
}

TEST_CASE("invalid arguments are rejected") {
    CHECK_THROWS_AS(build_perturbed_lattice(10, 4, 1.0, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_perturbed_lattice(1, 2, 1.0, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_perturbed_lattice(10, 2, -1.0, 0.0, 1), std::invalid_argument);
}

TEST_CASE("nearest neighbors on the documented 1-d grid") {
    Lattice lat;
    lat.dim = 1;
    lat.side = 1.0;
    lat.points = {0.25, 0.5, 0.75, 1.0};

    // symmetric tie at s=0.5 broken by index
    CHECK(nearest_neighbors(lat, 1, 2) == std::vector<std::int32_t>{0, 2});
    // monotone distances from the left end
    CHECK(nearest_neighbors(lat, 0, 3) == std::vector<std::int32_t>{1, 2, 3});
    CHECK_THROWS_AS(nearest_neighbors(lat, 0, 4), std::invalid_argument);
    CHECK_THROWS_AS(nearest_neighbors(lat, 0, 0), std::invalid_argument);
}

TEST_CASE("indexed queries match the brute-force order") {
    const Lattice lat = build_perturbed_lattice(30, 2, 1.0, 1.0, 31);  // 900 sites, indexed path
    const NeighborIndex index(lat);
    for (std::size_t s = 0; s < lat.n(); s += 97) {
        for (std::size_t k : {1ul, 6ul, 25ul}) {
            CHECK(index.query(s, k) == oracle::nearest_brute(lat, s, k));
        }
    }
    // small-n brute path
    const Lattice small = build_perturbed_lattice(4, 2, 1.0, 0.7, 5);
    for (std::size_t s = 0; s < small.n(); ++s)
        CHECK(nearest_neighbors(small, s, 6) == oracle::nearest_brute(small, s, 6));
}

TEST_CASE("regular 1-d grid regularity constants are near one") {
    const Lattice lat = build_perturbed_lattice(100, 1, 1.0, 0.0, 1);
    const RegularityReport rep = verify_regularity(lat, 50);
    // interior sites have r_{s,i} close to (i/2n each side); edge sites push
    // the sup to ~2^(1/d) of the ideal, so the band straddles 1
    CHECK(rep.c_min_hat > 0.4);
    CHECK(rep.c_max_hat < 2.5);
    CHECK(rep.c_min_hat <= rep.c_max_hat);
    CHECK(!rep.degenerate);
    CHECK(rep.sampled_pairs == 50 * 99);
}

TEST_CASE("perturbed 2-d lattice keeps a positive lower constant") {
    const Lattice lat = build_perturbed_lattice(50, 2, 1.0, 1.0, 77);
    const RegularityReport rep = verify_regularity(lat, 40);
    CHECK(rep.c_min_hat > 0.0);
    CHECK(std::isfinite(rep.c_max_hat));
    CHECK(!rep.degenerate);
}

TEST_CASE("near-duplicate cluster is flagged") {
    Lattice lat;
    lat.dim = 1;
    lat.side = 1.0;
    lat.points = {0.5, 0.5 + 1e-13, 0.5 + 2e-13, 0.9};
    const RegularityReport rep = verify_regularity(lat, 4);
    CHECK(rep.degenerate);
    CHECK(rep.c_min_hat < 1e-9);
}

TEST_CASE("n_scale is the integer floor root") {
    CHECK(build_perturbed_lattice(3, 3, 1.0, 0.0, 1).n_scale() == 3);  // 27 points
    CHECK(build_perturbed_lattice(10, 2, 1.0, 0.0, 1).n_scale() == 10);
    Lattice odd;
    odd.dim = 2;
    odd.side = 1.0;
    odd.points.resize(2 * 10);  // n=10 -> floor(sqrt(10)) = 3
    CHECK(odd.n_scale() == 3);
}

}  // TEST_SUITE
