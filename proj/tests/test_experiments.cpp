#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <symcount/experiments.hpp>

using namespace symcount;

TEST_CASE("region membership") {
    Region box = Region::make_box({-1, -1, 0}, {1, 1, 2});
    CHECK(box.contains({0, 0, 1}));
    CHECK(box.contains({-1, 1, 0}));  // boundary included
    CHECK(!box.contains({0, 0, -0.5}));

    Region cap = Region::make_cap({0, 0, 1}, 0.8);
    CHECK(cap.contains({0, 0, 2}));
    CHECK(cap.contains({0.1, 0, 1}));
    CHECK(!cap.contains({1, 0, 0.1}));
    CHECK(!cap.contains({0, 0, -1}));

    Region half = Region::make_halfspace({1, -1, 0}, 0.5);
    CHECK(half.contains({2, 0, 7}));
    CHECK(!half.contains({0, 0, 0}));
}

TEST_CASE("octant partition covers and does not overlap") {
    auto parts = octant_partition(3);
    REQUIRE(parts.size() == 8);
    CounterRng rng(77);
    for (u64 t = 0; t < 1000; ++t) {
        std::vector<double> x = {rng.uniform(3 * t, -5, 5), rng.uniform(3 * t + 1, -5, 5),
                                 rng.uniform(3 * t + 2, -5, 5)};
        int hits = 0;
        for (const auto& r : parts) hits += r.contains(x) ? 1 : 0;
        CHECK(hits == 1);
    }
}

TEST_CASE("counting grid preconditions") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    auto S = PlaceSet::with_primes({});
    McParams mc;
    mc.samples = 10000;
    CHECK_THROWS_AS(counting_experiment(sphere, S, 1, {4, 5, 6, 8}, mc), std::invalid_argument);
    CHECK_THROWS_AS(counting_experiment(sphere, S, 1, {4, 5, 6, 6, 8}, mc),
                    std::invalid_argument);
}

TEST_CASE("counting a compact fiber") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    auto S = PlaceSet::with_primes({});
    McParams mc;
    mc.samples = 4000000;
    mc.seed = 5;
    auto rep = counting_experiment(sphere, S, 1, {4, 5, 6, 8, 10}, mc);
    REQUIRE(rep.rows.size() == 5);
    for (const auto& row : rep.rows) {
        CHECK(row.N == 6);  // the six unit vectors, at every radius
        CHECK(std::fabs(row.V - 2 * M_PI) <= 4 * row.V_stderr);
        CHECK(row.ratio > 0);
    }
    for (size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].N >= rep.rows[i - 1].N);
    CHECK(!rep.all_empty);
    CHECK(rep.top_half_spread < 0.25);

    auto again = counting_experiment(sphere, S, 1, {4, 5, 6, 8, 10}, mc);
    for (size_t i = 0; i < rep.rows.size(); ++i) {
        CHECK(again.rows[i].V == rep.rows[i].V);
        CHECK(again.rows[i].N == rep.rows[i].N);
    }
}

TEST_CASE("counting an empty family") {
    // 7, 343, ... are never sums of three squares
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    auto S = PlaceSet::with_primes({7});
    McParams mc;
    mc.samples = 200000;
    auto rep = counting_experiment(sphere, S, 7, {5, 6, 7, 8, 9}, mc);
    for (const auto& row : rep.rows) {
        CHECK(row.N == 0);
        CHECK(row.ratio == 0);
    }
    CHECK(rep.all_empty);
    CHECK(!rep.fit_ok);
}

TEST_CASE("stratified volume agrees with an independent recomputation") {
    auto lorentz = VarietySpec::quadric_diag({1, 1, 1, -1});
    auto S = PlaceSet::with_primes({2});
    McParams mc;
    mc.samples = 300000;
    mc.seed = 21;
    auto rep = counting_experiment(lorentz, S, 1, {4, 5, 6, 7, 8}, mc);
    REQUIRE(!rep.strata.empty());
    for (const auto& st : rep.strata) {
        int j = valuation64(st.q, 2);
        CHECK(st.padic == padic_sphere_volume_level(lorentz, 1, 2, j, 4));
    }
    for (const auto& row : rep.rows) {
        double v = 0;
        for (const auto& st : rep.strata)
            if (st.T == row.T) v += st.arch * st.padic.convert_to<double>();
        CHECK(row.V == Catch::Approx(v).margin(1e-9));
    }
}

TEST_CASE("projection onto a single covering cell has zero discrepancy") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    auto S = PlaceSet::with_primes({});
    std::vector<Region> whole = {Region::make_box({-9, -9, -9}, {9, 9, 9})};
    McParams mc;
    mc.samples = 400000;
    auto rep = equidist_experiment(sphere, S, {1}, whole, 1.5, 1, mc);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].points == 6);
    CHECK(rep.rows[0].emp[0] == 1.0);
    CHECK(rep.region_mass[0] == 1.0);
    CHECK(rep.rows[0].D == 0.0);
    CHECK(rep.rows[0].included);
}

TEST_CASE("octant masses of the round sphere are equal") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    auto S = PlaceSet::with_primes({});
    McParams mc;
    mc.samples = 2000000;
    mc.seed = 3;
    auto rep = equidist_experiment(sphere, S, {1, 5}, octant_partition(3), 1.5, 1, mc);
    for (double m : rep.region_mass) CHECK(std::fabs(m - 0.125) < 0.01);

    // m=5 has the 24 points (±2,±1,0)-type; all carry a zero coordinate,
    // binned deterministically to the first matching octant
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[1].points == 24);
    double sum = 0;
    for (double e : rep.rows[1].emp) sum += e;
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
    CHECK(rep.rows[1].D >= 0.0);
    CHECK(rep.rows[1].D <= 1.0);
}

TEST_CASE("unattainable and small levels are flagged") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    auto S = PlaceSet::with_primes({5, 7});
    McParams mc;
    mc.samples = 200000;
    auto rep = equidist_experiment(sphere, S, {5, 7, 25}, octant_partition(3), 1.5, 50, mc);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].points == 24);
    CHECK(!rep.rows[0].included);  // 24 < 50
    CHECK(rep.rows[0].note.empty());
    CHECK(rep.rows[1].points == 0);  // 7 is not a sum of three squares
    CHECK(!rep.rows[1].included);
    CHECK(!rep.rows[1].note.empty());
    CHECK(rep.rows[2].points == 24);  // 25 = 9+16 etc., primitive only
}

TEST_CASE("level sequence validation") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    auto S = PlaceSet::with_primes({2});
    McParams mc;
    CHECK_THROWS_AS(equidist_experiment(sphere, S, {8, 2}, octant_partition(3), 1.5, 50, mc),
                    std::invalid_argument);
    CHECK_THROWS_AS(equidist_experiment(sphere, S, {3}, octant_partition(3), 1.5, 50, mc),
                    std::invalid_argument);  // 3 is not an S-unit level
    CHECK_THROWS_AS(equidist_experiment(sphere, S, {}, octant_partition(3), 1.5, 50, mc),
                    std::invalid_argument);
}

TEST_CASE("denominator growth against the p-adic ball") {
    auto lorentz = VarietySpec::quadric_diag({1, 1, 1, -1});
    Box zbox{{-3, -3, -3, -3}, {3, 3, 3, 3}};
    std::vector<Region> halves = {Region::make_halfspace({0, 0, 0, 1}, 0.0),
                                  Region::make_halfspace({0, 0, 0, -1}, 1e-9)};
    McParams mc;
    mc.samples = 1000000;
    mc.seed = 8;
    auto rep = denominator_experiment(lorentz, 2, {0, 1, 2}, halves, zbox, mc);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].n == 0);
    CHECK(rep.rows[0].total > 0);  // integral points in the box
    CHECK(rep.rows[1].total > 0);  // half-integral points exist for this form
    for (const auto& row : rep.rows) {
        Int sum = 0;
        for (const auto& c : row.counts) sum += c;
        CHECK(sum <= row.total);
        CHECK(row.normalized >= 0);
    }
    CHECK(rep.growth);  // dyadic spheres are nonempty, the ball keeps growing

    auto again = denominator_experiment(lorentz, 2, {0, 1, 2}, halves, zbox, mc);
    for (size_t i = 0; i < rep.rows.size(); ++i) CHECK(again.rows[i].total == rep.rows[i].total);
}

TEST_CASE("denominator rows empty when the local spheres vanish") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    Box zbox{{-2, -2, -2}, {2, 2, 2}};
    McParams mc;
    mc.samples = 100000;
    auto rep = denominator_experiment(sphere, 2, {1, 2}, octant_partition(3), zbox, mc);
    for (const auto& row : rep.rows) CHECK(row.total == 0);
    CHECK(!rep.growth);
    CHECK(padic_sphere_volume(sphere, 2, 1, 3) == 0);  // the matching local fact
}

TEST_CASE("kappa fit recovers a linear shell law") {
    std::vector<std::pair<double, double>> pts = {{0.05, 0.05}, {0.1, 0.1}, {0.2, 0.2}};
    CHECK(fit_kappa(pts) == Catch::Approx(1.0).margin(1e-9));
    std::vector<std::pair<double, double>> quad = {{0.05, 0.0025}, {0.1, 0.01}, {0.2, 0.04}};
    CHECK(fit_kappa(quad) == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("saturated compact balls have exact boundaries") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    McParams mc;
    mc.samples = 200000;
    auto res = well_rounded_check(sphere, 1, {}, {0.05, 0.1, 0.2}, {3.0}, mc);
    CHECK(res.exact_boundary);
    CHECK(std::isinf(res.kappa));
}

TEST_CASE("norm shells of the hyperboloid scale with epsilon") {
    auto lorentz = VarietySpec::quadric_diag({1, 1, 1, -1});
    McParams mc;
    mc.samples = 2000000;
    mc.seed = 31;
    auto res = well_rounded_check(lorentz, 1, {}, {0.05, 0.1, 0.2}, {6.0, 10.0}, mc);
    CHECK(!res.exact_boundary);
    CHECK(res.kappa > 0.2);
    CHECK(res.kappa < 2.5);
    REQUIRE(res.rows.size() == 2 * 3);
    for (const auto& row : res.rows) {
        CHECK(row.ball > 0);
        CHECK(row.shell > 0);
        CHECK(row.shell < row.ball);
    }
}

TEST_CASE("epsilon grid validation") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    McParams mc;
    CHECK_THROWS_AS(well_rounded_check(sphere, 1, {}, {0.1, 0.2}, {3.0}, mc),
                    std::invalid_argument);  // too few
    CHECK_THROWS_AS(well_rounded_check(sphere, 1, {}, {0.1, 0.2, 0.4}, {3.0}, mc),
                    std::invalid_argument);  // above 0.3
}
