#include <catch2/catch_amalgamated.hpp>

#include <symcount/volumes_padic.hpp>

using namespace symcount;

namespace {

// Exhaustive reference counter: all residue vectors mod p^k, no lifting tricks.
Int brute_count(const VarietySpec& spec, const Int& c, i64 p, int k, bool primitive) {
    i64 pk = ipow64(p, k);
    int n = spec.ambient_dim();
    Int target = ((c % pk) + pk) % pk;
    std::vector<i64> x(n, 0);
    Int cnt = 0;
    while (true) {
        bool prim = false;
        for (i64 v : x)
            if (v % p != 0) prim = true;
        if (!primitive || prim) {
            Int v = evaluate(spec, x) - target;
            if (v % pk == 0) ++cnt;
        }
        int i = 0;
        while (i < n && ++x[i] == pk) x[i++] = 0;
        if (i == n) break;
    }
    return cnt;
}

Rat brute_density(const VarietySpec& spec, const Int& c, i64 p, int k, bool primitive) {
    return Rat(brute_count(spec, c, p, k, primitive), ipow(Int(p), k * (spec.ambient_dim() - 1)));
}

}  // namespace

TEST_CASE("lift counts match exhaustive enumeration") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    auto lorentz = VarietySpec::quadric_diag({1, 1, 1, -1});
    auto det3 = VarietySpec::det_sym(3, 1);
    auto det3m = VarietySpec::det_sym(3, -1);
    auto pf4 = VarietySpec::pfaffian(4, 1);

    struct Case {
        const VarietySpec* spec;
        Int m;
        i64 p;
        int k;
    };
    std::vector<Case> cases = {
        {&sphere, 1, 2, 3}, {&sphere, 7, 2, 3},  {&sphere, 1, 3, 2}, {&sphere, -2, 3, 2},
        {&sphere, 1, 5, 2}, {&sphere, 3, 7, 2},  {&lorentz, 1, 2, 2}, {&lorentz, 5, 2, 2},
        {&lorentz, 1, 3, 2}, {&det3, 1, 2, 2},   {&det3, 3, 2, 2},   {&det3, 1, 3, 2},
        {&det3m, 1, 3, 2},   {&pf4, 1, 3, 2},    {&pf4, 2, 2, 2},    {&pf4, -1, 2, 2},
    };
    for (const auto& c : cases) {
        CAPTURE(kind_name(c.spec->kind), c.m, c.p, c.k);
        auto recs = local_density(*c.spec, c.m, c.p, c.k);
        REQUIRE(recs.size() == (size_t)c.k);
        for (int k = 1; k <= c.k; ++k) {
            CAPTURE(k);
            Int want = brute_count(*c.spec, c.m, c.p, k, false);
            CHECK(recs[k - 1].k == k);
            CHECK(recs[k - 1].count == want);
            CHECK(recs[k - 1].density ==
                  Rat(want, ipow(Int(c.p), k * (c.spec->ambient_dim() - 1))));
        }
    }
}

TEST_CASE("densities of the sum of three squares") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});

    auto at2 = local_density(sphere, 1, 2, 4);
    CHECK(at2[1].density == Rat(3, 2));  // k = 2
    CHECK(at2[2].density == Rat(3, 2));
    CHECK(at2[3].density == Rat(3, 2));
    auto lim2 = local_density_limit(sphere, 1, 2);
    CHECK(lim2.density == Rat(3, 2));
    CHECK(at2[lim2.settle_k - 1].stabilized);
    CHECK(!at2[0].stabilized);

    auto at3 = local_density(sphere, 1, 3, 3);
    CHECK(at3[0].density == Rat(2, 3));
    CHECK(at3[1].density == Rat(2, 3));
    CHECK(at3[2].density == Rat(2, 3));
    CHECK(local_density_limit(sphere, 1, 3).density == Rat(2, 3));

    // 7 is not a sum of three squares mod 8
    auto bad = local_density(sphere, 7, 2, 4);
    CHECK(bad[2].count == 0);
    CHECK(bad[3].count == 0);
    CHECK(local_density_limit(sphere, 7, 2).density == 0);
}

TEST_CASE("stabilized records stay fixed when the depth grows") {
    auto lorentz = VarietySpec::quadric_diag({1, 1, 1, -1});
    for (i64 p : {2, 3, 5}) {
        auto shallow = local_density(lorentz, 1, p, 3);
        auto deep = local_density(lorentz, 1, p, 5);
        for (int i = 0; i < 3; ++i) {
            CHECK(deep[i].count == shallow[i].count);
            CHECK(deep[i].stabilized == shallow[i].stabilized);
        }
        auto lim = local_density_limit(lorentz, 1, p);
        for (const auto& r : deep)
            if (r.stabilized) CHECK(r.density == lim.density);
    }
}

TEST_CASE("sphere masses at the odd place follow one geometric law") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    CHECK(padic_sphere_volume(sphere, 3, 0, 3) == Rat(2, 3));
    CHECK(padic_sphere_volume(sphere, 3, 1, 3) == Rat(8, 3));
    CHECK(padic_sphere_volume(sphere, 3, 2, 3) == Rat(8, 1));
    CHECK(padic_sphere_volume(sphere, 3, 3, 3) == Rat(24, 1));
    CHECK(padic_ball_volume(sphere, 3, 2, 3) == Rat(2, 3) + Rat(8, 3) + Rat(8));

    // independent check at one level: raw counts mod 3^3 and 3^4, scaled
    Rat rho3 = brute_density(sphere, ipow(Int(3), 2), 3, 3, true);
    Rat rho4 = brute_density(sphere, ipow(Int(3), 2), 3, 4, true);
    REQUIRE(rho3 == rho4);
    CHECK(padic_sphere_volume(sphere, 3, 1, 3) == rho3 * 3);
}

TEST_CASE("dyadic spheres of the sum of three squares are empty") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    for (int j = 1; j <= 4; ++j) {
        CAPTURE(j);
        CHECK(padic_sphere_volume(sphere, 2, j, 3) == 0);
    }
    CHECK(padic_ball_volume(sphere, 2, 4, 3) == Rat(3, 2));  // only the integral part
    CHECK(brute_count(sphere, 4, 2, 3, true) == 0);
    CHECK(brute_count(sphere, 16, 2, 4, true) == 0);
}

TEST_CASE("signature (3,1) has nonempty dyadic spheres") {
    auto lorentz = VarietySpec::quadric_diag({1, 1, 1, -1});
    Rat w1 = padic_sphere_volume(lorentz, 2, 1, 3);
    REQUIRE(w1 > 0);
    Rat rho3 = brute_density(lorentz, 4, 2, 3, true);
    Rat rho4 = brute_density(lorentz, 4, 2, 4, true);
    Rat rho5 = brute_density(lorentz, ipow(Int(2), 2), 2, 5, true);
    REQUIRE(rho4 == rho5);
    CHECK(w1 == rho4 * ipow(Int(2), 1 * (4 - 2)));
    CHECK(rho3 != 0);
}

TEST_CASE("level variant shifts the target") {
    auto lorentz = VarietySpec::quadric_diag({1, 1, 1, -1});
    CHECK(padic_sphere_volume_level(lorentz, 1, 2, 1, 3) ==
          padic_sphere_volume(lorentz, 2, 1, 3));
    Rat w = padic_sphere_volume_level(lorentz, 5, 3, 1, 3);
    Rat rho = brute_density(lorentz, Int(5) * 9, 3, 2, true);
    Rat rho2 = brute_density(lorentz, Int(5) * 9, 3, 3, true);
    REQUIRE(rho == rho2);
    CHECK(w == rho * 9);
    CHECK_THROWS_AS(padic_sphere_volume_level(lorentz, 0, 3, 1, 3), std::invalid_argument);
}

TEST_CASE("volume preconditions") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    CHECK_THROWS_AS(local_density(sphere, 1, 4, 3), std::invalid_argument);   // not prime
    CHECK_THROWS_AS(local_density(sphere, 1, 3, 1), std::invalid_argument);   // depth < 2
    CHECK_THROWS_AS(local_density(sphere, 0, 3, 3), std::invalid_argument);   // level 0
    CHECK_THROWS_AS(padic_sphere_volume(sphere, 3, -1, 3), std::invalid_argument);
    CHECK_THROWS_AS(padic_sphere_volume(sphere, 3, 1, 1), std::invalid_argument);
}

TEST_CASE("series fits find the pure power law") {
    std::vector<Rat> series;
    series.push_back(7);  // index 0 never enters the fit
    for (int j = 1; j <= 8; ++j) series.push_back(Rat(5) * ipow(Int(3), 2 * j));
    auto fit = structure_fit(series, 3, 3);
    CHECK(fit.modulus == 1);
    REQUIRE(fit.classes.size() == 1);
    CHECK(fit.classes[0].a == Catch::Approx(2.0).margin(1e-9));
    CHECK(fit.classes[0].b == 0);
    CHECK(fit.classes[0].c == Catch::Approx(5.0).epsilon(1e-6));
    CHECK(fit.total_residual < 1e-9);
}

TEST_CASE("series fits split alternating support") {
    std::vector<Rat> series = {7, 0, 16, 0, 256, 0, 4096, 0, 65536};
    auto fit = structure_fit(series, 2, 4);
    CHECK(fit.modulus == 2);
    REQUIRE(fit.classes.size() == 2);
    CHECK(fit.classes[0].residue == 0);
    CHECK(!fit.classes[0].all_zero);
    CHECK(fit.classes[0].a == Catch::Approx(2.0).margin(1e-9));
    CHECK(fit.classes[1].all_zero);
    CHECK(fit.total_residual < 1e-9);
}

TEST_CASE("series fit on computed sphere masses") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    std::vector<Rat> series;
    for (int j = 0; j <= 6; ++j) series.push_back(padic_sphere_volume(sphere, 3, j, 3));
    auto fit = structure_fit(series, 3, 2);
    CHECK(fit.modulus == 1);
    CHECK(fit.classes[0].a == Catch::Approx(1.0).margin(1e-9));
    CHECK(fit.total_residual < 1e-9);

    std::vector<Rat> dead(8, 0);
    auto zfit = structure_fit(dead, 2, 2);
    CHECK(zfit.modulus == 1);
    CHECK(zfit.classes[0].all_zero);
}

TEST_CASE("denominator mass doubles tamely") {
    auto lorentz = VarietySpec::quadric_diag({1, 1, 1, -1});
    auto chk = doubling_check(lorentz, 1, {2, 3}, 6, 3);
    REQUIRE(chk.rows.size() == 7);
    CHECK(chk.rows[0].T == 1.0);
    CHECK(chk.rows[0].w == local_density_limit(lorentz, 1, 2).density *
                               local_density_limit(lorentz, 1, 3).density);
    for (size_t i = 1; i < chk.rows.size(); ++i) CHECK(chk.rows[i].w >= chk.rows[i - 1].w);
    CHECK(chk.rows.back().w > chk.rows[0].w);  // new denominators do appear
    REQUIRE(chk.ratios.size() == 6);
    for (double r : chk.ratios) CHECK(r >= 1.0);
    CHECK(chk.max_ratio < 64.0);

    auto again = doubling_check(lorentz, 1, {2, 3}, 6, 3);
    for (size_t i = 0; i < chk.rows.size(); ++i) CHECK(again.rows[i].w == chk.rows[i].w);
}
