#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <symcount/volumes_arch.hpp>

using namespace symcount;

TEST_CASE("power law fits recover exact laws") {
    std::vector<std::pair<double, double>> grid;
    for (double T : {10., 20., 40., 80., 160., 320.}) grid.push_back({T, 5.0 * T * T});
    auto fit = fit_power_log(grid);
    CHECK(fit.a == Catch::Approx(2.0).margin(1e-9));
    CHECK(fit.b == 0);
    CHECK(fit.c == Catch::Approx(5.0).epsilon(1e-9));
    CHECK(fit.residual_rms < 1e-12);

    grid.clear();
    for (int k = 2; k <= 9; ++k) {
        double T = std::exp((double)k);
        grid.push_back({T, T * std::log(T)});
    }
    auto fit2 = fit_power_log(grid);
    CHECK(fit2.a == Catch::Approx(1.0).margin(1e-9));
    CHECK(fit2.b == 1);
    CHECK(fit2.c == Catch::Approx(1.0).epsilon(1e-9));

    grid.clear();
    for (int k = 1; k <= 8; ++k) {
        double T = 4.0 * std::pow(2.0, k);
        double jitter = 1.0 + 0.01 * std::sin(7.0 * k);
        grid.push_back({T, 3.0 * T * T * std::pow(std::log(T), 2) * jitter});
    }
    auto fit3 = fit_power_log(grid);
    CHECK(fit3.b == 2);
    CHECK(std::fabs(fit3.a - 2.0) < 0.05);
}

TEST_CASE("power law fit input validation") {
    std::vector<std::pair<double, double>> grid = {{2, 1}, {4, 2}, {8, 4}, {16, 8}, {32, 16}};
    CHECK_THROWS_AS(fit_power_log(grid), std::invalid_argument);  // only 5 points
    grid.push_back({31, 32});
    CHECK_THROWS_AS(fit_power_log(grid), std::invalid_argument);  // T not increasing
    grid.back() = {64, -1};
    CHECK_THROWS_AS(fit_power_log(grid), std::invalid_argument);  // negative value
    grid.back() = {64, 2};
    CHECK_THROWS_AS(fit_power_log(grid), std::invalid_argument);  // v dips: non-monotone
    grid.back() = {64, 32};
    CHECK_NOTHROW(fit_power_log(grid));
}

TEST_CASE("shell estimate of the unit sphere") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    auto est = shell_volume(sphere, 1, 2.0, 0.01, 200000, 42);
    CHECK(est.method == "shell_mc");
    CHECK(est.samples == 200000);
    CHECK(est.stderr_ > 0);
    CHECK(!est.degenerate_warning);
    CHECK(std::fabs(est.value - 2 * M_PI) <= 3 * est.stderr_);
}

TEST_CASE("unreachable shells give exact zero") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    auto est = shell_volume(sphere, 1, 0.5, 0.01, 50000, 1);
    CHECK(est.value == 0.0);
    CHECK(est.stderr_ == 0.0);
}

TEST_CASE("compact level sets saturate in T") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    auto a = shell_volume(sphere, 1, 2.0, 0.01, 200000, 5);
    auto b = shell_volume(sphere, 1, 3.0, 0.01, 200000, 5);
    CHECK(std::fabs(a.value - b.value) <= 3 * (a.stderr_ + b.stderr_));
}

TEST_CASE("estimates are reproducible by seed") {
    auto lorentz = VarietySpec::quadric_diag({1, 1, 1, -1});
    auto a = shell_volume(lorentz, 1, 4.0, 0.05, 100000, 9);
    auto b = shell_volume(lorentz, 1, 4.0, 0.05, 100000, 9);
    CHECK(a.value == b.value);
    CHECK(a.stderr_ == b.stderr_);
    auto c = shell_volume(lorentz, 1, 4.0, 0.05, 100000, 10);
    CHECK(a.value != c.value);
}

TEST_CASE("shell growth is monotone in T up to noise") {
    auto lorentz = VarietySpec::quadric_diag({1, 1, 1, -1});
    auto small = shell_volume(lorentz, 1, 3.0, 0.05, 400000, 3);
    auto large = shell_volume(lorentz, 1, 6.0, 0.05, 400000, 3);
    CHECK(small.value <= large.value + 3 * (small.stderr_ + large.stderr_));
    CHECK(large.value > small.value);  // strict growth for this noncompact orbit
}

TEST_CASE("halving epsilon moves the estimate within noise") {
    auto lorentz = VarietySpec::quadric_diag({1, 1, 1, -1});
    auto wide = shell_volume(lorentz, 1, 4.0, 0.1, 2000000, 17);
    auto narrow = shell_volume(lorentz, 1, 4.0, 0.05, 2000000, 17);
    CHECK(std::fabs(wide.value - narrow.value) <= 4 * (wide.stderr_ + narrow.stderr_));
}

TEST_CASE("epsilon precondition") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    CHECK_THROWS_AS(shell_volume(sphere, 1, 2.0, 0.2, 1000, 1), std::invalid_argument);
    CHECK_THROWS_AS(shell_volume(sphere, 1, 2.0, 0.0, 1000, 1), std::invalid_argument);
    CHECK_THROWS_AS(shell_volume(sphere, 0, 2.0, 0.01, 1000, 1), std::invalid_argument);
    CHECK_THROWS_AS(shell_volume(sphere, 1, -1.0, 0.01, 1000, 1), std::invalid_argument);
}

TEST_CASE("tail integral with zero exponent reproduces the shell estimate") {
    auto lorentz = VarietySpec::quadric_diag({1, 1, 1, -1});
    auto shell = shell_volume(lorentz, 1, 4.0, 0.05, 100000, 11);
    auto tail = tail_integral(lorentz, 1, 4.0, 0, 0.05, 100000, 11);
    CHECK(tail.value == shell.value);
}

TEST_CASE("tail integral on the unit sphere matches the shell") {
    // on the unit level of the sum of squares the weight |x|^-2 is 1
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    auto shell = shell_volume(sphere, 1, 2.0, 0.01, 300000, 13);
    auto tail = tail_integral(sphere, 1, 2.0, 2, 0.01, 300000, 13);
    CHECK(std::fabs(shell.value - tail.value) <= 3 * (shell.stderr_ + tail.stderr_));
}

TEST_CASE("tail integrals are subpolynomial relative to ball volume") {
    auto lorentz = VarietySpec::quadric_diag({1, 1, 1, -1});
    for (double T : {8.0, 16.0}) {
        auto ball = shell_volume(lorentz, 1, T, 0.1, 4000000, 19);
        auto tail = tail_integral(lorentz, 1, T, 4, 0.1, 4000000, 19);
        REQUIRE(ball.value > 1);
        REQUIRE(tail.value > 0);
        CHECK(std::log(tail.value) / std::log(ball.value) < 0.8);
    }
}

TEST_CASE("norm bins split the shell") {
    auto sphere = VarietySpec::quadric_diag({1, 1, 1});
    auto bins = shell_norm_bins(sphere, 1, 0.01, 200000, 23, {1.2, 2.0});
    REQUIRE(bins.mass.size() == 2);
    CHECK(std::fabs(bins.mass[0] - 2 * M_PI) <= 3 * bins.stderr_[0]);
    CHECK(bins.mass[1] == 0.0);

    auto whole = shell_volume(sphere, 1, 2.0, 0.01, 200000, 23);
    CHECK(bins.mass[0] + bins.mass[1] == Catch::Approx(whole.value).margin(1e-9));
}
