#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctab/bounds.hpp"
#include "ctab/exact.hpp"
#include "ctab/scaling.hpp"

using namespace ctab;

namespace {

// alpha(R,C) by exact integer arithmetic: alpha = N^N * min(prod r_i!, with
// the r_i^{r_i} moved across) / N! computed as a ratio of __int128 products.
// Valid for the small margins used here (products fit in 128 bits).
double alpha_by_integers(const std::vector<long long>& rows, const std::vector<long long>& cols) {
    auto side = [](const std::vector<long long>& v) {
        // returns (prod r_i!, prod r_i^{r_i}) as long doubles via exact
        // __int128 accumulation
        __int128 fact = 1, pow = 1;
        for (long long r : v) {
            for (long long k = 2; k <= r; ++k) fact *= k;
            for (long long k = 0; k < r; ++k) pow *= r;
        }
        return std::pair<__int128, __int128>(fact, pow);
    };
    long long n = 0;
    for (long long r : rows) n += r;
    __int128 nn = 1, nfact = 1;
    for (long long k = 0; k < n; ++k) nn *= n;
    for (long long k = 2; k <= n; ++k) nfact *= k;
    auto [rf, rp] = side(rows);
    auto [cf, cp] = side(cols);
    long double row_side = static_cast<long double>(rf) / static_cast<long double>(rp);
    long double col_side = static_cast<long double>(cf) / static_cast<long double>(cp);
    return static_cast<double>(static_cast<long double>(nn) / static_cast<long double>(nfact) *
                               std::min(row_side, col_side));
}

}  // namespace

TEST_CASE("alpha for unit margins is N^N/N!") {
    for (int n : {1, 2, 3, 4, 5}) {
        std::vector<long long> u(n, 1);
        ApproximationFactor a = alpha_factor(u, u);
        double nn = std::pow(static_cast<double>(n), n);
        double nf = std::tgamma(n + 1.0);
        CHECK(a.alpha == doctest::Approx(nn / nf).epsilon(1e-12));
        CHECK(a.row_product == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(alpha_factor({1, 1}, {1, 1}).alpha == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("alpha for the magic 3x3 t=2 margins") {
    ApproximationFactor a = alpha_factor({2, 2, 2}, {2, 2, 2});
    CHECK(a.alpha == doctest::Approx(8.1).epsilon(1e-12));
    CHECK(a.alpha == doctest::Approx(alpha_by_integers({2, 2, 2}, {2, 2, 2})).epsilon(1e-12));
}

TEST_CASE("alpha picks the smaller side") {
    ApproximationFactor a = alpha_factor({3, 1}, {2, 2});
    // rows: 3!/27 * 1 = 2/9; cols: (2/4)^2 = 1/4; rows smaller
    CHECK(a.chosen_side == ApproximationFactor::Side::rows);
    CHECK(a.alpha == doctest::Approx(alpha_by_integers({3, 1}, {2, 2})).epsilon(1e-12));
}

TEST_CASE("alpha agrees with exact integer arithmetic on random margins") {
    RandomSource rng(47);
    for (int trial = 0; trial < 30; ++trial) {
        int m = 1 + static_cast<int>(rng.next_u64() % 4);
        int n = 1 + static_cast<int>(rng.next_u64() % 4);
        std::vector<long long> rows(m), cols(n, 0);
        long long total = 0;
        for (int i = 0; i < m; ++i) {
            rows[i] = 1 + static_cast<long long>(rng.next_u64() % 4);
            total += rows[i];
        }
        for (long long k = 0; k < total; ++k) ++cols[rng.next_u64() % n];
        bool ok = true;
        for (long long c : cols) ok = ok && c > 0;
        if (!ok || total > 20) continue;
        ApproximationFactor a = alpha_factor(rows, cols);
        CHECK(a.alpha == doctest::Approx(alpha_by_integers(rows, cols)).epsilon(1e-11));
        CHECK(std::log(a.alpha) == doctest::Approx(a.log_alpha).epsilon(1.0).scale(1e-12));
        CHECK(a.alpha >= 1.0 - 1e-12);
    }
}

TEST_CASE("van der Waerden values and equality witness") {
    CHECK(vdw_lower_bound(1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(vdw_lower_bound(3) == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
    for (int n = 1; n <= 8; ++n) {
        Matrix j(n, n, 1.0 / n);
        CHECK(permanent_ryser(j) == doctest::Approx(vdw_lower_bound(n)).epsilon(1e-10));
    }
}

TEST_CASE("bregman extension values") {
    CHECK(bregman_extension_bound({1, 1, 1}) == doctest::Approx(1.0).epsilon(1e-14));
    // all t_i = N on J_N/N attains the vdw value
    for (int n : {2, 3, 4}) {
        std::vector<long long> t(n, n);
        CHECK(bregman_extension_bound(t) == doctest::Approx(vdw_lower_bound(n)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(bregman_extension_bound({0, 1}), validation_error);
}

TEST_CASE("bregman bound dominates the permanent on sampled matrices") {
    RandomSource rng(53);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 2 + static_cast<int>(rng.next_u64() % 6);
        Matrix a(n, n);
        for (double& v : a.data) v = std::exp(2.0 * rng.normal());
        ScalingResult s = sinkhorn_scale(a);
        std::vector<long long> t(n);
        for (int i = 0; i < n; ++i) {
            double mx = 0.0;
            for (int j = 0; j < n; ++j) mx = std::max(mx, s.B(i, j));
            t[i] = std::max(1LL, static_cast<long long>(std::floor(1.0 / mx)));
        }
        double per = permanent_ryser(s.B);
        CHECK(per <= bregman_extension_bound(t) + 1e-10);
        CHECK(per >= vdw_lower_bound(n) - 1e-10);
    }
}

TEST_CASE("soules bound values and integer agreement") {
    CHECK(soules_bound({1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-14));
    // per-factor at t=2: Gamma(3)^{1/2}/2 = sqrt(2)/2
    CHECK(soules_bound({2.0}) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
    for (long long t = 1; t <= 15; ++t) {
        double so = log_soules_bound({double(t), double(t), double(t)});
        double br = log_bregman_extension_bound({t, t, t});
        CHECK(so == doctest::Approx(br).epsilon(1.0).scale(1e-12));
    }
    CHECK_THROWS_AS(soules_bound({0.0}), validation_error);
}

TEST_CASE("theorem_margin_bounds on standard problems") {
    // unit margins: both uppers 1, lower = vdw
    ProblemInstance u = validate_problem({1, 1, 1}, {1, 1, 1});
    MarginBounds mb = theorem_margin_bounds(u);
    CHECK(mb.per_upper_rows == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mb.per_upper_cols == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mb.per_lower == doctest::Approx(vdw_lower_bound(3)).epsilon(1e-12));

    // magic 3x3 t=2: upper = (2!/4)^3 = 0.125, lower = 6!/6^6
    ProblemInstance p = validate_problem({2, 2, 2}, {2, 2, 2});
    MarginBounds b = theorem_margin_bounds(p);
    CHECK(b.per_upper_rows == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(b.per_upper_cols == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(b.per_lower == doctest::Approx(720.0 / std::pow(6.0, 6)).epsilon(1e-12));
}

TEST_CASE("scaled block matrices respect the margin bounds") {
    RandomSource rng(59);
    ProblemInstance p = validate_problem({2, 2}, {2, 2});
    MarginBounds mb = theorem_margin_bounds(p);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix gamma = sample_gamma(2, 2, rng);
        BlockSquareMatrix a = assemble_block_matrix(p, gamma);
        ScalingResult s = sinkhorn_scale(a.entries);
        double per = permanent_ryser(s.B);
        CHECK(per >= mb.per_lower - 1e-10);
        CHECK(per <= std::min(mb.per_upper_rows, mb.per_upper_cols) + 1e-10);
    }
}
