#include "strata/copula.hpp"
#include "strata/rng.hpp"
#include "strata/stats.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace strata;

namespace {

Vector point2(double u, double v) {
    Vector p(2);
    p << u, v;
    return p;
}

double brute_force_tau(const Matrix& xy) {
    const Eigen::Index n = xy.rows();
    std::int64_t num = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dx = xy(i, 0) - xy(j, 0);
            const double dy = xy(i, 1) - xy(j, 1);
            const double s = dx * dy;
            if (s > 0) ++num;
            else if (s < 0) --num;
        }
    return static_cast<double>(num) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace

TEST_CASE("copula cdf closed forms") {
    SECTION("gumbel theta=1 is independence") {
        const CopulaSpec g{CopulaFamily::Gumbel, 1.0};
        CHECK_THAT(copula_cdf(g, point2(0.3, 0.8)), Catch::Matchers::WithinAbs(0.24, 1e-12));
    }
    SECTION("clayton theta=2 at the median point") {
        const CopulaSpec c{CopulaFamily::Clayton, 2.0};
        CHECK_THAT(copula_cdf(c, point2(0.5, 0.5)),
                   Catch::Matchers::WithinAbs(0.37796447300922725, 1e-12));
    }
    SECTION("frank theta=5 matches the direct formula") {
        const CopulaSpec f{CopulaFamily::Frank, 5.0};
        // independent evaluation: -log1p(expm1(-1.5)*expm1(-3.5)/expm1(-5))/5
        CHECK_THAT(copula_cdf(f, point2(0.3, 0.7)),
                   Catch::Matchers::WithinAbs(0.28419478481814103, 1e-12));
    }
    SECTION("frank negative theta stays a valid cdf") {
        const CopulaSpec f{CopulaFamily::Frank, -4.0};
        const double c = copula_cdf(f, point2(0.4, 0.6));
        CHECK(c > 0.0);
        CHECK(c < 0.4);
        CHECK(c < 0.24);  // negative dependence sits below independence
    }
    SECTION("domain violations throw") {
        CHECK_THROWS_AS(copula_cdf(CopulaSpec{CopulaFamily::Clayton, -1.0}, point2(0.5, 0.5)),
                        ConfigError);
        CHECK_THROWS_AS(copula_cdf(CopulaSpec{CopulaFamily::Gumbel, 0.5}, point2(0.5, 0.5)),
                        ConfigError);
        CHECK_THROWS_AS(copula_cdf(CopulaSpec{CopulaFamily::Clayton, 2.0}, point2(0.0, 0.5)),
                        DataError);
    }
}

TEST_CASE("copula margins: C(u, 1-eps) approaches u") {
    const double eps = 1e-11;
    for (const auto spec : {CopulaSpec{CopulaFamily::Clayton, 2.0},
                            CopulaSpec{CopulaFamily::Gumbel, 1.7},
                            CopulaSpec{CopulaFamily::Frank, 4.0},
                            CopulaSpec{CopulaFamily::Frank, -3.0}}) {
        for (double u : {0.1, 0.35, 0.7, 0.95})
            CHECK_THAT(copula_cdf(spec, point2(u, 1.0 - eps)), Catch::Matchers::WithinAbs(u, 1e-9));
    }
}

TEST_CASE("frechet-hoeffding bounds hold on a random grid, all families and mixture") {
    Rng rng(40);
    MixtureParams mix;
    mix.components[0].theta = 1.5;
    mix.components[1].theta = -2.0;
    mix.components[2].theta = 2.5;
    mix.weights << 0.4, 0.35, 0.25;
    const std::vector<CopulaModel> models{CopulaSpec{CopulaFamily::Clayton, 3.0},
                                          CopulaSpec{CopulaFamily::Gumbel, 2.0},
                                          CopulaSpec{CopulaFamily::Frank, 6.0},
                                          CopulaSpec{CopulaFamily::Frank, -6.0}, mix};
    for (int i = 0; i < 200; ++i) {
        const double u = rng.uniform(), v = rng.uniform();
        const double lower = std::max(u + v - 1.0, 0.0);
        const double upper = std::min(u, v);
        for (const auto& m : models) {
            const double c = copula_cdf(m, point2(u, v));
            CHECK(c >= lower - 1e-12);
            CHECK(c <= upper + 1e-12);
        }
    }
}

TEST_CASE("copula density equals the finite-difference mixed partial of the cdf") {
    Rng rng(41);
    const std::vector<CopulaSpec> specs{{CopulaFamily::Clayton, 2.0},
                                        {CopulaFamily::Gumbel, 1.8},
                                        {CopulaFamily::Frank, 4.0},
                                        {CopulaFamily::Frank, -3.0}};
    for (const auto& spec : specs) {
        for (int i = 0; i < 20; ++i) {
            const double u = rng.uniform(0.1, 0.9);
            const double v = rng.uniform(0.1, 0.9);
            const double h = 1e-4;
            const double fd = (copula_cdf(spec, point2(u + h, v + h)) -
                               copula_cdf(spec, point2(u + h, v - h)) -
                               copula_cdf(spec, point2(u - h, v + h)) +
                               copula_cdf(spec, point2(u - h, v - h))) /
                              (4.0 * h * h);
            CHECK_THAT(copula_density(spec, point2(u, v)), Catch::Matchers::WithinAbs(fd, 1e-5));
        }
    }
}

TEST_CASE("K=3 densities equal the finite-difference third mixed partial") {
    Rng rng(42);
    for (const auto& spec :
         {CopulaSpec{CopulaFamily::Clayton, 1.5}, CopulaSpec{CopulaFamily::Gumbel, 1.6}}) {
        for (int i = 0; i < 8; ++i) {
            Vector u(3);
            u << rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75);
            const double h = 2e-3;
            double fd = 0.0;
            for (int s0 = -1; s0 <= 1; s0 += 2)
                for (int s1 = -1; s1 <= 1; s1 += 2)
                    for (int s2 = -1; s2 <= 1; s2 += 2) {
                        Vector q(3);
                        q << u[0] + s0 * h, u[1] + s1 * h, u[2] + s2 * h;
                        fd += s0 * s1 * s2 * copula_cdf(spec, q);
                    }
            fd /= 8.0 * h * h * h;
            const double c = copula_density(spec, u);
            CHECK_THAT(c, Catch::Matchers::WithinAbs(fd, std::max(1e-3, 5e-3 * c)));
        }
    }
}

TEST_CASE("densities approach 1 near the independence edge of each family") {
    Rng rng(43);
    for (int i = 0; i < 50; ++i) {
        const Vector u = point2(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95));
        CHECK_THAT(copula_density(CopulaSpec{CopulaFamily::Clayton, 1e-9}, u),
                   Catch::Matchers::WithinAbs(1.0, 1e-6));
        CHECK_THAT(copula_density(CopulaSpec{CopulaFamily::Gumbel, 1.0 + 1e-10}, u),
                   Catch::Matchers::WithinAbs(1.0, 1e-6));
        CHECK_THAT(copula_density(CopulaSpec{CopulaFamily::Frank, 1e-9}, u),
                   Catch::Matchers::WithinAbs(1.0, 1e-6));
    }
}

TEST_CASE("clayton density integrates to one (midpoint rule, singular corner)") {
    const CopulaSpec spec{CopulaFamily::Clayton, 2.0};
    const int n = 500;
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double u = (i + 0.5) / n;
            const double v = (j + 0.5) / n;
            acc += copula_density(spec, point2(u, v));
        }
    acc /= static_cast<double>(n) * n;
    CHECK_THAT(acc, Catch::Matchers::WithinAbs(1.0, 1e-3));
}

TEST_CASE("density/cdf consistency by inclusion-exclusion away from corners") {
    for (const auto& spec :
         {CopulaSpec{CopulaFamily::Clayton, 2.0}, CopulaSpec{CopulaFamily::Gumbel, 2.2},
          CopulaSpec{CopulaFamily::Frank, 5.0}}) {
        const double a = 0.2, b = 0.8;
        const int n = 400;
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                acc += copula_density(spec, point2(a + (i + 0.5) * (b - a) / n,
                                                   a + (j + 0.5) * (b - a) / n));
        acc *= (b - a) * (b - a) / (static_cast<double>(n) * n);
        const double expect = copula_cdf(spec, point2(b, b)) - copula_cdf(spec, point2(a, b)) -
                              copula_cdf(spec, point2(b, a)) + copula_cdf(spec, point2(a, a));
        CHECK_THAT(acc, Catch::Matchers::WithinAbs(expect, 2e-6));
    }
}

TEST_CASE("kendall tau: hand-enumerated cases and brute-force agreement") {
    Matrix mono(5, 2);
    mono << 1, 2, 2, 4, 3, 5, 4, 7, 5, 9;
    CHECK(kendall_tau(mono) == 1.0);

    Matrix anti(4, 2);
    anti << 1, 9, 2, 7, 3, 4, 4, 1;
    CHECK(kendall_tau(anti) == -1.0);

    Matrix three(3, 2);
    three << 1, 1, 2, 3, 3, 2;
    CHECK_THAT(kendall_tau(three), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));

    // ties count as neither concordant nor discordant (tau-a numerator)
    Matrix tied(4, 2);
    tied << 1, 1, 1, 2, 2, 3, 3, 3;
    CHECK_THAT(kendall_tau(tied), Catch::Matchers::WithinAbs(brute_force_tau(tied), 1e-15));

    Rng rng(44);
    Matrix sample = rng.normal_matrix(200, 2);
    CHECK_THAT(kendall_tau(sample), Catch::Matchers::WithinAbs(brute_force_tau(sample), 1e-15));
}

TEST_CASE("sampling reproduces the analytic tau of each family") {
    const int n = 30000;
    SECTION("clayton tau = theta/(theta+2)") {
        Rng rng = Rng::stream(2025, "test.clayton");
        const Matrix u = copula_sample(CopulaSpec{CopulaFamily::Clayton, 2.0}, n, 2, rng);
        CHECK_THAT(kendall_tau(u), Catch::Matchers::WithinAbs(0.5, 0.02));
    }
    SECTION("gumbel tau = 1 - 1/theta") {
        Rng rng = Rng::stream(2025, "test.gumbel");
        const Matrix u = copula_sample(CopulaSpec{CopulaFamily::Gumbel, 2.0}, n, 2, rng);
        CHECK_THAT(kendall_tau(u), Catch::Matchers::WithinAbs(0.5, 0.02));
    }
    SECTION("frank positive and negative theta") {
        Rng rng = Rng::stream(2025, "test.frank");
        const double tau5 = tau_from_theta(CopulaFamily::Frank, 5.0);
        const Matrix u = copula_sample(CopulaSpec{CopulaFamily::Frank, 5.0}, n, 2, rng);
        CHECK_THAT(kendall_tau(u), Catch::Matchers::WithinAbs(tau5, 0.02));
        const Matrix un = copula_sample(CopulaSpec{CopulaFamily::Frank, -5.0}, n, 2, rng);
        CHECK_THAT(kendall_tau(un), Catch::Matchers::WithinAbs(-tau5, 0.02));
    }
    SECTION("sample values stay inside the open unit square") {
        Rng rng = Rng::stream(2025, "test.range");
        for (const auto& spec :
             {CopulaSpec{CopulaFamily::Clayton, 0.5}, CopulaSpec{CopulaFamily::Gumbel, 3.0}}) {
            const Matrix u = copula_sample(spec, 2000, 3, rng);
            CHECK((u.array() > 0.0).all());
            CHECK((u.array() < 1.0).all());
        }
    }
}

TEST_CASE("degenerate mixture weights reproduce the pure family distribution") {
    MixtureParams mix;
    mix.components[0].theta = 2.0;
    mix.weights << 1.0, 0.0, 0.0;
    Rng rng1 = Rng::stream(7, "mix");
    const Matrix a = copula_sample(mix, 20000, 2, rng1);
    const double tau_mix = kendall_tau(a);
    CHECK_THAT(tau_mix, Catch::Matchers::WithinAbs(0.5, 0.025));
}

TEST_CASE("frank debye relation and inversion round trip") {
    for (double theta : {0.5, 2.0, 8.0, 20.0}) {
        const double tau = tau_from_theta(CopulaFamily::Frank, theta);
        CHECK_THAT(theta_from_tau(CopulaFamily::Frank, tau),
                   Catch::Matchers::WithinAbs(theta, 1e-4 * std::max(1.0, theta)));
    }
    CHECK(tau_from_theta(CopulaFamily::Frank, -5.0) == -tau_from_theta(CopulaFamily::Frank, 5.0));
}

TEST_CASE("fit_single recovers simulated parameters") {
    SECTION("clayton theta=2") {
        Rng rng = Rng::stream(90, "fit.clayton");
        const Matrix u = copula_sample(CopulaSpec{CopulaFamily::Clayton, 2.0}, 3000, 2, rng);
        const SingleFitResult fit = fit_single(u, CopulaFamily::Clayton);
        CHECK_THAT(fit.spec.theta, Catch::Matchers::WithinAbs(2.0, 0.15));
    }
    SECTION("gumbel theta=2.5") {
        Rng rng = Rng::stream(90, "fit.gumbel");
        const Matrix u = copula_sample(CopulaSpec{CopulaFamily::Gumbel, 2.5}, 3000, 2, rng);
        const SingleFitResult fit = fit_single(u, CopulaFamily::Gumbel);
        CHECK_THAT(fit.spec.theta, Catch::Matchers::WithinAbs(2.5, 0.2));
    }
    SECTION("frank theta=-4") {
        Rng rng = Rng::stream(90, "fit.frank");
        const Matrix u = copula_sample(CopulaSpec{CopulaFamily::Frank, -4.0}, 3000, 2, rng);
        const SingleFitResult fit = fit_single(u, CopulaFamily::Frank);
        CHECK_THAT(fit.spec.theta, Catch::Matchers::WithinAbs(-4.0, 0.5));
    }
    SECTION("independent uniforms land near the independence boundary") {
        Rng rng = Rng::stream(90, "fit.indep");
        Matrix u(3000, 2);
        for (int i = 0; i < 3000; ++i) {
            u(i, 0) = rng.uniform();
            u(i, 1) = rng.uniform();
        }
        CHECK(fit_single(u, CopulaFamily::Clayton).spec.theta < 0.1);
        const SingleFitResult g = fit_single(u, CopulaFamily::Gumbel);
        CHECK(g.spec.theta < 1.05);
    }
    SECTION("negatively associated data pins gumbel at the boundary with a flag") {
        Rng rng = Rng::stream(90, "fit.negdep");
        const Matrix u = copula_sample(CopulaSpec{CopulaFamily::Frank, -8.0}, 500, 2, rng);
        const SingleFitResult g = fit_single(u, CopulaFamily::Gumbel);
        CHECK(g.boundary);
        CHECK(g.spec.theta == 1.0);
    }
}

TEST_CASE("fit_mixture identifies a pure clayton component") {
    Rng rng = Rng::stream(91, "mixfit");
    const Matrix u = copula_sample(CopulaSpec{CopulaFamily::Clayton, 2.0}, 3000, 2, rng);
    const MixtureFitResult fit = fit_mixture(u, 3, 91);
    CHECK(fit.params.weights[0] >= 0.9);
    CHECK_THAT(fit.params.components[0].theta, Catch::Matchers::WithinAbs(2.0, 0.3));

    // mixture log-likelihood dominates the best single family
    double best_single = -1e300;
    for (auto fam : {CopulaFamily::Clayton, CopulaFamily::Frank, CopulaFamily::Gumbel})
        best_single = std::max(best_single, fit_single(u, fam).log_likelihood);
    CHECK(fit.log_likelihood >= best_single - 1e-6);
}

TEST_CASE("gof bootstrap: correct family accepted, wrong family rejected") {
    Rng rng = Rng::stream(92, "gof.data");
    const Matrix u = copula_sample(CopulaSpec{CopulaFamily::Clayton, 2.0}, 600, 2, rng);

    const SingleFitResult cl = fit_single(u, CopulaFamily::Clayton, false);
    const GofResult ok = gof_bootstrap(u, cl.spec, 199, 555);
    CHECK(ok.p_global > 0.05);

    const SingleFitResult gb = fit_single(u, CopulaFamily::Gumbel, false);
    const GofResult bad = gof_bootstrap(u, gb.spec, 199, 556);
    CHECK(bad.p_global < 0.05);

    CHECK(ok.statistic_global >= 0.0);
    CHECK(ok.statistic_tail >= 0.0);
    CHECK(ok.statistic_tail <= ok.statistic_global + 1e-15);
}

TEST_CASE("gof p-values are deterministic given data, spec, B, seed") {
    Rng rng = Rng::stream(93, "gof.det");
    const Matrix u = copula_sample(CopulaSpec{CopulaFamily::Clayton, 1.5}, 300, 2, rng);
    const CopulaSpec spec{CopulaFamily::Clayton, 1.5};
    const GofResult a = gof_bootstrap(u, spec, 99, 777);
    const GofResult b = gof_bootstrap(u, spec, 99, 777);
    CHECK(a.p_global == b.p_global);
    CHECK(a.p_tail == b.p_tail);
    CHECK(a.statistic_global == b.statistic_global);
    CHECK_THROWS_AS(gof_bootstrap(u, spec, 50, 1), ConfigError);
}

TEST_CASE("empirical copula dominance counts match the O(n^2) definition") {
    Rng rng(94);
    Matrix u(300, 2);
    for (int i = 0; i < 300; ++i) {
        u(i, 0) = rng.uniform();
        u(i, 1) = rng.uniform();
    }
    const Vector fast = copula_detail::empirical_copula_at_points(u);
    for (int t = 0; t < 300; t += 17) {
        int count = 0;
        for (int s = 0; s < 300; ++s)
            if (u(s, 0) <= u(t, 0) && u(s, 1) <= u(t, 1)) ++count;
        CHECK(fast[t] == static_cast<double>(count) / 300.0);
    }
}
