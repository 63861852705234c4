#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "periodlab/cycles.hpp"

using namespace periodlab;

namespace {

BivariatePolynomial testbed() {
    BivariatePolynomial H(3);
    H.set(3, 0, 1);
    H.set(1, 0, -3);
    H.set(0, 3, 2);
    H.set(0, 1, -6);
    return H;
}

long long int_det(std::vector<std::vector<int>> m) {
    // Bareiss over long long
    int n = int(m.size());
    std::vector<std::vector<long long>> a(n, std::vector<long long>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[i][j] = m[i][j];
    long long prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (a[k][k] == 0) {
            int p = -1;
            for (int r = k + 1; r < n; ++r)
                if (a[r][k] != 0) {
                    p = r;
                    break;
                }
            if (p < 0) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j)
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return sign * a[n - 1][n - 1];
}

int matrix_rank(std::vector<std::vector<int>> m) {
    int n = int(m.size());
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[i][j] = m[i][j];
    int rank = 0;
    for (int col = 0; col < n && rank < n; ++col) {
        int piv = -1;
        double best = 1e-9;
        for (int r = rank; r < n; ++r)
            if (std::abs(a[r][col]) > best) {
                best = std::abs(a[r][col]);
                piv = r;
            }
        if (piv < 0) continue;
        std::swap(a[rank], a[piv]);
        for (int r = 0; r < n; ++r) {
            if (r == rank) continue;
            double f = a[r][col] / a[rank][col];
            for (int c = 0; c < n; ++c) a[r][c] -= f * a[rank][c];
        }
        ++rank;
    }
    return rank;
}

}  // namespace

TEST_CASE("local seed near a critical value") {
    BivariatePolynomial H = testbed();
    auto seed = local_cycle_seed(H, cplx(-6, 0), cplx(-6 + 0.01, 0));
    CHECK(seed.arcs.size() == 2);
    CHECK(seed.arc_couples() == 1);
    CHECK(closure_defect(H, seed) < 1e-8);
    // opposite traversal over the same edge
    CHECK(std::abs(seed.arcs[0].x_start - seed.arcs[1].x_end) < 1e-12);
    CHECK(std::abs(seed.arcs[0].x_end - seed.arcs[1].x_start) < 1e-12);
    CHECK(seed.arcs[0].orientation == -seed.arcs[1].orientation);

    // shrinking: cycle length goes to 0 monotonically as t -> a_j
    double prev = 1e300;
    for (double d : {1e-2, 1e-3, 1e-4}) {
        auto s = local_cycle_seed(H, cplx(-6, 0), cplx(-6 + d, 0));
        auto m = cycle_metrics(H, s, 1e9, 1e9);
        CHECK(m.length < prev);
        prev = m.length;
    }
    CHECK(prev < 0.1);

    // isolation failure when t_near is too far
    CHECK_THROWS(local_cycle_seed(H, cplx(-6, 0), cplx(-6 + 3.0, 0)));
}

TEST_CASE("self-intersection of a seed is zero") {
    BivariatePolynomial H = testbed();
    auto seed = local_cycle_seed(H, cplx(-6, 0), cplx(-6 + 0.05, 0));
    CHECK(intersection_index(H, seed, seed) == 0);
}

TEST_CASE("event-free continuation keeps one couple") {
    BivariatePolynomial H = testbed();
    // short straight path ending at a = -6
    PLPath path{{cplx(-6.4, 0.45), cplx(-6, 0)}};
    auto c = continue_cycle(H, path);
    CHECK(c.arc_couples() >= 1);
    CHECK(closure_defect(H, c) < 1e-7 * std::max(1.0, cycle_metrics(H, c, 1e9, 1e9).length));
    // short paths see no events
    CHECK(c.arc_couples() == 1);
}

TEST_CASE("continuation from a distant base point") {
    BivariatePolynomial H = testbed();
    PLPath path{{cplx(0, 4), cplx(-6, 0)}};
    auto c = continue_cycle(H, path);
    auto met = cycle_metrics(H, c, 1e9, 1e9);
    CHECK(closure_defect(H, c) < 1e-7 * std::max(1.0, met.length));
    // paper bound: m <= 2^{23 n^12 m(alpha)} is astronomically loose; here we
    // check the count is small and stable under a finer base step
    RunConfig fine;
    fine.continuation_initial_div = 1024;
    auto c2 = continue_cycle(H, path, fine);
    CHECK(c.arc_couples() == c2.arc_couples());
    auto met2 = cycle_metrics(H, c2, 1e9, 1e9);
    CHECK(met.length == doctest::Approx(met2.length).epsilon(1e-6));
}

TEST_CASE("transport around a loop returns the cycle") {
    BivariatePolynomial H = testbed();
    PLPath path{{cplx(0, 4), cplx(-6, 0)}};
    auto c = continue_cycle(H, path);
    // rectangle loop around nothing: t0 -> t0+2 -> t0+2+2i -> t0+2i -> t0
    cplx t0(0, 4);
    PLPath loop{{t0, t0 + cplx(2, 0), t0 + cplx(2, 2), t0 + cplx(0, 2), t0}};
    auto back = transport_cycle(H, c, loop);
    REQUIRE(back.arcs.size() == c.arcs.size());
    auto m1 = cycle_metrics(H, c, 1e9, 1e9);
    auto m2 = cycle_metrics(H, back, 1e9, 1e9);
    CHECK(m1.length == doctest::Approx(m2.length).epsilon(1e-6));
    // same homology class: difference has zero intersection with the original
    CHECK(intersection_index(H, c, back) == 0);
}

TEST_CASE("quadrature-grade sampling is consistent") {
    BivariatePolynomial H = testbed();
    auto seed = local_cycle_seed(H, cplx(2, 0), cplx(2.02, 0.01));
    ProjectionContext ctx(H, RunConfig::defaults());
    for (const auto& arc : seed.arcs) {
        ArcSheet sheet(ctx, seed.t, arc);
        auto s1 = sheet.sample(64);
        ArcSheet sheet2(ctx, seed.t, arc);
        auto s2 = sheet2.sample(128);
        // shared u-values agree
        for (int k = 0; k <= 64; ++k) {
            CHECK(std::abs(s1.xs[k] - s2.xs[2 * k]) < 1e-12);
            CHECK(std::abs(s1.ys[k] - s2.ys[2 * k]) < 1e-9);
        }
        // samples satisfy H(x,y) = t away from the branch ends
        for (int k = 4; k <= 60; ++k)
            CHECK(std::abs(H.eval(s1.xs[k], s1.ys[k]) - seed.t) < 1e-9);
    }
}

TEST_CASE("marked basis on the testbed") {
    BivariatePolynomial H = testbed();
    RunConfig cfg;
    auto basis = marked_basis(H, cplx(0, 4), cfg);
    REQUIRE(basis.cycles.size() == 4);
    REQUIRE(basis.critical_values.size() == 4);

    // closure of all cycles
    for (const auto& c : basis.cycles) {
        auto met = cycle_metrics(H, c, 1e9, 1e9);
        CHECK(closure_defect(H, c) < 1e-7 * std::max(1.0, met.length));
    }

    // intersection matrix: integer entries, antisymmetric, zero diagonal
    const auto& M = basis.intersection_matrix;
    for (int i = 0; i < 4; ++i) {
        CHECK(M[i][i] == 0);
        for (int j = 0; j < 4; ++j) CHECK(M[i][j] == -M[j][i]);
    }
    // nondegenerate pairing exists somewhere (the basis cycles do intersect)
    bool nonzero = false;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) nonzero = nonzero || M[i][j] != 0;
    CHECK(nonzero);

    // the level curve is a genus-1 surface with 3 punctures, so the
    // intersection form has rank exactly 2 and determinant 0
    CHECK(matrix_rank(M) == 2);
    CHECK(int_det(M) == 0);

    // each cycle shrinks when continued forward to its critical value
    for (size_t j = 0; j < basis.cycles.size(); ++j) {
        cplx a = basis.critical_values[j];
        PLPath fwd{{basis.t0, a + 0.02 * (basis.t0 - a) / std::abs(basis.t0 - a)}};
        auto moved = transport_cycle(H, basis.cycles[j], fwd, cfg);
        auto m0 = cycle_metrics(H, basis.cycles[j], 1e9, 1e9);
        auto m1 = cycle_metrics(H, moved, 1e9, 1e9);
        CHECK(m1.length < 0.5 * m0.length);
    }
}

TEST_CASE("intersection values stable under resolution doubling") {
    BivariatePolynomial H = testbed();
    RunConfig cfg;
    auto basis = marked_basis(H, cplx(0, 4), cfg);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (i == j) continue;
            int v1 = intersection_index(H, basis.cycles[i], basis.cycles[j], cfg, 384);
            int v2 = intersection_index(H, basis.cycles[i], basis.cycles[j], cfg, 768);
            CHECK(v1 == v2);
            CHECK(v1 == basis.intersection_matrix[i][j]);
        }
}
