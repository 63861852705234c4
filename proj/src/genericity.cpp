#include "periodlab/genericity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "periodlab/rootsolve.hpp"

namespace periodlab {

double fs_distance(cplx a0, cplx a1, cplx b0, cplx b1) {
    double na = std::sqrt(std::norm(a0) + std::norm(a1));
    double nb = std::sqrt(std::norm(b0) + std::norm(b1));
    cplx ip = a0 * std::conj(b0) + a1 * std::conj(b1);
    double c = std::abs(ip) / (na * nb);
    return std::acos(std::clamp(c, 0.0, 1.0));
}

double slope_line_distance(cplx c1, cplx c2) {
    return fs_distance(cplx(1, 0), c1, cplx(1, 0), c2);
}

double slope_distance_to_y_axis(cplx c) {
    return fs_distance(cplx(1, 0), c, cplx(0, 0), cplx(1, 0));
}

LineFactorization factor_zero_lines(const BivariatePolynomial& h_in, const RunConfig& cfg) {
    BivariatePolynomial h = h_in.trimmed(1e-14);
    int d = h.degree();
    if (d < 0) throw std::domain_error("factor_zero_lines: zero polynomial");
    if (!h.is_homogeneous(1e-12))
        throw std::domain_error("factor_zero_lines: input not homogeneous");
    LineFactorization out;
    double scale = h.max_abs_coeff();
    cplx lead = h.coeff(0, d);  // coefficient of y^d
    out.c_minus1 = lead;
    out.contains_y_axis = std::abs(lead) <= 1e-10 * scale;
    // slopes are the roots of c -> h(1, c)
    UniPoly slope_poly(d + 1);
    for (int j = 0; j <= d; ++j) slope_poly[j] = h.coeff(d - j, j);
    out.slopes = upoly_roots(slope_poly, cfg.tol_root_polish);
    return out;
}

GenericityProfile genericity_profile(const BivariatePolynomial& h, const RunConfig& cfg) {
    int d = h.degree(1e-14);
    if (d < 3) throw std::domain_error("genericity_profile: degree must be >= 3");
    LineFactorization f = factor_zero_lines(h, cfg);
    int n = d - 1;
    std::vector<std::pair<cplx, cplx>> lines;  // spanning vectors
    for (cplx c : f.slopes) lines.push_back({cplx(1, 0), c});
    if (f.contains_y_axis) lines.push_back({cplx(0, 0), cplx(1, 0)});
    GenericityProfile out;
    double mind = std::acos(-1.0);
    for (size_t i = 0; i < lines.size(); ++i)
        for (size_t j = i + 1; j < lines.size(); ++j)
            mind = std::min(mind, fs_distance(lines[i].first, lines[i].second,
                                              lines[j].first, lines[j].second));
    if (lines.size() <= 1) mind = std::acos(-1.0) / 2;
    out.min_line_distance = mind;
    out.c1 = n * mind;
    out.c_prime = std::min(out.c1, 1.0);
    out.is_generic = mind > 1e-6;
    return out;
}

EnclosingDisc minimal_enclosing_disc(const std::vector<cplx>& pts_in, std::uint64_t seed) {
    if (pts_in.empty()) return {};
    std::vector<cplx> pts = pts_in;
    std::mt19937_64 rng(seed);
    std::shuffle(pts.begin(), pts.end(), rng);

    auto disc2 = [](cplx a, cplx b) {
        return EnclosingDisc{0.5 * (a + b), 0.5 * std::abs(a - b)};
    };
    auto disc3 = [&](cplx a, cplx b, cplx c) -> EnclosingDisc {
        // circumcircle; fall back to the widest pair when nearly collinear
        cplx ba = b - a, ca = c - a;
        double d = 2.0 * (std::real(ba) * std::imag(ca) - std::imag(ba) * std::real(ca));
        double span = std::max({std::abs(ba), std::abs(ca), std::abs(b - c)});
        if (std::abs(d) < 1e-14 * span * span) {
            EnclosingDisc best = disc2(a, b);
            for (const auto& cand : {disc2(a, c), disc2(b, c)})
                if (cand.radius > best.radius) best = cand;
            return best;
        }
        double ux = (std::imag(ca) * std::norm(ba) - std::imag(ba) * std::norm(ca)) / d;
        double uy = (std::real(ba) * std::norm(ca) - std::real(ca) * std::norm(ba)) / d;
        cplx center = a + cplx(ux, uy);
        return {center, std::abs(center - a)};
    };
    auto inside = [](const EnclosingDisc& D, cplx p) {
        return std::abs(p - D.center) <= D.radius * (1 + 1e-12) + 1e-300;
    };

    EnclosingDisc D{pts[0], 0};
    for (size_t i = 1; i < pts.size(); ++i) {
        if (inside(D, pts[i])) continue;
        D = {pts[i], 0};
        for (size_t j = 0; j < i; ++j) {
            if (inside(D, pts[j])) continue;
            D = disc2(pts[i], pts[j]);
            for (size_t k = 0; k < j; ++k) {
                if (inside(D, pts[k])) continue;
                D = disc3(pts[i], pts[j], pts[k]);
            }
        }
    }
    return D;
}

namespace {

struct NewtonResult {
    cplx x, y;
    double residual;
    bool ok;
};

NewtonResult newton2d(const BivariatePolynomial& Hx, const BivariatePolynomial& Hy,
                      const BivariatePolynomial& Hxx, const BivariatePolynomial& Hxy,
                      const BivariatePolynomial& Hyy, cplx x, cplx y, double tol,
                      double scale) {
    for (int it = 0; it < 60; ++it) {
        cplx fx = Hx.eval(x, y), fy = Hy.eval(x, y);
        double res = std::max(std::abs(fx), std::abs(fy));
        if (res <= tol * scale) return {x, y, res, true};
        cplx a = Hxx.eval(x, y), b = Hxy.eval(x, y), c = Hyy.eval(x, y);
        cplx det = a * c - b * b;
        if (std::abs(det) < 1e-300) break;
        cplx dx = (c * fx - b * fy) / det;
        cplx dy = (a * fy - b * fx) / det;
        x -= dx;
        y -= dy;
        if (std::abs(dx) + std::abs(dy) < 1e-17 * (1 + std::abs(x) + std::abs(y))) {
            cplx rfx = Hx.eval(x, y), rfy = Hy.eval(x, y);
            double r = std::max(std::abs(rfx), std::abs(rfy));
            return {x, y, r, r <= 10 * tol * scale};
        }
    }
    cplx fx = Hx.eval(x, y), fy = Hy.eval(x, y);
    double res = std::max(std::abs(fx), std::abs(fy));
    return {x, y, res, res <= tol * scale};
}

std::vector<CriticalPoint> find_critical_points(const BivariatePolynomial& H,
                                                const RunConfig& cfg) {
    BivariatePolynomial Hx = H.dx(), Hy = H.dy();
    BivariatePolynomial Hxx = Hx.dx(), Hxy = Hx.dy(), Hyy = Hy.dy();
    int n = H.degree(1e-14) - 1;
    int bound = 2 * n * n + 2;
    UniPoly R = resultant_eliminating_y(Hx, Hy, bound, 2.5);
    R = upoly_trim(R, 1e-11);
    if (R.size() <= 1 && (R.empty() || std::abs(R[0]) < 1e-200))
        throw std::domain_error("degenerate critical locus: resultant identically zero");
    double grad_scale = std::max({1.0, Hx.max_abs_coeff(), Hy.max_abs_coeff()});
    // Hessian scale from the second-derivative polynomial coefficients, so the
    // Morse test does not fool itself at a degenerate point where all entries
    // vanish together.
    double hess_coeff_scale =
        std::max({Hxx.max_abs_coeff(), Hxy.max_abs_coeff(), Hyy.max_abs_coeff(), 1e-30});
    std::vector<CriticalPoint> pts;
    auto consider = [&](cplx x0, cplx y0) {
        auto nr = newton2d(Hx, Hy, Hxx, Hxy, Hyy, x0, y0, cfg.tol_root_polish, grad_scale);
        if (!nr.ok) return;
        double local = 1 + std::abs(nr.x) + std::abs(nr.y);
        CriticalPoint cp;
        cp.x = nr.x;
        cp.y = nr.y;
        cp.value = H.eval(nr.x, nr.y);
        cplx a = Hxx.eval(nr.x, nr.y), b = Hxy.eval(nr.x, nr.y), c = Hyy.eval(nr.x, nr.y);
        cp.hessian_det = a * c - b * b;
        double hscale = hess_coeff_scale * std::pow(local, std::max(0, n - 1));
        cp.morse = std::abs(cp.hessian_det) > 1e-8 * hscale * hscale;
        // Newton stalls at ~sqrt(tol) from a degenerate zero, so non-Morse
        // points get a correspondingly coarser dedup radius.
        for (const auto& p : pts) {
            double radius = (cp.morse && p.morse) ? cfg.tol_dedup : 1e-4;
            if (std::abs(p.x - cp.x) + std::abs(p.y - cp.y) < radius * local) return;
        }
        pts.push_back(cp);
    };
    for (cplx xr : upoly_roots(R, cfg.tol_root_polish)) {
        UniPoly fy = Hy.y_slice(xr);
        auto ys = upoly_roots(fy, cfg.tol_root_polish);
        if (ys.empty()) consider(xr, cplx(0, 0));
        for (cplx yr : ys) consider(xr, yr);
        // Hy may vanish identically in y at special x; also try Hx roots there
        UniPoly fx = Hx.y_slice(xr);
        for (cplx yr : upoly_roots(fx, cfg.tol_root_polish)) consider(xr, yr);
    }
    std::sort(pts.begin(), pts.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        if (std::real(a.value) != std::real(b.value))
            return std::real(a.value) < std::real(b.value);
        return std::imag(a.value) < std::imag(b.value);
    });
    return pts;
}

}  // namespace

CriticalData critical_data(const BivariatePolynomial& H_in, const RunConfig& cfg) {
    BivariatePolynomial H = H_in.trimmed(1e-14);
    int d = H.degree();
    if (d < 3) throw std::domain_error("critical_data: degree must be >= 3");
    int n = d - 1;
    auto [h, lower] = homogeneous_split(H);
    GenericityProfile prof = genericity_profile(h, cfg);
    if (!prof.is_generic)
        throw std::domain_error("critical_data: highest homogeneous part is not generic");

    CriticalData out;
    out.n = n;
    out.c1 = prof.c1;
    out.c_prime = prof.c_prime;

    out.points = find_critical_points(H, cfg);
    int mu = n * n;
    bool saw_degenerate = false;
    for (const auto& p : out.points) saw_degenerate = saw_degenerate || !p.morse;
    if (int(out.points.size()) < mu && !saw_degenerate) {
        // retry in rotated frames; critical points are preimage-invariant
        std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> g;
        for (int attempt = 0; attempt < 3 && int(out.points.size()) < mu; ++attempt) {
            cplx a(g(rng), g(rng)), b(g(rng), g(rng));
            double na = std::sqrt(std::norm(a) + std::norm(b));
            a /= na;
            b /= na;
            AffineChange U = AffineChange::preimage_linear(a, -std::conj(b), b, std::conj(a));
            BivariatePolynomial HU = apply_affine(H, U);
            for (const auto& q : find_critical_points(HU, cfg)) {
                if (!q.morse) continue;
                auto z = U.apply_pre(q.x, q.y);
                double local = 1 + std::abs(z[0]) + std::abs(z[1]);
                bool dup = false;
                for (const auto& p : out.points)
                    if (std::abs(p.x - z[0]) + std::abs(p.y - z[1]) < cfg.tol_dedup * local)
                        dup = true;
                if (dup) continue;
                CriticalPoint cp = q;
                cp.x = z[0];
                cp.y = z[1];
                cp.value = H.eval(z[0], z[1]);
                out.points.push_back(cp);
            }
        }
    }

    bool all_morse = !out.points.empty();
    for (const auto& p : out.points) all_morse = all_morse && p.morse;
    if (int(out.points.size()) < mu && all_morse)
        throw std::domain_error(
            "critical_data: found " + std::to_string(out.points.size()) + " of " +
            std::to_string(mu) + " expected critical points after retries");

    std::vector<cplx> values;
    for (const auto& p : out.points) values.push_back(p.value);
    double vscale = 1.0;
    for (cplx v : values) vscale = std::max(vscale, std::abs(v));
    double min_gap = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < values.size(); ++i)
        for (size_t j = i + 1; j < values.size(); ++j)
            min_gap = std::min(min_gap, std::abs(values[i] - values[j]));
    bool distinct = values.size() >= 2 && min_gap > 1e-9 * vscale;
    out.c2 = (values.size() >= 2 && std::isfinite(min_gap)) ? n * n * min_gap : 0.0;
    out.c_doubleprime = std::min(out.c2, 1.0);
    out.ultra_morse = (int(out.points.size()) == mu) && all_morse && distinct;
    out.enclosing_disc = minimal_enclosing_disc(values, cfg.seed + 1);
    out.c2_assumes_normalized =
        std::abs(out.enclosing_disc.center) < 1e-6 * std::max(1.0, out.enclosing_disc.radius) &&
        std::abs(out.enclosing_disc.radius - 2.0) < 1e-6;

    // consistency flag: dH/dy has no multiple zero curves
    BivariatePolynomial Hy = H.dy();
    int ydeg = 0, xdeg = 0;
    for (int i = 0; i <= Hy.degree_bound(); ++i)
        for (int j = 0; i + j <= Hy.degree_bound(); ++j)
            if (std::abs(Hy.coeff(i, j)) > 1e-13 * std::max(1.0, Hy.max_abs_coeff())) {
                ydeg = std::max(ydeg, j);
                xdeg = std::max(xdeg, i);
            }
    if (ydeg >= 1) {
        UniPoly disc = upoly_trim(
            resultant_eliminating_y(Hy, Hy.dy(), 2 * n * n + 2, 2.0), 1e-9);
        out.dy_squarefree = !disc.empty();
    } else if (xdeg >= 1) {
        UniPoly p(xdeg + 1);
        for (int i = 0; i <= xdeg; ++i) p[i] = Hy.coeff(i, 0);
        UniPoly dp(xdeg);
        for (int i = 1; i <= xdeg; ++i) dp[i - 1] = p[i] * double(i);
        out.dy_squarefree = std::abs(sylvester_resultant(p, dp)) >
                            1e-9 * std::pow(Hy.max_abs_coeff(), xdeg * 2 - 1);
    }
    return out;
}

NormalizeMode normalize_mode_from_string(const std::string& s) {
    if (s == "weak") return NormalizeMode::weak;
    if (s == "normalized") return NormalizeMode::normalized;
    if (s == "unit_scaled" || s == "unit-scaled") return NormalizeMode::unit_scaled;
    if (s == "centrally_rescaled" || s == "centrally-rescaled")
        return NormalizeMode::centrally_rescaled;
    throw std::invalid_argument("unknown normalize mode: " + s);
}

std::string normalize_mode_name(NormalizeMode m) {
    switch (m) {
        case NormalizeMode::weak: return "weak";
        case NormalizeMode::normalized: return "normalized";
        case NormalizeMode::unit_scaled: return "unit_scaled";
        case NormalizeMode::centrally_rescaled: return "centrally_rescaled";
    }
    return "?";
}

namespace {

// lambda -> lambda^{-(n+1)} (H(lambda x, lambda y) - H(0)); keeps h fixed.
BivariatePolynomial central_rescale(const BivariatePolynomial& H, double lambda) {
    int d = H.degree(1e-14);
    AffineChange T = AffineChange::preimage_homothety(lambda);
    T.image_scale = std::pow(lambda, -double(d));
    T.image_shift = -H.eval(cplx(0, 0), cplx(0, 0)) * T.image_scale;
    return apply_affine(H, T);
}

double lower_norm_after_rescale(const BivariatePolynomial& H, double lambda,
                                const RunConfig& cfg) {
    BivariatePolynomial G = central_rescale(H, lambda);
    auto [h, lower] = homogeneous_split(G, 1e-14);
    return lower.is_zero(1e-300) ? 0.0 : max_norm(lower, cfg);
}

}  // namespace

NormalizeResult normalize(const BivariatePolynomial& H_in, NormalizeMode mode,
                          const RunConfig& cfg) {
    BivariatePolynomial H = H_in.trimmed(1e-14);
    int d = H.degree();
    if (d < 3) throw std::domain_error("normalize: degree must be >= 3");
    int np1 = d;
    CriticalData cd = critical_data(H, cfg);

    NormalizeResult res;
    res.report.mode = mode;
    AffineChange total = AffineChange::identity();
    BivariatePolynomial cur = H;

    auto apply_step = [&](const AffineChange& T) {
        cur = apply_affine(cur, T);
        total = T.compose_after(total);
    };

    if (mode == NormalizeMode::weak || mode == NormalizeMode::normalized) {
        auto [h0, low0] = homogeneous_split(cur);
        double hn0 = max_norm(h0, cfg);
        bool already_weak = std::abs(hn0 - 1.0) < 1e-9 &&
                            std::abs(cd.enclosing_disc.center) + cd.enclosing_disc.radius <=
                                2.0 + 1e-9;
        if (!(mode == NormalizeMode::weak && already_weak)) {
            if (cd.enclosing_disc.radius < 1e-12)
                throw std::domain_error("normalize: critical values coincide");
            cplx c = cd.enclosing_disc.center;
            double rho = cd.enclosing_disc.radius;
            apply_step(AffineChange::image_map(2.0 / rho, -2.0 * c / rho));
            auto [h1, low1] = homogeneous_split(cur);
            double hn = max_norm(h1, cfg);
            double lambda = std::pow(hn, -1.0 / np1);
            apply_step(AffineChange::preimage_homothety(lambda));
            res.report.lambda = lambda;
        }
    } else if (mode == NormalizeMode::unit_scaled || mode == NormalizeMode::centrally_rescaled) {
        if (mode == NormalizeMode::centrally_rescaled) {
            // move the critical point with smallest |a_k| to the origin
            const CriticalPoint* pick = nullptr;
            for (const auto& p : cd.points) {
                if (!pick) { pick = &p; continue; }
                double da = std::abs(p.value), db = std::abs(pick->value);
                if (da < db - 1e-15) pick = &p;
                else if (std::abs(da - db) <= 1e-15) {
                    auto key = [](const CriticalPoint& q) {
                        return std::make_pair(std::real(q.value), std::imag(q.value));
                    };
                    if (key(p) < key(*pick)) pick = &p;
                }
            }
            if (!pick) throw std::domain_error("normalize: no critical points");
            apply_step(AffineChange::preimage_translation(pick->x, pick->y));
        }
        // make ||h||_max = 1 by an image scale (h is proportional to the input's)
        auto [h0, low0] = homogeneous_split(cur);
        double hn = max_norm(h0, cfg);
        apply_step(AffineChange::image_map(1.0 / hn, 0));

        auto [h1, low1] = homogeneous_split(cur);
        BivariatePolynomial low_shift = low1;
        low_shift.add_to(0, 0, -cur.eval(cplx(0, 0), cplx(0, 0)));
        if (low_shift.is_zero(1e-13 * std::max(1.0, cur.max_abs_coeff()))) {
            if (mode == NormalizeMode::centrally_rescaled)
                throw std::domain_error("normalize: H' - H(0) vanishes identically");
        }

        double target = 1.0;
        double n0 = lower_norm_after_rescale(cur, 1.0, cfg);
        double lambda = 1.0;
        bool need = (mode == NormalizeMode::centrally_rescaled) ? true : (n0 > target);
        if (need && n0 > 0) {
            double lo = 1.0, hi = 1.0;
            if (n0 > target) {
                while (lower_norm_after_rescale(cur, hi, cfg) > target) hi *= 2;
            } else {
                while (lower_norm_after_rescale(cur, lo, cfg) < target) {
                    lo *= 0.5;
                    if (lo < 1e-12) throw std::domain_error("normalize: bisection bracket failed");
                }
            }
            if (lo > hi) std::swap(lo, hi);
            for (int it = 0; it < 200 && (hi - lo) > 1e-14 * hi; ++it) {
                double mid = 0.5 * (lo + hi);
                if (lower_norm_after_rescale(cur, mid, cfg) > target) lo = mid;
                else hi = mid;
            }
            lambda = 0.5 * (lo + hi);
        }
        AffineChange T = AffineChange::preimage_homothety(lambda);
        T.image_scale = std::pow(lambda, -double(np1));
        T.image_shift = -cur.eval(cplx(0, 0), cplx(0, 0)) * T.image_scale;
        apply_step(T);
        res.report.lambda = lambda;
    }

    // post-hoc verification of the defining identities
    auto [hf, lowf] = homogeneous_split(cur);
    res.report.h_norm_after = max_norm(hf, cfg);
    res.report.lower_norm_after = lowf.is_zero(1e-300) ? 0.0 : max_norm(lowf, cfg);
    CriticalData cdf = critical_data(cur, cfg);
    res.report.disc_after = cdf.enclosing_disc;
    switch (mode) {
        case NormalizeMode::weak:
            res.report.verified =
                std::abs(res.report.h_norm_after - 1) < 1e-7 &&
                std::abs(res.report.disc_after.center) + res.report.disc_after.radius <
                    2 + 1e-7;
            break;
        case NormalizeMode::normalized:
            res.report.verified = std::abs(res.report.h_norm_after - 1) < 1e-7 &&
                                  std::abs(res.report.disc_after.radius - 2) < 1e-7 &&
                                  std::abs(res.report.disc_after.center) < 1e-7;
            break;
        case NormalizeMode::unit_scaled:
            res.report.verified = std::abs(res.report.h_norm_after - 1) < 1e-7 &&
                                  res.report.lower_norm_after < 1 + 1e-7;
            break;
        case NormalizeMode::centrally_rescaled:
            res.report.verified =
                std::abs(res.report.h_norm_after - 1) < 1e-7 &&
                std::abs(res.report.lower_norm_after - 1) < 1e-6 &&
                std::abs(cur.eval(cplx(0, 0), cplx(0, 0))) < 1e-9;
            break;
    }
    res.H = cur;
    res.transform = total;
    return res;
}

CoordinateChoice choose_coordinates(const BivariatePolynomial& H, const RunConfig& cfg) {
    BivariatePolynomial Ht = H.trimmed(1e-14);
    int d = Ht.degree();
    if (d < 3) throw std::domain_error("choose_coordinates: degree must be >= 3");
    int n = d - 1;
    double line_gate = 1.0 / std::sqrt(double(n));
    CriticalData cd = critical_data(Ht, cfg);
    BivariatePolynomial Hxx = Ht.dx().dx(), Hxy = Ht.dx().dy(), Hyy = Ht.dy().dy();

    auto evaluate = [&](const AffineChange& U, CoordinateCertificate& cert) {
        BivariatePolynomial HU = apply_affine(Ht, U);
        auto [h, low] = homogeneous_split(HU);
        LineFactorization f = factor_zero_lines(h, cfg);
        double dline = std::acos(-1.0);
        if (f.contains_y_axis) dline = 0;
        for (cplx c : f.slopes) dline = std::min(dline, slope_distance_to_y_axis(c));
        cert.min_line_axis_distance = dline;

        // branch tangents at critical points of HU: Hessian null directions
        double dbr = std::acos(-1.0);
        BivariatePolynomial Ha = HU.dx().dx(), Hb = HU.dx().dy(), Hc = HU.dy().dy();
        for (const auto& p : cd.points) {
            // critical point in the rotated frame: z' with U z' = z
            cplx det = U.det();
            cplx a = U.pre_matrix[0][0], b = U.pre_matrix[0][1];
            cplx c2 = U.pre_matrix[1][0], dd = U.pre_matrix[1][1];
            cplx xs = (dd * p.x - b * p.y) / det;
            cplx ys = (-c2 * p.x + a * p.y) / det;
            cplx A = Ha.eval(xs, ys), B = Hb.eval(xs, ys), C = Hc.eval(xs, ys);
            double hs = std::max({std::abs(A), std::abs(B), std::abs(C), 1e-30});
            if (std::abs(C) < 1e-9 * hs) {
                dbr = 0;
                continue;
            }
            UniPoly q = {A, 2.0 * B, C};  // Q(1, s) in s = dy/dx
            for (cplx s : upoly_roots(q, cfg.tol_root_polish))
                dbr = std::min(dbr, slope_distance_to_y_axis(s));
        }
        cert.min_branch_axis_distance = dbr;
        return dline > line_gate && dbr > 1e-6;
    };

    std::mt19937_64 rng(cfg.seed ^ 0xc0ffee1234ULL);
    std::normal_distribution<double> g;
    for (int attempt = 0; attempt <= 1000; ++attempt) {
        AffineChange U = AffineChange::identity();
        if (attempt > 0) {
            cplx a(g(rng), g(rng)), b(g(rng), g(rng));
            double na = std::sqrt(std::norm(a) + std::norm(b));
            a /= na;
            b /= na;
            U = AffineChange::preimage_linear(a, -std::conj(b), b, std::conj(a));
        }
        CoordinateCertificate cert;
        cert.attempts = attempt + 1;
        cert.identity = (attempt == 0);
        if (evaluate(U, cert)) return {U, cert};
    }
    throw std::runtime_error("choose_coordinates: exhausted 1000 rotations");
}

}  // namespace periodlab
