#include "periodlab/projection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace periodlab {

double PLPath::length() const {
    double L = 0;
    for (size_t i = 0; i + 1 < vertices.size(); ++i) L += std::abs(vertices[i + 1] - vertices[i]);
    return L;
}

cplx PLPath::at(double tau) const {
    if (vertices.empty()) throw std::domain_error("empty path");
    if (vertices.size() == 1 || tau <= 0) return vertices.front();
    if (tau >= 1) return vertices.back();
    double L = length();
    if (L == 0) return vertices.front();
    double s = tau * L;
    for (size_t i = 0; i + 1 < vertices.size(); ++i) {
        double seg = std::abs(vertices[i + 1] - vertices[i]);
        if (s <= seg || i + 2 == vertices.size()) {
            double f = seg > 0 ? s / seg : 0.0;
            return vertices[i] + f * (vertices[i + 1] - vertices[i]);
        }
        s -= seg;
    }
    return vertices.back();
}

cplx DiscriminantCurve::eval(cplx x, cplx t) const {
    cplx acc(0, 0);
    for (int i = degree_in_x; i >= 0; --i) {
        cplx row(0, 0);
        for (int j = degree_in_t; j >= 0; --j) row = row * t + coeffs[i][j];
        acc = acc * x + row;
    }
    return acc;
}

UniPoly DiscriminantCurve::x_poly_at(cplx t) const {
    UniPoly p(degree_in_x + 1);
    for (int i = 0; i <= degree_in_x; ++i) {
        cplx row(0, 0);
        for (int j = degree_in_t; j >= 0; --j) row = row * t + coeffs[i][j];
        p[i] = row;
    }
    return p;
}

DiscriminantCurve discriminant_curve(const BivariatePolynomial& H_in, const RunConfig& cfg) {
    BivariatePolynomial H = H_in.trimmed(1e-14);
    int d = H.degree();
    if (d < 2) throw std::domain_error("discriminant_curve: degree too small");
    int n = d - 1;
    double scale = H.max_abs_coeff();
    if (std::abs(H.coeff(0, d)) < 1e-10 * scale)
        throw std::domain_error(
            "discriminant_curve: y-leading coefficient vanishes; re-run choose_coordinates");
    BivariatePolynomial Hy = H.dy();

    int nx = n * (n + 1);
    int nt = n + 1;
    // evaluation-interpolation on a Chebyshev grid in (x, t)
    auto xnodes = chebyshev_nodes(nx + 1, 2.0);
    auto tnodes = chebyshev_nodes(nt + 1, 2.0);
    int mH = d, mHy = d - 1;  // formal y-degrees

    std::vector<std::vector<cplx>> coef_x_of_t(nx + 1, std::vector<cplx>(nt + 1));
    for (int j = 0; j <= nt; ++j) {
        std::vector<cplx> vals(nx + 1);
        for (int i = 0; i <= nx; ++i) {
            BivariatePolynomial Hmt = H;
            Hmt.add_to(0, 0, -tnodes[j]);
            vals[i] = sylvester_resultant_formal(Hmt.y_slice(xnodes[i]),
                                                 Hy.y_slice(xnodes[i]), mH, mHy);
        }
        UniPoly px = interpolate_poly(xnodes, vals);
        for (int i = 0; i <= nx; ++i) coef_x_of_t[i][j] = px[i];
    }
    DiscriminantCurve D;
    D.n = n;
    D.degree_in_x = nx;
    D.degree_in_t = nt;
    D.coeffs.assign(nx + 1, std::vector<cplx>(nt + 1, cplx(0, 0)));
    for (int i = 0; i <= nx; ++i) {
        UniPoly ct = interpolate_poly(tnodes, coef_x_of_t[i]);
        for (int j = 0; j <= nt; ++j) D.coeffs[i][j] = ct[j];
    }
    // the leading x-coefficient is t-independent and nonzero when the axis
    // condition holds; a deficient degree means the frame must be rotated
    double lead = 0, all = 0;
    for (int j = 0; j <= nt; ++j) lead = std::max(lead, std::abs(D.coeffs[nx][j]));
    for (auto& row : D.coeffs)
        for (auto& v : row) all = std::max(all, std::abs(v));
    if (lead < 1e-9 * all)
        throw std::domain_error("discriminant_curve: x-degree deficient; coordinates unsuitable");
    return D;
}

ProjectionContext::ProjectionContext(const BivariatePolynomial& H, const RunConfig& cfg)
    : H_(H.trimmed(1e-14)), cfg_(cfg) {
    int d = H_.degree();
    if (d < 2) throw std::domain_error("ProjectionContext: degree too small");
    n_ = d - 1;
    double scale = H_.max_abs_coeff();
    if (std::abs(H_.coeff(0, d)) < 1e-10 * scale)
        throw std::domain_error(
            "ProjectionContext: y-leading coefficient vanishes; re-run choose_coordinates");
    Hx_ = H_.dx();
    Hy_ = H_.dy();
    Hxy_ = Hy_.dx();
    Hyy_ = Hy_.dy();
    formal_ydeg_H_ = d;
    formal_ydeg_Hy_ = d - 1;
}

std::vector<cplx> ProjectionContext::raw_branch_roots(cplx t) const {
    int nx = branch_count();
    BivariatePolynomial Hmt = H_;
    Hmt.add_to(0, 0, -t);

    // adapt the interpolation radius to where the roots actually live
    double radius = 2.0 + std::pow(std::abs(t) + 1.0, 1.0 / (n_ + 1));
    std::vector<cplx> roots;
    for (int pass = 0; pass < 3; ++pass) {
        auto nodes = chebyshev_nodes(nx + 1, radius);
        std::vector<cplx> vals(nx + 1);
        for (int i = 0; i <= nx; ++i)
            vals[i] = sylvester_resultant_formal(Hmt.y_slice(nodes[i]), Hy_.y_slice(nodes[i]),
                                                 formal_ydeg_H_, formal_ydeg_Hy_);
        UniPoly p = interpolate_poly(nodes, vals);
        roots = upoly_roots(p, cfg_.tol_root_polish);
        double maxr = 0;
        for (auto r : roots) maxr = std::max(maxr, std::abs(r));
        if (int(roots.size()) == nx && maxr <= 0.8 * radius) break;
        radius = std::max(2.0 * maxr, 2.0 * radius);
    }

    // polish through the system {H = t, H_y = 0}; skip where the Jacobian is
    // singular (x-image of a critical point of H)
    for (auto& x : roots) {
        auto fiber = upoly_roots(Hmt.y_slice(x), cfg_.tol_root_polish);
        if (fiber.size() < 2) continue;
        double best = 1e300;
        cplx y0(0, 0);
        for (size_t i = 0; i < fiber.size(); ++i)
            for (size_t j = i + 1; j < fiber.size(); ++j)
                if (std::abs(fiber[i] - fiber[j]) < best) {
                    best = std::abs(fiber[i] - fiber[j]);
                    y0 = 0.5 * (fiber[i] + fiber[j]);
                }
        cplx xx = x, yy = y0;
        bool ok = true;
        for (int it = 0; it < 40; ++it) {
            cplx f1 = H_.eval(xx, yy) - t;
            cplx f2 = Hy_.eval(xx, yy);
            double fscale = std::max(1.0, H_.max_abs_coeff());
            if (std::abs(f1) + std::abs(f2) < 1e-14 * fscale) break;
            cplx a = Hx_.eval(xx, yy), b = Hy_.eval(xx, yy);
            cplx c = Hxy_.eval(xx, yy), dd = Hyy_.eval(xx, yy);
            cplx det = a * dd - b * c;
            if (std::abs(det) < 1e-13 * (std::abs(a) + std::abs(dd) + 1e-30)) {
                ok = false;
                break;
            }
            cplx dx = (dd * f1 - b * f2) / det;
            cplx dy = (-c * f1 + a * f2) / det;
            xx -= dx;
            yy -= dy;
            if (std::abs(dx) + std::abs(dy) < 1e-16 * (1 + std::abs(xx) + std::abs(yy))) break;
        }
        if (ok && std::abs(xx - x) < 0.1 * (1 + std::abs(x))) x = xx;
    }
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        if (std::real(a) != std::real(b)) return std::real(a) < std::real(b);
        return std::imag(a) < std::imag(b);
    });
    return roots;
}

BranchSet ProjectionContext::clustered_branch_points(cplx t) const {
    auto roots = raw_branch_roots(t);
    BranchSet out;
    out.t = t;
    double spread = 1e-300;
    for (size_t i = 0; i < roots.size(); ++i)
        for (size_t j = i + 1; j < roots.size(); ++j)
            spread = std::max(spread, std::abs(roots[i] - roots[j]));
    double scale = std::max(spread, 1.0);
    double tol = cfg_.tol_cluster * scale;
    out.cluster_tol = tol;

    std::vector<std::pair<cplx, int>> clusters;
    for (cplx r : roots) clusters.push_back({r, 1});

    auto single_linkage_merge = [&](double radius, int min_mult) {
        bool changed = true;
        while (changed) {
            changed = false;
            size_t m = clusters.size();
            // connected components under the link radius
            std::vector<int> comp(m, -1);
            int ncomp = 0;
            for (size_t i = 0; i < m; ++i) {
                if (comp[i] >= 0) continue;
                comp[i] = ncomp;
                std::vector<size_t> stack = {i};
                while (!stack.empty()) {
                    size_t u = stack.back();
                    stack.pop_back();
                    for (size_t v = 0; v < m; ++v)
                        if (comp[v] < 0 &&
                            std::abs(clusters[u].first - clusters[v].first) <= radius) {
                            comp[v] = ncomp;
                            stack.push_back(v);
                        }
                }
                ++ncomp;
            }
            std::vector<std::pair<cplx, int>> next;
            for (int c = 0; c < ncomp; ++c) {
                cplx acc(0, 0);
                int mult = 0, members = 0;
                for (size_t i = 0; i < m; ++i)
                    if (comp[i] == c) {
                        acc += clusters[i].first * double(clusters[i].second);
                        mult += clusters[i].second;
                        ++members;
                    }
                if (members > 1 && mult >= min_mult) {
                    next.push_back({acc / double(mult), mult});
                    changed = true;
                } else {
                    for (size_t i = 0; i < m; ++i)
                        if (comp[i] == c) next.push_back(clusters[i]);
                }
            }
            clusters = std::move(next);
        }
    };

    // tight pass at the configured tolerance, then graded passes: a genuine
    // m-fold root scatters to ~backward_error^(1/m), so a wide link radius is
    // only trusted when enough roots participate
    single_linkage_merge(tol, 2);
    const double backward_error = 1e-12;
    for (int m = 2; m <= int(roots.size()); ++m) {
        double radius = 10.0 * std::pow(backward_error, 1.0 / m) * scale;
        if (radius <= tol || radius > 1e-2 * scale) continue;
        single_linkage_merge(radius, m);
    }

    out.points = clusters;
    std::sort(out.points.begin(), out.points.end(), [](const auto& a, const auto& b) {
        if (std::real(a.first) != std::real(b.first))
            return std::real(a.first) < std::real(b.first);
        return std::imag(a.first) < std::imag(b.first);
    });
    out.distinct_count = int(out.points.size());
    for (auto& p : out.points) out.multiplicity_sum += p.second;
    return out;
}

std::optional<cplx> ProjectionContext::newton_fiber(cplx x, cplx t, cplx y) const {
    double scale = std::max(1.0, H_.max_abs_coeff()) *
                   std::pow(1 + std::abs(x) + std::abs(y), n_ + 1);
    for (int it = 0; it < 40; ++it) {
        cplx f = H_.eval(x, y) - t;
        if (std::abs(f) < 1e-13 * scale) return y;
        cplx d = Hy_.eval(x, y);
        if (std::abs(d) < 1e-250) return std::nullopt;
        cplx step = f / d;
        if (!std::isfinite(std::abs(step))) return std::nullopt;
        y -= step;
        if (std::abs(step) < 1e-16 * (1 + std::abs(y))) {
            cplx r = H_.eval(x, y) - t;
            if (std::abs(r) < 1e-11 * scale) return y;
            return std::nullopt;
        }
    }
    cplx r = H_.eval(x, y) - t;
    if (std::abs(r) < 1e-11 * scale) return y;
    return std::nullopt;
}

SheetSet ProjectionContext::sheets(cplx t, cplx x) const {
    BivariatePolynomial Hmt = H_;
    Hmt.add_to(0, 0, -t);
    UniPoly fiber = Hmt.y_slice(x);
    SheetSet out;
    out.ys = upoly_roots(fiber, cfg_.tol_root_polish);
    double spread = 1.0;
    for (auto a : out.ys) spread = std::max(spread, std::abs(a));
    for (size_t i = 0; i < out.ys.size(); ++i)
        for (size_t j = i + 1; j < out.ys.size(); ++j)
            if (std::abs(out.ys[i] - out.ys[j]) < 1e-7 * spread) out.collision = true;
    return out;
}

std::optional<cplx> ProjectionContext::continue_sheet(cplx x0, cplx t0, cplx y0, cplx x1,
                                                      cplx t1, int max_splits) const {
    cplx y = y0;
    double a = 0;
    int consecutive_fail = 0;
    long total_steps = 0;
    double step = 1.0;
    while (a < 1.0 - 1e-15) {
        if (++total_steps > 20000) return std::nullopt;
        double b = std::min(1.0, a + step);
        cplx xb = x0 + (x1 - x0) * b;
        cplx tb = t0 + (t1 - t0) * b;
        auto next = newton_fiber(xb, tb, y);
        bool ok = false;
        if (next) {
            double move = std::abs(*next - y);
            double geo = (std::abs(x1 - x0) + std::abs(t1 - t0)) * (b - a);
            if (move < 4 * geo + 1e-9 * (1 + std::abs(y))) {
                ok = true;
            } else {
                // trust region against sheet jumps: the move must stay well
                // below the gap from the previous value to every other sheet
                BivariatePolynomial Hmt = H_;
                Hmt.add_to(0, 0, -tb);
                auto fiber = upoly_roots(Hmt.y_slice(xb), cfg_.tol_root_polish);
                double gap_other = 1e300;
                for (cplx r : fiber)
                    if (std::abs(r - *next) > 1e-9 * (1 + std::abs(r)))
                        gap_other = std::min(gap_other, std::abs(r - y));
                if (move <= 0.45 * gap_other) ok = true;
            }
        }
        if (ok) {
            y = *next;
            a = b;
            step = std::min(1.0, step * 2);
            consecutive_fail = 0;
        } else {
            step *= 0.5;
            if (++consecutive_fail > max_splits) return std::nullopt;
        }
    }
    return y;
}

BranchSet branch_points(const BivariatePolynomial& H, cplx t, const RunConfig& cfg) {
    ProjectionContext ctx(H, cfg);
    return ctx.clustered_branch_points(t);
}

SheetSet sheets_at(const BivariatePolynomial& H, cplx t, cplx x, const RunConfig& cfg) {
    ProjectionContext ctx(H, cfg);
    return ctx.sheets(t, x);
}

BranchTracker::BranchTracker(const ProjectionContext& ctx, PLPath path)
    : ctx_(ctx), path_(std::move(path)), tau_(0) {
    pos_ = ctx_.raw_branch_roots(path_.at(0));
}

std::optional<std::vector<cplx>> BranchTracker::match_from(const std::vector<cplx>& ref,
                                                           cplx t_new) const {
    auto fresh = ctx_.raw_branch_roots(t_new);
    if (fresh.size() != ref.size()) return std::nullopt;
    size_t m = ref.size();
    std::vector<int> assign(m, -1);
    std::vector<bool> taken(m, false);
    for (size_t i = 0; i < m; ++i) {
        double best = 1e300, second = 1e300;
        int bj = -1;
        for (size_t j = 0; j < m; ++j) {
            if (taken[j]) continue;
            double d = std::abs(fresh[j] - ref[i]);
            if (d < best) {
                second = best;
                best = d;
                bj = int(j);
            } else if (d < second) {
                second = d;
            }
        }
        if (bj < 0) return std::nullopt;
        // ambiguous when a second candidate sits within 3x the match radius
        if (second < 3 * best && best > 1e-12 * (1 + std::abs(ref[i]))) return std::nullopt;
        assign[i] = bj;
        taken[bj] = true;
    }
    std::vector<cplx> out(m);
    for (size_t i = 0; i < m; ++i) out[i] = fresh[assign[i]];
    return out;
}

void BranchTracker::advance(double tau_target, const StepObserver& observer) {
    tau_target = std::clamp(tau_target, 0.0, 1.0);
    if (tau_target <= tau_) return;
    double full = path_.length();
    if (full == 0) {
        tau_ = tau_target;
        return;
    }
    double step = 1.0 / ctx_.config().continuation_initial_div;
    double min_step = step * std::pow(0.5, ctx_.config().continuation_max_halvings);
    while (tau_ < tau_target - 1e-15) {
        double next = std::min(tau_target, tau_ + step);
        auto matched = match_from(pos_, path_.at(next));
        if (!matched) {
            step *= 0.5;
            if (step < min_step) {
                // distinguish genuine collisions from matching trouble
                auto bs = ctx_.clustered_branch_points(path_.at(next));
                if (bs.distinct_count < ctx_.branch_count())
                    throw std::runtime_error("path not critically-regular at tau=" +
                                             std::to_string(next));
                throw std::runtime_error("branch tracking failed at tau=" +
                                         std::to_string(next));
            }
            continue;
        }
        if (observer) observer(tau_, next, pos_, *matched);
        pos_ = *matched;
        tau_ = next;
        step = std::min(step * 2, 1.0 / 16);
    }
}

BranchTrajectories track_branches(const BivariatePolynomial& H, const PLPath& path,
                                  const RunConfig& cfg) {
    ProjectionContext ctx(H, cfg);
    BranchTracker tracker(ctx, path);
    BranchTrajectories out;
    out.taus.push_back(0);
    out.positions.push_back(tracker.positions());
    tracker.advance(1.0, [&](double, double tb, const std::vector<cplx>&,
                             const std::vector<cplx>& nb) {
        out.taus.push_back(tb);
        out.positions.push_back(nb);
    });
    return out;
}

}  // namespace periodlab
