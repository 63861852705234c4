#include "periodlab/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace periodlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct TransportFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TransportArc {
    int va, vb;  // branch labels, traversal va -> vb
    cplx y_mid;
    int orientation;
};

bool lex_less(cplx a, cplx b) {
    if (std::real(a) != std::real(b)) return std::real(a) < std::real(b);
    return std::imag(a) < std::imag(b);
}

// Transports a union of lifted edges along a PL path in the t-plane.
// Events (a foreign branch point traversing an open edge) split the edge just
// before the crossing; the sub-edges inherit the couple's sheets.
class CycleTransporter {
  public:
    CycleTransporter(const ProjectionContext& ctx, PLPath path, const RunConfig& cfg)
        : ctx_(ctx), path_(std::move(path)), cfg_(cfg) {
        pos_ = ctx_.raw_branch_roots(path_.at(0));
        tau_ = 0;
    }

    const std::vector<cplx>& positions() const { return pos_; }
    double tau() const { return tau_; }

    void set_arcs(std::vector<TransportArc> arcs) { arcs_ = std::move(arcs); }

    void run(double tau_end = 1.0) {
        double base_step = 1.0 / cfg_.continuation_initial_div;
        double min_step = base_step * std::pow(0.5, cfg_.continuation_max_halvings);
        double step = base_step;
        int stall = 0;
        while (tau_ < tau_end - 1e-14) {
            double next = std::min(tau_end, tau_ + step);
            auto Pn = ctx_matched(next, pos_);
            if (!Pn || !jump_ok(pos_, *Pn)) {
                step *= 0.5;
                if (step < min_step) diagnose_failure(next);
                continue;
            }
            auto ev = earliest_event(tau_, next, pos_, *Pn);
            if (ev) {
                process_event(*ev, next);
                step = std::max(step, base_step);
                if (++stall > 64)
                    throw TransportFailure("transport stalled in event cascade");
                continue;
            }
            auto moved = advanced_seeds(pos_, path_.at(tau_), *Pn, path_.at(next));
            if (!moved) {
                step *= 0.5;
                if (step < min_step) diagnose_failure(next);
                continue;
            }
            for (size_t k = 0; k < arcs_.size(); ++k) arcs_[k].y_mid = (*moved)[k];
            pos_ = *Pn;
            tau_ = next;
            step = std::min(step * 2, 1.0 / 32);
            stall = 0;
        }
    }

    CanonicalCycle result() const {
        CanonicalCycle c;
        c.t = path_.at(tau_);
        for (const auto& a : arcs_) {
            CycleArc arc;
            arc.x_start = pos_[a.va];
            arc.x_end = pos_[a.vb];
            arc.y_mid = a.y_mid;
            arc.orientation = a.orientation;
            c.arcs.push_back(arc);
        }
        return c;
    }

  private:
    struct Event {
        double tau;     // crossing parameter (bisected)
        int a, b, j;    // foreign label j crosses edge (a, b)
    };

    std::optional<std::vector<cplx>> ctx_matched(double tau,
                                                 const std::vector<cplx>& ref) const {
        auto fresh = ctx_.raw_branch_roots(path_.at(tau));
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
            if (second < 3 * best && best > 1e-12 * (1 + std::abs(ref[i])))
                return std::nullopt;
            assign[i] = bj;
            taken[bj] = true;
        }
        std::vector<cplx> out(m);
        for (size_t i = 0; i < m; ++i) out[i] = fresh[assign[i]];
        return out;
    }

    void diagnose_failure(double tau) const {
        auto bs = ctx_.clustered_branch_points(path_.at(tau));
        if (bs.distinct_count < ctx_.branch_count())
            throw TransportFailure("path not critically-regular at tau=" + std::to_string(tau));
        throw TransportFailure("branch continuation failed at tau=" + std::to_string(tau));
    }

    std::set<std::pair<int, int>> unique_edges() const {
        std::set<std::pair<int, int>> edges;
        for (const auto& a : arcs_)
            edges.insert({std::min(a.va, a.vb), std::max(a.va, a.vb)});
        return edges;
    }

    static double transverse(const std::vector<cplx>& P, int a, int b, int j) {
        cplx d = P[b] - P[a];
        if (std::abs(d) < 1e-300) return 0;
        return std::imag((P[j] - P[a]) / d);
    }
    static double longitudinal(const std::vector<cplx>& P, int a, int b, int j) {
        cplx d = P[b] - P[a];
        if (std::abs(d) < 1e-300) return 0;
        return std::real((P[j] - P[a]) / d);
    }

    // refuse steps that sweep a foreign point across too much of an edge's
    // transverse band at once (double crossings would hide from the detector)
    bool jump_ok(const std::vector<cplx>& Pa, const std::vector<cplx>& Pb) const {
        for (auto [a, b] : unique_edges())
            for (int j = 0; j < int(Pa.size()); ++j) {
                if (j == a || j == b) continue;
                double ua = longitudinal(Pa, a, b, j), ub = longitudinal(Pb, a, b, j);
                if ((ua < -0.5 && ub < -0.5) || (ua > 1.5 && ub > 1.5)) continue;
                double sa = transverse(Pa, a, b, j), sb = transverse(Pb, a, b, j);
                if (std::abs(sb - sa) > std::max(0.5 * std::abs(sa), 0.08)) return false;
            }
        return true;
    }

    std::optional<Event> earliest_event(double ta, double tb, const std::vector<cplx>& Pa,
                                        const std::vector<cplx>& Pb) const {
        std::optional<Event> best;
        for (auto [a, b] : unique_edges())
            for (int j = 0; j < int(Pa.size()); ++j) {
                if (j == a || j == b) continue;
                double sa = transverse(Pa, a, b, j);
                double sb = transverse(Pb, a, b, j);
                if (sa == 0) sa = 1e-300;  // border: counts as previous side
                if (sa * sb >= 0) continue;
                // bisect the crossing parameter
                double lo = ta, hi = tb;
                std::vector<cplx> Plo = Pa, Phi = Pb;
                double slo = sa;
                for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
                    double mid = 0.5 * (lo + hi);
                    auto Pm = ctx_matched(mid, (mid - lo < hi - mid) ? Plo : Phi);
                    if (!Pm) throw TransportFailure("matching failed inside event bisection");
                    double sm = transverse(*Pm, a, b, j);
                    if (slo * sm <= 0) {
                        hi = mid;
                        Phi = *Pm;
                    } else {
                        lo = mid;
                        Plo = *Pm;
                        slo = sm;
                    }
                }
                double u = longitudinal(Phi, a, b, j);
                const double eps_u = 1e-7;
                if (u <= -eps_u || u >= 1 + eps_u) continue;  // crossed beyond the ends
                if (u < eps_u || u > 1 - eps_u)
                    throw TransportFailure("crossing at an edge endpoint; path needs jitter");
                if (!best || lo < best->tau) best = Event{lo, a, b, j};
            }
        return best;
    }

    // continue every arc seed from (Pa, t_a) to (Pb, t_b); all-or-nothing
    std::optional<std::vector<cplx>> advanced_seeds(const std::vector<cplx>& Pa, cplx t_a,
                                                    const std::vector<cplx>& Pb,
                                                    cplx t_b) const {
        std::vector<cplx> out(arcs_.size());
        for (size_t k = 0; k < arcs_.size(); ++k) {
            cplx m_a = 0.5 * (Pa[arcs_[k].va] + Pa[arcs_[k].vb]);
            cplx m_b = 0.5 * (Pb[arcs_[k].va] + Pb[arcs_[k].vb]);
            auto y = ctx_.continue_sheet(m_a, t_a, arcs_[k].y_mid, m_b, t_b);
            if (!y) return std::nullopt;
            out[k] = *y;
        }
        return out;
    }

    void process_event(const Event& ev, double window_end) {
        // back off from the crossing until the foreign point sits at a usable
        // transverse offset; the sliver swept between the straight edge and
        // the bent one must stay free of other branch points
        const double s_target = 1e-4;
        double tau_s = std::max(tau_, ev.tau - 1e-10);
        std::vector<cplx> Ps;
        double delta = std::max(1e-9, 0.05 * (ev.tau - tau_));
        while (true) {
            auto Pm = ctx_matched(tau_s, pos_);
            if (!Pm) throw TransportFailure("matching failed during event backoff");
            Ps = *Pm;
            if (std::abs(transverse(Ps, ev.a, ev.b, ev.j)) >= s_target || tau_s <= tau_ + 1e-14)
                break;
            tau_s = std::max(tau_, tau_s - delta);
            delta *= 2;
        }
        for (int k = 0; k < int(Ps.size()); ++k) {
            if (k == ev.a || k == ev.b || k == ev.j) continue;
            if (inside_triangle(Ps[ev.a], Ps[ev.j], Ps[ev.b], Ps[k]))
                throw TransportFailure("third branch point inside the split sliver");
        }
        auto moved = advanced_seeds(pos_, path_.at(tau_), Ps, path_.at(tau_s));
        if (!moved) throw TransportFailure("seed continuation failed before a split");
        for (size_t k = 0; k < arcs_.size(); ++k) arcs_[k].y_mid = (*moved)[k];
        pos_ = Ps;
        tau_ = tau_s;

        // split every arc lying over the edge (a, b)
        cplx t_here = path_.at(tau_);
        std::vector<TransportArc> next_arcs;
        for (const auto& arc : arcs_) {
            bool over = (std::min(arc.va, arc.vb) == std::min(ev.a, ev.b)) &&
                        (std::max(arc.va, arc.vb) == std::max(ev.a, ev.b));
            if (!over) {
                next_arcs.push_back(arc);
                continue;
            }
            cplx m = 0.5 * (pos_[arc.va] + pos_[arc.vb]);
            cplx m_first = 0.5 * (pos_[arc.va] + pos_[ev.j]);
            cplx m_second = 0.5 * (pos_[ev.j] + pos_[arc.vb]);
            auto y_first = ctx_.continue_sheet(m, t_here, arc.y_mid, m_first, t_here);
            auto y_second = ctx_.continue_sheet(m, t_here, arc.y_mid, m_second, t_here);
            if (!y_first || !y_second)
                throw TransportFailure("sheet continuation failed across a split");
            next_arcs.push_back({arc.va, ev.j, *y_first, arc.orientation});
            next_arcs.push_back({ev.j, arc.vb, *y_second, arc.orientation});
        }
        arcs_ = std::move(next_arcs);
    }

    static bool inside_triangle(cplx A, cplx B, cplx C, cplx P) {
        auto cross = [](cplx u, cplx v) {
            return std::real(u) * std::imag(v) - std::imag(u) * std::real(v);
        };
        double d1 = cross(B - A, P - A);
        double d2 = cross(C - B, P - B);
        double d3 = cross(A - C, P - C);
        bool neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
        bool posv = (d1 > 0) || (d2 > 0) || (d3 > 0);
        return !(neg && posv);
    }

    const ProjectionContext& ctx_;
    PLPath path_;
    RunConfig cfg_;
    std::vector<cplx> pos_;
    double tau_;
    std::vector<TransportArc> arcs_;
};

cplx arc_x_of_u(const CycleArc& arc, double u) {
    double s = std::sin(0.5 * kPi * u);
    s *= s;
    return arc.x_start + (arc.x_end - arc.x_start) * s;
}

}  // namespace

ArcSheet::ArcSheet(const ProjectionContext& ctx, cplx t, const CycleArc& arc)
    : ctx_(ctx), t_(t), arc_(arc) {
    knots_.push_back({0.5, arc.y_mid});
}

cplx ArcSheet::x_of_u(double u) const { return arc_x_of_u(arc_, u); }

cplx ArcSheet::y_at(double u) {
    u = std::clamp(u, 0.0, 1.0);
    // nearest cached knot
    size_t best = 0;
    for (size_t i = 1; i < knots_.size(); ++i)
        if (std::abs(knots_[i].first - u) < std::abs(knots_[best].first - u)) best = i;
    auto [u0, y0] = knots_[best];
    if (std::abs(u0 - u) < 1e-15) return y0;
    // march in u; step length shrinks geometrically toward the branch ends,
    // where the sheet behaves like sqrt(x - x_branch)
    cplx y = y0;
    double ucur = u0;
    long guard = 0;
    while (std::abs(u - ucur) > 1e-15) {
        if (++guard > 10000) throw std::runtime_error("arc sheet marching stalled");
        double edge_dist = std::min(std::min(ucur, 1 - ucur), std::min(u, 1 - u));
        double cap = std::max(0.5 * std::max(edge_dist, std::abs(u - ucur) * 0.25), 1e-7);
        cap = std::min(cap, 0.04);
        double unext = ucur + std::clamp(u - ucur, -cap, cap);
        auto next = ctx_.continue_sheet(x_of_u(ucur), t_, y, x_of_u(unext), t_);
        if (!next) throw std::runtime_error("arc sheet continuation failed");
        y = *next;
        ucur = unext;
    }
    knots_.push_back({u, y});
    return y;
}

ArcSamples ArcSheet::sample(int count) {
    ArcSamples out;
    out.xs.resize(count + 1);
    out.ys.resize(count + 1);
    // march outward from the midpoint
    std::vector<double> us(count + 1);
    for (int k = 0; k <= count; ++k) us[k] = double(k) / count;
    int mid = count / 2;
    for (int k = mid; k >= 1; --k) {
        out.xs[k] = x_of_u(us[k]);
        out.ys[k] = y_at(us[k]);
    }
    for (int k = mid + 1; k < count; ++k) {
        out.xs[k] = x_of_u(us[k]);
        out.ys[k] = y_at(us[k]);
    }
    // endpoints: snap to the fiber root nearest the extrapolated tail; a
    // numerically split double root (branch-point endpoint) snaps to the
    // cluster centroid so both adjoining arcs land on the same value
    auto snap = [&](int k_end, int k1, int k2) {
        cplx x = x_of_u(us[k_end]);
        cplx guess = 2.0 * out.ys[k1] - out.ys[k2];
        auto fiber = ctx_.sheets(t_, x);
        cplx bestv = guess;
        double bestd = 1e300;
        double yscale = 1;
        for (cplx r : fiber.ys) yscale = std::max(yscale, std::abs(r));
        for (cplx r : fiber.ys)
            if (std::abs(r - guess) < bestd) {
                bestd = std::abs(r - guess);
                bestv = r;
            }
        cplx acc = bestv;
        int cnt = 1;
        for (cplx r : fiber.ys)
            if (std::abs(r - bestv) > 0 && std::abs(r - bestv) < 1e-5 * yscale) {
                acc += r;
                ++cnt;
            }
        out.xs[k_end] = x;
        out.ys[k_end] = acc / double(cnt);
    };
    snap(0, 1, 2);
    snap(count, count - 1, count - 2);
    return out;
}

namespace {

struct SeedSpec {
    int label1, label2;  // colliding branch-point pair
    cplx y_small, y_big; // sheet seeds at the pair midpoint, lex-ordered
};

// Identify the colliding pair and its two sheets at t_near for the critical
// point (xA, yA) with value a_j.
SeedSpec build_seed(const ProjectionContext& ctx, cplx xA, cplx yA, cplx t_near) {
    auto pos = ctx.raw_branch_roots(t_near);
    int i1 = -1, i2 = -1;
    double d1 = 1e300, d2 = 1e300;
    for (int i = 0; i < int(pos.size()); ++i) {
        double d = std::abs(pos[i] - xA);
        if (d < d1) {
            d2 = d1;
            i2 = i1;
            d1 = d;
            i1 = i;
        } else if (d < d2) {
            d2 = d;
            i2 = i;
        }
    }
    if (i1 < 0 || i2 < 0) throw std::runtime_error("local seed: too few branch points");
    double gap = std::abs(pos[i1] - pos[i2]);
    cplx mid = 0.5 * (pos[i1] + pos[i2]);
    double third = 1e300;
    for (int i = 0; i < int(pos.size()); ++i) {
        if (i == i1 || i == i2) continue;
        third = std::min(third, std::abs(pos[i] - mid));
    }
    if (!(third >= 10.0 * gap))
        throw std::runtime_error("local seed: colliding pair not isolated; move t_near closer");

    auto fiber = ctx.sheets(t_near, mid);
    if (fiber.ys.size() < 2) throw std::runtime_error("local seed: fiber too small");
    // the two sheets that merge at the Morse point lie nearest to yA
    std::vector<int> order(fiber.ys.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(fiber.ys[a] - yA) < std::abs(fiber.ys[b] - yA);
    });
    cplx ya = fiber.ys[order[0]], yb = fiber.ys[order[1]];
    SeedSpec s;
    if (lex_less(pos[i2], pos[i1])) std::swap(i1, i2);
    s.label1 = i1;
    s.label2 = i2;
    s.y_small = lex_less(ya, yb) ? ya : yb;
    s.y_big = lex_less(ya, yb) ? yb : ya;
    return s;
}

std::vector<TransportArc> seed_arcs(const SeedSpec& s) {
    // loop: (x1 -> x2) on the lex-smaller sheet, back on the other
    return {{s.label1, s.label2, s.y_small, +1}, {s.label2, s.label1, s.y_big, -1}};
}

const CriticalPoint& locate_critical_point(const CriticalData& cd, cplx a) {
    const CriticalPoint* best = nullptr;
    double bd = 1e300;
    for (const auto& p : cd.points)
        if (std::abs(p.value - a) < bd) {
            bd = std::abs(p.value - a);
            best = &p;
        }
    double scale = 1;
    for (const auto& p : cd.points) scale = std::max(scale, std::abs(p.value));
    if (!best || bd > 1e-6 * scale)
        throw std::domain_error("path endpoint is not a critical value");
    return *best;
}

PLPath reversed_prefix(const PLPath& path, double tau_cut) {
    // path restricted to [0, tau_cut], reversed (starts at path.at(tau_cut))
    PLPath out;
    out.vertices.push_back(path.at(tau_cut));
    double L = path.length(), s = tau_cut * L;
    double acc = 0;
    std::vector<cplx> kept;
    for (size_t i = 0; i + 1 < path.vertices.size(); ++i) {
        kept.push_back(path.vertices[i]);
        acc += std::abs(path.vertices[i + 1] - path.vertices[i]);
        if (acc >= s) break;
    }
    for (auto it = kept.rbegin(); it != kept.rend(); ++it)
        if (std::abs(*it - out.vertices.back()) > 1e-15) out.vertices.push_back(*it);
    if (out.vertices.size() < 2) out.vertices.push_back(path.vertices.front());
    return out;
}

PLPath jittered(const PLPath& path, std::uint64_t seed, double rel) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    PLPath out = path;
    double L = std::max(path.length(), 1e-9);
    if (out.vertices.size() == 2) {
        cplx mid = 0.5 * (out.vertices[0] + out.vertices[1]);
        out.vertices.insert(out.vertices.begin() + 1, mid);
    }
    for (size_t i = 1; i + 1 < out.vertices.size(); ++i)
        out.vertices[i] += rel * L * cplx(g(rng), g(rng));
    return out;
}

double cycle_scale(const BivariatePolynomial& H, const CanonicalCycle& c,
                   const RunConfig& cfg);

}  // namespace

CanonicalCycle local_cycle_seed(const BivariatePolynomial& H, cplx a_j, cplx t_near,
                                const RunConfig& cfg) {
    ProjectionContext ctx(H, cfg);
    CriticalData cd = critical_data(H, cfg);
    const auto& cp = locate_critical_point(cd, a_j);
    auto spec = build_seed(ctx, cp.x, cp.y, t_near);
    auto pos = ctx.raw_branch_roots(t_near);
    CanonicalCycle c;
    c.t = t_near;
    for (const auto& a : seed_arcs(spec)) {
        CycleArc arc;
        arc.x_start = pos[a.va];
        arc.x_end = pos[a.vb];
        arc.y_mid = a.y_mid;
        arc.orientation = a.orientation;
        c.arcs.push_back(arc);
    }
    c.source_path = PLPath{{t_near, a_j}};
    return c;
}

namespace {

CanonicalCycle continue_cycle_once(const BivariatePolynomial& H, const PLPath& path,
                                   const RunConfig& cfg) {
    ProjectionContext ctx(H, cfg);
    CriticalData cd = critical_data(H, cfg);
    cplx a = path.vertices.back();
    const auto& cp = locate_critical_point(cd, a);

    // choose the seeding offset: the colliding pair must be isolated
    double sigma = 1e-3;
    std::optional<SeedSpec> spec;
    double tau_near = 1 - sigma;
    for (int tries = 0; tries < 8; ++tries) {
        tau_near = 1 - sigma;
        try {
            spec = build_seed(ctx, cp.x, cp.y, path.at(tau_near));
            break;
        } catch (const std::runtime_error&) {
            sigma *= 0.25;
        }
    }
    if (!spec) throw std::runtime_error("seed isolation failed; path end too crowded");

    PLPath back = reversed_prefix(path, tau_near);
    CycleTransporter tr(ctx, back, cfg);
    // the transporter indexes roots of the same deterministic solver, so the
    // seed labels carry over directly
    tr.set_arcs(seed_arcs(*spec));
    tr.run();
    CanonicalCycle c = tr.result();
    c.source_path = path;
    return c;
}

}  // namespace

double closure_defect(const BivariatePolynomial& H, const CanonicalCycle& c,
                      const RunConfig& cfg) {
    ProjectionContext ctx(H, cfg);
    double worst = 0;
    int m = int(c.arcs.size());
    std::vector<ArcSamples> samples;
    for (const auto& arc : c.arcs) {
        ArcSheet sheet(ctx, c.t, arc);
        samples.push_back(sheet.sample(64));
    }
    for (int k = 0; k < m; ++k) {
        const auto& cur = samples[k];
        const auto& nxt = samples[(k + 1) % m];
        double dx = std::abs(cur.xs.back() - nxt.xs.front());
        double dy = std::abs(cur.ys.back() - nxt.ys.front());
        worst = std::max(worst, dx + dy);
    }
    return worst;
}

namespace {

double cycle_scale(const BivariatePolynomial& H, const CanonicalCycle& c,
                   const RunConfig& cfg) {
    double s = 0;
    for (const auto& arc : c.arcs) s += std::abs(arc.x_end - arc.x_start);
    return std::max(s, 1e-12);
}

}  // namespace

CanonicalCycle continue_cycle(const BivariatePolynomial& H, const PLPath& path,
                              const RunConfig& cfg) {
    std::string last_error;
    for (int attempt = 0; attempt < 6; ++attempt) {
        PLPath p = attempt == 0 ? path
                                : jittered(path, cfg.seed * 1315423911ULL + attempt,
                                           1e-6 * (1 << attempt));
        RunConfig c2 = cfg;
        if (attempt >= 3) c2.continuation_initial_div *= 4;
        try {
            CanonicalCycle c = continue_cycle_once(H, p, c2);
            double defect = closure_defect(H, c, c2);
            double scale = cycle_scale(H, c, c2);
            if (defect > 1e-6 * scale)
                throw TransportFailure("closure violation: refinement exhausted");
            c.source_path = path;
            return c;
        } catch (const TransportFailure& e) {
            last_error = e.what();
        } catch (const std::runtime_error& e) {
            last_error = e.what();
        }
    }
    throw std::runtime_error("continue_cycle failed: " + last_error);
}

CanonicalCycle transport_cycle(const BivariatePolynomial& H, const CanonicalCycle& cycle,
                               const PLPath& path, const RunConfig& cfg) {
    std::string last_error;
    for (int attempt = 0; attempt < 6; ++attempt) {
        PLPath p = attempt == 0 ? path
                                : jittered(path, cfg.seed * 2654435761ULL + attempt,
                                           1e-6 * (1 << attempt));
        // keep the endpoints of the original path exact
        p.vertices.front() = path.vertices.front();
        p.vertices.back() = path.vertices.back();
        RunConfig c2 = cfg;
        if (attempt >= 3) c2.continuation_initial_div *= 4;
        try {
            ProjectionContext ctx(H, c2);
            CycleTransporter tr(ctx, p, c2);
            const auto& pos = tr.positions();
            double scale = 1;
            for (cplx q : pos) scale = std::max(scale, std::abs(q));
            std::vector<TransportArc> arcs;
            for (const auto& arc : cycle.arcs) {
                auto find_label = [&](cplx x) {
                    int best = -1;
                    double bd = 1e300;
                    for (int i = 0; i < int(pos.size()); ++i)
                        if (std::abs(pos[i] - x) < bd) {
                            bd = std::abs(pos[i] - x);
                            best = i;
                        }
                    if (bd > 1e-5 * scale)
                        throw TransportFailure("cycle vertices do not match branch points");
                    return best;
                };
                arcs.push_back({find_label(arc.x_start), find_label(arc.x_end), arc.y_mid,
                                arc.orientation});
            }
            tr.set_arcs(std::move(arcs));
            tr.run();
            CanonicalCycle out = tr.result();
            out.source_path = cycle.source_path;
            double defect = closure_defect(H, out, c2);
            if (defect > 1e-6 * cycle_scale(H, out, c2))
                throw TransportFailure("closure violation after transport");
            return out;
        } catch (const TransportFailure& e) {
            last_error = e.what();
        } catch (const std::runtime_error& e) {
            last_error = e.what();
        }
    }
    throw std::runtime_error("transport_cycle failed: " + last_error);
}

CycleMetrics cycle_metrics(const BivariatePolynomial& H, const CanonicalCycle& c, double X,
                           double Y, const RunConfig& cfg) {
    ProjectionContext ctx(H, cfg);
    CycleMetrics m;
    m.arc_couples = c.arc_couples();
    for (const auto& arc : c.arcs) {
        ArcSheet sheet(ctx, c.t, arc);
        auto s = sheet.sample(128);
        for (size_t k = 0; k + 1 < s.xs.size(); ++k)
            m.length += std::sqrt(std::norm(s.xs[k + 1] - s.xs[k]) +
                                  std::norm(s.ys[k + 1] - s.ys[k]));
        for (size_t k = 0; k < s.xs.size(); ++k)
            if (std::abs(s.xs[k]) > X || std::abs(s.ys[k]) > Y) m.contained = false;
    }
    return m;
}

namespace {

struct SurfacePoint {
    cplx x, y;
};

// displace a closed polyline sideways inside the level curve and project back
std::vector<SurfacePoint> displaced_loop(const ProjectionContext& ctx, cplx t,
                                         const std::vector<SurfacePoint>& loop, double eps) {
    const BivariatePolynomial& H = ctx.H();
    BivariatePolynomial Hx = H.dx(), Hy = H.dy();
    size_t N = loop.size();
    std::vector<SurfacePoint> out(N);
    for (size_t k = 0; k < N; ++k) {
        const auto& prev = loop[(k + N - 1) % N];
        const auto& next = loop[(k + 1) % N];
        cplx vx = next.x - prev.x, vy = next.y - prev.y;
        double nv = std::sqrt(std::norm(vx) + std::norm(vy));
        if (nv < 1e-300) {
            out[k] = loop[k];
            continue;
        }
        // rotate the tangent by i: stays in the complex tangent line
        cplx dx = cplx(0, 1) * vx / nv * eps;
        cplx dy = cplx(0, 1) * vy / nv * eps;
        cplx x = loop[k].x + dx, y = loop[k].y + dy;
        for (int it = 0; it < 4; ++it) {
            cplx f = H.eval(x, y) - t;
            cplx gx = Hx.eval(x, y), gy = Hy.eval(x, y);
            double g2 = std::norm(gx) + std::norm(gy);
            if (g2 < 1e-300) break;
            x -= f * std::conj(gx) / g2;
            y -= f * std::conj(gy) / g2;
        }
        out[k] = {x, y};
    }
    return out;
}

}  // namespace

int intersection_index(const BivariatePolynomial& H, const CanonicalCycle& c1,
                       const CanonicalCycle& c2, const RunConfig& cfg, int resolution) {
    if (std::abs(c1.t - c2.t) > 1e-9 * (1 + std::abs(c1.t)))
        throw std::domain_error("intersection_index: cycles live on different level curves");
    ProjectionContext ctx(H, cfg);
    cplx t = c1.t;

    // c2 as a fine closed polyline on the surface
    std::vector<SurfacePoint> loop;
    for (const auto& arc : c2.arcs) {
        ArcSheet sheet(ctx, t, arc);
        auto s = sheet.sample(resolution);
        for (size_t k = 0; k + 1 < s.xs.size(); ++k)  // drop the junction duplicate
            loop.push_back({s.xs[k], s.ys[k]});
    }
    double scale = 0;
    for (const auto& p : loop) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
    scale = std::max(scale, 1e-9);
    auto disp = displaced_loop(ctx, t, loop, 1e-5 * scale);

    auto seg_cross = [](cplx p0, cplx p1, cplx q0, cplx q1)
        -> std::optional<std::pair<double, double>> {
        cplx d1 = p1 - p0, d2 = q1 - q0;
        double den = std::real(d1) * std::imag(d2) - std::imag(d1) * std::real(d2);
        if (std::abs(den) < 1e-14 * std::abs(d1) * std::abs(d2)) return std::nullopt;
        cplx w = q0 - p0;
        double alpha = (std::real(w) * std::imag(d2) - std::imag(w) * std::real(d2)) / den;
        double beta = (std::real(w) * std::imag(d1) - std::imag(w) * std::real(d1)) / den;
        if (alpha < 0 || alpha >= 1 || beta < 0 || beta >= 1) return std::nullopt;
        return std::make_pair(alpha, beta);
    };

    int total = 0;
    size_t N = disp.size();
    for (const auto& arc : c1.arcs) {
        ArcSheet sheet1(ctx, t, arc);
        cplx p0 = arc.x_start, p1 = arc.x_end;
        cplx d1 = p1 - p0;
        for (size_t k = 0; k < N; ++k) {
            const auto& q0 = disp[k];
            const auto& q1 = disp[(k + 1) % N];
            auto hit = seg_cross(p0, p1, q0.x, q1.x);
            if (!hit) continue;
            auto [alpha, beta] = *hit;
            // u-parameter on the arc from the affine fraction alpha
            double u = 2.0 / kPi * std::asin(std::sqrt(std::clamp(alpha, 0.0, 1.0)));
            cplx xstar = p0 + alpha * d1;
            cplx y1;
            try {
                y1 = sheet1.y_at(u);
            } catch (const std::runtime_error&) {
                continue;
            }
            cplx y2g = q0.y + beta * (q1.y - q0.y);
            auto y2 = ctx.polish_fiber(xstar, t, y2g);
            if (!y2) continue;
            // same-sheet test against the local fiber gap
            auto fiber = ctx.sheets(t, xstar);
            double gap = 1e300;
            for (cplx r : fiber.ys)
                if (std::abs(r - y1) > 1e-9 * (1 + std::abs(r)))
                    gap = std::min(gap, std::abs(r - y1));
            if (std::abs(y1 - *y2) > std::min(0.3 * gap, 0.02 * scale)) continue;
            cplx d2 = q1.x - q0.x;
            double s = std::imag(d2 / d1);
            total += (s > 0) ? 1 : -1;
        }
    }
    return total;
}

MarkedBasis marked_basis(const BivariatePolynomial& H, std::optional<cplx> t0_opt,
                         const RunConfig& cfg) {
    CriticalData cd = critical_data(H, cfg);
    if (!cd.ultra_morse)
        throw std::domain_error("marked_basis: polynomial is not ultra-Morse");
    std::vector<cplx> values;
    for (const auto& p : cd.points) values.push_back(p.value);
    std::sort(values.begin(), values.end(), lex_less);

    double R = 2.0 * (std::abs(cd.enclosing_disc.center) + cd.enclosing_disc.radius);
    R = std::max(R, 1.0);
    std::mt19937_64 rng(cfg.seed ^ 0xabcdef1234ULL);
    std::uniform_real_distribution<double> unif(0, 2 * kPi);

    auto args_distinct = [&](cplx t0) {
        for (size_t i = 0; i < values.size(); ++i)
            for (size_t j = i + 1; j < values.size(); ++j) {
                double da = std::arg(values[i] - t0) - std::arg(values[j] - t0);
                da = std::remainder(da, 2 * kPi);
                if (std::abs(da) < 1e-3) return false;
            }
        return true;
    };

    MarkedBasis basis;
    std::string last_error = "no attempt";
    for (int attempt = 0; attempt < 100; ++attempt) {
        cplx t0;
        if (t0_opt && attempt == 0) {
            t0 = *t0_opt;
        } else if (t0_opt) {
            t0 = *t0_opt + 1e-3 * R * std::polar(1.0, unif(rng));
        } else {
            t0 = cd.enclosing_disc.center + std::polar(R, unif(rng));
        }
        if (!args_distinct(t0)) continue;
        try {
            basis.t0 = t0;
            basis.critical_values = values;
            basis.paths.clear();
            basis.cycles.clear();
            for (cplx a : values) {
                PLPath path{{t0, a}};
                basis.paths.push_back(path);
                basis.cycles.push_back(continue_cycle(H, path, cfg));
            }
            int mu = int(values.size());
            basis.intersection_matrix.assign(mu, std::vector<int>(mu, 0));
            for (int i = 0; i < mu; ++i)
                for (int j = i + 1; j < mu; ++j) {
                    int fwd = intersection_index(H, basis.cycles[i], basis.cycles[j], cfg);
                    int bwd = intersection_index(H, basis.cycles[j], basis.cycles[i], cfg);
                    if (fwd != -bwd) {
                        fwd = intersection_index(H, basis.cycles[i], basis.cycles[j], cfg, 768);
                        bwd = intersection_index(H, basis.cycles[j], basis.cycles[i], cfg, 768);
                        if (fwd != -bwd)
                            throw TransportFailure("intersection antisymmetry check failed");
                    }
                    basis.intersection_matrix[i][j] = fwd;
                    basis.intersection_matrix[j][i] = -fwd;
                }
            return basis;
        } catch (const std::runtime_error& e) {
            last_error = e.what();
        }
    }
    throw std::runtime_error("marked_basis: base point selection failed: " + last_error);
}

}  // namespace periodlab
