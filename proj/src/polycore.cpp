#include "periodlab/polycore.hpp"

#include <algorithm>
#include <cmath>

namespace periodlab {

void BivariatePolynomial::grow(int new_bound) {
    if (new_bound <= degree_bound_) return;
    BivariatePolynomial bigger(new_bound);
    for (int i = 0; i <= degree_bound_; ++i)
        for (int j = 0; i + j <= degree_bound_; ++j)
            bigger.c_[i * (new_bound + 1) + j] = c_[idx(i, j)];
    *this = std::move(bigger);
}

int BivariatePolynomial::degree(double eps) const {
    int d = -1;
    for (int i = 0; i <= degree_bound_; ++i)
        for (int j = 0; i + j <= degree_bound_; ++j)
            if (std::abs(c_[idx(i, j)]) > eps) d = std::max(d, i + j);
    return d;
}

double BivariatePolynomial::max_abs_coeff() const {
    double m = 0;
    for (const auto& v : c_) m = std::max(m, std::abs(v));
    return m;
}

bool BivariatePolynomial::approx_equal(const BivariatePolynomial& o, double tol) const {
    int b = std::max(degree_bound_, o.degree_bound_);
    double scale = std::max({max_abs_coeff(), o.max_abs_coeff(), 1.0});
    for (int i = 0; i <= b; ++i)
        for (int j = 0; i + j <= b; ++j)
            if (std::abs(coeff(i, j) - o.coeff(i, j)) > tol * scale) return false;
    return true;
}

BivariatePolynomial BivariatePolynomial::operator+(const BivariatePolynomial& o) const {
    BivariatePolynomial r(std::max(degree_bound_, o.degree_bound_));
    for (int i = 0; i <= r.degree_bound_; ++i)
        for (int j = 0; i + j <= r.degree_bound_; ++j)
            r.set(i, j, coeff(i, j) + o.coeff(i, j));
    return r;
}

BivariatePolynomial BivariatePolynomial::operator-(const BivariatePolynomial& o) const {
    BivariatePolynomial r(std::max(degree_bound_, o.degree_bound_));
    for (int i = 0; i <= r.degree_bound_; ++i)
        for (int j = 0; i + j <= r.degree_bound_; ++j)
            r.set(i, j, coeff(i, j) - o.coeff(i, j));
    return r;
}

BivariatePolynomial BivariatePolynomial::operator*(const BivariatePolynomial& o) const {
    BivariatePolynomial r(degree_bound_ + o.degree_bound_);
    for (int i = 0; i <= degree_bound_; ++i)
        for (int j = 0; i + j <= degree_bound_; ++j) {
            cplx a = c_[idx(i, j)];
            if (a == cplx(0, 0)) continue;
            for (int k = 0; k <= o.degree_bound_; ++k)
                for (int l = 0; k + l <= o.degree_bound_; ++l) {
                    cplx b = o.coeff(k, l);
                    if (b == cplx(0, 0)) continue;
                    r.add_to(i + k, j + l, a * b);
                }
        }
    return r;
}

BivariatePolynomial BivariatePolynomial::operator*(cplx s) const {
    BivariatePolynomial r = *this;
    for (auto& v : r.c_) v *= s;
    return r;
}

cplx BivariatePolynomial::eval(cplx x, cplx y) const {
    // Horner in x over Horner-in-y rows.
    cplx acc(0, 0);
    for (int i = degree_bound_; i >= 0; --i) {
        cplx row(0, 0);
        for (int j = degree_bound_ - i; j >= 0; --j) row = row * y + c_[idx(i, j)];
        acc = acc * x + row;
    }
    return acc;
}

BivariatePolynomial BivariatePolynomial::dx() const {
    BivariatePolynomial r(std::max(0, degree_bound_ - 1));
    for (int i = 1; i <= degree_bound_; ++i)
        for (int j = 0; i + j <= degree_bound_; ++j)
            r.set(i - 1, j, c_[idx(i, j)] * double(i));
    return r;
}

BivariatePolynomial BivariatePolynomial::dy() const {
    BivariatePolynomial r(std::max(0, degree_bound_ - 1));
    for (int i = 0; i <= degree_bound_; ++i)
        for (int j = 1; i + j <= degree_bound_; ++j)
            r.set(i, j - 1, c_[idx(i, j)] * double(j));
    return r;
}

BivariatePolynomial BivariatePolynomial::homogeneous_part(int k) const {
    BivariatePolynomial r(std::max(0, k));
    for (int i = 0; i <= k; ++i) r.set(i, k - i, coeff(i, k - i));
    return r;
}

bool BivariatePolynomial::is_homogeneous(double eps) const {
    int d = degree(eps);
    if (d < 0) return true;
    double scale = std::max(max_abs_coeff(), 1.0);
    for (int i = 0; i <= degree_bound_; ++i)
        for (int j = 0; i + j <= degree_bound_; ++j)
            if (i + j != d && std::abs(c_[idx(i, j)]) > eps * scale) return false;
    return true;
}

std::vector<cplx> BivariatePolynomial::y_slice(cplx x) const {
    std::vector<cplx> out(degree_bound_ + 1, cplx(0, 0));
    for (int j = 0; j <= degree_bound_; ++j) {
        cplx acc(0, 0);
        for (int i = degree_bound_ - j; i >= 0; --i) acc = acc * x + c_[idx(i, j)];
        out[j] = acc;
    }
    return out;
}

std::vector<cplx> BivariatePolynomial::x_slice(cplx y) const {
    std::vector<cplx> out(degree_bound_ + 1, cplx(0, 0));
    for (int i = 0; i <= degree_bound_; ++i) {
        cplx acc(0, 0);
        for (int j = degree_bound_ - i; j >= 0; --j) acc = acc * y + c_[idx(i, j)];
        out[i] = acc;
    }
    return out;
}

BivariatePolynomial BivariatePolynomial::trimmed(double eps) const {
    int d = std::max(0, degree(eps));
    BivariatePolynomial r(d);
    double scale = std::max(max_abs_coeff(), 1.0);
    for (int i = 0; i <= d; ++i)
        for (int j = 0; i + j <= d; ++j) {
            cplx v = coeff(i, j);
            if (std::abs(v) > eps * scale) r.set(i, j, v);
        }
    return r;
}

std::pair<cplx, std::array<cplx, 2>> eval_and_gradient(const BivariatePolynomial& p,
                                                       cplx x, cplx y) {
    return {p.eval(x, y), {p.dx().eval(x, y), p.dy().eval(x, y)}};
}

std::pair<BivariatePolynomial, BivariatePolynomial> homogeneous_split(
    const BivariatePolynomial& p, double eps) {
    int d = p.degree(eps);
    if (d < 0) throw std::domain_error("undefined highest part: zero polynomial");
    BivariatePolynomial h = p.homogeneous_part(d);
    return {h, p - h};
}

BivariatePolynomial d_operator(const MonomialForm& w) {
    return BivariatePolynomial::monomial(w.l, w.m, w.coefficient * double(w.m + 1));
}

AffineChange AffineChange::preimage_homothety(cplx lambda) {
    AffineChange T;
    T.pre_matrix = {{{lambda, cplx(0, 0)}, {cplx(0, 0), lambda}}};
    return T;
}

AffineChange AffineChange::image_map(cplx mu, cplx nu) {
    AffineChange T;
    T.image_scale = mu;
    T.image_shift = nu;
    return T;
}

AffineChange AffineChange::preimage_linear(cplx a, cplx b, cplx c, cplx d) {
    AffineChange T;
    T.pre_matrix = {{{a, b}, {c, d}}};
    return T;
}

AffineChange AffineChange::preimage_translation(cplx tx, cplx ty) {
    AffineChange T;
    T.pre_shift = {tx, ty};
    return T;
}

std::array<cplx, 2> AffineChange::apply_pre(cplx x, cplx y) const {
    return {pre_matrix[0][0] * x + pre_matrix[0][1] * y + pre_shift[0],
            pre_matrix[1][0] * x + pre_matrix[1][1] * y + pre_shift[1]};
}

AffineChange AffineChange::compose_after(const AffineChange& other) const {
    // Polynomial action: (T2 o T1)[p] = T2[T1[p]].
    // Preimage maps compose as z -> M1 (M2 z + v2) + v1.
    AffineChange r;
    const auto& A = other.pre_matrix;
    const auto& B = pre_matrix;
    r.pre_matrix = {{{A[0][0] * B[0][0] + A[0][1] * B[1][0],
                      A[0][0] * B[0][1] + A[0][1] * B[1][1]},
                     {A[1][0] * B[0][0] + A[1][1] * B[1][0],
                      A[1][0] * B[0][1] + A[1][1] * B[1][1]}}};
    r.pre_shift = {A[0][0] * pre_shift[0] + A[0][1] * pre_shift[1] + other.pre_shift[0],
                   A[1][0] * pre_shift[0] + A[1][1] * pre_shift[1] + other.pre_shift[1]};
    r.image_scale = image_scale * other.image_scale;
    r.image_shift = image_scale * other.image_shift + image_shift;
    return r;
}

BivariatePolynomial apply_affine(const BivariatePolynomial& p, const AffineChange& T) {
    if (!T.invertible()) throw std::domain_error("singular preimage matrix");
    int d = std::max(0, p.degree_bound());
    BivariatePolynomial X(1), Y(1);
    X.set(1, 0, T.pre_matrix[0][0]);
    X.set(0, 1, T.pre_matrix[0][1]);
    X.set(0, 0, T.pre_shift[0]);
    Y.set(1, 0, T.pre_matrix[1][0]);
    Y.set(0, 1, T.pre_matrix[1][1]);
    Y.set(0, 0, T.pre_shift[1]);

    // Powers of the two linear substitutions, then assemble term by term.
    std::vector<BivariatePolynomial> Xp(d + 1), Yp(d + 1);
    Xp[0] = BivariatePolynomial::constant(cplx(1, 0));
    Yp[0] = Xp[0];
    for (int k = 1; k <= d; ++k) {
        Xp[k] = Xp[k - 1] * X;
        Yp[k] = Yp[k - 1] * Y;
    }
    BivariatePolynomial r(d);
    for (int i = 0; i <= d; ++i)
        for (int j = 0; i + j <= d; ++j) {
            cplx a = p.coeff(i, j);
            if (a == cplx(0, 0)) continue;
            r = r + Xp[i] * Yp[j] * a;
        }
    r = r * T.image_scale;
    r.add_to(0, 0, T.image_shift);
    return r;
}

namespace {

// |p(cos(theta), sin(theta) e^{i psi})| with the global phase factored out.
struct SphereObjective {
    const BivariatePolynomial& p;
    const BivariatePolynomial px, py;

    explicit SphereObjective(const BivariatePolynomial& q) : p(q), px(q.dx()), py(q.dy()) {}

    cplx point_x(double th) const { return cplx(std::cos(th), 0); }
    cplx point_y(double th, double ps) const {
        return std::sin(th) * cplx(std::cos(ps), std::sin(ps));
    }
    double value(double th, double ps) const {
        return std::abs(p.eval(point_x(th), point_y(th, ps)));
    }
    // gradient of |p|^2
    std::array<double, 2> grad_sq(double th, double ps) const {
        cplx x = point_x(th), y = point_y(th, ps);
        cplx v = p.eval(x, y);
        cplx gx = px.eval(x, y), gy = py.eval(x, y);
        cplx eips(std::cos(ps), std::sin(ps));
        cplx dv_dth = -std::sin(th) * gx + std::cos(th) * eips * gy;
        cplx dv_dps = cplx(0, 1) * std::sin(th) * eips * gy;
        return {2.0 * std::real(std::conj(v) * dv_dth),
                2.0 * std::real(std::conj(v) * dv_dps)};
    }
};

double max_norm_homogeneous(const BivariatePolynomial& p, const RunConfig& cfg) {
    if (p.degree() < 0) return 0.0;
    if (p.degree() == 0) return std::abs(p.coeff(0, 0));
    SphereObjective f(p);

    const int G = cfg.max_norm_grid;
    const double pi = std::acos(-1.0);
    struct Cand {
        double v, th, ps;
    };
    std::vector<Cand> best;
    for (int a = 0; a <= G; ++a) {
        double th = 0.5 * pi * a / G;
        for (int b = 0; b < G; ++b) {
            double ps = 2.0 * pi * b / G;
            double v = f.value(th, ps);
            best.push_back({v, th, ps});
        }
    }
    std::partial_sort(best.begin(), best.begin() + 5, best.end(),
                      [](const Cand& l, const Cand& r) { return l.v > r.v; });
    best.resize(5);

    double out = 0;
    for (const auto& c0 : best) {
        double th = c0.th, ps = c0.ps;
        double step = 0.5 * pi / G;
        double v = f.value(th, ps);
        for (int it = 0; it < cfg.max_norm_ascent_steps; ++it) {
            auto g = f.grad_sq(th, ps);
            double gn = std::hypot(g[0], g[1]);
            if (gn < 1e-16) break;
            double s = step;
            bool improved = false;
            while (s > 1e-18) {
                double th2 = std::clamp(th + s * g[0] / gn, 0.0, 0.5 * pi);
                double ps2 = ps + s * g[1] / gn;
                double v2 = f.value(th2, ps2);
                if (v2 > v) {
                    th = th2;
                    ps = ps2;
                    v = v2;
                    improved = true;
                    break;
                }
                s *= 0.5;
            }
            if (!improved) break;
            step = std::max(s * 2.0, 1e-15);
        }
        // Newton polish on grad |p|^2 = 0 (finite-difference Jacobian)
        for (int it = 0; it < 12; ++it) {
            auto g = f.grad_sq(th, ps);
            double gn = std::hypot(g[0], g[1]);
            if (gn < 1e-14 * std::max(1.0, v * v)) break;
            const double hfd = 1e-6;
            auto gth = f.grad_sq(th + hfd, ps);
            auto gps = f.grad_sq(th, ps + hfd);
            double a = (gth[0] - g[0]) / hfd, b = (gps[0] - g[0]) / hfd;
            double c = (gth[1] - g[1]) / hfd, d = (gps[1] - g[1]) / hfd;
            double det = a * d - b * c;
            if (std::abs(det) < 1e-14) break;
            double dth = (d * g[0] - b * g[1]) / det;
            double dps = (a * g[1] - c * g[0]) / det;
            double th2 = std::clamp(th - dth, 0.0, 0.5 * pi);
            double ps2 = ps - dps;
            double v2 = f.value(th2, ps2);
            if (!(v2 >= v)) break;
            th = th2;
            ps = ps2;
            v = v2;
        }
        out = std::max(out, v);
    }
    return out;
}

}  // namespace

double max_norm(const BivariatePolynomial& p, const RunConfig& cfg) {
    int d = p.degree();
    if (d < 0) return 0.0;
    if (p.is_homogeneous()) return max_norm_homogeneous(p, cfg);
    double s = 0;
    for (int k = 0; k <= d; ++k) {
        BivariatePolynomial part = p.homogeneous_part(k);
        if (part.degree() >= 0) s += max_norm_homogeneous(part, cfg);
    }
    return s;
}

double hermitian_norm(const BivariatePolynomial& p) {
    if (!p.is_homogeneous(1e-14))
        throw std::domain_error("hermitian_norm requires a homogeneous polynomial");
    double s = 0;
    int d = std::max(p.degree(), 0);
    for (int i = 0; i <= d; ++i) {
        double a = std::abs(p.coeff(i, d - i));
        s += a * a;
    }
    return std::sqrt(s);
}

}  // namespace periodlab
