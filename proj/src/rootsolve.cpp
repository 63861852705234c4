#include "periodlab/rootsolve.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace periodlab {

cplx upoly_eval(const UniPoly& p, cplx z) {
    cplx acc(0, 0);
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
    return acc;
}

cplx upoly_eval_deriv(const UniPoly& p, cplx z) {
    cplx acc(0, 0);
    for (int k = int(p.size()) - 1; k >= 1; --k) acc = acc * z + p[k] * double(k);
    return acc;
}

UniPoly upoly_trim(const UniPoly& p, double rel_eps) {
    double scale = 0;
    for (auto& c : p) scale = std::max(scale, std::abs(c));
    if (scale == 0) return {};
    int deg = -1;
    for (int k = 0; k < int(p.size()); ++k)
        if (std::abs(p[k]) > rel_eps * scale) deg = k;
    if (deg < 0) return {};
    return UniPoly(p.begin(), p.begin() + deg + 1);
}

cplx upoly_polish(const UniPoly& p, cplx z, double tol, int iters) {
    double scale = 0;
    for (auto& c : p) scale = std::max(scale, std::abs(c));
    if (scale == 0) return z;
    for (int it = 0; it < iters; ++it) {
        cplx v = upoly_eval(p, z);
        if (std::abs(v) <= tol * scale) break;
        cplx d = upoly_eval_deriv(p, z);
        if (std::abs(d) < 1e-300) break;
        cplx step = v / d;
        if (!std::isfinite(std::abs(step))) break;
        z -= step;
        if (std::abs(step) < 1e-16 * (1.0 + std::abs(z))) break;
    }
    return z;
}

std::vector<cplx> upoly_roots(const UniPoly& p_in, double polish_tol) {
    UniPoly p = upoly_trim(p_in);
    if (p.size() <= 1) return {};
    int n = int(p.size()) - 1;
    if (n == 1) return {-p[0] / p[1]};
    if (n == 2) {
        cplx a = p[2], b = p[1], c = p[0];
        cplx disc = std::sqrt(b * b - 4.0 * a * c);
        // pick the sign that avoids cancellation
        cplx q = (std::real(std::conj(b) * disc) >= 0) ? -0.5 * (b + disc) : -0.5 * (b - disc);
        std::vector<cplx> r;
        if (std::abs(q) > 0) {
            r = {q / a, c / q};
        } else {
            r = {cplx(0, 0), -b / a};
        }
        for (auto& z : r) z = upoly_polish(p, z, polish_tol);
        return r;
    }

    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) C(i, n - 1) = -p[i] / p[n];

    // simple norm balancing pass
    for (int sweep = 0; sweep < 4; ++sweep) {
        for (int i = 0; i < n; ++i) {
            double r = C.row(i).cwiseAbs().sum() - std::abs(C(i, i));
            double c = C.col(i).cwiseAbs().sum() - std::abs(C(i, i));
            if (r < 1e-300 || c < 1e-300) continue;
            double f = std::sqrt(c / r);
            f = std::clamp(f, 1.0 / 16, 16.0);
            if (f != 1.0) {
                C.row(i) /= f;
                C.col(i) *= f;
            }
        }
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    std::vector<cplx> roots(n);
    for (int i = 0; i < n; ++i) roots[i] = upoly_polish(p, es.eigenvalues()[i], polish_tol);
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        if (std::real(a) != std::real(b)) return std::real(a) < std::real(b);
        return std::imag(a) < std::imag(b);
    });
    return roots;
}

cplx sylvester_resultant(const UniPoly& f_in, const UniPoly& g_in) {
    UniPoly f = f_in, g = g_in;
    // strip exact-zero leading entries only; numerically tiny leaders stay
    while (!f.empty() && f.back() == cplx(0, 0)) f.pop_back();
    while (!g.empty() && g.back() == cplx(0, 0)) g.pop_back();
    if (f.empty() || g.empty()) return cplx(0, 0);
    int m = int(f.size()) - 1, n = int(g.size()) - 1;
    if (m == 0 && n == 0) return cplx(1, 0);
    if (m == 0) return std::pow(f[0], double(n));
    if (n == 0) return std::pow(g[0], double(m));
    int N = m + n;
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(N, N);
    for (int r = 0; r < n; ++r)
        for (int k = 0; k <= m; ++k) S(r, r + k) = f[m - k];
    for (int r = 0; r < m; ++r)
        for (int k = 0; k <= n; ++k) S(n + r, r + k) = g[n - k];
    return S.partialPivLu().determinant();
}

cplx sylvester_resultant_formal(const UniPoly& f, const UniPoly& g, int m, int n) {
    auto at = [](const UniPoly& p, int k) {
        return (k >= 0 && k < int(p.size())) ? p[k] : cplx(0, 0);
    };
    if (m == 0 && n == 0) return cplx(1, 0);
    if (m == 0) return std::pow(at(f, 0), double(n));
    if (n == 0) return std::pow(at(g, 0), double(m));
    int N = m + n;
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(N, N);
    for (int r = 0; r < n; ++r)
        for (int k = 0; k <= m; ++k) S(r, r + k) = at(f, m - k);
    for (int r = 0; r < m; ++r)
        for (int k = 0; k <= n; ++k) S(n + r, r + k) = at(g, n - k);
    return S.partialPivLu().determinant();
}

UniPoly interpolate_poly(const std::vector<cplx>& nodes, const std::vector<cplx>& values) {
    int N = int(nodes.size());
    if (int(values.size()) != N || N == 0) throw std::invalid_argument("interpolation size");
    Eigen::MatrixXcd V(N, N);
    for (int r = 0; r < N; ++r) {
        cplx acc(1, 0);
        for (int c = 0; c < N; ++c) {
            V(r, c) = acc;
            acc *= nodes[r];
        }
    }
    Eigen::VectorXcd b(N);
    for (int r = 0; r < N; ++r) b(r) = values[r];
    Eigen::VectorXcd x = V.partialPivLu().solve(b);
    UniPoly out(N);
    for (int k = 0; k < N; ++k) out[k] = x(k);
    return out;
}

std::vector<cplx> chebyshev_nodes(int count, double radius) {
    std::vector<cplx> nodes(count);
    const double pi = std::acos(-1.0);
    for (int k = 0; k < count; ++k)
        nodes[k] = cplx(radius * std::cos(pi * (2.0 * k + 1.0) / (2.0 * count)), 0);
    return nodes;
}

UniPoly resultant_eliminating_y(const BivariatePolynomial& P, const BivariatePolynomial& Q,
                                int x_degree_bound, double node_radius) {
    auto y_degree = [](const BivariatePolynomial& p) {
        int d = 0;
        for (int i = 0; i <= p.degree_bound(); ++i)
            for (int j = 0; i + j <= p.degree_bound(); ++j)
                if (p.coeff(i, j) != cplx(0, 0)) d = std::max(d, j);
        return d;
    };
    int mp = y_degree(P), mq = y_degree(Q);
    int N = x_degree_bound + 1;
    auto nodes = chebyshev_nodes(N, node_radius);
    std::vector<cplx> vals(N);
    for (int k = 0; k < N; ++k)
        vals[k] = sylvester_resultant_formal(P.y_slice(nodes[k]), Q.y_slice(nodes[k]), mp, mq);
    return interpolate_poly(nodes, vals);
}

std::pair<UniPoly, double> least_squares_poly_fit(const std::vector<cplx>& ts,
                                                  const std::vector<cplx>& vals, int deg) {
    int N = int(ts.size());
    Eigen::MatrixXcd V(N, deg + 1);
    Eigen::VectorXcd b(N);
    for (int r = 0; r < N; ++r) {
        cplx acc(1, 0);
        for (int c = 0; c <= deg; ++c) {
            V(r, c) = acc;
            acc *= ts[r];
        }
        b(r) = vals[r];
    }
    Eigen::VectorXcd x = V.colPivHouseholderQr().solve(b);
    UniPoly fit(deg + 1);
    for (int k = 0; k <= deg; ++k) fit[k] = x(k);
    double scale = 0, resid = 0;
    for (int r = 0; r < N; ++r) scale = std::max(scale, std::abs(vals[r]));
    for (int r = 0; r < N; ++r)
        resid = std::max(resid, std::abs(upoly_eval(fit, ts[r]) - vals[r]));
    return {fit, scale > 0 ? resid / scale : resid};
}

}  // namespace periodlab
