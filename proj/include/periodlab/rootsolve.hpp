#ifndef PERIODLAB_ROOTSOLVE_HPP
#define PERIODLAB_ROOTSOLVE_HPP

#include <vector>

#include "periodlab/polycore.hpp"

namespace periodlab {

/// Univariate dense polynomial, ascending coefficients c[0] + c[1] z + ...
using UniPoly = std::vector<cplx>;

cplx upoly_eval(const UniPoly& p, cplx z);
cplx upoly_eval_deriv(const UniPoly& p, cplx z);
UniPoly upoly_trim(const UniPoly& p, double rel_eps = 1e-13);

/// All complex roots via balanced companion-matrix eigenvalues followed by a
/// few Newton polish sweeps. Multiple roots come back as close clusters.
std::vector<cplx> upoly_roots(const UniPoly& p, double polish_tol = 1e-12);

/// Newton polish of a single root; returns the refined value (input on stall).
cplx upoly_polish(const UniPoly& p, cplx z, double tol = 1e-12, int iters = 40);

/// Resultant of two univariate polynomials (Sylvester determinant, pivoted LU).
cplx sylvester_resultant(const UniPoly& f, const UniPoly& g);

/// Sylvester determinant with prescribed formal degrees. Specializing a
/// vanishing leading coefficient stays consistent across interpolation nodes.
cplx sylvester_resultant_formal(const UniPoly& f, const UniPoly& g, int deg_f, int deg_g);

/// Fit the degree-(pts.size()-1) polynomial through (nodes[k], values[k]).
UniPoly interpolate_poly(const std::vector<cplx>& nodes, const std::vector<cplx>& values);

/// Chebyshev nodes scaled to [-radius, radius].
std::vector<cplx> chebyshev_nodes(int count, double radius);

/// Res_y(P, Q) as a univariate polynomial in x, by evaluation at Chebyshev
/// nodes and interpolation. x_degree_bound must dominate the true degree.
UniPoly resultant_eliminating_y(const BivariatePolynomial& P, const BivariatePolynomial& Q,
                                int x_degree_bound, double node_radius = 2.0);

/// Least-squares fit of a degree-deg polynomial to samples; returns
/// (coefficients, max relative residual over the samples).
std::pair<UniPoly, double> least_squares_poly_fit(const std::vector<cplx>& ts,
                                                  const std::vector<cplx>& vals, int deg);

}  // namespace periodlab

#endif
