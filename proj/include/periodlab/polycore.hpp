#ifndef PERIODLAB_POLYCORE_HPP
#define PERIODLAB_POLYCORE_HPP

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include "periodlab/config.hpp"

namespace periodlab {

/// Dense complex polynomial in (x, y). Coefficients are stored on the full
/// (deg+1)x(deg+1) grid; entries with i+j > degree_bound stay zero.
class BivariatePolynomial {
  public:
    BivariatePolynomial() : degree_bound_(0), c_(1, cplx(0, 0)) {}
    explicit BivariatePolynomial(int degree_bound)
        : degree_bound_(degree_bound),
          c_((degree_bound + 1) * (degree_bound + 1), cplx(0, 0)) {
        if (degree_bound < 0) throw std::invalid_argument("negative degree bound");
    }

    static BivariatePolynomial constant(cplx v) {
        BivariatePolynomial p(0);
        p.set(0, 0, v);
        return p;
    }
    static BivariatePolynomial monomial(int i, int j, cplx v) {
        BivariatePolynomial p(i + j);
        p.set(i, j, v);
        return p;
    }

    int degree_bound() const { return degree_bound_; }

    cplx coeff(int i, int j) const {
        if (i < 0 || j < 0 || i + j > degree_bound_) return cplx(0, 0);
        return c_[idx(i, j)];
    }
    void set(int i, int j, cplx v) {
        if (i < 0 || j < 0) throw std::out_of_range("negative exponent");
        if (i + j > degree_bound_) grow(i + j);
        c_[idx(i, j)] = v;
    }
    void add_to(int i, int j, cplx v) { set(i, j, coeff(i, j) + v); }

    /// Max total degree carrying a coefficient above `eps` (absolute).
    /// Returns -1 for the zero polynomial.
    int degree(double eps = 0.0) const;

    bool is_zero(double eps = 0.0) const { return degree(eps) < 0; }

    double max_abs_coeff() const;

    /// Coefficient-wise comparison within tol (absolute, scaled by the larger
    /// of the two coefficient magnitudes).
    bool approx_equal(const BivariatePolynomial& o, double tol) const;

    BivariatePolynomial operator+(const BivariatePolynomial& o) const;
    BivariatePolynomial operator-(const BivariatePolynomial& o) const;
    BivariatePolynomial operator*(const BivariatePolynomial& o) const;
    BivariatePolynomial operator*(cplx s) const;

    cplx eval(cplx x, cplx y) const;

    BivariatePolynomial dx() const;  // partial derivative in x
    BivariatePolynomial dy() const;  // partial derivative in y

    /// Homogeneous component of total degree k.
    BivariatePolynomial homogeneous_part(int k) const;
    bool is_homogeneous(double eps = 0.0) const;

    /// Coefficients of p(x, .) as a univariate polynomial in y (ascending).
    std::vector<cplx> y_slice(cplx x) const;
    /// Coefficients of p(., y) as a univariate polynomial in x (ascending).
    std::vector<cplx> x_slice(cplx y) const;

    /// Drop a zero-padded border: shrink degree_bound to the actual degree.
    BivariatePolynomial trimmed(double eps = 0.0) const;

  private:
    int idx(int i, int j) const { return i * (degree_bound_ + 1) + j; }
    void grow(int new_bound);

    int degree_bound_;
    std::vector<cplx> c_;
};

/// (value, (dp/dx, dp/dy)) at z.
std::pair<cplx, std::array<cplx, 2>> eval_and_gradient(const BivariatePolynomial& p,
                                                       cplx x, cplx y);

/// Highest homogeneous part h and the remainder p - h. Errors on p == 0.
std::pair<BivariatePolynomial, BivariatePolynomial> homogeneous_split(
    const BivariatePolynomial& p, double eps = 0.0);

/// Monomial 1-form c * x^l y^{m+1} dx; its degree is l+m+1.
struct MonomialForm {
    int l = 0;
    int m = 0;
    cplx coefficient = cplx(1, 0);

    int degree() const { return l + m + 1; }
};

/// D(omega) for omega = c x^l y^{m+1} dx: the polynomial (m+1) c x^l y^m.
BivariatePolynomial d_operator(const MonomialForm& w);

/// Affine change: preimage map z -> M z + v (invertible), image t -> mu t + nu.
struct AffineChange {
    std::array<std::array<cplx, 2>, 2> pre_matrix = {{{cplx(1, 0), cplx(0, 0)},
                                                      {cplx(0, 0), cplx(1, 0)}}};
    std::array<cplx, 2> pre_shift = {cplx(0, 0), cplx(0, 0)};
    cplx image_scale = cplx(1, 0);
    cplx image_shift = cplx(0, 0);

    static AffineChange identity() { return AffineChange{}; }
    static AffineChange preimage_homothety(cplx lambda);
    static AffineChange image_map(cplx mu, cplx nu);
    static AffineChange preimage_linear(cplx a, cplx b, cplx c, cplx d);
    static AffineChange preimage_translation(cplx tx, cplx ty);

    cplx det() const {
        return pre_matrix[0][0] * pre_matrix[1][1] - pre_matrix[0][1] * pre_matrix[1][0];
    }
    bool invertible(double eps = 1e-14) const { return std::abs(det()) > eps; }

    std::array<cplx, 2> apply_pre(cplx x, cplx y) const;
    cplx apply_image(cplx t) const { return image_scale * t + image_shift; }

    /// this after other: (this o other) as a map on polynomials, i.e.
    /// apply `other` first. Composition of two AffineChanges is an AffineChange.
    AffineChange compose_after(const AffineChange& other) const;
};

/// mu * p(M z + v) + nu with coefficients recomputed by exact polynomial
/// composition. Errors on a singular preimage matrix.
BivariatePolynomial apply_affine(const BivariatePolynomial& p, const AffineChange& T);

/// Sup of |p| on the unit sphere of C^2 for homogeneous p; sum of the norms of
/// the homogeneous parts otherwise. Accuracy ~1e-9 relative (grid + ascent).
double max_norm(const BivariatePolynomial& p, const RunConfig& cfg = RunConfig::defaults());

/// sqrt(sum of squared coefficient moduli); input must be homogeneous.
double hermitian_norm(const BivariatePolynomial& p);

}  // namespace periodlab

#endif
