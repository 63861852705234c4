#ifndef PERIODLAB_GENERICITY_HPP
#define PERIODLAB_GENERICITY_HPP

#include <optional>
#include <string>
#include <vector>

#include "periodlab/polycore.hpp"

namespace periodlab {

/// h = c_{-1} * prod_i (y - c_i x), plus a flag when x divides h (the y-axis
/// is a zero line and the product form above does not apply).
struct LineFactorization {
    cplx c_minus1 = cplx(0, 0);
    std::vector<cplx> slopes;
    bool contains_y_axis = false;
};

struct CriticalPoint {
    cplx x, y;
    cplx value;
    cplx hessian_det;
    bool morse = false;
};

struct EnclosingDisc {
    cplx center = cplx(0, 0);
    double radius = 0;
};

struct CriticalData {
    int n = 0;  // deg H = n+1
    std::vector<CriticalPoint> points;
    bool ultra_morse = false;
    double c1 = 0, c_prime = 0;
    double c2 = 0, c_doubleprime = 0;
    EnclosingDisc enclosing_disc;
    bool dy_squarefree = true;
    bool c2_assumes_normalized = false;  // set when the input passed the normalized check
    std::string diagnostic;
};

struct GenericityProfile {
    bool is_generic = false;
    double c1 = 0;
    double c_prime = 0;
    double min_line_distance = 0;
};

/// Fubini-Study distance between the lines spanned by (1, c1) and (1, c2),
/// i.e. arccos of the normalized Hermitian pairing; range [0, pi/2].
double slope_line_distance(cplx c1, cplx c2);
/// Distance of the line spanned by (1, c) to the y-axis.
double slope_distance_to_y_axis(cplx c);

double fs_distance(cplx a0, cplx a1, cplx b0, cplx b1);  // lines spanned by (a0,a1),(b0,b1)

LineFactorization factor_zero_lines(const BivariatePolynomial& h,
                                    const RunConfig& cfg = RunConfig::defaults());

GenericityProfile genericity_profile(const BivariatePolynomial& h,
                                     const RunConfig& cfg = RunConfig::defaults());

EnclosingDisc minimal_enclosing_disc(const std::vector<cplx>& pts, std::uint64_t seed = 1);

CriticalData critical_data(const BivariatePolynomial& H,
                           const RunConfig& cfg = RunConfig::defaults());

enum class NormalizeMode { weak, normalized, unit_scaled, centrally_rescaled };

NormalizeMode normalize_mode_from_string(const std::string& s);
std::string normalize_mode_name(NormalizeMode m);

struct NormalizeReport {
    NormalizeMode mode;
    double h_norm_after = 0;
    double lower_norm_after = 0;
    EnclosingDisc disc_after;
    double lambda = 1.0;  // preimage homothety actually applied
    bool verified = false;
    std::string note;
};

struct NormalizeResult {
    BivariatePolynomial H;
    AffineChange transform;  // composite; apply_affine(input, transform) == H
    NormalizeReport report;
};

NormalizeResult normalize(const BivariatePolynomial& H, NormalizeMode mode,
                          const RunConfig& cfg = RunConfig::defaults());

struct CoordinateCertificate {
    double min_line_axis_distance = 0;  // over zero lines of h, vs 1/sqrt(n)
    double min_branch_axis_distance = 0;  // over critical branch tangents
    int attempts = 0;
    bool identity = false;
};

struct CoordinateChoice {
    AffineChange rotation;  // unitary preimage change
    CoordinateCertificate certificate;
};

/// Unitary rotation making every zero line of h distant > 1/sqrt(n) from the
/// y-axis and every critical branch tangent transversal to it.
CoordinateChoice choose_coordinates(const BivariatePolynomial& H,
                                    const RunConfig& cfg = RunConfig::defaults());

}  // namespace periodlab

#endif
