#ifndef PERIODLAB_CYCLES_HPP
#define PERIODLAB_CYCLES_HPP

#include <vector>

#include "periodlab/genericity.hpp"
#include "periodlab/projection.hpp"

namespace periodlab {

/// One lifted arc of a canonical representative. The arc is the graph of a
/// sheet over the straight segment [x_start, x_end], traversed from x_start
/// to x_end, with the sheet pinned by its value at the segment midpoint.
struct CycleArc {
    cplx x_start, x_end;
    cplx y_mid;
    int orientation = 1;  // the two liftings of a couple carry opposite signs
};

/// Closed loop on S_t: arcs in cyclic traversal order. Arcs come in couples
/// projecting onto the same edge with opposite orientations.
struct CanonicalCycle {
    cplx t;
    std::vector<CycleArc> arcs;
    PLPath source_path;

    int arc_couples() const { return int(arcs.size()) / 2; }
};

/// Sampled points along one arc (u-clustered toward the ends, endpoint values
/// snapped to fiber roots).
struct ArcSamples {
    std::vector<cplx> xs, ys;
};

/// Sheet evaluator along an arc; marches by Newton continuation from the
/// midpoint seed and caches knots.
class ArcSheet {
  public:
    ArcSheet(const ProjectionContext& ctx, cplx t, const CycleArc& arc);

    cplx x_of_u(double u) const;  // sin^2 clustering, u in [0,1]
    cplx y_at(double u);          // sheet value over x_of_u(u)

    ArcSamples sample(int count);

  private:
    const ProjectionContext& ctx_;
    cplx t_;
    CycleArc arc_;
    std::vector<std::pair<double, cplx>> knots_;  // sorted by u
};

/// Local vanishing-cycle seed near a critical value: one edge between the two
/// branch points that collide at a_j, one arc couple on the colliding sheets.
CanonicalCycle local_cycle_seed(const BivariatePolynomial& H, cplx a_j, cplx t_near,
                                const RunConfig& cfg = RunConfig::defaults());

/// Canonical representative at path start of the cycle vanishing along the
/// path (path runs from the base point to a critical value).
CanonicalCycle continue_cycle(const BivariatePolynomial& H, const PLPath& path,
                              const RunConfig& cfg = RunConfig::defaults());

/// Transport an existing cycle along a critically-regular path from cycle.t
/// (= path start) to the path end.
CanonicalCycle transport_cycle(const BivariatePolynomial& H, const CanonicalCycle& cycle,
                               const PLPath& path,
                               const RunConfig& cfg = RunConfig::defaults());

struct CycleMetrics {
    double length = 0;
    int arc_couples = 0;
    bool contained = true;
};

CycleMetrics cycle_metrics(const BivariatePolynomial& H, const CanonicalCycle& c, double X,
                           double Y, const RunConfig& cfg = RunConfig::defaults());

/// Closure defect relative to the cycle's own length.
double closure_defect(const BivariatePolynomial& H, const CanonicalCycle& c,
                      const RunConfig& cfg = RunConfig::defaults());

/// Homological intersection index of two cycles on the same level curve.
/// The second cycle is displaced inside the surface by a small deterministic
/// push before transversal crossings are counted.
int intersection_index(const BivariatePolynomial& H, const CanonicalCycle& c1,
                       const CanonicalCycle& c2, const RunConfig& cfg = RunConfig::defaults(),
                       int resolution = 384);

struct MarkedBasis {
    cplx t0;
    std::vector<cplx> critical_values;  // sorted by (Re, Im); cycle j vanishes at [j]
    std::vector<PLPath> paths;
    std::vector<CanonicalCycle> cycles;
    std::vector<std::vector<int>> intersection_matrix;
};

/// Star of straight paths from t0 to every critical value; n^2 canonical
/// cycles and their intersection matrix. Pass t0 = nullopt for auto choice.
MarkedBasis marked_basis(const BivariatePolynomial& H, std::optional<cplx> t0_opt,
                         const RunConfig& cfg = RunConfig::defaults());

}  // namespace periodlab

#endif
