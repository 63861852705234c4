#ifndef PERIODLAB_PROJECTION_HPP
#define PERIODLAB_PROJECTION_HPP

#include <functional>
#include <optional>
#include <vector>

#include "periodlab/polycore.hpp"
#include "periodlab/rootsolve.hpp"

namespace periodlab {

/// Piecewise-linear path in the t-plane; tau in [0,1] parameterizes by
/// normalized arc length. End vertices are meaningful (regular paths end at a
/// critical value).
struct PLPath {
    std::vector<cplx> vertices;

    int edges() const { return int(vertices.size()) - 1; }
    double length() const;
    cplx at(double tau) const;
};

/// Resultant in y of (H - t, dH/dy) as a polynomial in (x, t).
struct DiscriminantCurve {
    int n = 0;
    int degree_in_x = 0;
    int degree_in_t = 0;
    std::vector<std::vector<cplx>> coeffs;  // coeffs[i][j] multiplies x^i t^j

    cplx eval(cplx x, cplx t) const;
    UniPoly x_poly_at(cplx t) const;
};

DiscriminantCurve discriminant_curve(const BivariatePolynomial& H,
                                     const RunConfig& cfg = RunConfig::defaults());

struct BranchSet {
    cplx t;
    std::vector<std::pair<cplx, int>> points;  // (x-value, multiplicity)
    int distinct_count = 0;
    int multiplicity_sum = 0;
    double cluster_tol = 0;
};

struct SheetSet {
    std::vector<cplx> ys;
    bool collision = false;  // x was within tolerance of a branch point
};

/// Shared projection engine: fresh x-roots of Res_y(H - t, H_y) at a given t,
/// polished through the branch-point system (H = t, H_y = 0) where possible.
class ProjectionContext {
  public:
    ProjectionContext(const BivariatePolynomial& H, const RunConfig& cfg);

    const BivariatePolynomial& H() const { return H_; }
    int n() const { return n_; }
    int branch_count() const { return n_ * (n_ + 1); }

    /// All n(n+1) roots (with repeats at multiple points), machine-polished.
    std::vector<cplx> raw_branch_roots(cplx t) const;
    BranchSet clustered_branch_points(cplx t) const;
    SheetSet sheets(cplx t, cplx x) const;

    /// Newton continuation of one fiber root in y as (x,t) moves; returns
    /// nullopt on divergence or sheet ambiguity.
    std::optional<cplx> continue_sheet(cplx x0, cplx t0, cplx y0, cplx x1, cplx t1,
                                       int max_splits = 24) const;

    /// Newton refinement of a fiber root from a nearby guess.
    std::optional<cplx> polish_fiber(cplx x, cplx t, cplx y) const {
        return newton_fiber(x, t, y);
    }

    const RunConfig& config() const { return cfg_; }

  private:
    std::optional<cplx> newton_fiber(cplx x, cplx t, cplx y) const;

    BivariatePolynomial H_, Hx_, Hy_, Hxy_, Hyy_;
    int n_;
    int formal_ydeg_H_, formal_ydeg_Hy_;
    RunConfig cfg_;
};

BranchSet branch_points(const BivariatePolynomial& H, cplx t,
                        const RunConfig& cfg = RunConfig::defaults());

SheetSet sheets_at(const BivariatePolynomial& H, cplx t, cplx x,
                   const RunConfig& cfg = RunConfig::defaults());

/// Continuous labeling of branch points along a PL path in the t-plane.
class BranchTracker {
  public:
    BranchTracker(const ProjectionContext& ctx, PLPath path);

    double tau() const { return tau_; }
    cplx t() const { return path_.at(tau_); }
    const std::vector<cplx>& positions() const { return pos_; }
    const PLPath& path() const { return path_; }

    /// Advance to tau_target (monotone). The observer sees every accepted
    /// step: (tau_before, tau_after, positions_before, positions_after).
    using StepObserver = std::function<void(double, double, const std::vector<cplx>&,
                                            const std::vector<cplx>&)>;
    void advance(double tau_target, const StepObserver& observer = nullptr);

    /// Match fresh roots at t_new against reference positions (nearest with a
    /// 3x ambiguity margin). Nullopt when ambiguous.
    std::optional<std::vector<cplx>> match_from(const std::vector<cplx>& ref,
                                                cplx t_new) const;

  private:
    const ProjectionContext& ctx_;
    PLPath path_;
    double tau_;
    std::vector<cplx> pos_;
};

struct BranchTrajectories {
    std::vector<double> taus;
    std::vector<std::vector<cplx>> positions;  // positions[k][label]
};

BranchTrajectories track_branches(const BivariatePolynomial& H, const PLPath& path,
                                  const RunConfig& cfg = RunConfig::defaults());

}  // namespace periodlab

#endif
