#ifndef PERIODLAB_CONFIG_HPP
#define PERIODLAB_CONFIG_HPP

#include <complex>
#include <cstdint>
#include <string>

namespace periodlab {

using cplx = std::complex<double>;

/// Central tolerance/config record. Every numeric knob lives here so the CLI
/// can override any of them with a flag.
struct RunConfig {
    double tol_coeff_eq = 1e-12;     // coefficient-wise polynomial equality
    double tol_root_polish = 1e-12;  // Newton residual target for root polish
    double tol_cluster = 1e-7;       // multiplicity clustering (relative to spread)
    double tol_match = 1e-8;         // continuation matching / closure scale
    double tol_grad = 1e-8;          // gradient residual at critical points
    double tol_dedup = 1e-9;         // critical-point dedup radius
    int max_norm_grid = 128;         // coarse grid per axis for the sup-norm search
    int max_norm_ascent_steps = 60;  // gradient-ascent refinement steps
    int quad_order = 16;             // Gauss-Legendre nodes per panel
    double quad_rel_tol = 1e-10;     // adaptive panel refinement target
    int quad_max_depth = 20;
    int continuation_initial_div = 256;  // initial step = path length / this
    int continuation_max_halvings = 20;  // abort below path length / 2^20
    std::uint64_t seed = 0;
    int threads = 1;  // PERIODLAB_THREADS caps this; engine is sequential

    static RunConfig defaults() { return RunConfig{}; }
};

}  // namespace periodlab

#endif
