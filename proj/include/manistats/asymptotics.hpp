#pragma once

#include "manistats/frechet.hpp"

#include <string>

namespace manistats {

// H(x|y): the positive-Hessian tensor (1/2) Hess rho_y^2 at x, as an m-by-m
// matrix in the frame at x. Identity on the flat manifolds; on spheres and
// RP^2 the eigenvalue is 1 along the geodesic direction and rho*cot(rho)
// orthogonal to it, with the removable singularity at rho = 0 filled by the
// identity. Throws CutLocusError when y lies in the cut band of x.
Mat hessian_tensor_point(const ManifoldPoint& x, const ManifoldPoint& y,
                         double eps_cut = kEpsCut);

// Finite-difference oracle for the same tensor: central differences of the
// transported log map, assembled column-wise and negated to land in the
// positive-Hessian convention. Throws InvalidStep for h <= 0 and
// CutLocusError when a probe step crosses the cut band.
Mat hessian_tensor_numeric(const ManifoldPoint& x, const ManifoldPoint& y, double h);

// Integrated tensor H_bar(x0) = int H(x0|xi) d mu(xi) by quadrature.
Mat hessian_integral(const DensityModel& model, const ManifoldPoint& x0,
                     int nodes_per_dim = 128);

// Cut-locus correction: the PSD matrix integrating
// rho * kappa * n n^T * tau' * psi over the charts of H_{x0}; composite
// Gauss-Legendre with nodes_per_dim nodes per chart dimension (direct
// evaluation on point charts). Empty cut structure yields the zero matrix.
Mat j_mu_quadrature(const DensityModel& model, const ManifoldPoint& x0,
                    int nodes_per_dim = 256);
// Same, against a caller-supplied cut structure (e.g. with flipped chart
// normals, under which the result is invariant).
Mat j_mu_quadrature(const DensityModel& model, const CutStructure& cut,
                    int nodes_per_dim = 256);

// Covariance of log_{x0}(xi) in the frame at x0 (population quadrature).
Mat v0_population(const DensityModel& model, const ManifoldPoint& x0,
                  int nodes_per_dim = 128);
// Sample analogue.
Mat v0_sample(const SampleSet& sample, const ManifoldPoint& x0);

struct CltPrediction {
  explicit CltPrediction(ManifoldPoint b) : base(std::move(b)) {}
  ManifoldPoint base;
  Mat J;      // cut-locus term (PSD, as integrated from the charts)
  Mat H_bar;  // integrated positive-Hessian tensor
  Mat Psi;    // H_bar - J
  Mat V0;
  Mat Sigma;  // Psi^{-1} V0 Psi^{-T}
  Vec psi_eigenvalues;
  bool psi_positive_definite = false;

  std::string to_json() const;
  static CltPrediction from_json(const std::string& text);
};

struct PredictionOptions {
  int hessian_nodes = 128;
  int j_nodes = 256;
  int v0_nodes = 128;
};

// Psi_mu(x0) = H_bar(x0) - J(x0) together with V0; the convention is pinned
// to the finite-difference Hessian of F_mu (2 Psi = Hess F at x0).
CltPrediction psi_mu(const DensityModel& model, const ManifoldPoint& x0,
                     const PredictionOptions& opts = {});
CltPrediction psi_mu(const DensityModel& model, const PredictionOptions& opts = {});

// Sigma = Psi^{-1} V0 Psi^{-T}; throws DegenerateHessian when Psi is not
// strictly positive definite (smeary regime).
Mat clt_covariance(const CltPrediction& pred);

// Norm of the linearization defect
// || Pi_{x,x0} G_mu(x) + Psi log_{x0}(x) ||, with G_mu by population
// quadrature; o(rho(x0,x)) as x -> x0 when Psi is the true half-Hessian.
double linearization_residual(const DensityModel& model, const ManifoldPoint& x0,
                              const ManifoldPoint& x, const CltPrediction& pred,
                              int nodes_per_dim = 128);

// Defect of the transport expansion across a single cut-hypersurface
// crossing: the geodesic from x0 to x1 must cross H_z exactly once,
// transversally; the crossing parameter is located by bisection on
// phi1 - phi2. Returns the norm of (left side - right side), o(rho(x0,x1)).
double transport_expansion_check(const ManifoldPoint& z, const ManifoldPoint& x0,
                                 const ManifoldPoint& x1);

// Plain Taylor-expansion defect (no crossing); the degenerate case of the
// expansion used on manifolds whose regular cut locus is empty.
double taylor_expansion_residual(const ManifoldPoint& z, const ManifoldPoint& x0,
                                 const ManifoldPoint& x1);

// Richardson-extrapolated central-difference Hessian of F_mu in normal
// coordinates at x0; the independent route that pins the Psi convention.
Mat fd_frechet_hessian(const DensityModel& model, const ManifoldPoint& x0,
                       double h = 1e-3, int nodes_per_dim = 128);

}  // namespace manistats
