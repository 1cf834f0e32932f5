#pragma once

#include <bilopt/objective.hpp>
#include <bilopt/optimizer.hpp>
#include <bilopt/problems.hpp>

#include <span>

namespace bilopt {

/// Measured growth of m(eps) = |{x in omega : |psi(x)| <= eps}| on an eps grid
/// and the fitted constant K = max m(eps)/eps.
struct StructureEstimate {
  std::vector<double> eps_grid;
  std::vector<double> measures;
  std::vector<double> ratios;
  std::vector<double> std_errors;  // zero for the slicing route
  double K = 0.0;
  bool degenerate = false;  // density vanishes on a set of positive measure

  double kappa(double bound_gap) const { return 1.0 / (4.0 * bound_gap * K); }
};

/// {2^-8, ..., 2^-3} * density_max.
std::vector<double> default_eps_grid(double density_max);

/// Dense deterministic sampling (Halton) of the sublevel-set measures.
StructureEstimate estimate_structure_constant(const ScalarFn& density, const Rect& omega,
                                              std::span<const double> eps_grid,
                                              long n_samples = 1000000);

/// Exact 1D slicing of the manufactured product-form density.
StructureEstimate structure_constant_sliced(const ManufacturedProblem& mp,
                                            std::span<const double> eps_grid);

struct GrowthCheckReport {
  int samples = 0;
  int violations = 0;
  double worst_margin = 0.0;    // min of lhs + slack*dist - kappa*dist^2
  double worst_margin_raw = 0.0;  // same without the slack
  double slack_constant = 0.0;  // sup |psi_exact - psi_h| over control elements
  int worst_sample = -1;
  unsigned seed = 0;
};

/// Checks J'(u_exact)(u - u_exact) >= kappa |u - u_exact|_1^2 for random
/// admissible u, evaluating the pairing with the discrete gradient density at
/// the projected exact control and allowing the measured density deviation
/// times |u - u_exact|_1 as discretization slack.
GrowthCheckReport first_order_growth_check(const ManufacturedProblem& mp,
                                           const Discretization& disc, double kappa,
                                           int n_samples, unsigned seed,
                                           const SolverOptions& options = {});

struct CriticalConeSample {
  double tau = 0.0;
  std::vector<int> support;  // region element indices with |psi_T| <= tau
  std::vector<ControlField> directions;
};

/// Random directions in the discrete critical cone: supported on the almost
/// inactive set, signs forced at active bounds, L1-normalized.
CriticalConeSample sample_critical_cone(const Discretization& disc, const ControlField& u,
                                        const GradientDensity& psi, double tau, int n_dirs,
                                        unsigned seed);

struct SecondOrderReport {
  double tau = 0.0;
  int directions = 0;
  bool cone_empty = false;
  std::vector<double> rayleigh_values;  // J'' v^2 per L1-normalized direction
  double min_rayleigh = 0.0;
  double kappa = 0.0;
  double kappa_prime = 0.0;  // max(0, -min_rayleigh)
  bool satisfied = false;    // kappa_prime < 2 kappa (vacuously true on empty cone)
};

/// kappa' and verdict from a sampled minimum Rayleigh value.
std::pair<double, bool> second_order_verdict(double min_rayleigh, double kappa);

/// Sampled necessary check of the critical-cone second-order condition;
/// report-only, non-exhaustive by construction.
SecondOrderReport second_order_condition_check(const HessianEvaluator& hessian,
                                               const CriticalConeSample& sample, double kappa);

struct NoGrowthRow {
  int k = 0;
  double l1_distance = 0.0;
  double delta_j = 0.0;  // J(u_k) - J(u_center)
};

/// Oscillating perturbations u_k = u + (delta/|B|) sign(sin(k pi x1)) chi_B:
/// the L1 distance stays delta while J(u_k) -> J(u), evaluated on a reference
/// mesh ref_multiple times finer.  Requires an interior-valued u on B with
/// delta <= rho |B|.
std::vector<NoGrowthRow> no_growth_study(const ProblemSpec& spec, const Mesh& mesh,
                                         const ControlField& u_center,
                                         std::span<const int> stripe_elements, double delta,
                                         std::span<const int> k_list, int ref_multiple = 4,
                                         const SolverOptions& options = {});

struct ErrorBoundReport {
  double gamma = 0.0;
  double gradient_gap = 0.0;    // sup |psi_h - psi_ref| over covered elements
  double slack = 0.0;           // 2 * measured_const * h_ref for the reference proxy
  double term_gradient = 0.0;   // (gamma+1)/gamma^2 (gap + slack)^2
  double projection_l1 = 0.0;   // |P u_exact - u_exact|_1
  double cross_term = 0.0;      // 2 J'(ext)(P u_exact - u_exact) on the reference mesh
  double term_projection = 0.0; // (1/gamma)(projection^2 + cross)
  double total = 0.0;
  double error_sq = 0.0;        // |u_exact - u_h|_1^2
  bool satisfied = false;
};

/// Numerical evaluation of the abstract error bound
///   error^2 <= (g+1)/g^2 sup|psi_h - psi|^2 + (1/g)(|Pu-u|^2 + 2 J'(ext)(Pu-u)),
/// g = (kappa - kappa')/2, with the continuous gradient replaced by a
/// reference-mesh proxy at least 4x finer plus a documented slack.
ErrorBoundReport control_error_bound(const ManufacturedProblem& mp,
                                     const Discretization& disc_h, const Mesh& mesh_ref,
                                     const ControlField& u_h, double kappa,
                                     double kappa_prime, const SolverOptions& options = {});

struct ConvergenceRow {
  int n = 0;
  double h = 0.0;
  double alpha_h = 0.0;
  double l1_error = 0.0;
  double eoc = std::numeric_limits<double>::quiet_NaN();
  double bound_term1 = 0.0;
  double bound_term2 = 0.0;
  double bound_total = 0.0;
  bool bound_satisfied = false;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double kappa = 0.0;
  double kappa_prime = 0.0;
  bool complete = false;
  std::string abort_reason;  // first per-level failure; rows end there
};

struct StudyOptions {
  OptimizerConfig optimizer{};
  SolverOptions solver{};
  int ref_multiple = 4;
  int threads = 1;
  double kappa = std::numeric_limits<double>::quiet_NaN();        // slicing when NaN
  double kappa_prime = 0.0;
  bool with_bound = true;
};

/// Solves the discrete control problem on each level with alpha_h = c_tik * h,
/// measures |u_exact - u_h|_1 by switching-line-exact quadrature, the
/// experimental orders, and the error-bound components per level.
ConvergenceTable convergence_study(const ManufacturedProblem& mp, std::span<const int> levels,
                                   double c_tik, const StudyOptions& options = {});

/// Piecewise-constant transfer of a control onto the region of a finer
/// canonical mesh; elements without a covered coarse parent get the cell
/// average of `fallback`.
ControlField transfer_control(const ControlField& coarse, const ControlRegion& fine_region,
                              const ScalarFn* fallback = nullptr,
                              std::span<const Line> fallback_lines = {});

/// Deterministic low-discrepancy sequence (van der Corput in the given base).
double halton(long index, int base);

}  // namespace bilopt
