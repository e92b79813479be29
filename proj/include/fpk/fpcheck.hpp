#pragma once

// Monte Carlo verification of the weak Fokker-Planck identity, the martingale property,
// cross-run agreement of marginals, and long-time behaviour.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpk/field.hpp"
#include "fpk/lyapunov.hpp"
#include "fpk/measure.hpp"
#include "fpk/sde.hpp"

namespace fpk {

/// Bias allowance per unit of dt. The expected residual of the estimator (Euler-Maruyama
/// marginals, which are Gaussian for "bm" and "ou", plus the 21-node trapezoid on [0, 1])
/// was computed by quadrature for x0 = (1, 0), dt = 1e-3 and the scale-2 bump bank:
/// worst 0.104 dt on "bm", 0.32 dt on "ou".
inline constexpr double kDiscretizationC = 0.5;

/// PASS iff |estimate| <= 3 * std_error + allowance.
struct ResidualReport {
  std::string test_id;
  double t = 0.0;
  std::optional<double> s;
  double estimate = 0.0;
  /// Across-path standard error of the per-path residual; the estimate is exactly the mean of
  /// those residuals, so this is the standard error the verdict uses.
  double std_error = 0.0;
  /// fp only: snapshot errors combined in quadrature as if snapshots were independent.
  /// Ignores the positive correlation between nodes and runs low; reported for comparison.
  std::optional<double> snapshot_std_error;
  double c = kDiscretizationC;
  double dt = 0.0;
  double allowance = 0.0;  // c * dt
  std::size_t n_nodes = 0;
  /// Largest |int phi d mu_{t_k+1} - int phi d mu_{t_k}| over consecutive nodes.
  std::optional<double> max_increment;
  bool passed = false;

  bool verdict() const noexcept;
};

/// R(t; phi) = int phi d mu_t - phi(x0) - int_0^t int L phi d mu_s ds, time integral by
/// composite trapezoid over the snapshots in [0, t], which must include 0 and t and number
/// at least 9.
ResidualReport fp_residual(const CoefficientField& field, const SimResult& sim, const Bump& phi,
                           double t, double c = kDiscretizationC);

using WeightFn = std::function<double(std::span<const double>)>;

/// Sample mean of (M_t - M_s) h(X_s), M_t = f(X_t) - f(x0) - int_0^t Lf(X_u) du with a pathwise
/// trapezoid over the snapshots in [s, t] (at least 5). Paths dead by t contribute 0.
ResidualReport martingale_residual(const CoefficientField& field, const SimResult& sim,
                                   const SmoothFunction& f, double s, double t, const WeightFn& h,
                                   double c = kDiscretizationC);

/// Bumps centered at the coordinatewise 25/50/75% quantiles of the alive X_s, radius twice
/// the mean interquartile range (at least 0.1).
std::vector<Bump> martingale_weight_bank(const EmpiricalMeasure& at_s);

struct BankDelta {
  double delta = 0.0;  // a - b
  double std_error = 0.0;
  bool passed = false;
};

struct MarginalComparison {
  double t = 0.0;
  std::vector<BankDelta> bank;
  double max_abs_delta = 0.0;
  std::vector<double> ks;  // per coordinate
  double ks_threshold = 0.02;
  double allowance = 0.0;
  bool bank_passed = false;
  bool ks_passed = false;
  bool passed = false;
};

/// Bank integrals within 3 combined standard errors plus `allowance`, KS per coordinate at
/// most `ks_threshold`. Agreement on the bank, not equality of laws.
MarginalComparison compare_marginals(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                     const std::vector<Bump>& bank, double allowance,
                                     double ks_threshold = 0.02);

struct UniquenessReport {
  double dt_a = 0.0;
  double dt_b = 0.0;
  double c = kDiscretizationC;
  std::vector<MarginalComparison> times;
  bool passed = false;
};

/// Runs both configs (which must share x0 and T) with every t in t_list added as a snapshot.
UniquenessReport uniqueness_compare(const CoefficientField& field, const SimConfig& a,
                                    const SimConfig& b, const std::vector<Bump>& bank,
                                    const std::vector<double>& t_list, double c = kDiscretizationC,
                                    double ks_threshold = 0.02, std::size_t threads = 0);
UniquenessReport uniqueness_compare(const SimResult& a, const SimResult& b,
                                    const std::vector<Bump>& bank, const std::vector<double>& t_list,
                                    double c = kDiscretizationC, double ks_threshold = 0.02);

struct BallSpec {
  Point center;
  double radius = 1.0;
};

struct ErgodicReport {
  std::vector<double> times;
  std::vector<BallSpec> balls;
  std::vector<std::vector<double>> bank_integrals;  // [time][bank member]
  std::vector<std::vector<double>> masses;          // [time][ball]
  double window = 0.2;
  std::vector<double> window_times;

  /// Tail-window estimates of the normalized limit: per-path time averages over the window,
  /// then averaged over paths (dead paths contribute 0).
  std::vector<Estimate> limit_bank;        // int phi d mu~
  std::vector<Estimate> limit_mass;        // mu~(E)
  std::vector<Estimate> stationarity;      // int L phi d mu~
  std::vector<std::vector<double>> deltas; // [time][ball] mu_t(E) - mu~(E)
  /// Early-half minus late-half window mass per ball, with standard error.
  std::vector<Estimate> window_drift;
  std::vector<bool> converged;             // per ball
  double alive_fraction = 1.0;
  double c = kDiscretizationC;
  double dt = 0.0;
  double allowance = 0.0;
  bool stationarity_passed = false;
  bool converged_all = false;
  std::optional<std::string> invariance_advisory;
  bool passed = false;
};

/// `cfg` snapshot times default to 21 nodes on [0, T]. Throws PreconditionError if every path
/// is dead in the window.
ErgodicReport ergodic_check(const CoefficientField& field, const SimConfig& cfg,
                            const std::vector<Bump>& bank, const std::vector<BallSpec>& balls,
                            double window = 0.2, double c = kDiscretizationC, std::size_t threads = 0);
ErgodicReport ergodic_check(const CoefficientField& field, const SimResult& sim,
                            const std::vector<Bump>& bank, const std::vector<BallSpec>& balls,
                            double window = 0.2, double c = kDiscretizationC);

/// Warns unless one of the two finite-invariant-measure conditions passes on a modest grid.
std::optional<std::string> invariance_advisory(const CoefficientField& field);

struct StationaryComparison {
  std::vector<BankDelta> bank;
  bool passed = false;
};

/// Limit bank integrals from two runs within 3 combined standard errors.
StationaryComparison compare_stationary(const ErgodicReport& a, const ErgodicReport& b);

}  // namespace fpk
