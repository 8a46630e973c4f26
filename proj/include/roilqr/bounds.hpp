#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "roilqr/dynamics.hpp"
#include "roilqr/lqr.hpp"
#include "roilqr/pod.hpp"
#include "roilqr/solver.hpp"
#include "roilqr/sysid.hpp"

namespace roilqr::bounds {

/// Full-order and reduced perturbed LQR problems about one nominal.
/// The reduced problem is the Galerkin projection of the full-order LTV
/// with linear cost terms evaluated at Phi alpha_bar.
struct LqrPair {
  Trajectory nominal;
  pod::ReducedBasis basis;
  sysid::LtvModel full_ltv;
  sysid::LtvModel reduced_ltv;
  lqr::CostTerms full_terms;
  lqr::CostTerms reduced_terms;
  lqr::CostModel cost;

  int horizon() const { return full_ltv.horizon(); }
  int control_dim() const { return full_ltv.control_dim(); }
};

/// Builds the pair from an already identified (or analytic) full-order LTV.
LqrPair make_pair(const sysid::LtvModel& full_ltv, const lqr::CostModel& cost,
                  const Trajectory& nominal, const pod::ReducedBasis& basis);

/// Identifies the full-order LTV around `nominal` and builds the pair with a
/// POD basis of the nominal.
LqrPair identify_pair(const Dynamics& model, const lqr::CostModel& cost,
                      const Trajectory& nominal, const pod::PodOptions& pod,
                      const sysid::PerturbationConfig& perturbation);

/// Reduced objective evaluated at a stacked control sequence.
double reduced_objective(const LqrPair& pair, const Vector& stacked_du);

/// Measured constants. epsilon = max(||x_t - Phi alpha_t||,
/// 1/2 ||dx_t - Phi d_alpha_t||) over the nominal and every evaluated dU;
/// c_bar is the max of the weighted norms over the same set.
struct Constants {
  double epsilon = 0.0;
  double c_bar = 0.0;
  double c1 = 0.0;          // 7 (T+1) c_bar
  double sigma_bar = 0.0;   // lambda_min of the Hessian of dJ in the x^T H x convention
  double delta = 0.0;       // sqrt(2 c1 epsilon / sigma_bar)
  bool sigma_valid = true;  // false when sigma_bar < 1e-10
};

struct Lemma1Result {
  int samples = 0;
  double max_gap = 0.0;
  double bound = 0.0;
  bool holds = false;
};

struct Lemma3Result {
  double optimal_gap = 0.0;      // |dJ(dU*) - dJhat(dUhat*)|
  double lemma2_bound = 0.0;     // c1 epsilon
  bool lemma2_holds = false;
  double control_distance = 0.0;  // ||dU* - dUhat*||
  double delta = 0.0;
  bool lemma3_holds = false;
  double looseness = 0.0;         // delta / control_distance
};

struct BoundsReport {
  Constants constants;
  Lemma1Result lemma1;
  Lemma3Result lemma3;
  int horizon = 0;
  int state_dim = 0;
  int reduced_dim = 0;
  int control_dim = 0;

  bool passed() const;
};

/// Runs both checks on one pair. Random dU draws are standard normal scaled
/// by `control_scale`; the minimizers of both problems join the sample set.
BoundsReport verify(const LqrPair& pair, int samples, std::uint64_t seed,
                    double control_scale = 1.0);

/// Lemma 1 only, with constants measured over the draws.
Lemma1Result check_lemma1(const LqrPair& pair, int samples, std::uint64_t seed,
                          double control_scale, Constants* constants = nullptr);

/// Lemmas 2 and 3 with the dense minimizers of both problems.
Lemma3Result check_lemma3(const LqrPair& pair, const Constants& constants);

/// Constants measured over the nominal plus the given stacked controls.
Constants measure_constants(const LqrPair& pair,
                            const std::vector<Vector>& controls);

struct SInfinityPoint {
  int iteration = 0;
  double cost = 0.0;
  double newton_norm = 0.0;  // ||H^-1 g|| of the full-order problem
  Constants constants;
  bool member = false;
  bool hessian_ok = true;
};

struct SInfinityTrace {
  std::vector<SInfinityPoint> points;
  double delta = 0.0;  // uniform: built from max eps, max c_bar, min sigma
  bool final_member = false;
  bool descent_outside = true;   // every non-member iterate is followed by a lower cost
  bool stays_inside = true;      // no member with cost below the first member's flips out
};

/// Re-identifies the full-order LTV at each iterate's trajectory and traces
/// membership in S_inf. `trajectories[k]` is the k-th accepted iterate.
SInfinityTrace trace_s_infinity(const Dynamics& model,
                                const lqr::CostModel& cost,
                                const std::vector<Trajectory>& trajectories,
                                const pod::PodOptions& pod,
                                const sysid::PerturbationConfig& perturbation,
                                int samples, std::uint64_t seed);

void to_json(nlohmann::json& j, const Constants& c);
void to_json(nlohmann::json& j, const Lemma1Result& r);
void to_json(nlohmann::json& j, const Lemma3Result& r);
void to_json(nlohmann::json& j, const BoundsReport& r);
void to_json(nlohmann::json& j, const SInfinityTrace& t);

}  // namespace roilqr::bounds
