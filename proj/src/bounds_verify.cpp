#include "roilqr/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "roilqr/errors.hpp"

namespace roilqr::bounds {

namespace {

constexpr double kSigmaFloor = 1e-10;

const lqr::StateWeight& weight_at(const lqr::CostModel& cost, int t, int T) {
  return t < T ? cost.state : cost.terminal;
}

double min_hessian_eigenvalue(const Matrix& H) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

std::vector<Vector> draw_controls(int count, Eigen::Index size, std::uint64_t seed,
                                  double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<Vector> draws;
  draws.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vector v(size);
    for (Eigen::Index j = 0; j < size; ++j) v(j) = normal(rng);
    draws.push_back(std::move(v));
  }
  return draws;
}

Constants finish(const LqrPair& pair, double eps, double c_bar) {
  Constants c;
  const int T = pair.horizon();
  c.epsilon = eps;
  c.c_bar = c_bar;
  c.c1 = 7.0 * (T + 1) * c_bar;
  const auto qp = lqr::build_dense_qp(pair.full_ltv, pair.full_terms);
  // dJ = 1/2 dU^T H dU + ..., so the x^T H_p x form has H_p = H / 2.
  c.sigma_bar = std::max(0.0, min_hessian_eigenvalue(qp.H) / 2.0);
  c.sigma_valid = c.sigma_bar >= kSigmaFloor;
  c.delta = c.sigma_valid ? std::sqrt(2.0 * c.c1 * c.epsilon / c.sigma_bar)
                          : std::numeric_limits<double>::infinity();
  return c;
}

}  // namespace

LqrPair make_pair(const sysid::LtvModel& full_ltv, const lqr::CostModel& cost,
                  const Trajectory& nominal, const pod::ReducedBasis& basis) {
  const int T = nominal.horizon();
  if (full_ltv.horizon() != T)
    throw DimensionError("make_pair: model and nominal horizons differ");
  if (basis.full_dim() != full_ltv.state_dim())
    throw DimensionError("make_pair: basis does not match the model");

  LqrPair p;
  p.nominal = nominal;
  p.basis = basis;
  p.full_ltv = full_ltv;
  p.reduced_ltv = sysid::galerkin_project(full_ltv, basis);
  p.cost = cost;
  p.full_terms = lqr::reduce_cost(cost, nominal, nullptr);

  const Matrix& phi = basis.modes();
  lqr::CostTerms& r = p.reduced_terms;
  r.luu = cost.control;
  r.lu = p.full_terms.lu;
  for (int t = 0; t <= T; ++t) {
    const auto& w = weight_at(cost, t, T);
    const Vector lifted = basis.lift(basis.project(nominal.states[t]));
    r.lx.push_back(phi.transpose() * w.apply(lifted - cost.goal));
    r.lxx.push_back(w.project(phi));
  }
  return p;
}

LqrPair identify_pair(const Dynamics& model, const lqr::CostModel& cost,
                      const Trajectory& nominal, const pod::PodOptions& pod,
                      const sysid::PerturbationConfig& perturbation) {
  const auto basis =
      pod::method_of_snapshots(pod::snapshot_matrix(nominal), pod);
  const auto full = sysid::fit_full_order_ltv(model, nominal, perturbation);
  return make_pair(full, cost, nominal, basis);
}

double reduced_objective(const LqrPair& pair, const Vector& stacked_du) {
  return lqr::perturbed_objective(pair.reduced_ltv, pair.reduced_terms,
                                  stacked_du);
}

Constants measure_constants(const LqrPair& pair,
                            const std::vector<Vector>& controls) {
  const int T = pair.horizon();
  const int nu = pair.control_dim();
  const auto& basis = pair.basis;
  const Matrix& phi = basis.modes();

  double eps = 0.0;
  double c_bar = 0.0;
  for (int t = 0; t <= T; ++t) {
    const Vector& x = pair.nominal.states[t];
    eps = std::max(eps, (x - basis.lift(basis.project(x))).norm());
    c_bar = std::max(c_bar, weight_at(pair.cost, t, T).apply(x - pair.cost.goal).norm());
  }

  for (const Vector& du : controls) {
    if (du.size() != static_cast<Eigen::Index>(T) * nu)
      throw DimensionError("measure_constants: control sequence length");
    Vector dx = Vector::Zero(phi.rows());
    Vector da = Vector::Zero(phi.cols());
    for (int t = 0; t <= T; ++t) {
      const Vector pda = phi * da;
      const auto& w = weight_at(pair.cost, t, T);
      eps = std::max(eps, 0.5 * (dx - pda).norm());
      c_bar = std::max({c_bar, w.apply(dx).norm(), w.apply(pda).norm()});
      if (t < T) {
        const Vector u = du.segment(static_cast<Eigen::Index>(t) * nu, nu);
        dx = pair.full_ltv.A[t] * dx + pair.full_ltv.B[t] * u;
        da = pair.reduced_ltv.A[t] * da + pair.reduced_ltv.B[t] * u;
      }
    }
  }
  return finish(pair, eps, c_bar);
}

Lemma1Result check_lemma1(const LqrPair& pair, int samples, std::uint64_t seed,
                          double control_scale, Constants* constants) {
  if (samples < 1) throw ConfigError("lemma 1 check needs at least one sample");
  const Eigen::Index n = static_cast<Eigen::Index>(pair.horizon()) * pair.control_dim();
  auto draws = draw_controls(samples, n, seed, control_scale);
  draws.push_back(Vector::Zero(n));

  const Constants c = measure_constants(pair, draws);
  Lemma1Result r;
  r.samples = static_cast<int>(draws.size());
  for (const Vector& du : draws) {
    const double gap =
        std::abs(lqr::perturbed_objective(pair.full_ltv, pair.full_terms, du) -
                 reduced_objective(pair, du));
    r.max_gap = std::max(r.max_gap, gap);
  }
  r.bound = c.c1 * c.epsilon;
  r.holds = r.max_gap <= r.bound;
  if (constants) *constants = c;
  return r;
}

Lemma3Result check_lemma3(const LqrPair& pair, const Constants& constants) {
  const Vector du_full = lqr::lqr_solve_dense(pair.full_ltv, pair.full_terms);
  const Vector du_red = lqr::lqr_solve_dense(pair.reduced_ltv, pair.reduced_terms);

  Lemma3Result r;
  r.optimal_gap =
      std::abs(lqr::perturbed_objective(pair.full_ltv, pair.full_terms, du_full) -
               reduced_objective(pair, du_red));
  r.lemma2_bound = constants.c1 * constants.epsilon;
  r.lemma2_holds = r.optimal_gap <= r.lemma2_bound;
  r.control_distance = (du_full - du_red).norm();
  r.delta = constants.delta;
  r.lemma3_holds = r.control_distance <= r.delta;
  r.looseness = r.control_distance > 0.0
                    ? r.delta / r.control_distance
                    : std::numeric_limits<double>::infinity();
  return r;
}

bool BoundsReport::passed() const {
  return lemma1.holds && lemma3.lemma2_holds && lemma3.lemma3_holds;
}

BoundsReport verify(const LqrPair& pair, int samples, std::uint64_t seed,
                    double control_scale) {
  if (samples < 1) throw ConfigError("bounds check needs at least one sample");
  const int T = pair.horizon();
  const Eigen::Index n = static_cast<Eigen::Index>(T) * pair.control_dim();

  // The minimizers are evaluated points too, so the constants must cover them.
  auto draws = draw_controls(samples, n, seed, control_scale);
  draws.push_back(Vector::Zero(n));
  draws.push_back(lqr::lqr_solve_dense(pair.full_ltv, pair.full_terms));
  draws.push_back(lqr::lqr_solve_dense(pair.reduced_ltv, pair.reduced_terms));

  BoundsReport rep;
  rep.constants = measure_constants(pair, draws);
  rep.horizon = T;
  rep.state_dim = pair.full_ltv.state_dim();
  rep.reduced_dim = pair.basis.rank();
  rep.control_dim = pair.control_dim();

  Lemma1Result& l1 = rep.lemma1;
  l1.samples = static_cast<int>(draws.size());
  for (const Vector& du : draws) {
    const double gap =
        std::abs(lqr::perturbed_objective(pair.full_ltv, pair.full_terms, du) -
                 reduced_objective(pair, du));
    l1.max_gap = std::max(l1.max_gap, gap);
  }
  l1.bound = rep.constants.c1 * rep.constants.epsilon;
  l1.holds = l1.max_gap <= l1.bound;

  rep.lemma3 = check_lemma3(pair, rep.constants);
  return rep;
}

SInfinityTrace trace_s_infinity(const Dynamics& model,
                                const lqr::CostModel& cost,
                                const std::vector<Trajectory>& trajectories,
                                const pod::PodOptions& pod,
                                const sysid::PerturbationConfig& perturbation,
                                int samples, std::uint64_t seed) {
  SInfinityTrace trace;
  if (trajectories.empty()) return trace;

  double eps = 0.0, c_bar = 0.0, sigma = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    sysid::PerturbationConfig pert = perturbation;
    pert.seed = solver::iteration_seed(seed, static_cast<int>(k));
    const LqrPair pair = identify_pair(model, cost, trajectories[k], pod, pert);

    SInfinityPoint pt;
    pt.iteration = static_cast<int>(k);
    pt.cost = cost.total(trajectories[k]);
    check_lemma1(pair, samples, pert.seed, 1.0, &pt.constants);

    const auto qp = lqr::build_dense_qp(pair.full_ltv, pair.full_terms);
    Eigen::LLT<Matrix> llt(qp.H);
    pt.hessian_ok = llt.info() == Eigen::Success;
    pt.newton_norm = pt.hessian_ok ? llt.solve(qp.g).norm()
                                   : std::numeric_limits<double>::infinity();

    eps = std::max(eps, pt.constants.epsilon);
    c_bar = std::max(c_bar, pt.constants.c_bar);
    sigma = std::min(sigma, pt.constants.sigma_bar);
    trace.points.push_back(pt);
  }

  const int T = trajectories.front().horizon();
  const double c1 = 7.0 * (T + 1) * c_bar;
  trace.delta = sigma >= kSigmaFloor ? std::sqrt(2.0 * c1 * eps / sigma)
                                     : std::numeric_limits<double>::infinity();

  int first_member = -1;
  for (auto& pt : trace.points) {
    pt.member = pt.hessian_ok && pt.newton_norm <= trace.delta;
    if (pt.member && first_member < 0) first_member = pt.iteration;
  }
  for (std::size_t k = 0; k + 1 < trace.points.size(); ++k)
    if (!trace.points[k].member && !(trace.points[k + 1].cost < trace.points[k].cost))
      trace.descent_outside = false;
  if (first_member >= 0) {
    const double entry_cost = trace.points[first_member].cost;
    for (std::size_t k = first_member; k < trace.points.size(); ++k)
      if (trace.points[k].cost <= entry_cost && !trace.points[k].member)
        trace.stays_inside = false;
  }
  trace.final_member = trace.points.back().member;
  return trace;
}

void to_json(nlohmann::json& j, const Constants& c) {
  j = {{"epsilon", c.epsilon},     {"c_bar", c.c_bar},
       {"c1", c.c1},               {"sigma_bar", c.sigma_bar},
       {"delta", std::isfinite(c.delta) ? nlohmann::json(c.delta) : nlohmann::json(nullptr)},
       {"sigma_valid", c.sigma_valid}};
}

void to_json(nlohmann::json& j, const Lemma1Result& r) {
  j = {{"samples", r.samples}, {"max_gap", r.max_gap},
       {"bound", r.bound},     {"holds", r.holds},
       {"looseness", r.max_gap > 0.0 ? nlohmann::json(r.bound / r.max_gap)
                                     : nlohmann::json(nullptr)}};
}

void to_json(nlohmann::json& j, const Lemma3Result& r) {
  j = {{"optimal_value_gap", r.optimal_gap},
       {"lemma2_bound", r.lemma2_bound},
       {"lemma2_holds", r.lemma2_holds},
       {"control_distance", r.control_distance},
       {"delta", std::isfinite(r.delta) ? nlohmann::json(r.delta) : nlohmann::json(nullptr)},
       {"lemma3_holds", r.lemma3_holds},
       {"looseness", std::isfinite(r.looseness) ? nlohmann::json(r.looseness)
                                                : nlohmann::json(nullptr)}};
}

void to_json(nlohmann::json& j, const BoundsReport& r) {
  j = {{"horizon", r.horizon},
       {"state_dim", r.state_dim},
       {"reduced_dim", r.reduced_dim},
       {"control_dim", r.control_dim},
       {"constants", r.constants},
       {"lemma1", r.lemma1},
       {"lemma2_3", r.lemma3},
       {"passed", r.passed()}};
}

void to_json(nlohmann::json& j, const SInfinityTrace& t) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : t.points) {
    pts.push_back({{"iteration", p.iteration},
                   {"cost", p.cost},
                   {"newton_norm", std::isfinite(p.newton_norm) ? nlohmann::json(p.newton_norm)
                                                                : nlohmann::json(nullptr)},
                   {"member", p.member},
                   {"hessian_ok", p.hessian_ok},
                   {"constants", p.constants}});
  }
  j = {{"delta", std::isfinite(t.delta) ? nlohmann::json(t.delta) : nlohmann::json(nullptr)},
       {"final_member", t.final_member},
       {"descent_outside", t.descent_outside},
       {"stays_inside", t.stays_inside},
       {"points", pts}};
}

}  // namespace roilqr::bounds
