#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "rsma/solver.hpp"

namespace rsma::conic {

void SolverSettings::validate() const {
  if (!(feasibility_tol > 0.0) || !(relative_gap > 0.0) || !(acceptable_gap > 0.0)) {
    throw std::invalid_argument("solver tolerances must be > 0");
  }
  if (max_iterations < 1) throw std::invalid_argument("solver max_iterations must be >= 1");
  if (!(barrier_growth > 1.0)) throw std::invalid_argument("solver barrier_growth must be > 1");
}

std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::kOptimal:
      return "optimal";
    case SolverStatus::kInfeasible:
      return "infeasible";
    case SolverStatus::kNumericalFailure:
      return "numerical-failure";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cone block in local coordinates: slack = G * x(vars) + h.
struct Block {
  ConeKind kind;
  std::vector<int> vars;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  Eigen::MatrixXd GtJG;  // second-order cones: G^T J G, J = diag(-1, 1, ..., 1)
};

void prepare(Block& blk) {
  if (blk.kind != ConeKind::kSecondOrder) return;
  blk.GtJG = blk.G.transpose() * blk.G;
  blk.GtJG.noalias() -= 2.0 * blk.G.row(0).transpose() * blk.G.row(0);
}

struct Problem {
  int n = 0;
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<Block> blocks;
  double nu = 0.0;
};

Block compile_block(const ConeBlock& cb) {
  Block blk;
  blk.kind = cb.kind;
  for (const auto& r : cb.rows) {
    for (const auto& t : r.terms) blk.vars.push_back(t.var);
  }
  std::sort(blk.vars.begin(), blk.vars.end());
  blk.vars.erase(std::unique(blk.vars.begin(), blk.vars.end()), blk.vars.end());
  const auto rows = static_cast<Eigen::Index>(cb.rows.size());
  blk.G = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(blk.vars.size()));
  blk.h.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& r = cb.rows[static_cast<std::size_t>(i)];
    blk.h(i) = r.constant;
    for (const auto& t : r.terms) {
      const auto pos = std::lower_bound(blk.vars.begin(), blk.vars.end(), t.var) - blk.vars.begin();
      blk.G(i, pos) += t.coef;
    }
  }
  prepare(blk);
  return blk;
}

Problem compile(const ConicProgram& prog) {
  Problem p;
  p.n = prog.num_variables();
  p.c = Eigen::VectorXd::Zero(p.n);
  for (const auto& t : prog.objective().terms) p.c(t.var) += t.coef;
  const auto m = static_cast<Eigen::Index>(prog.equalities().size());
  p.A = Eigen::MatrixXd::Zero(m, p.n);
  p.b = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& e = prog.equalities()[static_cast<std::size_t>(i)];
    for (const auto& t : e.terms) p.A(i, t.var) += t.coef;
    p.b(i) = -e.constant;
  }
  for (const auto& cb : prog.cones()) p.blocks.push_back(compile_block(cb));
  p.nu = prog.barrier_parameter();
  return p;
}

Eigen::VectorXd slack(const Block& blk, const Eigen::VectorXd& x) {
  Eigen::VectorXd xl(static_cast<Eigen::Index>(blk.vars.size()));
  for (std::size_t j = 0; j < blk.vars.size(); ++j) xl(static_cast<Eigen::Index>(j)) = x(blk.vars[j]);
  return blk.G * xl + blk.h;
}

// Barrier value, +inf outside the cone interior.
double barrier_value(ConeKind kind, const Eigen::VectorXd& s) {
  switch (kind) {
    case ConeKind::kNonnegative: {
      double v = 0.0;
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (!(s(i) > 0.0)) return kInf;
        v -= std::log(s(i));
      }
      return v;
    }
    case ConeKind::kSecondOrder: {
      const double t = s(0);
      if (!(t > 0.0)) return kInf;
      const double xi = t * t - s.tail(s.size() - 1).squaredNorm();
      if (!(xi > 0.0)) return kInf;
      return -std::log(xi);
    }
    case ConeKind::kExponential: {
      const double x = s(0);
      const double y = s(1);
      const double z = s(2);
      if (!(y > 0.0) || !(z > 0.0)) return kInf;
      const double psi = y * std::log(z / y) - x;
      if (!(psi > 0.0)) return kInf;
      return -std::log(psi) - std::log(y) - std::log(z);
    }
  }
  return kInf;
}

void barrier_derivatives(ConeKind kind, const Eigen::VectorXd& s, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
  const auto m = s.size();
  grad.resize(m);
  hess.setZero(m, m);
  switch (kind) {
    case ConeKind::kNonnegative:
      for (Eigen::Index i = 0; i < m; ++i) {
        grad(i) = -1.0 / s(i);
        hess(i, i) = 1.0 / (s(i) * s(i));
      }
      return;
    case ConeKind::kSecondOrder: {
      // f = -log(s^T J s), J = diag(1, -1, ..., -1)
      Eigen::VectorXd js = -s;
      js(0) = s(0);
      const double xi = s.dot(js);
      grad = -2.0 / xi * js;
      hess.diagonal().setConstant(2.0 / xi);
      hess(0, 0) = -2.0 / xi;
      hess.noalias() += (4.0 / (xi * xi)) * js * js.transpose();
      return;
    }
    case ConeKind::kExponential: {
      const double y = s(1);
      const double z = s(2);
      const double psi = y * std::log(z / y) - s(0);
      Eigen::Vector3d dpsi(-1.0, std::log(z / y) - 1.0, y / z);
      Eigen::Matrix3d d2psi = Eigen::Matrix3d::Zero();
      d2psi(1, 1) = -1.0 / y;
      d2psi(1, 2) = d2psi(2, 1) = 1.0 / z;
      d2psi(2, 2) = -y / (z * z);
      grad = -dpsi / psi;
      grad(1) -= 1.0 / y;
      grad(2) -= 1.0 / z;
      hess = dpsi * dpsi.transpose() / (psi * psi) - d2psi / psi;
      hess(1, 1) += 1.0 / (y * y);
      hess(2, 2) += 1.0 / (z * z);
      return;
    }
  }
}

double barrier_total(const Problem& p, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (const auto& blk : p.blocks) {
    const double bv = barrier_value(blk.kind, slack(blk, x));
    if (!std::isfinite(bv)) return kInf;
    v += bv;
  }
  return v;
}

// Solves H dx = -g subject to A dx = 0. H is Jacobi-equilibrated first, which
// matters late in the path where slacks span many orders of magnitude.
bool solve_newton(const Problem& p, Eigen::MatrixXd H, const Eigen::VectorXd& g, Eigen::VectorXd& dx) {
  Eigen::VectorXd d = H.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  H = d.asDiagonal() * H * d.asDiagonal();
  const Eigen::VectorXd gs = d.cwiseProduct(g);
  double jitter = 1e-14;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd y;
      if (p.A.rows() == 0) {
        y = -llt.solve(gs);
      } else {
        // Schur complement on the equality multipliers; A dx = 0 keeps Ax = b.
        const Eigen::MatrixXd As = p.A * d.asDiagonal();
        const Eigen::MatrixXd HinvAt = llt.solve(As.transpose());
        const Eigen::VectorXd Hinvg = llt.solve(gs);
        const Eigen::MatrixXd S = As * HinvAt;
        const Eigen::VectorXd nu = S.ldlt().solve(-As * Hinvg);
        y = -Hinvg - HinvAt * nu;
      }
      dx = d.cwiseProduct(y);
      if (dx.allFinite()) return true;
    }
    H.diagonal().array() += jitter;
    jitter *= 100.0;
  }
  return false;
}

void assemble(const Problem& p, double t, const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& H) {
  Eigen::VectorXd grad_local;
  Eigen::MatrixXd hess_local;
  Eigen::VectorXd gl;
  Eigen::MatrixXd Hl;
  g = t * p.c;
  H.setZero(p.n, p.n);
  for (const auto& blk : p.blocks) {
    const Eigen::VectorXd s = slack(blk, x);
    const auto nv = static_cast<Eigen::Index>(blk.vars.size());
    const int* vars = blk.vars.data();
    if (blk.kind == ConeKind::kSecondOrder) {
      // Hessian of -log(s^T J' s) is (2/xi) J + (4/xi^2) J's s^T J', pulled back through G.
      Eigen::VectorXd js = -s;
      js(0) = s(0);
      const double xi = s.dot(js);
      gl.noalias() = blk.G.transpose() * js;
      const double a = 2.0 / xi;
      const double b = 4.0 / (xi * xi);
      for (Eigen::Index c = 0; c < nv; ++c) {
        double* col = H.data() + static_cast<Eigen::Index>(vars[c]) * p.n;
        const double* local = blk.GtJG.data() + c * nv;
        const double bc = b * gl(c);
        for (Eigen::Index r = 0; r < nv; ++r) col[vars[r]] += a * local[r] + bc * gl(r);
      }
      for (Eigen::Index r = 0; r < nv; ++r) g(vars[r]) -= a * gl(r);
    } else {
      barrier_derivatives(blk.kind, s, grad_local, hess_local);
      gl.noalias() = blk.G.transpose() * grad_local;
      Hl.noalias() = blk.G.transpose().lazyProduct(hess_local.lazyProduct(blk.G));
      for (Eigen::Index c = 0; c < nv; ++c) {
        double* col = H.data() + static_cast<Eigen::Index>(vars[c]) * p.n;
        for (Eigen::Index r = 0; r < nv; ++r) col[vars[r]] += Hl(r, c);
      }
      for (Eigen::Index r = 0; r < nv; ++r) g(vars[r]) += gl(r);
    }
  }
}

enum class CenterOutcome { kConverged, kEarlyStop, kStalled, kIterationLimit };

// Newton decrement below which an iterate counts as centered.
constexpr double kCenteredDecrement = 1e-3;

// Suboptimality bound cT x - p* for an iterate with Newton decrement lambda < 1
// on the central-path problem at parameter t.
double gap_bound(double nu, double t, double lambda) {
  return (nu + (lambda + std::sqrt(nu)) * lambda / (1.0 - lambda)) / t;
}

// Damped Newton on t c^T x + F(x) from a strictly feasible x. `lambda` returns
// the last Newton decrement.
template <typename EarlyStop>
CenterOutcome center(const Problem& p, double t, Eigen::VectorXd& x, int& steps, int max_steps, double& lambda,
                     EarlyStop early_stop) {
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  Eigen::VectorXd dx;
  int small_steps = 0;
  double f0 = barrier_total(p, x);
  while (true) {
    if (steps >= max_steps) return CenterOutcome::kIterationLimit;
    assemble(p, t, x, g, H);
    if (!solve_newton(p, H, g, dx)) return CenterOutcome::kStalled;
    double lambda2 = -g.dot(dx);
    // Rounding can leave a tiny negative decrement at a center; the decrement is
    // affine invariant, so the cutoff is absolute.
    if (lambda2 < 0.0 && -lambda2 <= 1e-2 * kCenteredDecrement * kCenteredDecrement) lambda2 = 0.0;
    if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) return CenterOutcome::kStalled;
    lambda = std::sqrt(lambda2);
    if (lambda <= kCenteredDecrement) return CenterOutcome::kConverged;
    const double damped = 1.0 / (1.0 + lambda);
    const double cdx = t * p.c.dot(dx);

    // Decrease of t c^T x + F(x), formed without the large t c^T x term.
    auto decrease = [&](double step, double& f) {
      f = barrier_total(p, x + step * dx);
      return std::isfinite(f) ? step * cdx + (f - f0) : kInf;
    };
    double step = 1.0;
    double f = kInf;
    double delta = decrease(step, f);
    while (!std::isfinite(delta) && step > 1e-16) {
      step *= 0.5;
      delta = decrease(step, f);
    }
    if (!std::isfinite(delta)) return CenterOutcome::kStalled;
    while (step > damped && delta > -0.01 * step * lambda2) {
      step *= 0.5;
      delta = decrease(step, f);
    }
    if (step < damped) {
      double fd = kInf;
      if (std::isfinite(decrease(damped, fd))) {
        step = damped;
        f = fd;
      }
    }
    x += step * dx;
    f0 = f;
    ++steps;
    if (early_stop(x)) return CenterOutcome::kEarlyStop;
    if (step * dx.lpNorm<Eigen::Infinity>() <= 1e-15 * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
      if (++small_steps >= 3) return CenterOutcome::kStalled;
    } else {
      small_steps = 0;
    }
  }
}

// Moves a centered x at parameter t along the central-path tangent towards the
// center at t_next, keeping a margin to the boundary.
void predict(const Problem& p, double t, double t_next, Eigen::VectorXd& x) {
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  assemble(p, t, x, g, H);
  Eigen::VectorXd tangent;
  if (!solve_newton(p, H, p.c, tangent)) return;
  const Eigen::VectorXd dx = (t_next - t) * tangent;
  double step = 1.0;
  while (step > 1e-3 && !std::isfinite(barrier_total(p, x + step * dx))) step *= 0.5;
  if (step <= 1e-3) return;
  x += 0.9 * step * dx;
}

bool strictly_feasible(const Problem& p, const Eigen::VectorXd& x) { return std::isfinite(barrier_total(p, x)); }

// Smallest shift s such that slack + s * e lies in the cone interior, where e
// is the cone's reference interior direction.
double required_shift(const Block& blk, const Eigen::VectorXd& s) {
  switch (blk.kind) {
    case ConeKind::kNonnegative:
      return -s.minCoeff();
    case ConeKind::kSecondOrder:
      return s.tail(s.size() - 1).norm() - s(0);
    case ConeKind::kExponential: {
      auto ok = [&s](double shift) {
        Eigen::VectorXd q = s;
        q(0) -= shift;
        q(1) += shift;
        q(2) += shift;
        return std::isfinite(barrier_value(ConeKind::kExponential, q));
      };
      if (ok(0.0)) {
        // Already interior: report a (conservative) negative margin.
        double shift = -1e-3;
        while (ok(2.0 * shift) && shift > -1e6) shift *= 2.0;
        return ok(shift) ? shift : 0.0;
      }
      double shift = std::max({0.0, -s(1), -s(2)}) + 1e-3;
      while (!ok(shift)) shift *= 2.0;
      return shift;
    }
  }
  return 0.0;
}

Eigen::VectorXd cone_direction(ConeKind kind, Eigen::Index rows) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(rows);
  switch (kind) {
    case ConeKind::kNonnegative:
      e.setOnes();
      break;
    case ConeKind::kSecondOrder:
      e(0) = 1.0;
      break;
    case ConeKind::kExponential:
      e << -1.0, 1.0, 1.0;
      break;
  }
  return e;
}

// min s  s.t.  slack_i(x) + s e_i in K_i,  s >= -1,  ||x|| <= radius,  Ax = b.
// The ball keeps the barrier bounded below along directions no cone limits.
Problem make_phase1(const Problem& p, double radius) {
  Problem q;
  q.n = p.n + 1;
  q.c = Eigen::VectorXd::Zero(q.n);
  q.c(p.n) = 1.0;
  q.A = Eigen::MatrixXd::Zero(p.A.rows(), q.n);
  q.A.leftCols(p.n) = p.A;
  q.b = p.b;
  for (const auto& blk : p.blocks) {
    Block nb;
    nb.kind = blk.kind;
    nb.vars = blk.vars;
    nb.vars.push_back(p.n);
    nb.G.resize(blk.G.rows(), blk.G.cols() + 1);
    nb.G.leftCols(blk.G.cols()) = blk.G;
    nb.G.col(blk.G.cols()) = cone_direction(blk.kind, blk.G.rows());
    nb.h = blk.h;
    prepare(nb);
    q.blocks.push_back(std::move(nb));
  }
  Block bound;
  bound.kind = ConeKind::kNonnegative;
  bound.vars = {p.n};
  bound.G = Eigen::MatrixXd::Ones(1, 1);
  bound.h = Eigen::VectorXd::Ones(1);
  q.blocks.push_back(std::move(bound));
  Block ball;
  ball.kind = ConeKind::kSecondOrder;
  for (int j = 0; j < p.n; ++j) ball.vars.push_back(j);
  ball.G = Eigen::MatrixXd::Zero(p.n + 1, p.n);
  ball.G.bottomRows(p.n).setIdentity();
  ball.h = Eigen::VectorXd::Zero(p.n + 1);
  ball.h(0) = radius;
  prepare(ball);
  q.blocks.push_back(std::move(ball));
  q.nu = p.nu + 3.0;
  return q;
}

}  // namespace

SolverResult solve(const ConicProgram& program, const SolverSettings& settings,
                   const std::optional<Eigen::VectorXd>& start) {
  settings.validate();
  const Problem p = compile(program);
  SolverResult result;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p.n);
  if (start && start->size() == p.n && start->allFinite()) x = *start;

  if (p.A.rows() > 0) {
    const Eigen::VectorXd r = p.b - p.A * x;
    x += p.A.completeOrthogonalDecomposition().solve(r);
    if ((p.A * x - p.b).lpNorm<Eigen::Infinity>() > settings.feasibility_tol * std::max(1.0, p.b.lpNorm<Eigen::Infinity>())) {
      result.status = SolverStatus::kInfeasible;
      result.x = x;
      return result;
    }
  }

  int steps = 0;
  if (!strictly_feasible(p, x)) {
    const Problem q = make_phase1(p, 1e3 * (1.0 + x.norm()));
    double shift = -kInf;
    for (const auto& blk : p.blocks) shift = std::max(shift, required_shift(blk, slack(blk, x)));
    Eigen::VectorXd xs(q.n);
    xs.head(p.n) = x;
    xs(p.n) = std::max(shift, 0.0) + 1.0;
    double t = q.nu / std::max(1.0, std::abs(xs(p.n)));
    bool found = false;
    while (true) {
      double lambda = 0.0;
      const auto outcome = center(q, t, xs, steps, settings.max_iterations, lambda,
                                  [n = p.n](const Eigen::VectorXd& v) { return v(n) < 0.0; });
      if (outcome == CenterOutcome::kEarlyStop || xs(p.n) < 0.0) {
        found = true;
        break;
      }
      const double gap = gap_bound(q.nu, t, std::min(lambda, 0.5));
      if (xs(p.n) - gap > 0.0 || (gap < settings.feasibility_tol && xs(p.n) >= -settings.feasibility_tol)) {
        result.status = SolverStatus::kInfeasible;
        break;
      }
      if (outcome == CenterOutcome::kIterationLimit || outcome == CenterOutcome::kStalled) {
        result.status = xs(p.n) > 0.0 && gap < settings.acceptable_gap ? SolverStatus::kInfeasible
                                                                       : SolverStatus::kNumericalFailure;
        break;
      }
      t *= settings.barrier_growth;
    }
    result.phase1_steps = steps;
    if (!found) {
      result.x = xs.head(p.n);
      result.objective = p.c.dot(result.x) + program.objective().constant;
      result.newton_steps = steps;
      return result;
    }
    x = xs.head(p.n);
  }

  const double obj_const = program.objective().constant;
  if (p.blocks.empty() && p.c.squaredNorm() > 0.0) {
    result.status = SolverStatus::kNumericalFailure;  // unbounded linear objective
    result.x = x;
    return result;
  }
  const double nu = std::max(p.nu, 1.0);
  double t = nu / std::max(1.0, std::abs(p.c.dot(x) + obj_const));
  Eigen::VectorXd best = x;
  double best_gap = kInf;
  while (true) {
    double lambda = 0.0;
    const auto outcome =
        center(p, t, x, steps, settings.max_iterations, lambda, [](const Eigen::VectorXd&) { return false; });
    const double obj = p.c.dot(x) + obj_const;
    const double target = settings.relative_gap * std::max(1.0, std::abs(obj));
    if (outcome == CenterOutcome::kConverged) {
      best = x;
      best_gap = gap_bound(nu, t, lambda);
      if (best_gap <= target) {
        result.status = SolverStatus::kOptimal;
        break;
      }
      const double t_next = t * settings.barrier_growth;
      predict(p, t, t_next, x);
      t = t_next;
      continue;
    }
    // Stalled or out of iterations: fall back to the last centered iterate.
    if (!std::isfinite(best_gap) && strictly_feasible(p, x)) best = x;
    const double accept = settings.acceptable_gap * std::max(1.0, std::abs(obj));
    if (std::isfinite(best_gap) && best_gap <= accept) {
      result.status = SolverStatus::kOptimal;
      result.reduced_accuracy = true;
    } else {
      result.status = SolverStatus::kNumericalFailure;
    }
    break;
  }
  result.x = best;
  result.objective = p.c.dot(best) + obj_const;
  result.gap_bound = best_gap;
  result.newton_steps = steps;
  return result;
}

}  // namespace rsma::conic
