#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rsma::conic {

struct LinearTerm {
  int var;
  double coef;
};

// sum_j coef_j x_j + constant
struct AffineExpr {
  std::vector<LinearTerm> terms;
  double constant = 0.0;

  static AffineExpr constant_value(double c);
  static AffineExpr variable(int var, double coef = 1.0);

  AffineExpr& add(int var, double coef);
  AffineExpr& add(const AffineExpr& other, double scale = 1.0);
  AffineExpr& scale(double factor);
  double evaluate(const Eigen::VectorXd& x) const;
};

enum class ConeKind {
  kNonnegative,  // every row >= 0
  kSecondOrder,  // rows = (t, x): ||x||_2 <= t
  kExponential,  // rows = (x, y, z): y exp(x / y) <= z, y > 0
};

struct ConeBlock {
  ConeKind kind;
  std::vector<AffineExpr> rows;
  std::string tag;
};

// min c^T x  s.t.  A x = b,  affine rows in a product of cones.
class ConicProgram {
 public:
  int add_variable(std::string name);
  int num_variables() const { return static_cast<int>(names_.size()); }
  const std::string& variable_name(int var) const { return names_[static_cast<std::size_t>(var)]; }

  void add_equality(AffineExpr expr, std::string tag);
  void add_nonnegative(AffineExpr expr, std::string tag);
  void add_second_order(AffineExpr t, std::vector<AffineExpr> x, std::string tag);
  // ||q||^2 <= v * w with v, w >= 0, stored as ||(2q, v - w)|| <= v + w.
  void add_rotated_second_order(const std::vector<AffineExpr>& q, const AffineExpr& v, const AffineExpr& w,
                                std::string tag);
  void add_exponential(AffineExpr x, AffineExpr y, AffineExpr z, std::string tag);

  void set_objective(AffineExpr objective) { objective_ = std::move(objective); }
  const AffineExpr& objective() const { return objective_; }
  const std::vector<ConeBlock>& cones() const { return cones_; }
  const std::vector<AffineExpr>& equalities() const { return equalities_; }
  const std::vector<std::string>& equality_tags() const { return equality_tags_; }

  int count(ConeKind kind) const;
  // Barrier parameter of the standard log-barriers: 1 per nonnegative row,
  // 2 per second-order cone, 3 per exponential cone.
  double barrier_parameter() const;

  // Largest cone or equality violation at x; 0 for a feasible point.
  double max_violation(const Eigen::VectorXd& x) const;
  // Same, for one block.
  static double block_violation(const ConeBlock& block, const Eigen::VectorXd& x);

  // Plain-text sparse dump: header line, variables, objective, equalities
  // and one line per cone block (see README).
  void dump(std::ostream& out) const;

  // Every variable appears in at least one row or the objective.
  bool all_variables_referenced() const;

 private:
  std::vector<std::string> names_;
  std::vector<AffineExpr> equalities_;
  std::vector<std::string> equality_tags_;
  std::vector<ConeBlock> cones_;
  AffineExpr objective_;
};

std::string to_string(ConeKind kind);

}  // namespace rsma::conic
