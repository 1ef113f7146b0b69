#include "rsma/conic_program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "rsma/csv.hpp"

namespace rsma::conic {

AffineExpr AffineExpr::constant_value(double c) {
  AffineExpr e;
  e.constant = c;
  return e;
}

AffineExpr AffineExpr::variable(int var, double coef) {
  AffineExpr e;
  e.terms.push_back({var, coef});
  return e;
}

AffineExpr& AffineExpr::add(int var, double coef) {
  if (coef != 0.0) terms.push_back({var, coef});
  return *this;
}

AffineExpr& AffineExpr::add(const AffineExpr& other, double scale) {
  for (const auto& t : other.terms) add(t.var, scale * t.coef);
  constant += scale * other.constant;
  return *this;
}

AffineExpr& AffineExpr::scale(double factor) {
  for (auto& t : terms) t.coef *= factor;
  constant *= factor;
  return *this;
}

double AffineExpr::evaluate(const Eigen::VectorXd& x) const {
  double v = constant;
  for (const auto& t : terms) v += t.coef * x(t.var);
  return v;
}

int ConicProgram::add_variable(std::string name) {
  names_.push_back(std::move(name));
  return static_cast<int>(names_.size()) - 1;
}

void ConicProgram::add_equality(AffineExpr expr, std::string tag) {
  equalities_.push_back(std::move(expr));
  equality_tags_.push_back(std::move(tag));
}

void ConicProgram::add_nonnegative(AffineExpr expr, std::string tag) {
  cones_.push_back({ConeKind::kNonnegative, {std::move(expr)}, std::move(tag)});
}

void ConicProgram::add_second_order(AffineExpr t, std::vector<AffineExpr> x, std::string tag) {
  ConeBlock b{ConeKind::kSecondOrder, {}, std::move(tag)};
  b.rows.reserve(x.size() + 1);
  b.rows.push_back(std::move(t));
  for (auto& e : x) b.rows.push_back(std::move(e));
  cones_.push_back(std::move(b));
}

void ConicProgram::add_rotated_second_order(const std::vector<AffineExpr>& q, const AffineExpr& v,
                                            const AffineExpr& w, std::string tag) {
  AffineExpr t = v;
  t.add(w);
  std::vector<AffineExpr> x;
  x.reserve(q.size() + 1);
  for (const auto& e : q) {
    AffineExpr twice = e;
    x.push_back(twice.scale(2.0));
  }
  AffineExpr diff = v;
  diff.add(w, -1.0);
  x.push_back(std::move(diff));
  add_second_order(std::move(t), std::move(x), std::move(tag));
}

void ConicProgram::add_exponential(AffineExpr x, AffineExpr y, AffineExpr z, std::string tag) {
  cones_.push_back({ConeKind::kExponential, {std::move(x), std::move(y), std::move(z)}, std::move(tag)});
}

int ConicProgram::count(ConeKind kind) const {
  return static_cast<int>(std::count_if(cones_.begin(), cones_.end(), [kind](const ConeBlock& b) { return b.kind == kind; }));
}

double ConicProgram::barrier_parameter() const {
  double nu = 0.0;
  for (const auto& b : cones_) {
    switch (b.kind) {
      case ConeKind::kNonnegative:
        nu += static_cast<double>(b.rows.size());
        break;
      case ConeKind::kSecondOrder:
        nu += 2.0;
        break;
      case ConeKind::kExponential:
        nu += 3.0;
        break;
    }
  }
  return nu;
}

double ConicProgram::block_violation(const ConeBlock& block, const Eigen::VectorXd& x) {
  switch (block.kind) {
    case ConeKind::kNonnegative: {
      double worst = 0.0;
      for (const auto& r : block.rows) worst = std::max(worst, -r.evaluate(x));
      return worst;
    }
    case ConeKind::kSecondOrder: {
      const double t = block.rows[0].evaluate(x);
      double ss = 0.0;
      for (std::size_t i = 1; i < block.rows.size(); ++i) {
        const double v = block.rows[i].evaluate(x);
        ss += v * v;
      }
      return std::max(0.0, std::sqrt(ss) - t);
    }
    case ConeKind::kExponential: {
      const double a = block.rows[0].evaluate(x);
      const double y = block.rows[1].evaluate(x);
      const double z = block.rows[2].evaluate(x);
      if (y > 0.0 && z > 0.0) return std::max(0.0, a - y * std::log(z / y));
      // Closure at y = 0 is {x <= 0, z >= 0}.
      return std::max({0.0, -y, -z}) + std::max(0.0, a);
    }
  }
  return std::numeric_limits<double>::infinity();
}

double ConicProgram::max_violation(const Eigen::VectorXd& x) const {
  double worst = 0.0;
  for (const auto& e : equalities_) worst = std::max(worst, std::abs(e.evaluate(x)));
  for (const auto& b : cones_) worst = std::max(worst, block_violation(b, x));
  return worst;
}

bool ConicProgram::all_variables_referenced() const {
  std::vector<bool> seen(names_.size(), false);
  auto mark = [&seen](const AffineExpr& e) {
    for (const auto& t : e.terms) seen[static_cast<std::size_t>(t.var)] = true;
  };
  mark(objective_);
  for (const auto& e : equalities_) mark(e);
  for (const auto& b : cones_) {
    for (const auto& r : b.rows) mark(r);
  }
  return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
}

std::string to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::kNonnegative:
      return "nonneg";
    case ConeKind::kSecondOrder:
      return "soc";
    case ConeKind::kExponential:
      return "exp";
  }
  return "?";
}

namespace {

void dump_expr(std::ostream& out, const AffineExpr& e) {
  out << csv::format_number(e.constant);
  for (const auto& t : e.terms) out << ' ' << t.var << ':' << csv::format_number(t.coef);
}

}  // namespace

void ConicProgram::dump(std::ostream& out) const {
  out << "conic-program v1 vars " << num_variables() << " eq " << equalities_.size() << " cones "
      << cones_.size() << '\n';
  for (int v = 0; v < num_variables(); ++v) out << "var " << v << ' ' << names_[static_cast<std::size_t>(v)] << '\n';
  out << "objective ";
  dump_expr(out, objective_);
  out << '\n';
  for (std::size_t i = 0; i < equalities_.size(); ++i) {
    out << "eq " << equality_tags_[i] << " | ";
    dump_expr(out, equalities_[i]);
    out << '\n';
  }
  for (const auto& b : cones_) {
    out << "cone " << to_string(b.kind) << ' ' << b.rows.size() << ' ' << b.tag;
    for (const auto& r : b.rows) {
      out << " | ";
      dump_expr(out, r);
    }
    out << '\n';
  }
}

}  // namespace rsma::conic
