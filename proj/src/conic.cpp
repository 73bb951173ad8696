#include "polydro/conic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "polydro/errors.hpp"
#include "polydro/moments.hpp"
#include "polydro/poly_text.hpp"

namespace polydro {

const char* to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::Free: return "free";
    case ConeKind::Nonneg: return "nonneg";
    case ConeKind::SecondOrder: return "soc";
    case ConeKind::Psd: return "psd";
  }
  return "?";
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Inaccurate: return "inaccurate";
    case SolveStatus::Failed: return "failed";
  }
  return "?";
}

void ConicProgram::check() const {
  std::size_t next = 0;
  for (const ConeBlock& blk : blocks) {
    if (blk.start != next) throw Error(ErrorKind::Dimension, "cone blocks must tile the variables in order");
    if (blk.kind == ConeKind::SecondOrder && blk.dim == 0) throw Error(ErrorKind::Dimension, "empty soc block");
    next += blk.length();
  }
  if (next != num_vars()) throw Error(ErrorKind::Dimension, "cone blocks do not cover all variables");
  if (static_cast<std::size_t>(A.cols()) != num_vars() || static_cast<std::size_t>(A.rows()) != num_rows())
    throw Error(ErrorKind::Dimension, "constraint matrix has the wrong shape");
}

std::size_t ConicProgram::barrier_degree() const {
  std::size_t nu = 0;
  for (const ConeBlock& blk : blocks) {
    switch (blk.kind) {
      case ConeKind::Free: break;
      case ConeKind::Nonneg: nu += blk.dim; break;
      case ConeKind::SecondOrder: nu += 1; break;
      case ConeKind::Psd: nu += blk.dim; break;
    }
  }
  return nu;
}

std::size_t ProgramBuilder::add_block(ConeKind kind, std::size_t dim) {
  ConeBlock blk{kind, num_vars_, dim};
  const std::size_t start = num_vars_;
  num_vars_ += blk.length();
  if (blk.length() > 0) blocks_.push_back(blk);
  return start;
}

std::size_t ProgramBuilder::add_row(double rhs) {
  rhs_.push_back(rhs);
  return rhs_.size() - 1;
}

void ProgramBuilder::add_coeff(std::size_t row, std::size_t var, double value) {
  if (row >= rhs_.size() || var >= num_vars_) throw Error(ErrorKind::Dimension, "coefficient outside program");
  if (value != 0.0) triplets_.emplace_back(static_cast<int>(row), static_cast<int>(var), value);
}

void ProgramBuilder::add_cost(std::size_t var, double value) {
  if (var >= num_vars_) throw Error(ErrorKind::Dimension, "cost outside program");
  cost_.emplace_back(var, value);
}

AffineExpr AffineExpr::var(std::size_t v, double coeff) {
  AffineExpr e;
  e.terms.emplace_back(v, coeff);
  return e;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
  constant += o.constant;
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  return *this;
}

AffineExpr& AffineExpr::operator*=(double a) {
  constant *= a;
  for (auto& t : terms) t.second *= a;
  return *this;
}

AffineExpr& AffineExpr::add_term(std::size_t var, double coeff) {
  terms.emplace_back(var, coeff);
  return *this;
}

double AffineExpr::evaluate(const Eigen::VectorXd& x) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * x(static_cast<Eigen::Index>(i));
  return v;
}

std::size_t InequalityFormBuilder::add_vars(std::size_t count) {
  const std::size_t first = num_vars_;
  num_vars_ += count;
  return first;
}

void InequalityFormBuilder::add_objective(std::size_t var, double coeff) {
  if (var >= num_vars_) throw Error(ErrorKind::Dimension, "objective term outside program");
  obj_.emplace_back(var, coeff);
}

std::size_t InequalityFormBuilder::add_equality(AffineExpr e) {
  ++num_eq_;
  cons_.push_back({ConeKind::Free, 1, {std::move(e)}});
  return cons_.size() - 1;
}

std::size_t InequalityFormBuilder::add_cone(ConeKind kind, std::size_t dim, std::vector<AffineExpr> entries) {
  if (kind == ConeKind::Free) throw Error(ErrorKind::Dimension, "use add_equality for free constraints");
  const ConeBlock probe{kind, 0, dim};
  if (entries.size() != probe.length() || entries.empty())
    throw Error(ErrorKind::Dimension, "cone constraint has the wrong number of entries");
  cons_.push_back({kind, dim, std::move(entries)});
  return cons_.size() - 1;
}

ConeBlock InequalityFormBuilder::block(std::size_t id) const {
  if (id >= cons_.size()) throw Error(ErrorKind::Dimension, "unknown constraint id");
  std::size_t eq = 0, col = num_eq_;
  for (std::size_t i = 0; i < id; ++i) {
    if (cons_[i].kind == ConeKind::Free) {
      ++eq;
    } else {
      col += ConeBlock{cons_[i].kind, 0, cons_[i].dim}.length();
    }
  }
  if (cons_[id].kind == ConeKind::Free) return {ConeKind::Free, eq, 1};
  return {cons_[id].kind, col, cons_[id].dim};
}

ConicProgram InequalityFormBuilder::build() const {
  // s = c - A^T u is the constraint value; psd off-diagonals of s are twice
  // the matrix entries.
  ProgramBuilder pb;
  for (std::size_t r = 0; r < num_vars_; ++r) pb.add_row(0.0);
  for (const auto& [v, a] : obj_) pb.add_rhs(v, a);
  if (num_eq_ > 0) pb.add_free(num_eq_);
  std::size_t eq = 0;
  auto emit = [&](std::size_t col, const AffineExpr& e, double scale) {
    pb.add_cost(col, scale * e.constant);
    for (const auto& [v, a] : e.terms) {
      if (v >= num_vars_) throw Error(ErrorKind::Dimension, "constraint term outside program");
      pb.add_coeff(v, col, -scale * a);
    }
  };
  for (const Constraint& c : cons_)
    if (c.kind == ConeKind::Free) emit(eq++, c.entries[0], 1.0);
  for (const Constraint& c : cons_) {
    if (c.kind == ConeKind::Free) continue;
    const std::size_t start = pb.add_block(c.kind, c.dim);
    if (c.kind == ConeKind::Psd) {
      std::size_t k = 0;
      for (std::size_t j = 0; j < c.dim; ++j)
        for (std::size_t i = j; i < c.dim; ++i, ++k) emit(start + k, c.entries[k], i == j ? 1.0 : 2.0);
    } else {
      for (std::size_t k = 0; k < c.entries.size(); ++k) emit(start + k, c.entries[k], 1.0);
    }
  }
  return pb.build();
}

SolveStatus inequality_form_status(SolveStatus st) {
  if (st == SolveStatus::Infeasible) return SolveStatus::Unbounded;
  if (st == SolveStatus::Unbounded) return SolveStatus::Infeasible;
  return st;
}

ConicProgram ProgramBuilder::build() const {
  ConicProgram p;
  p.blocks = blocks_;
  p.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_vars_));
  for (const auto& [v, val] : cost_) p.c(static_cast<Eigen::Index>(v)) += val;
  p.A.resize(static_cast<Eigen::Index>(rhs_.size()), static_cast<Eigen::Index>(num_vars_));
  p.A.setFromTriplets(triplets_.begin(), triplets_.end());
  p.A.prune(0.0);
  p.b = Eigen::Map<const Eigen::VectorXd>(rhs_.data(), static_cast<Eigen::Index>(rhs_.size()));
  return p;
}

std::size_t psd_var(std::size_t start, std::size_t side, std::size_t i, std::size_t j) {
  if (i < j) std::swap(i, j);
  return start + packed_index(side, i, j);
}

Eigen::MatrixXd psd_block_matrix(const ConeBlock& block, const Eigen::VectorXd& v, bool dual) {
  const std::size_t m = block.dim;
  Eigen::MatrixXd out(m, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = j; i < m; ++i) {
      double val = v(static_cast<Eigen::Index>(psd_var(block.start, m, i, j)));
      if (dual && i != j) val *= 0.5;
      out(i, j) = val;
      out(j, i) = val;
    }
  return out;
}

SolverOptions SolverOptions::tightened() const {
  SolverOptions o = *this;
  o.tol_feas *= 0.01;
  o.tol_gap *= 0.01;
  o.max_iter *= 2;
  o.step_fraction = std::min(o.step_fraction, 0.95);
  return o;
}

static double cone_margin(const ConeBlock& blk, const Eigen::VectorXd& v, bool dual) {
  const auto start = static_cast<Eigen::Index>(blk.start);
  const auto len = static_cast<Eigen::Index>(blk.length());
  switch (blk.kind) {
    case ConeKind::Free: return dual && len > 0 ? -v.segment(start, len).cwiseAbs().maxCoeff() : 0.0;
    case ConeKind::Nonneg: return len > 0 ? v.segment(start, len).minCoeff() : 0.0;
    case ConeKind::SecondOrder: return v(start) - v.segment(start + 1, len - 1).norm();
    case ConeKind::Psd: {
      if (blk.dim == 0) return 0.0;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(psd_block_matrix(blk, v, dual), Eigen::EigenvaluesOnly);
      return es.eigenvalues()(0);
    }
  }
  return 0.0;
}

double ResidualReport::worst_cone_violation() const {
  double worst = 0.0;
  for (const BlockResidual& r : blocks) worst = std::max({worst, -r.primal_cone, -r.dual_cone});
  return worst;
}

ResidualReport validate_solution(const ConicProgram& p, const ConicSolution& s) {
  ResidualReport rep;
  rep.equality = (p.A * s.x - p.b).norm();
  rep.dual_equality = (p.c - p.A.transpose() * s.y - s.s).norm();
  rep.gap = p.c.dot(s.x) - p.b.dot(s.y);
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    const ConeBlock& blk = p.blocks[i];
    BlockResidual br;
    br.block = i;
    br.primal_cone = cone_margin(blk, s.x, false);
    br.dual_cone = cone_margin(blk, s.s, true);
    const auto start = static_cast<Eigen::Index>(blk.start);
    const auto len = static_cast<Eigen::Index>(blk.length());
    br.complementarity = s.x.segment(start, len).dot(s.s.segment(start, len));
    rep.blocks.push_back(br);
  }
  return rep;
}

void write_program(std::ostream& out, const ConicProgram& p) {
  out << "conic " << p.num_vars() << ' ' << p.num_rows() << '\n';
  for (const ConeBlock& blk : p.blocks) out << "cone " << to_string(blk.kind) << ' ' << blk.start << ' ' << blk.dim << '\n';
  for (Eigen::Index i = 0; i < p.c.size(); ++i)
    if (p.c(i) != 0.0) out << "c " << i << ' ' << format_double(p.c(i)) << '\n';
  for (Eigen::Index r = 0; r < p.A.outerSize(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(p.A, r); it; ++it)
      out << "A " << r << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
  for (Eigen::Index i = 0; i < p.b.size(); ++i)
    if (p.b(i) != 0.0) out << "b " << i << ' ' << format_double(p.b(i)) << '\n';
}

namespace {

double parse_value(const std::string& tok, int line) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) throw ParseError("bad number '" + tok + "'", line, 1);
  return v;
}

std::size_t parse_index(const std::string& tok, int line) {
  std::size_t v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) throw ParseError("bad index '" + tok + "'", line, 1);
  return v;
}

}  // namespace

ConicProgram read_program(std::istream& in) {
  std::string line;
  int lineno = 0;
  std::size_t vars = 0, rows = 0;
  bool header = false;
  ConicProgram p;
  std::vector<Eigen::Triplet<double>> trip;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string& kind = tok[0];
    auto need = [&](std::size_t count) {
      if (tok.size() != count) throw ParseError("wrong number of fields for '" + kind + "'", lineno, 1);
    };
    if (kind == "conic") {
      need(3);
      vars = parse_index(tok[1], lineno);
      rows = parse_index(tok[2], lineno);
      p.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vars));
      p.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows));
      header = true;
      continue;
    }
    if (!header) throw ParseError("missing 'conic' header", lineno, 1);
    if (kind == "cone") {
      need(4);
      ConeBlock blk;
      if (tok[1] == "free") blk.kind = ConeKind::Free;
      else if (tok[1] == "nonneg") blk.kind = ConeKind::Nonneg;
      else if (tok[1] == "soc") blk.kind = ConeKind::SecondOrder;
      else if (tok[1] == "psd") blk.kind = ConeKind::Psd;
      else throw ParseError("unknown cone '" + tok[1] + "'", lineno, 6);
      blk.start = parse_index(tok[2], lineno);
      blk.dim = parse_index(tok[3], lineno);
      p.blocks.push_back(blk);
    } else if (kind == "c") {
      need(3);
      const std::size_t i = parse_index(tok[1], lineno);
      if (i >= vars) throw ParseError("variable index out of range", lineno, 3);
      p.c(static_cast<Eigen::Index>(i)) = parse_value(tok[2], lineno);
    } else if (kind == "A") {
      need(4);
      const std::size_t r = parse_index(tok[1], lineno), v = parse_index(tok[2], lineno);
      if (r >= rows || v >= vars) throw ParseError("matrix index out of range", lineno, 3);
      trip.emplace_back(static_cast<int>(r), static_cast<int>(v), parse_value(tok[3], lineno));
    } else if (kind == "b") {
      need(3);
      const std::size_t i = parse_index(tok[1], lineno);
      if (i >= rows) throw ParseError("row index out of range", lineno, 3);
      p.b(static_cast<Eigen::Index>(i)) = parse_value(tok[2], lineno);
    } else {
      throw ParseError("unknown record '" + kind + "'", lineno, 1);
    }
  }
  if (!header) throw ParseError("empty program", lineno, 1);
  p.A.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(vars));
  p.A.setFromTriplets(trip.begin(), trip.end());
  p.check();
  return p;
}

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, SolverFunction>& registry() {
  static std::map<std::string, SolverFunction> r{{"ipm", [](const ConicProgram& p, const SolverOptions& o) {
                                                    return solve_ipm(p, o);
                                                  }}};
  return r;
}

}  // namespace

void register_solver(const std::string& name, SolverFunction fn) {
  std::lock_guard lock(registry_mutex());
  registry()[name] = std::move(fn);
}

std::vector<std::string> solver_names() {
  std::lock_guard lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [k, v] : registry()) names.push_back(k);
  return names;
}

ConicSolution solve(const ConicProgram& p, const SolverOptions& options, const std::string& solver) {
  SolverFunction fn;
  {
    std::lock_guard lock(registry_mutex());
    auto it = registry().find(solver);
    if (it == registry().end()) throw Error(ErrorKind::Unsupported, "unknown solver '" + solver + "'");
    fn = it->second;
  }
  return fn(p, options);
}

}  // namespace polydro
