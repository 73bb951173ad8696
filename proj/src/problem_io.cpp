#include "polydro/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>

#include "polydro/errors.hpp"
#include "polydro/moments.hpp"
#include "polydro/poly_text.hpp"

namespace polydro {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw Error(ErrorKind::Parse, where + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) fail(where, "unknown key '" + it.key() + "'");
}

const json& need(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) fail(where, std::string("missing key '") + key + "'");
  return obj.at(key);
}

std::size_t as_size(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(where, "expected a non-negative integer");
  return v.get<std::size_t>();
}

double as_double(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  // JSON has no infinities; accept the strings used for unbounded box sides.
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  fail(where, "expected a number");
}

json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

Polynomial parse_field(const json& v, const std::string& where, const VariableScope& scope) {
  const std::string text = as_string(v, where);
  try {
    return parse_polynomial(text, scope);
  } catch (const Error& e) {
    throw Error(e.kind(), where + ": " + e.what());
  }
}

Polynomial parse_x(const json& v, const std::string& where, std::size_t n) {
  return parse_field(v, where, {n, 0, true, false});
}

Polynomial parse_xi(const json& v, const std::string& where, std::size_t p) {
  return parse_field(v, where, {0, p, false, true});
}

Eigen::RowVectorXd xi_row(const json& v, const std::string& where, std::size_t p, unsigned d) {
  const Polynomial q = parse_xi(v, where, p);
  if (q.degree() > d) throw Error(ErrorKind::Semantic, where + ": degree exceeds the moment degree " + std::to_string(d));
  return functional_row(q, d);
}

Eigen::MatrixXd xi_rows(const json& arr, const std::string& where, std::size_t p, unsigned d) {
  if (!arr.is_array()) fail(where, "expected an array of expressions");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(arr.size()), static_cast<Eigen::Index>(basis_size(p, d)));
  for (std::size_t i = 0; i < arr.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = xi_row(arr[i], where + "[" + std::to_string(i) + "]", p, d);
  return m;
}

Eigen::VectorXd number_vector(const json& arr, const std::string& where) {
  if (!arr.is_array()) fail(where, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = as_double(arr[i], where + "[" + std::to_string(i) + "]");
  return v;
}

RawY parse_raw(const json& arr, std::size_t p, unsigned d) {
  if (!arr.is_array()) fail("Y.raw", "expected an array");
  RawY raw;
  raw.p = p;
  raw.d = d;
  const Eigen::Index m = static_cast<Eigen::Index>(basis_size(p, d));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& e = arr[i];
    const std::string where = "Y.raw[" + std::to_string(i) + "]";
    const std::string type = as_string(need(e, "type", where), where + ".type");
    if (type == "ge" || type == "le" || type == "eq") {
      reject_unknown(e, where, {"type", "expr", "rhs"});
      RawY::Linear l;
      l.a = xi_row(need(e, "expr", where), where + ".expr", p, d);
      l.rhs = e.contains("rhs") ? as_double(e["rhs"], where + ".rhs") : 0.0;
      l.sense = type == "ge" ? RawY::Sense::Ge : type == "le" ? RawY::Sense::Le : RawY::Sense::Eq;
      raw.linear.push_back(std::move(l));
    } else if (type == "box") {
      reject_unknown(e, where, {"type", "lower", "upper"});
      RawY::Box b{number_vector(need(e, "lower", where), where + ".lower"),
                  number_vector(need(e, "upper", where), where + ".upper")};
      if (b.lower.size() != m || b.upper.size() != m)
        throw Error(ErrorKind::Semantic, where + ": bounds need " + std::to_string(m) + " entries");
      raw.boxes.push_back(std::move(b));
    } else if (type == "norm") {
      reject_unknown(e, where, {"type", "exprs", "offsets", "bound"});
      RawY::Norm nb;
      nb.B = xi_rows(need(e, "exprs", where), where + ".exprs", p, d);
      nb.offset = e.contains("offsets") ? number_vector(e["offsets"], where + ".offsets") : Eigen::VectorXd::Zero(nb.B.rows());
      if (nb.offset.size() != nb.B.rows()) throw Error(ErrorKind::Semantic, where + ": offsets and exprs differ in length");
      nb.bound = as_double(need(e, "bound", where), where + ".bound");
      raw.norms.push_back(std::move(nb));
    } else if (type == "psd_bound") {
      reject_unknown(e, where, {"type", "side", "entries", "bound"});
      RawY::PsdBound pb;
      pb.side = as_size(need(e, "side", where), where + ".side");
      pb.map = xi_rows(need(e, "entries", where), where + ".entries", p, d);
      if (static_cast<std::size_t>(pb.map.rows()) != packed_size(pb.side))
        throw Error(ErrorKind::Semantic, where + ": expected " + std::to_string(packed_size(pb.side)) + " packed entries");
      pb.bound = as_double(need(e, "bound", where), where + ".bound");
      raw.psd_bounds.push_back(std::move(pb));
    } else {
      fail(where, "unknown raw constraint type '" + type + "'");
    }
  }
  return raw;
}

ConeYDescription parse_cone(const json& arr, std::size_t p, unsigned d) {
  if (!arr.is_array()) fail("Y.cone", "expected an array");
  ConeYDescription Y;
  Y.p = p;
  Y.d = d;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& e = arr[i];
    const std::string where = "Y.cone[" + std::to_string(i) + "]";
    const std::string type = as_string(need(e, "type", where), where + ".type");
    ConeYBlock b;
    if (type == "nonneg" || type == "soc") {
      reject_unknown(e, where, {"type", "exprs"});
      b.kind = type == "nonneg" ? ConeKind::Nonneg : ConeKind::SecondOrder;
      b.map = xi_rows(need(e, "exprs", where), where + ".exprs", p, d);
      b.dim = static_cast<std::size_t>(b.map.rows());
    } else if (type == "psd") {
      reject_unknown(e, where, {"type", "side", "entries"});
      b.kind = ConeKind::Psd;
      b.dim = as_size(need(e, "side", where), where + ".side");
      b.map = xi_rows(need(e, "entries", where), where + ".entries", p, d);
      if (static_cast<std::size_t>(b.map.rows()) != packed_size(b.dim))
        throw Error(ErrorKind::Semantic, where + ": expected " + std::to_string(packed_size(b.dim)) + " packed entries");
    } else {
      fail(where, "unknown cone block type '" + type + "'");
    }
    Y.blocks.push_back(std::move(b));
  }
  try {
    Y.check();
  } catch (const Error& err) {
    throw Error(ErrorKind::Semantic, std::string("Y.cone: ") + err.what());
  }
  return Y;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json rows_json(const Eigen::MatrixXd& m, std::size_t p, unsigned d) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) arr.push_back(format_xi_polynomial(row_polynomial(m.row(i), p, d)));
  return arr;
}

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(number_json(v(i)));
  return arr;
}

json values_json(const std::vector<double>& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(std::isfinite(x) ? json(x) : json(nullptr));
  return arr;
}

json maybe_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

bool close(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  if (a.size() == 0) return true;
  // Infinite box sides compare by value.
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double x = a.data()[i], y = b.data()[i];
    if (x == y) continue;
    if (!(std::abs(x - y) <= tol)) return false;
  }
  return true;
}

bool same_poly(const Polynomial& a, const Polynomial& b, double tol) {
  return a.var_count() == b.var_count() && (tol == 0.0 ? a == b : a.distance(b) <= tol);
}

bool same_raw(const RawY& a, const RawY& b, double tol) {
  if (a.p != b.p || a.d != b.d || a.linear.size() != b.linear.size() || a.boxes.size() != b.boxes.size() ||
      a.norms.size() != b.norms.size() || a.psd_bounds.size() != b.psd_bounds.size())
    return false;
  for (std::size_t i = 0; i < a.linear.size(); ++i)
    if (a.linear[i].sense != b.linear[i].sense || !close(a.linear[i].a, b.linear[i].a, tol) ||
        std::abs(a.linear[i].rhs - b.linear[i].rhs) > tol)
      return false;
  for (std::size_t i = 0; i < a.boxes.size(); ++i)
    if (!close(a.boxes[i].lower, b.boxes[i].lower, tol) || !close(a.boxes[i].upper, b.boxes[i].upper, tol)) return false;
  for (std::size_t i = 0; i < a.norms.size(); ++i)
    if (!close(a.norms[i].B, b.norms[i].B, tol) || !close(a.norms[i].offset, b.norms[i].offset, tol) ||
        std::abs(a.norms[i].bound - b.norms[i].bound) > tol)
      return false;
  for (std::size_t i = 0; i < a.psd_bounds.size(); ++i)
    if (a.psd_bounds[i].side != b.psd_bounds[i].side || !close(a.psd_bounds[i].map, b.psd_bounds[i].map, tol) ||
        std::abs(a.psd_bounds[i].bound - b.psd_bounds[i].bound) > tol)
      return false;
  return true;
}

json report_json(const std::optional<SosReport>& r) {
  if (!r) return nullptr;
  return {{"verdict", to_string(r->verdict)}, {"status", to_string(r->status)}, {"note", r->note}};
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::string msg = e.what();
    if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ParseError(msg, line, col);
  }
  reject_unknown(doc, "problem", {"name", "n", "p", "f", "c", "h", "g", "Y", "options"});

  ProblemFile out;
  DROProblem& pr = out.problem;
  if (doc.contains("name")) pr.name = as_string(doc["name"], "name");
  pr.n = as_size(need(doc, "n", "problem"), "n");
  pr.p = as_size(need(doc, "p", "problem"), "p");
  if (pr.n == 0 || pr.p == 0) throw Error(ErrorKind::Semantic, "n and p must be positive");

  pr.f = parse_x(need(doc, "f", "problem"), "f", pr.n);
  if (doc.contains("c")) {
    if (!doc["c"].is_array()) fail("c", "expected an array");
    for (std::size_t i = 0; i < doc["c"].size(); ++i)
      pr.c.push_back(parse_x(doc["c"][i], "c[" + std::to_string(i) + "]", pr.n));
  }
  pr.h = parse_field(need(doc, "h", "problem"), "h", {pr.n, pr.p, true, true});
  if (doc.contains("g")) {
    if (!doc["g"].is_array()) fail("g", "expected an array");
    for (std::size_t i = 0; i < doc["g"].size(); ++i)
      pr.g.push_back(parse_xi(doc["g"][i], "g[" + std::to_string(i) + "]", pr.p));
  }

  const json& yj = need(doc, "Y", "problem");
  reject_unknown(yj, "Y", {"degree", "raw", "cone"});
  const unsigned hdeg = pr.h.degree_in({pr.n, pr.p});
  const unsigned d = yj.contains("degree") ? static_cast<unsigned>(as_size(yj["degree"], "Y.degree")) : hdeg;
  if (d < hdeg)
    throw Error(ErrorKind::Semantic, "Y.degree " + std::to_string(d) + " is below the xi-degree " +
                                         std::to_string(hdeg) + " of h");
  if (yj.contains("raw") == yj.contains("cone")) fail("Y", "give exactly one of 'raw' and 'cone'");
  if (yj.contains("raw")) {
    pr.raw_Y = parse_raw(yj["raw"], pr.p, d);
    pr.Y = homogenize_Y(*pr.raw_Y);
  } else {
    pr.Y = parse_cone(yj["cone"], pr.p, d);
  }

  if (doc.contains("options")) {
    const json& o = doc["options"];
    reject_unknown(o, "options", {"max_order", "max_k1", "tol_rank", "seed", "solver"});
    ProblemOverrides& ov = out.options;
    if (o.contains("max_order")) ov.max_order = static_cast<unsigned>(as_size(o["max_order"], "options.max_order"));
    if (o.contains("max_k1")) ov.max_k1 = static_cast<unsigned>(as_size(o["max_k1"], "options.max_k1"));
    if (o.contains("tol_rank")) ov.tol_rank = as_double(o["tol_rank"], "options.tol_rank");
    if (o.contains("seed")) ov.seed = static_cast<std::uint64_t>(as_size(o["seed"], "options.seed"));
    if (o.contains("solver")) ov.solver = as_string(o["solver"], "options.solver");
  }

  try {
    pr.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Semantic, e.what());
  }
  return out;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

json raw_y_to_json(const RawY& raw) {
  const std::size_t p = raw.p;
  const unsigned d = raw.d;
  json arr = json::array();
  for (const RawY::Linear& l : raw.linear) {
    const char* type = l.sense == RawY::Sense::Ge ? "ge" : l.sense == RawY::Sense::Le ? "le" : "eq";
    arr.push_back({{"type", type}, {"expr", format_xi_polynomial(row_polynomial(l.a, p, d))}, {"rhs", l.rhs}});
  }
  for (const RawY::Box& b : raw.boxes)
    arr.push_back({{"type", "box"}, {"lower", vector_json(b.lower)}, {"upper", vector_json(b.upper)}});
  for (const RawY::Norm& nb : raw.norms)
    arr.push_back({{"type", "norm"}, {"exprs", rows_json(nb.B, p, d)}, {"offsets", vector_json(nb.offset)}, {"bound", nb.bound}});
  for (const RawY::PsdBound& pb : raw.psd_bounds)
    arr.push_back({{"type", "psd_bound"}, {"side", pb.side}, {"entries", rows_json(pb.map, p, d)}, {"bound", pb.bound}});
  return arr;
}

json problem_to_json(const ProblemFile& file) {
  const DROProblem& pr = file.problem;
  json doc;
  if (!pr.name.empty()) doc["name"] = pr.name;
  doc["n"] = pr.n;
  doc["p"] = pr.p;
  doc["f"] = format_x_polynomial(pr.f);
  doc["c"] = json::array();
  for (const Polynomial& ci : pr.c) doc["c"].push_back(format_x_polynomial(ci));
  doc["h"] = format_polynomial(pr.h, pr.n);
  doc["g"] = json::array();
  for (const Polynomial& gi : pr.g) doc["g"].push_back(format_xi_polynomial(gi));

  json yj;
  yj["degree"] = pr.Y.d;
  const std::size_t p = pr.p;
  const unsigned d = pr.Y.d;
  if (pr.raw_Y) {
    yj["raw"] = raw_y_to_json(*pr.raw_Y);
  } else {
    json arr = json::array();
    for (const ConeYBlock& b : pr.Y.blocks) {
      if (b.kind == ConeKind::Psd)
        arr.push_back({{"type", "psd"}, {"side", b.dim}, {"entries", rows_json(b.map, p, d)}});
      else
        arr.push_back({{"type", b.kind == ConeKind::Nonneg ? "nonneg" : "soc"}, {"exprs", rows_json(b.map, p, d)}});
    }
    yj["cone"] = arr;
  }
  doc["Y"] = yj;

  const ProblemOverrides& o = file.options;
  if (o != ProblemOverrides{}) {
    json oj = json::object();
    if (o.max_order) oj["max_order"] = *o.max_order;
    if (o.max_k1) oj["max_k1"] = *o.max_k1;
    if (o.tol_rank) oj["tol_rank"] = *o.tol_rank;
    if (o.seed) oj["seed"] = *o.seed;
    if (o.solver) oj["solver"] = *o.solver;
    doc["options"] = oj;
  }
  return doc;
}

std::string serialize_problem(const ProblemFile& file) { return problem_to_json(file).dump(2) + "\n"; }

bool same_instance(const DROProblem& a, const DROProblem& b, double tol) {
  if (a.n != b.n || a.p != b.p || a.name != b.name || a.c.size() != b.c.size() || a.g.size() != b.g.size()) return false;
  if (!same_poly(a.f, b.f, tol) || !same_poly(a.h, b.h, tol)) return false;
  for (std::size_t i = 0; i < a.c.size(); ++i)
    if (!same_poly(a.c[i], b.c[i], tol)) return false;
  for (std::size_t i = 0; i < a.g.size(); ++i)
    if (!same_poly(a.g[i], b.g[i], tol)) return false;
  if (a.Y.p != b.Y.p || a.Y.d != b.Y.d || a.Y.blocks.size() != b.Y.blocks.size() || a.Y.provenance != b.Y.provenance)
    return false;
  for (std::size_t i = 0; i < a.Y.blocks.size(); ++i) {
    const ConeYBlock &x = a.Y.blocks[i], &y = b.Y.blocks[i];
    if (x.kind != y.kind || x.dim != y.dim || !close(x.map, y.map, tol)) return false;
  }
  if (a.raw_Y.has_value() != b.raw_Y.has_value()) return false;
  return !a.raw_Y || same_raw(*a.raw_Y, *b.raw_Y, tol);
}

void apply_overrides(const ProblemOverrides& o, DriverOptions& opt) {
  if (o.max_order) opt.max_order = *o.max_order;
  if (o.max_k1) opt.max_k1 = *o.max_k1;
  if (o.tol_rank) opt.rank_tol = *o.tol_rank;
  if (o.seed) opt.seed = *o.seed;
  if (o.solver) opt.relax.backend = *o.solver;
}

json battery_to_json(const SosBattery& b) {
  json cc = json::array();
  for (const SosReport& rep : b.c_concave) cc.push_back(report_json(rep));
  return {{"f_convex", report_json(b.f_convex)},
          {"c_concave", cc},
          {"h_concave", report_json(b.h_concave)},
          {"all_certified", b.all_certified()}};
}

json result_to_json(const DROResult& r, const DROProblem& pr) {
  const Certificate& c = r.certificate;
  json doc;
  doc["name"] = pr.name;
  doc["certificate"] = to_string(c.kind);
  doc["x"] = values_json(r.x);
  doc["value"] = maybe_number(r.value);
  doc["lower_bound"] = std::isinf(r.lower_bound) ? json("inf") : maybe_number(r.lower_bound);
  doc["degrees"] = {{"d", r.degrees.d}, {"t", r.degrees.t}, {"d0", r.degrees.d0}, {"d2", r.degrees.d2}};
  doc["k"] = r.k;
  doc["k1"] = r.k1;
  json ev;
  ev["rank_w"] = c.rank_w;
  ev["rank_one_z"] = c.rank_one_z;
  ev["double_rank_one"] = c.double_rank_one;
  ev["membership"] = c.membership;
  ev["gap_ok"] = c.gap_ok;
  ev["fragile_rank"] = c.fragile_rank;
  ev["eta"] = std::isinf(c.eta) ? json("-inf") : maybe_number(c.eta);
  if (c.flat) ev["flat"] = {{"d1", c.flat->d1}, {"rank", c.flat->rank}};
  if (c.battery.ran) ev["sos"] = battery_to_json(c.battery);
  if (c.heuristic) {
    const HeuristicResult& h = *c.heuristic;
    ev["heuristic"] = {{"kind", to_string(h.kind)}, {"x", values_json(h.x)}, {"value", maybe_number(h.value)},
                       {"bound", maybe_number(h.bound)}, {"order", h.order}, {"note", h.note}};
  }
  doc["evidence"] = ev;
  if (r.worst_case) {
    json atoms = json::array();
    for (const Atom& a : r.worst_case->atoms) atoms.push_back({{"weight", a.weight}, {"point", values_json(a.point)}});
    doc["atoms"] = atoms;
  }
  doc["w"] = values_json(r.w.values);
  doc["y"] = values_json(r.y.values);
  json trace = json::array();
  for (const TraceEntry& t : r.trace)
    trace.push_back({{"k", t.k}, {"k1", t.k1}, {"step", t.step}, {"status", t.status}, {"gamma", maybe_number(t.gamma)},
                     {"rank", t.rank}, {"note", t.note}});
  doc["trace"] = trace;
  doc["diagnostics"] = r.diagnostics;
  doc["solver_failure"] = r.solver_failure;
  doc["seconds"] = r.seconds;
  return doc;
}

std::string result_summary(const DROResult& r, const DROProblem& pr) {
  std::ostringstream os;
  os << (pr.name.empty() ? std::string("problem") : pr.name) << ": " << to_string(r.certificate.kind) << "\n";
  os << "  x* = (";
  for (std::size_t i = 0; i < r.x.size(); ++i) os << (i ? ", " : "") << format_double(r.x[i]);
  os << ")\n  f(x*) = " << format_double(r.value) << ", lower bound = " << format_double(r.lower_bound) << "\n";
  os << "  orders: t = " << r.degrees.t << ", d = " << r.degrees.d << ", k = " << r.k;
  if (r.k1) os << ", k1 = " << r.k1;
  os << "\n";
  if (r.worst_case) {
    os << "  worst-case measure:\n";
    for (const Atom& a : r.worst_case->atoms) {
      os << "    " << format_double(a.weight) << " at (";
      for (std::size_t i = 0; i < a.point.size(); ++i) os << (i ? ", " : "") << format_double(a.point[i]);
      os << ")\n";
    }
  }
  for (const std::string& d : r.diagnostics) os << "  note: " << d << "\n";
  os << "  time: " << format_double(r.seconds) << " s\n";
  return os.str();
}

}  // namespace polydro
