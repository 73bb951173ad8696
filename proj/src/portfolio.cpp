#include "polydro/portfolio.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "polydro/driver.hpp"
#include "polydro/errors.hpp"
#include "polydro/poly_text.hpp"

namespace polydro {

CoordinateDist CoordinateDist::uniform(double a, double b) {
  CoordinateDist d;
  d.kind = Kind::Uniform;
  d.a = a;
  d.b = b;
  return d;
}

CoordinateDist CoordinateDist::truncated_normal(double mu, double sigma, double a, double b) {
  CoordinateDist d;
  d.kind = Kind::TruncatedNormal;
  d.mu = mu;
  d.sigma = sigma;
  d.a = a;
  d.b = b;
  return d;
}

CoordinateDist CoordinateDist::truncated_exponential(double mean, double a, double b) {
  CoordinateDist d;
  d.kind = Kind::TruncatedExponential;
  d.mean = mean;
  d.a = a;
  d.b = b;
  return d;
}

void CoordinateDist::check() const {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw Error(ErrorKind::Semantic, "sampling interval must be finite and nonempty");
  if (kind == Kind::TruncatedNormal && !(sigma > 0)) throw Error(ErrorKind::Semantic, "normal scale must be positive");
  if (kind == Kind::TruncatedExponential && !(mean > 0)) throw Error(ErrorKind::Semantic, "exponential mean must be positive");
}

double CoordinateDist::quantile(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  double x = a;
  switch (kind) {
    case Kind::Uniform: x = a + (b - a) * u; break;
    case Kind::TruncatedNormal: {
      const boost::math::normal_distribution<double> nd(mu, sigma);
      const double Fa = boost::math::cdf(nd, a), Fb = boost::math::cdf(nd, b);
      const double v = Fa + u * (Fb - Fa);
      if (v <= 0.0) x = a;
      else if (v >= 1.0) x = b;
      else x = boost::math::quantile(nd, v);
      break;
    }
    case Kind::TruncatedExponential: {
      // Exponential with rate 1/mean shifted to start at a, cut at b.
      const double rate = 1.0 / mean;
      const double mass = -std::expm1(-rate * (b - a));
      x = a - std::log1p(-u * mass) / rate;
      break;
    }
  }
  return std::clamp(x, a, b);
}

std::string CoordinateDist::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Uniform: os << "uniform(" << a << "," << b << ")"; break;
    case Kind::TruncatedNormal: os << "truncated_normal(" << mu << "," << sigma << "," << a << "," << b << ")"; break;
    case Kind::TruncatedExponential: os << "truncated_exponential(" << mean << "," << a << "," << b << ")"; break;
  }
  return os.str();
}

SampleSet sample_generators(const std::vector<CoordinateDist>& spec, std::size_t M, std::uint64_t seed) {
  if (spec.empty()) throw Error(ErrorKind::Semantic, "no coordinates to sample");
  for (const CoordinateDist& c : spec) c.check();
  SampleSet s;
  s.seed = seed;
  s.samples.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(spec.size()));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < spec.size(); ++j)
      s.samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = spec[j].quantile(unit(rng));
  for (std::size_t j = 0; j < spec.size(); ++j) s.generator += (j ? ";" : "") + spec[j].describe();
  return s;
}

SampleSet read_samples_csv(std::istream& in, const std::string& source) {
  std::string line;
  int line_no = 0;
  auto cells = [](const std::string& l) {
    std::vector<std::string> out;
    std::stringstream ss(l);
    std::string c;
    while (std::getline(ss, c, ',')) {
      const auto b = c.find_first_not_of(" \t\r");
      const auto e = c.find_last_not_of(" \t\r");
      out.push_back(b == std::string::npos ? "" : c.substr(b, e - b + 1));
    }
    return out;
  };
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, source + ": empty sample file");
  ++line_no;
  const std::vector<std::string> header = cells(line);
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] != "xi" + std::to_string(j + 1))
      throw ParseError(source + ": header must read xi1,...,xip", 1, static_cast<int>(j + 1));
  if (header.empty()) throw ParseError(source + ": header must read xi1,...,xip", 1, 1);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> c = cells(line);
    if (c.size() != header.size())
      throw ParseError(source + ": expected " + std::to_string(header.size()) + " values", line_no, 1);
    std::vector<double> row;
    for (std::size_t j = 0; j < c.size(); ++j) {
      char* end = nullptr;
      const double v = std::strtod(c[j].c_str(), &end);
      if (c[j].empty() || *end != '\0' || !std::isfinite(v))
        throw ParseError(source + ": not a number '" + c[j] + "'", line_no, static_cast<int>(j + 1));
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  SampleSet s;
  s.samples.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < header.size(); ++j)
      s.samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  s.generator = "csv:" + source;
  return s;
}

SampleSet load_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_samples_csv(in, path);
}

SampleSet slice(const SampleSet& s, std::size_t first, std::size_t count) {
  if (first + count > s.size()) throw Error(ErrorKind::Dimension, "sample slice out of range");
  SampleSet out;
  out.samples = s.samples.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
  out.generator = s.generator;
  out.seed = s.seed;
  return out;
}

Eigen::VectorXd empirical_moments(const Eigen::MatrixXd& samples, unsigned d) {
  if (samples.rows() == 0) throw Error(ErrorKind::Semantic, "empty sample set");
  const GradedBasis basis(static_cast<std::size_t>(samples.cols()), d);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  std::vector<double> pt(static_cast<std::size_t>(samples.cols()));
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) pt[static_cast<std::size_t>(j)] = samples(i, j);
    const std::vector<double> v = basis.evaluate(pt);
    m += Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return m / static_cast<double>(samples.rows());
}

RawY build_box_ambiguity(const SampleSet& samples, unsigned d, std::size_t batches) {
  const std::size_t M = samples.size();
  if (batches < 2 || M < batches)
    throw Error(ErrorKind::Semantic, "box ambiguity needs M >= B >= 2 (M = " + std::to_string(M) +
                                         ", B = " + std::to_string(batches) + ")");
  RawY raw;
  raw.p = samples.dim();
  raw.d = d;
  RawY::Box box;
  std::size_t start = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t len = M / batches + (b < M % batches ? 1 : 0);
    const Eigen::VectorXd m = empirical_moments(samples.samples.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)), d);
    if (b == 0) {
      box.lower = m;
      box.upper = m;
    } else {
      box.lower = box.lower.cwiseMin(m);
      box.upper = box.upper.cwiseMax(m);
    }
    start += len;
  }
  box.lower(0) = box.upper(0) = 1.0;
  raw.boxes.push_back(std::move(box));
  return raw;
}

RawY widen_box(const RawY& box, unsigned degree) {
  if (degree < box.d) throw Error(ErrorKind::Degree, "cannot narrow a moment box");
  RawY out;
  out.p = box.p;
  out.d = degree;
  const GradedBasis low(box.p, box.d), high(box.p, degree);
  const double inf = std::numeric_limits<double>::infinity();
  for (const RawY::Box& b : box.boxes) {
    RawY::Box w{Eigen::VectorXd::Constant(static_cast<Eigen::Index>(high.size()), -inf),
                Eigen::VectorXd::Constant(static_cast<Eigen::Index>(high.size()), inf)};
    // Graded order: the low-degree basis is a prefix of the high-degree one.
    w.lower.head(static_cast<Eigen::Index>(low.size())) = b.lower;
    w.upper.head(static_cast<Eigen::Index>(low.size())) = b.upper;
    out.boxes.push_back(std::move(w));
  }
  for (const RawY::Linear& l : box.linear) {
    RawY::Linear w = l;
    w.a = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(high.size()));
    w.a.head(l.a.size()) = l.a;
    out.linear.push_back(std::move(w));
  }
  if (!box.norms.empty() || !box.psd_bounds.empty())
    throw Error(ErrorKind::Unsupported, "only box and linear moment constraints can be widened");
  return out;
}

DROProblem build_portfolio_model(PortfolioKind kind, const RawY& box, const Eigen::VectorXd& nu, double lower,
                                 double upper) {
  const std::size_t n = box.p;
  if (n == 0) throw Error(ErrorKind::Dimension, "no assets");
  if (kind == PortfolioKind::MeanVariance && static_cast<std::size_t>(nu.size()) != n)
    throw Error(ErrorKind::Dimension, "nu must have one entry per asset");
  if (!(lower < upper)) throw Error(ErrorKind::Semantic, "empty support box");

  DROProblem pr;
  pr.n = n;  // x0 and the first n - 1 weights
  pr.p = n;
  pr.name = kind == PortfolioKind::Linear ? "linear portfolio" : "mean-variance portfolio";
  const std::size_t nv = pr.n + pr.p;

  // Weights as polynomials in (x0, xbar, xi).
  std::vector<Polynomial> x(n, Polynomial(nv));
  Polynomial last = Polynomial::constant(nv, 1.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    x[i] = Polynomial::variable(nv, 1 + i);
    last -= x[i];
  }
  x[n - 1] = last;

  Polynomial xt_xi(nv), xt_nu(nv);
  for (std::size_t i = 0; i < n; ++i) {
    xt_xi += x[i] * Polynomial::variable(nv, pr.n + i);
    if (kind == PortfolioKind::MeanVariance) xt_nu += nu(static_cast<Eigen::Index>(i)) * x[i];
  }
  const Polynomial x0 = Polynomial::variable(nv, 0);
  if (kind == PortfolioKind::Linear) {
    pr.h = x0 + xt_xi;
  } else {
    const Polynomial dev = xt_xi - xt_nu;
    pr.h = x0 + xt_nu - dev * dev;
  }

  pr.f = Polynomial::variable(pr.n, 0);
  Polynomial budget = Polynomial::constant(pr.n, 1.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    pr.c.push_back(Polynomial::variable(pr.n, 1 + i));
    budget -= Polynomial::variable(pr.n, 1 + i);
  }
  if (n > 1) pr.c.push_back(budget);

  for (std::size_t i = 0; i < n; ++i) {
    const Polynomial xi = Polynomial::variable(pr.p, i);
    pr.g.push_back((xi - Polynomial::constant(pr.p, lower)) * (Polynomial::constant(pr.p, upper) - xi));
  }

  const unsigned D = std::max(pr.h.degree_in({pr.n, pr.p}), box.d);
  pr.raw_Y = D > box.d ? widen_box(box, D) : box;
  pr.Y = homogenize_Y(*pr.raw_Y);
  pr.validate();
  return pr;
}

Eigen::VectorXd portfolio_weights(const std::vector<double>& decision) {
  if (decision.empty()) throw Error(ErrorKind::Dimension, "empty decision vector");
  const std::size_t n = decision.size();
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  double rest = 1.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    x(static_cast<Eigen::Index>(i)) = decision[1 + i];
    rest -= decision[1 + i];
  }
  x(static_cast<Eigen::Index>(n - 1)) = rest;
  return x;
}

double evaluate_J(const Eigen::VectorXd& x, const Eigen::MatrixXd& samples) {
  if (samples.rows() == 0) throw Error(ErrorKind::Semantic, "J needs at least one sample");
  if (samples.cols() != x.size()) throw Error(ErrorKind::Dimension, "x and samples differ in dimension");
  const Eigen::VectorXd r = samples * x;  // x^T xi per sample
  const double mean = r.mean();
  return -mean + (r.array() - mean).square().mean();
}

std::vector<CoordinateDist> truncated_normal_assets(std::size_t n, bool sigma_is_std) {
  std::vector<CoordinateDist> out;
  for (std::size_t i = 1; i <= n; ++i) {
    const double s = 0.03 * static_cast<double>(i);
    out.push_back(CoordinateDist::truncated_normal(0.05 * static_cast<double>(i), sigma_is_std ? s : std::sqrt(s), -1.0, 1.0));
  }
  return out;
}

SimulationSummary simulate_portfolio(const SimulationConfig& cfg) {
  if (cfg.sims == 0) throw Error(ErrorKind::Semantic, "need at least one simulation");
  const std::size_t train = static_cast<std::size_t>(std::floor(cfg.train_fraction * static_cast<double>(cfg.M)));
  if (train < cfg.batches || train >= cfg.M)
    throw Error(ErrorKind::Semantic, "sample split leaves too few samples for the box or the test part");
  const std::vector<CoordinateDist> assets = truncated_normal_assets(cfg.n, cfg.sigma_is_std);

  std::vector<SimulationRun> runs(cfg.sims);
  std::vector<std::string> errors(cfg.sims);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t s = next++; s < cfg.sims; s = next++) {
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const SampleSet all = sample_generators(assets, cfg.M, cfg.seed + s);
        const SampleSet in = slice(all, 0, train), out = slice(all, train, cfg.M - train);
        const RawY box = build_box_ambiguity(in, cfg.d, cfg.batches);
        const Eigen::VectorXd nu = in.samples.colwise().mean().transpose();
        const DROProblem pr = build_portfolio_model(cfg.kind, box, nu, -1.0, 1.0);
        DriverOptions opt;
        opt.initial_order_only = true;
        opt.sos_battery = false;
        opt.heuristic = false;
        opt.seed = cfg.seed + s;
        const DROResult r = run(pr, opt);
        if (r.x.empty()) throw Error(ErrorKind::Solver, "no candidate from the relaxation");
        const Eigen::VectorXd x = portfolio_weights(r.x);
        SimulationRun& run_out = runs[s];
        run_out.x.assign(x.data(), x.data() + x.size());
        run_out.J_in = evaluate_J(x, in.samples);
        run_out.J_out = evaluate_J(x, out.samples);
        run_out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        run_out.certificate = to_string(r.certificate.kind);
      } catch (const std::exception& e) {
        errors[s] = e.what();
      }
    }
  };
  std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cfg.sims);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  for (std::size_t s = 0; s < cfg.sims; ++s)
    if (!errors[s].empty()) throw Error(ErrorKind::Solver, "simulation " + std::to_string(s) + ": " + errors[s]);

  SimulationSummary sum;
  sum.d = cfg.d;
  sum.M = cfg.M;
  for (const SimulationRun& r : runs) {
    sum.avg_J_in += r.J_in;
    sum.avg_J_out += r.J_out;
    sum.avg_time += r.seconds;
  }
  const double k = static_cast<double>(cfg.sims);
  sum.avg_J_in /= k;
  sum.avg_J_out /= k;
  sum.avg_time /= k;
  sum.runs = std::move(runs);
  return sum;
}

std::string summary_csv_header() { return "d,M,avg_J_in,avg_J_out,avg_time"; }

std::string summary_csv_row(const SimulationSummary& s) {
  std::ostringstream os;
  os << s.d << "," << s.M << "," << format_double(s.avg_J_in) << "," << format_double(s.avg_J_out) << ","
     << format_double(s.avg_time);
  return os.str();
}

}  // namespace polydro
