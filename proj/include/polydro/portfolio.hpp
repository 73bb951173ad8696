#pragma once

// Portfolio experiments: seeded samplers on boxes, the batch min/max moment
// box, the linear and mean-variance DRO reformulations, and out-of-sample
// scoring.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polydro/dro.hpp"

namespace polydro {

/// One coordinate's distribution, always truncated to [a, b].
struct CoordinateDist {
  enum class Kind { Uniform, TruncatedNormal, TruncatedExponential };
  Kind kind = Kind::Uniform;
  double a = 0.0, b = 1.0;
  double mu = 0.0, sigma = 1.0;  // normal: sigma is the standard deviation
  double mean = 1.0;             // exponential: mean of the untruncated law

  static CoordinateDist uniform(double a, double b);
  static CoordinateDist truncated_normal(double mu, double sigma, double a, double b);
  static CoordinateDist truncated_exponential(double mean, double a, double b);

  /// Throws Error(Semantic) for an empty interval or nonpositive scale.
  void check() const;
  /// Inverse CDF of the truncated law at u in [0, 1].
  double quantile(double u) const;
  std::string describe() const;
};

struct SampleSet {
  Eigen::MatrixXd samples;  // M x p
  std::string generator;
  std::uint64_t seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(samples.cols()); }
};

/// Independent coordinates, one uniform draw per entry pushed through the
/// truncated inverse CDF. Same seed, same set.
SampleSet sample_generators(const std::vector<CoordinateDist>& spec, std::size_t M, std::uint64_t seed);

/// Header row xi1,...,xip, then one sample per line. Throws ParseError with
/// the offending line and column.
SampleSet read_samples_csv(std::istream& in, const std::string& source = "samples");
SampleSet load_samples_csv(const std::string& path);

/// Rows [first, first + count) as a new set.
SampleSet slice(const SampleSet& s, std::size_t first, std::size_t count);

/// Empirical moment vector of the rows, indexed by graded_basis(p, d).
Eigen::VectorXd empirical_moments(const Eigen::MatrixXd& samples, unsigned d);

/// Splits the rows into B consecutive batches (sizes differ by at most one),
/// takes the componentwise min and max of the batch moment vectors and pins
/// the zeroth entry to 1. Throws Error(Semantic) unless M >= B >= 2.
RawY build_box_ambiguity(const SampleSet& samples, unsigned d, std::size_t batches = 5);

/// The same box read at a higher degree: entries above d are unbounded.
RawY widen_box(const RawY& box, unsigned degree);

enum class PortfolioKind { Linear, MeanVariance };

/// Epigraph form over decision (x0, xbar) with x = (xbar, 1 - e^T xbar):
///   min x0  s.t.  inf E[h] >= 0,  xbar >= 0,  1 - e^T xbar >= 0
/// with h = x0 + x^T xi (linear) or x0 + x^T nu - (x^T xi - x^T nu)^2.
/// The moment degree is max(deg_xi h, box degree). Support is the box
/// [lower, upper]^n described by (xi_i - lower)(upper - xi_i) >= 0.
DROProblem build_portfolio_model(PortfolioKind kind, const RawY& box, const Eigen::VectorXd& nu, double lower,
                                 double upper);

/// x = (xbar, 1 - e^T xbar) from the decision vector (x0, xbar).
Eigen::VectorXd portfolio_weights(const std::vector<double>& decision);

/// J(x) = mean_i [ -x^T nu_hat + (x^T xi_i - x^T nu_hat)^2 ], nu_hat the sample
/// mean. Throws Error(Semantic) for an empty set.
double evaluate_J(const Eigen::VectorXd& x, const Eigen::MatrixXd& samples);

struct SimulationConfig {
  PortfolioKind kind = PortfolioKind::MeanVariance;
  std::size_t n = 10;
  std::size_t M = 400;
  unsigned d = 2;
  std::size_t sims = 10;
  std::uint64_t seed = 1;
  std::size_t batches = 5;
  double train_fraction = 0.75;
  bool sigma_is_std = false;  // N_T(0.05 i, 0.03 i, -1, 1): 0.03 i is a variance unless set
  std::size_t threads = 0;    // 0: hardware concurrency
};

struct SimulationRun {
  std::vector<double> x;
  double J_in = 0.0, J_out = 0.0, seconds = 0.0;
  std::string certificate;
};

struct SimulationSummary {
  unsigned d = 0;
  std::size_t M = 0;
  double avg_J_in = 0.0, avg_J_out = 0.0, avg_time = 0.0;
  std::vector<SimulationRun> runs;
};

/// Coordinate laws of the ten-asset experiment, generalized to n assets.
std::vector<CoordinateDist> truncated_normal_assets(std::size_t n, bool sigma_is_std);

/// Each simulation draws M samples with seed + index, builds the box from the
/// first train_fraction of them, solves at the initial relaxation order and
/// scores x on both parts. Simulations run concurrently; the average is
/// folded in index order.
SimulationSummary simulate_portfolio(const SimulationConfig& cfg);

std::string summary_csv_header();
std::string summary_csv_row(const SimulationSummary& s);

}  // namespace polydro
