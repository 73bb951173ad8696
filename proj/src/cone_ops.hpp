#pragma once

// Internal cone arithmetic for the interior-point solver. Vectors use the
// scaled representation: psd blocks are stored as svec (packed lower
// triangle, off-diagonals multiplied by sqrt(2)) so that the Euclidean inner
// product equals the trace inner product.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "polydro/conic.hpp"

namespace polydro::detail {

struct Block {
  ConeKind kind;
  Eigen::Index start;
  Eigen::Index len;
  Eigen::Index side;  // psd only
};

std::vector<Block> make_blocks(const ConicProgram& p);

Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& u, Eigen::Index side);
void svec(const Eigen::MatrixXd& m, Eigen::Ref<Eigen::VectorXd> out);

/// Nesterov-Todd scaling W with W s = W^{-T} x = lambda, per block.
struct Scaling {
  struct Part {
    Eigen::ArrayXd w;             // nonneg
    Eigen::VectorXd v;            // soc
    double beta = 1.0;            // soc
    Eigen::MatrixXd R, Rinv;      // psd
    Eigen::VectorXd lam;          // psd eigenvalues of the scaled point
  };
  std::vector<Block> blocks;
  std::vector<Part> parts;
  Eigen::VectorXd lambda;  // full length, zero on free blocks

  enum class Op { W, Wt, Winv, Wit };

  /// Returns false if x or s is not strictly interior.
  bool compute(const std::vector<Block>& blocks, const Eigen::VectorXd& x, const Eigen::VectorXd& s);
  Eigen::VectorXd apply(Op op, const Eigen::VectorXd& u) const;
  /// One block of W applied to a vector of that block's length.
  Eigen::VectorXd apply_block(std::size_t b, Op op, const Eigen::Ref<const Eigen::VectorXd>& u) const;
  /// lambda o u and lambda \ u (Jordan product with lambda and its inverse).
  Eigen::VectorXd lambda_prod(const Eigen::VectorXd& u) const;
  Eigen::VectorXd lambda_div(const Eigen::VectorXd& u) const;
};

/// Jordan product u o v, blockwise; zero on free blocks.
Eigen::VectorXd jordan(const std::vector<Block>& blocks, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Identity element, zero on free blocks.
Eigen::VectorXd identity(const std::vector<Block>& blocks, Eigen::Index n);

/// Largest alpha with x + alpha * dx in the cone (infinity if unbounded).
double max_step(const std::vector<Block>& blocks, const Eigen::VectorXd& x, const Eigen::VectorXd& dx);

}  // namespace polydro::detail
