#pragma once

#include <Eigen/Sparse>
#include <array>
#include <vector>

namespace anderson {

struct Inertia {
  long negative = 0;
  long zero = 0;
  long positive = 0;
};

/// Sylvester inertia of A - sigma*M for a sparse symmetric A with lattice
/// nearest-neighbour structure and a positive diagonal M.
///
/// The factorization is multifrontal LDL^T over a geometric nested-dissection
/// tree (one-node separator planes). Dense frontal matrices are factored with
/// Bunch-Kaufman pivoting (LAPACK dsytrf_rk); by Haynsworth additivity the
/// inertia is the sum over the pivot blocks of all fronts. The symbolic phase
/// is shared between shifts.
class InertiaCounter {
 public:
  /// `a` must hold both triangles; `coords` gives a lattice position per unknown.
  /// Couplings are allowed only between unknowns at lattice distance one along an axis.
  InertiaCounter(Eigen::SparseMatrix<double> a, Eigen::VectorXd mass,
                 const std::vector<std::array<int, 3>>& coords, int dim, int leaf_size = 64);

  Inertia inertia(double sigma) const;
  /// Number of generalized eigenvalues strictly below sigma.
  long count_below(double sigma) const { return inertia(sigma).negative; }

  int size() const { return static_cast<int>(mass_.size()); }
  /// Largest frontal matrix dimension.
  int max_front() const;

 private:
  struct Node {
    std::vector<int> elim;    // unknowns pivoted at this node, in elimination order
    std::vector<int> update;  // later unknowns coupled to the front, in elimination order
    std::vector<int> children;
    std::vector<std::vector<int>> child_map;  // child update slot -> front slot
    int subtree_begin = 0;                    // first node id of the subtree (postorder)
  };

  int build(std::vector<int> vars, const std::vector<std::array<int, 3>>& coords);
  void analyse();

  Eigen::SparseMatrix<double> a_;
  Eigen::VectorXd mass_;
  int dim_;
  int leaf_size_;
  std::vector<Node> nodes_;
  std::vector<int> pos_;
  std::vector<int> owner_;
};

}  // namespace anderson
