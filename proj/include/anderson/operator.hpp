#pragma once

#include <Eigen/Sparse>
#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "anderson/box.hpp"
#include "anderson/field.hpp"

namespace anderson {

enum class Boundary { dirichlet, neumann };

std::string to_string(Boundary bc);
Boundary boundary_from_string(const std::string& s);

/// Discrete quadratic form  E(u,u) = sum_e w_e (u_x - u_y)^2 + sum_x q_x u_x^2
/// with mass  ||u||^2 = sum_x m_x u_x^2, everything divided by the cell volume.
///
/// Dirichlet unknowns are the nodes strictly inside the box; edges from them to
/// boundary nodes survive as `anchor` terms. Neumann unknowns are all box nodes,
/// weighted by the fraction of adjacent cells inside the box (the symmetric form
/// of the mirror ghost-node scheme).
struct AssembledForm {
  struct Edge {
    int i, j;
    double w;
  };

  Grid grid{2, 1.0, 8};
  Box box;
  Boundary bc = Boundary::dirichlet;
  std::vector<std::array<int, 3>> nodes;  // lattice position of each unknown
  std::vector<Edge> edges;                // i < j
  Eigen::VectorXd anchor;                 // Dirichlet edges to the boundary
  Eigen::VectorXd potential;              // diagonal coefficient q
  Eigen::VectorXd boundary;               // Neumann boundary functional, diagonal
  Eigen::VectorXd mass;

  int size() const { return static_cast<int>(nodes.size()); }
  /// Stiffness part only (edges and anchors), both triangles.
  Eigen::SparseMatrix<double> stiffness() const;
  /// Full operator matrix: stiffness + diag(potential + boundary).
  Eigen::SparseMatrix<double> matrix() const;
  /// Bilinear form evaluated edge by edge (independent of matrix()).
  double energy(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  double mass_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

  /// Restrict a torus field to the unknowns, and scatter back (zero elsewhere).
  Eigen::VectorXd gather(const Field& f) const;
  Field scatter(const Eigen::VectorXd& u) const;

  /// Adds c to every eigenvalue: potential += c * mass.
  AssembledForm shifted(double c) const;
};

/// Lattice Laplacian form of  -Delta - xi + c  on the box; potential diagonal
/// is -xi + c. Throws GeometryError if the box leaves the sampled torus.
AssembledForm assemble_direct(const Field& xi, double c, Boundary bc, const Box& box);

/// Exponentially transformed form  int e^{2W}|grad v|^2 + int Y v^2  with mass
/// e^{2W}. Edge weights use the geometric mean e^{W_x + W_y}. For Neumann boxes
/// an optional `flux` field adds  int_{dU} v^2 e^{2W} d_nu(flux) dS.
AssembledForm assemble_transformed(const Field& W, const Field& Y, Boundary bc, const Box& box,
                                   const std::optional<Field>& flux = std::nullopt);

/// Coordinate-format export: stem.json header, stem.A.coo (operator) and
/// stem.M.coo (mass), entries "row col value" sorted by (row, col).
void export_form(const std::string& stem, const AssembledForm& form);

struct BracketParams {
  double theta = 0.5;
  double s = 0.5;
  double w_sup = 0.0;   // ||W||_{L^inf(U)}
  double z_norm = 0.0;  // ||Z||_{H^s(U)}, supplied
  double c_ip = 1.0;    // interpolation constant, supplied
};

/// (Lambda_-, Lambda_+) =  (1 -+ theta) e^{-+4||W||} (lambda -+ A_-+).
/// For theta >= 1 the lower bracket degenerates: 0 at theta = 1, -inf beyond.
std::pair<double, double> bracket_lambda(const BracketParams& p, double lambda);

/// Smooth partition  sum_k eta_k^2 = 1  of a box by overlapping tiles of
/// period tile_L (physical length) with transition half-width overlap_l.
struct ImsPartition {
  std::vector<Field> eta;
  std::vector<Box> tiles;  // support of each eta_k, clipped to the box
  double tile_L = 0.0;
  double overlap = 0.0;
  /// Measured  l^2 * max_x sum_k |grad_h eta_k|^2  (forward differences).
  double K = 0.0;
};

ImsPartition ims_partition(const Grid& grid, const Box& box, double tile_L, double overlap_l);

/// Smallest A with  E(u,u) >= sum_k [E(eta_k u, eta_k u) - A ||eta_k u||^2]
/// for the discrete form:  max_x (1/2) sum_{e at x} w_e sum_k (d_e eta_k)^2 / m_x.
double ims_penalty(const AssembledForm& form, const ImsPartition& partition);

}  // namespace anderson
