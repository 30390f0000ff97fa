#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <json.hpp>

#include "anderson/error.hpp"
#include "anderson/operator.hpp"

namespace anderson {

std::string to_string(Boundary bc) { return bc == Boundary::dirichlet ? "dirichlet" : "neumann"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "dirichlet") return Boundary::dirichlet;
  if (s == "neumann") return Boundary::neumann;
  throw SchemaError("unknown boundary condition '" + s + "'");
}

namespace {

struct Coefficients {
  // Edge weight between adjacent torus nodes (flat indices), before cell fractions.
  std::function<double(std::size_t, std::size_t)> edge;
  std::function<double(std::size_t)> potential;
  std::function<double(std::size_t)> mass;
};

AssembledForm assemble(const Grid& grid, const Box& box, Boundary bc, const Coefficients& co) {
  if (grid.topology() != Topology::torus) throw GeometryError("forms are assembled from fields on a torus");
  validate_box(grid, box);
  const int d = grid.dim();
  AssembledForm form;
  form.grid = grid;
  form.box = box;
  form.bc = bc;

  const bool dir = bc == Boundary::dirichlet;
  auto included = [&](const std::array<int, 3>& m) { return dir ? box.strictly_inside(m, d) : box.contains(m, d); };

  // Unknown numbering: lexicographic over the box, axis 0 fastest.
  std::array<int, 3> ext{1, 1, 1};
  for (int a = 0; a < d; ++a) ext[a] = box.hi[a] - box.lo[a] + 1;
  std::vector<int> local(static_cast<std::size_t>(ext[0]) * ext[1] * ext[2], -1);
  auto local_index = [&](const std::array<int, 3>& m) {
    return (static_cast<std::size_t>(m[2] - box.lo[2]) * ext[1] + (m[1] - box.lo[1])) * ext[0] + (m[0] - box.lo[0]);
  };
  {
    std::array<int, 3> m = box.lo;
    for (;;) {
      if (included(m)) {
        local[local_index(m)] = static_cast<int>(form.nodes.size());
        form.nodes.push_back(m);
      }
      int a = 0;
      for (; a < d; ++a) {
        if (++m[a] <= box.hi[a]) break;
        m[a] = box.lo[a];
      }
      if (a == d) break;
    }
  }

  const int N = form.size();
  form.anchor = Eigen::VectorXd::Zero(N);
  form.potential.resize(N);
  form.boundary = Eigen::VectorXd::Zero(N);
  form.mass.resize(N);
  for (int i = 0; i < N; ++i) {
    const auto& m = form.nodes[i];
    const std::size_t x = grid.index(m);
    const double frac = dir ? 1.0 : cell_fraction(box, m, d);
    form.potential[i] = frac * co.potential(x);
    form.mass[i] = frac * co.mass(x);
    if (!(form.mass[i] > 0.0) || !std::isfinite(form.mass[i])) throw ParameterError("mass must be finite and positive");
    for (int a = 0; a < d; ++a)
      for (int s : {1, -1}) {
        std::array<int, 3> y = m;
        y[a] += s;
        if (!box.contains(y, d)) continue;
        const int j = local[local_index(y)];
        if (j >= 0 && s < 0) continue;  // counted from the lower end
        const double w = co.edge(x, grid.index(y)) * (dir ? 1.0 : cell_fraction(box, m, d, a));
        if (j >= 0) form.edges.push_back({i, j, w});
        else form.anchor[i] += w;
      }
  }
  return form;
}

}  // namespace

Eigen::SparseMatrix<double> AssembledForm::stiffness() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * edges.size() + nodes.size());
  Eigen::VectorXd diag = anchor;
  for (const Edge& e : edges) {
    t.emplace_back(e.i, e.j, -e.w);
    t.emplace_back(e.j, e.i, -e.w);
    diag[e.i] += e.w;
    diag[e.j] += e.w;
  }
  for (int i = 0; i < size(); ++i) t.emplace_back(i, i, diag[i]);
  Eigen::SparseMatrix<double> a(size(), size());
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

Eigen::SparseMatrix<double> AssembledForm::matrix() const {
  Eigen::SparseMatrix<double> a = stiffness();
  for (int i = 0; i < size(); ++i) a.coeffRef(i, i) += potential[i] + boundary[i];
  return a;
}

double AssembledForm::energy(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  double e = 0.0;
  for (const Edge& ed : edges) e += ed.w * (u[ed.i] - u[ed.j]) * (v[ed.i] - v[ed.j]);
  for (int i = 0; i < size(); ++i) e += (anchor[i] + potential[i] + boundary[i]) * u[i] * v[i];
  return e;
}

double AssembledForm::mass_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  return (u.array() * mass.array() * v.array()).sum();
}

Eigen::VectorXd AssembledForm::gather(const Field& f) const {
  if (!(f.grid() == grid)) throw GeometryError("field grid differs from the form grid");
  Eigen::VectorXd u(size());
  for (int i = 0; i < size(); ++i) u[i] = f[grid.index(nodes[i])];
  return u;
}

Field AssembledForm::scatter(const Eigen::VectorXd& u) const {
  Field f(grid);
  for (int i = 0; i < size(); ++i) f[grid.index(nodes[i])] = u[i];
  return f;
}

AssembledForm AssembledForm::shifted(double c) const {
  AssembledForm out = *this;
  out.potential += c * mass;
  return out;
}

AssembledForm assemble_direct(const Field& xi, double c, Boundary bc, const Box& box) {
  const double h2 = xi.grid().spacing() * xi.grid().spacing();
  Coefficients co;
  co.edge = [&](std::size_t, std::size_t) { return 1.0 / h2; };
  co.potential = [&](std::size_t x) { return -xi[x] + c; };
  co.mass = [](std::size_t) { return 1.0; };
  return assemble(xi.grid(), box, bc, co);
}

AssembledForm assemble_transformed(const Field& W, const Field& Y, Boundary bc, const Box& box,
                                   const std::optional<Field>& flux) {
  const Grid& g = W.grid();
  if (!(Y.grid() == g) || (flux && !(flux->grid() == g))) throw GeometryError("W, Y and flux must share a grid");
  for (double w : W.values())
    if (!std::isfinite(w)) throw ParameterError("W has non-finite values");
  if (flux && bc != Boundary::neumann) throw ParameterError("the boundary functional applies to Neumann forms only");
  const double h = g.spacing();
  Coefficients co;
  co.edge = [&](std::size_t x, std::size_t y) { return std::exp(W[x] + W[y]) / (h * h); };
  co.potential = [&](std::size_t x) { return Y[x]; };
  co.mass = [&](std::size_t x) { return std::exp(2.0 * W[x]); };
  AssembledForm form = assemble(g, box, bc, co);
  if (flux) {
    std::vector<int> lookup(g.size(), -1);
    for (int i = 0; i < form.size(); ++i) lookup[g.index(form.nodes[i])] = i;
    const double cell = g.cell_volume();
    for (const BoundaryNode& b : boundary_quadrature(g, box)) {
      std::array<int, 3> out = b.m, in = b.m;
      out[b.axis] += b.sign;
      in[b.axis] -= b.sign;
      const double dnu = ((*flux)[g.index(out)] - (*flux)[g.index(in)]) / (2.0 * h);
      const std::size_t x = g.index(b.m);
      form.boundary[lookup[x]] += b.weight / cell * std::exp(2.0 * W[x]) * dnu;
    }
  }
  return form;
}

void export_form(const std::string& stem, const AssembledForm& form) {
  const Eigen::SparseMatrix<double> a = form.matrix();
  nlohmann::ordered_json header;
  header["bc"] = to_string(form.bc);
  header["d"] = form.grid.dim();
  header["n"] = form.grid.n();
  header["L"] = form.grid.side();
  header["box_lo"] = std::vector<int>(form.box.lo.begin(), form.box.lo.begin() + form.grid.dim());
  header["box_hi"] = std::vector<int>(form.box.hi.begin(), form.box.hi.begin() + form.grid.dim());
  header["unknowns"] = form.size();
  header["nnz"] = a.nonZeros();
  header["operator"] = stem + ".A.coo";
  header["mass"] = stem + ".M.coo";
  std::ofstream(stem + ".json") << header.dump(2) << '\n';

  std::ofstream os(stem + ".A.coo");
  os << std::setprecision(17);
  // Symmetric storage: column k of the column-major matrix is row k.
  for (int k = 0; k < a.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) os << k << ' ' << it.row() << ' ' << it.value() << '\n';
  std::ofstream ms(stem + ".M.coo");
  ms << std::setprecision(17);
  for (int i = 0; i < form.size(); ++i) ms << i << ' ' << i << ' ' << form.mass[i] << '\n';
  if (!os || !ms) throw Error("cannot write matrix export " + stem);
}

}  // namespace anderson
