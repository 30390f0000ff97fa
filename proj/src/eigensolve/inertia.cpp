#include "anderson/inertia.hpp"

#include <cblas.h>
#include <lapacke.h>

#include <algorithm>
#include <numeric>

#include "anderson/error.hpp"

namespace anderson {

InertiaCounter::InertiaCounter(Eigen::SparseMatrix<double> a, Eigen::VectorXd mass,
                               const std::vector<std::array<int, 3>>& coords, int dim, int leaf_size)
    : a_(std::move(a)), mass_(std::move(mass)), dim_(dim), leaf_size_(std::max(leaf_size, 1)) {
  const int n = static_cast<int>(mass_.size());
  if (a_.rows() != n || a_.cols() != n || static_cast<int>(coords.size()) != n)
    throw ParameterError("inertia counter: inconsistent operand sizes");
  a_.makeCompressed();
  if (n == 0) return;
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  build(std::move(all), coords);
  analyse();
}

int InertiaCounter::build(std::vector<int> vars, const std::vector<std::array<int, 3>>& coords) {
  const int begin = static_cast<int>(nodes_.size());
  Node node;
  if (static_cast<int>(vars.size()) <= leaf_size_) {
    node.elim = std::move(vars);
  } else {
    std::array<int, 3> lo{}, hi{};
    lo.fill(1 << 30);
    hi.fill(-(1 << 30));
    for (int v : vars)
      for (int a = 0; a < dim_; ++a) {
        lo[a] = std::min(lo[a], coords[v][a]);
        hi[a] = std::max(hi[a], coords[v][a]);
      }
    int axis = 0;
    for (int a = 1; a < dim_; ++a)
      if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
    const int mid = lo[axis] + (hi[axis] - lo[axis]) / 2;
    std::vector<int> left, right;
    for (int v : vars) {
      const int c = coords[v][axis];
      if (c < mid) left.push_back(v);
      else if (c > mid) right.push_back(v);
      else node.elim.push_back(v);
    }
    vars.clear();
    vars.shrink_to_fit();
    if (!left.empty()) node.children.push_back(build(std::move(left), coords));
    if (!right.empty()) node.children.push_back(build(std::move(right), coords));
  }
  node.subtree_begin = begin;
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

void InertiaCounter::analyse() {
  const int n = size();
  pos_.assign(n, -1);
  owner_.assign(n, -1);
  int next = 0;
  for (int id = 0; id < static_cast<int>(nodes_.size()); ++id)
    for (int v : nodes_[id].elim) {
      pos_[v] = next++;
      owner_[v] = id;
    }

  auto in_subtree = [&](int node, int root) {
    return node >= nodes_[root].subtree_begin && node <= root;
  };

  std::vector<int> mark(n, -1);
  for (int id = 0; id < static_cast<int>(nodes_.size()); ++id) {
    Node& node = nodes_[id];
    const int last = node.elim.empty() ? -1 : pos_[node.elim.back()];
    const int first = node.elim.empty() ? next : pos_[node.elim.front()];
    std::vector<int> upd;
    auto add = [&](int v) {
      if (pos_[v] > last && mark[v] != id) {
        mark[v] = id;
        upd.push_back(v);
      }
    };
    for (int c : node.children)
      for (int v : nodes_[c].update) add(v);
    for (int v : node.elim) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(a_, v); it; ++it) {
        const int w = static_cast<int>(it.row());
        if (pos_[w] < first && !in_subtree(owner_[w], id))
          throw GeometryError("inertia counter: coupling across separator");
        if (pos_[w] > last && !in_subtree(id, owner_[w]))
          throw GeometryError("inertia counter: coupling across separator");
        add(w);
      }
    }
    std::sort(upd.begin(), upd.end(), [&](int x, int y) { return pos_[x] < pos_[y]; });
    node.update = std::move(upd);

    // Slots of every child update unknown inside this front.
    for (int c : node.children) {
      std::vector<int> map;
      map.reserve(nodes_[c].update.size());
      for (int v : nodes_[c].update) {
        int s = -1;
        if (pos_[v] <= last) {
          s = pos_[v] - first;
        } else {
          auto it = std::lower_bound(node.update.begin(), node.update.end(), v,
                                     [&](int x, int y) { return pos_[x] < pos_[y]; });
          s = static_cast<int>(node.elim.size() + (it - node.update.begin()));
        }
        map.push_back(s);
      }
      node.child_map.push_back(std::move(map));
    }
  }
}

int InertiaCounter::max_front() const {
  std::size_t m = 0;
  for (const Node& node : nodes_) m = std::max(m, node.elim.size() + node.update.size());
  return static_cast<int>(m);
}

Inertia InertiaCounter::inertia(double sigma) const {
  Inertia result;
  const int n = size();
  if (n == 0) return result;
  // Only lower triangles are formed: slots follow elimination order, so every
  // contribution with row position >= column position lands below the diagonal.
  std::vector<std::vector<double>> updates(nodes_.size());
  std::vector<int> local(n, -1);
  std::vector<double> front, z, e;
  std::vector<lapack_int> ipiv;

  for (int id = 0; id < static_cast<int>(nodes_.size()); ++id) {
    const Node& node = nodes_[id];
    const int ne = static_cast<int>(node.elim.size());
    const int nu = static_cast<int>(node.update.size());
    const int nf = ne + nu;
    front.assign(static_cast<std::size_t>(nf) * nf, 0.0);
    auto at = [&](int r, int c) -> double& { return front[static_cast<std::size_t>(c) * nf + r]; };
    for (int i = 0; i < ne; ++i) local[node.elim[i]] = i;
    for (int i = 0; i < nu; ++i) local[node.update[i]] = ne + i;

    for (int i = 0; i < ne; ++i) {
      const int v = node.elim[i];
      for (Eigen::SparseMatrix<double>::InnerIterator it(a_, v); it; ++it) {
        const int w = static_cast<int>(it.row());
        if (pos_[w] >= pos_[v]) at(local[w], i) += it.value();
      }
      at(i, i) -= sigma * mass_[v];
    }
    for (std::size_t c = 0; c < node.children.size(); ++c) {
      const auto& map = node.child_map[c];
      std::vector<double>& s = updates[node.children[c]];
      const int m = static_cast<int>(map.size());
      for (int q = 0; q < m; ++q) {
        double* col = &at(0, map[q]);
        const double* src = s.data() + static_cast<std::size_t>(q) * m;
        for (int p = q; p < m; ++p) col[map[p]] += src[p];
      }
      std::vector<double>().swap(s);
    }

    if (ne > 0) {
      e.assign(ne, 0.0);
      ipiv.assign(ne, 0);
      const lapack_int info = LAPACKE_dsytrf_rk(LAPACK_COL_MAJOR, 'L', ne, front.data(), nf, e.data(), ipiv.data());
      if (info < 0) throw Error("dsytrf_rk rejected its arguments");
      for (int i = 0; i < ne; ++i) {
        if (ipiv[i] < 0 && i + 1 < ne) {
          const double a = at(i, i), b = e[i], c = at(i + 1, i + 1);
          const double det = a * c - b * b;
          if (det < 0.0) {
            ++result.negative;
            ++result.positive;
          } else if (det > 0.0) {
            (a + c > 0.0 ? result.positive : result.negative) += 2;
          } else {
            ++result.zero;
            (a + c > 0.0 ? result.positive : result.negative) += 1;
          }
          ++i;
        } else {
          const double d = at(i, i);
          if (d < 0.0) ++result.negative;
          else if (d > 0.0) ++result.positive;
          else ++result.zero;
        }
      }
    }

    if (nu > 0) {
      if (ne > 0) {
        // F11 = P L D L^T P^T gives F22 - F21 F11^{-1} F21^T = F22 - W D^{-1} W^T
        // with W = F21 P L^{-T}, formed in place.
        double* w = &at(ne, 0);
        for (int k = 0; k < ne; ++k) {
          const int kp = std::abs(ipiv[k]) - 1;
          if (kp != k) std::swap_ranges(w + static_cast<std::size_t>(k) * nf, w + static_cast<std::size_t>(k) * nf + nu,
                                        w + static_cast<std::size_t>(kp) * nf);
        }
        cblas_dtrsm(CblasColMajor, CblasRight, CblasLower, CblasTrans, CblasUnit, nu, ne, 1.0, front.data(), nf, w,
                    nf);
        z.resize(static_cast<std::size_t>(nu) * ne);
        for (int i = 0; i < ne; ++i) {
          const double* w0 = w + static_cast<std::size_t>(i) * nf;
          double* z0 = z.data() + static_cast<std::size_t>(i) * nu;
          if (ipiv[i] < 0 && i + 1 < ne) {
            const double a = at(i, i), b = e[i], c = at(i + 1, i + 1);
            const double det = a * c - b * b;
            const double* w1 = w0 + nf;
            double* z1 = z0 + nu;
            for (int r = 0; r < nu; ++r) {
              z0[r] = (c * w0[r] - b * w1[r]) / det;
              z1[r] = (a * w1[r] - b * w0[r]) / det;
            }
            ++i;
          } else {
            const double inv = 1.0 / at(i, i);
            for (int r = 0; r < nu; ++r) z0[r] = w0[r] * inv;
          }
        }
        // Lower triangle of F22 - Z W^T, one column panel at a time.
        constexpr int panel = 128;
        for (int jb = 0; jb < nu; jb += panel) {
          const int bw = std::min(panel, nu - jb);
          cblas_dgemm(CblasColMajor, CblasNoTrans, CblasTrans, nu - jb, bw, ne, -1.0, z.data() + jb, nu, w + jb, nf,
                      1.0, &at(ne + jb, ne + jb), nf);
        }
      }
      std::vector<double>& s = updates[id];
      s.resize(static_cast<std::size_t>(nu) * nu);
      for (int c = 0; c < nu; ++c)
        std::copy(&at(ne + c, ne + c), &at(ne, ne + c) + nu, s.data() + static_cast<std::size_t>(c) * nu + c);
    }
    for (int v : node.elim) local[v] = -1;
    for (int v : node.update) local[v] = -1;
  }
  return result;
}

}  // namespace anderson
