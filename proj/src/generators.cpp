#include "conicadmm/generators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>

namespace conicadmm {

namespace {

std::string seed_tag(std::uint64_t seed, int n) {
  return "s" + std::to_string(seed) + "-n" + std::to_string(n);
}

[[noreturn]] void parse_fail(int lineno, const std::string& what) {
  throw ParseError("line " + std::to_string(lineno) + ": " + what);
}

}  // namespace

void Graph::validate() const {
  if (n < 0) throw PreconditionError("graph has a negative vertex count");
  std::set<std::pair<int, int>> seen;
  for (const GraphEdge& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) {
      throw PreconditionError("graph edge endpoint out of range");
    }
    if (e.u == e.v) throw PreconditionError("graph has a self loop");
    if (e.u > e.v) throw PreconditionError("graph edge endpoints not ordered");
    if (!seen.emplace(e.u, e.v).second) {
      throw PreconditionError("graph has a duplicate edge");
    }
  }
}

Graph random_graph(Rng& rng, int n, double density) {
  if (n < 0) throw PreconditionError("graph has a negative vertex count");
  Graph g;
  g.n = n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.uniform01() < density) g.edges.push_back({i, j, 1.0});
    }
  }
  return g;
}

Graph read_graph(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next_line = [&](std::string& out) {
    while (std::getline(in, line)) {
      ++lineno;
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      out = line;
      return true;
    }
    return false;
  };

  std::string header;
  if (!next_line(header)) throw ParseError("empty graph file");
  std::istringstream hs(header);
  int n = 0, m = 0;
  std::string extra;
  if (!(hs >> n >> m)) parse_fail(lineno, "expected header 'n m'");
  if (hs >> extra) parse_fail(lineno, "unexpected trailing tokens in header");
  if (n < 0 || m < 0) parse_fail(lineno, "negative counts in header");

  Graph g;
  g.n = n;
  std::set<std::pair<int, int>> seen;
  for (int e = 0; e < m; ++e) {
    std::string body;
    if (!next_line(body)) {
      throw ParseError("unexpected end of input: expected " + std::to_string(m) +
                       " edge lines");
    }
    std::istringstream es(body);
    int i = 0, j = 0;
    double w = 1.0;
    if (!(es >> i >> j)) parse_fail(lineno, "expected edge 'i j [w]'");
    if (!(es >> w)) w = 1.0;
    es.clear();
    if (es >> extra) parse_fail(lineno, "unexpected trailing tokens on edge line");
    if (i < 1 || j < 1 || i > n || j > n) parse_fail(lineno, "edge endpoint out of range");
    if (i == j) parse_fail(lineno, "self loop");
    GraphEdge edge{std::min(i, j) - 1, std::max(i, j) - 1, w};
    if (!seen.emplace(edge.u, edge.v).second) parse_fail(lineno, "duplicate edge");
    g.edges.push_back(edge);
  }
  std::string tail;
  if (next_line(tail)) parse_fail(lineno, "trailing content after the last edge");
  return g;
}

Graph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file '" + path + "'");
  return read_graph(in);
}

void biq_data(std::uint64_t seed, int nb, Matrix& Q, Vector& c) {
  Rng rng(seed);
  Q = Matrix::Zero(nb, nb);
  for (int i = 0; i < nb; ++i) {
    for (int j = i; j < nb; ++j) {
      Q(i, j) = static_cast<double>(rng.uniform_int(-10, 10));
      Q(j, i) = Q(i, j);
    }
  }
  c = Vector::Zero(nb);
  for (int i = 0; i < nb; ++i) c[i] = static_cast<double>(rng.uniform_int(-10, 10));
}

ConicProblem biq_problem(const Matrix& Q, const Vector& c) {
  const int nb = static_cast<int>(Q.rows());
  if (Q.cols() != nb || c.size() != nb || nb < 1) {
    throw DimensionMismatch("binary quadratic data sizes are inconsistent");
  }
  const int n = nb + 1;

  ConicProblem p(n, n);
  for (int i = 0; i < nb; ++i) {
    p.eq.add_entry(i, i, i, 1.0);
    p.eq.add_entry(i, i, nb, -0.5);
  }
  p.eq.add_entry(nb, nb, nb, 1.0);
  p.eq.finalize();
  p.ineq.finalize();
  p.b_eq = Vector::Zero(n);
  p.b_eq[nb] = 1.0;

  Matrix C = Matrix::Zero(n, n);
  C.topLeftCorner(nb, nb) = 0.25 * (Q + Q.transpose());
  for (int i = 0; i < nb; ++i) {
    C(i, nb) = 0.5 * c[i];
    C(nb, i) = C(i, nb);
  }
  p.cost = svec(C);
  p.pattern = PolyhedralPattern(n, EntryKind::NonNeg);
  return p;
}

double biq_optimum(const Matrix& Q, const Vector& c) {
  const int nb = static_cast<int>(Q.rows());
  if (nb > 24) throw PreconditionError("too many binary variables to enumerate");
  // Gray-code walk: one bit flips per step, so the objective and the partial
  // sums t[j] = sum_{i in x} Q_ij update in O(nb).
  Vector t = Vector::Zero(nb);
  double value = 0.0, best = 0.0;
  std::uint32_t prev_gray = 0;
  const std::uint64_t total = std::uint64_t{1} << nb;
  for (std::uint64_t i = 1; i < total; ++i) {
    const auto gray = static_cast<std::uint32_t>(i ^ (i >> 1));
    const std::uint32_t changed = gray ^ prev_gray;
    const int b = std::countr_zero(changed);
    if (gray & changed) {
      value += t[b] + 0.5 * Q(b, b) + c[b];
      for (int j = 0; j < nb; ++j) t[j] += Q(b, j);
    } else {
      for (int j = 0; j < nb; ++j) t[j] -= Q(b, j);
      value -= t[b] + 0.5 * Q(b, b) + c[b];
    }
    best = std::min(best, value);
    prev_gray = gray;
  }
  return best;
}

GeneratedInstance gen_biq(std::uint64_t seed, int n) {
  if (n < 2 || n > 40) throw PreconditionError("order out of range for this class");
  Matrix Q;
  Vector c;
  biq_data(seed, n - 1, Q, c);
  GeneratedInstance out{biq_problem(Q, c), std::nullopt, ""};
  out.problem.id = "biq-" + seed_tag(seed, n);
  if (n - 1 <= 20) {
    out.reference = biq_optimum(Q, c);
    out.reference_kind = "binary-enumeration";
  }
  return out;
}

GeneratedInstance gen_biq_extended(std::uint64_t seed, int n) {
  if (n < 2 || n > 40) throw PreconditionError("order out of range for this class");
  Matrix Q;
  Vector c;
  biq_data(seed, n - 1, Q, c);
  ConicProblem plain = biq_problem(Q, c);

  const int nb = n - 1;
  const int mI = 3 * nb * (nb - 1) / 2;
  ConicProblem p(n, n, mI);
  p.eq = plain.eq;
  p.b_eq = plain.b_eq;
  p.cost = plain.cost;
  p.pattern = plain.pattern;

  int row = 0;
  Vector bi = Vector::Zero(mI);
  for (int i = 0; i < nb; ++i) {
    for (int j = i + 1; j < nb; ++j) {
      p.ineq.add_entry(row, i, nb, 0.5);
      p.ineq.add_entry(row, i, j, -0.5);
      ++row;
      p.ineq.add_entry(row, j, nb, 0.5);
      p.ineq.add_entry(row, i, j, -0.5);
      ++row;
      p.ineq.add_entry(row, i, j, 0.5);
      p.ineq.add_entry(row, i, nb, -0.5);
      p.ineq.add_entry(row, j, nb, -0.5);
      bi[row] = -1.0;
      ++row;
    }
  }
  p.ineq.finalize();
  p.b_ineq = bi;

  GeneratedInstance out{std::move(p), std::nullopt, ""};
  out.problem.id = "biqext-" + seed_tag(seed, n);
  if (nb <= 20) {
    out.reference = biq_optimum(Q, c);
    out.reference_kind = "binary-enumeration";
  }
  return out;
}

ConicProblem theta_plus_problem(const Graph& g) {
  g.validate();
  if (g.n < 1) throw PreconditionError("graph must have at least one vertex");
  const int n = g.n;
  const int mE = static_cast<int>(g.edges.size()) + 1;

  ConicProblem p(n, mE);
  int row = 0;
  for (const GraphEdge& e : g.edges) {
    p.eq.add_entry(row, e.u, e.v, 1.0);
    ++row;
  }
  for (int i = 0; i < n; ++i) p.eq.add_entry(row, i, i, 1.0);
  p.eq.finalize();
  p.ineq.finalize();
  p.b_eq = Vector::Zero(mE);
  p.b_eq[row] = 1.0;

  p.cost = svec(Matrix(-Matrix::Ones(n, n)));
  p.obj_sign = -1.0;
  p.pattern = PolyhedralPattern(n, EntryKind::NonNeg);
  return p;
}

namespace {

void stable_set_search(const std::vector<std::uint64_t>& adj, std::uint64_t cand,
                       int size, int& best) {
  best = std::max(best, size);
  while (cand != 0) {
    if (size + std::popcount(cand) <= best) return;
    const int v = std::countr_zero(cand);
    cand &= cand - 1;
    stable_set_search(adj, cand & ~adj[static_cast<size_t>(v)], size + 1, best);
  }
}

}  // namespace

int stable_set_number(const Graph& g) {
  g.validate();
  if (g.n > 40) throw PreconditionError("graph too large for exact enumeration");
  std::vector<std::uint64_t> adj(static_cast<size_t>(g.n), 0);
  for (const GraphEdge& e : g.edges) {
    adj[static_cast<size_t>(e.u)] |= std::uint64_t{1} << e.v;
    adj[static_cast<size_t>(e.v)] |= std::uint64_t{1} << e.u;
  }
  const std::uint64_t all = (std::uint64_t{1} << g.n) - 1;
  int best = 0;
  stable_set_search(adj, all, 0, best);
  return best;
}

GeneratedInstance gen_theta_plus(const Graph& g) {
  GeneratedInstance out{theta_plus_problem(g), std::nullopt, ""};
  if (g.n <= 40) {
    out.reference = static_cast<double>(stable_set_number(g));
    out.reference_kind = "stable-set-enumeration";
  }
  return out;
}

GeneratedInstance gen_theta_plus(std::uint64_t seed, int n, double density) {
  Rng rng(seed);
  Graph g = random_graph(rng, n, density);
  GeneratedInstance out = gen_theta_plus(g);
  out.problem.id = "theta-" + seed_tag(seed, n);
  return out;
}

ConicProblem qap_problem(const Matrix& A, const Matrix& B) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.rows() != n || B.cols() != n || n < 2) {
    throw DimensionMismatch("assignment data sizes are inconsistent");
  }
  if (n > 6) throw PreconditionError("order out of range for this class");
  auto asymmetry = [](const Matrix& M) {
    return (M - M.transpose()).cwiseAbs().maxCoeff();
  };
  if (asymmetry(A) > 0.0 || asymmetry(B) > 0.0) {
    throw PreconditionError("assignment data must be symmetric");
  }

  const int N = n * n;
  const int mE = 3 * n * (n + 1) / 2 - 2;
  ConicProblem p(N, mE);
  int row = 0;
  // Block trace sums pin the identity.
  for (int k = 0; k < n; ++k) {
    for (int l = k; l < n; ++l) {
      for (int i = 0; i < n; ++i) {
        p.eq.add_entry(row, i * n + k, i * n + l, k == l ? 1.0 : 0.5);
      }
      p.b_eq[row] = (k == l) ? 1.0 : 0.0;
      ++row;
    }
  }
  // Per-block traces pin delta_ij; the (n, n) row is a combination of the
  // block trace rows and is dropped to keep the rows independent.
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (i == n - 1 && j == n - 1) continue;
      for (int k = 0; k < n; ++k) {
        p.eq.add_entry(row, i * n + k, j * n + k, i == j ? 1.0 : 0.5);
      }
      p.b_eq[row] = (i == j) ? 1.0 : 0.0;
      ++row;
    }
  }
  // Per-block entry sums pin one; the (n, n) row is likewise dependent.
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (i == n - 1 && j == n - 1) continue;
      if (i == j) {
        for (int k = 0; k < n; ++k) {
          for (int l = k; l < n; ++l) p.eq.add_entry(row, i * n + k, i * n + l, 1.0);
        }
      } else {
        for (int k = 0; k < n; ++k) {
          for (int l = 0; l < n; ++l) p.eq.add_entry(row, i * n + k, j * n + l, 0.5);
        }
      }
      p.b_eq[row] = 1.0;
      ++row;
    }
  }
  p.eq.finalize();
  p.ineq.finalize();

  Matrix C(N, N);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      C.block(i * n, j * n, n, n) = B(i, j) * A;
    }
  }
  p.cost = svec(C);
  p.pattern = PolyhedralPattern(N, EntryKind::NonNeg);
  return p;
}

double qap_optimum(const Matrix& A, const Matrix& B) {
  const int n = static_cast<int>(A.rows());
  if (n > 8) throw PreconditionError("too many permutations to enumerate");
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        v += B(i, j) * A(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
      }
    }
    best = std::min(best, v);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

GeneratedInstance gen_qap(std::uint64_t seed, int n) {
  if (n < 2 || n > 6) throw PreconditionError("order out of range for this class");
  Rng rng(seed);
  Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      A(i, j) = static_cast<double>(rng.uniform_int(0, 10));
      A(j, i) = A(i, j);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      B(i, j) = static_cast<double>(rng.uniform_int(0, 10));
      B(j, i) = B(i, j);
    }
  }
  GeneratedInstance out{qap_problem(A, B), qap_optimum(A, B),
                        "permutation-enumeration"};
  out.problem.id = "qap-" + seed_tag(seed, n);
  return out;
}

ConicProblem rcp_problem(const Matrix& points, int K) {
  const int n = static_cast<int>(points.rows());
  if (n < 2) throw PreconditionError("at least two points required");
  if (K < 1 || K > n) throw PreconditionError("cluster count outside [1, n]");

  Matrix W(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      W(i, j) = std::exp(-(points.row(i) - points.row(j)).squaredNorm());
    }
  }

  ConicProblem p(n, n + 1);
  for (int i = 0; i < n; ++i) {
    p.eq.add_entry(i, i, i, 1.0);
    for (int j = 0; j < n; ++j) {
      if (j != i) p.eq.add_entry(i, std::min(i, j), std::max(i, j), 0.5);
    }
    p.b_eq[i] = 1.0;
  }
  for (int i = 0; i < n; ++i) p.eq.add_entry(n, i, i, 1.0);
  p.b_eq[n] = static_cast<double>(K);
  p.eq.finalize();
  p.ineq.finalize();

  p.cost = svec(Matrix(-W));
  p.obj_offset = W.trace();
  p.pattern = PolyhedralPattern(n, EntryKind::NonNeg);
  return p;
}

GeneratedInstance gen_rcp(std::uint64_t seed, int n, int K) {
  if (K < 1 || K > std::max(1, n)) {
    throw PreconditionError("cluster count outside [1, n]");
  }
  Rng rng(seed);
  Matrix points(n, 2);
  for (int i = 0; i < n; ++i) {
    const int blob = i % K;
    points(i, 0) = 4.0 * (blob % 3) + rng.normal();
    points(i, 1) = 4.0 * (blob / 3) + rng.normal();
  }
  GeneratedInstance out{rcp_problem(points, K), std::nullopt, ""};
  out.problem.id = "rcp-" + seed_tag(seed, n) + "-k" + std::to_string(K);
  return out;
}

ConicProblem fap_problem(const Graph& g, const std::vector<int>& u_edges, int k) {
  g.validate();
  if (g.n < 1) throw PreconditionError("graph must have at least one vertex");
  if (k < 2) throw PreconditionError("at least two frequency classes required");
  std::set<int> u_set;
  for (int idx : u_edges) {
    if (idx < 0 || idx >= static_cast<int>(g.edges.size())) {
      throw PreconditionError("edge subset index out of range");
    }
    if (!u_set.insert(idx).second) {
      throw PreconditionError("edge subset index repeated");
    }
  }

  const int n = g.n;
  Matrix W = Matrix::Zero(n, n);
  for (const GraphEdge& e : g.edges) {
    W(e.u, e.v) = e.w;
    W(e.v, e.u) = e.w;
  }
  const Vector degrees = W.rowwise().sum();
  const Matrix L = Matrix(degrees.asDiagonal()) - W;
  const double kd = static_cast<double>(k);
  const Matrix Cmax =
      ((kd - 1.0) / (2.0 * kd)) * L - 0.5 * Matrix(degrees.asDiagonal());

  ConicProblem p(n, n);
  for (int i = 0; i < n; ++i) {
    p.eq.add_entry(i, i, i, 1.0);
    p.b_eq[i] = 1.0;
  }
  p.eq.finalize();
  p.ineq.finalize();

  p.cost = svec(Matrix(-Cmax));
  p.obj_sign = -1.0;

  PolyhedralPattern pat(n, EntryKind::Free);
  Matrix M = Matrix::Zero(n, n);
  for (int idx = 0; idx < static_cast<int>(g.edges.size()); ++idx) {
    const GraphEdge& e = g.edges[static_cast<size_t>(idx)];
    pat.set_kind(e.u, e.v, u_set.count(idx) ? EntryKind::Zero : EntryKind::NonNeg);
    M(e.u, e.v) = -1.0 / (kd - 1.0);
    M(e.v, e.u) = M(e.u, e.v);
  }
  pat.set_shift(std::move(M));
  p.pattern = std::move(pat);
  return p;
}

GeneratedInstance gen_fap(std::uint64_t seed, int n, double density, int k) {
  Rng rng(seed);
  Graph g = random_graph(rng, n, density);
  for (GraphEdge& e : g.edges) {
    e.w = 0.1 * static_cast<double>(rng.uniform_int(1, 10));
  }
  std::vector<int> u_edges;
  for (int idx = 0; idx < static_cast<int>(g.edges.size()); ++idx) {
    if (rng.uniform01() < 0.3) u_edges.push_back(idx);
  }
  GeneratedInstance out{fap_problem(g, u_edges, k), std::nullopt, ""};
  out.problem.id = "fap-" + seed_tag(seed, n) + "-k" + std::to_string(k);
  return out;
}

}  // namespace conicadmm
