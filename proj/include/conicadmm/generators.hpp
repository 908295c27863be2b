#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "conicadmm/problem.hpp"

namespace conicadmm {

// Undirected weighted graph; vertices are 0-based internally, 1-based in
// files.  No self loops, no duplicate edges, endpoints stored as u < v.
struct GraphEdge {
  int u = 0;
  int v = 0;
  double w = 1.0;
};

struct Graph {
  int n = 0;
  std::vector<GraphEdge> edges;

  void validate() const;  // throws PreconditionError on a malformed graph
};

// Erdos-Renyi style graph: each pair becomes an edge of weight one with the
// given probability.
Graph random_graph(Rng& rng, int n, double density);

// Text format: a header line "n m", then m lines "i j [w]" with 1-based
// endpoints; the weight defaults to one.  Throws ParseError with a line
// number on malformed input.
Graph read_graph(std::istream& in);
Graph read_graph_file(const std::string& path);

// A generated problem together with an independent combinatorial reference
// value when the instance is small enough to enumerate.  The reference
// bounds the relaxation value: lower bounds it for maximization references
// (stable set), upper bounds it for minimization ones (binary quadratic,
// assignment).
struct GeneratedInstance {
  ConicProblem problem;
  std::optional<double> reference;
  std::string reference_kind;
};

// Binary quadratic relaxation over Y = [X, x; x^T, 1] of order n:
// minimize x^T Q x / 2 + c^T x over x in {0,1}^{n-1}, relaxed with
// diag-equals-last-column rows, a unit corner row, and an entrywise
// nonnegative pattern.  Q and c have integer entries uniform in [-10, 10].
void biq_data(std::uint64_t seed, int nb, Matrix& Q, Vector& c);
ConicProblem biq_problem(const Matrix& Q, const Vector& c);
double biq_optimum(const Matrix& Q, const Vector& c);  // enumerates 2^nb
GeneratedInstance gen_biq(std::uint64_t seed, int n);

// The same relaxation plus three valid cuts per binary pair (i, j):
// x_i >= Y_ij, x_j >= Y_ij, Y_ij - x_i - x_j >= -1, giving
// m_I = 3 (n-1)(n-2) / 2 inequality rows.
GeneratedInstance gen_biq_extended(std::uint64_t seed, int n);

// Stable-set relaxation: maximize <ee^T, X> subject to unit trace, X_ij = 0
// across edges, psd, entrywise nonnegative.  Stored negated (obj_sign = -1).
ConicProblem theta_plus_problem(const Graph& g);
int stable_set_number(const Graph& g);  // exact branch and bound, n <= 40
GeneratedInstance gen_theta_plus(const Graph& g);
GeneratedInstance gen_theta_plus(std::uint64_t seed, int n, double density);

// Assignment relaxation over Y in S^{n^2} with cost B (x) A (Kronecker
// product): block trace sums pin the identity, per-block traces pin
// delta_ij, per-block entry sums pin one.  Two dependent rows of the printed
// family are dropped so the row set stays surjective.
ConicProblem qap_problem(const Matrix& A, const Matrix& B);
double qap_optimum(const Matrix& A, const Matrix& B);  // enumerates n!
GeneratedInstance gen_qap(std::uint64_t seed, int n);

// Clustering relaxation: minimize <W, I - X> with row sums one and trace K;
// W_ij = exp(-||p_i - p_j||^2) on the given point rows.
ConicProblem rcp_problem(const Matrix& points, int K);
GeneratedInstance gen_rcp(std::uint64_t seed, int n, int K);

// Frequency assignment relaxation: maximize
// <((k-1)/(2k)) L - (1/2) Diag(We), X> with unit diagonal, X_ij pinned to
// -1/(k-1) on the edge subset u_edges and bounded below by it on the other
// edges.  u_edges holds indices into g.edges.  Stored negated.
ConicProblem fap_problem(const Graph& g, const std::vector<int>& u_edges, int k);
GeneratedInstance gen_fap(std::uint64_t seed, int n, double density, int k);

}  // namespace conicadmm
