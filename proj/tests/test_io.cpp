#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "conicadmm/generators.hpp"
#include "conicadmm/io.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace conicadmm;

namespace {

ConicProblem parse_sdpa(const std::string& text) {
  std::istringstream in(text);
  return read_sdpa(in);
}

ConicProblem parse_native(const std::string& text) {
  std::istringstream in(text);
  return read_native(in);
}

std::string sdpa_text(const ConicProblem& p) {
  std::ostringstream out;
  write_sdpa(out, p);
  return out.str();
}

std::string native_text(const ConicProblem& p) {
  std::ostringstream out;
  write_native(out, p);
  return out.str();
}

// Message of the ParseError raised by `fn`, empty when nothing was thrown.
template <class F>
std::string parse_error_message(F&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// SDPA text with arbitrary double coefficients on a random sparsity set.
std::string random_sdpa_text(std::uint64_t seed) {
  Rng rng(seed);
  const int n = 2 + static_cast<int>(rng.uniform_int(0, 4));
  const int m = 1 + static_cast<int>(rng.uniform_int(0, 4));
  std::ostringstream out;
  out << "* synthetic instance " << seed << "\n";
  out << m << "\n1\n" << n << "\n";
  for (int k = 0; k < m; ++k) out << (k ? " " : "") << fmt17(rng.normal());
  out << "\n";
  for (int mat = 0; mat <= m; ++mat) {
    bool wrote = false;
    for (int i = 1; i <= n; ++i) {
      for (int j = i; j <= n; ++j) {
        if (rng.uniform01() < 0.5) continue;
        const double scale = std::pow(10.0, static_cast<double>(rng.uniform_int(-3, 3)));
        out << mat << " 1 " << i << " " << j << " " << fmt17(rng.normal() * scale) << "\n";
        wrote = true;
      }
    }
    if (!wrote && mat > 0) out << mat << " 1 1 1 1\n";
  }
  return out.str();
}

bool same_record(const RunRecord& a, const RunRecord& b) {
  return a.problem_id == b.problem_id && a.solver == b.solver && a.n == b.n &&
         a.m_eq == b.m_eq && a.m_ineq == b.m_ineq && a.tol == b.tol &&
         a.iterations == b.iterations && a.status == b.status && a.eta == b.eta &&
         a.eta_p == b.eta_p && a.eta_d == b.eta_d && a.eta_k == b.eta_k &&
         a.eta_ks == b.eta_ks && a.eta_pc == b.eta_pc && a.eta_pcs == b.eta_pcs &&
         a.eta_c1 == b.eta_c1 && a.eta_c2 == b.eta_c2 && a.eta_i == b.eta_i &&
         a.eta_is == b.eta_is && a.gap == b.gap &&
         a.primal_objective == b.primal_objective &&
         a.dual_objective == b.dual_objective && a.setup_seconds == b.setup_seconds &&
         a.solve_seconds == b.solve_seconds;
}

RunRecord sample_record(const std::string& problem, const std::string& solver,
                        RunStatus status, double metric_seconds, int iterations) {
  RunRecord r;
  r.problem_id = problem;
  r.solver = solver;
  r.n = 12;
  r.m_eq = 12;
  r.m_ineq = 0;
  r.tol = 1e-6;
  r.iterations = iterations;
  r.status = status;
  r.eta = 9.1e-7;
  r.eta_p = 1.0 / 3.0;
  r.eta_d = 1e-17;
  r.eta_k = 0.25;
  r.eta_ks = 0.0;
  r.eta_pc = 2e-8;
  r.eta_pcs = 3e-9;
  r.eta_c1 = 4e-7;
  r.eta_c2 = 5e-7;
  r.gap = -3.25e-8;
  r.primal_objective = -20.077640106243568;
  r.dual_objective = -20.077641068917332;
  r.setup_seconds = 0.0012;
  r.solve_seconds = metric_seconds;
  return r;
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) { std::remove(path.c_str()); }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("single-block file parses to the expected problem") {
  const std::string text = "1\n1\n2\n1.0\n0 1 1 1 1.0\n1 1 1 1 1.0\n";
  ConicProblem p = parse_sdpa(text);
  CHECK(p.n == 2);
  CHECK(p.m_eq() == 1);
  CHECK(p.m_ineq() == 0);
  CHECK(p.b_eq[0] == 1.0);
  Matrix E11 = Matrix::Zero(2, 2);
  E11(0, 0) = 1.0;
  CHECK((p.cost - svec(E11)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((p.eq.apply_matrix(E11) - Vector::Ones(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.pattern.all_free());

  const std::string commented = "* a comment line\n" + text;
  CHECK(identical(p, parse_sdpa(commented)));
  const std::string quoted = "\" another comment style\n" + text;
  CHECK(identical(p, parse_sdpa(quoted)));
}

TEST_CASE("single-block reader reports malformed input with line numbers") {
  auto msg = [](const std::string& text) {
    return parse_error_message([&] { parse_sdpa(text); });
  };
  CHECK(contains(msg("1\n2\n2 2\n1.0\n"), "multi-block"));
  CHECK(contains(msg("1\n2\n2 2\n1.0\n"), "line 2"));
  CHECK(contains(msg("1\n1\n-2\n1.0\n"), "diagonal blocks are not supported"));
  CHECK(contains(msg("1\n1\n0\n1.0\n"), "block size must be positive"));
  CHECK(contains(msg("x\n1\n2\n1.0\n"), "line 1"));
  CHECK(contains(msg("1\n1\n2\n1.0 2.0\n"), "expected 1 right-hand side values"));
  CHECK(contains(msg("2\n1\n2\n1.0\n"), "expected 2 right-hand side values"));
  CHECK(contains(msg("1\n1\n2\n1.0\n0 1 1 1\n"), "expected an entry"));
  CHECK(contains(msg("1\n1\n2\n1.0\n0 1 2 1 1.0\n"), "i <= j"));
  CHECK(contains(msg("1\n1\n2\n1.0\n0 2 1 1 1.0\n"), "block index"));
  CHECK(contains(msg("1\n1\n2\n1.0\n2 1 1 1 1.0\n"), "matrix index"));
  CHECK(contains(msg("1\n1\n2\n1.0\n0 1 1 3 1.0\n"), "out of range"));
  const std::string dup = "1\n1\n2\n1.0\n1 1 1 2 1.0\n1 1 1 2 2.0\n";
  CHECK(contains(msg(dup), "duplicate entry"));
  CHECK(contains(msg(dup), "line 6"));
  CHECK(contains(msg("1\n1\n"), "unexpected end of input"));
}

TEST_CASE("single-block write and reparse preserve every bit") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CAPTURE(seed);
    ConicProblem p1 = parse_sdpa(random_sdpa_text(seed));
    const std::string text = sdpa_text(p1);
    ConicProblem p2 = parse_sdpa(text);
    CHECK(identical(p1, p2));
    CHECK(sdpa_text(p2) == text);
  }
}

TEST_CASE("problems outside the single-block model are rejected by the writer") {
  ConicProblem p(3, 1, 1);
  p.cost = svec(Matrix::Identity(3, 3));
  p.eq.add_entry(0, 0, 0, 1.0);
  p.ineq.add_entry(0, 0, 1, 1.0);
  p.b_eq[0] = 1.0;
  p.eq.finalize();
  p.ineq.finalize();
  std::ostringstream out;
  CHECK_THROWS_AS(write_sdpa(out, p), std::invalid_argument);

  GeneratedInstance biq = gen_biq(3, 5);
  CHECK_THROWS_AS(write_sdpa(out, biq.problem), std::invalid_argument);  // pattern

  GeneratedInstance theta = gen_theta_plus(3, 8, 0.4);
  CHECK_THROWS_AS(write_sdpa(out, theta.problem), std::invalid_argument);  // obj sign
}

TEST_CASE("annotated format round-trips every generator class bit-identically") {
  std::vector<ConicProblem> problems;
  problems.push_back(gen_biq(7, 6).problem);
  problems.push_back(gen_biq_extended(7, 7).problem);
  problems.push_back(gen_theta_plus(11, 9, 0.5).problem);
  problems.push_back(gen_qap(5, 3).problem);
  problems.push_back(gen_rcp(9, 7, 3).problem);
  problems.push_back(gen_fap(13, 8, 0.4, 3).problem);
  for (const auto& p : problems) {
    CAPTURE(p.id);
    const std::string text = native_text(p);
    ConicProblem q = parse_native(text);
    CHECK(identical(p, q));
    CHECK(q.id == p.id);
    CHECK(q.obj_sign == p.obj_sign);
    CHECK(q.obj_offset == p.obj_offset);
    CHECK(native_text(q) == text);
  }
}

TEST_CASE("annotated format defaults: absent sections and optional keys") {
  ConicProblem p = parse_native("[meta]\nn 3\nm_eq 1\nm_ineq 0\n[eq]\n1 2.0\n1 1 1 1.0\n");
  CHECK(p.n == 3);
  CHECK(p.pattern.all_free());
  CHECK(!p.pattern.has_shift());
  CHECK(p.obj_sign == 1.0);
  CHECK(p.obj_offset == 0.0);
  CHECK(p.id.empty());
  CHECK(p.cost.cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.b_eq[0] == 2.0);

  // Comments and blank lines are ignored everywhere.
  ConicProblem q = parse_native(
      "# header comment\n[meta]\n\nn 3\nm_eq 1  # trailing\nm_ineq 0\n[eq]\n1 2.0\n"
      "1 1 1 1.0\n");
  CHECK(identical(p, q));
}

TEST_CASE("annotated format reports malformed input with line numbers") {
  auto msg = [](const std::string& text) {
    return parse_error_message([&] { parse_native(text); });
  };
  const std::string meta = "[meta]\nn 2\nm_eq 0\nm_ineq 0\n";
  CHECK(contains(msg("n 2\n"), "expected the file to start with [meta]"));
  CHECK(contains(msg(meta + "[pattern]\n1 2 POS\n"), "unknown entry kind token 'POS'"));
  CHECK(contains(msg(meta + "[pattern]\n1 2 POS\n"), "line 6"));
  CHECK(contains(msg(meta + "[pattern]\n1 2 NONNEG\n1 2 ZERO\n"), "duplicate pattern entry"));
  CHECK(contains(msg(meta + "[cost]\n[cost]\n"), "section [cost] duplicated"));
  CHECK(contains(msg(meta + "[stuff]\n"), "unknown section"));
  CHECK(contains(msg(meta + "[cost]\n1 2\n"), "expected a cost entry"));
  CHECK(contains(msg(meta + "[cost]\n2 1 1.0\n"), "i <= j"));
  CHECK(contains(msg(meta + "[cost]\n1 3 1.0\n"), "out of range"));
  CHECK(contains(msg(meta + "[cost]\n1 2 1.0\n1 2 2.0\n"), "duplicate cost entry"));
  CHECK(contains(msg(meta + "[shift]\n1 2 what\n"), "malformed shift value"));
  CHECK(contains(msg("[meta]\nn 2\nm_eq 0\nm_ineq 0\nwidth 4\n"), "malformed [meta] line"));
  CHECK(contains(msg("[meta]\nn 2\nm_eq 1\nm_ineq 0\n"), "missing section [eq]"));
  CHECK(contains(msg("[meta]\nn 2\nm_eq 0\nm_ineq 2\n"), "missing section [ineq]"));
  CHECK(contains(msg("[meta]\nm_eq 0\nm_ineq 0\n"), "must declare n"));
  const std::string eq = "[meta]\nn 2\nm_eq 1\nm_ineq 0\n[eq]\n";
  CHECK(contains(msg(eq + "2 1.0\n"), "out of range"));
  CHECK(contains(msg(eq + "1 1.0\n1 2.0\n"), "duplicate right-hand side"));
  CHECK(contains(msg(eq + "1 1 1 1 1.0\n"), "expected 'row value' or 'row i j value'"));
}

TEST_CASE("file wrappers surface open failures and ids") {
  CHECK(contains(parse_error_message([] { read_native_file("no_such_file.prob"); }),
                 "cannot open"));
  CHECK(contains(parse_error_message([] { read_sdpa_file("no_such_file.dat-s"); }),
                 "cannot open"));

  TempFile f("tmp_io_roundtrip.prob");
  GeneratedInstance inst = gen_biq_extended(3, 5);
  write_native_file(f.path, inst.problem);
  ConicProblem p = read_native_file(f.path);
  CHECK(identical(p, inst.problem));
  CHECK(p.id == inst.problem.id);
}

TEST_CASE("companion annotations add a pattern to a single-block file") {
  TempFile f("tmp_io_plain.dat-s");
  TempFile annot("tmp_io_plain.dat-s.pattern");
  {
    std::ofstream out(f.path);
    out << "1\n1\n2\n1.0\n0 1 1 1 1.0\n1 1 1 1 1.0\n";
  }
  ConicProblem plain = read_sdpa_file(f.path);
  CHECK(plain.pattern.all_free());
  CHECK(plain.id == "tmp_io_plain");
  {
    std::ofstream out(annot.path);
    out << "# corner sign restriction\n1 2 NONNEG\n2 2 ZERO\n";
  }
  ConicProblem annotated = read_sdpa_file(f.path);
  CHECK(annotated.pattern.kind(0, 1) == EntryKind::NonNeg);
  CHECK(annotated.pattern.kind(1, 0) == EntryKind::NonNeg);
  CHECK(annotated.pattern.kind(1, 1) == EntryKind::Zero);
  CHECK(annotated.pattern.kind(0, 0) == EntryKind::Free);

  {
    std::ofstream out(annot.path);
    out << "1 2 POS\n";
  }
  const std::string m = parse_error_message([&] { read_sdpa_file(f.path); });
  CHECK(contains(m, "tmp_io_plain.dat-s.pattern"));
  CHECK(contains(m, "unknown entry kind token 'POS'"));
}

TEST_CASE("run record rows reparse losslessly") {
  RunRecord a = sample_record("biq-s7-n11", "admm3c", RunStatus::Converged, 1.25, 1593);
  RunRecord b = sample_record("fap-s13-n8-k3", "spadmm3c", RunStatus::Stalled,
                              0.03333333333333333, 4000);
  b.m_ineq = 5;
  b.eta_i = 6.9e-3;
  b.eta_is = 0.0;
  b.tol = 1e-5;

  CHECK(same_record(a, parse_run_record_row(run_record_row(a))));
  CHECK(same_record(b, parse_run_record_row(run_record_row(b))));

  std::ostringstream out;
  write_run_records(out, {a, b});
  std::istringstream in(out.str());
  const auto back = read_run_records(in);
  REQUIRE(back.size() == 2);
  CHECK(same_record(back[0], a));
  CHECK(same_record(back[1], b));
}

TEST_CASE("run record parsing rejects malformed rows") {
  RunRecord a = sample_record("p", "s", RunStatus::Converged, 1.0, 10);
  const std::string row = run_record_row(a);
  CHECK_THROWS_AS(parse_run_record_row(row + ",extra"), ParseError);
  CHECK_THROWS_AS(parse_run_record_row("just,two"), ParseError);

  std::string bad_status = row;
  const auto pos = bad_status.find("Converged");
  bad_status.replace(pos, 9, "Done");
  CHECK(contains(parse_error_message([&] { parse_run_record_row(bad_status); }),
                 "unknown run status 'Done'"));

  std::istringstream in("not,a,header\n" + row + "\n");
  CHECK(contains(parse_error_message([&] { read_run_records(in); }),
                 "unexpected record header"));

  std::istringstream in2(run_record_header() + "\nbroken row\n");
  CHECK(contains(parse_error_message([&] { read_run_records(in2); }), "line 2"));

  RunRecord comma = a;
  comma.problem_id = "bad,id";
  CHECK_THROWS_AS(run_record_row(comma), std::invalid_argument);
}

TEST_CASE("record appends create the header exactly once") {
  TempFile f("tmp_io_records.csv");
  RunRecord a = sample_record("p1", "admm3c", RunStatus::Converged, 0.5, 100);
  RunRecord b = sample_record("p2", "admm3c", RunStatus::MaxIters, 2.5, 25000);
  append_run_record_file(f.path, a);
  append_run_record_file(f.path, b);
  const auto back = read_run_records_file(f.path);
  REQUIRE(back.size() == 2);
  CHECK(same_record(back[0], a));
  CHECK(same_record(back[1], b));
}

TEST_CASE("durations render as hours minutes seconds") {
  CHECK(format_hms(0.0) == "0:00:00");
  CHECK(format_hms(59.4) == "0:00:59");
  CHECK(format_hms(59.6) == "0:01:00");
  CHECK(format_hms(3661.0) == "1:01:01");
  CHECK(format_hms(100000.0) == "27:46:40");
  CHECK_THROWS_AS(format_hms(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(format_hms(std::numeric_limits<double>::quiet_NaN()),
                  std::invalid_argument);
}

TEST_CASE("profile of a single solver is the constant solved fraction") {
  std::vector<RunRecord> records = {
      sample_record("p1", "admm3c", RunStatus::Converged, 1.0, 10),
      sample_record("p2", "admm3c", RunStatus::Stalled, 1.0, 10),
      sample_record("p3", "admm3c", RunStatus::Converged, 4.0, 10),
      sample_record("p4", "admm3c", RunStatus::MaxIters, 1.0, 10),
  };
  ProfileTable t = emit_performance_profile(records, ProfileMetric::Time);
  REQUIRE(t.solvers == std::vector<std::string>{"admm3c"});
  REQUIRE(t.x.size() == 200);
  for (double y : t.y[0]) CHECK(y == 0.5);
}

TEST_CASE("profile matches the definition on a two-solver pair") {
  std::vector<RunRecord> records = {
      sample_record("p1", "a", RunStatus::Converged, 1.0, 1),
      sample_record("p1", "b", RunStatus::Converged, 2.0, 2),
  };
  const std::vector<double> grid = {1.0, 2.0};
  for (ProfileMetric metric : {ProfileMetric::Time, ProfileMetric::Iterations}) {
    ProfileTable t = emit_performance_profile(records, metric, grid);
    REQUIRE(t.solvers == std::vector<std::string>{"a", "b"});
    CHECK(t.y[0][0] == 1.0);
    CHECK(t.y[1][0] == 0.0);
    CHECK(t.y[0][1] == 1.0);
    CHECK(t.y[1][1] == 1.0);
  }
}

TEST_CASE("profile agrees with a brute-force evaluation of its definition") {
  Rng rng(17);
  const std::vector<std::string> solvers = {"a", "b", "c"};
  const int P = 9;
  std::vector<RunRecord> records;
  std::vector<std::vector<double>> metric(solvers.size(), std::vector<double>(P));
  for (size_t s = 0; s < solvers.size(); ++s) {
    for (int p = 0; p < P; ++p) {
      const bool solved = rng.uniform01() < 0.8;
      const double seconds = 0.1 + 10.0 * rng.uniform01();
      const int iters = static_cast<int>(rng.uniform_int(50, 5000));
      records.push_back(sample_record("p" + std::to_string(p), solvers[s],
                                      solved ? RunStatus::Converged : RunStatus::Stalled,
                                      seconds, iters));
      metric[s][p] = solved ? seconds : std::numeric_limits<double>::infinity();
    }
  }

  ProfileTable t = emit_performance_profile(records, ProfileMetric::Time);
  REQUIRE(t.solvers == solvers);
  REQUIRE(t.y.size() == solvers.size());

  for (size_t s = 0; s < solvers.size(); ++s) {
    double prev = 0.0;
    for (size_t i = 0; i < t.x.size(); ++i) {
      int count = 0;
      for (int p = 0; p < P; ++p) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t o = 0; o < solvers.size(); ++o) best = std::min(best, metric[o][p]);
        if (std::isfinite(metric[s][p]) && metric[s][p] <= t.x[i] * best) ++count;
      }
      CHECK(t.y[s][i] == static_cast<double>(count) / P);
      CHECK(t.y[s][i] >= prev);  // nondecreasing in x
      CHECK(t.y[s][i] >= 0.0);
      CHECK(t.y[s][i] <= 1.0);
      prev = t.y[s][i];
    }
  }
}

TEST_CASE("profile rejects incomplete or duplicated record sets") {
  std::vector<RunRecord> records = {
      sample_record("p1", "a", RunStatus::Converged, 1.0, 1),
      sample_record("p1", "b", RunStatus::Converged, 2.0, 2),
      sample_record("p2", "a", RunStatus::Converged, 3.0, 3),
  };
  CHECK_THROWS_AS(emit_performance_profile(records, ProfileMetric::Time),
                  std::invalid_argument);
  records.push_back(sample_record("p2", "b", RunStatus::Converged, 4.0, 4));
  CHECK_NOTHROW(emit_performance_profile(records, ProfileMetric::Time));
  records.push_back(sample_record("p2", "b", RunStatus::Converged, 5.0, 5));
  CHECK_THROWS_AS(emit_performance_profile(records, ProfileMetric::Time),
                  std::invalid_argument);
  CHECK_THROWS_AS(emit_performance_profile({}, ProfileMetric::Time),
                  std::invalid_argument);
}

TEST_CASE("profile grid and table render to a well-formed table") {
  const auto grid = profile_grid();
  REQUIRE(grid.size() == 200);
  CHECK(grid.front() == 1.0);
  CHECK(grid.back() == 32.0);
  for (size_t i = 1; i < grid.size(); ++i) {
    CHECK(grid[i] > grid[i - 1]);
    // Log spacing: constant ratio between consecutive abscissae.
    const double ratio = grid[i] / grid[i - 1];
    CHECK(ratio == doctest::Approx(std::pow(32.0, 1.0 / 199.0)).epsilon(1e-12));
  }

  std::vector<RunRecord> records = {
      sample_record("p1", "a", RunStatus::Converged, 1.0, 1),
      sample_record("p1", "b", RunStatus::Converged, 2.0, 2),
  };
  ProfileTable t = emit_performance_profile(records, ProfileMetric::Iterations);
  std::ostringstream out;
  write_profile_csv(out, t);
  std::istringstream lines(out.str());
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "x,a,b");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 200);
}
