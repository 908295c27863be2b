#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "conicadmm/conic_solvers.hpp"
#include "conicadmm/generators.hpp"
#include "conicadmm/io.hpp"

namespace {

using namespace conicadmm;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= s.size()) {
    const size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

// Key=value parameters of a generator spec "class:key=value,...".
class SpecParams {
 public:
  SpecParams(const std::string& cls, const std::string& text) : cls_(cls) {
    if (text.empty()) return;
    for (const auto& part : split(text, ',')) {
      const size_t eq = part.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == part.size()) {
        fail("malformed parameter '" + part + "' (expected key=value)");
      }
      if (!kv_.emplace(part.substr(0, eq), part.substr(eq + 1)).second) {
        fail("parameter '" + part.substr(0, eq) + "' given twice");
      }
    }
  }

  long long require_int(const std::string& key) {
    auto v = take(key);
    if (!v) fail("missing required parameter '" + key + "'");
    return to_int(key, *v);
  }

  long long int_or(const std::string& key, long long fallback) {
    auto v = take(key);
    return v ? to_int(key, *v) : fallback;
  }

  double double_or(const std::string& key, double fallback) {
    auto v = take(key);
    if (!v) return fallback;
    try {
      size_t used = 0;
      const double d = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument("");
      return d;
    } catch (const std::exception&) {
      fail("parameter '" + key + "' is not a number: '" + *v + "'");
    }
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    std::string v = it->second;
    kv_.erase(it);
    return v;
  }

  void finish() const {
    if (!kv_.empty()) fail("unknown parameter '" + kv_.begin()->first + "'");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("generator spec '" + cls_ + "': " + what);
  }

 private:
  long long to_int(const std::string& key, const std::string& v) {
    try {
      size_t used = 0;
      const long long i = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument("");
      return i;
    } catch (const std::exception&) {
      fail("parameter '" + key + "' is not an integer: '" + v + "'");
    }
  }

  std::string cls_;
  std::map<std::string, std::string> kv_;
};

GeneratedInstance instance_from_spec(const std::string& spec, std::uint64_t default_seed) {
  const size_t colon = spec.find(':');
  const std::string cls = spec.substr(0, colon);
  SpecParams params(cls, colon == std::string::npos ? "" : spec.substr(colon + 1));

  if (cls == "biq") {
    const long long n = params.require_int("n");
    const auto seed = static_cast<std::uint64_t>(params.int_or("seed", default_seed));
    params.finish();
    return gen_biq(seed, static_cast<int>(n));
  }
  if (cls == "biqext") {
    const long long n = params.require_int("n");
    const auto seed = static_cast<std::uint64_t>(params.int_or("seed", default_seed));
    params.finish();
    return gen_biq_extended(seed, static_cast<int>(n));
  }
  if (cls == "theta") {
    if (auto file = params.take("file")) {
      params.finish();
      return gen_theta_plus(read_graph_file(*file));
    }
    const long long n = params.require_int("n");
    const double density = params.double_or("density", 0.5);
    const auto seed = static_cast<std::uint64_t>(params.int_or("seed", default_seed));
    params.finish();
    return gen_theta_plus(seed, static_cast<int>(n), density);
  }
  if (cls == "qap") {
    const long long n = params.require_int("n");
    const auto seed = static_cast<std::uint64_t>(params.int_or("seed", default_seed));
    params.finish();
    return gen_qap(seed, static_cast<int>(n));
  }
  if (cls == "rcp") {
    const long long n = params.require_int("n");
    const long long k = params.require_int("k");
    const auto seed = static_cast<std::uint64_t>(params.int_or("seed", default_seed));
    params.finish();
    return gen_rcp(seed, static_cast<int>(n), static_cast<int>(k));
  }
  if (cls == "fap") {
    const long long n = params.require_int("n");
    const long long k = params.require_int("k");
    const double density = params.double_or("density", 0.5);
    const auto seed = static_cast<std::uint64_t>(params.int_or("seed", default_seed));
    params.finish();
    return gen_fap(seed, static_cast<int>(n), density, static_cast<int>(k));
  }
  throw std::invalid_argument("unknown generator class '" + cls +
                              "' (expected biq, biqext, theta, qap, rcp, or fap)");
}

// Problem files are dispatched by content: annotated files start with [meta].
ConicProblem load_problem(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw ParseError("cannot open problem file '" + path + "'");
  std::string line;
  while (std::getline(probe, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    if (line.compare(begin, 6, "[meta]") == 0) return read_native_file(path);
    break;
  }
  return read_sdpa_file(path);
}

std::string default_records_path() {
  if (const char* dir = std::getenv("CONICADMM_OUT_DIR")) {
    if (*dir) return std::string(dir) + "/runs.csv";
  }
  return "";
}

struct SolveOptions {
  std::string problem_path;
  std::string generate_spec;
  std::string solver;
  double tol = 0.0;
  int max_iters = 0;
  double sigma0 = 0.0;
  double tau0 = 0.0;
  std::uint64_t seed = 1;
  std::string out = "";
  int log_every = 0;
};

int run_solve(const SolveOptions& opt) {
  ConicProblem problem(1, 0);
  if (!opt.problem_path.empty()) {
    problem = load_problem(opt.problem_path);
  } else {
    problem = instance_from_spec(opt.generate_spec, opt.seed).problem;
  }

  SolverId id;
  if (!opt.solver.empty()) {
    const auto parsed = parse_solver_id(opt.solver);
    if (!parsed) {
      throw std::invalid_argument("unknown solver '" + opt.solver + "'");
    }
    id = *parsed;
  } else {
    id = problem.m_ineq() > 0 ? SolverId::Spadmm3c : SolverId::Admm3c;
  }

  SplittingConfig cfg = default_config(id);
  if (opt.tol > 0.0) cfg.tol = opt.tol;
  if (opt.max_iters > 0) cfg.max_iters = opt.max_iters;
  if (opt.sigma0 > 0.0) cfg.sigma0 = opt.sigma0;
  if (opt.tau0 > 0.0) cfg.tau0 = opt.tau0;
  cfg.log_every = opt.log_every > 0 ? opt.log_every : 0;

  const SolveResult result = solve(problem, id, cfg);

  if (opt.log_every > 0) {
    for (const auto& rec : result.log.records) {
      std::fprintf(stderr, "k=%-6d eta=%.6e sigma=%.6e tau=%.4f%s\n", rec.k,
                   rec.measure, rec.sigma, rec.tau, rec.tau_reset ? " tau-reset" : "");
    }
  }

  const RunRecord record = make_run_record(problem, id, cfg, result);
  std::string out_path = opt.out.empty() ? default_records_path() : opt.out;
  if (!out_path.empty()) append_run_record_file(out_path, record);

  std::printf("%s %s %s iterations=%d eta=%.3e objective=%.10g time=%s "
              "(solve %.3fs, setup %.3fs)\n",
              problem.id.empty() ? "problem" : problem.id.c_str(),
              solver_id_name(id), run_status_name(result.log.status),
              result.log.iterations, result.residuals.eta, record.primal_objective,
              format_hms(result.log.solve_seconds).c_str(), result.log.solve_seconds,
              result.log.setup_seconds);

  return result.log.status == RunStatus::Converged ? 0 : 2;
}

struct GenerateOptions {
  std::string spec;
  std::string out;
  std::uint64_t seed = 1;
};

int run_generate(const GenerateOptions& opt) {
  GeneratedInstance inst = instance_from_spec(opt.spec, opt.seed);
  if (opt.out.empty()) {
    write_native(std::cout, inst.problem);
  } else {
    write_native_file(opt.out, inst.problem);
  }
  std::fprintf(stderr, "%s: n=%d m_eq=%d m_ineq=%d", inst.problem.id.c_str(),
               inst.problem.n, inst.problem.m_eq(), inst.problem.m_ineq());
  if (inst.reference) {
    std::fprintf(stderr, " reference=%.17g (%s)", *inst.reference,
                 inst.reference_kind.c_str());
  }
  std::fprintf(stderr, "\n");
  return 0;
}

struct ProfileOptions {
  std::string records;
  std::string metric = "time";
  std::string out;
};

int run_profile(const ProfileOptions& opt) {
  const auto metric = parse_profile_metric(opt.metric);
  if (!metric) {
    throw std::invalid_argument("unknown metric '" + opt.metric +
                                "' (expected time or iterations)");
  }
  const auto records = read_run_records_file(opt.records);
  const ProfileTable table = emit_performance_profile(records, *metric);
  if (opt.out.empty()) {
    write_profile_csv(std::cout, table);
  } else {
    std::ofstream out(opt.out);
    if (!out) throw std::runtime_error("cannot open '" + opt.out + "' for writing");
    write_profile_csv(out, table);
  }
  return 0;
}

struct BenchOptions {
  std::vector<std::string> instances;
  std::string solvers = "admm3c";
  std::string out;
  int threads = 1;
  double tol = 0.0;
  int max_iters = 0;
};

std::vector<std::string> default_bench_instances() {
  std::vector<std::string> specs;
  for (int seed = 1; seed <= 4; ++seed) {
    const std::string s = std::to_string(seed);
    specs.push_back("biq:n=11,seed=" + s);
    specs.push_back("theta:n=25,density=0.5,seed=" + s);
    specs.push_back("rcp:n=20,k=5,seed=" + s);
    specs.push_back("qap:n=4,seed=" + s);
    specs.push_back("fap:n=18,density=0.25,k=5,seed=" + s);
  }
  return specs;
}

int run_bench(const BenchOptions& opt) {
  const auto specs = opt.instances.empty() ? default_bench_instances() : opt.instances;
  std::vector<SolverId> ids;
  for (const auto& name : split(opt.solvers, ',')) {
    const auto parsed = parse_solver_id(name);
    if (!parsed) throw std::invalid_argument("unknown solver '" + name + "'");
    ids.push_back(*parsed);
  }

  struct Job {
    std::string spec;
    SolverId id;
  };
  std::vector<Job> jobs;
  for (const auto& spec : specs) {
    for (SolverId id : ids) jobs.push_back({spec, id});
  }

  std::atomic<size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex sink;  // serializes CSV appends and console lines

  auto worker = [&] {
    while (true) {
      const size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      const Job& job = jobs[j];
      try {
        GeneratedInstance inst = instance_from_spec(job.spec, 1);
        SplittingConfig cfg = default_config(job.id);
        if (opt.tol > 0.0) cfg.tol = opt.tol;
        if (opt.max_iters > 0) cfg.max_iters = opt.max_iters;
        cfg.log_every = 0;
        const SolveResult result = solve(inst.problem, job.id, cfg);
        const RunRecord record = make_run_record(inst.problem, job.id, cfg, result);
        std::lock_guard<std::mutex> lock(sink);
        append_run_record_file(opt.out, record);
        std::printf("%-24s %-14s %-9s iterations=%-6d eta=%.3e time=%.3fs\n",
                    inst.problem.id.c_str(), solver_id_name(job.id),
                    run_status_name(result.log.status), result.log.iterations,
                    result.residuals.eta, result.log.solve_seconds);
      } catch (const std::exception& e) {
        failures.fetch_add(1);
        std::lock_guard<std::mutex> lock(sink);
        std::fprintf(stderr, "error: %s [%s]: %s\n", job.spec.c_str(),
                     solver_id_name(job.id), e.what());
      }
    }
  };

  const int nthreads = std::max(1, opt.threads);
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  return failures.load() == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Semi-proximal ADMM solvers for conic matrix programs.\n"
      "Problem files: annotated format (starts with [meta]) or single-block "
      "sparse format; see docs/native_format.md."};
  app.require_subcommand(1);

  SolveOptions solve_opt;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one problem and print a summary");
  auto* from_file = solve_cmd->add_option("--problem", solve_opt.problem_path,
                                          "Problem file to solve");
  auto* from_spec = solve_cmd->add_option(
      "--generate", solve_opt.generate_spec,
      "Generate the instance, e.g. biq:n=11,seed=7 or theta:file=graph.txt");
  from_file->excludes(from_spec);
  solve_cmd->add_option("--solver", solve_opt.solver,
                        "admm3c, spadmm3c, admm3d_1, admm3d_1618, spadmm4d_1, "
                        "spadmm4d_1618 (default: by problem shape)");
  solve_cmd->add_option("--tol", solve_opt.tol,
                        "Convergence tolerance (default 1e-6; 1e-5 with inequalities)");
  solve_cmd->add_option("--max-iters", solve_opt.max_iters,
                        "Iteration cap (default 25000; 50000 with inequalities)");
  solve_cmd->add_option("--sigma0", solve_opt.sigma0, "Initial penalty parameter");
  solve_cmd->add_option("--tau0", solve_opt.tau0, "Initial step length");
  solve_cmd->add_option("--seed", solve_opt.seed,
                        "Default seed for --generate specs without one");
  solve_cmd->add_option("--out", solve_opt.out,
                        "CSV to append the run record to (default: "
                        "$CONICADMM_OUT_DIR/runs.csv when the variable is set)");
  solve_cmd->add_option("--log-every", solve_opt.log_every,
                        "Print every k-th iterate to stderr after the run");

  GenerateOptions gen_opt;
  auto* gen_cmd = app.add_subcommand("generate", "Write a generated instance");
  gen_cmd->add_option("spec", gen_opt.spec, "Instance spec, e.g. qap:n=4,seed=2")
      ->required();
  gen_cmd->add_option("--out", gen_opt.out, "Output path (default: stdout)");
  gen_cmd->add_option("--seed", gen_opt.seed,
                      "Default seed when the instance spec has none");

  ProfileOptions prof_opt;
  auto* prof_cmd = app.add_subcommand("profile", "Performance profile from run records");
  prof_cmd->add_option("--records", prof_opt.records, "Run record CSV")->required();
  prof_cmd->add_option("--metric", prof_opt.metric, "time or iterations");
  prof_cmd->add_option("--out", prof_opt.out, "Output CSV (default: stdout)");

  BenchOptions bench_opt;
  auto* bench_cmd = app.add_subcommand("bench", "Run a solver/instance grid");
  bench_cmd->add_option("--instances", bench_opt.instances,
                        "Instance specs (repeatable; default: built-in suite)");
  bench_cmd->add_option("--solvers", bench_opt.solvers, "Comma-separated solver ids");
  bench_cmd->add_option("--out", bench_opt.out, "Run record CSV to append to")
      ->required();
  bench_cmd->add_option("--threads", bench_opt.threads, "Worker threads");
  bench_cmd->add_option("--tol", bench_opt.tol, "Tolerance override");
  bench_cmd->add_option("--max-iters", bench_opt.max_iters, "Iteration cap override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (solve_cmd->parsed()) {
      if (solve_opt.problem_path.empty() && solve_opt.generate_spec.empty()) {
        throw std::invalid_argument("one of --problem or --generate is required");
      }
      return run_solve(solve_opt);
    }
    if (gen_cmd->parsed()) return run_generate(gen_opt);
    if (prof_cmd->parsed()) return run_profile(prof_opt);
    if (bench_cmd->parsed()) return run_bench(bench_opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
