// Command-line front end: validate, run, trace, report.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hjsys/critical.hpp"
#include "hjsys/kernels.hpp"
#include "hjsys/pipeline.hpp"
#include "hjsys/problem_file.hpp"
#include "json.hpp"

namespace {

using namespace hjsys;

enum Exit { kOk = 0, kValidation = 2, kConvergence = 3, kInternal = 4 };

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::OffDiagonalPositive:
    case ErrorCode::RowSumNonzero:
    case ErrorCode::Reducible:
    case ErrorCode::NumericalRankDeficiency:
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::EmptySublevel:
    case ErrorCode::InfeasibleLevel:
    case ErrorCode::LowerBoundViolated:
      return kValidation;
    case ErrorCode::MaxIterationsExceeded:
    case ErrorCode::NoConvergence:
    case ErrorCode::NotConverged:
    case ErrorCode::SubsolutionConstructionFailed:
      return kConvergence;
    default:
      return kInternal;
  }
}

bool is_coupling_axiom(ErrorCode c) {
  return c == ErrorCode::OffDiagonalPositive || c == ErrorCode::RowSumNonzero || c == ErrorCode::Reducible ||
         c == ErrorCode::NumericalRankDeficiency;
}

int report_error(const Error& e) {
  std::cerr << (is_coupling_axiom(e.code()) ? "ValidationError " : "") << to_string(e.code()) << " [" << e.module()
            << "]: " << e.what() << '\n';
  return exit_code(e.code());
}

Vec parse_point(const std::string& s, int dim) {
  Vec x{0.0, 0.0};
  std::stringstream ss(s);
  std::string item;
  int k = 0;
  while (std::getline(ss, item, ',')) {
    if (k >= dim) throw Error(ErrorCode::InvalidArgument, "cli", "--x0 has more coordinates than the grid");
    x[k++] = std::stod(item);
  }
  if (k != dim) throw Error(ErrorCode::InvalidArgument, "cli", "--x0 needs one coordinate per axis");
  return x;
}

int cmd_validate(const std::string& path) {
  const auto pf = load_problem(path);
  const auto sys = build_system(pf);
  const auto cfg = build_solver_config(pf, sys);
  std::cout << "valid: dim " << sys.grid().dim() << ", n " << sys.grid().n() << ", m " << sys.m() << '\n';
  std::cout << "o =";
  for (double v : sys.distribution().o) std::cout << ' ' << v;
  std::cout << "\nequilibrium level " << sys.equilibrium_level() << ", constant level " << sys.constant_level()
            << '\n';
  std::cout << "dt " << cfg.dt << ", speed bound " << cfg.speed_bound << '\n';
  return kOk;
}

void print_summary(const nlohmann::json& rep) {
  const auto& be = rep.at("beta_estimate");
  std::cout << "beta " << be.at("value").get<double>() << " (" << be.at("source").get<std::string>() << ")\n";
  if (be.contains("extrapolated")) std::cout << "  extrapolated " << be.at("extrapolated").get<double>() << '\n';
  const auto& p = rep.at("primary");
  std::cout << "sweeps " << p.at("sweeps_used") << ", monotonicity worst " << p.at("monotonicity_worst")
            << ", solution residual " << p.at("solution_residual") << '\n';
  const auto& a = rep.at("aubry");
  std::cout << "aubry mask " << a.at("nodes").size() << " nodes, isolated " << a.at("isolated").size()
            << ", isolated non-equilibria " << a.at("isolated_not_equilibria").size() << '\n';
  std::cout << "equilibria " << rep.at("equilibria").at("nodes").size() << " nodes\n";
  if (rep.contains("rigidity")) {
    std::cout << "rigidity k " << rep["rigidity"]["k"] << ", worst deviation " << rep["rigidity"]["worst_deviation"]
              << '\n';
  }
  for (const auto& e : rep.at("eikonal")) {
    std::cout << "component " << e.at("component") << ": scalar critical value " << e.at("scalar_critical_value");
    if (e.contains("maximal_subsolution_gap")) std::cout << ", maximal subsolution gap " << e["maximal_subsolution_gap"];
    std::cout << '\n';
  }
}

int cmd_run(const std::string& path, const std::string& out, std::optional<double> beta, std::optional<int> n) {
  const auto pf = load_problem(path);
  PipelineOptions opt;
  opt.beta = beta;
  opt.n = n;
  const auto res = run_pipeline(pf, opt);
  write_artifacts(res, out);
  print_summary(res.report);
  std::cout << "artifacts written to " << out << '\n';
  return kOk;
}

int cmd_trace(const std::string& path, const std::string& x0s, double horizon, std::size_t component,
              const std::string& from, const std::string& out, std::optional<int> n) {
  const auto pf = load_problem(path);
  PipelineOptions opt;
  opt.n = n;
  const Setup s = prepare(pf, opt);
  if (component >= s.sys.m()) throw Error(ErrorCode::InvalidArgument, "cli", "--component out of range");
  const VectorField v = from.empty() ? *solve_primary(s).limit
                                     : read_field_file((std::filesystem::path(from) / "solution.dat").string(),
                                                       s.sys.grid(), s.sys.m());
  const auto prob = component_problem(s.sys, component, v, s.beta);
  const auto tr = extract_trajectory(v[component], prob, s.cfg, parse_point(x0s, s.sys.grid().dim()), horizon);
  write_trajectory_file(out, tr, s.sys.grid().dim());
  const auto& end = tr.samples.back().point;
  std::cout << "steps " << tr.samples.size() - 1 << ", end point (" << end[0];
  if (s.sys.grid().dim() == 2) std::cout << ", " << end[1];
  std::cout << ")\nvalue-consistency gap " << tr.value_gap() << '\n';
  std::cout << "trajectory written to " << out << '\n';
  return kOk;
}

int cmd_report(const std::string& dir) {
  const auto path = std::filesystem::path(dir) / "report.json";
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cli", "cannot open " + path.string());
  nlohmann::json rep;
  try {
    rep = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "cli", path.string() + ": " + e.what());
  }
  if (rep.value("schema_version", 0) != kReportSchemaVersion) {
    throw Error(ErrorCode::ParseError, "cli", path.string() + ": unsupported schema_version");
  }
  print_summary(rep);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical solutions of weakly coupled Hamilton-Jacobi systems on the torus"};
  app.require_subcommand(1);

  std::string file, out_dir, x0, from, trace_out = "trajectory.dat", report_dir;
  double beta = 0.0, horizon = 0.0;
  int n = 0;
  std::size_t component = 0;

  auto* validate = app.add_subcommand("validate", "Parse a problem file and check the coupling axioms");
  validate->add_option("file", file, "Problem file")->required();

  auto* run = app.add_subcommand("run", "Run the full pipeline and write artifacts");
  run->add_option("file", file, "Problem file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  auto* beta_opt = run->add_option("--beta", beta, "Level to use instead of the estimate");
  auto* n_opt = run->add_option("--n", n, "Override grid.n")->check(CLI::Range(8, 1 << 20));

  auto* trace = app.add_subcommand("trace", "Follow the optimal policy backwards from a point");
  trace->add_option("file", file, "Problem file")->required();
  trace->add_option("--x0", x0, "Start point, comma separated")->required();
  trace->add_option("--horizon", horizon, "Time horizon T")->required()->check(CLI::NonNegativeNumber);
  trace->add_option("--component", component, "Component index");
  trace->add_option("--from", from, "Run directory holding solution.dat (solves when omitted)");
  trace->add_option("--out", trace_out, "Trajectory file");
  auto* trace_n = trace->add_option("--n", n, "Override grid.n")->check(CLI::Range(8, 1 << 20));

  auto* report = app.add_subcommand("report", "Summarize a run directory");
  report->add_option("dir", report_dir, "Run directory")->required();

  CLI11_PARSE(app, argc, argv);

  std::cerr << "threads: " << kernels::thread_count() << '\n';
  try {
    if (*validate) return cmd_validate(file);
    if (*run) {
      return cmd_run(file, out_dir, *beta_opt ? std::optional<double>(beta) : std::nullopt,
                     *n_opt ? std::optional<int>(n) : std::nullopt);
    }
    if (*trace) {
      return cmd_trace(file, x0, horizon, component, from, trace_out,
                       *trace_n ? std::optional<int>(n) : std::nullopt);
    }
    if (*report) return cmd_report(report_dir);
  } catch (const Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
