#include "hjsys/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "hjsys/diagnostics.hpp"
#include "hjsys/eikonal.hpp"

namespace hjsys {

namespace {

using nlohmann::json;

constexpr std::size_t kKeepIteratesLimit = 1 << 16;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_coords(std::ostream& os, const TorusGrid& g, NodeIndex x) {
  const Vec c = g.coords(x);
  os << fmt(c[0]);
  if (g.dim() == 2) os << ' ' << fmt(c[1]);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cli", "cannot write " + path);
  return out;
}

json history_summary(const AlgorithmHistory& h, const char* start) {
  json j;
  j["start"] = start;
  j["converged"] = h.converged;
  j["sweeps_used"] = h.sweeps();
  j["monotonicity_worst"] = h.monotonicity_worst();
  j["last_increment"] = h.increments.back();
  j["inner_iterations"] = h.inner_iterations;
  if (h.residual) {
    j["residual_max_per_component"] = h.residual->max_per_component;
    j["solution_residual"] = h.residual->solution_residual;
  }
  return j;
}

std::vector<NodeIndex> sample_nodes(std::size_t count, std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeIndex> pick(0, size - 1);
  std::set<NodeIndex> chosen;
  while (chosen.size() < std::min(count, size)) chosen.insert(pick(rng));
  return {chosen.begin(), chosen.end()};
}

json eikonal_checks(const SystemProblem& sys, const VectorField& lim, double beta, const AubryEstimate& aubry,
                    const PipelineOptions& opt) {
  json out = json::array();
  const auto mask_nodes = aubry.nodes();
  for (std::size_t i = 0; i < sys.m(); ++i) {
    json j;
    const auto eff = effective_hamiltonian(sys, i, lim);
    const double c = scalar_critical_value(eff);
    const auto sa = scalar_aubry(eff, c, opt.equilibrium_tol);
    bool meets = false;
    for (NodeIndex x : sa) meets = meets || aubry.mask[x];
    j["component"] = i;
    j["scalar_critical_value"] = c;
    j["gap_to_beta"] = std::fabs(c - beta);
    j["scalar_aubry_nodes"] = sa;
    j["scalar_aubry_meets_mask"] = meets;

    const IntrinsicMetricGraph metric(eff, c);
    if (!mask_nodes.empty()) {
      std::vector<double> values;
      for (NodeIndex x : mask_nodes) values.push_back(lim[i][x]);
      try {
        const GridField u = maximal_subsolution(metric, mask_nodes, values);
        j["maximal_subsolution_gap"] = sup_distance(u, lim[i]);
      } catch (const IncompatibleTrace& e) {
        j["maximal_subsolution_error"] = e.what();
      }
    }
    const auto mc = metric_subsolution_check(lim[i], metric, opt.metric_pairs, opt.seed);
    j["metric_check"] = {{"edges_checked", mc.edges_checked},
                         {"pairs_checked", mc.pairs_checked},
                         {"edge_violations", mc.edge_violations},
                         {"pair_violations", mc.pair_violations},
                         {"worst_gap", mc.worst_gap}};
    out.push_back(std::move(j));
  }
  return out;
}

json diagnostics_summary(const PipelineResult& r, const PipelineOptions& opt) {
  const auto& sys = r.setup.sys;
  const VectorField& lim = *r.primary.limit;
  json j;

  double lip_iterates = 0.0;
  for (const auto& it : r.primary.iterates) {
    for (const auto& c : it) lip_iterates = std::max(lip_iterates, lipschitz_estimate(c).value);
  }
  std::vector<double> lip_limit;
  for (const auto& c : lim) lip_limit.push_back(lipschitz_estimate(c).value);
  j["lipschitz_iterates_max"] = lip_iterates;
  j["lipschitz_limit"] = lip_limit;

  const auto probe = sample_nodes(opt.probe_nodes, sys.grid().size(), opt.seed);
  std::size_t probed = 0, passed = 0;
  for (const auto& c : lim) {
    const auto rep = superdifferential_probe(c, probe);
    probed += rep.entries.size();
    passed += rep.passes();
  }
  j["superdifferential_solution"] = {{"nodes", probe}, {"probed", probed}, {"passed", passed}};

  const auto mask_nodes = r.aubry.nodes();
  probed = passed = 0;
  for (const auto& c : r.primary.initial()) {
    const auto rep = superdifferential_probe(c, mask_nodes);
    probed += rep.entries.size();
    passed += rep.passes();
  }
  j["superdifferential_initial_on_mask"] = {{"probed", probed}, {"passed", passed}};

  // The semi-Lagrangian limit carries an O(h) kink at equilibria, so the
  // probe is also run on the initial field and the maximal subsolution.
  std::vector<GridField> maximal;
  if (!mask_nodes.empty()) {
    for (std::size_t i = 0; i < sys.m(); ++i) {
      const auto eff = effective_hamiltonian(sys, i, lim);
      std::vector<double> values;
      for (NodeIndex x : mask_nodes) values.push_back(lim[i][x]);
      try {
        maximal.push_back(maximal_subsolution(IntrinsicMetricGraph(eff, scalar_critical_value(eff)), mask_nodes, values));
      } catch (const Error&) {
        maximal.clear();
        break;
      }
    }
  }
  auto all_pass = [](const auto& fields, NodeIndex x) {
    bool ok = true;
    for (const auto& c : fields) ok = ok && strict_differentiability_probe(c, x).passed();
    return ok;
  };
  json strict = json::array();
  for (NodeIndex x : r.isolation.isolated) {
    json e{{"node", x}, {"limit", all_pass(lim, x)}, {"initial", all_pass(r.primary.initial(), x)}};
    if (!maximal.empty()) e["maximal_subsolution"] = all_pass(maximal, x);
    strict.push_back(std::move(e));
  }
  j["strict_differentiability_isolated"] = strict;
  return j;
}

}  // namespace

Setup prepare(const ProblemFile& pf, const PipelineOptions& opt) {
  SystemProblem sys = build_system(pf, opt.n);
  SolverConfig cfg = build_solver_config(pf, sys);
  AlgorithmOptions algo;
  algo.stop_tol = pf.stop_tol;
  algo.max_sweeps = pf.max_sweeps;
  algo.keep_iterates = sys.grid().size() * sys.m() <= kKeepIteratesLimit;

  std::optional<BetaEstimate> est;
  double beta = 0.0;
  if (opt.beta) {
    beta = *opt.beta;
  } else if (pf.beta) {
    beta = *pf.beta;
  } else {
    BetaOptions bo;
    bo.deltas = pf.deltas;
    est = estimate_beta(sys, cfg, bo);
    beta = est->value;
  }
  return Setup{std::move(sys), cfg, algo, std::move(est), beta};
}

AlgorithmHistory solve_primary(const Setup& s) {
  SubsolutionOptions so;
  so.guess = InitialGuess::Constant;
  const VectorField w0 = initial_subsolution(s.sys, s.beta, s.cfg, so);
  return run_algorithm(s.sys, s.beta, w0, s.cfg, s.algo);
}

PipelineResult run_pipeline(const ProblemFile& pf, const PipelineOptions& opt) {
  Setup setup = prepare(pf, opt);
  const auto& sys = setup.sys;
  const double beta = setup.beta;

  EquilibriumList eq = detect_equilibria(sys, beta, opt.equilibrium_tol);
  AlgorithmHistory primary = solve_primary(setup);
  const double pin_tol = 50.0 * setup.algo.stop_tol;
  AubryEstimate aubry = estimate_from_pinning(primary, pin_tol, eq);
  IsolationReport iso = classify_isolated(aubry, eq, sys.grid());

  PipelineResult r{std::move(setup), std::move(eq), std::move(primary), std::nullopt, std::move(aubry),
                   std::move(iso), std::nullopt, json::object()};
  json& rep = r.report;
  std::string secondary_error;
  try {
    SubsolutionOptions so;
    so.guess = InitialGuess::VanishingDiscount;
    so.delta = pf.deltas.back();
    const VectorField w1 = initial_subsolution(r.setup.sys, beta, r.setup.cfg, so);
    r.secondary = run_algorithm(r.setup.sys, beta, w1, r.setup.cfg, r.setup.algo);
    r.rigidity = rigidity_report(*r.primary.limit, *r.secondary->limit, r.aubry, opt.rigidity_tol);
  } catch (const Error& e) {
    secondary_error = e.what();
  }

  const auto& s = r.setup;
  rep["schema_version"] = kReportSchemaVersion;
  rep["seed"] = opt.seed;
  rep["problem"] = {{"dim", s.sys.grid().dim()},
                    {"n", s.sys.grid().n()},
                    {"m", s.sys.m()},
                    {"equilibrium_distribution", s.sys.distribution().o},
                    {"solver",
                     {{"dt", s.cfg.dt},
                      {"speed_bound", s.cfg.speed_bound},
                      {"candidates_per_axis", s.cfg.candidates_per_axis},
                      {"fp_tolerance", s.cfg.fp_tolerance}}},
                    {"stop_tol", s.algo.stop_tol},
                    {"max_sweeps", s.algo.max_sweeps}};

  json be;
  be["value"] = beta;
  be["source"] = s.estimate ? "vanishing_discount" : "explicit";
  if (s.estimate) {
    be["extrapolated"] = s.estimate->extrapolated;
    be["lower_bound"] = s.estimate->lower_bound;
    be["upper_bound"] = s.estimate->upper_bound;
    be["equilibrium_certified"] = s.estimate->equilibrium_certified;
    json table = json::array();
    for (std::size_t k = 0; k < s.estimate->deltas.size(); ++k) {
      table.push_back({{"delta", s.estimate->deltas[k]},
                       {"beta", s.estimate->per_delta[k]},
                       {"passes", s.estimate->passes[k]}});
    }
    be["table"] = table;
  }
  rep["beta_estimate"] = be;
  rep["equilibria"] = {{"tolerance", r.equilibria.tolerance}, {"nodes", r.equilibria.nodes}};
  rep["primary"] = history_summary(r.primary, "constant");
  if (r.secondary) {
    rep["secondary"] = history_summary(*r.secondary, "vanishing_discount");
  } else {
    rep["secondary"] = {{"start", "vanishing_discount"}, {"error", secondary_error}};
  }
  rep["aubry"] = {{"method", to_string(r.aubry.method)},
                  {"pin_tol", r.aubry.pin_tol},
                  {"nodes", r.aubry.nodes()},
                  {"isolated", r.isolation.isolated},
                  {"isolated_not_equilibria", r.isolation.warnings},
                  {"components", r.isolation.components.size()}};
  if (r.rigidity) {
    rep["rigidity"] = {{"k", r.rigidity->k},
                       {"worst_deviation", r.rigidity->worst_deviation},
                       {"worst_node", r.rigidity->worst_node},
                       {"tolerance", opt.rigidity_tol},
                       {"passed", r.rigidity->passed}};
  }
  rep["eikonal"] = eikonal_checks(s.sys, *r.primary.limit, beta, r.aubry, opt);
  rep["diagnostics"] = diagnostics_summary(r, opt);
  return r;
}

void write_field_file(const std::string& path, const VectorField& v) {
  auto out = open_out(path);
  const TorusGrid& g = v.grid();
  out << (g.dim() == 1 ? "# x" : "# x y");
  for (std::size_t i = 0; i < v.m(); ++i) out << " u" << i + 1;
  out << '\n';
  for (NodeIndex x = 0; x < g.size(); ++x) {
    write_coords(out, g, x);
    for (std::size_t i = 0; i < v.m(); ++i) out << ' ' << fmt(v[i][x]);
    out << '\n';
  }
}

VectorField read_field_file(const std::string& path, const TorusGrid& grid, std::size_t m) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cli", "cannot open " + path);
  VectorField v(grid, m);
  std::string line;
  NodeIndex x = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (x >= grid.size()) throw Error(ErrorCode::ParseError, "cli", path + ": more rows than grid nodes");
    std::istringstream ls(line);
    double skip;
    for (int d = 0; d < grid.dim(); ++d) ls >> skip;
    for (std::size_t i = 0; i < m; ++i) {
      if (!(ls >> v[i][x])) throw Error(ErrorCode::ParseError, "cli", path + ": short row " + std::to_string(x));
    }
    ++x;
  }
  if (x != grid.size()) throw Error(ErrorCode::ParseError, "cli", path + ": row count does not match the grid");
  return v;
}

void write_trajectory_file(const std::string& path, const Trajectory& tr, int dim) {
  auto out = open_out(path);
  out << (dim == 1 ? "# t x q cost\n" : "# t x y qx qy cost\n");
  for (const auto& s : tr.samples) {
    out << fmt(s.t);
    for (int d = 0; d < dim; ++d) out << ' ' << fmt(s.point[d]);
    for (int d = 0; d < dim; ++d) out << ' ' << fmt(s.velocity[d]);
    out << ' ' << fmt(s.cost) << '\n';
  }
}

void write_artifacts(const PipelineResult& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto at = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
  const TorusGrid& g = r.setup.sys.grid();

  {
    auto out = open_out(at("report.json"));
    out << r.report.dump(2) << '\n';
  }
  write_field_file(at("solution.dat"), *r.primary.limit);
  write_field_file(at("initial.dat"), r.primary.initial());
  if (r.secondary) write_field_file(at("solution_secondary.dat"), *r.secondary->limit);
  {
    auto out = open_out(at("history.dat"));
    out << "# sweep increment\n";
    for (std::size_t k = 0; k < r.primary.increments.size(); ++k) {
      out << k + 1 << ' ' << fmt(r.primary.increments[k]) << '\n';
    }
  }
  if (r.setup.estimate) {
    auto out = open_out(at("beta.dat"));
    out << "# delta beta\n";
    for (std::size_t k = 0; k < r.setup.estimate->deltas.size(); ++k) {
      out << fmt(r.setup.estimate->deltas[k]) << ' ' << fmt(r.setup.estimate->per_delta[k]) << '\n';
    }
  }
  {
    auto out = open_out(at("growth.dat"));
    out << (g.dim() == 1 ? "# x growth\n" : "# x y growth\n");
    for (NodeIndex x = 0; x < g.size(); ++x) {
      write_coords(out, g, x);
      out << ' ' << fmt(r.aubry.slack[x]) << '\n';
    }
  }
  {
    auto out = open_out(at("mask.dat"));
    out << (g.dim() == 1 ? "# x in_mask\n" : "# x y in_mask\n");
    for (NodeIndex x = 0; x < g.size(); ++x) {
      write_coords(out, g, x);
      out << ' ' << static_cast<int>(r.aubry.mask[x]) << '\n';
    }
  }
  {
    std::vector<GridField> comps = r.primary.residual->upwind;
    write_field_file(at("residual.dat"), VectorField(std::move(comps)));
  }
}

}  // namespace hjsys
