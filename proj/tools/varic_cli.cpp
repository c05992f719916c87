// varic: command-line front end for the point-cloud varifold estimators
// and flows. See README.md for the subcommands and file formats.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "varic/barriers.hpp"
#include "varic/cloud_io.hpp"
#include "varic/config.hpp"
#include "varic/curvature.hpp"
#include "varic/error.hpp"
#include "varic/flow.hpp"
#include "varic/sff.hpp"
#include "varic/shapes.hpp"

namespace {

using namespace varic;

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct CloudArgs {
  std::string input;
  std::string shape;
  int dim = 0;
  std::size_t count = 200;
  double radius = 1.0;
  double minor_radius = 0.5;
  double length = 1.0;
  double jitter = 0.0;
  double noise = 0.0;
  double phase = 0.0;
  std::uint64_t seed = 0;
  std::string center;
  std::string kernel = "bump";
  double tangent_radius = 0.0;

  void add(CLI::App* app) {
    auto* in = app->add_option("--input", input, "point-cloud file");
    auto* sh = app->add_option("--shape", shape, "sample a shape instead: circle, sphere, torus, segment, plane");
    in->excludes(sh);
    app->add_option("--dim", dim, "ambient dimension of the sampled shape (default: 2, 3 for torus/plane)");
    app->add_option("--count", count, "sample count");
    app->add_option("--radius", radius, "circle/sphere radius, torus major radius");
    app->add_option("--minor-radius", minor_radius, "torus minor radius");
    app->add_option("--length", length, "segment length, plane side");
    app->add_option("--jitter", jitter, "stratified jitter in [0, 1]");
    app->add_option("--noise", noise, "normal displacement amplitude");
    app->add_option("--phase", phase, "angular offset of the samples");
    app->add_option("--seed", seed, "sampler seed");
    app->add_option("--kernel", kernel, "'bump' or a CSV of s,rho[,xi] knots");
    app->add_option("--tangent-radius", tangent_radius, "PCA radius for files without tangents (default epsilon)");
  }

  ShapeSampler sampler() const {
    ShapeSampler s;
    s.kind = parse_shape_kind(shape);
    s.n = dim > 0 ? dim : ((s.kind == ShapeKind::Torus || s.kind == ShapeKind::Plane) ? 3 : 2);
    s.count = count;
    s.radius = radius;
    s.minor_radius = minor_radius;
    s.length = length;
    s.jitter = jitter;
    s.noise = noise;
    s.phase = phase;
    s.seed = seed;
    return s;
  }

  PointCloudVarifold load(double epsilon) const {
    if (input.empty() == shape.empty()) throw InvalidArgument("give exactly one of --input and --shape");
    if (!shape.empty()) return sample_shape(sampler());
    CloudColumns columns;
    PointCloudVarifold v = load_cloud(input, &columns);
    if (!columns.tangent) {
      const std::size_t missing =
          refresh_tangents_pca(v.points, v.masses, tangent_radius > 0 ? tangent_radius : epsilon, v.d, v.tangents);
      if (missing > 0) std::cerr << "warning: " << missing << " point(s) without enough neighbors for a tangent\n";
    }
    return v;
  }

  KernelPair pair(int n) const {
    if (kernel == "bump") return default_bump_pair(n);
    KernelPair p = load_tabulated_pair(kernel, n);
    if (!p.natural) {
      const auto report = certify_natural(p);
      if (!report.pass) std::cerr << "warning: kernel pair is not natural (defect " << report.max_defect << ")\n";
    }
    return p;
  }
};

Eigen::VectorXd parse_center(const std::string& text, int n) {
  if (text.empty()) return Eigen::VectorXd::Zero(n);
  const auto items = split_list(text);
  if (static_cast<int>(items.size()) != n) throw InvalidArgument("--center needs " + std::to_string(n) + " values");
  Eigen::VectorXd c(n);
  for (int k = 0; k < n; ++k) c[k] = parse_double(items[k], "--center");
  return c;
}

// stdout for "-" or an empty path.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw InvalidArgument("cannot write '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct FlowArgs {
  double epsilon = 0.1;
  std::string op = "2*Id";
  std::string scheme = "implicit";
  double tau = 1e-3;
  std::size_t steps = 100;
  std::size_t snapshot_every = 1;
  std::string mass_policy = "frozen";
  std::string tangent_policy = "recompute-per-step";
  bool implicit_masses = false;
  bool implicit_weights = false;
  double solver_tolerance = 1e-12;
  int solver_max_iterations = 500;
  std::string center;

  void add(CLI::App* app) {
    app->add_option("--epsilon", epsilon, "kernel radius")->required();
    app->add_option("--operator", op, "operator spec");
    app->add_option("--scheme", scheme, "rk4, explicit or implicit");
    app->add_option("--tau", tau, "time step");
    app->add_option("--steps", steps, "number of steps");
    app->add_option("--snapshot-every", snapshot_every, "write every k-th step");
    app->add_option("--mass-policy", mass_policy, "frozen or recompute-per-step");
    app->add_option("--tangent-policy", tangent_policy, "frozen, recompute-per-step or recompute-per-rhs");
    app->add_flag("--implicit-masses", implicit_masses, "implicit scheme: masses from the new positions");
    app->add_flag("--implicit-weights", implicit_weights, "implicit scheme: weights from the new positions");
    app->add_option("--solver-tolerance", solver_tolerance, "relative residual target");
    app->add_option("--solver-max-iter", solver_max_iterations, "solver iteration cap");
    app->add_option("--center", center, "reference center, comma separated");
  }

  FlowConfig config(int n, double tangent_radius) const {
    FlowConfig c;
    c.epsilon = epsilon;
    c.op = parse_operator(op);
    c.scheme = parse_scheme(scheme);
    c.tau = tau;
    c.steps = steps;
    c.mass_policy = parse_mass_policy(mass_policy);
    c.tangent_policy = parse_tangent_policy(tangent_policy);
    c.implicit_masses = implicit_masses;
    c.implicit_weights = implicit_weights;
    c.solver_tolerance = solver_tolerance;
    c.solver_max_iterations = solver_max_iterations;
    c.tangent_radius = tangent_radius;
    c.center = parse_center(center, n);
    c.validate();
    return c;
  }
};

std::string snapshot_name(const std::string& prefix, std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.txt", step);
  return prefix + buf;
}

void write_diagnostics(std::ostream& out, const Trajectory& traj) {
  out << "step,time,min_radius,max_radius,barrier_constant,solver_iterations\n";
  for (const auto& d : traj.diagnostics) {
    out << d.step << ',' << format_double(d.time) << ',' << format_double(d.min_radius) << ','
        << format_double(d.max_radius) << ',' << format_double(d.barrier_constant) << ',' << d.solver_iterations
        << '\n';
  }
}

// Rewrites `sub --config file ...` as `sub --key=value ... ...` so that
// explicit flags (which come later and win) override the file.
std::vector<std::string> expand_config(CLI::App& app, std::vector<std::string> args) {
  if (args.size() < 2) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[1]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::string path;
  for (std::size_t k = 2; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) {
      path = args[k + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(k), args.begin() + static_cast<std::ptrdiff_t>(k + 2));
      break;
    }
    if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(k));
      break;
    }
  }
  if (path.empty()) return args;
  const RunConfig cfg = RunConfig::load(path);
  std::set<std::string> allowed;
  for (const auto* opt : sub->get_options()) {
    for (const auto& name : opt->get_lnames()) allowed.insert(name);
  }
  allowed.erase("help");
  try {
    cfg.require_known(allowed);
  } catch (const InvalidArgument& e) {
    throw CLI::ValidationError("--config", e.what());
  }
  std::vector<std::string> injected;
  for (const auto& [key, value] : cfg.values()) injected.push_back("--" + key + "=" + value);
  args.insert(args.begin() + 2, injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-cloud varifold curvature estimators and flows"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  int status = 0;

  // curvature
  auto* curv = app.add_subcommand("curvature", "approximate mean curvature at every point");
  CloudArgs curv_cloud;
  double curv_eps = 0.0;
  std::string curv_op = "2*Id", curv_out = "-";
  bool curv_tangential = false;
  curv_cloud.add(curv);
  curv->add_option("--epsilon", curv_eps, "kernel radius")->required();
  curv->add_option("--operator", curv_op, "operator spec");
  curv->add_flag("--tangential", curv_tangential, "evaluate the kernel on tangential distances");
  curv->add_option("--out", curv_out, "CSV output ('-' for stdout)");
  curv->add_option("--config", "key = value file");
  curv->callback([&] {
    const auto v = curv_cloud.load(curv_eps);
    const auto spec = parse_operator(curv_op);
    const auto field = mean_curvature_field(v, curv_cloud.pair(v.n), curv_eps, spec, curv_tangential);
    Output out(curv_out);
    auto& os = out.stream();
    os << "index";
    for (int c = 0; c < v.n; ++c) os << ",x" << c;
    for (int c = 0; c < v.n; ++c) os << ",H" << c;
    os << ",denominator,valid\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      os << i;
      for (int c = 0; c < v.n; ++c) os << ',' << format_double(v.points(c, col));
      for (int c = 0; c < v.n; ++c) os << ',' << format_double(field.H(c, col));
      os << ',' << format_double(field.denominator[col]) << ',' << (field.valid[i] ? 1 : 0) << '\n';
    }
  });

  // sff
  auto* sff = app.add_subcommand("sff", "approximate second fundamental form tensors");
  CloudArgs sff_cloud;
  double sff_eps = 0.0;
  std::string sff_op = "S", sff_curv_op = "S", sff_out = "-";
  sff_cloud.add(sff);
  sff->add_option("--epsilon", sff_eps, "kernel radius")->required();
  sff->add_option("--operator", sff_op, "operator spec inside beta");
  sff->add_option("--curvature-operator", sff_curv_op, "operator spec of the H used in A");
  sff->add_option("--out", sff_out, "CSV output ('-' for stdout)");
  sff->add_option("--config", "key = value file");
  sff->callback([&] {
    const auto v = sff_cloud.load(sff_eps);
    const CurvatureEstimator est(v, sff_cloud.pair(v.n), sff_eps);
    const auto field = sff_field(est, parse_operator(sff_op), parse_operator(sff_curv_op));
    const int n = v.n;
    Output out(sff_out);
    auto& os = out.stream();
    os << "index";
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) os << ",beta_" << a << b << c;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) os << ",c_" << a << b;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) os << ",A_" << a << b << c;
    os << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& p = field.points[i];
      os << i;
      for (double x : p.beta.data) os << ',' << format_double(x);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) os << ',' << format_double(p.c(a, b));
      for (double x : p.A.data) os << ',' << format_double(x);
      os << '\n';
    }
  });

  // flow
  auto* flow = app.add_subcommand("flow", "evolve a cloud by approximate mean curvature");
  CloudArgs flow_cloud;
  FlowArgs flow_args;
  std::string flow_prefix;
  flow_cloud.add(flow);
  flow_args.add(flow);
  flow->add_option("--out-prefix", flow_prefix, "prefix of the snapshot and diagnostics files")->required();
  flow->add_option("--config", "key = value file");
  flow->callback([&] {
    const auto v = flow_cloud.load(flow_args.epsilon);
    const auto config = flow_args.config(v.n, flow_cloud.tangent_radius);
    const auto traj = run_flow(v, flow_cloud.pair(v.n), config, flow_args.snapshot_every);
    for (const auto& snap : traj.snapshots) save_cloud(snap.varifold, snapshot_name(flow_prefix, snap.step));
    Output diag(flow_prefix + "diagnostics.csv");
    write_diagnostics(diag.stream(), traj);
  });

  // barriers
  auto* barriers = app.add_subcommand("barriers", "run a flow and check a sphere comparison principle");
  CloudArgs bar_cloud;
  FlowArgs bar_args;
  std::string bar_check, bar_out = "-";
  double bar_R0 = 0.0;
  bar_cloud.add(barriers);
  bar_args.add(barriers);
  barriers->add_option("--check", bar_check, "internal, external or weak-external")
      ->required()
      ->check(CLI::IsMember({"internal", "external", "weak-external"}));
  barriers->add_option("--barrier-radius", bar_R0, "R0 of the barrier sphere (internal, external)");
  barriers->add_option("--out", bar_out, "report CSV ('-' for stdout)");
  barriers->add_option("--config", "key = value file");
  barriers->callback([&] {
    const auto v = bar_cloud.load(bar_args.epsilon);
    const auto config = bar_args.config(v.n, bar_cloud.tangent_radius);
    if (bar_check != "weak-external" && !(bar_R0 > 0.0)) throw InvalidArgument("--barrier-radius must be positive");
    const auto traj = run_flow(v, bar_cloud.pair(v.n), config, 1);
    BarrierReport report;
    if (bar_check == "internal") {
      report = check_internal_barrier(traj, config.center, bar_R0, v.d);
    } else if (bar_check == "external") {
      report = check_external_barrier(traj, config.center, bar_R0, v.d);
    } else {
      report = check_weak_external_discrete(traj, config.center, v.d, config.tau);
    }
    Output out(bar_out);
    write_barrier_csv(out.stream(), report);
    std::cerr << report.inequality << ": " << (report.pass ? "pass" : "FAIL") << '\n';
    if (!report.pass) status = kExitCheckFailed;
  });

  // converge
  auto* converge = app.add_subcommand("converge", "convergence study against an analytic shape");
  std::string conv_shape = "circle", conv_ops, conv_eps, conv_out = "-";
  std::optional<double> conv_coef, conv_exp;
  std::optional<int> conv_dim;
  std::optional<std::uint64_t> conv_seed, conv_probe_seed;
  std::optional<int> conv_probes;
  bool conv_tangential = false, conv_exact = false;
  converge->add_option("--shape", conv_shape, "circle, sphere, torus, segment, plane");
  converge->add_option("--dim", conv_dim, "ambient dimension");
  converge->add_option("--operators", conv_ops, "comma-separated operator specs (default: all thirteen)");
  converge->add_option("--epsilons", conv_eps, "comma-separated, strictly decreasing");
  converge->add_option("--n-coefficient", conv_coef, "N(eps) = ceil(a * eps^-b): a");
  converge->add_option("--n-exponent", conv_exp, "N(eps) = ceil(a * eps^-b): b");
  converge->add_option("--probes", conv_probes, "probe count");
  converge->add_option("--probe-seed", conv_probe_seed, "probe selection seed");
  converge->add_option("--seed", conv_seed, "sampler seed");
  converge->add_flag("--tangential", conv_tangential, "tangential-kernel variant");
  converge->add_flag("--exact-tangents", conv_exact, "use the analytic tangents instead of PCA");
  converge->add_option("--out", conv_out, "CSV output ('-' for stdout)");
  converge->add_option("--config", "key = value file");
  converge->callback([&] {
    auto o = default_convergence_options(parse_shape_kind(conv_shape));
    if (conv_dim) o.shape.n = *conv_dim;
    if (!conv_ops.empty()) o.specs = split_list(conv_ops);
    if (!conv_eps.empty()) {
      o.epsilons.clear();
      for (const auto& e : split_list(conv_eps)) o.epsilons.push_back(parse_double(e, "--epsilons"));
    }
    if (conv_coef) o.n_coefficient = *conv_coef;
    if (conv_exp) o.n_exponent = *conv_exp;
    if (conv_probes) o.probes = *conv_probes;
    if (conv_probe_seed) o.probe_seed = *conv_probe_seed;
    if (conv_seed) o.shape.seed = *conv_seed;
    o.tangential = conv_tangential;
    if (conv_exact) o.estimate_tangents = false;
    const auto rows = convergence_study(o);
    Output out(conv_out);
    write_convergence_csv(out.stream(), rows);
  });

  // validate-kernel
  auto* vk = app.add_subcommand("validate-kernel", "check the natural-pair identity and normalizations");
  std::string vk_kernel = "bump";
  int vk_n = 0, vk_grid = 10000;
  vk->add_option("--kernel", vk_kernel, "'bump' or a CSV of s,rho[,xi] knots");
  vk->add_option("--n", vk_n, "ambient dimension")->required();
  vk->add_option("--grid", vk_grid, "grid size");
  vk->add_option("--config", "key = value file");
  vk->callback([&] {
    const KernelPair pair = vk_kernel == "bump" ? default_bump_pair(vk_n) : load_tabulated_pair(vk_kernel, vk_n);
    const auto report = validate_natural_pair(pair, vk_n, vk_grid);
    std::cout << "kernel," << vk_kernel << "\nn," << vk_n << "\nmax_defect," << format_double(report.max_defect)
              << "\nworst_s," << format_double(report.worst_s) << "\nxi_at_zero," << format_double(report.xi_at_zero)
              << "\nnatural," << (report.pass ? "pass" : "fail") << '\n';
    for (int d = 1; d < vk_n; ++d) {
      const auto c = normalization_constants(pair, d);
      std::cout << "c_xi_over_c_rho_d" << d << ',' << format_double(c.c_xi / c.c_rho) << '\n';
    }
    if (!report.pass) status = kExitCheckFailed;
  });

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(app, args);
    std::vector<const char*> raw;
    for (const auto& a : args) raw.push_back(a.c_str());
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return status;
}
