#include "nhoc/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nhoc/bvp.hpp"
#include "nhoc/dynamics.hpp"
#include "nhoc/hamiltonian.hpp"
#include "nhoc/models.hpp"

namespace nhoc::cli {

namespace {

struct ModelOptions {
  std::string builtin;
  std::string params;
  std::string model_path;
};

struct Options {
  ModelOptions model;
  std::string q0, y0, qT, yT, q, weights, guess, out;
  double horizon = 1.0;
  double dt = 1e-3;
  std::string integrator = "rk4";
  unsigned seed = 20240917;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

ParamMap parse_params(const std::string& text) {
  ParamMap params;
  if (text.empty()) return params;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      fail(ErrorKind::ParseError, "--params: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const Vec v = parse_vector(item.substr(eq + 1), "--params");
    if (v.size() != 1) fail(ErrorKind::ParseError, "--params: '" + key + "' needs one value");
    if (!params.emplace(key, v[0]).second)
      fail(ErrorKind::ParseError, "--params: '" + key + "' given twice");
  }
  return params;
}

ModelBundle load_model(const ModelOptions& o) {
  if (o.builtin.empty() == o.model_path.empty())
    fail(ErrorKind::InvalidArgument, "give exactly one of --builtin or --model");
  if (!o.model_path.empty()) {
    if (!o.params.empty()) fail(ErrorKind::InvalidArgument, "--params applies to --builtin only");
    return load_model_file(o.model_path);
  }
  return make_builtin(o.builtin, parse_params(o.params));
}

Vec vector_or_zero(const std::string& text, const char* option, int n) {
  if (text.empty()) return Vec::Zero(n);
  Vec v = parse_vector(text, option);
  if (v.size() != n)
    fail(ErrorKind::DimensionMismatch, std::string(option) + " needs " + std::to_string(n) +
                                           " entries, got " + std::to_string(v.size()));
  return v;
}

void check_time_options(const Options& o) {
  if (!std::isfinite(o.horizon) || !(o.horizon > 0.0))
    fail(ErrorKind::InvalidArgument, "--T must be positive and finite");
  if (!std::isfinite(o.dt) || !(o.dt > 0.0))
    fail(ErrorKind::InvalidArgument, "--dt must be positive and finite");
}

/// Writes the CSV to --out, or to `out` when no path is given. Returns the
/// stream that should receive the human-readable summary.
std::ostream& emit_csv(const Trajectory& traj, const Options& o, std::ostream& out,
                       std::ostream& err) {
  if (o.out.empty()) {
    write_csv(traj, out);
    return err;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) fail(ErrorKind::InvalidArgument, "cannot open output file: " + o.out);
  write_csv(traj, file);
  if (!file) fail(ErrorKind::InvalidArgument, "failed writing output file: " + o.out);
  return out;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  check_time_options(o);
  const ModelBundle bundle = load_model(o.model);
  const ConstrainedSystem system = bundle.system();
  const StateQY s0{vector_or_zero(o.q0, "--q0", system.dim_q()),
                   vector_or_zero(o.y0, "--y0", system.rank_d())};
  const Trajectory traj =
      simulate(system, s0, {o.horizon, o.dt, parse_integrator(o.integrator)});
  std::ostream& summary = emit_csv(traj, o, out, err);
  const double e0 = traj.energy.front();
  double drift = 0.0;
  for (double e : traj.energy) drift = std::max(drift, std::abs(e - e0) / std::max(1.0, std::abs(e0)));
  summary << "model " << bundle.name << "\n"
          << "samples " << traj.size() << "\n"
          << "energy_initial " << fmt(e0) << "\n"
          << "energy_final " << fmt(traj.energy.back()) << "\n"
          << "max_relative_energy_drift " << sci(drift) << "\n";
  return kOk;
}

OCProblem make_problem(const ConstrainedSystem& system, const Options& o) {
  const int m = system.rank_d();
  Mat weight = Mat::Identity(m, m);
  if (!o.weights.empty()) weight = vector_or_zero(o.weights, "--weights", m).asDiagonal();
  Boundary boundary{vector_or_zero(o.q0, "--q0", system.dim_q()), vector_or_zero(o.y0, "--y0", m),
                    vector_or_zero(o.qT, "--qT", system.dim_q()), vector_or_zero(o.yT, "--yT", m)};
  return OCProblem(system, ControlDistribution::full(m), CostModel::quadratic(weight), o.horizon,
                   boundary);
}

int cmd_optimize(const Options& o, std::ostream& out, std::ostream& err) {
  check_time_options(o);
  const ModelBundle bundle = load_model(o.model);
  const OCProblem problem = make_problem(bundle.system(), o);
  const ExtremalState start{problem.boundary.q0, problem.boundary.y0, Vec::Zero(problem.rank_d()),
                            Vec::Zero(problem.dim_q()), Vec()};
  const RegularityReport regularity = regularity_matrix(problem, start);
  if (!regularity.is_regular)
    fail(ErrorKind::SingularHessian,
         "regularity matrix is singular (det = " + sci(regularity.determinant) + ")");
  const ShootingProblem sp(HamiltonianSystem(problem), o.dt, parse_integrator(o.integrator));
  const Vec guess = vector_or_zero(o.guess, "--guess", sp.unknowns());
  const BvpResult result = solve_bvp(sp, guess);
  std::ostream& summary = emit_csv(result.trajectory, o, out, err);
  summary << "model " << bundle.name << "\n"
          << "converged " << (result.converged ? "yes" : "no") << "\n"
          << "iterations " << result.iterations << "\n"
          << "residual " << sci(result.residual_norm) << "\n"
          << "cost " << fmt(result.cost) << "\n"
          << "max_hamiltonian_drift " << sci(result.max_hamiltonian_drift) << "\n"
          << "regularity_det " << fmt(regularity.determinant) << "\n"
          << "p0";
  for (Eigen::Index i = 0; i < result.p0.size(); ++i) summary << ' ' << fmt(result.p0[i]);
  summary << "\n";
  if (!result.converged) {
    err << "error: NewtonDivergence: " << result.message << "\n";
    return kNoConvergence;
  }
  return kOk;
}

class Sampler {
 public:
  explicit Sampler(unsigned seed) : rng_(seed) {}
  Vec vec(int n, double scale = 1.0) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * dist_(rng_);
    return v;
  }

 private:
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> dist_{-1.0, 1.0};
};

struct CheckRow {
  std::string name;
  double value;
  double tolerance;
  bool applicable = true;
};

std::vector<CheckRow> run_checks(const ModelBundle& bundle, unsigned seed) {
  const ConstrainedSystem system = bundle.system();
  const int nq = system.dim_q();
  const int m = system.rank_d();
  Sampler rnd(seed);
  std::vector<CheckRow> rows;

  double idem = 0.0, ortho = 0.0, antisym = 0.0, koszul = 0.0, metricity = 0.0, torsion = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Vec q = rnd.vec(nq);
    const Geometry geo = system.geometry(q);
    const Mat& p = geo.splitting.projector_p;
    const Mat& qm = geo.splitting.projector_q;
    const Mat g = system.model().metric(q);
    idem = std::max(idem, (p * p - p).cwiseAbs().maxCoeff());
    for (int k = 0; k < 10; ++k) {
      const Vec v = rnd.vec(system.rank_e());
      const Vec w = rnd.vec(system.rank_e());
      ortho = std::max(ortho, std::abs((p * v).dot(g * (qm * w))));
    }
    for (int c = 0; c < m; ++c)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          antisym = std::max(antisym, std::abs(geo.structure_d(c, a, b) + geo.structure_d(c, b, a)));
          torsion = std::max(torsion, std::abs(geo.christoffel.gamma(c, a, b) -
                                               geo.christoffel.gamma(c, b, a) - geo.structure_d(c, a, b)));
        }
    for (int k = 0; k < 10; ++k) {
      const Vec y = rnd.vec(m), z = rnd.vec(m), w = rnd.vec(m);
      koszul = std::max(koszul, koszul_residual(system, q, y, z, w));
      metricity = std::max(metricity, metricity_residual(system, q, y, z, w));
    }
  }
  rows.push_back({"projector idempotence", idem, 1e-12});
  rows.push_back({"projector orthogonality", ortho, 1e-10});
  rows.push_back({"bracket antisymmetry", antisym, 1e-14});
  rows.push_back({"koszul residual", koszul, 1e-8});
  rows.push_back({"metric compatibility", metricity, 1e-8});
  rows.push_back({"torsion identity", torsion, 1e-10});

  CheckRow oracle{"dalembert oracle", 0.0, 1e-10, nq == 0};
  if (nq == 0) {
    for (int k = 0; k < 100; ++k) {
      const Vec y = rnd.vec(m, 2.0);
      const Vec field = nonholonomic_field(system, {Vec(), y}).y_dot;
      const Vec ref = dalembert_oracle_field(system.model(), system.constraint(), system.d_basis() * y);
      oracle.value = std::max(oracle.value, (field - ref).cwiseAbs().maxCoeff());
    }
  }
  rows.push_back(oracle);

  const OCProblem problem(system, ControlDistribution::full(m),
                          CostModel::quadratic(Mat::Identity(m, m)));
  const HamiltonianSystem hs(problem);
  double roundtrip = 0.0;
  for (int k = 0; k < 100; ++k) {
    const PhasePoint z{rnd.vec(nq), rnd.vec(m), rnd.vec(nq), rnd.vec(m)};
    const PhasePoint back = legendre_map(problem, inverse_legendre(problem, z));
    roundtrip = std::max(roundtrip, (pack(back) - pack(z)).cwiseAbs().maxCoeff());
  }
  rows.push_back({"legendre roundtrip", roundtrip, 1e-10});

  double defect = 0.0;
  for (int k = 0; k < 3; ++k) {
    const PhasePoint z{rnd.vec(nq, 0.5), rnd.vec(m, 0.5), rnd.vec(nq, 0.5), rnd.vec(m, 0.5)};
    for (double dt : {0.1, 0.01})
      for (Integrator scheme : {Integrator::stormer_verlet, Integrator::symplectic_euler})
        defect = std::max(defect, symplecticity_defect(hs, z, dt, scheme));
  }
  rows.push_back({"symplecticity defect", defect, 1e-6});
  return rows;
}

int cmd_check(const Options& o, std::ostream& out) {
  const ModelBundle bundle = load_model(o.model);
  const std::vector<CheckRow> rows = run_checks(bundle, o.seed);
  bool all = true;
  out << "model " << bundle.name << "\n";
  for (const CheckRow& row : rows) {
    char line[160];
    if (!row.applicable) {
      std::snprintf(line, sizeof line, "%-26s %-5s %s\n", row.name.c_str(), "skip", "needs dim_q = 0");
    } else {
      const bool ok = std::isfinite(row.value) && row.value < row.tolerance;
      all = all && ok;
      std::snprintf(line, sizeof line, "%-26s %-5s %.3e < %.0e\n", row.name.c_str(),
                    ok ? "PASS" : "FAIL", row.value, row.tolerance);
    }
    out << line;
  }
  out << (all ? "all checks passed" : "some checks failed") << "\n";
  return all ? kOk : kInvariantFailure;
}

nlohmann::json matrix_json(const Mat& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json vector_json(const Vec& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

nlohmann::json tensor_json(const Tensor3& t) {
  auto entries = nlohmann::json::array();
  for (int c = 0; c < t.dim(); ++c)
    for (int a = 0; a < t.dim(); ++a)
      for (int b = 0; b < t.dim(); ++b)
        if (t(c, a, b) != 0.0) entries.push_back({c, a, b, t(c, a, b)});
  return entries;
}

int cmd_derive(const Options& o, std::ostream& out) {
  const ModelBundle bundle = load_model(o.model);
  const ConstrainedSystem system = bundle.system();
  const Vec q = vector_or_zero(o.q, "--q", system.dim_q());
  const Geometry geo = system.geometry(q);
  nlohmann::json doc;
  doc["name"] = bundle.name;
  doc["dim_q"] = system.dim_q();
  doc["rank_e"] = system.rank_e();
  doc["rank_d"] = system.rank_d();
  doc["q"] = vector_json(q);
  doc["d_basis"] = matrix_json(geo.splitting.d_basis.transpose());
  doc["dperp_basis"] = matrix_json(geo.splitting.dperp_basis.transpose());
  doc["structure_constants"] = tensor_json(geo.structure_d);
  doc["anchor"] = matrix_json(geo.anchor_d);
  doc["metric"] = matrix_json(geo.metric_d);
  doc["metric_inverse"] = matrix_json(geo.metric_d_inv);
  doc["christoffel"] = tensor_json(geo.christoffel.gamma);
  doc["grad_potential"] = vector_json(geo.grad_potential);
  out << doc.dump(2) << "\n";
  return kOk;
}

void add_model_options(CLI::App* cmd, ModelOptions& m) {
  cmd->add_option("--builtin", m.builtin, "suslov | chaplygin | double_integrator");
  cmd->add_option("--params", m.params, "builtin parameters, e.g. m=1,J=1,a=1,b=0");
  cmd->add_option("--model", m.model_path, "model config (JSON)");
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::RankDeficient:
    case ErrorKind::NotPositiveDefinite:
      return kConfigError;
    case ErrorKind::NewtonDivergence:
      return kNoConvergence;
    case ErrorKind::SingularMetric:
    case ErrorKind::NonFiniteState:
    case ErrorKind::ConstraintViolated:
    case ErrorKind::SingularHessian:
    case ErrorKind::FixedPointDivergence:
    case ErrorKind::SingularJacobian:
      return kNumericalError;
  }
  return kNumericalError;
}

Vec parse_vector(const std::string& text, const char* option) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size())
      fail(ErrorKind::ParseError, std::string(option) + ": '" + item + "' is not a number");
    if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, std::string(option) + ": value not finite");
    values.push_back(v);
  }
  if (!text.empty() && text.back() == ',')
    fail(ErrorKind::ParseError, std::string(option) + ": trailing comma");
  return Eigen::Map<Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_csv(const Trajectory& traj, std::ostream& os) {
  traj.validate();
  const auto width = [&](const std::vector<Vec>& block) {
    return block.empty() ? Eigen::Index{0} : block.front().size();
  };
  const auto header = [&](const char* prefix, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << prefix << '_' << i;
  };
  os << 't';
  header("q", width(traj.q));
  header("y", width(traj.y));
  header("pq", width(traj.p_q));
  header("py", width(traj.p_y));
  header("u", width(traj.controls));
  if (!traj.energy.empty()) os << ",energy";
  if (!traj.hamiltonian.empty()) os << ",hamiltonian";
  os << '\n';
  const auto block = [&](const std::vector<Vec>& b, std::size_t k) {
    if (b.empty()) return;
    for (Eigen::Index i = 0; i < b[k].size(); ++i) os << ',' << fmt(b[k][i]);
  };
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << fmt(traj.times[k]);
    block(traj.q, k);
    block(traj.y, k);
    block(traj.p_q, k);
    block(traj.p_y, k);
    block(traj.controls, k);
    if (!traj.energy.empty()) os << ',' << fmt(traj.energy[k]);
    if (!traj.hamiltonian.empty()) os << ',' << fmt(traj.hamiltonian[k]);
    os << '\n';
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonholonomic mechanics and optimal control on Lie algebroids", "nhoc"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "integrate the uncontrolled nonholonomic flow");
  add_model_options(sim, o.model);
  sim->add_option("--q0", o.q0, "initial base point");
  sim->add_option("--y0", o.y0, "initial velocity in the D basis");
  sim->add_option("--T", o.horizon, "final time");
  sim->add_option("--dt", o.dt, "step size");
  sim->add_option("--integrator", o.integrator, "rk4 | symp_euler");
  sim->add_option("--out", o.out, "CSV output path (stdout when omitted)");

  auto* opt = app.add_subcommand("optimize", "solve the quadratic-cost optimal control problem");
  add_model_options(opt, o.model);
  opt->add_option("--q0", o.q0);
  opt->add_option("--y0", o.y0);
  opt->add_option("--qT", o.qT);
  opt->add_option("--yT", o.yT);
  opt->add_option("--T", o.horizon, "horizon");
  opt->add_option("--dt", o.dt, "step size (default 1e-4)");
  opt->add_option("--integrator", o.integrator, "rk4 | symp_euler | stormer_verlet");
  opt->add_option("--weights", o.weights, "diagonal of the cost weight W");
  opt->add_option("--guess", o.guess, "initial momenta (p_q, p_y)");
  opt->add_option("--out", o.out, "CSV output path (stdout when omitted)");

  auto* chk = app.add_subcommand("check", "run the invariant checks on a model");
  add_model_options(chk, o.model);
  chk->add_option("--seed", o.seed, "seed for the random samples");

  auto* der = app.add_subcommand("derive", "print the geometry of D at a point as JSON");
  add_model_options(der, o.model);
  der->add_option("--q", o.q, "base point");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*sim) return cmd_simulate(o, out, err);
    if (*opt) {
      if (opt->count("--dt") == 0) o.dt = 1e-4;
      return cmd_optimize(o, out, err);
    }
    if (*chk) return cmd_check(o, out);
    return cmd_derive(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalError;
  }
}

}  // namespace nhoc::cli
