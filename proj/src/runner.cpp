#include "adiaframe/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include "adiaframe/dynamics.hpp"
#include "adiaframe/entropy_audit.hpp"
#include "adiaframe/polynomial_family.hpp"
#include "adiaframe/random.hpp"
#include "adiaframe/stern_gerlach.hpp"
#include "adiaframe/thermo.hpp"

namespace adiaframe {

using Json = nlohmann::ordered_json;

bool RunReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

namespace {

// JSON has no inf/nan; they are written as strings.
Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

Json vector_json(const RVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

Json ledger_json(const EnergyLedger& l) {
  return {{"E_initial", number(l.E_initial)}, {"E_mean", number(l.E_mean)},
          {"Q_cum", number(l.Q_cum)},         {"W_cum", number(l.W_cum)},
          {"residual", number(l.residual)}};
}

}  // namespace

Json RunReport::to_json() const {
  Json j;
  j["config"] = Json::parse(serialize_config(config));
  j["config_hash"] = config_hash;
  j["summary"] = summary;
  Json cs = Json::array();
  for (const auto& c : checks)
    cs.push_back({{"name", c.name},
                  {"passed", c.passed},
                  {"measured", number(c.measured)},
                  {"threshold", number(c.threshold)}});
  j["checks"] = cs;
  j["passed"] = all_passed();
  j["warnings"] = warnings;
  j["files"] = files;
  j["wall_clock_seconds"] = wall_clock;
  return j;
}

Json error_record(const std::string& kind, const std::string& message) {
  return {{"error", {{"kind", kind}, {"message", message}}}};
}

CsvTable trajectory_table(const Trajectory& traj) {
  CsvTable t;
  if (traj.samples.empty()) return t;
  const auto& s0 = traj.samples.front();
  const Eigen::Index n = s0.x.size();
  const Eigen::Index m = s0.rho.rows();
  t.header.push_back("t");
  for (Eigen::Index k = 0; k < n; ++k) t.header.push_back("x" + std::to_string(k));
  for (Eigen::Index k = 0; k < n; ++k) t.header.push_back("v" + std::to_string(k));
  for (Eigen::Index k = 0; k < m; ++k) t.header.push_back("pop" + std::to_string(k));
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const std::string ij = std::to_string(i) + "_" + std::to_string(j);
      t.header.push_back("re_rho" + ij);
      t.header.push_back("im_rho" + ij);
    }
  for (const char* c : {"E_mean", "Q_cum", "W_cum", "S_info", "kinetic", "potential"})
    t.header.emplace_back(c);

  for (const auto& s : traj.samples) {
    std::vector<double> row;
    row.reserve(t.header.size());
    row.push_back(s.t);
    for (Eigen::Index k = 0; k < n; ++k) row.push_back(s.x(k));
    for (Eigen::Index k = 0; k < n; ++k) row.push_back(s.v(k));
    for (Eigen::Index k = 0; k < m; ++k) row.push_back(s.rho(k, k).real());
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = i + 1; j < m; ++j) {
        row.push_back(s.rho(i, j).real());
        row.push_back(s.rho(i, j).imag());
      }
    row.push_back(s.ledger.E_mean);
    row.push_back(s.ledger.Q_cum);
    row.push_back(s.ledger.W_cum);
    row.push_back(s.entropy);
    row.push_back(s.kinetic_energy);
    row.push_back(s.potential_energy);
    t.add_row(std::move(row));
  }
  return t;
}

namespace {

class Runner {
 public:
  Runner(const ScenarioConfig& cfg, const RunOptions& opt)
      : cfg_(cfg), opt_(opt), tol_(ToleranceProfile::from_environment()) {
    report_.config = cfg;
    report_.config_hash = config_content_hash(cfg);
    report_.warnings = opt.warnings;
  }

  RunReport execute() {
    const auto start = std::chrono::steady_clock::now();
    switch (cfg_.kind) {
      case ScenarioKind::SternGerlach: stern_gerlach(); break;
      case ScenarioKind::CustomFamily: custom_family(); break;
      case ScenarioKind::ThermoCurve: thermo_curve(); break;
      case ScenarioKind::Kubo: kubo(); break;
      case ScenarioKind::EntropyAudit: entropy_audit(); break;
    }
    report_.wall_clock =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (opt_.write_files) {
      const std::string name = cfg_.output.prefix + "_report.json";
      report_.files.push_back(name);
      write_text_file(path(name), report_.to_json().dump(2) + "\n");
    }
    return report_;
  }

 private:
  std::string path(const std::string& name) const {
    return (std::filesystem::path(cfg_.output.directory) / name).string();
  }

  void write(const std::string& suffix, const CsvTable& table) {
    if (!opt_.write_files) return;
    const std::string name = cfg_.output.prefix + "_" + suffix + ".csv";
    write_csv(path(name), table);
    report_.files.push_back(name);
  }

  void check(const std::string& name, double measured, double threshold) {
    report_.checks.push_back({name, measured <= threshold, measured, threshold});
  }

  std::size_t steps() const {
    return static_cast<std::size_t>(std::max(1.0, std::round(cfg_.duration / cfg_.dt)));
  }
  StepControl control() const { return {cfg_.dt, steps(), cfg_.sample_every}; }

  Json trajectory_summary(const Trajectory& t) const {
    Json j;
    if (t.branch_label) j["branch"] = *t.branch_label;
    j["weight"] = t.weight;
    const auto& f = t.final();
    j["t_final"] = f.t;
    j["x_final"] = vector_json(f.x);
    j["v_final"] = vector_json(f.v);
    j["ledger"] = ledger_json(f.ledger);
    j["dissipated"] = number(t.dissipated);
    j["projections"] = t.projections.size();
    return j;
  }

  // Three-sigma binomial window for `count` of `draws` at probability p.
  void binomial_check(const std::string& name, std::size_t count, std::size_t draws, double p) {
    const double n = static_cast<double>(draws);
    const double sd = std::sqrt(n * p * (1.0 - p));
    check(name, std::abs(static_cast<double>(count) - n * p), 3.0 * sd);
  }

  // --- stern_gerlach -------------------------------------------------------

  SternGerlachConfig sg_config() const {
    const auto& s = cfg_.stern_gerlach;
    SternGerlachConfig c;
    c.gamma = s.gamma;
    c.mass = s.mass;
    c.hbar = cfg_.hbar;
    c.B0 = s.B0;
    c.b = s.b;
    c.r0 = Eigen::Vector3d(s.r0[0], s.r0[1], s.r0[2]);
    c.v0 = Eigen::Vector3d(s.v0[0], s.v0[1], s.v0[2]);
    c.c_plus = s.c_plus;
    c.c_minus = s.c_minus;
    c.duration = cfg_.duration;
    c.dt = cfg_.dt;
    c.sample_every = cfg_.sample_every;
    if (cfg_.mode == RunMode::Sampled) {
      c.atoms = s.atoms;
      c.seed = *cfg_.seed;
    }
    return c;
  }

  void stern_gerlach() {
    const SternGerlachConfig c = sg_config();
    if (cfg_.mode == RunMode::MeanForce) {
      const Trajectory t = sg_run_mean_force(c, tol_);
      write("mean_force", trajectory_table(t));
      report_.summary["trajectories"] = Json::array({trajectory_summary(t)});
      ledger_checks(t);
      return;
    }
    const SternGerlachResult r = sg_run(c, tol_);
    Json trajs = Json::array();
    const double exp_plus = std::norm(c.c_plus), exp_minus = std::norm(c.c_minus);
    for (const auto* br : {&r.plus, &r.minus}) {
      if (!*br) continue;
      const bool plus = br == &r.plus;
      write(plus ? "branch_plus" : "branch_minus", trajectory_table((*br)->trajectory));
      Json j = trajectory_summary((*br)->trajectory);
      j["label"] = plus ? "+" : "-";
      j["energy_residual"] = number((*br)->energy_residual);
      trajs.push_back(j);
      check(std::string("branch_energy_") + (plus ? "plus" : "minus"), (*br)->energy_residual,
            cfg_.tolerances.branch_energy);
    }
    report_.summary["weights"] = {{"plus", r.weight_plus}, {"minus", r.weight_minus}};
    report_.summary["trajectories"] = trajs;
    if (r.final_separation) report_.summary["final_separation"] = *r.final_separation;
    const double weight_error =
        std::max(std::abs(r.weight_plus - exp_plus), std::abs(r.weight_minus - exp_minus));
    check("branch_weights", weight_error, 0.0);
    if (cfg_.mode == RunMode::Sampled) {
      report_.summary["counts"] = {{"plus", r.count_plus}, {"minus", r.count_minus}};
      binomial_check("sampled_counts_plus", r.count_plus, c.atoms, r.weight_plus);
    }
  }

  // --- custom_family -------------------------------------------------------

  static RVector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  HamiltonianFamily family() const {
    return polynomial_family(cfg_.family.coordinates, cfg_.family.terms, cfg_.hbar);
  }

  ApparatusModel apparatus() const {
    ApparatusModel app = ApparatusModel::flat(to_vector(cfg_.family.masses));
    if (!cfg_.family.spring.empty()) {
      const RVector k = to_vector(cfg_.family.spring);
      app.potential = [k](const RVector& x) { return 0.5 * x.dot(k.cwiseProduct(x)); };
      app.potential_gradient = [k](const RVector& x) { return RVector(k.cwiseProduct(x)); };
    }
    return app;
  }

  FrictionSpec friction() const {
    if (cfg_.family.friction.empty()) return FrictionSpec::none();
    return FrictionSpec::constant(to_vector(cfg_.family.friction).asDiagonal());
  }

  CVector amplitudes() const {
    CVector a(static_cast<Eigen::Index>(cfg_.family.amplitudes.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = cfg_.family.amplitudes[static_cast<std::size_t>(i)];
    return a;
  }

  void ledger_checks(const Trajectory& t) {
    double worst = 0.0;
    for (const auto& s : t.samples)
      worst = std::max(worst, s.ledger.relative_residual(tol_.ledger_floor));
    check("first_law_closure", worst, cfg_.tolerances.ledger_relative);
  }

  // Total energy KE + V + E_mean + dissipated along a trajectory, relative to
  // the largest individual change.
  double total_energy_residual(const Trajectory& t) const {
    const auto& s0 = t.initial();
    double worst = 0.0;
    // The dissipated total is only known at the end; friction-free runs are checked per sample.
    for (const auto& s : t.samples) {
      const bool last = &s == &t.samples.back();
      if (t.dissipated != 0.0 && !last) continue;
      const double dk = s.kinetic_energy - s0.kinetic_energy;
      const double dv = s.potential_energy - s0.potential_energy;
      const double dw = s.ledger.E_mean - s0.ledger.E_mean;
      const double q = last ? t.dissipated : 0.0;
      const double scale = std::max({std::abs(dk), std::abs(dv), std::abs(dw), std::abs(q),
                                     tol_.ledger_floor});
      worst = std::max(worst, std::abs(dk + dv + dw + q) / scale);
    }
    return worst;
  }

  void custom_family() {
    const HamiltonianFamily fam = family();
    const RVector x0 = to_vector(cfg_.family.x0), v0 = to_vector(cfg_.family.v0);
    const CVector c = amplitudes();
    const CMatrix rho0 = c * c.adjoint();

    if (cfg_.mode == RunMode::Driven) {
      DrivenScenario sc{fam, DrivenPath::linear(x0, v0), rho0, control(), {}, false, {}};
      const Trajectory t = run_driven(sc, tol_);
      write("trajectory", trajectory_table(t));
      report_.summary["trajectories"] = Json::array({trajectory_summary(t)});
      ledger_checks(t);
      const auto audit = unitary_invariance_audit(t);
      report_.summary["entropy_drift"] = audit.unexplained_drift;
      check("unitary_entropy_invariance", audit.unexplained_drift, cfg_.tolerances.entropy_drift);
      return;
    }
    if (cfg_.mode == RunMode::MeanForce) {
      MeanForceScenario sc{fam, apparatus(), {x0, v0}, rho0, friction(), control()};
      const Trajectory t = run_mean_force(sc, tol_);
      write("trajectory", trajectory_table(t));
      report_.summary["trajectories"] = Json::array({trajectory_summary(t)});
      ledger_checks(t);
      check("total_energy", total_energy_residual(t), cfg_.tolerances.branch_energy);
      return;
    }
    BranchingScenario sc{fam, apparatus(), {x0, v0}, c, friction(), control()};
    const auto trajs = run_branching(sc, tol_);
    Json list = Json::array();
    for (const auto& t : trajs) {
      const std::string label = "branch" + std::to_string(*t.branch_label);
      write(label, trajectory_table(t));
      Json j = trajectory_summary(t);
      const double res = total_energy_residual(t);
      j["energy_residual"] = number(res);
      list.push_back(j);
      check(label + "_energy", res, cfg_.tolerances.branch_energy);
    }
    report_.summary["trajectories"] = list;
    const RVector w = branch_weights(c, tol_);
    report_.summary["weights"] = vector_json(w);
    if (cfg_.mode == RunMode::Sampled) {
      const std::size_t draws = cfg_.stern_gerlach.atoms;
      const auto counts = sample_branches(w, draws, *cfg_.seed);
      report_.summary["counts"] = counts;
      for (std::size_t k = 0; k < counts.size(); ++k)
        if (w(static_cast<Eigen::Index>(k)) > 0.0 && w(static_cast<Eigen::Index>(k)) < 1.0)
          binomial_check("sampled_counts_" + std::to_string(k), counts[k], draws,
                         w(static_cast<Eigen::Index>(k)));
    }
  }

  // --- thermo_curve --------------------------------------------------------

  void thermo_curve() {
    const auto& th = cfg_.thermo;
    const Eigen::Index m = th.dim;
    HamiltonianFamily fam;
    if (th.spectrum == "harmonic") {
      const double s = th.level_spacing;
      fam = HamiltonianFamily(
          1, m,
          [m, s](const RVector& x) {
            RVector d(m);
            for (Eigen::Index k = 0; k < m; ++k) d(k) = s * (1.0 + x(0)) * static_cast<double>(k);
            return CMatrix(d.cast<Complex>().asDiagonal());
          },
          [m, s](const RVector&) {
            RVector d(m);
            for (Eigen::Index k = 0; k < m; ++k) d(k) = s * static_cast<double>(k);
            return std::vector<CMatrix>{CMatrix(d.cast<Complex>().asDiagonal())};
          },
          cfg_.hbar);
    } else {
      Rng rng(*cfg_.seed);
      const CMatrix a = goe(m, rng).cast<Complex>();
      const CMatrix b = goe(m, rng).cast<Complex>();
      fam = HamiltonianFamily(
          1, m, [a, b](const RVector& x) { return CMatrix(a + x(0) * b); },
          [b](const RVector&) { return std::vector<CMatrix>{b}; }, cfg_.hbar);
    }
    const RVector x = RVector::Constant(1, th.x);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(fam.hamiltonian(x).matrix(), Eigen::EigenvaluesOnly);
    const RVector levels = es.eigenvalues();
    const double spacing = mean_level_spacing(levels);
    const double sigma = cfg_.sigma_spacings * spacing;
    const double lo = levels.minCoeff(), range = levels.maxCoeff() - lo;
    const RVector grid = RVector::LinSpaced(th.grid_points, lo + th.window_low * range,
                                            lo + th.window_high * range);

    const ThermoCurve curve = entropy_temperature(levels, grid, sigma);
    CsvTable table;
    table.header = {"E", "Omega", "S", "T", "G", "identity_residual"};
    for (Eigen::Index i = 0; i < grid.size(); ++i)
      table.add_row({grid(i), curve.Omega(i), curve.S(i), curve.T(i), curve.G(i),
                     curve.identity_residual(i)});
    write("thermo", table);
    report_.summary["mean_level_spacing"] = spacing;
    report_.summary["sigma_E"] = sigma;
    check("omega_equals_TG", curve.identity_residual.maxCoeff(), cfg_.tolerances.thermo_identity);

    const MaxwellReport mx = maxwell_check(fam, x, grid, sigma);
    CsvTable mt;
    mt.header = {"E", "F", "T_dS_dx", "minus_dE_dx_S"};
    for (const auto& row : mx.rows) mt.add_row({row.E, row.force(0), row.T_dS_dx(0), row.minus_dE_dx_S(0)});
    write("maxwell", mt);
    report_.summary["maxwell_isentropic_deviation"] = number(mx.max_deviation_isentropic_form);
    check("force_equals_T_dS_dx", mx.max_deviation_entropy_form, cfg_.tolerances.maxwell);
  }

  // --- kubo ----------------------------------------------------------------

  void kubo() {
    const HamiltonianFamily fam = family();
    const RVector x0 = to_vector(cfg_.family.x0);
    const AdiabaticFrame frame = build_frame(fam, x0, nullptr, ConnectionMethod::Perturbative, tol_);
    const double eta = cfg_.eta ? *cfg_.eta : default_kubo_eta(frame.energies(), cfg_.hbar);
    const FrictionTensor g = kubo_friction(frame, cfg_.beta, eta);
    const Eigen::Index n = g.gamma.rows();
    CsvTable table;
    table.header = {"k", "j", "gamma"};
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index j = 0; j < n; ++j)
        table.add_row({static_cast<double>(k), static_cast<double>(j), g.gamma(k, j)});
    write("friction", table);
    report_.summary["eta"] = eta;
    report_.summary["beta"] = cfg_.beta;
    Json rows = Json::array();
    for (Eigen::Index k = 0; k < n; ++k) rows.push_back(vector_json(g.gamma.row(k).transpose()));
    report_.summary["gamma"] = rows;

    bool real_family = true;
    for (const auto& t : cfg_.family.terms)
      if (t.coefficient.imag().cwiseAbs().maxCoeff() != 0.0) real_family = false;
    const double scale = std::max(g.gamma.cwiseAbs().maxCoeff(), 1e-300);
    if (real_family) {
      check("gamma_symmetric", (g.gamma - g.gamma.transpose()).cwiseAbs().maxCoeff() / scale,
            cfg_.tolerances.kubo_symmetry);
    }
    const double min_diag = g.gamma.diagonal().minCoeff();
    check("gamma_diagonal_nonnegative", std::max(0.0, -min_diag) / scale,
          cfg_.tolerances.kubo_symmetry);
  }

  // --- entropy_audit -------------------------------------------------------

  void entropy_audit() {
    const auto& a = cfg_.audit;
    const MonotonicitySuite suite = entropy_monotonicity_suite(
        a.dim, static_cast<std::size_t>(a.samples), *cfg_.seed, cfg_.tolerances.entropy_monotonicity);
    CsvTable table;
    table.header = {"draw", "S_before", "S_after", "delta"};
    for (std::size_t i = 0; i < suite.draws.size(); ++i) {
      const auto& d = suite.draws[i];
      table.add_row({static_cast<double>(i), d.before, d.after, d.delta()});
    }
    write("entropy_audit", table);
    report_.summary["samples"] = suite.samples;
    report_.summary["passes"] = suite.passes;
    report_.summary["min_delta"] = suite.min_delta;
    check("monotonicity_failures", static_cast<double>(suite.samples - suite.passes), 0.0);

    // Pure equal superposition: 0 -> ln 2.
    CMatrix plus = CMatrix::Constant(2, 2, 0.5);
    const double dS = entropy_delta(plus).delta();
    check("equal_superposition_delta", std::abs(dS - std::log(2.0)), 1e-12);

    // Structural zero of the projected diabatic force on random frames.
    Rng rng(*cfg_.seed + 1);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const CMatrix h0 = random_hermitian(a.dim, rng), h1 = random_hermitian(a.dim, rng);
      const HamiltonianFamily fam(
          1, a.dim, [h0, h1](const RVector& x) { return CMatrix(h0 + x(0) * h1); },
          [h1](const RVector&) { return std::vector<CMatrix>{h1}; });
      const AdiabaticFrame frame = build_frame(fam, RVector::Constant(1, rng.normal()));
      const CMatrix rho = random_density_matrix(a.dim, rng);
      const RVector f = projected_diabatic_force(frame, rho);
      const double norm = forces(frame).diabatic[0].norm();
      if (norm > 0.0) worst = std::max(worst, std::abs(f(0)) / norm);
    }
    report_.summary["projected_force_max_ratio"] = worst;
    check("projected_diabatic_force", worst, 1e-13);
  }

  const ScenarioConfig& cfg_;
  RunOptions opt_;
  ToleranceProfile tol_;
  RunReport report_;
};

}  // namespace

RunReport run(const ScenarioConfig& config, const RunOptions& options) {
  validate_config(config);
  if (options.write_files) std::filesystem::create_directories(config.output.directory);
  return Runner(config, options).execute();
}

}  // namespace adiaframe
