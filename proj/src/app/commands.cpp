#include "frohlich/app.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace frohlich::app {

using nlohmann::json;

namespace {

struct Model {
  ModeGrid grid;
  FockBasis basis;
};

ModeGrid grid_of(const ModelConfig& m) { return build_mode_grid(m.alpha, m.lambda_max, m.n_shells, m.n_dirs, m.r_min); }

Model build_model(const ModelConfig& m) {
  ModeGrid grid = grid_of(m);
  FockBasis basis = enumerate_basis(grid.size(), m.n_max);
  return {std::move(grid), std::move(basis)};
}

CouplingSign sign_of(const ModelConfig& m) { return m.repulsive ? CouplingSign::repulsive : CouplingSign::attractive; }

std::vector<double> lambdas_of(const RunConfig& c, const ModeGrid& grid) {
  return c.run.lambdas ? *c.run.lambdas : grid.shell_radii();
}

Tolerances tolerances_of(const RunConfig& c, const CommandOptions& o) {
  Tolerances tol = c.run.tolerances;
  for (const auto& a : o.tol_overrides) apply_tolerance_override(tol, a);
  return tol;
}

SweepOptions sweep_options(const RunConfig& c, const CommandOptions& o) {
  SweepOptions s;
  s.tol = tolerances_of(c, o);
  s.solver.solve_tol = s.tol.solve;
  s.sign = sign_of(c.model);
  s.threads = o.threads;
  return s;
}

Format table_format(const RunConfig& c, const CommandOptions& o) {
  if (o.format) return *o.format;
  return c.outputs.format.value_or(Format::csv);
}

void require_json(const CommandOptions& o, const char* command) {
  if (o.format && *o.format != Format::json) {
    throw ConfigError("--format", std::string(command) + " only writes json");
  }
}

void emit(const std::string& content, const std::optional<std::string>& out, const std::optional<std::string>& fallback) {
  const std::optional<std::string> path = out ? out : fallback;
  if (path) {
    write_atomic(*path, content);
  } else {
    std::cout << content << std::flush;
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

json order_json(const OrderReport& r) {
  return {{"holds", r.holds},
          {"margin", r.margin},
          {"worst_entry", {{"row", r.worst_entry.row}, {"col", r.worst_entry.col}, {"value", r.worst_entry.value}}}};
}

json check(const std::string& id, const std::string& ref, bool verdict, double margin, json details) {
  return {{"check_id", id}, {"paper_ref", ref}, {"verdict", verdict}, {"margin", margin}, {"details", std::move(details)}};
}

json failed_hypothesis(const std::string& id, const std::string& ref, const HypothesisError& e) {
  return check(id, ref, false, e.entry().value,
               {{"hypothesis_failed", true},
                {"message", e.what()},
                {"entry", {{"row", e.entry().row}, {"col", e.entry().col}, {"value", e.entry().value}}}});
}

double coupling_norm(const ModeGrid& grid, Index modes) {
  double s = 0.0;
  for (Index i = 0; i < modes; ++i) s += grid.mode(i).g * grid.mode(i).g;
  return std::sqrt(s);
}

}  // namespace

std::string csv_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

int cmd_build(const RunConfig& config, const CommandOptions& options, std::ostream& console) {
  require_json(options, "build");
  const ModeGrid grid = grid_of(config.model);
  const double dimension = basis_dimension(grid.size(), config.model.n_max);
  const bool within_cap = dimension <= static_cast<double>(kDefaultDimensionCap);

  json cutoffs = json::array();
  for (double l : lambdas_of(config, grid)) {
    const Index c = grid.cutoff_index(l);
    cutoffs.push_back({{"lambda", l}, {"snapped_lambda", grid.snapped_cutoff(l)}, {"cutoff_index", c},
                       {"coupling_norm", coupling_norm(grid, c)}});
  }
  double max_g = 0.0;
  for (const Mode& m : grid.modes()) max_g = std::max(max_g, m.g);

  json j = {{"command", "build"},
            {"dimension", dimension},
            {"dimension_cap", kDefaultDimensionCap},
            {"within_cap", within_cap},
            {"dense_capable", dimension <= static_cast<double>(kDenseCap)},
            {"mode_count", grid.size()},
            {"n_max", config.model.n_max},
            {"alpha", grid.alpha()},
            {"lambda0", grid.lambda0()},
            {"shell_radii", grid.shell_radii()},
            {"coupling_norm", coupling_norm(grid, grid.size())},
            {"max_coupling", max_g},
            {"cutoffs", cutoffs}};
  emit(dump(j), options.out, config.outputs.report_path);
  if (!within_cap) {
    console << "dimension " << dimension << " exceeds the cap " << kDefaultDimensionCap << "\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int cmd_sweep(const RunConfig& config, const CommandOptions& options, std::ostream&) {
  const Model model = build_model(config.model);
  const SweepTable table =
      cutoff_sweep(model.grid, model.basis, config.run.P, lambdas_of(config, model.grid), sweep_options(config, options));

  std::string content;
  if (table_format(config, options) == Format::csv) {
    content = "lambda,cutoff_index,energy,gap,strict_decrease\n";
    for (const SweepRow& r : table.rows) {
      content += csv_number(r.snapped_lambda) + "," + std::to_string(r.cutoff_index) + "," + csv_number(r.energy) +
                 "," + csv_number(r.gap) + "," + (r.strictly_below_previous ? "true" : "false") + "\n";
    }
  } else {
    json rows = json::array();
    for (const SweepRow& r : table.rows) {
      rows.push_back({{"lambda", r.lambda},
                      {"snapped_lambda", r.snapped_lambda},
                      {"cutoff_index", r.cutoff_index},
                      {"energy", r.energy},
                      {"gap", r.gap},
                      {"strict_decrease", r.strictly_below_previous},
                      {"added_coupling", r.added_coupling},
                      {"variational_gain", r.variational_gain},
                      {"residual", r.residual},
                      {"method", to_string(r.method)}});
    }
    content = dump({{"command", "sweep"}, {"rows", rows}});
  }
  emit(content, options.out, config.outputs.table_path);
  return 0;
}

// ---------------------------------------------------------------------------
// dispersion
// ---------------------------------------------------------------------------

int cmd_dispersion(const RunConfig& config, const CommandOptions& options, std::ostream&) {
  const Model model = build_model(config.model);
  const std::vector<double> lambdas = lambdas_of(config, model.grid);
  const std::vector<Vec3> points = config.run.P_list.empty() ? std::vector<Vec3>{config.run.P} : config.run.P_list;
  const SweepOptions sweep = sweep_options(config, options);
  const DispersionTable table = dispersion(model.grid, model.basis, lambdas.back(), points, sweep);

  std::string content;
  if (table_format(config, options) == Format::csv) {
    content = "Px,Py,Pz,energy,gap,min_at_zero_ok\n";
    for (const DispersionRow& r : table.rows) {
      content += csv_number(r.P[0]) + "," + csv_number(r.P[1]) + "," + csv_number(r.P[2]) + "," +
                 csv_number(r.energy) + "," + csv_number(r.gap) + "," + (r.min_at_zero_ok ? "true" : "false") + "\n";
    }
  } else {
    json rows = json::array();
    for (const DispersionRow& r : table.rows) {
      rows.push_back({{"P", vec_json(r.P)},
                      {"energy", r.energy},
                      {"gap", r.gap},
                      {"min_at_zero_ok", r.min_at_zero_ok},
                      {"in_existence_regime", r.in_existence_regime}});
    }
    content = dump({{"command", "dispersion"},
                    {"lambda", lambdas.back()},
                    {"energy_at_zero", table.energy_at_zero},
                    {"ok", table.ok},
                    {"rows", rows}});
  }
  emit(content, options.out, config.outputs.table_path);
  return table.ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

namespace {

// The positivity-improving checks run at t = 1; at much shorter times the
// smallest semigroup entries of the reference model sit near the threshold.
const std::vector<double> kImprovingTimes = {1.0};

json check_monotonicity(const SweepTable& sweep, const ModeGrid& grid, const Tolerances& tol) {
  bool ok = true;
  double margin = std::numeric_limits<double>::infinity();
  json rows = json::array();
  for (std::size_t k = 1; k < sweep.rows.size(); ++k) {
    const SweepRow& prev = sweep.rows[k - 1];
    const SweepRow& r = sweep.rows[k];
    double max_g = 0.0;
    for (Index i = prev.cutoff_index; i < r.cutoff_index; ++i) max_g = std::max(max_g, grid.mode(i).g);
    const bool coupled = max_g >= tol.decoupled_coupling;
    const double drop = prev.energy - r.energy;
    const bool variational_ok = drop >= r.variational_gain - tol.solve;
    const bool row_ok = (coupled ? r.strictly_below_previous : drop >= -tol.strictness) && variational_ok;
    if (coupled) margin = std::min(margin, drop);
    ok = ok && row_ok;
    rows.push_back({{"lambda_from", prev.snapped_lambda},
                    {"lambda_to", r.snapped_lambda},
                    {"energy_drop", drop},
                    {"coupled", coupled},
                    {"variational_gain", r.variational_gain},
                    {"ok", row_ok}});
  }
  if (!std::isfinite(margin)) margin = 0.0;
  json energies = json::array();
  for (const SweepRow& r : sweep.rows) energies.push_back(r.energy);
  return check("cutoff_monotonicity", "strict decrease of the ground energy in the cutoff", ok, margin,
               {{"energies", energies}, {"steps", rows}});
}

json check_positivity(CutoffFamily& family, const std::vector<double>& t_list, const Tolerances& tol) {
  bool ok = true;
  double margin = std::numeric_limits<double>::infinity();
  json entries = json::array();
  for (Index i = 0; i < family.size(); ++i) {
    for (double t : t_list) {
      const OrderReport r = positivity_preserving(family.member(i).semigroup(t), tol.positivity);
      ok = ok && r.holds;
      margin = std::min(margin, r.margin);
      entries.push_back({{"lambda", family.lambdas()[static_cast<std::size_t>(i)]}, {"t", t}, {"report", order_json(r)}});
    }
  }
  return check("positivity_preserving", "the semigroup preserves the Frohlich cone", ok, margin,
               {{"semigroups", entries}});
}

json check_faris(CutoffFamily& family, double mu, const Tolerances& tol) {
  const char* id = "perron_frobenius_faris";
  const char* ref = "unique strictly positive ground state (Perron-Frobenius-Faris)";
  OperatorAnalysis& H = family.member(family.size() - 1);
  try {
    const FarisReport r = pf_faris_check(H, mu, kImprovingTimes, tol);
    const bool ok = r.consistent && r.resolvent_improving_single;
    double margin = std::min(r.hypothesis_margin, r.min_ground_entry);
    json resolvents = json::array();
    for (std::size_t k = 0; k < r.mu_list.size(); ++k) {
      resolvents.push_back({{"mu", r.mu_list[k]}, {"report", order_json(r.resolvent_reports[k])}});
      margin = std::min(margin, r.resolvent_reports[k].margin);
    }
    json semigroups = json::array();
    for (std::size_t k = 0; k < kImprovingTimes.size(); ++k) {
      semigroups.push_back({{"t", kImprovingTimes[k]}, {"report", order_json(r.semigroup_reports[k])}});
    }
    return check(id, ref, ok, margin,
                 {{"lambda", family.lambdas().back()},
                  {"resolvent_improving_single", r.resolvent_improving_single},
                  {"resolvent_improving_all", r.resolvent_improving_all},
                  {"semigroup_improving", r.semigroup_improving},
                  {"ergodic", r.ergodic},
                  {"unique_positive_ground", r.unique_positive_ground},
                  {"consistent", r.consistent},
                  {"components", r.components},
                  {"gap", r.gap},
                  {"min_ground_entry", r.min_ground_entry},
                  {"resolvents", resolvents},
                  {"semigroups", semigroups}});
  } catch (const HypothesisError& e) {
    return failed_hypothesis(id, ref, e);
  }
}

json check_order(CutoffFamily& family, double mu, const std::vector<double>& t_list, const Tolerances& tol) {
  const char* id = "order_equivalence";
  const char* ref = "equivalence of operator, resolvent and semigroup order";
  bool ok = true;
  double margin = std::numeric_limits<double>::infinity();
  json pairs = json::array();
  try {
    for (Index i = 0; i + 1 < family.size(); ++i) {
      const OrderEquivalenceReport r = order_equivalence_check(family.member(i + 1), family.member(i), mu, t_list, tol);
      const bool pair_ok = r.hamiltonian.holds && r.resolvent.holds && r.all_semigroups && r.consistent;
      ok = ok && pair_ok;
      margin = std::min({margin, r.hamiltonian.margin, r.resolvent.margin});
      json semis = json::array();
      for (std::size_t k = 0; k < r.semigroups.size(); ++k) {
        semis.push_back({{"t", r.t_list[k]}, {"report", order_json(r.semigroups[k])}});
        margin = std::min(margin, r.semigroups[k].margin);
      }
      pairs.push_back({{"lambda_small", family.lambdas()[static_cast<std::size_t>(i)]},
                       {"lambda_large", family.lambdas()[static_cast<std::size_t>(i + 1)]},
                       {"hamiltonian", order_json(r.hamiltonian)},
                       {"resolvent", order_json(r.resolvent)},
                       {"semigroups", semis},
                       {"consistent", r.consistent},
                       {"equivalent", r.equivalent}});
    }
  } catch (const HypothesisError& e) {
    return failed_hypothesis(id, ref, e);
  }
  if (!std::isfinite(margin)) margin = 0.0;
  return check(id, ref, ok, margin, {{"mu", mu}, {"pairs", pairs}});
}

json check_lieb_yamazaki(const SweepTable& sweep, const ModeGrid& grid, const Tolerances& tol, json& block) {
  const std::optional<double> cut = smallest_valid_lieb_yamazaki_cut(grid, grid.alpha());
  const char* id = "lieb_yamazaki_lower_bound";
  const char* ref = "cutoff-uniform Lieb-Yamazaki lower bound";
  if (!cut) {
    block = {{"valid", false}, {"M", nullptr}};
    return check(id, ref, true, 0.0, {{"applicable", false}, {"reason", "no shell radius satisfies the tail condition"}});
  }
  const LiebYamazakiBound b = lieb_yamazaki_bound(grid, grid.alpha(), *cut);
  block = {{"valid", b.valid},
           {"M", b.M},
           {"lambda0_cut", *cut},
           {"condition_sum", b.condition_sum},
           {"bound_sum", b.bound_sum}};
  double margin = std::numeric_limits<double>::infinity();
  for (const SweepRow& r : sweep.rows) margin = std::min(margin, r.energy - b.M);
  return check(id, ref, margin >= -tol.lower_bound, margin,
               {{"applicable", true}, {"lambda0_cut", *cut}, {"M", b.M}, {"condition_sum", b.condition_sum}});
}

json check_form_bounds(const Model& model, const Index modes, const Tolerances& tol) {
  const std::vector<double> omega(static_cast<std::size_t>(model.grid.size()), 1.0);
  std::vector<double> f(static_cast<std::size_t>(model.grid.size()), 0.0);
  for (Index i = 0; i < modes; ++i) f[static_cast<std::size_t>(i)] = model.grid.mode(i).g;
  const FormBoundMargins m = verify_form_bounds(model.basis, omega, f);
  const bool ok = m.margin_crea >= -tol.form_bound && m.margin_vhove >= -tol.form_bound;
  return check("form_bounds", "relative form bounds of the field operators", ok,
               std::min(m.margin_crea, m.margin_vhove),
               {{"margin_crea", m.margin_crea}, {"margin_vhove", m.margin_vhove}, {"weighted_norm", m.weighted_norm},
                {"omega", "number operator"}});
}

json check_local_identity(CutoffFamily& family, const Model& model, const RunConfig& config, double mu,
                          const Tolerances& tol) {
  const Index member = family.size() > 1 ? 1 : 0;
  const double lambda = family.lambdas()[static_cast<std::size_t>(member)];
  OperatorAnalysis K(assemble_local_hamiltonian(model.grid, model.basis, config.run.P, lambda, sign_of(config.model)),
                     SolverOptions{}, kDenseCap);
  const LocalIdentityReport r =
      local_identity_check(family.member(member), K, projection_Q(model.basis, model.grid, lambda), mu, 1.0, tol);
  const Index c = model.grid.cutoff_index(lambda);
  bool couplings_positive = c > 0;
  for (Index i = 0; i < c; ++i) couplings_positive = couplings_positive && model.grid.mode(i).g > 0.0;
  couplings_positive = couplings_positive && !config.model.repulsive;
  const bool ok = r.deviation < tol.local_identity && (!couplings_positive || r.block_improving);
  return check("local_identity", "local resolvent identity and local ergodicity", ok, tol.local_identity - r.deviation,
               {{"lambda", lambda},
                {"deviation", r.deviation},
                {"block_dim", r.block_dim},
                {"block_margin", r.block_margin},
                {"block_improving", r.block_improving},
                {"couplings_positive", couplings_positive},
                {"t", r.t}});
}

json check_convergence(CutoffFamily& family, double mu, const std::vector<double>& t_list, const Tolerances& tol) {
  const ConvergenceTable table = convergence_diagnostic(family, mu, t_list, tol);
  double margin = std::numeric_limits<double>::infinity();
  json rows = json::array();
  for (const ConvergenceRow& r : table.rows) {
    for (double m : r.semigroup_margins) margin = std::min(margin, m);
    rows.push_back({{"lambda_from", r.lambda_from},
                    {"lambda_to", r.lambda_to},
                    {"diff_vacuum", r.diff_vacuum},
                    {"diff_ones", r.diff_ones},
                    {"diff_random", r.diff_random},
                    {"tail_coupling", r.tail_coupling},
                    {"semigroup_margins", r.semigroup_margins},
                    {"monotone", r.monotone}});
  }
  // T_t T_s is the transpose of T_s T_t, so pairs with s <= t suffice.
  OperatorAnalysis& full = family.member(family.size() - 1);
  double law = 0.0;
  for (std::size_t a = 0; a < t_list.size(); ++a) {
    for (std::size_t b = a; b < t_list.size(); ++b) law = std::max(law, semigroup_law_error(full, t_list[a], t_list[b]));
  }
  const bool ok = table.monotone && table.finite && law < tol.semigroup_law;
  if (!std::isfinite(margin)) margin = 0.0;
  return check("convergence_diagnostics", "monotone semigroup limit in the cutoff", ok, margin,
               {{"mu", mu}, {"rows", rows}, {"semigroup_law_error", law}, {"finite", table.finite}});
}

json check_dispersion(const Model& model, const RunConfig& config, double lambda, const SweepOptions& sweep) {
  const DispersionTable table = dispersion(model.grid, model.basis, lambda, config.run.P_list, sweep);
  double margin = std::numeric_limits<double>::infinity();
  json rows = json::array();
  for (const DispersionRow& r : table.rows) {
    margin = std::min(margin, r.energy - table.energy_at_zero);
    rows.push_back({{"P", vec_json(r.P)}, {"energy", r.energy}, {"min_at_zero_ok", r.min_at_zero_ok},
                    {"in_existence_regime", r.in_existence_regime}});
  }
  return check("dispersion_minimum", "the ground energy is minimal at zero total momentum", table.ok, margin,
               {{"lambda", lambda}, {"energy_at_zero", table.energy_at_zero}, {"rows", rows}});
}

}  // namespace

int cmd_verify(const RunConfig& config, const CommandOptions& options, std::ostream& console) {
  require_json(options, "verify");
  const Model model = build_model(config.model);
  const SweepOptions sweep_opts = sweep_options(config, options);
  const Tolerances& tol = sweep_opts.tol;
  const std::vector<double> lambdas = lambdas_of(config, model.grid);
  const std::vector<double>& t_list = config.run.t_list;

  const SweepTable sweep = cutoff_sweep(model.grid, model.basis, config.run.P, lambdas, sweep_opts);
  CutoffFamily family(model.grid, model.basis, config.run.P, lambdas, sweep_opts.sign, sweep_opts.solver);
  const double mu = config.run.mu ? *config.run.mu : family.auto_mu();

  json checks = json::array();
  json ly_block;
  checks.push_back(check_monotonicity(sweep, model.grid, tol));
  checks.push_back(check_positivity(family, t_list, tol));
  checks.push_back(check_faris(family, mu, tol));
  checks.push_back(check_order(family, mu, t_list, tol));
  checks.push_back(check_lieb_yamazaki(sweep, model.grid, tol, ly_block));
  checks.push_back(check_form_bounds(model, model.grid.cutoff_index(lambdas.back()), tol));
  checks.push_back(check_local_identity(family, model, config, mu, tol));
  checks.push_back(check_convergence(family, mu, t_list, tol));
  if (!config.run.P_list.empty()) checks.push_back(check_dispersion(model, config, lambdas.back(), sweep_opts));

  bool all = true;
  for (const json& c : checks) {
    const bool v = c["verdict"].get<bool>();
    all = all && v;
    console << (v ? "PASS " : "FAIL ") << c["check_id"].get<std::string>() << "\n";
  }

  json tol_json = json::object();
  for (const auto& [k, v] : tol.as_map()) tol_json[k] = v;
  const json report = {{"command", "verify"},
                       {"model",
                        {{"alpha", config.model.alpha},
                         {"lambda_max", config.model.lambda_max},
                         {"n_shells", config.model.n_shells},
                         {"n_dirs", config.model.n_dirs},
                         {"r_min", config.model.r_min},
                         {"n_max", config.model.n_max},
                         {"repulsive", config.model.repulsive},
                         {"dimension", model.basis.dimension()}}},
                       {"P", vec_json(config.run.P)},
                       {"lambdas", lambdas},
                       {"t_list", t_list},
                       {"mu", mu},
                       {"mu_policy", config.run.mu ? "fixed" : "auto"},
                       {"tolerances", tol_json},
                       {"checks", checks},
                       {"lieb_yamazaki", ly_block},
                       {"all_passed", all}};
  emit(dump(report), options.out, config.outputs.report_path);
  return all ? 0 : 1;
}

}  // namespace frohlich::app
