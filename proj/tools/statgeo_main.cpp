#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "statgeo/battery.hpp"
#include "statgeo/builtins.hpp"
#include "statgeo/equiaffine.hpp"
#include "statgeo/errors.hpp"
#include "statgeo/maps.hpp"
#include "statgeo/structure.hpp"
#include "statgeo/variational.hpp"

using nlohmann::json;
using namespace statgeo;

namespace {

struct Flags {
  std::optional<double> tol;
  std::optional<int> probes;
  std::uint64_t seed = 0;
  std::string filter;
  std::string out;
};

// "builtin:NAME" stays a name; anything else is read as a JSON file.
json read_spec(const std::string& arg) {
  if (arg.rfind("builtin:", 0) == 0) return json(arg.substr(8));
  std::ifstream in(arg);
  if (!in) throw Error("cannot read " + arg);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(arg + ": " + e.what());
  }
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const SyntaxError*>(&e)) return "syntax";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const SchemaError*>(&e)) return "schema";
  if (dynamic_cast<const SymmetryError*>(&e)) return "symmetry";
  if (dynamic_cast<const SpdError*>(&e)) return "spd";
  if (dynamic_cast<const CodazziError*>(&e)) return "codazzi";
  if (dynamic_cast<const PeriodicityError*>(&e)) return "periodicity";
  if (dynamic_cast<const UnsupportedStructure*>(&e)) return "unsupported";
  if (dynamic_cast<const StagnationError*>(&e)) return "stagnation";
  return "error";
}

json check(double residual, double tol) { return json{{"residual", residual}, {"tolerance", tol}, {"pass", residual <= tol}}; }

bool all_pass(const json& checks) {
  for (const auto& [name, c] : checks.items()) {
    if (!c["pass"].get<bool>()) return false;
  }
  return true;
}

json point_json(std::span<const double> p) { return std::vector<double>(p.begin(), p.end()); }

void write_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

json cmd_validate(const std::string& arg, const Flags& f) {
  const double tol = f.tol.value_or(1e-9);
  const ChartOptions co{f.probes.value_or(32), f.seed};
  const StatStructure s = load_structure(read_spec(arg), co);
  const StructureReport rep = validate(s, s.domain().probes(f.probes.value_or(100), f.seed), tol);
  json checks = json::object(), flags = json::object();
  for (const auto& fl : rep.flags) {
    flags[fl.name] = json{{"ok", fl.ok}, {"residual", fl.residual}, {"worst_point", fl.worst_point}};
    if (fl.name == "torsion_free" || fl.name == "codazzi" || fl.name == "spd") {
      checks[fl.name] = json{{"residual", fl.residual}, {"tolerance", tol}, {"pass", fl.ok}};
    }
  }
  return json{{"structure", s.name()}, {"dimension", s.dim()}, {"min_eigenvalue", rep.min_eigenvalue},
              {"flags", flags},        {"checks", checks}};
}

json curvature_json(const LocalTensors& t, CurvatureKind k) { return curvature(t, k).components; }

json cmd_tensors(const std::string& arg, const std::vector<double>& at, const Flags& f) {
  const StatStructure s = load_structure(read_spec(arg), ChartOptions{f.probes.value_or(32), f.seed});
  std::vector<double> p = at.empty() ? s.domain().probes(1, f.seed)[0] : at;
  if (static_cast<int>(p.size()) != s.dim()) throw Error("--at needs " + std::to_string(s.dim()) + " coordinates");
  if (!s.domain().contains(p)) throw DomainError("point " + format_point(p) + " is outside the chart", p);
  const LocalTensors t = s.local(p, 2);
  auto vals = [](const std::vector<Jet>& v) {
    std::vector<double> out;
    for (const auto& j : v) out.push_back(j.value());
    return out;
  };
  const RicciValue ric = ricci_and_U(s, p);
  return json{{"structure", s.name()},
              {"coordinates", s.coordinates()},
              {"point", p},
              {"g", vals(t.g)},
              {"g_inverse", vals(t.ginv)},
              {"K", vals(t.K)},
              {"gamma", vals(t.gamma)},
              {"gamma_conjugate", vals(t.gamma_bar)},
              {"gamma_levi_civita", vals(t.gamma_g)},
              {"R", curvature_json(t, CurvatureKind::primal)},
              {"R_conjugate", curvature_json(t, CurvatureKind::conjugate)},
              {"R_levi_civita", curvature_json(t, CurvatureKind::levi_civita)},
              {"L", curvature_json(t, CurvatureKind::interchange)},
              {"trK", vals(trace_K(t))},
              {"div_trK", div_trK(t)},
              {"ricci", ric.ric},
              {"ricci_conjugate", ric.ric_bar},
              {"ricci_levi_civita", ric.ric_g},
              {"codazzi_residual", codazzi_residual(t)},
              {"checks", json::object()}};
}

json cmd_check_map(const std::string& arg, const Flags& f) {
  const double tol = f.tol.value_or(1e-7);
  const SmoothMap u = load_map(read_spec(arg), ChartOptions{32, f.seed});
  const auto rep = check_biharmonic(u, u.source().domain().probes(f.probes.value_or(100), f.seed), tol);
  json checks{{"statistical_biharmonic", check(rep.max_tau2, tol)}};
  return json{{"source", u.source().name()},
              {"target", u.target().name()},
              {"probes", rep.probes},
              {"harmonic", rep.is_harmonic},
              {"statistical_biharmonic", rep.is_statistical_biharmonic},
              {"max_tau", rep.max_tau},
              {"max_tau2", rep.max_tau2},
              {"worst_tau_point", rep.worst_tau_point},
              {"worst_tau2_point", rep.worst_tau2_point},
              {"checks", checks}};
}

GraphHypersurface read_hypersurface(const std::string& arg) {
  const json doc = read_spec(arg);
  return doc.is_string() ? builtin_hypersurface(doc.get<std::string>()) : load_hypersurface(doc);
}

json cmd_blaschke(const std::string& arg, const Flags& f) {
  const double tol = f.tol.value_or(1e-8);
  const GraphHypersurface hs = read_hypersurface(arg);
  const auto probes = hs.domain().probes(f.probes.value_or(50), f.seed);
  EquiaffineChecks worst;
  double tau = 0.0;
  for (const auto& p : probes) {
    const EquiaffineChecks c = equiaffine_checks(hs, p);
    worst.decomposition = std::max(worst.decomposition, c.decomposition);
    worst.equiaffine = std::max(worst.equiaffine, c.equiaffine);
    worst.volume = std::max(worst.volume, c.volume);
    worst.apolarity = std::max(worst.apolarity, c.apolarity);
    worst.gauss = std::max(worst.gauss, c.gauss);
    const HypersurfaceBitension b = hypersurface_bitension(hs, p);
    for (std::size_t a = 0; a < b.tau.size(); ++a) tau = std::max(tau, std::abs(b.tau[a] - b.tau_direct[a]));
  }
  const EquiaffineStructure e = blaschke(hs, probes[0]);
  const AffineInvariants inv = affine_invariants(hs, probes[0]);
  json checks{{"decomposition", check(worst.decomposition, tol)}, {"equiaffine", check(worst.equiaffine, tol)},
              {"volume", check(worst.volume, tol)},               {"apolarity", check(worst.apolarity, tol)},
              {"gauss", check(worst.gauss, tol)},                 {"tau_equals_m_xi", check(tau, tol)}};
  return json{{"hypersurface", hs.name()},
              {"classification", to_string(classify(hs, probes))},
              {"sample",
               {{"point", e.point}, {"lambda", e.lambda}, {"xi", e.xi}, {"h", e.h}, {"S", e.S}, {"trS", inv.trS},
                {"tr_h_nabla_S", inv.tr_h_nabla_S}}},
              {"checks", checks}};
}

json variation_json(const VariationReport& r, double tol) {
  return json{{"lhs", r.lhs},
              {"rhs", r.rhs},
              {"abs_error", r.abs_error},
              {"residual", r.rel_error},
              {"tolerance", tol},
              {"pass", r.pass(tol, 1e-8)}};
}

json cmd_fvf(const std::string& arg, std::optional<int> resolution, const Flags& f) {
  const double tol = f.tol.value_or(1e-4);
  const int N = resolution.value_or(64);
  json checks = json::object();
  auto run = [&](const std::string& name, const SmoothMap& u, const std::vector<std::string>& dir) {
    const GridMap g = GridMap::sample(u, {N});
    std::vector<ExpressionField> V;
    for (const auto& d : dir) V.push_back(ExpressionField::parse(d, u.source().coordinates()));
    if (V.size() != static_cast<std::size_t>(u.n())) throw SchemaError("variation needs one component per target coordinate");
    std::vector<double> vals;
    for (std::size_t k = 0; k < g.lattice().size(); ++k) {
      for (const auto& c : V) vals.push_back(c.evaluate(g.lattice().point(k)));
    }
    checks[name] = variation_json(first_variation_check(g, vals), tol);
  };
  if (arg.empty()) {
    const auto pairs = first_variation_pairs();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& p = pairs[i];
      run("pair" + std::to_string(i + 1) + "_" + p.source + "_to_" + p.target,
          load_map(json{{"source", p.source}, {"target", p.target}, {"components", p.map}}), p.direction);
    }
  } else {
    const json doc = read_spec(arg);
    if (!doc.contains("variation")) throw SchemaError("fvf-check map document needs a variation array");
    run("variation", load_map(doc), doc["variation"].get<std::vector<std::string>>());
  }
  return json{{"resolution", N}, {"checks", checks}};
}

json cmd_minimize(const std::string& arg, const std::string& config_path, const Flags& f, int& status) {
  SolverConfig cfg = config_path.empty() ? SolverConfig{} : load_solver_config(read_spec(config_path));
  if (f.tol) cfg.tol = *f.tol;
  const json doc = read_spec(arg);
  const GridMap u0 = doc.contains("values") ? grid_from_json(doc) : GridMap::sample(load_map(doc), cfg.resolution);
  json out{{"config",
            {{"resolution", u0.lattice().resolution()}, {"max_iter", cfg.max_iter}, {"step", cfg.step},
             {"tol", std::isinf(cfg.tol) ? json("inf") : json(cfg.tol)}, {"seed", cfg.seed}}}};
  try {
    const SolveResult r = minimize(u0, cfg);
    out["report"] = to_json(r.report);
    out["checks"] = json{{"tolerance_met", {{"residual", r.report.max_tau2}, {"tolerance", cfg.tol},
                                            {"pass", r.report.termination == "tolerance met"}}}};
    if (!f.out.empty()) write_file(f.out, grid_to_json(r.map));
  } catch (const StagnationError& e) {
    out["report"] = to_json(e.report());
    out["error"] = json{{"kind", "stagnation"}, {"message", e.what()}};
    out["checks"] = json{{"tolerance_met", {{"residual", e.report().max_tau2}, {"tolerance", cfg.tol}, {"pass", false}}}};
    status = 1;
  }
  return out;
}

json cmd_paper_examples(const Flags& f) {
  BatteryOptions o;
  o.tol_scale = f.tol.value_or(1.0);
  o.filter = f.filter;
  o.seed = f.seed;
  o.probes = f.probes.value_or(0);
  const auto results = run_battery(o);
  for (const auto& r : results) {
    std::fprintf(stderr, "%-24s %s %.3fs\n", r.name.c_str(), r.pass() ? "pass" : "FAIL", r.seconds);
  }
  json doc = battery_json(results);
  if (results.empty()) doc["error"] = json{{"kind", "filter"}, {"message", "no criterion matches " + f.filter}};
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistical manifold geometry: tensors, bi-tension fields, Blaschke structures, bi-energy solver"};
  app.require_subcommand(1);
  Flags flags;
  double tol = 0.0;
  int probes = 0;
  std::string spec, config;
  std::vector<double> at;
  int resolution = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--tol", tol, "tolerance (paper-examples: multiplier on every tolerance)");
    sub->add_option("--probes", probes, "probe point count");
    sub->add_option("--seed", flags.seed, "probe and random-field seed");
    sub->add_option("--filter", flags.filter, "run only criteria whose name contains this text");
    sub->add_option("--out", flags.out, "write the report (minimize: the final grid) to this file");
  };

  auto* validate_cmd = app.add_subcommand("validate", "check a manifold spec");
  validate_cmd->add_option("spec", spec, "builtin:NAME or JSON file")->required();
  auto* tensors_cmd = app.add_subcommand("tensors", "all tensors at a point");
  tensors_cmd->add_option("spec", spec, "builtin:NAME or JSON file")->required();
  tensors_cmd->add_option("--at", at, "point coordinates")->delimiter(',');
  auto* check_cmd = app.add_subcommand("check-map", "harmonic and statistical biharmonic tests for a map");
  check_cmd->add_option("spec", spec, "map JSON file")->required();
  auto* blaschke_cmd = app.add_subcommand("blaschke", "Blaschke structure of a graph hypersurface");
  blaschke_cmd->add_option("spec", spec, "builtin:NAME or JSON file")->required();
  auto* fvf_cmd = app.add_subcommand("fvf-check", "first variation of the bi-energy on a torus lattice");
  fvf_cmd->add_option("spec", spec, "map JSON file with a variation array; default: the 1-torus battery");
  fvf_cmd->add_option("--resolution", resolution, "lattice points per axis (default 64)");
  auto* min_cmd = app.add_subcommand("minimize", "gradient descent on the bi-energy");
  min_cmd->add_option("spec", spec, "map JSON file or grid JSON file")->required();
  min_cmd->add_option("--config", config, "solver config JSON file");
  auto* paper_cmd = app.add_subcommand("paper-examples", "run the reproduction battery");
  for (auto* sub : {validate_cmd, tensors_cmd, check_cmd, blaschke_cmd, fvf_cmd, min_cmd, paper_cmd}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--tol")) flags.tol = tol;
  if (sub->count("--probes")) flags.probes = probes;

  json report;
  int status = 0;
  try {
    if (sub == validate_cmd) report = cmd_validate(spec, flags);
    else if (sub == tensors_cmd) report = cmd_tensors(spec, at, flags);
    else if (sub == check_cmd) report = cmd_check_map(spec, flags);
    else if (sub == blaschke_cmd) report = cmd_blaschke(spec, flags);
    else if (sub == fvf_cmd) report = cmd_fvf(spec, fvf_cmd->count("--resolution") ? std::optional<int>(resolution) : std::nullopt, flags);
    else if (sub == min_cmd) report = cmd_minimize(spec, config, flags, status);
    else report = cmd_paper_examples(flags);
    if (!report.contains("pass")) report["pass"] = status == 0 && all_pass(report["checks"]);
  } catch (const std::exception& e) {
    report = json{{"error", {{"kind", error_kind(e)}, {"message", e.what()}}}, {"pass", false}};
  }
  std::string command = sub->get_name();
  for (int i = 2; i < argc; ++i) command += std::string(" ") + argv[i];
  report["command"] = command;
  if (report.contains("error")) report["pass"] = false;

  const std::string text = report.dump(2);
  std::cout << text << "\n";
  if (!flags.out.empty() && sub != min_cmd) write_file(flags.out, report);
  return report["pass"].get<bool>() ? 0 : 1;
}
