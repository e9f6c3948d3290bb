#include "cpt/run.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "cpt/deformation.hpp"
#include "cpt/ekeland.hpp"
#include "cpt/functional.hpp"
#include "cpt/geometry.hpp"
#include "cpt/minimax.hpp"

namespace cpt {

namespace {

using json = nlohmann::ordered_json;

json vec_to_json(const Vector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vec_from_list(const std::vector<double>& v) {
  Vector out(static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out(static_cast<int>(i)) = v[i];
  return out;
}

Functional functional_from(const ConfigTable& cfg) {
  FunctionalParams params;
  params.dim = static_cast<int>(cfg.number_or("functional.dim", 2));
  params.n_plus = static_cast<int>(cfg.number_or("functional.n_plus", 1));
  params.plateau_radius = cfg.number_or("functional.plateau_radius", 1.0);
  params.grid_cells = static_cast<int>(cfg.number_or("functional.grid_cells", 16));
  return make_test_functional(cfg.str("functional.name"), params);
}

Decomposition decomposition_from(const ConfigTable& cfg, int fallback_dim) {
  const int n = static_cast<int>(cfg.number_or("decomposition.n", fallback_dim));
  const int d1 = static_cast<int>(cfg.number_or("decomposition.d1", 1));
  const bool with_e = cfg.flag_or("decomposition.with_e", false);
  return Decomposition::axes(n, d1, with_e);
}

PairPtr pair_from(const ConfigTable& cfg, const Decomposition& decomp) {
  PairParams params;
  params.rho = cfg.number_or("pair.rho", 0.0);
  params.R = cfg.number_or("pair.R", 0.0);
  params.R1 = cfg.number_or("pair.R1", 0.0);
  params.R2 = cfg.number_or("pair.R2", 0.0);
  if (cfg.has("pair.path_a"))
    params.path_a = vec_from_list(cfg.number_list("pair.path_a"));
  if (cfg.has("pair.path_b"))
    params.path_b = vec_from_list(cfg.number_list("pair.path_b"));
  if (cfg.has("pair.sphere_center"))
    params.sphere_center = vec_from_list(cfg.number_list("pair.sphere_center"));
  const int resolution = static_cast<int>(cfg.number_or("pair.resolution", 64));
  return make_pair(pair_kind_from_string(cfg.str("pair.kind")), decomp, params,
                   resolution);
}

SetPtr finite_set_from(const ConfigTable& cfg, const std::string& key) {
  std::vector<Vector> points;
  for (const auto& p : cfg.point_list(key)) points.push_back(vec_from_list(p));
  return make_finite_set(points);
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

std::string csv_num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// ---- mode handlers ---------------------------------------------------------

json run_link_verify(const ConfigTable& cfg, uint64_t seed, bool& ok) {
  const Decomposition decomp = decomposition_from(cfg, 2);
  const PairPtr pair = pair_from(cfg, decomp);
  const double tau_link = cfg.number_or("tolerances.tau_link", 1e-3);
  const int count = static_cast<int>(cfg.number_or("pair.gamma_count", 1));
  const double amplitude =
      cfg.number_or("pair.gamma_amplitude", pair->link_margin / 4.0);
  const std::string gamma_kind = cfg.str_or("pair.gamma", "identity");

  std::mt19937_64 rng(seed);
  json runs = json::array();
  ok = true;
  for (int k = 0; k < count; ++k) {
    const AdmissibleMap gamma =
        gamma_kind == "identity"
            ? AdmissibleMap::identity(pair)
            : make_perturbed_identity(pair, amplitude, rng);
    json entry;
    if (pair->kind == PairKind::mp_path) {
      const IntersectionResult witness =
          find_intersection(gamma, *pair, tau_link);
      entry["witness"] = vec_to_json(witness.image);
      entry["residual"] = witness.residual;
      ok = ok && witness.residual <= tau_link;
    } else {
      const LinkingReport rep = verify_linking(gamma, *pair);
      json steps = json::array();
      for (const auto& s : rep.steps)
        steps.push_back(
            {{"t", s.t}, {"degree", s.degree}, {"margin", s.margin}});
      entry["homotopy"] = steps;
      entry["linked"] = rep.linked;
      entry["conclusive"] = rep.conclusive;
      if (!rep.message.empty()) entry["message"] = rep.message;
      if (rep.conclusive) {
        entry["witness"] = vec_to_json(rep.witness.image);
        entry["residual"] = rep.witness.residual;
      }
      ok = ok && rep.conclusive && rep.linked &&
           rep.witness.residual <= tau_link;
    }
    runs.push_back(entry);
  }
  json out;
  out["pair_kind"] = to_string(pair->kind);
  out["link_margin"] = pair->link_margin;
  out["runs"] = runs;
  return out;
}

json run_minimax(const ConfigTable& cfg, uint64_t seed,
                 const std::filesystem::path& out_dir, bool& ok) {
  const Functional f = functional_from(cfg);
  const Decomposition decomp = decomposition_from(cfg, f.dim());
  const PairPtr pair = pair_from(cfg, decomp);

  MinimaxOptions opts;
  opts.tau_c = cfg.number_or("tolerances.tau_c", 1e-4);
  opts.b = cfg.number_or("tolerances.b", 1e-3);
  opts.sampling.seed = seed;

  const MinimaxReport report =
      estimate_cgamma(f, pair, AdmissibleMap::identity(pair), opts);

  std::ostringstream history;
  history << "iteration,sup\n";
  for (const auto& [iter, sup] : report.iteration_history)
    history << iter << "," << csv_num(sup) << "\n";
  write_file(out_dir / "history.csv", history.str());

  std::ostringstream trace;
  trace << "t,node";
  for (int i = 0; i < f.dim(); ++i) trace << ",x" << i;
  trace << ",f,grad_norm\n";
  for (size_t k = 0; k < report.ps_trace.points.size(); ++k) {
    trace << k << "," << k;
    for (int i = 0; i < f.dim(); ++i)
      trace << "," << csv_num(report.ps_trace.points[k](i));
    trace << "," << csv_num(report.ps_trace.values[k]) << ","
          << csv_num(report.ps_trace.gradient_norms[k]) << "\n";
  }
  write_file(out_dir / "trace.csv", trace.str());

  json out;
  out["c_estimate"] = report.c_estimate;
  out["alpha"] = report.alpha;
  out["limiting_case"] = report.limiting_case;
  out["argmax_point"] = vec_to_json(report.argmax_point);
  out["candidate_critical"] = vec_to_json(report.candidate_critical);
  out["grad_norm_at_candidate"] = report.grad_norm_at_candidate;
  if (report.location_check) out["location_check"] = *report.location_check;
  json history_json = json::array();
  for (const auto& [iter, sup] : report.iteration_history)
    history_json.push_back({{"iteration", iter}, {"sup", sup}});
  out["iteration_history"] = history_json;

  bool monotone = true;
  for (size_t i = 1; i < report.iteration_history.size(); ++i)
    monotone = monotone && report.iteration_history[i].second <=
                               report.iteration_history[i - 1].second + 1e-12;
  out["sup_monotone"] = monotone;
  ok = monotone && report.c_estimate >= report.alpha - opts.tau_c;

  if (report.limiting_case) {
    const double tol = cfg.number_or("tolerances.localize", 1e-3);
    const Localization loc = locate_on_S(f, report, pair, tol);
    out["localized_point"] = vec_to_json(loc.point);
    out["localized_grad_norm"] = loc.grad_norm;
    out["localized_dist_to_S"] = loc.dist_to_S;
    ok = ok && loc.grad_norm <= tol && loc.dist_to_S <= tol;
  }
  return out;
}

json run_deform(const ConfigTable& cfg, uint64_t seed,
                const std::filesystem::path& out_dir, bool& ok) {
  const Functional f = functional_from(cfg);
  DeformationConfig dconf;
  dconf.c = cfg.number_or("deform.c", 0.0);
  dconf.eps_bar = cfg.number_or("deform.eps_bar", 1.0);
  dconf.delta = cfg.number_or("deform.delta", 0.5);
  dconf.b = cfg.number_or("tolerances.b", 1e-3);
  dconf.seed = seed;
  const SetPtr D = finite_set_from(cfg, "deform.D");
  const SetPtr E = finite_set_from(cfg, "deform.E");

  const DeformResult result = deform(f, D, E, dconf.c, dconf);

  std::ostringstream trace;
  trace << "t,node";
  for (int i = 0; i < f.dim(); ++i) trace << ",x" << i;
  trace << ",f,field_norm\n";
  std::mt19937_64 rng(seed);
  const auto starts = E->sample(dconf.set_sample_budget, rng,
                                dconf.sample_radius);
  auto field_fn = [&](const Vector& x) { return result.field(x); };
  for (size_t s = 0; s < starts.size(); ++s) {
    const Trajectory traj = flow(field_fn, starts[s], 1.0, dconf.ode_step);
    for (size_t k = 0; k < traj.points.size(); ++k) {
      trace << csv_num(traj.t[k]) << "," << s;
      for (int i = 0; i < f.dim(); ++i)
        trace << "," << csv_num(traj.points[k](i));
      trace << "," << csv_num(f.value(traj.points[k])) << ","
            << csv_num(traj.field_norms[k]) << "\n";
    }
  }
  write_file(out_dir / "trace.csv", trace.str());

  const double tau_flow = cfg.number_or("tolerances.tau_flow", 1e-6);
  json out;
  out["eps"] = result.eps;
  out["max_reversibility_error"] = result.max_reversibility_error;
  out["max_monotonicity_violation"] = result.max_monotonicity_violation;
  out["d_points_fixed"] = result.d_points_fixed;
  out["max_e_value_after"] = result.max_e_value_after;
  ok = result.eps > 0.0 && result.max_reversibility_error <= tau_flow &&
       result.max_monotonicity_violation <= 1e-10 && result.d_points_fixed &&
       result.max_e_value_after <= dconf.c - result.eps;
  return out;
}

json run_ekeland(const ConfigTable& cfg, uint64_t seed,
                 const std::vector<double>& eps_override, bool& ok) {
  const Functional f = functional_from(cfg);
  const Decomposition decomp = decomposition_from(cfg, f.dim());
  const PairPtr pair = pair_from(cfg, decomp);
  const std::string mode = cfg.str_or("ekeland.mode", "limiting");
  const double c_level = cfg.number_or("ekeland.c", 0.0);
  std::vector<double> eps_list = eps_override;
  if (eps_list.empty() && cfg.has("ekeland.eps"))
    eps_list = cfg.number_list("ekeland.eps");
  if (eps_list.empty()) eps_list = {0.1};

  const AdmissibleMap g = AdmissibleMap::identity(pair);
  json sweeps = json::array();
  ok = true;
  for (double eps : eps_list) {
    json entry;
    entry["eps"] = eps;
    if (mode == "limiting") {
      LimitingOptions opts;
      opts.seed = seed;
      const LocalizedPoint lp =
          limiting_case_search(f, pair, g, eps, c_level, opts);
      entry["x_eps"] = vec_to_json(lp.x_eps);
      entry["f_value"] = lp.f_value;
      entry["grad_norm"] = lp.grad_norm;
      entry["dist_to_S"] = lp.dist_to_S;
      entry["value_bound"] = {{"lower", c_level},
                              {"upper", c_level + 1.25 * eps * eps},
                              {"holds", lp.bound_checks.value_ok}};
      entry["dist_bound"] = {{"upper", 1.5 * eps},
                             {"holds", lp.bound_checks.dist_ok}};
      entry["grad_bound"] = {{"upper", 1.5 * eps},
                             {"holds", lp.bound_checks.grad_ok}};
      entry["chain"] = {{"I_ghat", lp.bound_checks.I_ghat},
                        {"I_gtilde", lp.bound_checks.I_gtilde},
                        {"lower", c_level + eps * eps},
                        {"upper", c_level + 1.25 * eps * eps},
                        {"holds", lp.bound_checks.chain_ok}};
      entry["certificate"] = {{"eps", eps * eps / 4.0},
                              {"delta", eps / 2.0},
                              {"iterations", lp.ekeland_iterations},
                              {"c_witnesses", lp.c_witnesses}};
      ok = ok && lp.bound_checks.value_ok && lp.bound_checks.dist_ok &&
           lp.bound_checks.grad_ok && lp.bound_checks.chain_ok;
    } else if (mode == "strict") {
      const MapSpace space = make_map_space_from_pair(pair);
      const StrictCasePoint u =
          strict_case_search(f, space, eps, map_point_from(g), c_level);
      entry["u"] = vec_to_json(u.u);
      entry["f_value"] = u.f_value;
      entry["grad_norm"] = u.grad_norm;
      entry["dist_to_image"] = u.dist_to_image;
      entry["checks"] = {{"value", u.value_ok},
                         {"dist", u.dist_ok},
                         {"grad", u.grad_ok}};
      ok = ok && u.value_ok && u.dist_ok && u.grad_ok;
    } else {
      throw ConfigError("ekeland.mode must be 'strict' or 'limiting'");
    }
    sweeps.push_back(entry);
  }
  json out;
  out["mode"] = mode;
  out["sweeps"] = sweeps;
  return out;
}

json run_corollaries(bool& ok) {
  ok = true;
  json out;

  {  // third critical point between the wells of (x^2 - 1)^2 + y^2
    Functional f("two_wells", 2,
                 [](const Vector& x) {
                   const double a = x(0) * x(0) - 1.0;
                   return a * a + x(1) * x(1);
                 },
                 [](const Vector& x) {
                   Vector g(2);
                   g(0) = 4.0 * x(0) * (x(0) * x(0) - 1.0);
                   g(1) = 2.0 * x(1);
                   return g;
                 });
    Vector m1(2), m2(2);
    m1 << -1.0, 0.0;
    m2 << 1.0, 0.0;
    const Vector third = pucci_serrin_third(f, m1, m2, 1e-6);
    out["third_critical_point"] = vec_to_json(third);
    ok = ok && third.norm() <= 1e-3;
  }

  {  // sphere localization on the plateau functional
    FunctionalParams params;
    params.dim = 2;
    params.plateau_radius = 2.0;
    const Functional f = make_test_functional("radial_plateau", params);
    PairParams pp;
    pp.rho = 1.0;
    Vector b(2);
    b << 1.5, 0.0;
    pp.path_b = b;
    const PairPtr pair =
        make_pair(PairKind::mp_path, Decomposition::axes(2, 1), pp, 64);
    const MinimaxReport report =
        estimate_cgamma(f, pair, AdmissibleMap::identity(pair));
    const Localization loc = locate_on_S(f, report, pair, 1e-3);
    out["sphere_localization"] = {
        {"point", vec_to_json(loc.point)},
        {"grad_norm", loc.grad_norm},
        {"radius_error", std::abs(loc.point.norm() - 1.0)}};
    ok = ok && loc.grad_norm <= 1e-6 &&
         std::abs(loc.point.norm() - 1.0) <= 1e-3;
  }
  return out;
}

}  // namespace

int run_problem(const RunArgs& args) {
  ConfigTable cfg;
  std::string mode;
  uint64_t seed = 0;
  try {
    // corollaries runs fixed built-in instances and needs no config file
    cfg = args.config_path.empty() ? ConfigTable::parse("")
                                   : ConfigTable::parse_file(args.config_path);
    mode = args.mode.empty() ? cfg.str("mode") : args.mode;
    seed = args.has_seed_override
               ? args.seed_override
               : static_cast<uint64_t>(cfg.number_or("seed", 42));
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfigError;
  }

  try {
    const std::filesystem::path out_dir(args.out_dir);
    std::filesystem::create_directories(out_dir);

    bool ok = false;
    json body;
    if (mode == "link-verify") {
      body = run_link_verify(cfg, seed, ok);
    } else if (mode == "minimax") {
      body = run_minimax(cfg, seed, out_dir, ok);
    } else if (mode == "deform") {
      body = run_deform(cfg, seed, out_dir, ok);
    } else if (mode == "ekeland") {
      body = run_ekeland(cfg, seed, args.eps_override, ok);
    } else if (mode == "corollaries") {
      body = run_corollaries(ok);
    } else {
      std::cerr << "config error: unknown mode '" << mode << "'\n";
      return kExitConfigError;
    }

    json report;
    report["mode"] = mode;
    report["seed"] = seed;
    report["results"] = body;
    report["all_checks_pass"] = ok;
    report["config_text"] = cfg.text();
    write_file(out_dir / "report.json", report.dump(2) + "\n");
    return ok ? kExitOk : kExitNumericalFailure;
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& err) {
    std::cerr << "numerical failure [" << mode << "]: " << err.what() << "\n";
    return kExitNumericalFailure;
  }
}

int verify_report(const std::string& report_path, const std::string& out_dir) {
  try {
    std::ifstream in(report_path);
    if (!in) {
      std::cerr << "config error: cannot open report '" << report_path
                << "'\n";
      return kExitConfigError;
    }
    json stored = json::parse(in);

    const std::filesystem::path tmp =
        std::filesystem::path(out_dir) / "recompute";
    std::filesystem::create_directories(tmp);
    const std::filesystem::path cfg_path = tmp / "config.echo";
    write_file(cfg_path, stored.at("config_text").get<std::string>());

    RunArgs args;
    args.config_path = cfg_path.string();
    args.mode = stored.at("mode").get<std::string>();
    args.has_seed_override = true;
    args.seed_override = stored.at("seed").get<uint64_t>();
    args.out_dir = tmp.string();
    const int code = run_problem(args);
    if (code != kExitOk && code != kExitNumericalFailure) return code;

    std::ifstream re(tmp / "report.json");
    json recomputed = json::parse(re);
    if (recomputed.at("results") != stored.at("results")) {
      std::cerr << "report verification failed: results differ from "
                   "recomputation\n";
      return kExitNumericalFailure;
    }
    std::cout << "report verified: results reproduce from the stored config\n";
    return kExitOk;
  } catch (const std::exception& err) {
    std::cerr << "report verification error: " << err.what() << "\n";
    return kExitNumericalFailure;
  }
}

}  // namespace cpt
