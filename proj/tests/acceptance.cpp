// Acceptance suite: one pass/fail line per criterion, with wall times checked
// against the stated budgets. Exit code 0 iff every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cpt/deformation.hpp"
#include "cpt/ekeland.hpp"
#include "cpt/functional.hpp"
#include "cpt/geometry.hpp"
#include "cpt/minimax.hpp"

using namespace cpt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

// ---- 1: gradient consistency over the functional library -------------------

Outcome gradient_consistency() {
  std::mt19937_64 rng(20240101);
  Outcome out;
  out.pass = true;
  std::ostringstream detail;
  for (const char* name :
       {"double_well", "saddle", "exp1d", "radial_plateau", "bvp_quartic"}) {
    const Functional f = make_test_functional(name);
    const GradientCheck check = check_gradient_consistency(f, 100, rng);
    out.pass = out.pass && check.pass;
    detail << name << " rel_err " << check.max_rel_err << "; ";
  }
  out.detail = detail.str();
  return out;
}

// ---- 2: degree agrees with the determinant-sign oracle ---------------------

Outcome degree_oracle() {
  Outcome out;
  out.pass = true;
  std::mt19937_64 rng(77001);
  std::normal_distribution<double> gauss;
  int checked = 0;
  for (int d : {1, 2, 3}) {
    const Mesh mesh = make_ball_mesh(d, 1.0, d == 3 ? 6 : 16);
    auto values_of = [&](const Matrix& A, const Vector& b) {
      std::vector<Vector> values;
      values.reserve(mesh.nodes.size());
      for (const auto& node : mesh.nodes) values.push_back(A * node + b);
      return values;
    };
    const Matrix id = Matrix::Identity(d, d);
    const Vector zero = Vector::Zero(d);
    out.pass = out.pass &&
               brouwer_degree(mesh, values_of(id, zero), zero).degree == 1;
    out.pass = out.pass &&
               brouwer_degree(mesh, values_of(-id, zero), zero).degree ==
                   (d % 2 == 0 ? 1 : -1);
    for (int trial = 0; trial < 50; ++trial) {
      Matrix A(d, d);
      double det = 0.0;
      do {
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) A(i, j) = gauss(rng);
        det = A.determinant();
      } while (std::abs(det) < 1e-3);
      Vector b(d), u0(d);
      for (int i = 0; i < d; ++i) {
        b(i) = gauss(rng);
        u0(i) = 0.3 * gauss(rng);
      }
      if (u0.norm() > 0.6) u0 *= 0.6 / u0.norm();
      const Vector y = A * u0 + b;
      const int degree = brouwer_degree(mesh, values_of(A, b), y).degree;
      out.pass = out.pass && degree == (det > 0.0 ? 1 : -1);
      ++checked;
    }
  }
  out.detail = std::to_string(checked) + " affine maps, identity and mirror";
  return out;
}

// ---- 3: linking verification over the three degree geometries --------------

Outcome linking_verification() {
  Outcome out;
  out.pass = true;
  PairParams sp;
  sp.R = 2.0;
  const PairPtr saddle =
      make_pair(PairKind::saddle, Decomposition::axes(2, 1), sp, 48);
  PairParams cp;
  cp.rho = 1.0;
  cp.R1 = 2.0;
  cp.R2 = 1.0;
  const PairPtr cylinder = make_pair(
      PairKind::mp_cylinder, Decomposition::axes(3, 1, true), cp, 32);
  PairParams vp;
  vp.rho = 1.0;
  vp.R = 2.0;
  const PairPtr silva =
      make_pair(PairKind::silva, Decomposition::axes(3, 1, true), vp, 32);

  std::mt19937_64 rng(555001);
  double worst_residual = 0.0;
  for (const PairPtr& pair : {saddle, cylinder, silva}) {
    for (int trial = 0; trial < 20; ++trial) {
      const AdmissibleMap gamma =
          make_perturbed_identity(pair, pair->link_margin / 4.0, rng);
      const LinkingReport rep = verify_linking(gamma, *pair);
      bool degrees_one = rep.conclusive && rep.linked;
      for (const auto& s : rep.steps) degrees_one = degrees_one && s.degree == 1;
      out.pass = out.pass && degrees_one && rep.witness.residual <= 1e-3;
      worst_residual = std::max(worst_residual, rep.witness.residual);
    }
  }
  std::ostringstream detail;
  detail << "60 maps, worst residual " << worst_residual;
  out.detail = detail.str();
  return out;
}

// ---- 4: deformation lemma contract on the saddle instance ------------------

Outcome deformation_contract() {
  const Functional f = make_test_functional("saddle");
  const SetPtr D = make_finite_set({vec2(1, 0), vec2(-1, 0)});
  const SetPtr E = make_finite_set({vec2(0, 1), vec2(0, -1)});
  DeformationConfig config;
  config.eps_bar = 3.0;
  config.delta = 0.5;
  const DeformResult res = deform(f, D, E, 0.0, config);

  Outcome out;
  out.pass = res.eps > 0.0 && res.max_reversibility_error <= 1e-6 &&
             res.max_monotonicity_violation <= 1e-10 && res.d_points_fixed &&
             res.max_e_value_after <= 0.0 - res.eps;
  std::ostringstream detail;
  detail << "eps " << res.eps << ", reversibility "
         << res.max_reversibility_error << ", descent violation "
         << res.max_monotonicity_violation << ", max f(eta(1,E)) "
         << res.max_e_value_after;
  out.detail = detail.str();
  return out;
}

// ---- 5: mountain pass on the double well -----------------------------------

Outcome mountain_pass() {
  const Functional f = make_test_functional("double_well");
  PairParams params;
  params.rho = 0.5;
  params.path_a = vec2(-1, 0);
  params.path_b = vec2(1, 0);
  const PairPtr pair =
      make_pair(PairKind::mp_path, Decomposition::axes(2, 1), params, 64);
  const MinimaxReport report =
      estimate_cgamma(f, pair, AdmissibleMap::identity(pair));

  Outcome out;
  out.pass = std::abs(report.c_estimate) <= 1e-4 &&
             (report.candidate_critical - vec2(0, 0)).norm() <= 1e-3 &&
             report.grad_norm_at_candidate <= 1e-5;
  std::ostringstream detail;
  detail << "c " << report.c_estimate << ", candidate ("
         << report.candidate_critical(0) << ", " << report.candidate_critical(1)
         << "), grad " << report.grad_norm_at_candidate;
  out.detail = detail.str();
  return out;
}

// ---- 6: saddle point with the limiting-case localization -------------------

Outcome saddle_point() {
  const Functional f = make_test_functional("saddle");
  PairParams params;
  params.R = 2.0;
  const PairPtr pair =
      make_pair(PairKind::saddle, Decomposition::axes(2, 1), params, 64);
  const MinimaxReport report =
      estimate_cgamma(f, pair, AdmissibleMap::identity(pair));

  Outcome out;
  out.pass = std::abs(report.c_estimate) <= 1e-4 && report.limiting_case;
  double dist_to_v1 = -1.0;
  if (out.pass) {
    const Localization loc = locate_on_S(f, report, pair, 1e-3);
    dist_to_v1 = loc.dist_to_S;
    out.pass = out.pass && dist_to_v1 <= 1e-3;
  }
  std::ostringstream detail;
  detail << "c " << report.c_estimate << ", limiting "
         << (report.limiting_case ? "yes" : "no") << ", dist to V1 "
         << dist_to_v1;
  out.detail = detail.str();
  return out;
}

// ---- 7: localized almost-critical points over the eps sweep ----------------

Outcome limiting_bounds_sweep() {
  Outcome out;
  out.pass = true;
  std::ostringstream detail;
  const double slack = 1e-8;

  auto run_sweep = [&](const char* label, const Functional& f,
                       const PairPtr& pair, double c) {
    for (double eps : {0.2, 0.1, 0.05}) {
      const LocalizedPoint lp = limiting_case_search(
          f, pair, AdmissibleMap::identity(pair), eps, c);
      const bool value_ok =
          lp.f_value >= c - slack && lp.f_value <= c + 1.25 * eps * eps + slack;
      const bool dist_ok = lp.dist_to_S <= 1.5 * eps + slack;
      const bool grad_ok = lp.grad_norm <= 1.5 * eps + slack;
      const bool chain_ok =
          lp.bound_checks.I_ghat >= c + eps * eps - slack &&
          lp.bound_checks.I_ghat <= lp.bound_checks.I_gtilde + slack &&
          lp.bound_checks.I_gtilde <= c + 1.25 * eps * eps + slack;
      if (!(value_ok && dist_ok && grad_ok && chain_ok)) {
        out.pass = false;
        detail << label << " eps " << eps << " FAILED; ";
      }
    }
    detail << label << " ok; ";
  };

  {
    PairParams params;
    params.R = 2.0;
    const PairPtr pair =
        make_pair(PairKind::saddle, Decomposition::axes(2, 1), params, 128);
    run_sweep("saddle", make_test_functional("saddle"), pair, 0.0);
  }
  {
    FunctionalParams fp;
    fp.plateau_radius = 2.0;
    PairParams params;
    params.rho = 1.0;
    params.path_b = vec2(1.5, 0);
    const PairPtr pair =
        make_pair(PairKind::mp_path, Decomposition::axes(2, 1), params, 64);
    run_sweep("radial_plateau", make_test_functional("radial_plateau", fp),
              pair, 0.0);
  }
  out.detail = detail.str();
  return out;
}

// ---- 8: Ekeland certificates on seeded grid spaces -------------------------

Outcome ekeland_certificates() {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Outcome out;
  out.pass = true;
  long total_checks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    GridSpace grid;
    std::vector<double> values;
    const int npts = 50 + static_cast<int>(unif(rng) * 150);
    const double a = 2.0 * unif(rng) - 1.0;
    const double b = 2.0 * unif(rng) - 1.0;
    const double w = 1.0 + 4.0 * unif(rng);
    for (int k = 0; k < npts; ++k) {
      const double x = -5.0 + 10.0 * k / (npts - 1);
      Vector p(1);
      p << x;
      grid.points.push_back(p);
      values.push_back(std::sin(w * x) * a + b * x * x + 0.3 * x * a);
    }
    const double inf = *std::min_element(values.begin(), values.end());
    const double eps = 0.05 + unif(rng);
    const double delta = 0.2 + 2.0 * unif(rng);
    int start = static_cast<int>(unif(rng) * npts);
    while (values[start] > inf + eps)
      start = static_cast<int>(unif(rng) * npts);

    const auto cert = ekeland_point_on_grid(grid, values, start, eps, delta);
    bool ok = cert.a_holds && cert.b_holds;
    ok = ok && values[cert.y] <= values[start];
    ok = ok && grid.distance(start, cert.y) <= delta;
    for (int z = 0; z < npts; ++z) {
      if (z == cert.y) continue;
      ok = ok &&
           values[z] > cert.value - (eps / delta) * grid.distance(z, cert.y);
      ++total_checks;
    }
    out.pass = out.pass && ok;
  }
  out.detail = "100 instances, " + std::to_string(total_checks) +
               " exhaustive slope checks";
  return out;
}

// ---- 9: min-norm descent against the discretized min-max oracle ------------

Outcome min_norm_oracle() {
  std::mt19937_64 rng(90210);
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<int> msize(1, 6), dsize(1, 3);
  Outcome out;
  out.pass = true;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = msize(rng), d = dsize(rng);
    std::vector<Vector> grads;
    for (int i = 0; i < m; ++i) {
      Vector g(d);
      for (int j = 0; j < d; ++j) g(j) = gauss(rng);
      grads.push_back(g);
    }
    const MinNormDescent mnd = min_norm_descent(grads);

    // oracle: per-node direction nets (the unit fields decouple), measures on
    // the simplex touch only the vertices of the linear program
    std::vector<Vector> net;
    if (d == 1) {
      Vector plus(1), minus(1);
      plus << 1.0;
      minus << -1.0;
      net = {plus, minus};
    } else if (d == 2) {
      for (int k = 0; k < 640; ++k) {
        const double th = 2.0 * M_PI * k / 640;
        net.push_back(vec2(std::cos(th), std::sin(th)));
      }
    } else {
      for (int a = 0; a < 80; ++a)
        for (int b = 0; b < 40; ++b) {
          const double th = 2.0 * M_PI * a / 80, ph = M_PI * b / 39;
          Vector v(3);
          v << std::cos(th) * std::sin(ph), std::sin(th) * std::sin(ph),
              std::cos(ph);
          net.push_back(v);
        }
    }
    double best = -std::numeric_limits<double>::infinity();
    int arg = -1;
    for (int i = 0; i < m; ++i) {
      double per_node = std::numeric_limits<double>::infinity();
      for (const auto& h : net) per_node = std::min(per_node, grads[i].dot(h));
      if (per_node > best) {
        best = per_node;
        arg = i;
      }
    }
    const double oracle_bound = -best;
    worst_gap = std::max(worst_gap, std::abs(mnd.bound - oracle_bound));
    out.pass = out.pass && std::abs(mnd.bound - oracle_bound) <= 1e-2 &&
               mnd.t0 == arg;
  }
  std::ostringstream detail;
  detail << "100 instances, worst oracle gap " << worst_gap;
  out.detail = detail.str();
  return out;
}

// ---- 10: the two corollaries ------------------------------------------------

Outcome corollaries() {
  Outcome out;
  out.pass = true;
  std::ostringstream detail;

  {  // third critical point of (x^2 - 1)^2 + y^2
    const Functional f("two_wells", 2,
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
    const Vector third = pucci_serrin_third(f, vec2(-1, 0), vec2(1, 0), 1e-6);
    out.pass = out.pass && third.norm() <= 1e-3;
    detail << "third point at (" << third(0) << ", " << third(1) << "); ";
  }

  {  // sphere localization on the plateau instance
    FunctionalParams fp;
    fp.plateau_radius = 2.0;
    const Functional f = make_test_functional("radial_plateau", fp);
    PairParams params;
    params.rho = 1.0;
    params.path_b = vec2(1.5, 0);
    const PairPtr pair =
        make_pair(PairKind::mp_path, Decomposition::axes(2, 1), params, 64);
    const MinimaxReport report =
        estimate_cgamma(f, pair, AdmissibleMap::identity(pair));
    const Localization loc = locate_on_S(f, report, pair, 1e-3);
    out.pass = out.pass && loc.grad_norm <= 1e-6 &&
               std::abs(loc.point.norm() - 1.0) <= 1e-3;
    detail << "sphere point radius " << loc.point.norm() << ", grad "
           << loc.grad_norm;
  }
  out.detail = detail.str();
  return out;
}

// ---- 11: strict-case almost-critical point ----------------------------------

Outcome strict_case() {
  const Functional f = make_test_functional("double_well");
  PairParams params;
  params.rho = 0.5;
  params.path_a = vec2(-1, 0);
  params.path_b = vec2(1, 0);
  const PairPtr pair =
      make_pair(PairKind::mp_path, Decomposition::axes(2, 1), params, 64);
  const MapSpace space = make_map_space_from_pair(pair);
  const MapPoint p = map_point_from(AdmissibleMap::identity(pair));
  const double eps = 0.25, c = 0.0;
  const StrictCasePoint u = strict_case_search(f, space, eps, p, c);

  Outcome out;
  out.pass = u.value_ok && u.dist_ok && u.grad_ok &&
             u.f_value >= c - eps - 1e-9 && u.dist_to_image <= 0.5 &&
             u.grad_norm <= 0.5;
  std::ostringstream detail;
  detail << "u = (" << u.u(0) << ", " << u.u(1) << "), f " << u.f_value
         << ", grad " << u.grad_norm << ", dist to p(K) " << u.dist_to_image;
  out.detail = detail.str();
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* label;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient consistency", 5.0, gradient_consistency},
      {2, "degree oracle equivalence", 30.0, degree_oracle},
      {3, "linking verification", 60.0, linking_verification},
      {4, "deformation lemma contract", 60.0, deformation_contract},
      {5, "mountain pass", 60.0, mountain_pass},
      {6, "saddle point", 60.0, saddle_point},
      {7, "limiting-case bounds sweep", 120.0, limiting_bounds_sweep},
      {8, "ekeland certificates", 30.0, ekeland_certificates},
      {9, "min-norm descent oracle", 60.0, min_norm_oracle},
      {10, "corollaries", 60.0, corollaries},
      {11, "strict-case bounds", 60.0, strict_case},
  };

  bool all_pass = true;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& err) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + err.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const bool in_budget = seconds < criterion.budget_s;
    const bool pass = outcome.pass && in_budget;
    all_pass = all_pass && pass;
    std::printf("%s  criterion %2d: %-28s [%6.2fs < %5.0fs]  %s\n",
                pass ? "PASS" : "FAIL", criterion.id, criterion.label, seconds,
                criterion.budget_s, outcome.detail.c_str());
  }
  std::printf("%s\n", all_pass ? "ALL CRITERIA PASS" : "CRITERIA FAILED");
  return all_pass ? 0 : 1;
}
