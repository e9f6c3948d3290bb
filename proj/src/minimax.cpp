#include "cpt/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cpt {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

GeometryBounds check_geometry_bounds(const Functional& f,
                                     const LinkingPair& pair,
                                     const SampleOptions& opts) {
  GeometryBounds out;
  std::mt19937_64 rng(opts.seed);
  out.alpha = std::numeric_limits<double>::infinity();
  for (const auto& s : pair.S->sample(opts.budget, rng, opts.radius))
    out.alpha = std::min(out.alpha, f.value(s));
  out.boundary_max = -std::numeric_limits<double>::infinity();
  for (int b : pair.mesh.boundary_nodes)
    out.boundary_max = std::max(
        out.boundary_max, f.value(pair.chart.embed(pair.mesh.nodes[b])));
  out.hypothesis_b = out.boundary_max <= out.alpha + opts.tau_b;
  return out;
}

SupResult sup_on_map(const Functional& f, const AdmissibleMap& gamma) {
  const auto& mesh = gamma.pair()->mesh;
  const NodeSup sup =
      refined_sup(mesh.cells, gamma.node_images(),
                  [&f](const Vector& x) { return f.value(x); }, 12);
  SupResult out;
  out.value = sup.value;
  out.node_max = sup.node_max;
  out.node = sup.node;
  out.argmax_image = sup.argmax_image;
  return out;
}

namespace {

Vector argmax_domain_point(const AdmissibleMap& gamma, const NodeSup& sup) {
  const auto& pair = *gamma.pair();
  if (sup.cell < 0) return pair.chart.embed(pair.mesh.nodes[sup.node]);
  const auto& cell = pair.mesh.cells[sup.cell];
  Vector local = Vector::Zero(pair.mesh.dim);
  for (size_t i = 0; i < cell.size(); ++i)
    local += sup.argmax_barycentric[i] * pair.mesh.nodes[cell[i]];
  return pair.chart.embed(local);
}

}  // namespace

MinimaxReport estimate_cgamma(const Functional& f, PairPtr pair,
                              const AdmissibleMap& gamma0,
                              const MinimaxOptions& opts) {
  require(pair != nullptr, "estimate_cgamma: null pair");
  require(gamma0.pair() == pair, "estimate_cgamma: map built on another pair");

  const GeometryBounds bounds = check_geometry_bounds(f, *pair, opts.sampling);
  if (!bounds.hypothesis_b) {
    std::ostringstream msg;
    msg << "estimate_cgamma: boundary values exceed the lower bound on S "
           "(max boundary "
        << bounds.boundary_max << " > alpha " << bounds.alpha
        << "); hypothesis (b) fails";
    throw std::invalid_argument(msg.str());
  }

  MinimaxReport report{0.0,    bounds.alpha, {}, gamma0, Vector(), Vector(),
                       0.0,    false,        {}, MinimaxStop::max_iters,
                       PalaisSmaleTrace{}};

  AdmissibleMap gamma = gamma0;
  std::vector<Vector> trace_points;
  NodeSup sup_detail;

  auto refined = [&](const AdmissibleMap& g) {
    return refined_sup(pair->mesh.cells, g.node_images(),
                       [&f](const Vector& x) { return f.value(x); }, 12);
  };

  sup_detail = refined(gamma);
  double sup_value = sup_detail.value;
  report.iteration_history.emplace_back(0, sup_value);
  trace_points.push_back(sup_detail.argmax_image);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    if (sup_value - bounds.alpha <= opts.tau_c) {
      report.stop = MinimaxStop::limiting;
      break;
    }

    // near-critical detection on the current band
    double eps_bar = (sup_value - bounds.alpha) / 2.0;
    eps_bar = std::min(eps_bar, (sup_value - bounds.boundary_max) / 2.0);
    std::vector<Vector> band;
    for (const auto& img : gamma.node_images())
      if (std::abs(f.value(img) - sup_value) <= eps_bar) band.push_back(img);
    band.push_back(sup_detail.argmax_image);
    double band_min_grad = std::numeric_limits<double>::infinity();
    for (const auto& x : band)
      band_min_grad = std::min(band_min_grad, f.gradient(x).norm());
    if (band_min_grad < opts.b) {
      report.stop = MinimaxStop::near_critical;
      break;
    }

    // classical deformation, shrinking the band on refusal or stall
    bool advanced = false;
    while (eps_bar >= opts.eps_bar_min) {
      ClassicalDeformation cd;
      try {
        std::vector<Vector> sample = gamma.node_images();
        sample.push_back(sup_detail.argmax_image);
        cd = classical_deform(f, sup_value, eps_bar, sample, opts.b,
                              opts.ode_step);
      } catch (const DeformationRefused&) {
        eps_bar /= 2.0;
        continue;
      }
      std::vector<Vector> new_images;
      new_images.reserve(gamma.node_images().size());
      for (size_t i = 0; i < gamma.node_images().size(); ++i) {
        if (pair->mesh.is_boundary(static_cast<int>(i))) {
          new_images.push_back(pair->chart.embed(pair->mesh.nodes[i]));
        } else {
          new_images.push_back(
              flow(cd.field, gamma.node_images()[i], 1.0, opts.ode_step)
                  .endpoint());
        }
      }
      AdmissibleMap next = gamma.with_images(std::move(new_images));
      const NodeSup next_detail = refined(next);
      if (next_detail.value <= sup_value - cd.eps + 1e-9) {
        gamma = std::move(next);
        sup_detail = next_detail;
        sup_value = next_detail.value;
        advanced = true;
        break;
      }
      eps_bar /= 2.0;  // PL interpolation ate the descent; tighten the band
    }
    if (!advanced) {
      report.stop = band_min_grad < opts.b ? MinimaxStop::near_critical
                                           : MinimaxStop::stalled;
      break;
    }
    report.iteration_history.emplace_back(iter + 1, sup_value);
    trace_points.push_back(sup_detail.argmax_image);
  }

  report.c_estimate = sup_value;
  report.best_map = gamma;
  report.argmax_point = argmax_domain_point(gamma, sup_detail);
  const PolishResult polished =
      polish_critical_point(f, sup_detail.argmax_image, 1e-12);
  report.candidate_critical = polished.point;
  report.grad_norm_at_candidate = polished.grad_norm;
  report.limiting_case =
      std::abs(report.c_estimate - bounds.alpha) <= opts.tau_c;
  if (report.limiting_case)
    report.location_check = pair->S->distance(report.candidate_critical);
  report.ps_trace = make_trace(f, std::move(trace_points), report.c_estimate);
  return report;
}

Localization locate_on_S(const Functional& f, const MinimaxReport& report,
                         PairPtr pair, double tol) {
  require(pair != nullptr, "locate_on_S: null pair");
  require(report.limiting_case,
          "locate_on_S: report is not in the limiting case");
  require(tol > 0.0, "locate_on_S: tol must be positive");

  // eps small enough that the (3/2) eps bounds land within tol, and inside
  // the admissible range of the limiting pipeline
  const double eps_cap = std::min(1.0, pair->link_margin) / 2.0;
  const double eps = std::min(0.66 * tol, 0.98 * eps_cap);

  const LocalizedPoint lp = limiting_case_search(
      f, pair, report.best_map, eps, report.c_estimate);

  Localization out;
  out.point = lp.x_eps;
  out.f_value = lp.f_value;
  out.grad_norm = lp.grad_norm;
  out.dist_to_S = lp.dist_to_S;
  out.certificate = lp;

  // local polish, accepted only while it stays near S
  const PolishResult polished = polish_critical_point(f, lp.x_eps, 1e-12);
  const double pol_dist = pair->S->distance(polished.point);
  if (polished.grad_norm <= lp.grad_norm && pol_dist <= tol) {
    out.point = polished.point;
    out.grad_norm = polished.grad_norm;
    out.f_value = f.value(polished.point);
    out.dist_to_S = pol_dist;
  }
  return out;
}

Vector pucci_serrin_third(const Functional& f, const Vector& m1,
                          const Vector& m2, double tol) {
  require(m1.size() == f.dim() && m2.size() == f.dim(),
          "pucci_serrin_third: dimension mismatch");
  require((m1 - m2).norm() > 1e-8,
          "pucci_serrin_third: the two minima coincide");

  // both inputs must be genuine local minima
  const double fd_step = 1e-5;
  for (const Vector& m : {m1, m2}) {
    require(f.gradient(m).norm() <= 1e-8,
            "pucci_serrin_third: input is not critical");
    const int n = f.dim();
    Matrix hess(n, n);
    for (int j = 0; j < n; ++j) {
      Vector xp = m, xm = m;
      xp(j) += fd_step;
      xm(j) -= fd_step;
      hess.col(j) = (f.gradient(xp) - f.gradient(xm)) / (2.0 * fd_step);
    }
    const Matrix sym = 0.5 * (hess + hess.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    require(eig.eigenvalues().minCoeff() > 1e-8,
            "pucci_serrin_third: input is not a local minimum (Hessian not "
            "positive definite)");
  }

  // mountain-pass geometry between the wells, shifted so m1 is the origin
  const Functional shifted = f.shifted(m1);
  const Vector e = m2 - m1;
  PairParams params;
  params.path_b = e;
  params.rho = 0.5 * e.norm();
  const auto pair = make_pair(PairKind::mp_path,
                              Decomposition::axes(f.dim(), f.dim() - 1),
                              params, 64);
  const MinimaxReport report =
      estimate_cgamma(shifted, pair, AdmissibleMap::identity(pair));

  Vector third;
  if (report.limiting_case) {
    const Localization loc = locate_on_S(shifted, report, pair, tol);
    require(loc.grad_norm <= tol,
            "pucci_serrin_third: localization did not reach the gradient "
            "tolerance");
    third = loc.point + m1;
  } else {
    require(report.grad_norm_at_candidate <= tol,
            "pucci_serrin_third: driver candidate did not reach the gradient "
            "tolerance");
    third = report.candidate_critical + m1;
  }
  require((third - m1).norm() >= 10.0 * tol &&
              (third - m2).norm() >= 10.0 * tol,
          "pucci_serrin_third: third point collapsed into a minimum");
  return third;
}

}  // namespace cpt
