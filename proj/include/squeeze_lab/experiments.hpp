// Batch experiments behind the command-line driver. Each command is a pure
// function of its configuration: per-trial seeds are derived from the root
// seed and rows are stored by trial index, so output never depends on threads.
#pragma once

#include "squeeze_lab/core.hpp"
#include "squeeze_lab/dist.hpp"
#include "squeeze_lab/linear.hpp"
#include "squeeze_lab/maps.hpp"
#include "squeeze_lab/parallel.hpp"
#include "squeeze_lab/random.hpp"
#include "squeeze_lab/report.hpp"
#include "squeeze_lab/volume.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace squeeze::experiments {

using report::Json;
using report::Table;

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitInternal = 70;

/// Raised for configurations the commands cannot run; maps to exit code 64.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  std::string command;
  int dim = 6;
  int k = 2;
  double radius = 1.0;
  double eps = 0.3;
  std::uint64_t seed = 7;
  long long trials = 1000;
  double tol = 1e-9;
  int cells = 0;
  long long samples = static_cast<long long>(kDefaultSamples);
  std::string out;
  std::string format = "csv";
  bool no_timestamp = false;
  double scale = kDefaultSamplingScale;
  bool unitary = false;        // linear
  double scale_radius = 2.0;   // squeeze
  std::string map = "linear";  // estimate
  std::string mode = "single"; // estimate

  Json to_json() const {
    Json j;
    j["command"] = command;
    j["dim"] = dim;
    j["k"] = k;
    j["radius"] = radius;
    j["eps"] = eps;
    j["seed"] = seed;
    j["trials"] = trials;
    j["tol"] = tol;
    j["cells"] = cells;
    j["samples"] = samples;
    j["format"] = format;
    j["scale"] = scale;
    if (command == "linear") j["unitary"] = unitary;
    if (command == "squeeze") j["scale_radius"] = scale_radius;
    if (command == "estimate") {
      j["map"] = map;
      j["mode"] = mode;
    }
    return j;
  }
};

/// Extra artifact written next to the main table.
struct Artifact {
  std::string filename;
  std::string content;
  bool timestamped = false;
};

struct CommandResult {
  int exit_code = kExitOk;
  Table table;
  Json summary = Json::object();
  std::vector<Artifact> artifacts;
  std::vector<std::string> witnesses;
};

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

inline void check_common(const ExperimentConfig& c) {
  require(c.trials >= 0, "--trials must be non-negative");
  require(c.tol > 0.0, "--tol must be positive");
  require(c.radius > 0.0, "--radius must be positive");
  require(c.format == "csv" || c.format == "json", "--format must be csv or json");
  require(c.cells >= 0, "--cells must be non-negative");
  require(c.samples >= 0, "--samples must be non-negative");
}

inline void check_phase_space(const ExperimentConfig& c) {
  require(c.dim >= 4 && c.dim <= 16 && c.dim % 2 == 0, "--dim must be even and in [4, 16]");
  require(c.k >= 1 && 2 * c.k <= c.dim, "--k must satisfy 1 <= k <= dim/2");
}

inline Json check_row(Table& table, const std::string& name, double value, double threshold, bool passed) {
  table.add_row({name, value, threshold, passed});
  Json j;
  j["value"] = report::to_json(value);
  j["threshold"] = report::to_json(threshold);
  j["passed"] = passed;
  return j;
}

inline Json estimate_to_json(const VolumeEstimate& e) {
  Json j;
  j["value"] = e.value;
  j["lower"] = e.lower;
  j["upper"] = e.upper;
  j["cells_per_axis"] = e.cells_per_axis;
  j["samples"] = e.samples;
  j["converged"] = e.converged;
  j["coarse_value"] = e.coarse_value;
  j["truncated"] = e.truncated;
  return j;
}

inline EstimatorOptions estimator_options(const ExperimentConfig& c, std::uint64_t seed) {
  EstimatorOptions o;
  o.cells_per_axis = c.cells;
  o.samples = static_cast<std::size_t>(c.samples);
  o.seed = seed;
  return o;
}

inline std::string seed_string(std::uint64_t s) { return std::to_string(s); }

}  // namespace detail

// ---------------------------------------------------------------------------

/// Random (Phi, V) pairs: volume ratio >= 1 - tol for every trial.
inline CommandResult cmd_linear(const ExperimentConfig& c) {
  detail::check_common(c);
  detail::check_phase_space(c);
  detail::require(c.scale >= 0.0, "--scale must be non-negative");

  struct Row {
    std::uint64_t seed;
    ProjectedVolumeReport rep;
    bool violation;
  };
  const auto n = static_cast<std::size_t>(c.trials);
  std::vector<Row> rows(n);
  parallel_for(n, [&](std::size_t t) {
    const std::uint64_t s = derive_seed(c.seed, t);
    const SymplecticMatrix phi = c.unitary ? random_unitary_symplectic(c.dim, derive_seed(s, 0))
                                           : random_symplectic(c.dim, c.scale, derive_seed(s, 0));
    const Subspace v = random_complex_subspace(c.dim, c.k, derive_seed(s, 1));
    ProjectedVolumeReport rep = linear_nonsqueezing_verify(phi, v, {c.tol, 1e-8});
    bool violation = !rep.inequality_holds;
    if (c.unitary) {
      violation = violation || std::abs(rep.volume_ratio - 1.0) > 1e-8 || rep.pullback_complexity_residual > 1e-8;
    }
    rows[t] = {s, std::move(rep), violation};
  });

  CommandResult r;
  r.table = Table({"trial", "seed", "volume_ratio", "pullback_residual", "equality_flag"});
  std::size_t violations = 0, equalities = 0, inconsistent = 0;
  double min_ratio = INFINITY, max_ratio = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& row = rows[t];
    r.table.add_row({static_cast<std::int64_t>(t), detail::seed_string(row.seed), row.rep.volume_ratio,
                     row.rep.pullback_complexity_residual, row.rep.equality_flag});
    min_ratio = std::min(min_ratio, row.rep.volume_ratio);
    max_ratio = std::max(max_ratio, row.rep.volume_ratio);
    equalities += row.rep.equality_flag;
    inconsistent += !row.rep.characterization_consistent;
    if (row.violation) {
      ++violations;
      r.witnesses.push_back(detail::seed_string(row.seed));
    }
  }
  r.summary["trials"] = n;
  r.summary["violations"] = violations;
  r.summary["min_volume_ratio"] = report::to_json(n ? min_ratio : NAN);
  r.summary["max_volume_ratio"] = report::to_json(n ? max_ratio : NAN);
  r.summary["equality_count"] = equalities;
  r.summary["characterization_mismatches"] = inconsistent;
  r.exit_code = violations ? kExitViolation : kExitOk;
  return r;
}

// ---------------------------------------------------------------------------

/// Random 2k-tuples and complex-span 2k-tuples: |Omega^k| <= k! |wedge|, with
/// equality on complex spans.
inline CommandResult cmd_wirtinger(const ExperimentConfig& c) {
  detail::check_common(c);
  detail::check_phase_space(c);
  detail::require(c.k <= kMaxPfaffianOrder / 2, "--k must be at most 6");

  struct Row {
    std::uint64_t seed;
    bool complex_span;
    WirtingerReport rep;
    bool violation;
  };
  const auto n = static_cast<std::size_t>(c.trials);
  std::vector<Row> rows(2 * n);
  parallel_for(2 * n, [&](std::size_t i) {
    const bool complex_span = i >= n;
    const std::uint64_t s = derive_seed(c.seed, i);
    SplitMix64 rng(s);
    Matrix tuple;
    if (complex_span) {
      const Subspace w = random_complex_subspace(c.dim, c.k, derive_seed(s, 1));
      Matrix mix = gaussian_matrix(rng, 2 * c.k, 2 * c.k);
      mix += 2.0 * Matrix::Identity(2 * c.k, 2 * c.k);
      tuple = w.basis() * mix;
    } else {
      tuple = gaussian_matrix(rng, c.dim, 2 * c.k);
    }
    WirtingerReport rep = wirtinger_check(tuple);
    bool violation = !rep.degenerate && rep.gap < -c.tol * rep.rhs;
    if (complex_span) violation = violation || rep.degenerate || rep.gap > c.tol * rep.rhs;
    rows[i] = {s, complex_span, rep, violation};
  });

  CommandResult r;
  r.table = Table({"trial", "kind", "seed", "lhs", "rhs", "gap", "span_residual"});
  std::size_t violations = 0;
  double min_rel_gap = INFINITY, max_complex_rel_gap = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    r.table.add_row({static_cast<std::int64_t>(i), std::string(row.complex_span ? "complex" : "random"),
                     detail::seed_string(row.seed), row.rep.lhs, row.rep.rhs, row.rep.gap,
                     row.rep.span_complexity_residual});
    if (!row.rep.degenerate) {
      const double rel = row.rep.gap / row.rep.rhs;
      min_rel_gap = std::min(min_rel_gap, rel);
      if (row.complex_span) max_complex_rel_gap = std::max(max_complex_rel_gap, std::abs(rel));
    }
    if (row.violation) {
      ++violations;
      r.witnesses.push_back(detail::seed_string(row.seed));
    }
  }
  r.summary["random_tuples"] = n;
  r.summary["complex_tuples"] = n;
  r.summary["violations"] = violations;
  r.summary["min_relative_gap"] = report::to_json(n ? min_rel_gap : NAN);
  r.summary["max_complex_relative_gap"] = max_complex_rel_gap;
  r.exit_code = violations ? kExitViolation : kExitOk;
  return r;
}

// ---------------------------------------------------------------------------

/// The shear built from the bump profile: slope bound, symplecticity, identity
/// outside the support, disjointness bounds, Hamiltonian origin and scaling.
inline CommandResult cmd_squeeze(const ExperimentConfig& c) {
  detail::check_common(c);
  detail::require(c.k == 1 || c.k == 2, "--k must be 1 or 2 for the shear in R^4");
  detail::require(c.scale_radius > 0.0, "--scale-radius must be positive");
  std::optional<BumpProfile> made;
  try {
    made = BumpProfile::make(c.radius, c.eps);
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
  const BumpProfile profile = *made;
  const SmoothMap shear = guth_shear(profile);
  const double r = c.radius;

  CommandResult r_;
  auto& out = r_;
  out.table = Table({"check", "value", "threshold", "passed"});
  Json checks = Json::object();
  bool all = true;
  auto record = [&](const std::string& name, double value, double threshold, bool passed) {
    checks[name] = detail::check_row(out.table, name, value, threshold, passed);
    all = all && passed;
    if (!passed) out.witnesses.push_back(name);
  };

  // slope bound on a dense grid over the support
  double sup_slope = 0.0;
  constexpr int kGrid = 100000;
  for (int i = 0; i <= kGrid; ++i) {
    const double t = -2.0 * r + 4.0 * r * i / kGrid;
    sup_slope = std::max(sup_slope, std::abs(profile.derivative(t)));
  }
  record("sup_chi_prime", sup_slope, 1.5, sup_slope <= 1.5);
  record("chi_at_zero", profile.value(0.0), 2.0 * r, profile.value(0.0) == 2.0 * r);
  const double tail = std::max(std::abs(profile.value(2.0 * r)), std::abs(profile.value(-2.0 * r)));
  record("chi_at_2R", tail, 0.0, tail == 0.0);

  const auto points = static_cast<std::size_t>(c.trials);
  const std::size_t residual_points = std::min<std::size_t>(points, 10000);
  double worst_residual = 0.0, worst_identity = 0.0;
  SplitMix64 rng(derive_seed(c.seed, 1));
  for (std::size_t i = 0; i < residual_points; ++i) {
    Vector x(4);
    for (int a = 0; a < 4; ++a) x(a) = uniform(rng, -2.0 * r, 2.0 * r);
    worst_residual = std::max(worst_residual, symplectic_residual(shear, x));
    Vector y = x;
    y(2) = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * uniform(rng, profile.support_edge(), 3.0 * r);
    worst_identity = std::max(worst_identity, (shear(y) - y).norm());
  }
  record("symplectic_residual", worst_residual, c.tol, worst_residual <= c.tol);
  record("identity_outside_support", worst_identity, 0.0, worst_identity == 0.0);

  if (points > 0) {
    const DisjointnessReport dis = disjointness_bounds_verify(profile, points, derive_seed(c.seed, 2));
    record("disjointness_violations", static_cast<double>(dis.violations), 0.0, dis.passed());
    record("margin_a", dis.worst_margin_a, 0.0, dis.worst_margin_a > 0.0);
    if (dis.case_b_samples > 0) record("margin_b", dis.worst_margin_b, 0.0, dis.worst_margin_b >= 0.0);
    out.summary["case_b_samples"] = dis.case_b_samples;
    out.summary["analytic_bound_a"] = dis.analytic_bound_a;
  }

  double worst_flow = 0.0;
  SplitMix64 flow_rng(derive_seed(c.seed, 3));
  for (int i = 0; i < 100; ++i) {
    Vector x(4);
    for (int a = 0; a < 4; ++a) x(a) = uniform(flow_rng, -2.0 * r, 2.0 * r);
    const Vector flowed = integrate_hamiltonian_flow(
        [&](const Vector& z) { return shear_hamiltonian_gradient(profile, z); }, x, 1.0, 1e-3);
    worst_flow = std::max(worst_flow, (flowed - shear(x)).norm());
  }
  record("hamiltonian_flow_gap", worst_flow, 1e-5, worst_flow <= 1e-5);

  if (c.samples > 0) {
    const Subspace v = Subspace::leading_pairs(4, c.k);
    const ScalingReport sc =
        scaling_consistency(shear, c.scale_radius, v, detail::estimator_options(c, derive_seed(c.seed, 4)));
    record("scaling_relative_gap", sc.relative_gap, 0.05, sc.passed);
    out.summary["scaling"] = {{"radius", c.scale_radius},
                              {"rescaled_unit", detail::estimate_to_json(sc.rescaled_unit)},
                              {"original", detail::estimate_to_json(sc.original)},
                              {"original_scaled", sc.original_scaled}};
  }

  out.summary["sup_chi_prime_certified"] = profile.sup_derivative();
  out.summary["shoulder"] = profile.shoulder();
  out.summary["checks"] = checks;
  out.exit_code = all ? kExitOk : kExitViolation;
  return out;
}

// ---------------------------------------------------------------------------

/// Twist map (z, t) -> rho(|z|) e^{it} z with rho(r) = exp(-r^2/16): closed-form
/// vs singular-value 2-Jacobian, J2 >= 1 near the axis, and the image area.
inline CommandResult cmd_rho(const ExperimentConfig& c) {
  detail::check_common(c);
  detail::require(c.trials >= 2, "--trials (grid points) must be at least 2");
  const RhoSpec spec = RhoSpec::gaussian(16.0);
  const SmoothMap twist = rho_twist(spec);

  const auto n = static_cast<std::size_t>(c.trials);
  CommandResult out;
  out.table = Table({"r", "j2_closed_form", "j2_singular_values", "abs_diff"});
  report::Series closed{"closed form", "#1f77b4", {}, {}};
  double worst_diff = 0.0, min_j2_small_r = INFINITY;
  std::optional<double> crossing;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    const double theta = 0.7 * static_cast<double>(i), t = 0.3 * static_cast<double>(i);
    Vector x(3);
    x << r * std::cos(theta), r * std::sin(theta), t;
    const double formula = rho_twist_jacobian_closed_form(spec, r);
    const double svd = middle_jacobian(twist, x, 2).value;
    const double diff = std::abs(formula - svd);
    worst_diff = std::max(worst_diff, diff);
    if (r <= 0.5) min_j2_small_r = std::min(min_j2_small_r, svd);
    if (!crossing && svd < 1.0 && r > 0.0) crossing = r;
    out.table.add_row({r, formula, svd, diff});
    closed.x.push_back(r);
    closed.y.push_back(formula);
  }

  Json checks = Json::object();
  bool all = true;
  Table checks_table({"check", "value", "threshold", "passed"});
  auto record = [&](const std::string& name, double value, double threshold, bool passed) {
    checks[name] = detail::check_row(checks_table, name, value, threshold, passed);
    all = all && passed;
    if (!passed) out.witnesses.push_back(name);
  };
  record("j2_formula_agreement", worst_diff, 1e-8, worst_diff <= 1e-8);
  record("min_j2_for_r_le_half", min_j2_small_r, 1.0 - 1e-12, min_j2_small_r >= 1.0 - 1e-12);

  if (c.samples > 0) {
    const Subspace plane = Subspace::coordinate(2, {0, 1});
    const VolumeEstimate est =
        estimate_projected_volume(twist, c.radius, plane, detail::estimator_options(c, derive_seed(c.seed, 1)));
    const double rho_r = spec.rho(c.radius);
    const double bound = 3.14159265358979323846 * rho_r * rho_r * c.radius * c.radius;
    const double disk = 3.14159265358979323846 * c.radius * c.radius;
    record("image_area_vs_bound", est.value, 1.03 * bound, est.value <= 1.03 * bound);
    record("image_area_vs_disk", est.value, disk, est.value < disk);
    out.summary["image_area"] = detail::estimate_to_json(est);
    out.summary["containment_bound"] = bound;
  }

  out.summary["grid_points"] = n;
  out.summary["first_crossing_below_one"] = crossing ? Json(*crossing) : Json(nullptr);
  out.summary["checks"] = checks;

  std::ostringstream csv;
  out.table.write_csv(csv);
  out.artifacts.push_back({"rho_j2.csv", csv.str(), false});
  report::PlotOptions opt;
  opt.title = "2-Jacobian of the twist map";
  opt.x_label = "r = |z|";
  opt.y_label = "J2";
  opt.horizontal_lines = {1.0};
  opt.timestamp = !c.no_timestamp;
  std::ostringstream svg;
  report::write_svg_plot(svg, {closed}, opt);
  out.artifacts.push_back({"rho_j2.svg", svg.str(), opt.timestamp});
  out.exit_code = all ? kExitOk : kExitViolation;
  return out;
}

// ---------------------------------------------------------------------------

/// The generating-shear example: the bracket of grad Q1 and grad P1, the
/// Frobenius residual of W_hat on a grid, and the constant plane as an
/// integrable selection of the multi-valued field.
inline CommandResult cmd_frobenius(const ExperimentConfig& c) {
  detail::check_common(c);
  const int grid = c.cells > 0 ? c.cells : 10;
  detail::require(grid >= 2, "--cells (grid points per axis) must be at least 2");

  const auto [grad_q1, grad_p1] = generating_shear_gradient_fields();
  const SmoothMap shear = generating_shear();
  const Subspace plane = Subspace::leading_pairs(4, 1);
  const std::vector<VectorField> w_hat_fields = {grad_q1, grad_p1};
  const std::vector<VectorField> map_fields = maximal_distribution_fields(shear, plane);
  Vector expected = Vector::Zero(4);
  expected(3) = -1.0;

  CommandResult out;
  out.table = Table({"check", "value", "threshold", "passed"});
  Json checks = Json::object();
  bool all = true;
  auto record = [&](const std::string& name, double value, double threshold, bool passed) {
    checks[name] = detail::check_row(out.table, name, value, threshold, passed);
    all = all && passed;
    if (!passed) out.witnesses.push_back(name);
  };

  double exact_gap = 0.0, fd_gap = 0.0, map_fd_gap = 0.0;
  SplitMix64 rng(derive_seed(c.seed, 1));
  std::vector<Vector> random_points;
  for (long long i = 0; i < c.trials; ++i) {
    Vector x(4);
    for (int a = 0; a < 4; ++a) x(a) = uniform(rng, -1.0, 1.0);
    exact_gap = std::max(exact_gap, (lie_bracket(grad_q1, grad_p1, x, BracketMode::exact) - expected).norm());
    fd_gap = std::max(fd_gap, (lie_bracket(grad_q1, grad_p1, x, BracketMode::finite_difference) - expected).norm());
    // the same bracket, with fields read off the map's Jacobian
    map_fd_gap = std::max(
        map_fd_gap, (lie_bracket(map_fields[0], map_fields[1], x, BracketMode::finite_difference) - expected).norm());
    if (random_points.size() < 16) random_points.push_back(x);
  }
  record("bracket_exact_gap", exact_gap, 0.0, exact_gap == 0.0);
  record("bracket_fd_gap", fd_gap, c.tol, fd_gap <= c.tol);
  record("bracket_from_map_fd_gap", map_fd_gap, c.tol, map_fd_gap <= c.tol);

  double min_residual = INFINITY, min_membership = INFINITY, min_jacobian = INFINITY;
  std::ostringstream heat;
  heat << "q1,p2,residual\n";
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < grid; ++b)
      for (int d = 0; d < grid; ++d)
        for (int e = 0; e < grid; ++e) {
          Vector x(4);
          const int idx[4] = {a, b, d, e};
          for (int i = 0; i < 4; ++i) x(i) = -1.0 + 2.0 * idx[i] / (grid - 1);
          const double res = frobenius_residual(w_hat_fields, x, BracketMode::exact);
          min_residual = std::min(min_residual, res);
          min_membership = std::min(min_membership, membership_w(shear, plane, x, plane).value);
          min_jacobian = std::min(min_jacobian, maximal_distribution(shear, plane, x).jacobian_on_w_hat);
          if (b == 0 && d == 0) {
            heat << report::format_double(x(0)) << ',' << report::format_double(x(3)) << ','
                 << report::format_double(res) << '\n';
          }
        }
  record("min_frobenius_residual", min_residual, 0.0, min_residual > 0.0);
  record("min_constant_plane_membership", min_membership, 1.0 - 1e-9, min_membership >= 1.0 - 1e-9);
  record("min_jacobian_on_w_hat", min_jacobian, 1.0 - 1e-9, min_jacobian >= 1.0 - 1e-9);

  const RigidCaseReport rigid = rigid_case_check(shear, plane, random_points);
  const RigidCaseReport rigid_identity = rigid_case_check(identity_map(4), plane, random_points);
  record("rigid_points_generating_shear", static_cast<double>(rigid.rigid_count), 0.0, rigid.all_consistent);
  record("rigid_points_identity", static_cast<double>(rigid_identity.rigid_count),
         static_cast<double>(random_points.size()),
         rigid_identity.all_consistent && rigid_identity.rigid_count == random_points.size());

  out.summary["bracket_points"] = c.trials;
  out.summary["grid_points_per_axis"] = grid;
  out.summary["checks"] = checks;
  out.artifacts.push_back({"frobenius_residual.csv", heat.str(), false});
  out.exit_code = all ? kExitOk : kExitViolation;
  return out;
}

// ---------------------------------------------------------------------------

namespace detail {

inline SmoothMap named_map(const ExperimentConfig& c, std::uint64_t seed, std::optional<double>& exact,
                           Subspace& target) {
  if (c.map == "rho") {
    target = Subspace::coordinate(2, {0, 1});
    return rho_twist(RhoSpec::gaussian(16.0));
  }
  if (c.map == "guth" || c.map == "generating") {
    require(c.k == 1 || c.k == 2, "--k must be 1 or 2 for maps of R^4");
    target = Subspace::leading_pairs(4, c.k);
    if (c.map == "generating") return generating_shear();
    try {
      return guth_shear(BumpProfile::make(c.radius, c.eps));
    } catch (const PreconditionError& e) {
      throw UsageError(e.what());
    }
  }
  check_phase_space(c);
  require(c.k <= 2, "--k must be 1 or 2 for volume estimates");
  target = Subspace::leading_pairs(c.dim, c.k);
  if (c.map == "identity") {
    exact = unit_ball_volume(2 * c.k) * std::pow(c.radius, 2 * c.k);
    return identity_map(c.dim);
  }
  if (c.map == "linear") {
    const SymplecticMatrix phi = random_symplectic(c.dim, c.scale, seed);
    exact = projected_ball_volume(target.basis().transpose() * phi.matrix()).volume * std::pow(c.radius, 2 * c.k);
    return linear_map(phi);
  }
  throw UsageError("--map must be one of identity, linear, guth, generating, rho");
}

}  // namespace detail

/// One-off estimate for a named map, or calibration against the exact linear formula.
inline CommandResult cmd_estimate(const ExperimentConfig& c) {
  detail::check_common(c);
  detail::require(c.samples >= static_cast<long long>(kMinSamples), "--samples must be at least 10000");
  detail::require(c.mode == "single" || c.mode == "calibrate", "--mode must be single or calibrate");
  CommandResult out;

  if (c.mode == "calibrate") {
    out.table = Table({"trial", "dim", "k", "seed", "exact", "estimate", "relative_error", "converged"});
    std::size_t violations = 0;
    double worst = 0.0;
    for (long long t = 0; t < c.trials; ++t) {
      const int dim = t % 2 == 0 ? 4 : 6;
      const int k = (t / 2) % 2 == 0 ? 1 : 2;
      const std::uint64_t s = derive_seed(c.seed, static_cast<std::uint64_t>(t));
      const SymplecticMatrix phi = random_symplectic(dim, c.scale, derive_seed(s, 0));
      const Subspace v = random_complex_subspace(dim, k, derive_seed(s, 1));
      const double exact = projected_ball_volume(v.basis().transpose() * phi.matrix()).volume;
      const VolumeEstimate est = estimate_projected_volume(linear_map(phi), 1.0, v, detail::estimator_options(c, derive_seed(s, 2)));
      const double rel = std::abs(est.value - exact) / exact;
      worst = std::max(worst, rel);
      const bool bad = rel > c.tol;
      violations += bad;
      if (bad) out.witnesses.push_back(detail::seed_string(s));
      out.table.add_row({static_cast<std::int64_t>(t), static_cast<std::int64_t>(dim), static_cast<std::int64_t>(k),
                         detail::seed_string(s), exact, est.value, rel, est.converged});
    }
    out.summary["mode"] = "calibrate";
    out.summary["trials"] = c.trials;
    out.summary["violations"] = violations;
    out.summary["worst_relative_error"] = worst;
    out.exit_code = violations ? kExitViolation : kExitOk;
    return out;
  }

  std::optional<double> exact;
  Subspace target = Subspace::span_of(Matrix(0, 0));
  const SmoothMap map = detail::named_map(c, derive_seed(c.seed, 0), exact, target);
  const VolumeEstimate est =
      estimate_projected_volume(map, c.radius, target, detail::estimator_options(c, derive_seed(c.seed, 1)));
  out.table = Table({"map", "radius", "value", "lower", "upper", "exact", "relative_error", "converged"});
  bool passed = true;
  double rel = NAN;
  if (exact) {
    rel = std::abs(est.value - *exact) / *exact;
    passed = rel <= c.tol;
  }
  if (c.map == "rho") {
    const double rho_r = std::exp(-c.radius * c.radius / 16.0);
    const double bound = 3.14159265358979323846 * rho_r * rho_r * c.radius * c.radius;
    out.summary["containment_bound"] = bound;
    passed = est.value <= 1.03 * bound;
  }
  out.table.add_row({map.name(), c.radius, est.value, est.lower, est.upper, exact ? *exact : NAN, rel,
                     est.converged});
  out.summary["mode"] = "single";
  out.summary["map"] = map.name();
  out.summary["estimate"] = detail::estimate_to_json(est);
  out.summary["exact"] = exact ? Json(*exact) : Json(nullptr);
  out.summary["relative_error"] = report::to_json(rel);
  out.summary["passed"] = passed;
  if (!passed) out.witnesses.push_back(detail::seed_string(c.seed));
  out.exit_code = passed ? kExitOk : kExitViolation;
  return out;
}

}  // namespace squeeze::experiments
