// Acceptance suite: one PASS/FAIL line per criterion, followed by a summary.
// Exit status is 0 unless --strict is given and some criterion failed, or the
// suite itself could not run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cullsac/bounding.hpp"
#include "cullsac/engine.hpp"
#include "cullsac/grid.hpp"
#include "cullsac/polyapprox.hpp"
#include "cullsac/residuals.hpp"
#include "cullsac/solvers.hpp"
#include "cullsac/verify.hpp"
#include "harness/bench.hpp"
#include "harness/synth.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace cullsac;
using testing::uniform;
using testing::uniform_point;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr ModelFamily kSuiteFamilies[] = {ModelFamily::homography, ModelFamily::fundamental,
                                          ModelFamily::radial_homography};

// ---------------------------------------------------------------------------
// Randomized synthetic suite shared by the exactness and early-rejection checks.

struct SuiteTally {
  std::size_t instances = 0;
  std::size_t models_checked = 0;
  std::size_t model_mismatches = 0;
  std::size_t run_mismatches = 0;
  std::size_t early_rejections = 0;
  double rel_change_sum = 0.0;
  double rel_change_max = 0.0;
  std::size_t inliers_eps1 = 0;
  std::size_t inliers_default = 0;
};

constexpr std::size_t kSuiteSeedsPerConfig = 167;  // 6 configs -> 1002 instances per family
constexpr double kSuiteThreshold = 3.0;
constexpr std::size_t kSuiteMaxIterations = 1000;

std::map<ModelFamily, SuiteTally> run_suite() {
  std::map<ModelFamily, SuiteTally> out;
  const std::size_t sizes[] = {200, 2000};
  const double ratios[] = {0.05, 0.14, 0.5};
  const int cell_choices[] = {2, 3, 4, 6};
  for (const auto family : kSuiteFamilies) {
    auto& tally = out[family];
    std::uint64_t instance = 0;
    for (const auto n : sizes) {
      for (const double ratio : ratios) {
        for (std::size_t s = 0; s < kSuiteSeedsPerConfig; ++s, ++instance) {
          harness::SynthConfig sc;
          sc.family = family;
          sc.n = n;
          sc.inlier_ratio = ratio;
          sc.seed = 7919 * instance + static_cast<std::uint64_t>(family);
          const auto data = harness::synth_generate(sc);
          const CorrespondenceView view(data.matches);

          RansacConfig rc;
          rc.family = family;
          rc.threshold = kSuiteThreshold;
          rc.context = data.context;
          rc.seed = sc.seed;
          rc.max_iterations = kSuiteMaxIterations;
          rc.cells_per_axis_1 = rc.cells_per_axis_2 = cell_choices[instance % 4];
          const JointGrid grid = build_grid(view, grid_spec_for(view, rc));

          // Per-model check on hypotheses from clean and contaminated samples.
          VerifyConfig vc;
          vc.threshold = kSuiteThreshold;
          vc.eps_r = 1.0;
          Verifier trad(view, nullptr, Strategy::traditional, vc);
          Verifier part(view, &grid, Strategy::partition, vc);
          std::mt19937_64 rng(sc.seed ^ 0x5bd1e995u);
          std::vector<std::uint32_t> inliers;
          for (std::uint32_t i = 0; i < data.matches.size(); ++i)
            if (data.is_inlier[i]) inliers.push_back(i);
          std::vector<Model> models{data.truth};
          const std::size_t m = sample_size(family);
          for (int trial = 0; trial < 6; ++trial) {
            const bool clean = trial < 3 && inliers.size() >= m;
            std::vector<std::uint32_t> pool(clean ? inliers.size() : data.matches.size());
            if (clean)
              pool = inliers;
            else
              std::iota(pool.begin(), pool.end(), 0u);
            std::shuffle(pool.begin(), pool.end(), rng);
            Correspondences sample;
            for (std::size_t j = 0; j < m; ++j) sample.push_back(data.matches[pool[j]]);
            for (auto& model : solve_minimal(family, sample, data.context)) models.push_back(std::move(model));
          }
          std::vector<std::uint32_t> ids_trad, ids_part;
          for (const auto& model : models) {
            const auto a = trad.verify(model, Score{}, &ids_trad);
            const auto b = part.verify(model, Score{}, &ids_part);
            ++tally.models_checked;
            if (b.verdict != Verdict::scored || ids_trad != ids_part ||
                a.score.inlier_count != b.score.inlier_count)
              ++tally.model_mismatches;
          }

          // Whole runs: traditional, partition at eps_r = 1, partition at the default eps_r.
          rc.strategy = Strategy::traditional;
          const auto run_trad = ransac(view, rc);
          rc.strategy = Strategy::partition;
          rc.eps_r = 1.0;
          const auto run_exact = ransac(view, rc, &grid);
          rc.eps_r = default_eps_r(family);
          const auto run_fast = ransac(view, rc, &grid);
          if (run_trad.inlier_ids != run_exact.inlier_ids ||
              run_trad.iterations_run != run_exact.iterations_run)
            ++tally.run_mismatches;

          const auto c1 = run_exact.best_score.inlier_count;
          const auto c2 = run_fast.best_score.inlier_count;
          const double rel = std::abs(static_cast<double>(c2) - static_cast<double>(c1)) /
                             static_cast<double>(std::max<std::size_t>(c1, 1));
          tally.rel_change_sum += rel;
          tally.rel_change_max = std::max(tally.rel_change_max, rel);
          tally.inliers_eps1 += c1;
          tally.inliers_default += c2;
          tally.early_rejections += run_fast.stats.early_rejections;
          ++tally.instances;
        }
      }
    }
  }
  return out;
}

Outcome check_exactness(const std::map<ModelFamily, SuiteTally>& suite, double elapsed) {
  Outcome o{true, ""};
  for (const auto& [family, t] : suite) {
    o.pass = o.pass && t.instances >= 1000 && t.model_mismatches == 0 && t.run_mismatches == 0;
    o.detail += fmt("%s: %zu instances, %zu models, %zu model mismatches, %zu run mismatches; ",
                    std::string(to_string(family)).c_str(), t.instances, t.models_checked,
                    t.model_mismatches, t.run_mismatches);
  }
  o.pass = o.pass && elapsed <= 600.0;
  o.detail += fmt("suite %.1f s", elapsed);
  return o;
}

Outcome check_early_rejection(const std::map<ModelFamily, SuiteTally>& suite) {
  Outcome o{true, ""};
  for (const auto& [family, t] : suite) {
    const double mean = t.rel_change_sum / static_cast<double>(std::max<std::size_t>(t.instances, 1));
    const double total = std::abs(static_cast<double>(t.inliers_default) - static_cast<double>(t.inliers_eps1)) /
                         static_cast<double>(std::max<std::size_t>(t.inliers_eps1, 1));
    o.pass = o.pass && mean < 0.01 && total < 0.01 && t.early_rejections > 0;
    o.detail += fmt("%s eps_r=%.1f: mean change %.4f%%, total change %.4f%%, max %.2f%%, %zu early rejections; ",
                    std::string(to_string(family)).c_str(), default_eps_r(family), 100.0 * mean,
                    100.0 * total, 100.0 * t.rel_change_max, t.early_rejections);
  }
  return o;
}

// ---------------------------------------------------------------------------
// Conservativeness of the cell bounds.

// Grid with exactly one match per joint cell so every bucket is non-empty.
JointGrid filled_grid(const GridSpec& spec) {
  JointGrid probe = build_grid(Correspondences{}, spec);
  Correspondences fill;
  for (int y1 = 0; y1 < spec.cells_per_axis_1; ++y1)
    for (int x1 = 0; x1 < spec.cells_per_axis_1; ++x1)
      for (int y2 = 0; y2 < spec.cells_per_axis_2; ++y2)
        for (int x2 = 0; x2 < spec.cells_per_axis_2; ++x2) {
          Correspondence c;
          c.p = probe.cell_rect(1, {x1, y1}).center();
          const Vec2 u = probe.cell_rect(2, {x2, y2}).center();
          if (!distort_division(u, spec.lambda_2, c.q)) continue;
          fill.push_back(c);
        }
  return build_grid(fill, spec);
}

Vec2 cell_sample(std::mt19937_64& rng, const Aabb2& cell, int index) {
  // Alternate between the boundary and the interior.
  if (index % 2 == 0) return uniform_point(rng, cell);
  const double s = uniform(rng, 0.0, 1.0);
  switch ((index / 2) % 4) {
    case 0: return {cell.min.x() + s * cell.width(), cell.min.y()};
    case 1: return {cell.max.x(), cell.min.y() + s * cell.height()};
    case 2: return {cell.min.x() + s * cell.width(), cell.max.y()};
    default: return {cell.min.x(), cell.min.y() + s * cell.height()};
  }
}

Vec2 within_disc(std::mt19937_64& rng, double radius) {
  const double a = uniform(rng, 0.0, 2.0 * M_PI);
  const double r = radius * std::sqrt(uniform(rng, 0.0, 1.0)) * 0.999999;
  return {r * std::cos(a), r * std::sin(a)};
}

struct ConservativeTally {
  std::size_t pairs = 0;
  std::size_t samples = 0;
  std::size_t probes = 0;
  std::size_t violations = 0;
};

constexpr std::size_t kPairsPerFamily = 10000;
constexpr int kSamplesPerPair = 1000;

ConservativeTally conservative_family(ModelFamily family) {
  ConservativeTally tally;
  std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(family));
  const double eps = 3.0;
  std::vector<std::uint8_t> selected;
  std::uint64_t model_index = 0;
  while (tally.pairs < kPairsPerFamily) {
    harness::SynthConfig sc;
    sc.family = family;
    sc.n = 40;
    sc.inlier_ratio = 0.5;
    sc.seed = 31 * model_index + 5;
    const auto data = harness::synth_generate(sc);
    // Alternate between ground-truth models and hypotheses from contaminated samples.
    Model model = data.truth;
    if (model_index % 2 == 1) {
      Correspondences sample(data.matches.begin(), data.matches.begin() + sample_size(family));
      auto sols = solve_minimal(family, sample, data.context);
      if (sols.empty()) {
        ++model_index;
        continue;
      }
      model = sols[model_index / 2 % sols.size()];
    }
    RansacConfig rc;
    rc.family = family;
    rc.context = data.context;
    rc.cells_per_axis_1 = 2 + static_cast<int>(model_index % 5);
    rc.cells_per_axis_2 = 2 + static_cast<int>((model_index / 5) % 7);
    ++model_index;
    const JointGrid grid = filled_grid(grid_spec_for(CorrespondenceView(data.matches), rc));
    const auto& spec = grid.spec();

    const auto sel = cull_cells(model, grid, eps);
    selected.assign(grid.joint_cell_count(), 0);
    for (const auto key : sel.keys) selected[key] = 1;
    const auto check_probe = [&](std::uint32_t cell1, const Vec2& y) {
      if (!spec.extent_2.contains(y)) return;
      ++tally.probes;
      const auto key = grid.pair_key(cell1, grid.linear(2, cell_of(y, spec.extent_2, spec.cells_per_axis_2)));
      if (grid.bucket_size(key) > 0 && !selected[key]) ++tally.violations;
    };

    for (int cy = 0; cy < spec.cells_per_axis_1 && tally.pairs < kPairsPerFamily; ++cy) {
      for (int cx = 0; cx < spec.cells_per_axis_1 && tally.pairs < kPairsPerFamily; ++cx) {
        const CellIndex c1{cx, cy};
        const Aabb2 cell = grid.cell_rect(1, c1);
        const auto cell1 = grid.linear(1, c1);
        ++tally.pairs;
        if (const auto* h = std::get_if<Homography>(&model)) {
          bool fallback = false;
          const Aabb2 box = bound_homography_cell(h->H, cell, eps, &fallback);
          for (int s = 0; s < kSamplesPerPair; ++s) {
            const Vec2 x = cell_sample(rng, cell, s);
            Vec2 y;
            ++tally.samples;
            if (!project_homography(h->H, x, y)) {
              if (!fallback) ++tally.violations;
              continue;
            }
            const double tol = 1e-9 * (1.0 + y.norm());
            if (!fallback && !box.inflated(tol - eps).contains(y)) ++tally.violations;
            check_probe(cell1, y + within_disc(rng, eps));
          }
        } else if (const auto* f = std::get_if<FundamentalMatrix>(&model)) {
          const AngleInterval angles = epipolar_angle_interval(f->F, cell);
          const Vec2 mid = spec.extent_2.center();
          const double reach = (spec.extent_2.max - spec.extent_2.min).norm();
          for (int s = 0; s < kSamplesPerPair; ++s) {
            const Vec2 x = cell_sample(rng, cell, s);
            const Vec3 l = f->F * homogeneous(x);
            ++tally.samples;
            const double ln = std::hypot(l.x(), l.y());
            if (!(ln > 0.0)) continue;
            if (!angles.contains(line_angle(l), 1e-9)) ++tally.violations;
            const Vec2 normal = Vec2(l.x(), l.y()) / ln;
            const Vec2 dir(-normal.y(), normal.x());
            const Vec2 foot = mid - (normal.dot(mid) + l.z() / ln) * normal;
            for (int probe = 0; probe < 4; ++probe) {
              const double off = uniform(rng, -eps, eps) * 0.999999;
              check_probe(cell1, foot + uniform(rng, -reach, reach) * dir + off * normal);
            }
          }
        } else if (const auto* r = std::get_if<RadialHomography>(&model)) {
          for (int s = 0; s < kSamplesPerPair; ++s) {
            const Vec2 x = cell_sample(rng, cell, s);
            Vec2 y;
            ++tally.samples;
            if (!map_radial(*r, x, y) || !y.allFinite()) continue;
            check_probe(cell1, y + within_disc(rng, eps));
          }
        }
      }
    }
  }
  return tally;
}

Outcome check_conservative() {
  Outcome o{true, ""};
  for (const auto family : kSuiteFamilies) {
    const auto t = conservative_family(family);
    o.pass = o.pass && t.violations == 0 && t.pairs >= kPairsPerFamily;
    o.detail += fmt("%s: %zu pairs, %zu samples, %zu probes, %zu violations; ",
                    std::string(to_string(family)).c_str(), t.pairs, t.samples, t.probes, t.violations);
  }
  return o;
}

// ---------------------------------------------------------------------------
// Benchmark-based checks.

const harness::BenchRow* find_row(const std::vector<harness::BenchRow>& rows, const std::string& family,
                                  const std::string& strategy, int cells, std::size_t iters) {
  for (const auto& r : rows)
    if (r.model_family == family && r.strategy == strategy && r.fixed_iterations == iters &&
        (strategy == "trad" || strategy == "sprt" || r.cells_per_axis == cells) && r.error.empty())
      return &r;
  return nullptr;
}

std::vector<harness::BenchRow> bench(ModelFamily family, std::vector<Strategy> strategies, std::vector<int> cells,
                                     std::vector<std::size_t> iters) {
  harness::BenchSweep sweep;
  sweep.families = {family};
  sweep.strategies = std::move(strategies);
  sweep.cells = std::move(cells);
  sweep.iterations = std::move(iters);
  sweep.repeats = 3;
  return harness::run_bench(sweep);
}

struct BenchResults {
  std::vector<harness::BenchRow> h_grid;     // H: grid at 4 cells
  std::vector<harness::BenchRow> f_grid;     // F: grid at 2 and 8 cells
  std::vector<harness::BenchRow> combined;   // H and F: sprt vs grid-sprt
};

Outcome check_work_reduction(const BenchResults& b) {
  const auto* ht = find_row(b.h_grid, "h", "trad", 0, 10000);
  const auto* hg = find_row(b.h_grid, "h", "grid", 4, 10000);
  const auto* ft = find_row(b.f_grid, "f", "trad", 0, 10000);
  const auto* fg = find_row(b.f_grid, "f", "grid", 2, 10000);
  if (!ht || !hg || !ft || !fg) return {false, "missing benchmark rows"};
  const bool pass = hg->relative_points <= 0.6 && fg->relative_points <= 0.6 && hg->relative_time <= 0.8 &&
                    fg->relative_time <= 0.8;
  return {pass, fmt("H 4 cells: points %.3f, time %.3f (%.1f / %.1f ms); F 2 cells: points %.3f, time %.3f "
                    "(%.1f / %.1f ms)",
                    hg->relative_points, hg->relative_time, hg->total_ms, ht->total_ms, fg->relative_points,
                    fg->relative_time, fg->total_ms, ft->total_ms)};
}

Outcome check_tradeoff(const BenchResults& b) {
  const auto* f2 = find_row(b.f_grid, "f", "grid", 2, 10000);
  const auto* f8 = find_row(b.f_grid, "f", "grid", 8, 10000);
  if (!f2 || !f8) return {false, "missing benchmark rows"};
  return {f8->total_ms >= f2->total_ms, fmt("F total time: 8 cells %.1f ms, 2 cells %.1f ms", f8->total_ms, f2->total_ms)};
}

Outcome check_combined(const BenchResults& b) {
  bool evals_ok = true;
  double worst = 0.0;
  double sum_combined = 0.0;
  double sum_sprt = 0.0;
  std::size_t configs = 0;
  std::string worst_at;
  for (const auto& r : b.combined) {
    if (r.strategy != "grid-sprt") continue;
    const auto* s = find_row(b.combined, r.model_family, "sprt", 0, r.fixed_iterations);
    if (!s || !r.error.empty()) return {false, "missing benchmark rows"};
    ++configs;
    evals_ok = evals_ok && r.evaluated_points <= s->evaluated_points;
    const double ratio = r.total_ms / s->total_ms;
    if (ratio > worst) {
      worst = ratio;
      worst_at = fmt("%s/%d cells/%zu iters", r.model_family.c_str(), r.cells_per_axis, r.fixed_iterations);
    }
    sum_combined += r.total_ms;
    sum_sprt += s->total_ms;
  }
  const double aggregate = sum_combined / std::max(sum_sprt, 1e-12);
  const bool pass = configs > 0 && evals_ok && worst <= 1.05 && aggregate < 1.0;
  return {pass, fmt("%zu configs; evaluations %s; worst time ratio %.3f at %s; aggregate %.3f", configs,
                    evals_ok ? "never above sprt" : "ABOVE sprt somewhere", worst, worst_at.c_str(), aggregate)};
}

// ---------------------------------------------------------------------------
// Polynomial machinery.

Outcome check_polynomials() {
  std::mt19937_64 rng(77);
  std::size_t unity_fail = 0, hull_fail = 0, cheb_fail = 0, herm_fail = 0, interp_fail = 0;
  std::size_t cheb_cases = 0, herm_cases = 0, interp_cases = 0;

  for (int i = 0; i < 10000; ++i) {
    const int n = 1 + i % 10;
    BezierCurve curve{Eigen::MatrixXd(n + 1, 2)};
    for (int r = 0; r <= n; ++r)
      for (int c = 0; c < 2; ++c) curve.control(r, c) = uniform(rng, -1000.0, 1000.0);
    const double scale = curve.control.cwiseAbs().maxCoeff();
    const Aabb2 hull = control_aabb(curve);
    for (int s = 0; s < 10; ++s) {
      const double t = uniform(rng, 0.0, 1.0);
      double sum = 0.0;
      bool negative = false;
      for (int j = 0; j <= n; ++j) {
        const double b = bernstein_basis(n, j, t);
        negative = negative || b < 0.0;
        sum += b;
      }
      if (negative || std::abs(sum - 1.0) > 1e-9) ++unity_fail;
      const Eigen::VectorXd v = bernstein_eval(curve, t);
      if (!hull.inflated(1e-9 * scale).contains(Vec2(v(0), v(1)))) ++hull_fail;
    }
  }

  struct Analytic {
    std::function<double(double)> f;
    std::function<double(int)> sup_derivative;  // sup over [0,1] of |f^(k)|
  };
  const std::vector<Analytic> functions{
      {[](double t) { return std::sin(3.0 * t); }, [](int k) { return std::pow(3.0, k); }},
      {[](double t) { return std::exp(t); }, [](int) { return std::exp(1.0); }},
      {[](double t) { return std::cos(2.0 * t + 1.0); }, [](int k) { return std::pow(2.0, k); }},
      {[](double t) { return 1.0 / (1.0 + t); }, [](int k) { return std::tgamma(k + 1.0); }},
      {[](double t) { return std::pow(t, 7); }, [](int k) { return std::tgamma(8.0) / std::tgamma(8.0 - k); }},
  };
  double worst_ratio = 0.0;
  for (const auto& fn : functions) {
    for (int k = 2; k <= 6; ++k) {
      const ChebyshevBezierFit fit(k);
      std::vector<Vec2> samples, controls(static_cast<std::size_t>(k));
      for (const double t : fit.params()) samples.emplace_back(fn.f(t), 0.0);
      fit.fit(samples, controls);
      BezierCurve curve{Eigen::MatrixXd(k, 2)};
      for (int j = 0; j < k; ++j) curve.control.row(j) = controls[static_cast<std::size_t>(j)].transpose();
      double err = 0.0;
      for (int s = 0; s <= 4000; ++s) {
        const double t = s / 4000.0;
        const Eigen::VectorXd v = bernstein_eval(curve, t);
        err = std::max(err, std::hypot(v(0) - fn.f(t), v(1)));
      }
      const double bound = fit.error_bound(fn.sup_derivative(k));
      worst_ratio = std::max(worst_ratio, err / bound);
      ++cheb_cases;
      if (err > bound) ++cheb_fail;
    }
  }

  const auto nth_derivative_at = [](BezierCurve c, int order, double t) {
    for (int j = 0; j < order; ++j) c = derivative(c);
    return Eigen::VectorXd(bernstein_eval(c, t));
  };
  for (int i = 0; i < 2000; ++i) {
    const int r = i % 4;
    const int n = 2 * r + 1 + (i / 4) % 4;
    Eigen::MatrixXd a(r + 1, 2), b(r + 1, 2);
    for (int j = 0; j <= r; ++j)
      for (int c = 0; c < 2; ++c) {
        a(j, c) = uniform(rng, -100.0, 100.0);
        b(j, c) = uniform(rng, -100.0, 100.0);
      }
    const BezierCurve curve = hermite_to_bezier(a, b, n);
    for (int j = 0; j <= r; ++j) {
      ++herm_cases;
      const Eigen::VectorXd da = nth_derivative_at(curve, j, 0.0);
      const Eigen::VectorXd db = nth_derivative_at(curve, j, 1.0);
      const double sa = 1.0 + a.row(j).cwiseAbs().maxCoeff();
      const double sb = 1.0 + b.row(j).cwiseAbs().maxCoeff();
      if ((da.transpose() - a.row(j)).cwiseAbs().maxCoeff() > 1e-9 * sa ||
          (db.transpose() - b.row(j)).cwiseAbs().maxCoeff() > 1e-9 * sb)
        ++herm_fail;
    }
  }

  for (int i = 0; i < 2000; ++i) {
    const int k = 2 + i % 10;
    const std::vector<double> params = i % 2 ? chebyshev_nodes(0.0, 1.0, k) : [&] {
      std::vector<double> p;
      for (int j = 0; j < k; ++j) p.push_back(static_cast<double>(j) / (k - 1));
      return p;
    }();
    Eigen::MatrixXd coeffs(k, 2);  // monomial coefficients, degree k-1
    for (int j = 0; j < k; ++j)
      for (int c = 0; c < 2; ++c) coeffs(j, c) = uniform(rng, -1.0, 1.0);
    const auto poly = [&](double t) {
      Eigen::RowVector2d v = Eigen::RowVector2d::Zero();
      for (int j = k - 1; j >= 0; --j) v = v * t + coeffs.row(j);
      return v;
    };
    Eigen::MatrixXd samples(k, 2);
    for (int j = 0; j < k; ++j) samples.row(j) = poly(params[static_cast<std::size_t>(j)]);
    const BezierCurve curve = interpolate_bezier(params, samples);
    ++interp_cases;
    for (int s = 0; s <= 50; ++s) {
      const double t = s / 50.0;
      const Eigen::VectorXd v = bernstein_eval(curve, t);
      if ((v.transpose() - poly(t)).cwiseAbs().maxCoeff() > 1e-9) {
        ++interp_fail;
        break;
      }
    }
  }

  const bool pass = unity_fail + hull_fail + cheb_fail + herm_fail + interp_fail == 0;
  return {pass, fmt("partition of unity %zu/100000 failures, convex hull %zu/100000; chebyshev %zu/%zu over bound "
                    "(worst error/bound %.3f); hermite %zu/%zu; interpolation %zu/%zu",
                    unity_fail, hull_fail, cheb_fail, cheb_cases, worst_ratio, herm_fail, herm_cases, interp_fail,
                    interp_cases)};
}

// ---------------------------------------------------------------------------
// Minimal solvers on noiseless ground truth.

Outcome check_solvers() {
  std::mt19937_64 rng(4242);
  std::size_t h_fail = 0, f_fail = 0, det_fail = 0, f_solutions = 0;
  double h_worst = 0.0, f_worst = 0.0, det_worst = 0.0;
  const Aabb2 box = testing::image_box();
  for (int trial = 0; trial < 1000; ++trial) {
    const Mat3 H = testing::random_homography(rng);
    Correspondences pts;
    while (pts.size() < 104) {
      Correspondence c;
      c.p = uniform_point(rng, box);
      if (!project_homography(H, c.p, c.q)) continue;
      pts.push_back(c);
    }
    const Correspondences sample(pts.begin(), pts.begin() + 4);
    double best = kInfiniteResidual;
    for (const auto& sol : homography_4pt(sample)) {
      double worst = 0.0;
      for (std::size_t i = 4; i < pts.size(); ++i) worst = std::max(worst, residual_homography(sol, pts[i]));
      best = std::min(best, worst);
    }
    h_worst = std::max(h_worst, best);
    if (!(best <= 1e-6)) ++h_fail;
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const auto stereo = testing::random_stereo(rng);
    Correspondences pts;
    while (pts.size() < 107) {
      Correspondence c;
      if (testing::project_pair(stereo, testing::random_scene_point(rng, stereo), c)) pts.push_back(c);
    }
    const Correspondences sample(pts.begin(), pts.begin() + 7);
    double best = kInfiniteResidual;
    for (const auto& sol : fundamental_7pt(sample)) {
      ++f_solutions;
      const Mat3 unit = sol.F / sol.F.norm();
      const double det = std::abs(unit.determinant());
      det_worst = std::max(det_worst, det);
      if (!(det <= 1e-8)) ++det_fail;
      double worst = 0.0;
      for (std::size_t i = 7; i < pts.size(); ++i) worst = std::max(worst, residual_epipolar(sol, pts[i]));
      best = std::min(best, worst);
    }
    f_worst = std::max(f_worst, best);
    if (!(best <= 1e-6)) ++f_fail;
  }
  return {h_fail + f_fail + det_fail == 0,
          fmt("4pt H: %zu/1000 failures, worst held-out residual %.2e; 7pt F: %zu/1000 failures, worst %.2e; "
              "det(F) above 1e-8: %zu of %zu solutions, worst %.2e",
              h_fail, h_worst, f_fail, f_worst, det_fail, f_solutions, det_worst)};
}

// ---------------------------------------------------------------------------
// CLI determinism.

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome check_determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no --cli given"};
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / fmt("cullsac_acceptance_%lld",
                                                       static_cast<long long>(Clock::now().time_since_epoch().count()));
  fs::create_directories(dir);
  const auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  std::size_t compared = 0, differing = 0, failed = 0;
  for (const std::string model : {"h", "f", "e", "rh"}) {
    const fs::path matches = dir / (model + ".txt");
    if (!run(fmt("synth --model %s --n 1500 --ratio 0.3 --seed 11 --out \"%s\"", model.c_str(), matches.c_str()))) {
      ++failed;
      continue;
    }
    for (const std::string strategy : {"trad", "grid", "sprt", "grid-sprt"}) {
      std::string outputs[2];
      for (int rep = 0; rep < 2; ++rep) {
        const fs::path out = dir / fmt("est_%s_%s_%d.json", model.c_str(), strategy.c_str(), rep);
        if (!run(fmt("estimate \"%s\" --strategy %s --seed 5 --inlier-ids --out \"%s\"", matches.c_str(),
                     strategy.c_str(), out.c_str())))
          ++failed;
        outputs[rep] = slurp(out);
      }
      ++compared;
      if (outputs[0].empty() || outputs[0] != outputs[1]) ++differing;
    }
  }
  std::string csv[2];
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path out = dir / fmt("bench_%d.csv", rep);
    if (!run(fmt("bench --models h,f,rh --strategies grid,sprt,grid-sprt --cells 2,4 --iters 200 --seeds 0,1 "
                 "--n 1500 --out \"%s\"",
                 out.c_str())))
      ++failed;
    csv[rep] = harness::strip_timing_columns(slurp(out));
  }
  ++compared;
  if (csv[0].empty() || csv[0] != csv[1]) ++differing;
  std::error_code ec;
  fs::remove_all(dir, ec);
  return {failed == 0 && differing == 0,
          fmt("%zu output pairs compared, %zu differ, %zu failed invocations", compared, differing, failed)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cullsac acceptance suite"};
  std::string cli;
  bool strict = false;
  std::string report_path;
  app.add_option("--cli", cli, "Path of the cullsac executable");
  app.add_option("--report", report_path, "Also write the result lines to this file");
  app.add_flag("--strict", strict, "Exit with status 1 when any criterion fails");
  CLI11_PARSE(app, argc, argv);

  std::ofstream report_file;
  if (!report_path.empty()) report_file.open(report_path);
  const auto emit = [&](const std::string& line) {
    std::cout << line << std::endl;
    if (report_file) report_file << line << std::endl;
  };
  std::size_t passed = 0, total = 0;
  const auto report = [&](const char* name, const Outcome& o, double secs) {
    ++total;
    if (o.pass) ++passed;
    emit((o.pass ? "PASS " : "FAIL ") + std::string(name) + ": " + o.detail + fmt(" [%.1f s]", secs));
  };

  const auto timed = [](auto&& check) {
    const auto t0 = Clock::now();
    Outcome o = check();
    return std::pair{o, seconds_since(t0)};
  };

  try {
    const auto t0 = Clock::now();
    const auto suite = run_suite();
    const double suite_secs = seconds_since(t0);
    report("exactness", check_exactness(suite, suite_secs), suite_secs);

    auto [conservative, conservative_secs] = timed(check_conservative);
    report("conservative-bounds", conservative, conservative_secs);

    const auto t1 = Clock::now();
    BenchResults b;
    b.h_grid = bench(ModelFamily::homography, {Strategy::partition}, {4}, {10000});
    b.f_grid = bench(ModelFamily::fundamental, {Strategy::partition}, {2, 8}, {10000});
    for (const auto family : {ModelFamily::homography, ModelFamily::fundamental}) {
      auto rows = bench(family, {Strategy::sprt, Strategy::partition_sprt}, {2, 4, 8}, {1000, 10000});
      b.combined.insert(b.combined.end(), rows.begin(), rows.end());
    }
    const double bench_secs = seconds_since(t1);
    report("work-reduction", check_work_reduction(b), bench_secs);
    report("grid-size-tradeoff", check_tradeoff(b), 0.0);

    report("early-rejection", check_early_rejection(suite), 0.0);
    report("combined-sprt", check_combined(b), 0.0);

    auto [poly, poly_secs] = timed(check_polynomials);
    report("polynomial-machinery", poly, poly_secs);
    auto [solvers, solver_secs] = timed(check_solvers);
    report("solver-correctness", solvers, solver_secs);
    auto [det, det_secs] = timed([&] { return check_determinism(cli); });
    report("determinism", det, det_secs);
  } catch (const std::exception& e) {
    emit(std::string("ERROR acceptance suite aborted: ") + e.what());
    return 2;
  }

  emit(fmt("%zu/%zu criteria passed", passed, total));
  return strict && passed != total ? 1 : 0;
}
