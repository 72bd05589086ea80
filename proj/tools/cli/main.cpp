// cullsac: synthetic data, estimation runs, benchmark sweeps and plots.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cullsac/engine.hpp"
#include "harness/bench.hpp"
#include "harness/matches_io.hpp"
#include "harness/plot.hpp"
#include "harness/synth.hpp"

namespace {

using namespace cullsac;
using namespace cullsac::harness;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs `write` against the --out file, or stdout when none was given.
template <class F>
void with_output(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write(out);
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& text, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    try {
      out.push_back(parse(item));
    } catch (const std::exception&) {
      throw UsageError("bad list item '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("empty list '" + text + "'");
  return out;
}

Mat3 intrinsics_from(const std::vector<double>& v) {
  if (v.size() != 4) throw UsageError("intrinsics need fx,fy,cx,cy");
  Mat3 K = Mat3::Identity();
  K(0, 0) = v[0];
  K(1, 1) = v[1];
  K(0, 2) = v[2];
  K(1, 2) = v[3];
  return K;
}

nlohmann::ordered_json matrix_json(const Mat3& m) {
  auto rows = nlohmann::ordered_json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

struct SynthOptions {
  std::string model = "h";
  std::size_t n = 1000;
  double ratio = 0.3;
  double sigma = 1.0;
  double width = 640.0;
  double height = 480.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_synth(const SynthOptions& o) {
  SynthConfig sc;
  sc.family = parse_family(o.model);
  sc.n = o.n;
  sc.inlier_ratio = o.ratio;
  sc.noise_sigma = o.sigma;
  sc.width = o.width;
  sc.height = o.height;
  sc.seed = o.seed;
  SynthData data;
  try {
    data = synth_generate(sc);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  MatchesFile file;
  file.matches = data.matches;
  file.family = sc.family;
  file.model = model_matrix(data.truth);
  file.context = data.context;
  file.extent_1 = data.extent_1;
  file.extent_2 = data.extent_2;
  file.explicit_extent_1 = file.explicit_extent_2 = true;
  with_output(o.out, [&](std::ostream& os) {
    os << "# synthetic matches: n " << o.n << " ratio " << format_double(o.ratio) << " sigma "
       << format_double(o.sigma) << " seed " << o.seed << '\n';
    write_matches(os, file);
  });
  return kOk;
}

struct EstimateOptions {
  std::string in;
  std::string model;
  std::string strategy = "trad";
  int cells = 4;
  double threshold = 3.0;
  std::optional<double> eps_r;
  std::optional<std::size_t> iters;
  double confidence = 0.99;
  std::size_t max_iters = 5000;
  std::uint64_t seed = 0;
  std::string scoring = "ransac";
  bool no_lo = false;
  bool timing = false;
  bool ids = false;
  std::vector<double> intrinsics1, intrinsics2;
  std::optional<double> lambda1, lambda2;
  int radial_nodes = 4;
  std::string out;
};

int run_estimate(const EstimateOptions& o) {
  MatchesFile file;
  try {
    file = parse_matches_file(o.in);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }

  RansacConfig config;
  if (!o.model.empty()) config.family = parse_family(o.model);
  else if (file.family) config.family = *file.family;
  else throw UsageError("--model is required when the file does not name a family");
  config.strategy = parse_strategy(o.strategy);
  config.cells_per_axis_1 = config.cells_per_axis_2 = o.cells;
  config.threshold = o.threshold;
  config.eps_r = o.eps_r.value_or(default_eps_r(config.family));
  config.fixed_iterations = o.iters;
  config.confidence = o.confidence;
  config.max_iterations = o.max_iters;
  config.seed = o.seed;
  config.lo_enabled = !o.no_lo;
  config.cull.radial_nodes = o.radial_nodes;
  if (o.scoring == "msac") config.scoring = Scoring::msac;
  else if (o.scoring != "ransac") throw UsageError("--scoring must be ransac or msac");
  config.context = file.context;
  if (!o.intrinsics1.empty()) config.context.K1 = intrinsics_from(o.intrinsics1);
  if (!o.intrinsics2.empty()) config.context.K2 = intrinsics_from(o.intrinsics2);
  if (o.lambda1) config.context.lambda1 = *o.lambda1;
  if (o.lambda2) config.context.lambda2 = *o.lambda2;
  if (file.explicit_extent_1) config.extent_1 = file.extent_1;
  if (file.explicit_extent_2) config.extent_2 = file.extent_2;
  if (file.matches.size() < sample_size(config.family)) {
    throw DataError("need at least " + std::to_string(sample_size(config.family)) + " matches");
  }

  RansacResult result;
  try {
    result = ransac(file.matches, config);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  nlohmann::ordered_json j;
  j["model_family"] = std::string(to_string(config.family));
  j["strategy"] = std::string(to_string(config.strategy));
  j["n"] = file.matches.size();
  j["found"] = result.best_model.has_value();
  if (result.best_model) j["model"] = matrix_json(model_matrix(*result.best_model));
  j["inliers"] = result.best_score.inlier_count;
  j["loss"] = result.best_score.loss;
  j["iterations"] = result.iterations_run;
  j["evaluated_points"] = result.stats.evaluated_points;
  j["culled_points"] = result.stats.culled_points;
  j["models_verified"] = result.stats.models_verified;
  j["early_rejections"] = result.stats.early_rejections;
  j["sprt_rejections"] = result.stats.sprt_rejections;
  if (o.ids) j["inlier_ids"] = result.inlier_ids;
  if (o.timing) {
    j["timing_ms"] = {{"cell_rejection", result.stats.cell_rejection_time.count() * 1e-6},
                      {"verification", result.stats.verification_time.count() * 1e-6},
                      {"total", result.wall_time.count() * 1e-6}};
  }
  with_output(o.out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  if (!result.best_model) {
    std::cerr << "no model found\n";
    return kNumeric;
  }
  return kOk;
}

struct BenchOptions {
  std::string models = "h";
  std::string strategies = "grid";
  std::string cells = "4";
  std::string iters = "1000";
  std::string seeds = "0";
  std::size_t n = 8000;
  double ratio = 0.1;
  double sigma = 1.0;
  double threshold = 3.0;
  std::optional<double> eps_r;
  std::size_t repeats = 1;
  bool no_lo = false;
  std::string out;
};

int run_bench_cmd(const BenchOptions& o) {
  BenchSweep sweep;
  sweep.families = parse_list<ModelFamily>(o.models, [](const std::string& s) { return parse_family(s); });
  sweep.strategies = parse_list<Strategy>(o.strategies, [](const std::string& s) { return parse_strategy(s); });
  sweep.cells = parse_list<int>(o.cells, [](const std::string& s) {
    const int v = std::stoi(s);
    if (v < 1) throw std::invalid_argument("cells");
    return v;
  });
  sweep.iterations = parse_list<std::size_t>(o.iters, [](const std::string& s) {
    const auto v = std::stoull(s);
    if (v < 1) throw std::invalid_argument("iters");
    return static_cast<std::size_t>(v);
  });
  sweep.seeds = parse_list<std::uint64_t>(o.seeds, [](const std::string& s) { return std::stoull(s); });
  sweep.n = o.n;
  sweep.inlier_ratio = o.ratio;
  sweep.noise_sigma = o.sigma;
  sweep.threshold = o.threshold;
  sweep.eps_r = o.eps_r;
  sweep.repeats = o.repeats;
  sweep.lo_enabled = !o.no_lo;
  const auto rows = run_bench(sweep, [](const BenchRow& r) {
    std::cerr << r.model_family << ' ' << r.strategy << " [" << r.cells_per_axis << "] iters " << r.fixed_iterations
              << " seed " << r.seed << ": " << (r.error.empty() ? std::to_string(r.total_ms) + " ms" : r.error)
              << '\n';
  });
  with_output(o.out, [&](std::ostream& os) { write_csv(os, rows); });
  return kOk;
}

struct PlotOptions {
  std::string in;
  std::string kind = "relative_time_vs_iters";
  std::string out;
};

int run_plot(const PlotOptions& o) {
  const PlotKind kind = parse_plot_kind(o.kind);
  std::ifstream in(o.in);
  if (!in) throw DataError("cannot open " + o.in);
  std::vector<BenchRow> rows;
  try {
    rows = read_csv(in);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  if (rows.empty()) std::cerr << "warning: no rows in " << o.in << '\n';
  with_output(o.out, [&](std::ostream& os) { os << emit_svg(rows, kind); });
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust two-view estimation with cell-based verification culling"};
  app.require_subcommand(1);

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Generate synthetic matches with a known model");
  synth->add_option("--model", so.model, "Model family: h, f, e, rh")->capture_default_str();
  synth->add_option("--n", so.n, "Number of matches")->capture_default_str();
  synth->add_option("--ratio", so.ratio, "Inlier ratio in (0,1]")->capture_default_str();
  synth->add_option("--sigma", so.sigma, "Inlier noise (pixels)")->capture_default_str();
  synth->add_option("--width", so.width, "Image width")->capture_default_str();
  synth->add_option("--height", so.height, "Image height")->capture_default_str();
  synth->add_option("--seed", so.seed, "Random seed")->capture_default_str();
  synth->add_option("--out", so.out, "Output file (default stdout)");

  EstimateOptions eo;
  auto* estimate = app.add_subcommand("estimate", "Estimate a model from a matches file");
  estimate->add_option("input", eo.in, "Matches file: 'x1 y1 x2 y2 [score]' per line")->required();
  estimate->add_option("--model", eo.model, "Model family: h, f, e, rh (default: from file)");
  estimate->add_option("--strategy", eo.strategy, "trad, grid, sprt, grid-sprt")->capture_default_str();
  estimate->add_option("--cells", eo.cells, "Grid cells per axis")->capture_default_str()->check(CLI::PositiveNumber);
  estimate->add_option("--threshold", eo.threshold, "Inlier threshold (pixels)")->capture_default_str();
  estimate->add_option("--eps-r", eo.eps_r, "Early-rejection factor (default 1.6 for h, 1.2 otherwise)");
  estimate->add_option("--iters", eo.iters, "Run exactly this many iterations");
  estimate->add_option("--confidence", eo.confidence, "Termination confidence")->capture_default_str();
  estimate->add_option("--max-iters", eo.max_iters, "Iteration cap")->capture_default_str();
  estimate->add_option("--seed", eo.seed, "Random seed")->capture_default_str();
  estimate->add_option("--scoring", eo.scoring, "ransac or msac")->capture_default_str();
  estimate->add_option("--intrinsics1", eo.intrinsics1, "fx fy cx cy for image 1")->expected(4);
  estimate->add_option("--intrinsics2", eo.intrinsics2, "fx fy cx cy for image 2")->expected(4);
  estimate->add_option("--lambda1", eo.lambda1, "Division-model coefficient of image 1 (1/px^2)");
  estimate->add_option("--lambda2", eo.lambda2, "Division-model coefficient of image 2 (1/px^2)");
  estimate->add_option("--radial-nodes", eo.radial_nodes, "Chebyshev nodes per cell edge for radial bounds")
      ->capture_default_str()
      ->check(CLI::Range(2, 11));
  estimate->add_flag("--no-lo", eo.no_lo, "Disable local optimization");
  estimate->add_flag("--timing", eo.timing, "Include wall-clock timings in the output");
  estimate->add_flag("--inlier-ids", eo.ids, "List inlier indices in the output");
  estimate->add_option("--out", eo.out, "Output JSON file (default stdout)");

  BenchOptions bo;
  auto* bench = app.add_subcommand("bench", "Run a benchmark sweep on synthetic data and write CSV");
  bench->add_option("--models", bo.models, "Comma list of families")->capture_default_str();
  bench->add_option("--strategies", bo.strategies, "Comma list of strategies")->capture_default_str();
  bench->add_option("--cells", bo.cells, "Comma list of cells per axis")->capture_default_str();
  bench->add_option("--iters", bo.iters, "Comma list of fixed iteration counts")->capture_default_str();
  bench->add_option("--seeds", bo.seeds, "Comma list of seeds")->capture_default_str();
  bench->add_option("--n", bo.n, "Matches per dataset")->capture_default_str();
  bench->add_option("--ratio", bo.ratio, "Inlier ratio")->capture_default_str();
  bench->add_option("--sigma", bo.sigma, "Inlier noise (pixels)")->capture_default_str();
  bench->add_option("--threshold", bo.threshold, "Inlier threshold (pixels)")->capture_default_str();
  bench->add_option("--eps-r", bo.eps_r, "Early-rejection factor (default per family)");
  bench->add_option("--repeats", bo.repeats, "Timed runs per configuration (median)")->capture_default_str();
  bench->add_flag("--no-lo", bo.no_lo, "Disable local optimization");
  bench->add_option("--out", bo.out, "Output CSV file (default stdout)");
  bench->footer(std::string("CSV columns: ") + kCsvHeader +
                "\nOne traditional baseline row per (family, iterations, seed) precedes the strategy rows.");

  PlotOptions po;
  auto* plot = app.add_subcommand("plot", "Render a benchmark CSV as SVG");
  plot->add_option("input", po.in, "Benchmark CSV")->required();
  plot->add_option("--kind", po.kind, "relative_time_vs_iters, cdf_times, points_verified")->capture_default_str();
  plot->add_option("--out", po.out, "Output SVG file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*synth) return run_synth(so);
    if (*estimate) return run_estimate(eo);
    if (*bench) return run_bench_cmd(bo);
    if (*plot) return run_plot(po);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
