#include "cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fixpoint/body_json.hpp"
#include "fixpoint/error.hpp"
#include "fixpoint/fixedpoints.hpp"
#include "fixpoint/harness.hpp"
#include "fixpoint/learners.hpp"
#include "fixpoint/lowerbounds.hpp"
#include "fixpoint/packing.hpp"
#include "fixpoint/widths.hpp"

namespace fixpoint::cli {

using nlohmann::json;

namespace {

void echo_config(std::ostream& out, const json& config) { out << "# " << config.dump() << '\n'; }

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(what + ": invalid JSON: " + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json(buffer.str(), "config file '" + path + "'");
}

Vector shift_or_origin(const std::string& text, const ConvexBody& body) {
  if (text.empty()) return Vector::Zero(body.dimension());
  Vector shift = vector_from_json(parse_json(text, "--shift"));
  if (shift.size() != body.dimension()) throw InvalidArgument("--shift: dimension does not match the body");
  return shift;
}

GridConfig grid_options(CLI::App* sub, GridConfig& grid) {
  sub->add_option("--grid-points", grid.points, "Number of log-spaced grid scales")->check(CLI::Range(16, 100000));
  sub->add_option("--refine-steps", grid.refine_steps, "Bisection steps between bracketing cells")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--min-fraction", grid.min_fraction, "Grid minimum relative to the circumradius");
  sub->add_option("--mc", grid.mc_samples, "Monte Carlo draws per width estimate")->check(CLI::Range(2, 1 << 30));
  sub->add_option("--pool", grid.pool_size, "Pool size for packing estimates")->check(CLI::Range(1, 1 << 30));
  return grid;
}

struct Options {
  // shared
  std::string body;
  std::string design = "gaussian";
  std::uint64_t seed = 0;
  std::string output;

  // width / pack
  std::string shift;
  std::vector<double> scales;
  int mc = 512;
  int pool = 4096;

  // fixedpoint
  std::string kind;
  int N = 0;
  double constant = 1.0;
  int shift_count = 8;
  GridConfig grid;
  std::string curve;

  // learn / sweep
  std::string config;
  std::string noise = "none";
  double sigma = 1.0;
  double q = 4.0;
  std::string truth = "origin";
  std::vector<int> sample_sizes;
  int trials = 1;
  std::string learner = "erm";
  double r = 0.0;
  double eta1 = 0.0;
  double eta2 = 1.0;
  std::string net_pool = "localized";
  bool timing = false;
  std::string trials_output;

  // gap-demo
  double p = 1.5;
  std::vector<int> dimensions{64, 256, 1024};
  int gap_N = 64;
  double kappa1 = 2.0;
  double gap_eta1 = 1.0;

  // versionspace
  int directions = 64;
  double richness_r = 0.0;
  double richness_c = 1.0;
  int richness_trials = 20;

  // shift-check
  std::vector<double> box;
  std::string polytope;
  std::vector<double> z;
  double shift_sigma = 1.0;
  int shift_mc = 200'000;
};

void run_width(const Options& o, std::ostream& out) {
  const ClassSpec cls{parse_body(o.body), design_law_from_string(o.design)};
  const Vector shift = shift_or_origin(o.shift, cls.body);
  echo_config(out, {{"command", "width"},
                    {"body", body_to_json(cls.body)},
                    {"design", o.design},
                    {"shift", vector_to_json(shift)},
                    {"scales", o.scales},
                    {"mc_samples", o.mc},
                    {"seed", o.seed}});
  out << "scale,width,std_error,mc_samples\n";
  for (double s : o.scales) {
    const auto w = estimate_width(cls, shift, s, o.mc, o.seed);
    out << format_number(s) << ',' << format_number(w.value) << ',' << format_number(w.std_error) << ','
        << w.mc_samples << '\n';
  }
}

void run_pack(const Options& o, std::ostream& out) {
  const ClassSpec cls{parse_body(o.body), design_law_from_string(o.design)};
  const Vector shift = shift_or_origin(o.shift, cls.body);
  echo_config(out, {{"command", "pack"},
                    {"body", body_to_json(cls.body)},
                    {"shift", vector_to_json(shift)},
                    {"scales", o.scales},
                    {"pool_size", o.pool},
                    {"seed", o.seed}});
  out << "scale,separation,count,pool_size\n";
  for (double s : o.scales) {
    const auto estimate = local_pack(cls, shift, s, o.pool, o.seed);
    out << format_number(s) << ',' << format_number(estimate.separation) << ',' << estimate.count << ','
        << estimate.pool_size << '\n';
  }
}

void run_fixedpoint(const Options& o, std::ostream& out, std::ostream& err) {
  const ClassSpec cls{parse_body(o.body), design_law_from_string(o.design)};
  const auto kind = fixed_point_kind_from_string(o.kind);
  const auto shifts = default_shifts(cls.body, o.shift_count, o.seed);
  echo_config(out, {{"command", "fixedpoint"},
                    {"kind", o.kind},
                    {"body", body_to_json(cls.body)},
                    {"design", o.design},
                    {"N", o.N},
                    {"constant", o.constant},
                    {"shift_count", o.shift_count},
                    {"grid",
                     {{"points", o.grid.points},
                      {"refine_steps", o.grid.refine_steps},
                      {"min_fraction", o.grid.min_fraction},
                      {"mc_samples", o.grid.mc_samples},
                      {"pool_size", o.grid.pool_size}}},
                    {"seed", o.seed}});
  err << "fixedpoint: solving " << o.kind << " over " << shifts.size() << " shifts\n";
  const auto result = solve_fixed_point(kind, cls, o.N, o.constant, shifts, o.grid, o.seed);
  out << "kind,constant,N,value,low,high,floored,unresolved,noisy,critical_shift\n";
  out << to_string(result.kind) << ',' << format_number(result.constant) << ',' << result.sample_size << ','
      << format_number(result.value) << ',' << format_number(result.low) << ',' << format_number(result.high) << ','
      << (result.floored ? "true" : "false") << ',' << (result.unresolved ? "true" : "false") << ','
      << (result.noisy ? "true" : "false") << ',' << result.critical_shift << '\n';
  if (!o.curve.empty()) {
    std::ofstream curve(o.curve);
    if (!curve) throw InvalidArgument("--curve: cannot open '" + o.curve + "' for writing");
    write_curve_csv(curve, result);
  }
}

ExperimentConfig learn_config(const Options& o) {
  if (!o.config.empty()) {
    json j = read_json_file(o.config);
    if (o.timing) j["timing"] = true;
    return experiment_from_json(j);
  }
  if (o.body.empty()) throw InvalidArgument("learn: --body or --config is required");
  if (o.sample_sizes.empty()) throw InvalidArgument("learn: --N or --config is required");
  json j;
  j["body"] = parse_json(o.body, "--body");
  j["design"] = o.design;
  if (o.noise == "none")
    j["noise"] = {{"kind", "none"}};
  else if (o.noise == "gaussian")
    j["noise"] = {{"kind", "gaussian"}, {"sigma", o.sigma}};
  else if (o.noise == "student_t")
    j["noise"] = {{"kind", "student_t"}, {"sigma", o.sigma}, {"q", o.q}};
  else
    throw InvalidArgument("--noise must be none, gaussian or student_t");
  j["truth"] = o.truth;
  j["N"] = o.sample_sizes;
  j["trials"] = o.trials;
  j["learner"] = o.learner;
  if (o.r > 0.0)
    j["scale_policy"] = {{"mode", "explicit"}, {"r", o.r}};
  else {
    j["scale_policy"] = {{"mode", "auto"}, {"eta2", o.eta2}};
    if (o.eta1 > 0.0) j["scale_policy"]["eta1"] = o.eta1;
  }
  j["grid"] = {{"points", o.grid.points},
               {"refine_steps", o.grid.refine_steps},
               {"min_fraction", o.grid.min_fraction},
               {"mc_samples", o.grid.mc_samples},
               {"pool_size", o.grid.pool_size}};
  j["shift_count"] = o.shift_count;
  j["pool_size"] = o.pool;
  j["net_pool"] = o.net_pool;
  j["timing"] = o.timing;
  j["seed"] = o.seed;
  return experiment_from_json(j);
}

void report_errors(const SweepResult& result, std::ostream& err) {
  for (const auto& message : result.errors) err << "warning: " << message << '\n';
}

bool run_learn(const Options& o, std::ostream& out, std::ostream& err) {
  const ExperimentConfig config = learn_config(o);
  echo_config(out, {{"command", "learn"}, {"config", experiment_to_json(config)}});
  const auto result = run_sweep(config);
  report_errors(result, err);
  write_trials_csv(out, result.trials);
  return result.convergence_failures > 0;
}

bool run_sweep_command(const Options& o, std::ostream& out, std::ostream& err) {
  json j = read_json_file(o.config);
  if (o.timing) j["timing"] = true;
  const ExperimentConfig config = experiment_from_json(j);
  echo_config(out, {{"command", "sweep"}, {"config", experiment_to_json(config)}});
  const auto result = run_sweep(config);
  report_errors(result, err);
  write_sweep_csv(out, result.rows);
  if (!o.trials_output.empty()) {
    std::ofstream trials(o.trials_output);
    if (!trials) throw InvalidArgument("--trials-output: cannot open '" + o.trials_output + "' for writing");
    echo_config(trials, {{"command", "sweep"}, {"config", experiment_to_json(config)}});
    write_trials_csv(trials, result.trials);
  }
  return result.convergence_failures > 0;
}

void run_gap_demo(const Options& o, std::ostream& out, std::ostream& err) {
  echo_config(out, {{"command", "gap-demo"},
                    {"p", o.p},
                    {"n", o.dimensions},
                    {"N", o.gap_N},
                    {"kappa1", o.kappa1},
                    {"eta1", o.gap_eta1},
                    {"grid",
                     {{"points", o.grid.points},
                      {"refine_steps", o.grid.refine_steps},
                      {"min_fraction", o.grid.min_fraction},
                      {"mc_samples", o.grid.mc_samples},
                      {"pool_size", o.grid.pool_size}}},
                    {"seed", o.seed}});
  err << "gap-demo: " << o.dimensions.size() << " dimensions\n";
  write_gap_csv(out, gap_demo(o.p, o.dimensions, o.gap_N, GapConstants{o.kappa1, o.gap_eta1}, o.grid, o.seed));
}

void run_versionspace(const Options& o, std::ostream& out) {
  const ClassSpec cls{parse_body(o.body), design_law_from_string(o.design)};
  const int n = cls.body.dimension();
  if (o.richness_r > 0.0) {
    echo_config(out, {{"command", "versionspace"},
                      {"body", body_to_json(cls.body)},
                      {"design", o.design},
                      {"N", o.N},
                      {"r", o.richness_r},
                      {"c", o.richness_c},
                      {"trials", o.richness_trials},
                      {"pool_size", o.pool},
                      {"directions", o.directions},
                      {"seed", o.seed}});
    const auto report =
        kernel_richness_check(cls, o.richness_r, o.N, o.richness_c, o.pool, o.richness_trials, o.seed, o.directions);
    json j{{"precondition_met", report.precondition_met},
           {"fraction_holding", report.fraction_holding},
           {"diameters", report.diameters},
           {"threshold", report.threshold},
           {"log_packing", report.log_packing},
           {"required", report.required},
           {"status", to_string(report.status)}};
    out << j.dump(2) << '\n';
    return;
  }
  echo_config(out, {{"command", "versionspace"},
                    {"body", body_to_json(cls.body)},
                    {"design", o.design},
                    {"N", o.N},
                    {"directions", o.directions},
                    {"seed", o.seed}});
  Matrix X(o.N, n);
  for (int i = 0; i < o.N; ++i)
    X.row(i) = sample_design_row(cls.design, n, o.seed, static_cast<std::uint64_t>(i)).transpose();
  const auto probe = version_space_diameter(cls.body, X, o.directions, o.seed);
  json j{{"kernel_dimension", probe.kernel_dimension},
         {"diameter_lower_bound", probe.diameter_lower_bound},
         {"directions", probe.directions_sampled},
         {"witness_first", vector_to_json(probe.witness_first)},
         {"witness_second", vector_to_json(probe.witness_second)}};
  out << j.dump(2) << '\n';
}

void run_shift_check(const Options& o, std::ostream& out) {
  const Vector z = Eigen::Map<const Vector>(o.z.data(), static_cast<Eigen::Index>(o.z.size()));
  ShiftSet set;
  json set_json;
  if (!o.polytope.empty()) {
    if (!o.box.empty()) throw InvalidArgument("shift-check: give either --box or --polytope, not both");
    const json j = parse_json(o.polytope, "--polytope");
    if (!j.is_object() || !j.contains("A") || !j.contains("b"))
      throw InvalidArgument("--polytope: expected {\"A\": [[...], ...], \"b\": [...]}");
    PolytopeSet poly;
    poly.b = vector_from_json(j.at("b"));
    poly.A.resize(poly.b.size(), z.size());
    if (j.at("A").size() != static_cast<std::size_t>(poly.b.size()))
      throw InvalidArgument("--polytope: A and b have different row counts");
    for (Eigen::Index i = 0; i < poly.b.size(); ++i) {
      const Vector row = vector_from_json(j.at("A").at(static_cast<std::size_t>(i)));
      if (row.size() != z.size()) throw InvalidArgument("--polytope: row dimension does not match --z");
      poly.A.row(i) = row.transpose();
    }
    set = poly;
    set_json = {{"polytope", j}};
  } else {
    if (o.box.empty()) throw InvalidArgument("shift-check: --box or --polytope is required");
    Vector half(z.size());
    if (o.box.size() == 1)
      half.setConstant(o.box.front());
    else if (o.box.size() == o.z.size())
      half = Eigen::Map<const Vector>(o.box.data(), static_cast<Eigen::Index>(o.box.size()));
    else
      throw InvalidArgument("--box: give one half-width or one per coordinate of --z");
    if ((half.array() < 0.0).any()) throw InvalidArgument("--box: half-widths must be nonnegative");
    set = BoxSet{-half, half};
    set_json = {{"box", vector_to_json(half)}};
  }
  echo_config(out, {{"command", "shift-check"},
                    {"set", set_json},
                    {"z", o.z},
                    {"sigma", o.shift_sigma},
                    {"mc_samples", o.shift_mc},
                    {"seed", o.seed}});
  const auto check = gaussian_shift_check(set, z, o.shift_sigma, o.shift_mc, o.seed);
  out << "lhs,rhs,std_error,exact,holds\n";
  out << format_number(check.lhs) << ',' << format_number(check.rhs) << ',' << format_number(check.std_error) << ','
      << (check.exact ? "true" : "false") << ',' << (check.holds ? "true" : "false") << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Fixed-point complexity parameters, net-ERM experiments and lower-bound probes", "fixpoint"};
  app.option_defaults()->always_capture_default();
  app.failure_message(CLI::FailureMessage::help);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--output,-o", o.output, "Write results to this file instead of stdout");

  auto add_body = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--body", o.body, R"(Body JSON, e.g. {"variant":"lp_ball","n":8,"p":2,"R":1})");
    if (required) opt->required();
    sub->add_option("--design", o.design, "Design law: gaussian or rademacher");
  };
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "Random seed"); };

  auto* width = app.add_subcommand("width", "Monte Carlo localized gaussian width");
  add_body(width, true);
  width->add_option("--shift", o.shift, "Shift (JSON array, default origin)");
  width->add_option("--scale", o.scales, "Localization scales s")->required()->delimiter(',');
  width->add_option("--mc", o.mc, "Monte Carlo draws")->check(CLI::Range(2, 1 << 30));
  add_seed(width);

  auto* pack = app.add_subcommand("pack", "Local packing count at localization 4s and separation s/2");
  add_body(pack, true);
  pack->add_option("--shift", o.shift, "Shift (JSON array, default origin)");
  pack->add_option("--scale", o.scales, "Scales s")->required()->delimiter(',');
  pack->add_option("--pool", o.pool, "Pool size")->check(CLI::Range(1, 1 << 30));
  add_seed(pack);

  auto* fixedpoint = app.add_subcommand("fixedpoint", "Solve one of the fixed points r_M, r_Q, gamma_M, gamma_Q");
  fixedpoint->add_option("--kind", o.kind, "r_M, r_Q, gamma_M or gamma_Q")
      ->required()
      ->check(CLI::IsMember({"r_M", "r_Q", "gamma_M", "gamma_Q"}));
  add_body(fixedpoint, true);
  fixedpoint->add_option("--N", o.N, "Sample size")->required()->check(CLI::PositiveNumber);
  fixedpoint->add_option("--constant", o.constant, "kappa1, kappa2, eta1 or eta2 (per kind)")->check(CLI::PositiveNumber);
  fixedpoint->add_option("--shifts", o.shift_count, "Random boundary shifts in addition to the origin")
      ->check(CLI::NonNegativeNumber);
  grid_options(fixedpoint, o.grid);
  fixedpoint->add_option("--curve", o.curve, "Also write the evaluated curve to this CSV file");
  add_seed(fixedpoint);

  auto* learn = app.add_subcommand("learn", "Run ERM or net-ERM trials and emit per-trial excess risk");
  learn->add_option("--config", o.config, "Experiment config JSON file (overrides the flags below)");
  add_body(learn, false);
  learn->add_option("--noise", o.noise, "none, gaussian or student_t")
      ->check(CLI::IsMember({"none", "gaussian", "student_t"}));
  learn->add_option("--sigma", o.sigma, "Noise standard deviation")->check(CLI::PositiveNumber);
  learn->add_option("--q", o.q, "student_t moment index (degrees of freedom 2q)");
  learn->add_option("--truth", o.truth, "origin or random_boundary")
      ->check(CLI::IsMember({"origin", "random_boundary"}));
  learn->add_option("--N", o.sample_sizes, "Sample sizes (strictly increasing)")->delimiter(',');
  learn->add_option("--trials", o.trials, "Trials per sample size")->check(CLI::PositiveNumber);
  learn->add_option("--learner", o.learner, "erm or net_erm")->check(CLI::IsMember({"erm", "net_erm"}));
  learn->add_option("--r", o.r, "Explicit net scale (0 selects the automatic scale)")->check(CLI::NonNegativeNumber);
  learn->add_option("--eta1", o.eta1, "eta1 for the automatic scale (0 selects 1/sigma)")->check(CLI::NonNegativeNumber);
  learn->add_option("--eta2", o.eta2, "eta2 for the automatic scale")->check(CLI::PositiveNumber);
  learn->add_option("--shifts", o.shift_count, "Random boundary shifts in addition to the origin")
      ->check(CLI::NonNegativeNumber);
  learn->add_option("--net-pool-size", o.pool, "Net pool size")->check(CLI::Range(1, 1 << 30));
  learn->add_option("--net-pool", o.net_pool, "localized or global")->check(CLI::IsMember({"localized", "global"}));
  grid_options(learn, o.grid);
  learn->add_flag("--timing", o.timing, "Record wall-clock time per trial");
  add_seed(learn);

  auto* sweep = app.add_subcommand("sweep", "Rate sweep over N with fixed-point predictions");
  sweep->add_option("--config", o.config, "Experiment config JSON file")->required();
  sweep->add_option("--trials-output", o.trials_output, "Also write per-trial records to this CSV file");
  sweep->add_flag("--timing", o.timing, "Record wall-clock time per trial");

  auto* gap = app.add_subcommand("gap-demo", "r_M against gamma_M on l_p balls");
  gap->add_option("--p", o.p, "Exponent in (1, 2)");
  gap->add_option("--n", o.dimensions, "Dimensions")->delimiter(',');
  gap->add_option("--N", o.gap_N, "Sample size")->check(CLI::PositiveNumber);
  gap->add_option("--kappa1", o.kappa1, "kappa1 for r_M")->check(CLI::PositiveNumber);
  gap->add_option("--eta1", o.gap_eta1, "eta1 for gamma_M")->check(CLI::PositiveNumber);
  grid_options(gap, o.grid);
  add_seed(gap);

  auto* versionspace = app.add_subcommand("versionspace", "Version-space diameter and kernel richness probes");
  add_body(versionspace, true);
  versionspace->add_option("--N", o.N, "Number of design rows")->required()->check(CLI::NonNegativeNumber);
  versionspace->add_option("--directions", o.directions, "Random directions")->check(CLI::PositiveNumber);
  versionspace->add_option("--r", o.richness_r, "Run the kernel richness check at this scale (0 = diameter only)")
      ->check(CLI::NonNegativeNumber);
  versionspace->add_option("--c", o.richness_c, "Richness constant c in ln M >= cN")->check(CLI::PositiveNumber);
  versionspace->add_option("--trials", o.richness_trials, "Random designs for the richness check")
      ->check(CLI::PositiveNumber);
  versionspace->add_option("--pool", o.pool, "Pool size for the packing precondition")->check(CLI::Range(1, 1 << 30));
  add_seed(versionspace);

  auto* shift = app.add_subcommand("shift-check", "Gaussian shift inequality nu(z + A) >= exp(-|z|^2/2 sigma^2) nu(A)");
  shift->add_option("--box", o.box, "Box half-widths (one value or one per coordinate)")->delimiter(',');
  shift->add_option("--polytope", o.polytope, R"(Symmetric polytope JSON {"A": [[...]], "b": [...]})");
  shift->add_option("--z", o.z, "Shift vector")->required()->delimiter(',');
  shift->add_option("--sigma", o.shift_sigma, "Gaussian standard deviation")->check(CLI::PositiveNumber);
  shift->add_option("--mc", o.shift_mc, "Monte Carlo samples (polytopes)")->check(CLI::Range(1000, 1 << 30));
  add_seed(shift);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? success : invalid_arguments;
  }

  std::ostringstream buffer;
  bool stalled = false;
  try {
    if (width->parsed())
      run_width(o, buffer);
    else if (pack->parsed())
      run_pack(o, buffer);
    else if (fixedpoint->parsed())
      run_fixedpoint(o, buffer, err);
    else if (learn->parsed())
      stalled = run_learn(o, buffer, err);
    else if (sweep->parsed())
      stalled = run_sweep_command(o, buffer, err);
    else if (gap->parsed())
      run_gap_demo(o, buffer, err);
    else if (versionspace->parsed())
      run_versionspace(o, buffer);
    else if (shift->parsed())
      run_shift_check(o, buffer);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return invalid_arguments;
  } catch (const SizeLimitError& e) {
    err << "error: " << e.what() << '\n';
    return invalid_arguments;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << " (residual " << format_number(e.residual()) << ")\n";
    return convergence_failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return failure;
  }

  if (o.output.empty()) {
    out << buffer.str();
  } else {
    std::ofstream file(o.output);
    if (!file) {
      err << "error: --output: cannot open '" << o.output << "' for writing\n";
      return invalid_arguments;
    }
    file << buffer.str();
  }
  return stalled ? convergence_failure : success;
}

}  // namespace fixpoint::cli
