#include "fixpoint/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

#include "fixpoint/body_json.hpp"
#include "fixpoint/error.hpp"
#include "fixpoint/parallel.hpp"
#include "fixpoint/random.hpp"
#include "fixpoint/widths.hpp"
#include "internal.hpp"

namespace fixpoint {

using detail::require;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& item : j.items())
    if (!allowed.contains(item.key())) throw InvalidArgument(where + ": unknown key \"" + item.key() + "\"");
}

NoiseModel noise_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "none") return NoiseModel::none();
  if (!j.is_object()) throw InvalidArgument("noise: expected an object or \"none\"");
  reject_unknown_keys(j, {"kind", "sigma", "q"}, "noise");
  const auto kind = j.value("kind", std::string("none"));
  if (kind == "none") return NoiseModel::none();
  if (kind == "gaussian") return NoiseModel::gaussian(j.at("sigma").get<double>());
  if (kind == "student_t") return NoiseModel::student_t(j.at("q").get<double>(), j.at("sigma").get<double>());
  throw InvalidArgument("noise: unknown kind \"" + kind + "\" (expected none, gaussian or student_t)");
}

json noise_to_json(const NoiseModel& noise) {
  json j{{"kind", to_string(noise.kind)}};
  if (noise.kind != NoiseModel::Kind::none) j["sigma"] = noise.sigma;
  if (noise.kind == NoiseModel::Kind::student_t) j["q"] = noise.q;
  return j;
}

GridConfig grid_from_json(const json& j) {
  reject_unknown_keys(j, {"points", "refine_steps", "min_fraction", "mc_samples", "pool_size"}, "grid");
  GridConfig grid;
  grid.points = j.value("points", grid.points);
  grid.refine_steps = j.value("refine_steps", grid.refine_steps);
  grid.min_fraction = j.value("min_fraction", grid.min_fraction);
  grid.mc_samples = j.value("mc_samples", grid.mc_samples);
  grid.pool_size = j.value("pool_size", grid.pool_size);
  return grid;
}

json grid_to_json(const GridConfig& grid) {
  return {{"points", grid.points},
          {"refine_steps", grid.refine_steps},
          {"min_fraction", grid.min_fraction},
          {"mc_samples", grid.mc_samples},
          {"pool_size", grid.pool_size}};
}

double noise_constant(const std::optional<double>& configured, const NoiseModel& noise) {
  if (configured) return *configured;
  return noise.kind == NoiseModel::Kind::none ? 1.0 : 1.0 / noise.sigma;
}

}  // namespace

ExperimentConfig experiment_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  reject_unknown_keys(j,
                      {"body", "design", "subgaussian_constant", "noise", "truth", "N", "trials", "learner",
                       "learners", "scale_policy", "constants", "grid", "shift_count", "pool_size", "net_pool",
                       "solver", "timing", "seed"},
                      "config");
  ExperimentConfig config;
  try {
    if (!j.contains("body")) throw InvalidArgument("config: missing \"body\"");
    config.cls.body = body_from_json(j.at("body"));
    config.cls.design = design_law_from_string(j.value("design", std::string("gaussian")));
    config.cls.subgaussian_constant = j.value("subgaussian_constant", 1.0);
    if (j.contains("noise")) config.noise = noise_from_json(j.at("noise"));

    if (j.contains("truth")) {
      const auto& truth = j.at("truth");
      if (truth.is_array()) {
        config.truth_rule = TruthRule::explicit_value;
        config.truth = vector_from_json(truth);
      } else {
        const auto rule = truth.get<std::string>();
        if (rule == "origin")
          config.truth_rule = TruthRule::origin;
        else if (rule == "random_boundary")
          config.truth_rule = TruthRule::random_boundary;
        else
          throw InvalidArgument("config: truth must be \"origin\", \"random_boundary\" or a vector");
      }
    }

    if (!j.contains("N")) throw InvalidArgument("config: missing \"N\"");
    if (j.at("N").is_array())
      config.sample_sizes = j.at("N").get<std::vector<int>>();
    else
      config.sample_sizes = {j.at("N").get<int>()};
    config.trials = j.value("trials", config.trials);

    if (j.contains("learners"))
      config.learners = j.at("learners").get<std::vector<std::string>>();
    else if (j.contains("learner"))
      config.learners = {j.at("learner").get<std::string>()};

    if (j.contains("constants")) {
      const auto& c = j.at("constants");
      reject_unknown_keys(c, {"kappa1", "kappa2", "eta1", "eta2"}, "constants");
      if (c.contains("kappa1")) config.constants.kappa1 = c.at("kappa1").get<double>();
      if (c.contains("eta1")) config.constants.eta1 = c.at("eta1").get<double>();
      config.constants.kappa2 = c.value("kappa2", config.constants.kappa2);
      config.constants.eta2 = c.value("eta2", config.constants.eta2);
    }

    if (j.contains("scale_policy")) {
      const auto& s = j.at("scale_policy");
      if (s.is_string()) {
        if (s.get<std::string>() != "auto") throw InvalidArgument("config: scale_policy must be \"auto\" or an object");
      } else {
        reject_unknown_keys(s, {"mode", "r", "eta1", "eta2"}, "scale_policy");
        const auto mode = s.value("mode", std::string("auto"));
        if (mode == "explicit") {
          config.scale = ScalePolicy::explicit_r(s.at("r").get<double>());
        } else if (mode == "auto") {
          if (s.contains("eta1")) config.constants.eta1 = s.at("eta1").get<double>();
          if (s.contains("eta2")) config.constants.eta2 = s.at("eta2").get<double>();
        } else {
          throw InvalidArgument("config: scale_policy mode must be \"auto\" or \"explicit\"");
        }
      }
    }

    if (j.contains("grid")) config.grid = grid_from_json(j.at("grid"));
    config.shift_count = j.value("shift_count", config.shift_count);
    config.pool_size = j.value("pool_size", config.pool_size);
    if (j.contains("net_pool")) {
      const auto pool = j.at("net_pool").get<std::string>();
      if (pool == "localized")
        config.net_pool = NetPool::localized;
      else if (pool == "global")
        config.net_pool = NetPool::global;
      else
        throw InvalidArgument("config: net_pool must be \"localized\" or \"global\"");
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      reject_unknown_keys(s, {"max_iterations", "tolerance"}, "solver");
      config.solver.max_iterations = s.value("max_iterations", config.solver.max_iterations);
      config.solver.tolerance = s.value("tolerance", config.solver.tolerance);
    }
    config.timing = j.value("timing", false);
    config.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }

  require(!config.sample_sizes.empty(), "config: N list is empty");
  for (std::size_t i = 0; i < config.sample_sizes.size(); ++i) {
    require(config.sample_sizes[i] >= 1, "config: every N must be >= 1");
    if (i > 0) require(config.sample_sizes[i] > config.sample_sizes[i - 1], "config: N list must be strictly increasing");
  }
  require(config.trials >= 1, "config: trials must be >= 1");
  require(!config.learners.empty(), "config: need at least one learner");
  for (const auto& learner : config.learners)
    require(learner == "erm" || learner == "net_erm", "config: unknown learner \"" + learner + "\"");
  if (config.truth_rule == TruthRule::explicit_value) {
    require(config.truth.size() == config.cls.body.dimension(), "config: truth has the wrong dimension");
    require(contains(config.cls.body, config.truth), "config: truth does not lie in the body");
  }
  return config;
}

json experiment_to_json(const ExperimentConfig& config) {
  json j;
  j["body"] = body_to_json(config.cls.body);
  j["design"] = to_string(config.cls.design);
  j["subgaussian_constant"] = config.cls.subgaussian_constant;
  j["noise"] = noise_to_json(config.noise);
  switch (config.truth_rule) {
    case TruthRule::origin: j["truth"] = "origin"; break;
    case TruthRule::random_boundary: j["truth"] = "random_boundary"; break;
    case TruthRule::explicit_value: j["truth"] = vector_to_json(config.truth); break;
  }
  j["N"] = config.sample_sizes;
  j["trials"] = config.trials;
  j["learners"] = config.learners;
  if (config.scale.mode == ScalePolicy::Mode::explicit_scale)
    j["scale_policy"] = {{"mode", "explicit"}, {"r", config.scale.r}};
  else
    j["scale_policy"] = {{"mode", "auto"}};
  j["constants"] = {{"kappa1", noise_constant(config.constants.kappa1, config.noise)},
                    {"kappa2", config.constants.kappa2},
                    {"eta1", noise_constant(config.constants.eta1, config.noise)},
                    {"eta2", config.constants.eta2}};
  j["grid"] = grid_to_json(config.grid);
  j["shift_count"] = config.shift_count;
  j["pool_size"] = config.pool_size;
  j["net_pool"] = config.net_pool == NetPool::localized ? "localized" : "global";
  j["solver"] = {{"max_iterations", config.solver.max_iterations}, {"tolerance", config.solver.tolerance}};
  j["timing"] = config.timing;
  j["seed"] = config.seed;
  return j;
}

double quantile(std::vector<double> values, double q) {
  require(!values.empty(), "quantile: no values");
  require(q >= 0.0 && q <= 1.0, "quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SweepResult run_sweep(const ExperimentConfig& config) {
  const auto& cls = config.cls;
  const int n = cls.body.dimension();
  const double kappa1 = noise_constant(config.constants.kappa1, config.noise);
  const double eta1 = noise_constant(config.constants.eta1, config.noise);
  const auto shifts = default_shifts(cls.body, config.shift_count, config.seed);
  const double grid_min = scale_grid(cls.body, config.grid).front();
  const auto learner_count = config.learners.size();

  SweepResult result;
  for (std::size_t row = 0; row < config.sample_sizes.size(); ++row) {
    const int N = config.sample_sizes[row];
    const std::uint64_t row_seed = detail::derive_seed(config.seed, 0x10000 + row);

    double gamma_m = kNaN, gamma_q = kNaN, r_m = kNaN, r_q = kNaN;
    try {
      gamma_m = solve_fixed_point(FixedPointKind::gamma_M, cls, N, eta1, shifts, config.grid, row_seed).value;
      gamma_q = solve_fixed_point(FixedPointKind::gamma_Q, cls, N, config.constants.eta2, shifts, config.grid, row_seed).value;
      r_m = solve_fixed_point(FixedPointKind::r_M, cls, N, kappa1, shifts, config.grid, row_seed).value;
      r_q = solve_fixed_point(FixedPointKind::r_Q, cls, N, config.constants.kappa2, shifts, config.grid, row_seed).value;
    } catch (const std::exception& e) {
      result.errors.push_back("N=" + std::to_string(N) + ": fixedpoints: " + e.what());
      if (dynamic_cast<const ConvergenceError*>(&e)) ++result.convergence_failures;
    }
    const double net_scale = config.scale.mode == ScalePolicy::Mode::explicit_scale
                                 ? config.scale.r
                                 : std::max({gamma_m, gamma_q, grid_min});

    const auto trial_count = static_cast<std::size_t>(config.trials);
    std::vector<TrialRecord> records(trial_count * learner_count);
    std::vector<std::string> failures(trial_count * learner_count);
    std::vector<char> stalled(trial_count * learner_count, 0);
    parallel_for(trial_count, [&](std::size_t trial) {
      const std::uint64_t trial_seed = Rng::keyed(config.seed, Stream::trials, (row << 32) | trial)();
      Vector truth = Vector::Zero(n);
      if (config.truth_rule == TruthRule::explicit_value)
        truth = config.truth;
      else if (config.truth_rule == TruthRule::random_boundary)
        truth = sample_points(cls.body, 1, SampleMode::boundary,
                              detail::derive_seed(trial_seed, static_cast<std::uint64_t>(Stream::targets)))
                    .front();

      std::optional<Dataset> data;
      try {
        data = generate_dataset(cls, truth, config.noise, N, trial_seed);
      } catch (const std::exception& e) {
        for (std::size_t l = 0; l < learner_count; ++l)
          failures[trial * learner_count + l] = std::string("learners: ") + e.what();
        return;
      }
      for (std::size_t l = 0; l < learner_count; ++l) {
        const std::size_t slot = trial * learner_count + l;
        auto& record = records[slot];
        record.trial = static_cast<int>(trial);
        record.learner = config.learners[l];
        record.N = N;
        record.r_used = kNaN;
        const auto start = std::chrono::steady_clock::now();
        try {
          if (record.learner == "erm") {
            record.excess_risk = excess_risk(erm(cls.body, *data, config.solver), *data);
          } else {
            require(std::isfinite(net_scale), "net scale unavailable");
            NetErmConfig net;
            net.scale = ScalePolicy::explicit_r(net_scale);
            net.pool = config.net_pool;
            net.pool_size = config.pool_size;
            net.solver = config.solver;
            const auto out = net_erm(cls, *data, net, trial_seed);
            record.excess_risk = excess_risk(out, *data);
            record.r_used = *out.net_scale;
            record.net_size = *out.net_size;
          }
        } catch (const ConvergenceError& e) {
          failures[slot] = "learners: " + record.learner + ": " + e.what();
          stalled[slot] = 1;
        } catch (const std::exception& e) {
          failures[slot] = "learners: " + record.learner + ": " + e.what();
        }
        if (config.timing)
          record.elapsed_ms =
              std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      }
    });

    for (std::size_t l = 0; l < learner_count; ++l) {
      std::vector<double> risks;
      for (std::size_t trial = 0; trial < trial_count; ++trial) {
        const std::size_t slot = trial * learner_count + l;
        if (!failures[slot].empty()) {
          result.errors.push_back("N=" + std::to_string(N) + " trial " + std::to_string(trial) + ": " + failures[slot]);
          result.convergence_failures += stalled[slot];
          continue;
        }
        risks.push_back(records[slot].excess_risk);
        result.trials.push_back(records[slot]);
      }
      SweepRow summary;
      summary.n = n;
      summary.N = N;
      summary.learner = config.learners[l];
      summary.trial_count = static_cast<int>(risks.size());
      summary.excess_q10 = risks.empty() ? kNaN : quantile(risks, 0.1);
      summary.excess_median = risks.empty() ? kNaN : quantile(risks, 0.5);
      summary.excess_q90 = risks.empty() ? kNaN : quantile(risks, 0.9);
      summary.gammaM_sq = gamma_m * gamma_m;
      summary.gammaQ_sq = gamma_q * gamma_q;
      summary.rM_sq = r_m * r_m;
      summary.rQ_sq = r_q * r_q;
      result.rows.push_back(summary);
    }
  }
  std::stable_sort(result.trials.begin(), result.trials.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return a.N != b.N ? a.N < b.N : a.trial < b.trial;
  });
  return result;
}

double lp_r_m_order(int n, double p, int N, double kappa) {
  require(kappa > 0.0 && N >= 1, "lp_r_m_order: kappa and N must be positive");
  const double nd = static_cast<double>(n);
  const double denominator = kappa * std::sqrt(static_cast<double>(N));
  const double saturated = std::sqrt(std::pow(nd, 1.0 - 1.0 / p) / denominator);
  if (saturated >= std::pow(nd, -(1.0 / p - 0.5))) return saturated;
  return std::sqrt(nd) / denominator;
}

std::vector<GapRow> gap_demo(double p, const std::vector<int>& dimensions, int N, const GapConstants& constants,
                             const GridConfig& grid, std::uint64_t seed) {
  require(p > 1.0 && p < 2.0, "gap_demo: p must lie in (1, 2)");
  require(!dimensions.empty(), "gap_demo: need at least one dimension");
  require(N >= 1, "gap_demo: N must be >= 1");
  require(constants.kappa1 > 0.0 && constants.eta1 > 0.0, "gap_demo: constants must be positive");
  const int max_n = *std::max_element(dimensions.begin(), dimensions.end());
  require(max_n >= 2, "gap_demo: dimensions must be >= 2");
  require(p > 1.0 + 1.0 / std::log(static_cast<double>(max_n)),
          "gap_demo: p must exceed 1 + 1/ln(max n) = " + format_number(1.0 + 1.0 / std::log(static_cast<double>(max_n))));
  for (int n : dimensions) {
    require(n >= 2, "gap_demo: dimensions must be >= 2");
    require(static_cast<double>(N) <= std::pow(static_cast<double>(n), 2.0 / p),
            "gap_demo: N = " + std::to_string(N) + " exceeds n^{2/p} for n = " + std::to_string(n));
  }

  std::vector<GapRow> rows;
  for (int n : dimensions) {
    const ClassSpec cls{ConvexBody::lp_ball(n, p)};
    const std::vector<Vector> shifts{Vector::Zero(n)};
    const std::uint64_t row_seed = detail::derive_seed(seed, static_cast<std::uint64_t>(n));
    GapRow row;
    row.n = n;
    row.N = N;
    row.rM_hat = solve_fixed_point(FixedPointKind::r_M, cls, N, constants.kappa1, shifts, grid, row_seed).value;
    row.gammaM_hat = solve_fixed_point(FixedPointKind::gamma_M, cls, N, constants.eta1, shifts, grid, row_seed).value;
    row.rM_order = lp_r_m_order(n, p, N, constants.kappa1);
    row.ratio = row.gammaM_hat / row.rM_hat;
    rows.push_back(row);
  }
  return rows;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.10g", x);
  return buffer;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "n,N,learner,trial_count,excess_q10,excess_median,excess_q90,gammaM_sq,gammaQ_sq,rM_sq,rQ_sq\n";
  for (const auto& r : rows)
    out << r.n << ',' << r.N << ',' << r.learner << ',' << r.trial_count << ',' << format_number(r.excess_q10) << ','
        << format_number(r.excess_median) << ',' << format_number(r.excess_q90) << ',' << format_number(r.gammaM_sq)
        << ',' << format_number(r.gammaQ_sq) << ',' << format_number(r.rM_sq) << ',' << format_number(r.rQ_sq) << '\n';
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& trials) {
  out << "trial,learner,N,r_used,net_size,excess_risk,elapsed_ms\n";
  for (const auto& t : trials) {
    out << t.trial << ',' << t.learner << ',' << t.N << ',';
    if (t.learner == "net_erm")
      out << format_number(t.r_used) << ',' << t.net_size;
    else
      out << ',';
    out << ',' << format_number(t.excess_risk) << ',' << format_number(t.elapsed_ms) << '\n';
  }
}

void write_gap_csv(std::ostream& out, const std::vector<GapRow>& rows) {
  out << "n,N,rM_hat,gammaM_hat,rM_order,ratio\n";
  for (const auto& r : rows)
    out << r.n << ',' << r.N << ',' << format_number(r.rM_hat) << ',' << format_number(r.gammaM_hat) << ','
        << format_number(r.rM_order) << ',' << format_number(r.ratio) << '\n';
}

void write_curve_csv(std::ostream& out, const FixedPointResult& result) {
  out << "kind,shift_index,scale,lhs,rhs,holds\n";
  const auto kind = to_string(result.kind);
  for (const auto& point : result.curve)
    out << kind << ',' << point.shift_index << ',' << format_number(point.scale) << ',' << format_number(point.lhs)
        << ',' << format_number(point.rhs) << ',' << (point.holds ? "true" : "false") << '\n';
}

}  // namespace fixpoint
