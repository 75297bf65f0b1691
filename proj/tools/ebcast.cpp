// ebcast command line: rate regions, scheduling solutions, and the queue
// simulator for the erasure broadcast channel with delayed feedback plus an
// imperfect current-state estimate.
//
// Exit codes: 0 success, 2 invalid configuration, 3 solver did not converge
// or a sizing target is unreachable.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ebcast/experiments.hpp"
#include "ebcast/json_io.hpp"
#include "ebcast/k_rx.hpp"
#include "ebcast/queue_sim.hpp"
#include "ebcast/table_io.hpp"
#include "ebcast/two_rx.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 1729;

struct ModelSource {
  double lambda = -1.0;
  double r_b = 0.2;
  double t_s = 10.0;
  std::vector<double> velocities;
  std::string joint_path;
  bool allow_marginal_mismatch = false;

  bool has_geometry() const { return lambda >= 0.0 || !velocities.empty(); }

  ebcast::JointStateTable load(int k_max = 4) const {
    if (!joint_path.empty()) {
      if (has_geometry())
        throw ebcast::ValidationError(
            "give either --joint or geometry flags, not both");
      return ebcast::load_joint(joint_path, allow_marginal_mismatch);
    }
    if (lambda < 0.0 || velocities.empty())
      throw ebcast::ValidationError(
          "model source missing: need --joint or --lambda with --v");
    const ebcast::Geometry geom{lambda, r_b, t_s};
    std::vector<ebcast::PerVehicleJoint> per;
    for (double v : velocities)
      per.push_back(ebcast::per_vehicle_joint(geom, ebcast::VehicleProfile{v}));
    return ebcast::product_joint(per, k_max);
  }

  ebcast::Geometry geometry() const {
    if (lambda < 0.0)
      throw ebcast::ValidationError("this command needs geometry flags");
    return ebcast::Geometry{lambda, r_b, t_s};
  }
};

void add_model_flags(CLI::App* cmd, ModelSource& src) {
  cmd->add_option("--lambda", src.lambda, "radio-site density (km^-2)");
  cmd->add_option("--rb", src.r_b, "LoS ball radius (km)");
  cmd->add_option("--ts", src.t_s, "location-information delay (s)");
  cmd->add_option("--v", src.velocities, "per-vehicle velocities (km/h)")
      ->expected(-1);
  cmd->add_option("--joint", src.joint_path, "joint table CSV (s,shat,p)");
  cmd->add_flag("--allow-marginal-mismatch", src.allow_marginal_mismatch,
                "downgrade the marginal-equality check to a warning");
}

struct OutputSettings {
  int precision = 6;
  bool no_timestamp = false;
  std::string out_dir;

  std::string resolve(const std::string& name) const {
    if (name.empty()) return name;
    const std::filesystem::path p(name);
    if (p.is_absolute() || out_dir.empty()) return name;
    return (std::filesystem::path(out_dir) / p).string();
  }
};

void print_value(double v, int precision) {
  std::printf("%.*g\n", precision, v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"erasure broadcast rate regions with delayed feedback and "
               "location-based state estimates"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_config("--config", "", "key=value configuration file; flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  OutputSettings output;
  if (const char* env = std::getenv("EBCAST_OUTDIR")) output.out_dir = env;
  app.add_option("--precision", output.precision,
                 "significant digits for numeric output")
      ->capture_default_str();
  app.add_flag("--no-timestamp", output.no_timestamp,
               "omit the generated_at field from JSON outputs");
  app.add_option("--out-dir", output.out_dir,
                 "directory for relative output paths (env EBCAST_OUTDIR)");

  // model
  auto* model = app.add_subcommand("model", "build or validate a joint state table");
  ModelSource model_src;
  add_model_flags(model, model_src);
  std::string model_out;
  model->add_option("--out", model_out, "output CSV path (default stdout)");

  // region
  auto* region = app.add_subcommand("region", "two-receiver rate region vertices");
  ModelSource region_src;
  add_model_flags(region, region_src);
  std::string region_out, region_kind = "mixed";
  region->add_option("--out", region_out, "output CSV path (default stdout)");
  region->add_option("--baseline", region_kind,
                     "which region: mixed (default), fb, tdma")
      ->check(CLI::IsMember({"mixed", "fb", "tdma"}));

  // symrate
  auto* symrate = app.add_subcommand("symrate", "symmetric rate and certificate");
  ModelSource symrate_src;
  add_model_flags(symrate, symrate_src);
  std::string symrate_out;
  bool symrate_closed = false;
  symrate->add_option("--out", symrate_out, "write {rate, certificate} JSON here");
  symrate->add_flag("--closed-forms", symrate_closed,
                    "also print the closed-form candidates and flags");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "K-receiver scheduling solver");
  ModelSource solve_src;
  add_model_flags(solve_cmd, solve_src);
  std::string solve_out, solve_objective = "symmetric";
  std::vector<double> solve_weights;
  int solve_starts = 8, solve_rounds = 200, solve_kmax = 4;
  std::uint64_t solve_seed = kDefaultSeed;
  solve_cmd->add_option("--out", solve_out, "solution JSON path (default stdout)");
  solve_cmd->add_option("--objective", solve_objective, "symmetric | weighted")
      ->check(CLI::IsMember({"symmetric", "weighted"}));
  solve_cmd->add_option("--weights", solve_weights, "rate weights (weighted objective)")
      ->expected(-1);
  solve_cmd->add_option("--starts", solve_starts, "extra pseudo-random multistarts")
      ->capture_default_str();
  solve_cmd->add_option("--rounds", solve_rounds, "alternating rounds cap")
      ->capture_default_str();
  solve_cmd->add_option("--seed", solve_seed, "multistart seed")
      ->capture_default_str();
  solve_cmd->add_option("--kmax", solve_kmax, "receiver-count limit")
      ->capture_default_str();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "queue-level Monte Carlo run");
  ModelSource sim_src;
  add_model_flags(simulate, sim_src);
  std::string sim_policy, sim_out, sim_trace;
  std::uint64_t sim_slots = 1000000, sim_seed = kDefaultSeed;
  double sim_backoff = 0.0;
  simulate->add_option("--policy", sim_policy,
                       "policy JSON (solver solution or alpha triple)")
      ->required();
  simulate->add_option("--slots", sim_slots, "number of slots")->capture_default_str();
  simulate->add_option("--seed", sim_seed, "simulation seed")->capture_default_str();
  simulate->add_option("--backoff", sim_backoff,
                       "scale sending actions by 1 - backoff toward COMMON");
  simulate->add_option("--trace", sim_trace, "per-slot trace CSV path");
  simulate->add_option("--out", sim_out, "report JSON path (default stdout)");

  // size-density
  auto* size = app.add_subcommand("size-density",
                                  "minimum density reaching a target symmetric rate");
  double size_target = 0.4, size_velocity = 60.0, size_lambda_hi = 50.0;
  double size_rb = 0.2, size_ts = 10.0;
  bool size_fb = false;
  size->add_option("--target", size_target, "target symmetric rate")->required();
  size->add_option("--v", size_velocity, "vehicle velocity (km/h)");
  size->add_option("--rb", size_rb, "LoS ball radius (km)");
  size->add_option("--ts", size_ts, "location-information delay (s)");
  size->add_flag("--fb", size_fb, "feedback-only evaluation");
  size->add_option("--lambda-hi", size_lambda_hi, "search bracket upper end");

  // reproduce
  auto* reproduce = app.add_subcommand("reproduce", "regenerate figure datasets");
  int reproduce_fig = 3;
  reproduce->add_option("--fig", reproduce_fig, "figure number: 3 or 4")
      ->required()
      ->check(CLI::IsMember({3, 4}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*model) {
      const auto joint = model_src.load();
      const auto diags = ebcast::validate_joint(joint);
      for (const auto& d : diags)
        std::cerr << (d.severity == ebcast::Diagnostic::Severity::Error ? "error: "
                                                                        : "warning: ")
                  << d.message << '\n';
      if (!model_out.empty())
        ebcast::store_joint(joint, output.resolve(model_out));
      else
        ebcast::store_joint(joint, std::cout);
      return 0;
    }

    if (*region) {
      const auto joint = region_src.load();
      ebcast::RegionPolygon poly;
      if (region_kind == "mixed")
        poly = ebcast::region_polygon(joint);
      else if (region_kind == "fb")
        poly = ebcast::baseline_regions(joint).feedback_only;
      else
        poly = ebcast::baseline_regions(joint).tdma;
      if (!region_out.empty()) {
        ebcast::write_region_csv(poly, output.resolve(region_out), output.precision);
      } else {
        std::printf("R1,R2\n");
        for (const auto& v : poly.vertices)
          std::printf("%.*g,%.*g\n", output.precision, v[0], output.precision, v[1]);
      }
      return 0;
    }

    if (*symrate) {
      const auto joint = symrate_src.load();
      const auto result = ebcast::sym_rate_direct(joint);
      print_value(result.rate, output.precision);
      if (symrate_closed) {
        if (!symrate_src.has_geometry())
          throw ebcast::ValidationError("--closed-forms needs geometry flags");
        const auto cf = ebcast::sym_rate_closed_forms(
            symrate_src.geometry(),
            ebcast::VehicleProfile{symrate_src.velocities.at(0)});
        std::printf("r_sym_1=%.*g r_sym_2=%.*g r_sym_3=%.*g r_sym_4=%.*g\n",
                    output.precision, cf.r_sym_1, output.precision, cf.r_sym_2,
                    output.precision, cf.r_sym_3, output.precision, cf.r_sym_4);
        std::printf("r_sym_fb=%.*g direct=%.*g gap=%.*g\n", output.precision,
                    cf.r_sym_fb, output.precision, cf.direct_rate, output.precision,
                    cf.closed_vs_direct_gap);
        std::printf("conditions: marginal_window=%d lens_threshold=%d matches_direct=%d\n",
                    cf.marginal_in_window ? 1 : 0, cf.lens_above_threshold ? 1 : 0,
                    cf.closed_form_matches_direct ? 1 : 0);
      }
      if (!symrate_out.empty()) {
        ebcast::json j;
        j["rate"] = result.rate;
        j["certificate"] = ebcast::certificate_to_json(result.certificate);
        ebcast::stamp(j, !output.no_timestamp);
        ebcast::write_json_file(j, output.resolve(symrate_out));
      }
      return 0;
    }

    if (*solve_cmd) {
      const auto joint = solve_src.load(solve_kmax);
      ebcast::SolveOptions opts;
      opts.objective = solve_objective == "weighted"
                           ? ebcast::SolveOptions::Objective::Weighted
                           : ebcast::SolveOptions::Objective::Symmetric;
      opts.weights = solve_weights;
      opts.random_starts = solve_starts;
      opts.max_rounds = solve_rounds;
      opts.seed = solve_seed;
      opts.k_max = solve_kmax;
      const auto sol = ebcast::solve(joint, opts);
      auto j = ebcast::solution_to_json(sol);
      ebcast::stamp(j, !output.no_timestamp);
      if (!solve_out.empty())
        ebcast::write_json_file(j, output.resolve(solve_out));
      else
        std::cout << j.dump(2) << '\n';
      return sol.converged ? 0 : 3;
    }

    if (*simulate) {
      const auto joint = sim_src.load();
      const auto triple =
          ebcast::alpha_triple_from_json(ebcast::load_json_file(sim_policy));
      const auto policy = ebcast::policy_from_solution(triple, sim_backoff);
      ebcast::SimOptions options;
      if (!sim_trace.empty()) options.trace_path = output.resolve(sim_trace);
      const auto report = ebcast::run(joint, policy, sim_slots, sim_seed, options);
      auto j = ebcast::report_to_json(report);
      ebcast::stamp(j, !output.no_timestamp);
      if (!sim_out.empty())
        ebcast::write_json_file(j, output.resolve(sim_out));
      else
        std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (*size) {
      const ebcast::Geometry geom{1.0, size_rb, size_ts};
      const double lam = ebcast::min_density(size_target, size_velocity, geom,
                                             size_fb, size_lambda_hi);
      print_value(lam, output.precision);
      return 0;
    }

    if (*reproduce) {
      ebcast::ExperimentConfig config;
      const auto path = [&](const char* name) { return output.resolve(name); };
      if (reproduce_fig == 3) {
        const auto data = ebcast::fig3_regions(config);
        ebcast::write_fig3_csv(data, path("fig3.csv"), output.precision);
        ebcast::json meta;
        meta["velocities"] = config.velocities;
        meta["inferred_from_figure"] = {90.0};
        meta["note"] = "144 km/h marks the fully outdated regime (v >= 2 R_B / T_s)";
        ebcast::json tdma = ebcast::json::array();
        for (const auto& v : data.tdma_baseline.vertices) tdma.push_back({v[0], v[1]});
        meta["tdma_vertices"] = tdma;
        ebcast::stamp(meta, !output.no_timestamp);
        ebcast::write_json_file(meta, path("fig3.meta.json"));
        const auto g = ebcast::gain_report(config.geometry, 60.0,
                                           config.density_target, config.lambda_hi);
        auto gj = ebcast::gains_to_json(g);
        ebcast::stamp(gj, !output.no_timestamp);
        ebcast::write_json_file(gj, path("gains.json"));
        std::printf("wrote fig3.csv, fig3.meta.json, gains.json\n");
      } else {
        const auto rows =
            ebcast::fig4_rows(config, ebcast::default_fig4_velocity_grid());
        ebcast::write_fig4_csv(rows, path("fig4.csv"), output.precision);
        std::printf("wrote fig4.csv\n");
      }
      return 0;
    }
  } catch (const ebcast::TargetError& e) {
    std::cerr << e.what() << '\n';
    return 3;
  } catch (const ebcast::Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
