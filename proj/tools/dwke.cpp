// Command-line driver: simulation runs, kernel verification against the
// weak-form oracle, envelope checks, self-similar profiles, support sets.
//
// Exit codes: 0 pass, 2 config/validation error, 3 runtime failure,
// 4 check failure.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dwke/collision_kernel.hpp"
#include "dwke/envelopes.hpp"
#include "dwke/integrator.hpp"
#include "dwke/interaction_sets.hpp"
#include "dwke/selfsimilar.hpp"
#include "dwke/spectrum.hpp"
#include "dwke/weak_form_oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitCheck = 4;

json load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  json j;
  is >> j;
  return j;
}

fs::path make_run_dir(const std::string& out_root, const std::string& command) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", std::localtime(&tt));
  fs::path base = fs::path(out_root) / (command + "-" + stamp);
  fs::path dir = base;
  for (int i = 1; fs::exists(dir); ++i) dir = base.string() + "-" + std::to_string(i);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  os << j.dump(2) << '\n';
}

dwke::InitialData parse_initial(const json& j) {
  dwke::InitialData init;
  init.M1 = j.at("M1").get<double>();
  if (j.contains("tail"))
    for (const auto& row : j.at("tail"))
      init.tail.emplace_back(row.at(0).get<int>(), row.at(1).get<double>());
  return init;
}

dwke::IntegratorConfig parse_integrator(const json& j) {
  dwke::IntegratorConfig cfg;
  if (j.contains("t_end")) cfg.t_end = j.at("t_end").get<double>();
  if (j.contains("rtol")) cfg.rtol = j.at("rtol").get<double>();
  if (j.contains("atol")) cfg.atol = j.at("atol").get<double>();
  if (j.contains("dt_init")) cfg.dt_init = j.at("dt_init").get<double>();
  if (j.contains("dt_min")) cfg.dt_min = j.at("dt_min").get<double>();
  if (j.contains("dt_max")) cfg.dt_max = j.at("dt_max").get<double>();
  if (j.contains("sample_every")) cfg.sample_every = j.at("sample_every").get<double>();
  if (j.contains("positivity_floor"))
    cfg.positivity_floor = j.at("positivity_floor").get<double>();
  cfg.validate();
  return cfg;
}

json envelope_to_json(const dwke::DecayEnvelope& env) {
  return json{{"t0", env.t0},   {"E", env.E},         {"F1_t0", env.F1_t0},
              {"F2_t0", env.F2_t0}, {"c1", env.c1},   {"b1", env.b1},
              {"alpha", env.alpha}, {"c2", env.c2},   {"C2", env.C2}};
}

json profile_to_json(const dwke::BetaProfile& p) {
  return json{{"N", p.N},
              {"beta", p.beta},
              {"lambda", p.lambda},
              {"residual_norm", p.residual_norm},
              {"positive", p.all_beta_positive()}};
}

int cmd_simulate(const json& cfg_json, const std::string& out_root, int threads) {
  dwke::NormalizedSpectrum init = [&] {
    const dwke::InitialData init_data = parse_initial(cfg_json.at("initial"));
    const int cutoff = cfg_json.at("cutoff").get<int>();
    return dwke::make_spectrum(init_data, cutoff);
  }();
  const dwke::IntegratorConfig icfg = parse_integrator(
      cfg_json.contains("integrator") ? cfg_json.at("integrator") : json::object());

  const fs::path dir = make_run_dir(out_root, "simulate");
  write_json(dir / "config.json", cfg_json);

  dwke::Trajectory traj = dwke::integrate(init.spectrum, icfg, threads);
  dwke::write_trajectory_csv(traj, (dir / "trajectory.csv").string());
  json summary{{"termination_reason", traj.termination_reason},
               {"accepted_steps", traj.accepted_steps},
               {"rejected_steps", traj.rejected_steps},
               {"positivity_rejections", traj.positivity_rejections},
               {"max_mass_drift", traj.max_mass_drift},
               {"max_energy_drift", traj.max_energy_drift},
               {"clamped_mass", traj.clamped_mass},
               {"total_error_estimate", traj.total_error_estimate},
               {"initial_energy", traj.initial_energy},
               {"rescale_factor", init.rescale_factor},
               {"cutoff", traj.cutoff},
               {"samples", traj.samples.size()}};
  write_json(dir / "summary.json", summary);
  std::cout << dir.string() << '\n';
  if (traj.termination_reason != "t_end reached") {
    std::cerr << "integration terminated early: " << traj.termination_reason << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_kernel_check(const json& cfg_json, const std::string& out_root,
                     std::uint64_t seed, bool inject_c_typo) {
  const fs::path dir = make_run_dir(out_root, "kernel-check");
  write_json(dir / "config.json", cfg_json);

  json report;
  report["tolerance"] = 1e-12;
  report["inject_c_typo"] = inject_c_typo;
  double worst = 0.0;
  json worst_case;

  auto compare_rows = [&](const dwke::Spectrum& s, const json& label) {
    const auto kr = dwke::rhs(s, 1, inject_c_typo);
    const auto orc = dwke::oracle_rhs(s, s.cutoff());
    json rows = json::array();
    for (int n = 2; n <= s.cutoff(); ++n) {
      const double a = kr[static_cast<std::size_t>(n - 1)];
      const double b = orc[static_cast<std::size_t>(n - 1)];
      const double rel =
          std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
      const double err = std::abs(a - b) <= 1e-18 ? 0.0 : rel;
      if (err > worst) {
        worst = err;
        worst_case = json{{"label", label}, {"row", n}, {"kernel", a}, {"oracle", b},
                          {"spectrum", s.values()}};
      }
      rows.push_back(json{{"n", n}, {"kernel", a}, {"oracle", b}});
    }
    return rows;
  };

  if (cfg_json.contains("spectrum")) {
    std::vector<double> v = cfg_json.at("spectrum").get<std::vector<double>>();
    const int K = cfg_json.contains("cutoff") ? cfg_json.at("cutoff").get<int>()
                                              : static_cast<int>(v.size());
    v.resize(static_cast<std::size_t>(K), 0.0);
    dwke::Spectrum s(K, v);
    report["rows"] = compare_rows(s, json("explicit"));
  } else {
    const int R = cfg_json.value("spectra", 200);
    const int maxf = cfg_json.value("max_frequency", 10);
    if (maxf > 12) throw std::invalid_argument("kernel-check: max_frequency must be <= 12");
    const int K = 2 * maxf - 1;
    report["spectra"] = R;
    report["max_frequency"] = maxf;
    report["row_range"] = json::array({2, K});
    for (int i = 0; i < R; ++i) {
      dwke::Spectrum s = dwke::random_spectrum(seed + static_cast<std::uint64_t>(i), maxf, K);
      compare_rows(s, json(i));
    }
  }
  report["max_rel_error"] = worst;
  report["pass"] = worst <= 1e-12;
  if (!worst_case.is_null()) report["worst"] = worst_case;
  write_json(dir / "report.json", report);
  std::cout << dir.string() << '\n';
  if (worst > 1e-12) {
    std::cerr << "kernel-check failed: max relative error " << worst << '\n';
    return kExitCheck;
  }
  return kExitOk;
}

int cmd_envelope(const json& cfg_json, const std::string& out_root) {
  std::string csv_path;
  if (cfg_json.contains("run_dir"))
    csv_path = (fs::path(cfg_json.at("run_dir").get<std::string>()) / "trajectory.csv").string();
  else
    csv_path = cfg_json.at("trajectory_csv").get<std::string>();
  dwke::Trajectory traj = dwke::read_trajectory_csv(csv_path);

  const double t0 = cfg_json.value("t0", traj.samples.front().t);
  std::size_t anchor = 0;
  for (; anchor < traj.samples.size(); ++anchor)
    if (std::abs(traj.samples[anchor].t - t0) <= 1e-9 * std::max(1.0, std::abs(t0))) break;
  if (anchor == traj.samples.size())
    throw std::invalid_argument("envelope: no trajectory sample at requested t0");
  const dwke::DecayEnvelope env =
      dwke::envelope_constants(traj.spectrum_at(anchor), traj.samples[anchor].t);
  const double tol = cfg_json.value("tolerance", -1.0);
  const dwke::EnvelopeReport rep = dwke::check_envelopes(traj, env, tol);

  json violations = json::array();
  for (const auto& v : rep.violations)
    violations.push_back(json{{"t", v.t}, {"kind", v.kind}, {"lhs", v.lhs}, {"rhs", v.rhs}});
  json report{{"constants", envelope_to_json(env)},
              {"tolerance", rep.tolerance},
              {"samples_checked", rep.samples_checked},
              {"violations", violations}};
  if (cfg_json.contains("fit")) {
    const auto& f = cfg_json.at("fit");
    const int n = f.value("n", 1);
    const auto window = f.at("window");
    const double slope = dwke::fit_decay_exponent(traj, n, window.at(0).get<double>(),
                                                  window.at(1).get<double>());
    report["fit"] = json{{"n", n}, {"window", window}, {"slope", slope}};
  }
  const fs::path dir = make_run_dir(out_root, "envelope");
  write_json(dir / "config.json", cfg_json);
  write_json(dir / "report.json", report);
  std::cout << dir.string() << '\n';
  if (!rep.pass()) {
    std::cerr << "envelope check failed: " << rep.violations.size() << " violations\n";
    return kExitCheck;
  }
  return kExitOk;
}

int cmd_selfsim(const json& cfg_json, const std::string& out_root, std::uint64_t seed) {
  const std::string mode = cfg_json.value("mode", "continue");
  const fs::path dir = make_run_dir(out_root, "selfsim");
  write_json(dir / "config.json", cfg_json);
  if (mode == "continue") {
    const dwke::BetaProfile p = dwke::continue_solution(
        cfg_json.at("lambda1").get<double>(), cfg_json.at("lambda2").get<double>(),
        cfg_json.at("N").get<int>(), cfg_json.at("delta").get<double>());
    write_json(dir / "profile.json", profile_to_json(p));
    std::cout << dir.string() << '\n';
    if (!p.all_beta_positive()) {
      // a converged profile with a non-positive component is a counterexample
      // artifact, reported rather than silently accepted
      std::cerr << "selfsim: converged profile has non-positive components\n";
      return kExitCheck;
    }
    return kExitOk;
  }
  if (mode == "enumerate") {
    const int N = cfg_json.at("N").get<int>();
    const int starts = cfg_json.value("starts", 10000);
    const auto roots = dwke::enumerate_full_truncation(N, starts, seed);
    json arr = json::array();
    int fully_nonzero = 0;
    int positive = 0;
    for (const auto& p : roots) {
      bool nz = true;
      for (int i = 0; i < N - 2; ++i)
        if (std::abs(p.beta[static_cast<std::size_t>(i)]) <= 1e-8) nz = false;
      fully_nonzero += nz;
      positive += nz && p.all_beta_positive() ? 1 : 0;
      json pj = profile_to_json(p);
      pj["fully_nonzero"] = nz;
      arr.push_back(std::move(pj));
    }
    write_json(dir / "roots.json",
               json{{"N", N},
                    {"starts", starts},
                    {"seed", seed},
                    {"distinct_roots", roots.size()},
                    {"fully_nonzero_roots", fully_nonzero},
                    {"fully_nonzero_positive_roots", positive},
                    {"roots", arr}});
    std::cout << dir.string() << '\n';
    return kExitOk;
  }
  throw std::invalid_argument("selfsim: mode must be 'continue' or 'enumerate'");
}

int cmd_support(const json& cfg_json, const std::string& out_root) {
  dwke::FrequencySet a{cfg_json.at("elements").get<std::vector<int>>(),
                       cfg_json.at("window").get<int>()};
  const dwke::FrequencySet closed = dwke::closure_set(a);
  json out{{"elements", a.elements}, {"window", a.window}, {"closure", closed.elements}};
  const fs::path dir = make_run_dir(out_root, "support");
  write_json(dir / "config.json", cfg_json);
  write_json(dir / "closure.json", out);
  std::cout << '{';
  for (std::size_t i = 0; i < closed.elements.size(); ++i)
    std::cout << (i ? "," : "") << closed.elements[i];
  std::cout << "}\n" << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for the discrete wave kinetic equation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_root = "runs";
  std::uint64_t seed = 1;
  int threads = 1;
  bool inject_c_typo = false;

  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_root, "output directory root");
  app.add_option("--seed", seed, "seed for all randomized operations");
  app.add_option("--threads", threads, "worker threads for RHS evaluation");

  auto* sim = app.add_subcommand("simulate", "integrate a truncated spectrum");
  auto* kc = app.add_subcommand("kernel-check",
                                "compare closed-form collision terms with the oracle");
  kc->add_flag("--inject-c-typo", inject_c_typo,
               "fault injection: evaluate the condensate gain group with a "
               "shifted partner index (must make the check fail)");
  auto* envc = app.add_subcommand("envelope", "verify decay envelopes on a trajectory");
  auto* ss = app.add_subcommand("selfsim", "self-similar profile construction");
  auto* sup = app.add_subcommand("support", "interaction-set closure");

  CLI11_PARSE(app, argc, argv);

  json cfg;
  try {
    if (config_path.empty()) throw std::runtime_error("--config is required");
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(cfg, out_root, threads);
    if (kc->parsed()) return cmd_kernel_check(cfg, out_root, seed, inject_c_typo);
    if (envc->parsed()) return cmd_envelope(cfg, out_root);
    if (ss->parsed()) return cmd_selfsim(cfg, out_root, seed);
    if (sup->parsed()) return cmd_support(cfg, out_root);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
