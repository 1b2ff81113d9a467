/*
 * Copyright 2026 The adace Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
// adace: estimate, simulate and oracle subcommands.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adace/adace.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Common {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out = ".";
};

struct EstimateArgs {
  std::string data;
  std::string stratum = "s++";
  std::string subset = "all";
  int M = 20;
  int B = 50;
  int Mb = 0;
  std::string mode = "full";
  std::string variance = "both";
  bool plug_in = false;
  std::string imputed_out;
  std::string empty_stratum = "error";
};

struct SettingArgs {
  std::string setting = "setting1";
  std::string config;
  bool null = false;
};

struct SimulateArgs {
  int R = 2;
  int M = 5;
  int B = 3;
  int Mb = 0;
  bool comparator = false;
  std::string oracle_n = "1e6";
  bool no_bootstrap = false;
};

struct OracleArgs {
  std::string n = "1e6";
};

std::int64_t parse_count(const std::string& text, const char* flag) {
  const auto v = adace::parse_double(text);
  if (!v || *v < 1.0 || *v != std::floor(*v) || *v > 9.0e15)
    throw adace::ConfigError(std::string(flag) + " must be a positive integer, got '" + text + "'");
  return static_cast<std::int64_t>(*v);
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ADACE_THREADS")) {
    const auto v = adace::parse_int<int>(env);
    if (!v || *v < 1) throw adace::ConfigError("ADACE_THREADS must be a positive integer");
    return *v;
  }
  return adace::hardware_threads();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw adace::Error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw adace::Error("cannot write " + path.string());
  out << bytes;
  if (!out) throw adace::Error("write failed for " + path.string());
}

std::string absolute(const std::string& path) { return fs::absolute(path).lexically_normal().string(); }

adace::SettingConfig resolve_setting(const SettingArgs& a) {
  adace::SettingConfig cfg = a.config.empty() ? adace::SettingConfig::preset(a.setting)
                                              : adace::SettingConfig::from_key_value(read_file(a.config));
  if (a.null) cfg = adace::make_null(cfg);
  cfg.validate();
  return cfg;
}

std::vector<std::string> setting_args(const SettingArgs& a) {
  std::vector<std::string> v;
  if (a.config.empty())
    v = {"--setting", a.setting};
  else
    v = {"--config", absolute(a.config)};
  if (a.null) v.push_back("--null");
  return v;
}

json config_json(const adace::SettingConfig& c) {
  return json{{"mu_x", c.mu_x},       {"sigma_x", c.sigma_x},     {"alpha0", c.alpha0},
              {"alpha1", c.alpha1},   {"alpha2", c.alpha2},       {"beta0", c.beta0},
              {"beta1", c.beta1},     {"beta2", c.beta2},         {"beta3", c.beta3},
              {"sigma_eta", c.sigma_eta}, {"sigma_eps", c.sigma_eps}, {"gamma0", c.gamma0},
              {"gamma1", c.gamma1},   {"gamma3", c.gamma3},       {"n_per_arm", c.n_per_arm},
              {"K", c.K},             {"randomize_arms", c.randomize_arms}};
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Run {
 public:
  Run(std::string command, const Common& common) : common_(common), start_(clock::now()) {
    manifest_["tool"] = "adace";
    manifest_["version"] = adace::kVersion;
    manifest_["command"] = std::move(command);
    manifest_["started_utc"] = utc_now();
    fs::create_directories(common.out);
  }

  json& manifest() { return manifest_; }

  void emit(const std::string& name, const std::string& bytes) {
    const fs::path path = fs::path(common_.out) / name;
    write_file(path, bytes);
    manifest_["outputs"].push_back(absolute(path.string()));
    std::cerr << "wrote " << path.string() << '\n';
  }

  void finish(std::vector<std::string> args) {
    args.push_back("--seed");
    args.push_back(std::to_string(common_.seed));
    manifest_["args"] = args;
    manifest_["seed"] = common_.seed;
    manifest_["threads"] = common_.threads;
    manifest_["wall_clock_seconds"] =
        std::chrono::duration<double>(clock::now() - start_).count();
    emit_manifest();
  }

 private:
  using clock = std::chrono::steady_clock;
  void emit_manifest() {
    const fs::path path = fs::path(common_.out) / "manifest.json";
    write_file(path, manifest_.dump(2) + "\n");
    std::cerr << "wrote " << path.string() << '\n';
  }

  Common common_;
  clock::time_point start_;
  json manifest_;
};

std::vector<adace::StratumLabel> parse_strata(const std::string& s) {
  if (s == "s*+") return {adace::StratumLabel::SStarPlus};
  if (s == "s+*") return {adace::StratumLabel::SPlusStar};
  if (s == "s++") return {adace::StratumLabel::SPlusPlus};
  return {adace::StratumLabel::SStarPlus, adace::StratumLabel::SPlusStar,
          adace::StratumLabel::SPlusPlus};
}

adace::Subset parse_subset(const std::string& s) {
  if (s == "E0") return adace::Subset::kE0;
  if (s == "E1") return adace::Subset::kE1;
  return adace::Subset::kAll;
}

int cmd_estimate(const EstimateArgs& a, const Common& c) {
  const bool want_boot = a.variance == "bootstrap" || a.variance == "both";
  const bool want_rubin = a.variance == "rubin" || a.variance == "both";
  if (want_rubin && a.M < 2) throw adace::ConfigError("--variance rubin needs --M of at least 2");

  const auto dataset = adace::load_csv(a.data);
  const auto data = adace::detail::NumericTrial::from(dataset);
  const auto mode = a.mode == "full" ? adace::PlanMode::kFull : adace::PlanMode::kBaselineOnly;
  auto plan = adace::ImputationPlan::make(mode, dataset.p(), dataset.K());
  plan.draw_logistic_params = !a.plug_in;

  const auto subset = parse_subset(a.subset);
  std::vector<std::pair<adace::StratumLabel, adace::Subset>> targets;
  std::vector<adace::Parameter> params;
  for (auto s : parse_strata(a.stratum)) {
    targets.emplace_back(s, subset);
    for (auto t : {adace::Treatment::kControl, adace::Treatment::kExperimental,
                   adace::Treatment::kDifference})
      params.push_back({s, subset, t});
  }

  const std::uint64_t imp_seed =
      adace::Stream::derive(c.seed, {adace::tag(adace::StreamTag::kImpute)}).key();
  const auto policy = a.empty_stratum == "skip" ? adace::EmptyStratumPolicy::kSkip
                                                : adace::EmptyStratumPolicy::kError;
  const auto results = adace::estimate_pipeline(data, plan, a.M, imp_seed, targets, policy);
  for (const auto& r : results)
    if (r.skipped > 0)
      std::cerr << "warning: " << r.skipped << " imputations skipped for an empty stratum\n";
  if (want_rubin)
    for (const auto& r : results)
      if (r.treat0.per_imputation.size() < 2)
        throw adace::Error("fewer than two usable imputations for Rubin pooling");

  Run run("estimate", c);
  run.manifest()["inputs"] = json::array({absolute(a.data)});
  run.manifest()["M"] = a.M;
  run.manifest()["B"] = want_boot ? a.B : 0;
  run.manifest()["Mb"] = want_boot ? (a.Mb > 0 ? a.Mb : a.M) : 0;
  run.manifest()["mode"] = adace::to_string(mode);
  run.manifest()["n0"] = dataset.n0();
  run.manifest()["n1"] = dataset.n1();

  std::ostringstream est;
  adace::write_estimate_rows(est, results);
  run.emit("estimates.csv", est.str());
  std::cout << est.str();

  std::ostringstream inf;
  adace::write_inference_header(inf);
  if (want_boot) {
    std::vector<double> point;
    for (std::size_t i = 0; i < params.size(); ++i)
      point.push_back(results[i / 3][params[i].treatment].pooled);
    adace::BootstrapOptions bo;
    bo.B = a.B;
    bo.M_b = a.Mb > 0 ? a.Mb : a.M;
    bo.seed = adace::Stream::derive(c.seed, {adace::tag(adace::StreamTag::kBootstrap)}).key();
    bo.threads = c.threads;
    const auto boot = adace::bootstrap(data, plan, params, point, bo);
    for (const auto& r : boot) {
      adace::write_inference_row(inf, r);
      if (r.unreliable)
        std::cerr << "warning: bootstrap for " << r.parameter.name() << " skipped " << r.skipped
                  << " of " << r.B << " replicates\n";
    }
  }
  if (want_rubin)
    for (std::size_t i = 0; i < params.size(); ++i)
      adace::write_inference_row(inf, params[i],
                                 adace::rubin_pool(results[i / 3][params[i].treatment]));
  run.emit("inference.csv", inf.str());

  if (!a.imputed_out.empty()) {
    const auto imps = adace::impute_many(dataset, plan, a.M, imp_seed);
    std::ostringstream s;
    adace::write_imputed_csv(s, dataset, imps);
    write_file(a.imputed_out, s.str());
    run.manifest()["outputs"].push_back(absolute(a.imputed_out));
  }

  std::vector<std::string> args{"estimate", absolute(a.data), "--stratum", a.stratum,
                                "--subset", a.subset, "--M", std::to_string(a.M),
                                "--B", std::to_string(a.B), "--Mb", std::to_string(a.Mb),
                                "--mode", a.mode, "--variance", a.variance,
                                "--empty-stratum", a.empty_stratum};
  if (a.plug_in) args.push_back("--plug-in-logistic");
  if (!a.imputed_out.empty()) {
    args.push_back("--imputed-out");
    args.push_back(absolute(a.imputed_out));
  }
  run.finish(args);
  return 0;
}

int cmd_simulate(const SimulateArgs& a, const SettingArgs& s, const Common& c) {
  const auto cfg = resolve_setting(s);
  const std::int64_t oracle_n = parse_count(a.oracle_n, "--oracle-n");

  adace::StudyOptions opt;
  opt.R = a.R;
  opt.M = a.M;
  opt.B = a.B;
  opt.M_b = a.Mb;
  opt.seed = c.seed;
  opt.threads = c.threads;
  opt.bootstrap = !a.no_bootstrap;
  opt.rubin = a.M >= 2;
  opt.comparator = a.comparator;
  opt.null_test = s.null;

  Run run("simulate", c);
  const auto truth = adace::oracle_truth(
      cfg, oracle_n, adace::Stream::derive(c.seed, {adace::tag(adace::StreamTag::kOracle)}).key(),
      c.threads);
  const auto report = adace::run_study(cfg, truth, opt);
  for (const auto& m : report.failure_messages) std::cerr << "warning: " << m << '\n';

  std::ostringstream rep;
  adace::write_report_csv(rep, report);
  run.emit("report.csv", rep.str());
  std::cout << rep.str();
  std::ostringstream orc;
  adace::write_oracle_csv(orc, truth);
  run.emit("oracle.csv", orc.str());

  run.manifest()["config"] = config_json(cfg);
  run.manifest()["R"] = a.R;
  run.manifest()["M"] = a.M;
  run.manifest()["B"] = opt.bootstrap ? a.B : 0;
  run.manifest()["Mb"] = opt.bootstrap ? (a.Mb > 0 ? a.Mb : a.M) : 0;
  run.manifest()["oracle_n"] = oracle_n;
  run.manifest()["failures"] = report.failures;

  std::vector<std::string> args{"simulate"};
  for (auto& v : setting_args(s)) args.push_back(v);
  for (auto& v : std::vector<std::string>{"--R", std::to_string(a.R), "--M", std::to_string(a.M),
                                          "--B", std::to_string(a.B), "--Mb", std::to_string(a.Mb),
                                          "--oracle-n", std::to_string(oracle_n)})
    args.push_back(v);
  if (a.comparator) args.push_back("--comparator");
  if (a.no_bootstrap) args.push_back("--no-bootstrap");
  run.finish(args);
  return 0;
}

int cmd_oracle(const OracleArgs& a, const SettingArgs& s, const Common& c) {
  const auto cfg = resolve_setting(s);
  const std::int64_t n = parse_count(a.n, "--n");
  Run run("oracle", c);
  const auto truth = adace::oracle_truth(cfg, n, c.seed, c.threads);
  std::ostringstream orc;
  adace::write_oracle_csv(orc, truth);
  run.emit("oracle.csv", orc.str());
  std::cout << orc.str();
  run.manifest()["config"] = config_json(cfg);
  run.manifest()["n_oracle"] = n;
  std::vector<std::string> args{"oracle"};
  for (auto& v : setting_args(s)) args.push_back(v);
  args.push_back("--n");
  args.push_back(std::to_string(n));
  run.finish(args);
  return 0;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Root random seed")->capture_default_str();
  cmd->add_option("--threads", c.threads,
                  "Worker threads (default: ADACE_THREADS, else hardware concurrency)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

void add_setting(CLI::App* cmd, SettingArgs& s) {
  auto* setting = cmd->add_option("--setting", s.setting, "Preset: setting1, setting2, setting1-null, setting2-null")
                      ->capture_default_str();
  auto* config = cmd->add_option("--config", s.config, "Key = value configuration file");
  setting->excludes(config);
  cmd->add_flag("--null", s.null, "Zero the treatment-effect coefficients");
}

int dispatch(std::vector<std::string> args);

int replay(const std::string& manifest_path, std::vector<std::string> extra) {
  const json m = json::parse(read_file(manifest_path));
  if (!m.contains("args") || !m["args"].is_array())
    throw adace::ConfigError(manifest_path + ": manifest has no args array");
  std::vector<std::string> args = m["args"].get<std::vector<std::string>>();
  args.insert(args.end(), extra.begin(), extra.end());
  return dispatch(std::move(args));
}

int dispatch(std::vector<std::string> args) {
  CLI::App app{"Multiple-imputation estimators of adherer average causal effects", "adace"};
  app.set_version_flag("--version", adace::kVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common common;
  EstimateArgs est;
  SimulateArgs sim;
  OracleArgs orc;
  SettingArgs sim_setting, orc_setting;

  auto* e = app.add_subcommand("estimate", "Estimate stratum means from a trial CSV");
  e->add_option("data", est.data, "Trial CSV")->required();
  e->add_option("--stratum", est.stratum)
      ->check(CLI::IsMember({"s*+", "s+*", "s++", "all"}))
      ->capture_default_str();
  e->add_option("--subset", est.subset)
      ->check(CLI::IsMember({"E0", "E1", "all"}))
      ->capture_default_str();
  e->add_option("--M", est.M, "Imputations")->check(CLI::PositiveNumber)->capture_default_str();
  e->add_option("--B", est.B, "Bootstrap replicates")->check(CLI::Range(2, 1 << 20))->capture_default_str();
  e->add_option("--Mb", est.Mb, "Imputations per bootstrap replicate (0: same as --M)")
      ->check(CLI::NonNegativeNumber);
  e->add_option("--mode", est.mode)
      ->check(CLI::IsMember({"full", "baseline-only"}))
      ->capture_default_str();
  e->add_option("--variance", est.variance)
      ->check(CLI::IsMember({"bootstrap", "rubin", "both", "none"}))
      ->capture_default_str();
  e->add_option("--empty-stratum", est.empty_stratum,
                 "Imputations with an empty stratum: error or skip")
      ->check(CLI::IsMember({"error", "skip"}))
      ->capture_default_str();
  e->add_flag("--plug-in-logistic", est.plug_in, "Use MLEs for adherence models instead of draws");
  e->add_option("--imputed-out", est.imputed_out, "Write completed datasets to this CSV");
  add_common(e, common);

  auto* s = app.add_subcommand("simulate", "Run a replication study against oracle truth");
  add_setting(s, sim_setting);
  s->add_option("--R", sim.R, "Replications")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--M", sim.M, "Imputations")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--B", sim.B, "Bootstrap replicates")->check(CLI::Range(2, 1 << 20))->capture_default_str();
  s->add_option("--Mb", sim.Mb, "Imputations per bootstrap replicate (0: same as --M)")
      ->check(CLI::NonNegativeNumber);
  s->add_flag("--comparator", sim.comparator, "Also run the baseline-only comparator");
  s->add_flag("--no-bootstrap", sim.no_bootstrap, "Skip bootstrap inference");
  s->add_option("--oracle-n", sim.oracle_n, "Subjects simulated for the truth")->capture_default_str();
  add_common(s, common);

  auto* o = app.add_subcommand("oracle", "Monte Carlo truth for a setting");
  add_setting(o, orc_setting);
  o->add_option("--n", orc.n, "Subjects simulated")->capture_default_str();
  add_common(o, common);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }
  common.threads = resolve_threads(common.threads);
  if (e->parsed()) return cmd_estimate(est, common);
  if (s->parsed()) return cmd_simulate(sim, sim_setting, common);
  return cmd_oracle(orc, orc_setting, common);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (!args.empty() && args.front() == "--from-manifest") {
      if (args.size() < 2) throw adace::ConfigError("--from-manifest needs a path");
      return replay(args[1], {args.begin() + 2, args.end()});
    }
    return dispatch(std::move(args));
  } catch (const std::exception& ex) {
    std::cerr << "adace: error: " << ex.what() << '\n';
    return 1;
  }
}
