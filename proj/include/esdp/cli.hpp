#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "esdp/config.hpp"
#include "esdp/instance.hpp"
#include "esdp/simulator.hpp"

namespace esdp {

namespace detail {

// Temp-file-then-rename so partially written outputs are never observed.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

inline std::string sanitize_for_path(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-')
               ? c
               : '_';
  return out;
}

}  // namespace detail

inline nlohmann::json config_json(const SimConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& spec : config_schema()) j[spec.name] = spec.get(cfg);
  return j;
}

inline nlohmann::json summary_json(const SimConfig& cfg,
                                   const std::vector<RunResult>& results,
                                   const Aggregate& agg) {
  nlohmann::json j;
  j["config"] = config_json(cfg);
  j["theorem1_probability"] = results.empty() ? 0.0 : results[0].theorem1_prob;
  nlohmann::json inst_seeds = nlohmann::json::array();
  nlohmann::json env_seeds = nlohmann::json::array();
  for (const auto& r : results) {
    inst_seeds.push_back(r.instance_seed);
    env_seeds.push_back(r.env_seed);
  }
  j["instance_seeds"] = inst_seeds;
  j["env_seeds"] = env_seeds;
  j["policies"] = agg.policy_names;

  nlohmann::json final_block = nlohmann::json::object();
  const std::size_t last = static_cast<std::size_t>(agg.horizon) - 1;
  for (const auto& name : agg.policy_names) {
    nlohmann::json p;
    p["asw_mean"] = agg.cum_sw.at(name).mean[last];
    p["asw_std"] = agg.cum_sw.at(name).stddev[last];
    p["regret_mean"] = agg.cum_regret.at(name).mean[last];
    final_block[name] = p;
  }
  final_block["oracle_benchmark"] = {{"asw_mean", agg.oracle_cum.mean[last]}};
  j["final"] = final_block;

  nlohmann::json ratios = nlohmann::json::object();
  for (const auto& [name, series] : agg.ratio_vs_esdp)
    ratios[name] = series[last];
  j["final_ratio_esdp_over"] = ratios;

  nlohmann::json series = nlohmann::json::object();
  for (const auto& name : agg.policy_names) {
    series["cum_sw_mean"][name] = agg.cum_sw.at(name).mean;
    series["cum_sw_std"][name] = agg.cum_sw.at(name).stddev;
    series["cum_regret_mean"][name] = agg.cum_regret.at(name).mean;
  }
  series["oracle_cum_mean"] = agg.oracle_cum.mean;
  for (const auto& [name, ratio] : agg.ratio_vs_esdp)
    series["ratio_esdp_over"][name] = ratio;
  j["series"] = series;

  if (cfg.trace_timing) {
    nlohmann::json timing = nlohmann::json::object();
    for (std::size_t i = 0; i < agg.policy_names.size(); ++i) {
      double total = 0.0;
      std::int64_t n = 0;
      for (const auto& r : results)
        for (auto ns : r.policies[i].wall_ns) {
          total += static_cast<double>(ns);
          ++n;
        }
      timing[agg.policy_names[i]] = n ? total / static_cast<double>(n) : 0.0;
    }
    j["mean_decide_ns"] = timing;
  }
  return j;
}

struct RunOutputs {
  std::vector<RunResult> results;
  Aggregate agg;
};

// Executes every replication, writes instance/trace/summary files, and
// prints the final accumulated social welfare per policy.
inline RunOutputs cmd_run(const SimConfig& cfg, const std::string& out_dir,
                          std::ostream& log) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);

  std::vector<Instance> instances(cfg.replications);
  if (!cfg.instance_file.empty()) {
    std::ifstream in(cfg.instance_file);
    if (!in) throw ConfigError("cannot open instance file: " + cfg.instance_file);
    const Instance fixed = load_instance(in);
    for (auto& inst : instances) inst = fixed;
  } else {
    for (int rep = 0; rep < cfg.replications; ++rep)
      instances[rep] = sample_instance(cfg, instance_seed_for(cfg, rep));
  }

  std::vector<RunResult> results(cfg.replications);
  std::vector<std::string> stats_dumps(cfg.replications);
  auto one = [&](int rep) {
    std::ostringstream stats;
    RunResult r = run_single(instances[rep], cfg, env_seed_for(cfg, rep),
                             cfg.trace_stats ? &stats : nullptr);
    stats_dumps[rep] = stats.str();
    return r;
  };
  if (cfg.replications == 1) {
    results[0] = one(0);
  } else {
    std::vector<std::future<RunResult>> futures;
    for (int rep = 0; rep < cfg.replications; ++rep)
      futures.push_back(std::async(std::launch::async, one, rep));
    for (int rep = 0; rep < cfg.replications; ++rep)
      results[rep] = futures[rep].get();
  }

  RunOutputs out;
  out.agg = aggregate(results);

  const std::filesystem::path dir(out_dir);
  detail::write_file_atomic(dir / "config.resolved.cfg", serialize_config(cfg));
  // Config echo rides along as comment lines so any emitted CSV can be
  // re-executed without hunting for its config file.
  std::string echo;
  {
    std::istringstream lines(serialize_config(cfg));
    std::string line;
    while (std::getline(lines, line)) echo += "# " + line + "\n";
  }
  for (int rep = 0; rep < cfg.replications; ++rep) {
    detail::write_file_atomic(dir / ("instance_rep" + std::to_string(rep) + ".txt"),
                              instance_to_string(instances[rep]));
    std::ostringstream trace;
    write_trace_csv(trace, results[rep], cfg.trace_timing);
    detail::write_file_atomic(dir / ("trace_rep" + std::to_string(rep) + ".csv"),
                              echo + trace.str());
    if (cfg.trace_stats) {
      std::string body = echo + "t,edge,count,mean,var_proxy\n" + stats_dumps[rep];
      detail::write_file_atomic(dir / ("stats_rep" + std::to_string(rep) + ".csv"),
                                body);
    }
  }
  detail::write_file_atomic(dir / "summary.json",
                            summary_json(cfg, results, out.agg).dump(2) + "\n");

  const std::size_t last = static_cast<std::size_t>(out.agg.horizon) - 1;
  log << "final accumulated social welfare (mean over " << cfg.replications
      << " replication(s)):\n";
  for (const auto& name : out.agg.policy_names)
    log << "  " << name << ": " << out.agg.cum_sw.at(name).mean[last] << "\n";
  log << "  oracle benchmark: " << out.agg.oracle_cum.mean[last] << "\n";
  for (const auto& [name, ratio] : out.agg.ratio_vs_esdp)
    log << "  esdp / " << name << ": " << ratio[last] << "\n";
  log << "theorem-1 full-arrival probability bound: "
      << (results.empty() ? 0.0 : results[0].theorem1_prob) << "\n";
  log << "outputs in " << out_dir << "\n";

  out.results = std::move(results);
  return out;
}

struct SweepSpec {
  std::string param;
  std::vector<std::string> values;
  SimConfig base;

  void validate() const {
    if (values.empty()) throw ConfigError("sweep needs a nonempty value grid");
    bool known = false;
    for (const auto& spec : config_schema()) known = known || spec.name == param;
    if (!known)
      throw ConfigError("swept parameter not in config schema: '" + param + "'");
  }
};

// Sweep files are ordinary configs plus `sweep_param` and `sweep_values`.
inline SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sweep file: " + path);
  SweepSpec spec;
  std::string config_lines;
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ": expected key = value");
    const std::string key = detail::trim(trimmed.substr(0, eq));
    const std::string value = detail::trim(trimmed.substr(eq + 1));
    if (key == "sweep_param")
      spec.param = value;
    else if (key == "sweep_values")
      spec.values = detail::split_list(value);
    else
      config_lines += trimmed + "\n";
  }
  std::istringstream cfg_in(config_lines);
  spec.base = parse_config(cfg_in);
  if (spec.param.empty()) throw ConfigError(path + ": missing sweep_param");
  spec.validate();
  return spec;
}

// One aggregate summary per grid point plus a combined CSV keyed by the
// swept value.
inline void cmd_sweep(const SweepSpec& spec, const std::string& out_dir,
                      std::ostream& log) {
  spec.validate();
  std::filesystem::create_directories(out_dir);
  std::ostringstream combined;
  combined << "# sweep_param = " << spec.param << "\n# sweep_values = ";
  for (std::size_t i = 0; i < spec.values.size(); ++i)
    combined << (i ? "," : "") << spec.values[i];
  combined << "\n";
  combined << "param,value,policy,final_asw_mean,final_asw_std,"
              "final_regret_mean,ratio_esdp_over\n";
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    SimConfig cfg = spec.base;
    set_config_key(cfg, spec.param, spec.values[i]);
    cfg.validate();
    const std::string point_dir =
        out_dir + "/point_" + std::to_string(i) + "_" +
        detail::sanitize_for_path(spec.values[i]);
    std::filesystem::create_directories(point_dir);

    log << "sweep " << spec.param << " = " << spec.values[i] << "\n";
    std::vector<RunResult> results = run(cfg);
    Aggregate agg = aggregate(results);
    detail::write_file_atomic(
        std::filesystem::path(point_dir) / "config.resolved.cfg",
        serialize_config(cfg));
    detail::write_file_atomic(
        std::filesystem::path(point_dir) / "summary.json",
        summary_json(cfg, results, agg).dump(2) + "\n");

    const std::size_t last = static_cast<std::size_t>(agg.horizon) - 1;
    for (const auto& name : agg.policy_names) {
      combined << spec.param << ',' << spec.values[i] << ',' << name << ','
               << format_double(agg.cum_sw.at(name).mean[last]) << ','
               << format_double(agg.cum_sw.at(name).stddev[last]) << ','
               << format_double(agg.cum_regret.at(name).mean[last]) << ',';
      auto it = agg.ratio_vs_esdp.find(name);
      combined << (it != agg.ratio_vs_esdp.end()
                       ? format_double(it->second[last])
                       : std::string("1"))
               << '\n';
    }
  }
  detail::write_file_atomic(std::filesystem::path(out_dir) / "sweep.csv",
                            combined.str());
  log << "sweep outputs in " << out_dir << "\n";
}

// DP-vs-enumeration equivalence on random instances; the exactness gate.
inline bool cmd_oracle_check(int num_instances, std::uint64_t seed,
                             std::ostream& log) {
  Rng rng(derive_seed(seed, 0x6f63));
  int failures = 0;
  for (int i = 0; i < num_instances; ++i) {
    const BudgetedInstance inst = random_budgeted_instance(rng);
    const FamilyResult dp = solve_family(inst);
    const FamilyResult bf = brute_force_family(inst);
    std::string why;
    if (!verify_family(inst, dp, &why)) {
      log << "instance " << i << ": DP family self-check failed: " << why << "\n";
      ++failures;
      continue;
    }
    for (std::int64_t s = 0; s <= inst.s_max; ++s) {
      const FamilyEntry& a = dp.at(s);
      const FamilyEntry& b = bf.at(s);
      if (a.feasible != b.feasible ||
          (a.feasible && a.objective != b.objective)) {
        log << "instance " << i << ": mismatch at s=" << s << "\n";
        ++failures;
        break;
      }
    }
  }
  if (failures == 0)
    log << "oracle-check PASS: " << num_instances
        << " random instances, DP == enumeration for every budget\n";
  else
    log << "oracle-check FAIL: " << failures << "/" << num_instances
        << " instances mismatched\n";
  return failures == 0;
}

}  // namespace esdp
