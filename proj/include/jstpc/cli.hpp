#pragma once

// Command-line front end. Kept in a header so tests can drive it in-process;
// tools/jstpc_cli.cpp only forwards main() here.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "jstpc/jstpc.hpp"

#ifndef JSTPC_VERSION
#define JSTPC_VERSION "unknown"
#endif

namespace jstpc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

/// Distinct exit codes for scripts.
enum ExitCode { kOk = 0, kUsage = 1, kInfeasible = 2, kBadScenario = 3, kIoError = 4 };

struct Scheme {
  std::string name;
  bool csma = false;
  bool psm = false;
  PlannerMode planner = PlannerMode::Proposed;
  ScheduleMode scheduler = ScheduleMode::Greedy;
};

inline const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> s = {
      {"proposed", false, false, PlannerMode::Proposed, ScheduleMode::Greedy},
      {"P-ran.sch", false, false, PlannerMode::Proposed, ScheduleMode::Random},
      {"P-gamma_max", false, false, PlannerMode::MaxPower, ScheduleMode::Greedy},
      {"P-I_min", false, false, PlannerMode::MinInterference, ScheduleMode::Greedy},
      {"P-arb", false, false, PlannerMode::Arbitrary, ScheduleMode::Greedy},
      {"best-DCF", true, false, PlannerMode::Proposed, ScheduleMode::Greedy},
      {"best-PSM", true, true, PlannerMode::Proposed, ScheduleMode::Greedy},
  };
  return s;
}

inline Scheme scheme_from_string(const std::string& name) {
  for (const auto& s : all_schemes())
    if (s.name == name) return s;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

/// Distance-weighted throughput and friends for one run.
struct RunRecord {
  std::string scheme;
  std::uint64_t seed = 0;
  double x = 0;  // swept value, if any
  std::string digest;
  MetricsReport inner;
  MetricsReport all;
  json extra = json::object();
};

inline json metrics_json(const MetricsReport& m) {
  json j;
  j["throughput_bit_m_per_s"] = m.throughput;
  j["energy_per_bit_j"] = m.energy_per_bit ? json(*m.energy_per_bit) : json(nullptr);
  j["scheduling_efficiency"] = m.scheduling_efficiency;
  j["scheduling_efficiency_data"] = m.scheduling_efficiency_data;
  j["delivered_bits"] = m.delivered_bits;
  j["energy_j"] = m.energy_j;
  j["transmissions"] = m.transmissions;
  j["delivered_packets"] = m.delivered_packets;
  j["success_ratio"] = m.success_ratio();
  j["area_m2"] = m.area_m2;
  j["region_rings"] = m.region_rings;
  return j;
}

inline std::string fmt(double x) { return detail::fmt(x); }

/// Runs f(0..n-1) on up to `workers` threads; callers store results by index.
template <class F>
void parallel_for(std::size_t n, int workers, F&& f) {
  const std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < w; ++k)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    for (int i = 0; i < argc; ++i) argv_.emplace_back(argv[i]);
    CLI::App app{"Link power planning, slot scheduling and MAC simulation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(JSTPC_VERSION));

    auto common = [this](CLI::App* sub, bool sim) {
      sub->add_option("-s,--scenario", scenario_path_, "scenario file (key = value)");
      sub->add_option("-o,--out", out_dir_, "output directory")->required();
      sub->add_option("--set", sets_, "override a scenario key, key=value (repeatable)");
      sub->add_option("--theta", theta_, "energy slack theta (number or inf)");
      sub->add_option("--mode,--planner", planner_, "planner mode: proposed|max_power|min_interference|arbitrary");
      if (sim) {
        sub->add_option("--seeds", seeds_, "comma-separated seeds")->delimiter(',');
        sub->add_option("--workers", workers_, "parallel runs (default: JSTPC_WORKERS or 1)");
        sub->add_option("-n,--nodes", nodes_, "node count");
        sub->add_option("--load", load_, "aggregate Poisson load in bit/s (switches traffic to poisson)");
        sub->add_option("--duration", duration_, "simulated seconds");
        sub->add_option("--scheduler", scheduler_, "greedy|random");
      }
    };

    auto* asym = app.add_subcommand("asymptotic", "lattice F/G tables and the energy-constrained sweep");
    common(asym, false);
    asym->add_option("--alphas", alphas_, "path-loss exponents for the F/G table")->delimiter(',');
    asym->add_option("--rg-min", rg_min_, "smallest r_g/d");
    asym->add_option("--rg-max", rg_max_, "largest r_g/d");
    asym->add_option("--rg-step", rg_step_, "r_g/d step");
    asym->add_flag("--mw-circuit", mw_circuit_, "use circuit power 1.25 mW and alpha 3.5");
    asym->add_option("--e-hat", e_hats_, "explicit energy bounds (J/(bit/Hz))")->delimiter(',');
    asym->add_option("--points", e_points_, "points in the default energy sweep");

    auto* plan = app.add_subcommand("plan", "per-link power and target interference");
    common(plan, false);
    plan->add_option("--distances", distances_, "link lengths in m")->delimiter(',');
    plan->add_option("--lambda", lambda_, "product invariant gamma*I in mW^2 (default gamma_max*I_min)");

    auto* sched = app.add_subcommand("schedule", "run the scheduler once on the scenario's fixed nodes");
    common(sched, false);
    sched->add_option("--slots", slots_, "slots to fill (default: data slots per frame)");
    sched->add_option("--floor-mw", floor_mw_, "interference floor at every destination");
    sched->add_option("--scheduler", scheduler_, "greedy|random");
    sched->add_option("--seed", sched_seed_, "seed for the random scheduler");

    auto* sim = app.add_subcommand("simulate", "coordinated MAC simulation");
    common(sim, true);
    sim->add_option("--scheme", scheme_, "proposed|P-ran.sch|P-gamma_max|P-I_min|P-arb");

    auto* base = app.add_subcommand("baseline", "CSMA/CA baseline, optionally with a threshold sweep");
    common(base, true);
    base->add_option("--scheme", scheme_, "best-DCF or best-PSM (default: from csma.psm)");
    base->add_option("--thresholds-dbm", thresholds_dbm_, "carrier-sense thresholds to sweep")->delimiter(',');
    base->add_option("--atim-ms", atim_ms_, "ATIM windows to sweep (PSM)")->delimiter(',');

    auto* sweep = app.add_subcommand("sweep", "metric versus load or node count for several schemes");
    common(sweep, true);
    sweep->add_option("--vary", vary_, "load|nodes|theta")->required();
    sweep->add_option("--values", values_, "values of the varied quantity")->delimiter(',')->required();
    sweep->add_option("--schemes", schemes_, "schemes (default: all)")->delimiter(',');

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      std::ostringstream o, er;
      const int code = app.exit(e, o, er);
      out_ << o.str();
      err_ << er.str();
      return code == 0 ? kOk : kUsage;
    }

    try {
      if (asym->parsed()) return cmd_asymptotic();
      if (plan->parsed()) return cmd_plan();
      if (sched->parsed()) return cmd_schedule();
      if (sim->parsed()) return cmd_simulate();
      if (base->parsed()) return cmd_baseline();
      if (sweep->parsed()) return cmd_sweep();
    } catch (const ScenarioError& e) {
      err_ << "error: " << e.what() << "\n";
      return kBadScenario;
    } catch (const InfeasibleError& e) {
      err_ << "infeasible: " << e.what() << "\n";
      return kInfeasible;
    } catch (const fs::filesystem_error& e) {
      err_ << "error: " << e.what() << "\n";
      return kIoError;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << "\n";
      return kUsage;
    }
    return kUsage;
  }

 private:
  // ---- shared plumbing ----

  ScenarioFile load() {
    ScenarioFile f = scenario_path_.empty() ? ScenarioFile{} : load_scenario(scenario_path_);
    for (const auto& kv : sets_) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ScenarioError("--set", 0, kv, "expected key=value");
      apply_setting(f, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)), "--set");
    }
    if (!theta_.empty()) apply_setting(f, "theta", theta_, "--theta");
    if (!planner_.empty()) apply_setting(f, "planner", planner_, "--mode");
    if (!scheduler_.empty()) apply_setting(f, "scheduler", scheduler_, "--scheduler");
    if (nodes_) apply_setting(f, "nodes", std::to_string(*nodes_), "--nodes");
    if (load_) {
      f.sim.saturated = false;
      f.sim.load_bps = *load_;
    }
    if (duration_) f.sim.duration_s = *duration_;
    if (const char* env = std::getenv("JSTPC_SEED"); env && *env) apply_setting(f, "seed", env, "JSTPC_SEED");
    try {
      f.sim.validate();
      f.csma.validate();
    } catch (const std::exception& e) {
      throw ScenarioError(scenario_path_.empty() ? "<defaults>" : scenario_path_, 0, "", e.what());
    }
    return f;
  }

  std::vector<std::uint64_t> seeds(const ScenarioFile& f) const {
    if (!seeds_.empty()) return seeds_;
    return {f.sim.seed};
  }

  int workers() const {
    if (workers_) return std::max(1, *workers_);
    if (const char* env = std::getenv("JSTPC_WORKERS"); env && *env) return std::max(1, std::atoi(env));
    return 1;
  }

  void prepare_out() { fs::create_directories(out_dir_); }

  void write(const std::string& rel, const std::string& text) {
    const fs::path p = fs::path(out_dir_) / rel;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream o(p, std::ios::binary);
    if (!o) throw fs::filesystem_error("cannot write", p, std::make_error_code(std::errc::io_error));
    o << text;
    outputs_.push_back(rel);
  }

  void write_manifest(const std::string& subcommand, const ScenarioFile& f, const std::vector<std::uint64_t>& seeds,
                      json extra = json::object()) {
    json m;
    m["tool"] = "jstpc";
    m["version"] = JSTPC_VERSION;
    m["subcommand"] = subcommand;
    m["argv"] = argv_;
    m["scenario"] = to_text(f);
    m["seeds"] = seeds;
    m["outputs"] = outputs_;
    m["rerun"] = "write 'scenario' to a file (overrides are already folded in) and run: jstpc " + subcommand +
                 " --scenario <file> --seeds <seeds> --out <dir>, plus any subcommand flags listed in argv";
    for (auto& [k, v] : extra.items()) m[k] = v;
    std::ofstream o(fs::path(out_dir_) / "manifest.json");
    o << m.dump(2) << "\n";
  }

  static std::string per_node_csv(const MetricsReport& m) {
    std::string s = "rank,rate_bps\n";
    for (std::size_t i = 0; i < m.per_node_rates.size(); ++i) s += std::to_string(i) + "," + fmt(m.per_node_rates[i]) + "\n";
    return s;
  }

  void write_trace(const std::string& dir, const Trace& t, const MetricsReport& inner) {
    write(dir + "/links.csv", t.links_csv());
    write(dir + "/nodes.csv", t.nodes_csv());
    write(dir + "/frames.csv", t.frames_csv());
    write(dir + "/per_node_rates.csv", per_node_csv(inner));
  }

  static RunRecord run_scheme(const ScenarioFile& base, const Scheme& scheme, std::uint64_t seed, Trace* keep) {
    ScenarioFile f = base;
    f.sim.seed = seed;
    RunRecord r;
    r.scheme = scheme.name;
    r.seed = seed;
    if (scheme.csma) {
      f.csma.psm = scheme.psm;
      auto res = run_csma(f.sim, f.csma);
      r.digest = hex_digest(res.trace.digest());
      r.inner = res.inner;
      r.all = res.all;
      r.extra["collisions"] = res.stats.collisions;
      r.extra["overlap_violations"] = res.stats.overlap_violations;
      r.extra["atim_ok"] = res.stats.atim_ok;
      r.extra["atim_failed"] = res.stats.atim_failed;
      r.extra["cs_threshold_dbm"] = linear_to_db(f.csma.cs_threshold_mw);
      if (keep) *keep = std::move(res.trace);
    } else {
      f.sim.planner = scheme.planner;
      f.sim.scheduler = scheme.scheduler;
      auto res = run_simulation(f.sim);
      r.digest = hex_digest(res.trace.digest());
      r.inner = res.inner;
      r.all = res.all;
      r.extra["floor_mw"] = res.floor_mw;
      r.extra["audit_violations"] = res.audit_violations;
      r.extra["deferred_entries"] = res.deferred_entries;
      r.extra["max_entries"] = res.max_entries;
      r.extra["duplex_failures"] = res.duplex_failures;
      if (keep) *keep = std::move(res.trace);
    }
    return r;
  }

  static json record_json(const RunRecord& r) {
    json j;
    j["scheme"] = r.scheme;
    j["seed"] = r.seed;
    j["digest"] = r.digest;
    j["inner"] = metrics_json(r.inner);
    j["all"] = metrics_json(r.all);
    j["details"] = r.extra;
    return j;
  }

  static json mean_json(const std::vector<RunRecord>& rs) {
    double thr = 0, eff = 0, epb = 0, succ = 0;
    int epb_n = 0;
    for (const auto& r : rs) {
      thr += r.inner.throughput;
      eff += r.inner.scheduling_efficiency_data;
      succ += r.all.success_ratio();
      if (r.inner.energy_per_bit) {
        epb += *r.inner.energy_per_bit;
        ++epb_n;
      }
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, rs.size()));
    json j;
    j["throughput_bit_m_per_s"] = thr / n;
    j["scheduling_efficiency_data"] = eff / n;
    j["success_ratio"] = succ / n;
    j["energy_per_bit_j"] = epb_n ? json(epb / epb_n) : json(nullptr);
    j["runs"] = rs.size();
    return j;
  }

  void print_record(const RunRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s seed=%-6llu thr=%.6g bit*m/s  E/bit=%s J  eff_data=%.4f  success=%.4f  %s\n",
                  r.scheme.c_str(), static_cast<unsigned long long>(r.seed), r.inner.throughput,
                  r.inner.energy_per_bit ? fmt(*r.inner.energy_per_bit).c_str() : "n/a",
                  r.inner.scheduling_efficiency_data, r.all.success_ratio(), r.digest.c_str());
    out_ << buf;
  }

  // ---- subcommands ----

  int cmd_asymptotic() {
    ScenarioFile f = load();
    RadioParams p = f.sim.radio;
    if (mw_circuit_) {
      p.circuit_power_w = 1.25e-3;
      p.alpha = 3.5;
    }
    prepare_out();
    std::string table = "alpha,rg_over_d,F,G\n";
    json gmax = json::array();
    for (double a : alphas_) {
      LatticeConfig cfg;
      cfg.alpha = a;
      const HexLattice lat(cfg);
      const int steps = static_cast<int>(std::floor((rg_max_ - rg_min_) / rg_step_ + 1e-9));
      for (int i = 0; i <= steps; ++i) {
        const double r = rg_min_ + i * rg_step_;
        table += fmt(a) + "," + fmt(r) + "," + fmt(lat.F(r)) + "," + fmt(lat.G(r)) + "\n";
      }
      const double r_star = golden_section_max([&](double x) { return lat.G(x); }, rg_min_, rg_max_, 1e-10);
      gmax.push_back({{"alpha", a}, {"rg_over_d", r_star}, {"G", lat.G(r_star)}});
    }
    write("lattice.csv", table);

    LatticeConfig cfg;
    cfg.alpha = p.alpha;
    const HexLattice lat(cfg);
    AsymptoticGrid g;
    std::vector<double> e_hats = e_hats_;
    if (e_hats.empty()) {
      double e_min = kInf;
      for (int i = 0; i < g.rg_points; ++i)
        for (int j = 0; j < g.gamma_points; ++j)
          e_min = std::min(e_min, asymptotic_energy_per_bit(g.gamma_at(j), g.rg_at(i) / g.d_m, lat, p));
      e_hats = log_points(e_min, 10 * e_min, e_points_);
    }
    std::string sweep = "e_hat,feasible,r_tilde,energy_per_bit,gamma_star_mw,rg_star_m,sinr_db\n";
    int feasible = 0;
    for (double e : e_hats) {
      const auto s = solve_asymptotic(e, p, g, lat);
      if (s) {
        ++feasible;
        sweep += fmt(e) + ",1," + fmt(s.value->spectral_density) + "," + fmt(s.value->energy_per_bit) + "," +
                 fmt(s.value->gamma_star_mw) + "," + fmt(s.value->rg_star_m) + "," + fmt(linear_to_db(s.value->sinr)) +
                 "\n";
      } else {
        sweep += fmt(e) + ",0,,,,,\n";
      }
    }
    write("asymptotic_sweep.csv", sweep);
    f.sim.radio = p;
    write_manifest("asymptotic", f, {}, {{"g_max", gmax}});
    out_ << "asymptotic: " << feasible << "/" << e_hats.size() << " energy bounds feasible; tables in " << out_dir_
         << "\n";
    if (feasible == 0) {
      err_ << "infeasible: no energy bound in the sweep admits a solution\n";
      return kInfeasible;
    }
    return kOk;
  }

  static std::string plan_header() {
    return "link_id,d_m,gamma_star_mw,i_target_mw,sinr_db,rate_bps_hz,energy_per_bit,e_hat,theta,lambda,mode\n";
  }

  static std::string plan_row(const LinkPlan& l) {
    return std::to_string(l.link_id) + "," + fmt(l.d_m) + "," + fmt(l.gamma_star_mw) + "," + fmt(l.i_target_mw) +
           "," + fmt(linear_to_db(l.planned_sinr)) + "," + fmt(l.planned_rate) + "," + fmt(l.energy_per_bit) + "," +
           fmt(l.e_hat) + "," + fmt(l.theta) + "," + fmt(l.lambda) + "," + to_string(l.mode) + "\n";
  }

  LinkPlan plan_or_throw(double d, const ScenarioFile& f, int id) const {
    if (!(d > 0) || d > f.sim.radio.d_max_m)
      throw InfeasibleError("d_max", "link " + std::to_string(id) + " at " + fmt(d) + " m: outside (0, d_max]");
    const auto& table = shared_lattice_table(f.sim.radio.alpha);
    PlannerConfig cfg;
    const double lambda = lambda_ ? *lambda_ : f.sim.effective_lambda();
    auto r = plan_link(d, f.sim.theta, lambda, f.sim.planner, f.sim.radio, table, cfg, id);
    if (!r) throw InfeasibleError(r.violated, "link " + std::to_string(id) + " at " + fmt(d) + " m: " + r.violated);
    return *r.value;
  }

  int cmd_plan() {
    const ScenarioFile f = load();
    prepare_out();
    std::string csv = plan_header();
    int id = 0;
    for (double d : distances_) {
      const LinkPlan l = plan_or_throw(d, f, id++);
      csv += plan_row(l);
      char buf[160];
      std::snprintf(buf, sizeof buf, "d=%6.2f m  gamma*=%9.4g mW  I*=%9.4g mW  SINR=%6.3f dB  rate=%.4f\n", l.d_m,
                    l.gamma_star_mw, l.i_target_mw, linear_to_db(l.planned_sinr), l.planned_rate);
      out_ << buf;
    }
    write("plan.csv", csv);
    write_manifest("plan", f, {});
    return kOk;
  }

  int cmd_schedule() {
    const ScenarioFile f = load();
    const auto& s = f.sim;
    if (s.positions.empty()) throw ScenarioError(scenario_path_, 0, "node", "schedule needs fixed node lines");
    std::vector<Node> nodes;
    std::vector<Link> links;
    for (std::size_t i = 0; i < s.positions.size(); ++i) nodes.push_back({static_cast<int>(i), s.positions[i]});
    for (std::size_t i = 0; i < s.destinations.size(); ++i)
      if (s.destinations[i] >= 0) links.push_back({static_cast<int>(links.size()), static_cast<int>(i), s.destinations[i]});
    if (links.empty()) throw ScenarioError(scenario_path_, 0, "node", "no node has a destination");
    const Topology topo = Topology::build(nodes, links, s.radio);
    std::vector<LinkPlan> plans;
    std::string plan_csv = plan_header();
    for (std::size_t l = 0; l < links.size(); ++l) {
      plans.push_back(plan_or_throw(topo.link_distance(l), f, static_cast<int>(l)));
      plan_csv += plan_row(plans.back());
    }
    const std::size_t T = slots_ ? static_cast<std::size_t>(*slots_) : static_cast<std::size_t>(s.frame.data_slots);
    const auto prob = SchedulerProblem::from_plans(topo, plans, T, {}, floor_mw_);
    const auto m = build_schedule(prob, s.scheduler, sched_seed_);
    const auto audit = audit_schedule(prob, m);
    prepare_out();
    std::string log = "round,step,link,slot,gamma_hat_mw,i_hat_mw,product\n";
    for (const auto& r : m.log)
      log += std::to_string(r.round) + "," + std::to_string(r.step) + "," + std::to_string(r.link) + "," +
             std::to_string(r.slot) + "," + fmt(r.gamma_hat) + "," + fmt(r.i_hat) + "," + fmt(r.product) + "\n";
    std::string mat = "link,source,dest,scheduled_slots,pattern\n";
    std::size_t cells = 0;
    for (std::size_t l = 0; l < m.links; ++l) {
      std::string pat;
      int n = 0;
      for (std::size_t t = 0; t < m.slots; ++t) {
        pat += m.u(l, t) ? '1' : '0';
        n += m.u(l, t);
      }
      cells += static_cast<std::size_t>(n);
      mat += std::to_string(l) + "," + std::to_string(links[l].source) + "," + std::to_string(links[l].dest) + "," +
             std::to_string(n) + "," + pat + "\n";
    }
    write("plan.csv", plan_csv);
    write("schedule_log.csv", log);
    write("schedule.csv", mat);
    json summary = {{"links", m.links},
                    {"slots", m.slots},
                    {"scheduled_cells", cells},
                    {"rounds", m.rounds},
                    {"target_violations", audit.target_violations},
                    {"cap_violations", audit.cap_violations},
                    {"conflict_violations", audit.conflict_violations}};
    write("summary.json", summary.dump(2) + "\n");
    write_manifest("schedule", f, {}, {{"floor_mw", floor_mw_}, {"scheduler_seed", sched_seed_}});
    out_ << "schedule: " << cells << " link-slots over " << m.links << " links, " << m.rounds << " rounds\n";
    return kOk;
  }

  int run_batch(const std::string& subcommand, const ScenarioFile& f, const Scheme& scheme, json extra) {
    const auto sd = seeds(f);
    std::vector<RunRecord> recs(sd.size());
    std::vector<Trace> traces(sd.size());
    parallel_for(sd.size(), workers(), [&](std::size_t i) { recs[i] = run_scheme(f, scheme, sd[i], &traces[i]); });
    prepare_out();
    json runs = json::array();
    for (std::size_t i = 0; i < sd.size(); ++i) {
      write_trace("seed_" + std::to_string(sd[i]), traces[i], recs[i].inner);
      runs.push_back(record_json(recs[i]));
      print_record(recs[i]);
    }
    json summary = {{"scheme", scheme.name}, {"runs", runs}, {"mean", mean_json(recs)}};
    for (auto& [k, v] : extra.items()) summary[k] = v;
    write("summary.json", summary.dump(2) + "\n");
    write_manifest(subcommand, f, sd, extra);
    return kOk;
  }

  int cmd_simulate() {
    const ScenarioFile f = load();
    Scheme scheme{"custom", false, false, f.sim.planner, f.sim.scheduler};
    if (!scheme_.empty()) {
      scheme = scheme_from_string(scheme_);
      if (scheme.csma) throw std::invalid_argument("simulate runs the coordinated MAC; use baseline for " + scheme_);
    } else {
      for (const auto& s : all_schemes())
        if (!s.csma && s.planner == f.sim.planner && s.scheduler == f.sim.scheduler) scheme = s;
    }
    return run_batch("simulate", f, scheme, json::object());
  }

  int cmd_baseline() {
    ScenarioFile f = load();
    const Scheme scheme = scheme_from_string(!scheme_.empty() ? scheme_ : f.csma.psm ? "best-PSM" : "best-DCF");
    if (!scheme.csma) throw std::invalid_argument("baseline runs best-DCF or best-PSM, not " + scheme_);
    f.csma.psm = scheme.psm;
    json extra = json::object();
    if (!thresholds_dbm_.empty() || !atim_ms_.empty()) {
      CsmaSweep sw;
      sw.base = f.csma;
      for (double t : thresholds_dbm_) sw.cs_thresholds_mw.push_back(dbm_to_mw(t));
      if (sw.cs_thresholds_mw.empty()) sw.cs_thresholds_mw = {f.csma.cs_threshold_mw};
      for (double w : atim_ms_) sw.atim_windows_s.push_back(w * 1e-3);
      const auto res = optimize_csma(f.sim, sw, seeds(f));
      std::string csv = "cs_threshold_dbm,atim_window_ms,mean_inner_throughput\n";
      for (const auto& [cfg, v] : res.evaluated)
        csv += fmt(linear_to_db(cfg.cs_threshold_mw)) + "," + fmt(cfg.atim_window_s * 1e3) + "," + fmt(v) + "\n";
      prepare_out();
      write("csma_sweep.csv", csv);
      f.csma = res.best;
      extra["best_cs_threshold_dbm"] = linear_to_db(res.best.cs_threshold_mw);
      extra["best_atim_window_ms"] = res.best.atim_window_s * 1e3;
      out_ << "best threshold " << fmt(linear_to_db(res.best.cs_threshold_mw)) << " dBm";
      if (scheme.psm) out_ << ", ATIM window " << fmt(res.best.atim_window_s * 1e3) << " ms";
      out_ << "\n";
    }
    return run_batch("baseline", f, scheme, extra);
  }

  int cmd_sweep() {
    const ScenarioFile base = load();
    std::vector<Scheme> schemes;
    if (schemes_.empty()) schemes = all_schemes();
    for (const auto& n : schemes_) schemes.push_back(scheme_from_string(n));
    if (vary_ != "load" && vary_ != "nodes" && vary_ != "theta")
      throw std::invalid_argument("--vary must be load, nodes or theta");
    const auto sd = seeds(base);
    struct Job {
      double x;
      Scheme scheme;
      std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (double x : values_)
      for (const auto& s : schemes)
        for (auto seed : sd) jobs.push_back({x, s, seed});
    std::vector<RunRecord> recs(jobs.size());
    parallel_for(jobs.size(), workers(), [&](std::size_t i) {
      ScenarioFile f = base;
      const auto& j = jobs[i];
      if (vary_ == "load") {
        f.sim.saturated = false;
        f.sim.load_bps = j.x;
      } else if (vary_ == "nodes") {
        f.sim.nodes = static_cast<int>(std::llround(j.x));
      } else {
        f.sim.theta = j.x;
      }
      f.sim.validate();
      recs[i] = run_scheme(f, j.scheme, j.seed, nullptr);
      recs[i].x = j.x;
    });
    prepare_out();
    auto epb = [](const MetricsReport& m) { return m.energy_per_bit ? fmt(*m.energy_per_bit) : std::string(); };
    std::string csv = vary_ +
                      ",scheme,seed,throughput_bit_m_per_s,energy_per_bit_j,scheduling_efficiency_data,success_ratio,"
                      "throughput_all,digest\n";
    for (const auto& r : recs)
      csv += fmt(r.x) + "," + r.scheme + "," + std::to_string(r.seed) + "," + fmt(r.inner.throughput) + "," +
             epb(r.inner) + "," + fmt(r.inner.scheduling_efficiency_data) + "," + fmt(r.all.success_ratio()) + "," +
             fmt(r.all.throughput) + "," + r.digest + "\n";
    write("sweep.csv", csv);
    std::string mean = vary_ + ",scheme,runs,throughput_bit_m_per_s,energy_per_bit_j,scheduling_efficiency_data\n";
    for (std::size_t k = 0; k < recs.size(); k += sd.size()) {
      std::vector<RunRecord> group(recs.begin() + static_cast<std::ptrdiff_t>(k),
                                   recs.begin() + static_cast<std::ptrdiff_t>(k + sd.size()));
      const json m = mean_json(group);
      mean += fmt(group[0].x) + "," + group[0].scheme + "," + std::to_string(group.size()) + "," +
              fmt(m["throughput_bit_m_per_s"].get<double>()) + "," +
              (m["energy_per_bit_j"].is_null() ? std::string() : fmt(m["energy_per_bit_j"].get<double>())) + "," +
              fmt(m["scheduling_efficiency_data"].get<double>()) + "\n";
      out_ << vary_ << "=" << fmt(group[0].x) << "  " << group[0].scheme << "  thr=" << m["throughput_bit_m_per_s"]
           << "\n";
    }
    write("sweep_mean.csv", mean);
    json names = json::array();
    for (const auto& s : schemes) names.push_back(s.name);
    write_manifest("sweep", base, sd, {{"vary", vary_}, {"values", values_}, {"schemes", names}});
    return kOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  std::vector<std::string> argv_;
  std::vector<std::string> outputs_;

  std::string scenario_path_;
  std::string out_dir_;
  std::vector<std::string> sets_;
  std::string theta_;
  std::string planner_;
  std::string scheduler_;
  std::vector<std::uint64_t> seeds_;
  std::optional<int> workers_;
  std::optional<int> nodes_;
  std::optional<double> load_;
  std::optional<double> duration_;
  std::string scheme_;

  std::vector<double> alphas_{3.0, 3.5, 4.0, 5.0, 6.0};
  double rg_min_ = 0.8;
  double rg_max_ = 6.0;
  double rg_step_ = 0.01;
  bool mw_circuit_ = false;
  std::vector<double> e_hats_;
  int e_points_ = 24;

  std::vector<double> distances_{5, 10, 15, 20};
  std::optional<double> lambda_;

  std::optional<int> slots_;
  double floor_mw_ = 0;
  std::uint64_t sched_seed_ = 0;

  std::vector<double> thresholds_dbm_;
  std::vector<double> atim_ms_;

  std::string vary_;
  std::vector<double> values_;
  std::vector<std::string> schemes_;
};

/// Entry point; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Runner r(out, err);
  return r.run(argc, argv);
}

}  // namespace jstpc::cli
