// Command-line front end: loads channel/source/candidate documents, evaluates
// rate regions, searches for feasible auxiliary distributions, runs the
// Monte-Carlo schemes, and emits JSON or CSV.
//
// Exit codes: 0 feasible/success, 1 well-formed but infeasible (or no
// candidate found), 2 usage or validation error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "macfcs/optimizer.hpp"
#include "macfcs/serialize.hpp"
#include "macfcs/simulator.hpp"

namespace {

using namespace macfcs;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw validation_error("cannot write to " + out_path);
  out << text;
}

void emit_json(const json& doc, const std::string& out_path) {
  emit(doc.dump(2) + "\n", out_path);
}

std::map<std::string, std::size_t> parse_cards(const std::vector<std::string>& kvs) {
  std::map<std::string, std::size_t> cards;
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    unsigned long v = 0;
    if (eq == std::string::npos || kv.find_first_not_of("0123456789", eq + 1) != std::string::npos ||
        eq + 1 == kv.size() || (v = std::stoul(kv.substr(eq + 1))) < 1)
      throw validation_error("--cards expects NAME=K with K a positive integer, got '" + kv + "'");
    cards[kv.substr(0, eq)] = v;
  }
  return cards;
}

std::map<std::string, double> parse_rates(const std::vector<std::string>& kvs) {
  std::map<std::string, double> rates;
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq + 1 == kv.size())
      throw validation_error("--rates expects NAME=BITS, got '" + kv + "'");
    try {
      rates[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw validation_error("--rates expects NAME=BITS, got '" + kv + "'");
    }
  }
  return rates;
}

std::string cards_text(const std::map<std::string, std::size_t>& cards) {
  std::string s = "{";
  bool first = true;
  for (const auto& [k, v] : cards) {
    s += (first ? "" : ", ") + k + "=" + std::to_string(v);
    first = false;
  }
  return s + "}";
}

struct CommonArgs {
  std::string channel_path, source_path, candidate_path, out_path;
  std::string strategy = "df";
  std::vector<std::string> cards_kv, rates_kv;
  std::vector<std::size_t> n_list{8};
  std::string scheme;
  int restarts = 200;
  int refine_iters = 40;
  std::uint64_t seed = 0;
  int blocks = 4;
  std::size_t trials = 1000;
  double epsilon = 0.05;
  double tol_indep = 1e-6;
  double indep_penalty = 10.0;
  int workers = 0;
  std::string family, range;
  std::size_t fam_d = 1, fam_e = 1, fam_f = 1;
  std::string system_path;
};

int run_stats(const CommonArgs& a) {
  const SourcePair src = source_from_json(load_json_file(a.source_path));
  emit_json(source_stats_to_json(source_stats(src)), a.out_path);
  return kExitOk;
}

int run_sw_region(const CommonArgs& a) {
  const SourcePair src = source_from_json(load_json_file(a.source_path));
  emit_json(system_to_json(slepian_wolf_region(source_stats(src))), a.out_path);
  return kExitOk;
}

FeasibilityReport check_candidate(const Channel& ch, const SourcePair& src, const json& doc,
                                  bool want_df, double tol_indep) {
  const SourceStats st = source_stats(src);
  auto cand = candidate_from_json(doc, ch);
  if (want_df) {
    if (!std::holds_alternative<DFInput>(cand))
      throw validation_error("expected a decode-forward candidate (type \"df\")");
    return df_constraints(build_df_joint(ch, std::get<DFInput>(cand)), st);
  }
  if (!std::holds_alternative<CFInput>(cand))
    throw validation_error("expected a compress-forward candidate (type \"cf\")");
  return cf_constraints(build_cf_joint(ch, std::get<CFInput>(cand)), st, tol_indep);
}

int run_check(const CommonArgs& a, bool want_df) {
  const Channel ch = channel_from_json(load_json_file(a.channel_path));
  const SourcePair src = source_from_json(load_json_file(a.source_path));
  const FeasibilityReport rep =
      check_candidate(ch, src, load_json_file(a.candidate_path), want_df, a.tol_indep);
  emit_json(report_to_json(rep), a.out_path);
  return rep.feasible ? kExitOk : kExitInfeasible;
}

int run_optimize(const CommonArgs& a) {
  const Channel ch = channel_from_json(load_json_file(a.channel_path));
  const SourcePair src = source_from_json(load_json_file(a.source_path));
  const SourceStats st = source_stats(src);

  SearchConfig cfg;
  cfg.cards = parse_cards(a.cards_kv);
  cfg.restarts = a.restarts;
  cfg.refine_iters = a.refine_iters;
  cfg.seed = a.seed;
  cfg.tol_indep = a.tol_indep;
  cfg.indep_penalty = a.indep_penalty;
  cfg.workers = a.workers;

  auto progress = [](int restart, double best) {
    std::fprintf(stderr, "restart %d: best objective %.6g\n", restart, best);
  };

  json result;
  json cand_json;
  bool feasible = false;
  std::map<std::string, std::size_t> used_cards;
  if (a.strategy == "df") {
    const DFSearchResult r = search_df(ch, st, cfg, progress);
    cand_json = df_input_to_json(r.best);
    // Re-evaluate on the serialized (rounded) candidate so feeding the output
    // back through check-df reproduces this report byte for byte.
    const DFInput reparsed = df_input_from_json(cand_json, ch);
    const FeasibilityReport rep = df_constraints(build_df_joint(ch, reparsed), st);
    feasible = rep.feasible;
    result["report"] = report_to_json(rep);
    result["objective"] = std::isfinite(rep.min_margin) ? json(round_sig(rep.min_margin, 10)) : json(nullptr);
    result["evaluations"] = r.evaluations;
    result["best_restart"] = r.best_restart;
    used_cards = {{"W0", r.best.w0_card}, {"W1", r.best.w1_card}, {"W2", r.best.w2_card}};
  } else if (a.strategy == "cf") {
    const CFSearchResult r = search_cf(ch, st, cfg, progress);
    cand_json = cf_input_to_json(r.best);
    const CFInput reparsed = cf_input_from_json(cand_json, ch);
    const FeasibilityReport rep =
        cf_constraints(build_cf_joint(ch, reparsed), st, cfg.tol_indep);
    feasible = rep.feasible;
    double obj = rep.min_margin;
    if (rep.indep_tv) obj -= cfg.indep_penalty * *rep.indep_tv;
    result["report"] = report_to_json(rep);
    result["objective"] = std::isfinite(obj) ? json(round_sig(obj, 10)) : json(nullptr);
    result["evaluations"] = r.evaluations;
    result["best_restart"] = r.best_restart;
    used_cards = {{"U1", r.best.u1_card},
                  {"U2", r.best.u2_card},
                  {"Yt1", r.best.yt1_card},
                  {"Yt2", r.best.yt2_card}};
  } else {
    throw validation_error("--strategy must be df or cf");
  }
  result["strategy"] = a.strategy;
  result["candidate"] = std::move(cand_json);
  result["seed"] = a.seed;
  result["restarts"] = a.restarts;
  result["feasible"] = feasible;
  emit_json(result, a.out_path);
  if (!feasible) {
    std::fprintf(stderr, "no candidate found at cardinalities %s\n", cards_text(used_cards).c_str());
    return kExitInfeasible;
  }
  return kExitOk;
}

int run_fm(const CommonArgs& a) {
  const RateConstraintSystem sys = system_from_json(load_json_file(a.system_path));
  const SystemFeasibility w = system_feasible(sys);
  emit_json(witness_to_json(w), a.out_path);
  return w.feasible ? kExitOk : kExitInfeasible;
}

int run_simulate(const CommonArgs& a) {
  if (a.n_list.empty()) throw validation_error("--n needs at least one blocklength");

  SimConfig base;
  base.blocks = a.blocks;
  base.trials = a.trials;
  base.seed = a.seed;
  base.rates = parse_rates(a.rates_kv);
  base.epsilon = a.epsilon;
  base.workers = a.workers;

  std::function<SimOutcome(const SimConfig&)> op;
  if (a.scheme == "sw") {
    const SourcePair src = source_from_json(load_json_file(a.source_path));
    op = [src](const SimConfig& cfg) { return simulate_sw(src, cfg); };
  } else if (a.scheme == "mac") {
    const Channel ch = channel_from_json(load_json_file(a.channel_path));
    std::vector<double> p1(ch.x1_card, 1.0 / static_cast<double>(ch.x1_card));
    std::vector<double> p2(ch.x2_card, 1.0 / static_cast<double>(ch.x2_card));
    if (!a.candidate_path.empty()) {
      const json doc = load_json_file(a.candidate_path);
      if (!doc.is_object() || !doc.contains("p_x1") || !doc.contains("p_x2"))
        throw validation_error("mac input document needs fields p_x1 and p_x2");
      p1 = doc.at("p_x1").get<std::vector<double>>();
      p2 = doc.at("p_x2").get<std::vector<double>>();
    }
    op = [ch, p1, p2](const SimConfig& cfg) { return simulate_mac(ch, cfg, p1, p2); };
  } else if (a.scheme == "df") {
    const Channel ch = channel_from_json(load_json_file(a.channel_path));
    const SourcePair src = source_from_json(load_json_file(a.source_path));
    DFInput in = DFInput::uniform(1, 1, 1, ch.x1_card, ch.x2_card);
    if (!a.candidate_path.empty()) {
      auto cand = candidate_from_json(load_json_file(a.candidate_path), ch);
      if (!std::holds_alternative<DFInput>(cand))
        throw validation_error("decode-forward simulation needs a df candidate");
      in = std::get<DFInput>(cand);
    }
    op = [ch, src, in](const SimConfig& cfg) { return simulate_df(ch, src, in, cfg); };
  } else {
    throw validation_error("--scheme must be sw, mac or df");
  }

  std::vector<SimConfig> cfgs;
  for (std::size_t n : a.n_list) {
    SimConfig cfg = base;
    cfg.n = n;
    cfgs.push_back(cfg);
  }
  const auto rows = trend_report(op, std::move(cfgs));
  emit(trend_csv(rows), a.out_path);
  return kExitOk;
}

int run_sweep(const CommonArgs& a) {
  const Channel ch = channel_from_json(load_json_file(a.channel_path));

  double start = 0, stop = 0, step = 0;
  if (std::sscanf(a.range.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || step <= 0.0)
    throw validation_error("--range expects START:STOP:STEP with STEP > 0");
  if (stop < start) throw validation_error("--range is empty (STOP < START)");

  std::vector<double> params;
  for (double p = start; p <= stop + 1e-12; p += step) params.push_back(p);

  auto source_at = [&](double p) -> SourcePair {
    if (a.family == "dsbs") {
      if (p <= 0.0 || p >= 1.0) throw validation_error("dsbs parameter must lie in (0,1)");
      return SourcePair::make(2, 2, {(1 - p) / 2, p / 2, p / 2, (1 - p) / 2});
    }
    const auto k = static_cast<std::size_t>(std::llround(p));
    if (std::abs(p - static_cast<double>(k)) > 1e-9 || k < 1)
      throw validation_error("common-part family parameter must be a positive integer");
    if (a.family == "common-d") return make_common_part_source(k, a.fam_e, a.fam_f);
    if (a.family == "common-e") return make_common_part_source(a.fam_d, k, a.fam_f);
    if (a.family == "common-f") return make_common_part_source(a.fam_d, a.fam_e, k);
    throw validation_error("--family must be dsbs, common-d, common-e or common-f");
  };

  SearchConfig cfg;
  cfg.cards = parse_cards(a.cards_kv);
  cfg.restarts = a.restarts;
  cfg.refine_iters = a.refine_iters;
  cfg.seed = a.seed;
  cfg.tol_indep = a.tol_indep;
  cfg.indep_penalty = a.indep_penalty;
  cfg.workers = a.workers;

  std::string csv = "param,feasible,min_margin,best_objective\n";
  char buf[128];
  for (double p : params) {
    const SourcePair src = source_at(p);
    const SourceStats st = source_stats(src);
    bool feasible = false;
    double min_margin = 0, objective = 0;
    if (a.strategy == "df") {
      const DFSearchResult r = search_df(ch, st, cfg);
      feasible = r.report.feasible;
      min_margin = r.report.min_margin;
      objective = r.objective;
    } else if (a.strategy == "cf") {
      const CFSearchResult r = search_cf(ch, st, cfg);
      feasible = r.report.feasible;
      min_margin = r.report.min_margin;
      objective = r.objective;
    } else {
      throw validation_error("--strategy must be df or cf");
    }
    std::snprintf(buf, sizeof buf, "%.6g,%d,%.6g,%.6g\n", p, feasible ? 1 : 0, min_margin,
                  objective);
    csv += buf;
  }
  emit(csv, a.out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate-region toolkit for the three-node multiple access channel "
               "with feedback and correlated sources"};
  app.require_subcommand(1);
  CommonArgs a;

  auto add_out = [&](CLI::App* cmd) { cmd->add_option("--out", a.out_path, "write output to a file instead of stdout"); };

  auto* stats = app.add_subcommand("stats", "source entropy statistics as JSON");
  stats->add_option("--source", a.source_path, "source document")->required();
  add_out(stats);

  auto* swr = app.add_subcommand("sw-region", "Slepian-Wolf rate bounds as a JSON system");
  swr->add_option("--source", a.source_path, "source document")->required();
  add_out(swr);

  for (const char* name : {"check-df", "check-cf"}) {
    auto* cmd = app.add_subcommand(name, std::string(name) == "check-df"
                                             ? "evaluate the decode-forward region for a candidate"
                                             : "evaluate the compress-forward region for a candidate");
    cmd->add_option("--channel", a.channel_path, "channel document")->required();
    cmd->add_option("--source", a.source_path, "source document")->required();
    cmd->add_option("--candidate", a.candidate_path, "candidate document")->required();
    cmd->add_option("--tol-indep", a.tol_indep, "quantizer independence tolerance (TV)");
    add_out(cmd);
  }

  auto* opt = app.add_subcommand("optimize", "search auxiliary distributions for a feasible candidate");
  opt->add_option("--channel", a.channel_path, "channel document")->required();
  opt->add_option("--source", a.source_path, "source document")->required();
  opt->add_option("--strategy", a.strategy, "df or cf")->required();
  opt->add_option("--cards", a.cards_kv, "auxiliary cardinalities NAME=K")->delimiter(',');
  opt->add_option("--restarts", a.restarts, "seeded restarts (default 200)");
  opt->add_option("--refine-iters", a.refine_iters, "coordinate-ascent sweeps per restart");
  opt->add_option("--seed", a.seed, "RNG seed");
  opt->add_option("--workers", a.workers, "parallel workers (0 = all cores)");
  opt->add_option("--tol-indep", a.tol_indep, "quantizer independence tolerance (TV)");
  opt->add_option("--indep-penalty", a.indep_penalty, "objective penalty per unit TV");
  add_out(opt);

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo runs of a coding scheme, CSV trend output");
  sim->add_option("--scheme", a.scheme, "sw, mac or df")->required();
  sim->add_option("--channel", a.channel_path, "channel document (mac, df)");
  sim->add_option("--source", a.source_path, "source document (sw, df)");
  sim->add_option("--candidate", a.candidate_path, "input distributions / df candidate");
  sim->add_option("--n", a.n_list, "blocklengths, comma separated")->delimiter(',');
  sim->add_option("--blocks", a.blocks, "blocks per trial (df)");
  sim->add_option("--trials", a.trials, "Monte-Carlo trials per blocklength");
  sim->add_option("--rates", a.rates_kv, "rates NAME=BITS, e.g. R1=1.0,R2=1.0")->delimiter(',');
  sim->add_option("--epsilon", a.epsilon, "codebook-size slack in bits (df defaults)");
  sim->add_option("--seed", a.seed, "RNG seed");
  sim->add_option("--workers", a.workers, "parallel workers (0 = all cores)");
  add_out(sim);

  auto* swp = app.add_subcommand("sweep", "optimize over a one-parameter source family, CSV output");
  swp->add_option("--channel", a.channel_path, "channel document")->required();
  swp->add_option("--family", a.family, "dsbs, common-d, common-e or common-f")->required();
  swp->add_option("--range", a.range, "START:STOP:STEP")->required();
  swp->add_option("--strategy", a.strategy, "df or cf")->required();
  swp->add_option("--cards", a.cards_kv, "auxiliary cardinalities NAME=K")->delimiter(',');
  swp->add_option("--restarts", a.restarts, "seeded restarts per point");
  swp->add_option("--refine-iters", a.refine_iters, "coordinate-ascent sweeps per restart");
  swp->add_option("--seed", a.seed, "RNG seed (shared across points)");
  swp->add_option("--workers", a.workers, "parallel workers (0 = all cores)");
  swp->add_option("--d", a.fam_d, "fixed d for common-e / common-f");
  swp->add_option("--e", a.fam_e, "fixed e for common-d / common-f");
  swp->add_option("--f", a.fam_f, "fixed f for common-d / common-e");
  add_out(swp);

  auto* fm = app.add_subcommand("fm", "feasibility of a JSON inequality system with witness");
  fm->add_option("--system", a.system_path, "system document")->required();
  add_out(fm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (stats->parsed()) return run_stats(a);
    if (swr->parsed()) return run_sw_region(a);
    if (app.get_subcommand("check-df")->parsed()) return run_check(a, true);
    if (app.get_subcommand("check-cf")->parsed()) return run_check(a, false);
    if (opt->parsed()) return run_optimize(a);
    if (sim->parsed()) return run_simulate(a);
    if (swp->parsed()) return run_sweep(a);
    if (fm->parsed()) return run_fm(a);
    std::cerr << "error: no command\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
