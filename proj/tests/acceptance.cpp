// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Each check pins its tolerances in code and uses fixed seeds, so a rerun
// is bit-for-bit reproducible.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

#include "instances.hpp"
#include "macfcs/optimizer.hpp"
#include "macfcs/serialize.hpp"
#include "macfcs/simulator.hpp"

using namespace macfcs;
using testgen::rng::Stream;
using testgen::rng::stream_key;

namespace {

int failures = 0;

void criterion(int idx, const char* name, const std::function<bool(std::string&)>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %02d %-4s %7.1fs  %-34s %s\n", idx, ok ? "PASS" : "FAIL", secs, name,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double mi_of(const FeasibilityReport& r, const char* label) {
  for (const auto& c : r.constraints)
    if (c.label == label) return c.rhs;
  return std::numeric_limits<double>::quiet_NaN();
}

// The seeded instance mix for the compress-forward equivalence checks. All
// families make the quantized observations independent by construction:
// cross-link channels with observation-only quantizers, generic channels
// with input-only quantizers, and strong near-uniform cross-links.
struct CfInstance {
  Channel ch;
  CFInput in;
  SourceStats st;
};

CfInstance cf_instance(Stream& s, int it) {
  const int fam = it % 4;
  Channel ch = testgen::dead_channel();
  CFInput in = CFInput::uniform(1, 1, 1, 1, 2, 2, 1, 1);
  switch (fam) {
    case 0:
      ch = testgen::random_channel(s, 2, 2, 2, 2, 2);
      in = testgen::random_cf_input_indep(s, 2, 2, 3, 3, ch, testgen::QuantizerStyle::x_only);
      break;
    case 1:
      ch = testgen::crosslink_channel(0.02 + 0.2 * s.next_double());
      in = testgen::random_cf_input_indep(s, 2, 2, 2, 2, ch, testgen::QuantizerStyle::y_only);
      break;
    case 2:
      ch = testgen::random_channel(s, 2, 2, 2, 2, 3);
      in = testgen::random_cf_input_indep(s, 2, 2, 2, 2, ch, testgen::QuantizerStyle::x_only);
      break;
    default:
      ch = testgen::crosslink_channel(0.02 + 0.1 * s.next_double());
      in = testgen::random_cf_input_indep(s, 2, 2, 2, 2, ch, testgen::QuantizerStyle::x_only, 8.0);
      break;
  }
  SourcePair src = testgen::bern_pair(0.02 + 0.46 * s.next_double(),
                                      0.02 + 0.46 * s.next_double());
  if (it % 3 == 1) src = testgen::dsbs(0.03 + 0.44 * s.next_double());
  if (it % 3 == 2) src = testgen::random_source(s, 2, 2);
  return {std::move(ch), std::move(in), source_stats(src)};
}

}  // namespace

int main() {
  criterion(1, "entropy and mutual information", [](std::string& detail) {
    const Dist bern({{"X", 2}}, {0.11, 0.89});
    const double h = entropy(bern, {"X"});
    const Factor px = Factor::from_dist(Dist({{"X", 2}}, {0.5, 0.5}));
    const Factor bsc({{"Y", 2}}, {{"X", 2}}, {0.95, 0.05, 0.05, 0.95});
    const double mi = cond_mutual_info(chain_product(std::array{px, bsc}), {"X"}, {"Y"}, {});
    detail = "H=" + std::to_string(h) + " I=" + std::to_string(mi);
    return std::abs(h - 0.4999) <= 5e-4 && std::abs(mi - 0.7136) <= 5e-4;
  });

  criterion(2, "slepian-wolf bounds for DSBS(0.25)", [](std::string& detail) {
    const auto sys = slepian_wolf_region(source_stats(testgen::dsbs(0.25)));
    const double b1 = -sys.ineqs[0].rhs, b2 = -sys.ineqs[1].rhs, b12 = -sys.ineqs[2].rhs;
    char buf[96];
    std::snprintf(buf, sizeof buf, "bounds=(%.5f, %.5f, %.5f)", b1, b2, b12);
    detail = buf;
    return std::abs(b1 - 0.8113) <= 1e-4 && std::abs(b2 - 0.8113) <= 1e-4 &&
           std::abs(b12 - 1.8113) <= 1e-4;
  });

  criterion(3, "min-form equivalence, 1000 triples", [](std::string& detail) {
    Stream s(stream_key(1001, "acc-minform"));
    int agree = 0, feasible = 0;
    for (int it = 0; it < 1000; ++it) {
      auto card = [&] { return 2 + s.next_below(2); };
      Channel ch = testgen::dead_channel();
      SourcePair src = testgen::dsbs(0.25);
      DFInput in = DFInput::uniform(1, 1, 1, 2, 2);
      if (it % 3 == 2) {
        // strong relay geometry with a weak source: feasible side
        ch = testgen::sharp_df_channel(s);
        src = testgen::bern_pair(0.02 + 0.23 * s.next_double(), 0.02 + 0.23 * s.next_double());
        in = testgen::random_df_input(s, 1 + s.next_below(2), 1 + s.next_below(2),
                                      1 + s.next_below(2), ch, 6.0);
      } else {
        ch = testgen::random_channel(s, card(), card(), card(), card(), card());
        src = testgen::random_source(s, card(), card());
        in = testgen::random_df_input(s, card(), card(), card(), ch);
      }
      const SourceStats st = source_stats(src);
      const Dist joint = build_df_joint(ch, in);
      const bool a = df_constraints(joint, st).feasible;
      const bool b = df_raw_constraints(joint, st).feasible;
      agree += a == b;
      feasible += a;
    }
    detail = "agree=" + std::to_string(agree) + "/1000 feasible=" + std::to_string(feasible);
    return agree == 1000 && feasible > 0;
  });

  criterion(4, "degenerate-auxiliary MAC terms", [](std::string& detail) {
    Stream s(stream_key(1002, "acc-macdeg"));
    int ok = 0;
    double worst = 0.0;
    for (int it = 0; it < 200; ++it) {
      auto card = [&] { return 2 + s.next_below(2); };
      const Channel ch = testgen::random_channel(s, card(), card(), card(), card(), card());
      const auto px1 = testgen::dirichlet_row(s, ch.x1_card);
      const auto px2 = testgen::dirichlet_row(s, ch.x2_card);
      const DFInput in = DFInput::make(1, 1, 1, {1}, {1}, {1}, px1, px2, ch.x1_card, ch.x2_card);
      const FeasibilityReport rep =
          df_constraints(build_df_joint(ch, in), source_stats(testgen::dsbs(0.25)));
      const Dist direct = chain_product(std::array{
          Factor::from_dist(Dist({{var::X1, ch.x1_card}}, px1)),
          Factor::from_dist(Dist({{var::X2, ch.x2_card}}, px2)), ch.law});
      const double d1 = std::abs(mi_of(rep, "1d") -
                                 cond_mutual_info(direct, {var::X1}, {var::Y3}, {var::X2}));
      const double d2 = std::abs(mi_of(rep, "1e") -
                                 cond_mutual_info(direct, {var::X2}, {var::Y3}, {var::X1}));
      const double d3 = std::abs(mi_of(rep, "1g") -
                                 cond_mutual_info(direct, {var::X1, var::X2}, {var::Y3}, {}));
      worst = std::max({worst, d1, d2, d3});
      ok += d1 <= 1e-9 && d2 <= 1e-9 && d3 <= 1e-9;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "ok=%d/200 worst=%.2e", ok, worst);
    detail = buf;
    return ok == 200;
  });

  criterion(5, "elimination equivalence + grid oracle", [](std::string& detail) {
    Stream s(stream_key(1003, "acc-cf-equiv"));
    int agree = 0, feasible = 0, grid_agree = 0, indep_pass = 0;
    for (int it = 0; it < 1000; ++it) {
      const CfInstance inst = cf_instance(s, it);
      const Dist joint = build_cf_joint(inst.ch, inst.in);
      const FeasibilityReport rep = cf_constraints(joint, inst.st, 1e-6);
      if (!rep.indep_ok) continue;  // every generated instance must pass this filter
      ++indep_pass;
      const RateConstraintSystem raw = cf_raw_system(joint, inst.st);
      const bool fm = system_feasible(raw).feasible;
      agree += fm == rep.feasible;
      feasible += rep.feasible;
      if (it < 100) grid_agree += testgen::cf_grid_oracle(raw, 1e-3) == fm;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "indep=%d agree=%d/1000 feasible=%d grid=%d/100", indep_pass,
                  agree, feasible, grid_agree);
    detail = buf;
    return indep_pass == 1000 && agree == 1000 && grid_agree == 100;
  });

  criterion(6, "cut-set dominance and garbling", [](std::string& detail) {
    Stream s(stream_key(1004, "acc-cutset"));
    int cut_ok = 0, garble_ok = 0;
    for (int it = 0; it < 200; ++it) {
      const Channel ch = testgen::random_channel(s, 2, 2, 2, 2, 3);
      const DFInput in = testgen::random_df_input(s, 2, 2, 2, ch);
      const Dist joint = build_df_joint(ch, in);
      const SourceStats st = source_stats(testgen::dsbs(0.25));
      const FeasibilityReport rep = df_constraints(joint, st);
      cut_ok += mi_of(rep, "1g") <= mac_sum_capacity(ch) + 1e-6;

      const std::size_t zc = 2;
      const auto g = testgen::dirichlet_rows(s, ch.y3_card, zc);
      const std::size_t yb = ch.y1_card * ch.y2_card * ch.y3_card;
      std::vector<double> garbled(ch.x1_card * ch.x2_card * ch.y1_card * ch.y2_card * zc, 0.0);
      for (std::size_t x = 0; x < ch.x1_card * ch.x2_card; ++x)
        for (std::size_t yj = 0; yj < yb; ++yj) {
          const std::size_t y12 = yj / ch.y3_card, y3 = yj % ch.y3_card;
          for (std::size_t z = 0; z < zc; ++z)
            garbled[(x * (yb / ch.y3_card) + y12) * zc + z] +=
                ch.law.probs()[x * yb + yj] * g[y3 * zc + z];
        }
      const Channel gch =
          Channel::make(ch.x1_card, ch.x2_card, ch.y1_card, ch.y2_card, zc, std::move(garbled));
      const FeasibilityReport grep = df_constraints(build_df_joint(gch, in), st);
      bool mono = true;
      for (const char* label : {"1c", "1d", "1e", "1f", "1g"})
        mono = mono && mi_of(grep, label) <= mi_of(rep, label) + 1e-6;
      garble_ok += mono;
    }
    detail = "cutset=" + std::to_string(cut_ok) + "/200 garble=" + std::to_string(garble_ok) + "/200";
    return cut_ok == 200 && garble_ok == 200;
  });

  criterion(7, "optimizer soundness and determinism", [](std::string& detail) {
    const Channel ch = testgen::crosslink_channel(0.0);
    const SourceStats st = source_stats(testgen::bern_pair(0.11, 0.11));
    SearchConfig cfg;
    cfg.cards = {{"W0", 1}, {"W1", 1}, {"W2", 1}};
    cfg.restarts = 200;
    cfg.seed = 77;
    cfg.workers = 1;
    const DFSearchResult a = search_df(ch, st, cfg);
    cfg.workers = 4;
    const DFSearchResult b = search_df(ch, st, cfg);
    const std::string ja = df_input_to_json(a.best).dump() + report_to_json(a.report).dump() +
                           std::to_string(a.evaluations);
    const std::string jb = df_input_to_json(b.best).dump() + report_to_json(b.report).dump() +
                           std::to_string(b.evaluations);
    const bool identical = ja == jb && a.objective == b.objective;
    const bool found = a.report.feasible && a.objective >= 0.3;
    const FeasibilityReport again = df_constraints(build_df_joint(ch, a.best), st);
    bool sound = again.feasible == a.report.feasible;

    // feasible results on random instances re-validate as well
    Stream s(stream_key(1005, "acc-sound"));
    for (int it = 0; it < 20; ++it) {
      const Channel rch = testgen::random_channel(s, 2, 2, 2, 2, 4);
      const SourceStats rst =
          source_stats(testgen::bern_pair(0.05 + 0.2 * s.next_double(), 0.05 + 0.2 * s.next_double()));
      SearchConfig rcfg;
      rcfg.cards = {{"W0", 2}, {"W1", 2}, {"W2", 2}};
      rcfg.restarts = 4;
      rcfg.refine_iters = 6;
      rcfg.seed = 1000 + static_cast<std::uint64_t>(it);
      const DFSearchResult r = search_df(rch, rst, rcfg);
      const FeasibilityReport check = df_constraints(build_df_joint(rch, r.best), rst);
      sound = sound && check.feasible == r.report.feasible;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "objective=%.4f identical=%d sound=%d", a.objective, identical,
                  sound);
    detail = buf;
    return identical && found && sound;
  });

  criterion(8, "slepian-wolf simulation trend", [](std::string& detail) {
    const SourcePair src = testgen::dsbs(0.25);
    SimConfig cfg;
    cfg.trials = 2000;
    cfg.seed = 808;
    cfg.rates = {{"R1", 1.0}, {"R2", 1.0}};
    cfg.n = 8;
    const double e8 = simulate_sw(src, cfg).error_rate;
    cfg.n = 16;
    const double e16 = simulate_sw(src, cfg).error_rate;

    cfg.rates = {{"R1", 0.85}, {"R2", 0.85}};
    double low_min = 1.0;
    for (std::size_t n : {8, 12, 16}) {
      cfg.n = n;
      low_min = std::min(low_min, simulate_sw(src, cfg).error_rate);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "err(8)=%.3f err(16)=%.3f low-rate min=%.3f", e8, e16, low_min);
    detail = buf;
    return e16 < e8 && low_min >= 0.2;
  });

  criterion(9, "mac simulation trend", [](std::string& detail) {
    const Channel ch = testgen::parallel_bsc_mac(0.05);
    SimConfig cfg;
    cfg.seed = 909;
    cfg.rates = {{"R1", 0.5}, {"R2", 0.5}};
    cfg.trials = 2000;
    const std::vector<double> u{0.5, 0.5};
    cfg.n = 8;
    const double e8 = simulate_mac(ch, cfg, u, u).error_rate;
    cfg.n = 16;
    const double e16 = simulate_mac(ch, cfg, u, u).error_rate;

    cfg.rates = {{"R1", 0.9}, {"R2", 0.9}};
    double high_min = 1.0;
    for (auto [n, trials] : {std::pair<std::size_t, std::size_t>{8, 1000}, {12, 250}, {16, 50}}) {
      cfg.n = n;
      cfg.trials = trials;
      high_min = std::min(high_min, simulate_mac(ch, cfg, u, u).error_rate);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "err(8)=%.3f err(16)=%.3f above-capacity min=%.3f", e8, e16,
                  high_min);
    detail = buf;
    return e16 < e8 && high_min >= 0.3;
  });

  criterion(10, "decode-forward scheme simulation", [](std::string& detail) {
    const Channel ch = testgen::crosslink_channel(0.0);
    const SourcePair src = testgen::bern_pair(0.11, 0.11);
    const DFInput in = DFInput::uniform(1, 1, 1, 2, 2);
    SimConfig cfg;
    cfg.blocks = 4;
    cfg.trials = 500;
    cfg.seed = 1010;
    cfg.n = 7;
    const SimOutcome e7 = simulate_df(ch, src, in, cfg);
    cfg.n = 14;
    const SimOutcome e14 = simulate_df(ch, src, in, cfg);

    bool labels_ok = true;
    const std::set<std::string> allowed = {"node1-decode-k", "node2-decode-j", "dest-4a",
                                           "dest-4b",        "dest-4c",        "dest-4d",
                                           "dest-4e",        "dest-4f",        "dest-4g"};
    for (const SimOutcome* out : {&e7, &e14})
      for (const auto& [label, count] : out->breakdown) labels_ok = labels_ok && allowed.count(label);
    char buf[96];
    std::snprintf(buf, sizeof buf, "err(7)=%.3f err(14)=%.3f labels_ok=%d", e7.error_rate,
                  e14.error_rate, labels_ok);
    detail = buf;
    return e14.error_rate < e7.error_rate && labels_ok;
  });

  if (failures == 0) std::printf("all criteria passed\n");
  return failures == 0 ? 0 : 1;
}
