#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "macfcs/model.hpp"
#include "macfcs/regions.hpp"

namespace macfcs {

struct SearchConfig {
  // Auxiliary cardinalities. Recognized names: W0,W1,W2 (decode-forward) and
  // U1,U2,Yt1,Yt2 (compress-forward). Missing entries fall back to defaults:
  // W0=W1=W2=U1=U2=2, Yt_i = y_i_card + 1.
  std::map<std::string, std::size_t> cards;
  int restarts = 1;
  int refine_iters = 40;
  std::uint64_t seed = 0;
  double tol_feas = 1e-9;
  double tol_zero = 1e-12;
  double tol_indep = 1e-6;
  double indep_penalty = 10.0;  // bits of objective lost per unit of TV
  int workers = 0;              // 0 = one per hardware thread

  std::size_t card_or(const std::string& name, std::size_t fallback) const {
    auto it = cards.find(name);
    return it == cards.end() ? fallback : it->second;
  }
};

struct DFSearchResult {
  DFInput best;
  FeasibilityReport report;
  double objective = 0.0;  // min non-vacuous margin of the best candidate
  long evaluations = 0;
  int best_restart = 0;
};

struct CFSearchResult {
  CFInput best;
  FeasibilityReport report;
  double objective = 0.0;  // min non-vacuous margin minus indep_penalty * TV
  long evaluations = 0;
  int best_restart = 0;
};

using ProgressFn = std::function<void(int restart, double best_objective)>;

// Maximize the worst constraint margin of Theorem-style decode-forward
// candidates over `restarts` seeded starts, each followed by coordinate
// ascent on every simplex row. Deterministic in (instance, cfg), including
// under parallel workers. Restart 0 starts from uniform factors.
DFSearchResult search_df(const Channel& ch, const SourceStats& st, const SearchConfig& cfg,
                         const ProgressFn& progress = nullptr);

// Same search over compress-forward candidates; the objective subtracts
// indep_penalty * TV(p(yt1,yt2), p(yt1)p(yt2)) and final feasibility also
// requires TV <= tol_indep.
CFSearchResult search_cf(const Channel& ch, const SourceStats& st, const SearchConfig& cfg,
                         const ProgressFn& progress = nullptr);

}  // namespace macfcs
