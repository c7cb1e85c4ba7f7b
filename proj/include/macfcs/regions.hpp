#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "macfcs/model.hpp"
#include "macfcs/prob.hpp"

namespace macfcs {

// One linear inequality over named rate variables, in the canonical form
//   sum_v coeffs[v] * v  <  rhs        (strict)
//   sum_v coeffs[v] * v  <= rhs        (non-strict)
// An inequality with no coefficients is a constant verdict.
struct LinIneq {
  std::map<std::string, double> coeffs;
  double rhs = 0.0;
  bool strict = false;
  std::string label;
};

struct RateConstraintSystem {
  std::vector<std::string> vars;
  std::vector<LinIneq> ineqs;
  bool nonneg = true;  // implicit v >= 0 for every variable
};

// Evaluation of one region constraint, normalized so that lhs is the rate
// demanded (by the source statistics) and rhs the rate supplied (by the
// mutual-information expression); margin = rhs - lhs in bits.
struct ConstraintEval {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool satisfied = false;
  bool vacuous = false;
};

struct FeasibilityReport {
  std::vector<ConstraintEval> constraints;
  bool feasible = false;
  double min_margin = 0.0;  // over non-vacuous constraints; +inf if all vacuous

  // Compress-forward only: deviation of p(yt1,yt2) from p(yt1)p(yt2) and the
  // tolerance it was checked against. Feasibility requires indep_ok.
  std::optional<double> indep_tv;
  std::optional<double> indep_tol;
  bool indep_ok = true;
};

struct RegionTol {
  double tol_feas = 1e-9;  // margin must exceed this for a strict constraint to hold
  double tol_zero = 1e-12; // a demand at or below this makes the constraint vacuous
};

// {R1 >= H(S1|S2), R2 >= H(S2|S1), R1+R2 >= H(S1,S2)}, labels 5a/5b/5c.
RateConstraintSystem slepian_wolf_region(const SourceStats& st);

// Decode-forward region on a joint over (W0,W1,W2,X1,X2,Y1,Y2,Y3):
// seven constraints 1a..1g (1a/1b carry min-of-two-branch suppliers).
FeasibilityReport df_constraints(const Dist& joint, const SourceStats& st, RegionTol tol = {});

// The per-error-event form: nine constraints 2, 3, 4a..4g.
FeasibilityReport df_raw_constraints(const Dist& joint, const SourceStats& st, RegionTol tol = {});

// Compress-forward region on a joint over (U1,U2,X1,X2,Y1,Y2,Y3,Yt1,Yt2):
// six constraints 6a..6c, 7a..7c plus the quantizer-independence check.
FeasibilityReport cf_constraints(const Dist& joint, const SourceStats& st, double tol_indep,
                                 RegionTol tol = {});

// The raw compress-forward rate system over {R1,R2,Rt1,Rt2,Rp1,Rp2}:
// 5a..5c, 8, 9, 10a..10c, 11a..11c, 12a..12c with all mutual-information
// terms evaluated to constants. Nonnegativity of all six rates is implicit.
RateConstraintSystem cf_raw_system(const Dist& joint, const SourceStats& st);

// Fourier-Motzkin projection eliminating one variable: every (lower, upper)
// bound pair is combined; derived strictness is the OR of the parents';
// exact-duplicate coefficient rows keep only the tightest bound. Trivially
// true constant rows are dropped, violated ones kept as constant verdicts.
RateConstraintSystem fm_eliminate(const RateConstraintSystem& sys, const std::string& var);

struct SystemFeasibility {
  bool feasible = false;
  std::map<std::string, double> witness;  // empty when infeasible
};

// Eliminates every variable, then back-substitutes a witness (interval
// midpoints; lower bound + 1 when unbounded above).
SystemFeasibility system_feasible(const RateConstraintSystem& sys);

// Maximum of I(X1,X2;Y3) over all joint input pmfs p(x1,x2), in bits, by
// alternating maximization to gap 1e-7 with 8 restarts.
double mac_sum_capacity(const Channel& ch);

}  // namespace macfcs
