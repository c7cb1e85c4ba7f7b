#include "macfcs/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "macfcs/rng.hpp"

namespace macfcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Names = std::vector<std::string>;

struct ReportBuilder {
  RegionTol tol;
  FeasibilityReport report;

  void add(std::string label, double demand, double supply) {
    ConstraintEval c;
    c.label = std::move(label);
    c.lhs = demand;
    c.rhs = supply;
    c.margin = supply - demand;
    c.vacuous = demand <= tol.tol_zero;
    c.satisfied = c.vacuous || c.margin > tol.tol_feas;
    report.constraints.push_back(std::move(c));
  }

  FeasibilityReport finish() {
    report.feasible = report.indep_ok;
    report.min_margin = kInf;
    for (const auto& c : report.constraints) {
      if (!c.satisfied) report.feasible = false;
      if (!c.vacuous) report.min_margin = std::min(report.min_margin, c.margin);
    }
    return std::move(report);
  }
};

void require_vars(const Dist& joint, const Names& names) {
  for (const auto& n : names)
    if (!joint.has_var(n)) throw validation_error("joint is missing variable '" + n + "'");
}

// The mutual-information suppliers of the decode-forward region.
struct DfTerms {
  double i_x1_y2;    // I(X1;Y2 | W0,W1,W2,X2)
  double i_x2_y1;    // I(X2;Y1 | W0,W1,W2,X1)
  double i_w0;       // I(W0;Y3 | W1,W2)
  double i_w1;       // I(W1;Y3 | W0,W2)
  double i_w2;       // I(W2;Y3 | W0,W1)
  double i_x1_y3;    // I(X1;Y3 | W0,W1,W2,X2)
  double i_x2_y3;    // I(X2;Y3 | W0,W1,W2,X1)
  double i_w0w1;     // I(W0,W1;Y3 | W2)
  double i_w0w2;     // I(W0,W2;Y3 | W1)
  double i_w1w2;     // I(W1,W2;Y3 | W0)
  double i_x1x2_w;   // I(X1,X2;Y3 | W0,W1,W2)
  double i_x1x2;     // I(X1,X2;Y3)
};

DfTerms df_terms(const Dist& j) {
  using namespace var;
  DfTerms t{};
  t.i_x1_y2 = cond_mutual_info(j, {X1}, {Y2}, {W0, W1, W2, X2});
  t.i_x2_y1 = cond_mutual_info(j, {X2}, {Y1}, {W0, W1, W2, X1});
  t.i_w0 = cond_mutual_info(j, {W0}, {Y3}, {W1, W2});
  t.i_w1 = cond_mutual_info(j, {W1}, {Y3}, {W0, W2});
  t.i_w2 = cond_mutual_info(j, {W2}, {Y3}, {W0, W1});
  t.i_x1_y3 = cond_mutual_info(j, {X1}, {Y3}, {W0, W1, W2, X2});
  t.i_x2_y3 = cond_mutual_info(j, {X2}, {Y3}, {W0, W1, W2, X1});
  t.i_w0w1 = cond_mutual_info(j, {W0, W1}, {Y3}, {W2});
  t.i_w0w2 = cond_mutual_info(j, {W0, W2}, {Y3}, {W1});
  t.i_w1w2 = cond_mutual_info(j, {W1, W2}, {Y3}, {W0});
  t.i_x1x2_w = cond_mutual_info(j, {X1, X2}, {Y3}, {W0, W1, W2});
  t.i_x1x2 = cond_mutual_info(j, {X1, X2}, {Y3}, {});
  return t;
}

// The mutual-information terms of the compress-forward region.
struct CfTerms {
  double c1;   // I(X1; Yt2,Y3 | U1,X2)
  double c2;   // I(X2; Yt1,Y3 | U2,X1)
  double c12;  // I(X1,X2; Yt1,Yt2,Y3 | U1,U2)
  double b1;   // I(Yt1; Y1 | X1)
  double b2;   // I(Yt2; Y2 | X2)
  double e1;   // I(Yt1; Y3 | Yt2,U1,U2)
  double e2;   // I(Yt2; Y3 | Yt1,U1,U2)
  double e12;  // I(Yt1,Yt2; Y3 | U1,U2)
  double d1;   // I(U1; Y3 | U2)
  double d2;   // I(U2; Y3 | U1)
  double d12;  // I(U1,U2; Y3)
};

CfTerms cf_terms(const Dist& j) {
  using namespace var;
  CfTerms t{};
  t.c1 = cond_mutual_info(j, {X1}, {Yt2, Y3}, {U1, X2});
  t.c2 = cond_mutual_info(j, {X2}, {Yt1, Y3}, {U2, X1});
  t.c12 = cond_mutual_info(j, {X1, X2}, {Yt1, Yt2, Y3}, {U1, U2});
  t.b1 = cond_mutual_info(j, {Yt1}, {Y1}, {X1});
  t.b2 = cond_mutual_info(j, {Yt2}, {Y2}, {X2});
  t.e1 = cond_mutual_info(j, {Yt1}, {Y3}, {Yt2, U1, U2});
  t.e2 = cond_mutual_info(j, {Yt2}, {Y3}, {Yt1, U1, U2});
  t.e12 = cond_mutual_info(j, {Yt1, Yt2}, {Y3}, {U1, U2});
  t.d1 = cond_mutual_info(j, {U1}, {Y3}, {U2});
  t.d2 = cond_mutual_info(j, {U2}, {Y3}, {U1});
  t.d12 = cond_mutual_info(j, {U1, U2}, {Y3}, {});
  return t;
}

const Names kDfVars = {var::W0, var::W1, var::W2, var::X1,
                       var::X2, var::Y1, var::Y2, var::Y3};
const Names kCfVars = {var::U1, var::U2, var::X1,  var::X2, var::Y1,
                       var::Y2, var::Y3, var::Yt1, var::Yt2};

}  // namespace

RateConstraintSystem slepian_wolf_region(const SourceStats& st) {
  RateConstraintSystem sys;
  sys.vars = {"R1", "R2"};
  sys.nonneg = true;
  // R >= bound, canonically -R <= -bound
  sys.ineqs.push_back({{{"R1", -1.0}}, -st.h_s1_given_s2, false, "5a"});
  sys.ineqs.push_back({{{"R2", -1.0}}, -st.h_s2_given_s1, false, "5b"});
  sys.ineqs.push_back({{{"R1", -1.0}, {"R2", -1.0}}, -st.h_joint, false, "5c"});
  return sys;
}

FeasibilityReport df_constraints(const Dist& joint, const SourceStats& st, RegionTol tol) {
  require_vars(joint, kDfVars);
  const DfTerms t = df_terms(joint);
  ReportBuilder rb{tol, {}};
  rb.add("1a", st.h_s1_given_s2, std::min(t.i_x1_y2, t.i_w1 + t.i_x1_y3));
  rb.add("1b", st.h_s2_given_s1, std::min(t.i_x2_y1, t.i_w2 + t.i_x2_y3));
  rb.add("1c", st.i_s1_s2, t.i_w0);
  rb.add("1d", st.h_s1, t.i_w0w1 + t.i_x1_y3);
  rb.add("1e", st.h_s2, t.i_w0w2 + t.i_x2_y3);
  rb.add("1f", st.h_s1_given_s2 + st.h_s2_given_s1, t.i_w1w2 + t.i_x1x2_w);
  rb.add("1g", st.h_joint, t.i_x1x2);
  return rb.finish();
}

FeasibilityReport df_raw_constraints(const Dist& joint, const SourceStats& st, RegionTol tol) {
  require_vars(joint, kDfVars);
  const DfTerms t = df_terms(joint);
  ReportBuilder rb{tol, {}};
  rb.add("2", st.h_s2_given_s1, t.i_x2_y1);
  rb.add("3", st.h_s1_given_s2, t.i_x1_y2);
  rb.add("4a", st.i_s1_s2, t.i_w0);
  rb.add("4b", st.h_s1_given_s2, t.i_w1 + t.i_x1_y3);
  rb.add("4c", st.h_s2_given_s1, t.i_w2 + t.i_x2_y3);
  rb.add("4d", st.h_s1, t.i_w0w1 + t.i_x1_y3);
  rb.add("4e", st.h_s2, t.i_w0w2 + t.i_x2_y3);
  rb.add("4f", st.h_s1_given_s2 + st.h_s2_given_s1, t.i_w1w2 + t.i_x1x2_w);
  rb.add("4g", st.h_joint, t.i_x1x2);
  return rb.finish();
}

FeasibilityReport cf_constraints(const Dist& joint, const SourceStats& st, double tol_indep,
                                 RegionTol tol) {
  require_vars(joint, kCfVars);
  const CfTerms t = cf_terms(joint);
  ReportBuilder rb{tol, {}};

  const Dist p12 = marginalize(joint, {var::Yt1, var::Yt2});
  const Dist prod = tensor_product(marginalize(joint, {var::Yt1}), marginalize(joint, {var::Yt2}));
  const double tv = total_variation(p12, prod);
  rb.report.indep_tv = tv;
  rb.report.indep_tol = tol_indep;
  rb.report.indep_ok = tv <= tol_indep;

  rb.add("6a", st.h_s1_given_s2, t.c1);
  rb.add("6b", st.h_s2_given_s1, t.c2);
  rb.add("6c", st.h_joint, t.c12);
  rb.add("7a", t.b1 - t.e1, t.d1);
  rb.add("7b", t.b2 - t.e2, t.d2);
  rb.add("7c", t.b1 + t.b2 - t.e12, t.d12);
  return rb.finish();
}

RateConstraintSystem cf_raw_system(const Dist& joint, const SourceStats& st) {
  require_vars(joint, kCfVars);
  const CfTerms t = cf_terms(joint);
  RateConstraintSystem sys;
  sys.vars = {"R1", "R2", "Rt1", "Rt2", "Rp1", "Rp2"};
  sys.nonneg = true;
  auto le = [&](std::map<std::string, double> c, double rhs, bool strict, const char* label) {
    sys.ineqs.push_back({std::move(c), rhs, strict, label});
  };
  le({{"R1", -1.0}}, -st.h_s1_given_s2, false, "5a");
  le({{"R2", -1.0}}, -st.h_s2_given_s1, false, "5b");
  le({{"R1", -1.0}, {"R2", -1.0}}, -st.h_joint, false, "5c");
  le({{"Rt1", -1.0}}, -t.b1, true, "8");
  le({{"Rt2", -1.0}}, -t.b2, true, "9");
  le({{"Rp1", 1.0}}, t.d1, true, "10a");
  le({{"Rp2", 1.0}}, t.d2, true, "10b");
  le({{"Rp1", 1.0}, {"Rp2", 1.0}}, t.d12, true, "10c");
  le({{"Rt1", 1.0}, {"Rp1", -1.0}}, t.e1, true, "11a");
  le({{"Rt2", 1.0}, {"Rp2", -1.0}}, t.e2, true, "11b");
  le({{"Rt1", 1.0}, {"Rt2", 1.0}, {"Rp1", -1.0}, {"Rp2", -1.0}}, t.e12, true, "11c");
  le({{"R1", 1.0}}, t.c1, true, "12a");
  le({{"R2", 1.0}}, t.c2, true, "12b");
  le({{"R1", 1.0}, {"R2", 1.0}}, t.c12, true, "12c");
  return sys;
}

namespace {

std::map<std::string, double> drop_zeros(std::map<std::string, double> coeffs) {
  for (auto it = coeffs.begin(); it != coeffs.end();)
    it = (it->second == 0.0) ? coeffs.erase(it) : std::next(it);
  return coeffs;
}

bool trivially_true(const LinIneq& q) {
  return q.coeffs.empty() && (q.strict ? q.rhs > 0.0 : q.rhs >= 0.0);
}

// Tighter-first ordering for identical coefficient rows.
bool tighter(const LinIneq& a, const LinIneq& b) {
  if (a.rhs != b.rhs) return a.rhs < b.rhs;
  return a.strict && !b.strict;
}

void dedupe(std::vector<LinIneq>& ineqs) {
  std::map<std::map<std::string, double>, std::size_t> best;
  std::vector<LinIneq> out;
  for (auto& q : ineqs) {
    auto [it, inserted] = best.try_emplace(q.coeffs, out.size());
    if (inserted) {
      out.push_back(std::move(q));
    } else if (tighter(q, out[it->second])) {
      out[it->second] = std::move(q);
    }
  }
  ineqs = std::move(out);
}

void uniquify_labels(std::vector<LinIneq>& ineqs) {
  std::set<std::string> seen;
  for (auto& q : ineqs) {
    std::string base = q.label;
    int k = 2;
    while (!seen.insert(q.label).second) q.label = base + "#" + std::to_string(k++);
  }
}

}  // namespace

RateConstraintSystem fm_eliminate(const RateConstraintSystem& sys, const std::string& var) {
  if (std::find(sys.vars.begin(), sys.vars.end(), var) == sys.vars.end())
    throw validation_error("fm_eliminate: unknown variable '" + var + "'");

  std::vector<LinIneq> lowers, uppers;
  RateConstraintSystem out;
  out.nonneg = sys.nonneg;
  for (const auto& v : sys.vars)
    if (v != var) out.vars.push_back(v);

  for (const auto& q : sys.ineqs) {
    auto it = q.coeffs.find(var);
    const double a = (it == q.coeffs.end()) ? 0.0 : it->second;
    if (a > 0.0)
      uppers.push_back(q);
    else if (a < 0.0)
      lowers.push_back(q);
    else
      out.ineqs.push_back(q);
  }
  if (sys.nonneg) lowers.push_back({{{var, -1.0}}, 0.0, false, var + ">=0"});

  for (const auto& lo : lowers) {
    const double al = -lo.coeffs.at(var);  // > 0
    for (const auto& up : uppers) {
      const double au = up.coeffs.at(var);  // > 0
      LinIneq q;
      q.coeffs = lo.coeffs;
      for (auto& [name, c] : q.coeffs) c *= au;
      for (const auto& [name, c] : up.coeffs) q.coeffs[name] += al * c;
      q.coeffs.erase(var);
      q.coeffs = drop_zeros(std::move(q.coeffs));
      q.rhs = au * lo.rhs + al * up.rhs;
      q.strict = lo.strict || up.strict;
      q.label = lo.label + "+" + up.label;
      if (!trivially_true(q)) out.ineqs.push_back(std::move(q));
    }
  }

  dedupe(out.ineqs);
  uniquify_labels(out.ineqs);
  return out;
}

SystemFeasibility system_feasible(const RateConstraintSystem& sys) {
  const std::set<std::string> known(sys.vars.begin(), sys.vars.end());
  for (const auto& q : sys.ineqs)
    for (const auto& [name, c] : q.coeffs)
      if (!known.count(name))
        throw validation_error("system_feasible: inequality '" + q.label +
                               "' references undeclared variable '" + name + "'");

  std::vector<RateConstraintSystem> stages;  // stages[k] still contains vars[k..]
  stages.push_back(sys);
  for (const auto& v : sys.vars) stages.push_back(fm_eliminate(stages.back(), v));

  SystemFeasibility result;
  for (const auto& q : stages.back().ineqs) {
    // fully eliminated: only constant rows remain
    if (q.strict ? q.rhs <= 0.0 : q.rhs < 0.0) return result;
  }
  result.feasible = true;

  // Back-substitute in reverse elimination order using interval midpoints.
  for (std::size_t k = sys.vars.size(); k-- > 0;) {
    const std::string& v = sys.vars[k];
    double lo = stages[k].nonneg ? 0.0 : -kInf;
    double hi = kInf;
    for (const auto& q : stages[k].ineqs) {
      auto it = q.coeffs.find(v);
      if (it == q.coeffs.end()) continue;
      double rest = 0.0;
      for (const auto& [name, c] : q.coeffs)
        if (name != v) rest += c * result.witness.at(name);
      const double bound = (q.rhs - rest) / it->second;
      if (it->second > 0.0)
        hi = std::min(hi, bound);
      else
        lo = std::max(lo, bound);
    }
    double w;
    if (lo == -kInf && hi == kInf)
      w = 0.0;
    else if (hi == kInf)
      w = lo + 1.0;
    else if (lo == -kInf)
      w = hi - 1.0;
    else
      w = 0.5 * (lo + hi);
    result.witness[v] = w;
  }
  return result;
}

double mac_sum_capacity(const Channel& ch) {
  // W(y3 | x) for the combined input x = (x1, x2)
  const std::size_t nx = ch.x1_card * ch.x2_card;
  const std::size_t ny = ch.y3_card;
  std::vector<double> w(nx * ny, 0.0);
  const std::size_t yblock = ch.y1_card * ch.y2_card * ch.y3_card;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t yj = 0; yj < yblock; ++yj) w[x * ny + yj % ny] += ch.law.probs()[x * yblock + yj];

  constexpr double kGapTol = 1e-7;
  constexpr int kMaxIter = 20000;
  constexpr int kRestarts = 8;
  const double ln2 = std::log(2.0);

  double best = 0.0;
  rng::Stream init_stream(rng::stream_key(0x6d616366u, "sum-capacity"));
  for (int restart = 0; restart < kRestarts; ++restart) {
    std::vector<double> p(nx, 1.0 / static_cast<double>(nx));
    if (restart > 0) {
      double sum = 0.0;
      for (auto& pi : p) {
        pi = -std::log(1.0 - init_stream.next_double());
        sum += pi;
      }
      for (auto& pi : p) pi /= sum;
    }
    std::vector<double> qy(ny), d(nx);
    double lower = 0.0;
    for (int iter = 0; iter < kMaxIter; ++iter) {
      std::fill(qy.begin(), qy.end(), 0.0);
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) qy[y] += p[x] * w[x * ny + y];
      double upper = -kInf;
      lower = 0.0;
      for (std::size_t x = 0; x < nx; ++x) {
        double dx = 0.0;
        for (std::size_t y = 0; y < ny; ++y) {
          const double wy = w[x * ny + y];
          if (wy > 0.0) dx += wy * std::log(wy / qy[y]);
        }
        d[x] = dx;
        lower += p[x] * dx;
        upper = std::max(upper, dx);
      }
      if (upper - lower < kGapTol * ln2) break;
      double z = 0.0;
      for (std::size_t x = 0; x < nx; ++x) {
        p[x] *= std::exp(d[x] - upper);  // shift for stability
        z += p[x];
      }
      for (auto& pi : p) pi /= z;
    }
    best = std::max(best, lower / ln2);
  }
  return best;
}

}  // namespace macfcs
