#include "macfcs/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace macfcs {

namespace {

constexpr double kMassTol = 1e-9;
constexpr double kNegMiTol = -1e-12;

std::size_t card_product(std::span<const Variable> vars) {
  std::size_t n = 1;
  for (const auto& v : vars) n *= v.card;
  return n;
}

void check_vars(std::span<const Variable> vars, const char* what) {
  std::set<std::string_view> seen;
  for (const auto& v : vars) {
    if (v.card < 1) throw validation_error(std::string(what) + ": variable '" + v.name + "' has cardinality 0");
    if (!seen.insert(v.name).second)
      throw validation_error(std::string(what) + ": duplicate variable name '" + v.name + "'");
  }
}

// Normalizes one pmf row in place; returns false if it fails validation.
void normalize_row(std::span<double> row, const char* what) {
  double sum = 0.0;
  for (double p : row) {
    if (p < 0.0) throw validation_error(std::string(what) + ": negative probability entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kMassTol)
    throw validation_error(std::string(what) + ": probabilities sum to " + std::to_string(sum) +
                           ", expected 1 within 1e-9");
  for (double& p : row) p /= sum;
}

}  // namespace

Dist::Dist(std::vector<Variable> vars, std::vector<double> probs)
    : vars_(std::move(vars)), probs_(std::move(probs)) {
  check_vars(vars_, "Dist");
  const std::size_t want = card_product(vars_);
  if (probs_.size() != want)
    throw validation_error("Dist: got " + std::to_string(probs_.size()) + " entries, expected " +
                           std::to_string(want));
  normalize_row(probs_, "Dist");
}

bool Dist::has_var(std::string_view name) const {
  return std::any_of(vars_.begin(), vars_.end(), [&](const Variable& v) { return v.name == name; });
}

std::size_t Dist::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return i;
  throw validation_error("unknown variable '" + std::string(name) + "'");
}

Factor::Factor(std::vector<Variable> children, std::vector<Variable> parents,
               std::vector<double> probs)
    : children_(std::move(children)), parents_(std::move(parents)), probs_(std::move(probs)) {
  std::vector<Variable> all(parents_);
  all.insert(all.end(), children_.begin(), children_.end());
  check_vars(all, "Factor");
  if (children_.empty()) throw validation_error("Factor: needs at least one child variable");
  child_block_ = card_product(children_);
  const std::size_t want = child_block_ * card_product(parents_);
  if (probs_.size() != want)
    throw validation_error("Factor: got " + std::to_string(probs_.size()) + " entries, expected " +
                           std::to_string(want));
  for (std::size_t r = 0; r < probs_.size(); r += child_block_)
    normalize_row(std::span<double>(probs_.data() + r, child_block_), "Factor row");
}

Factor Factor::from_dist(const Dist& d) { return Factor(d.vars(), {}, d.probs()); }

Dist chain_product(std::span<const Factor> factors) {
  std::vector<Variable> order;
  std::set<std::string> have;
  for (const auto& f : factors) {
    for (const auto& p : f.parents())
      if (!have.count(p.name))
        throw validation_error("chain_product: dangling parent '" + p.name + "'");
    for (const auto& c : f.children()) {
      if (have.count(c.name))
        throw validation_error("chain_product: variable '" + c.name + "' is a child twice");
      have.insert(c.name);
      order.push_back(c);
    }
  }

  // Per factor, the stride of each joint variable inside the factor's own
  // row-major index (parents..., children...).
  const std::size_t m = order.size();
  std::vector<std::vector<std::size_t>> stride(factors.size(), std::vector<std::size_t>(m, 0));
  for (std::size_t fi = 0; fi < factors.size(); ++fi) {
    const auto& f = factors[fi];
    std::vector<Variable> fvars(f.parents());
    fvars.insert(fvars.end(), f.children().begin(), f.children().end());
    std::size_t s = 1;
    for (std::size_t k = fvars.size(); k-- > 0;) {
      for (std::size_t j = 0; j < m; ++j)
        if (order[j].name == fvars[k].name) stride[fi][j] = s;
      s *= fvars[k].card;
    }
  }

  std::size_t total = 1;
  for (const auto& v : order) total *= v.card;
  std::vector<double> probs(total);
  std::vector<std::size_t> digit(m, 0);
  std::vector<std::size_t> fidx(factors.size(), 0);
  for (std::size_t idx = 0;; ++idx) {
    double p = 1.0;
    for (std::size_t fi = 0; fi < factors.size(); ++fi) p *= factors[fi].probs()[fidx[fi]];
    probs[idx] = p;
    if (idx + 1 == total) break;
    // odometer increment, keeping each factor's flat index in sync
    for (std::size_t j = m; j-- > 0;) {
      ++digit[j];
      for (std::size_t fi = 0; fi < factors.size(); ++fi) fidx[fi] += stride[fi][j];
      if (digit[j] < order[j].card) break;
      for (std::size_t fi = 0; fi < factors.size(); ++fi)
        fidx[fi] -= stride[fi][j] * order[j].card;
      digit[j] = 0;
    }
  }
  return Dist(std::move(order), std::move(probs));
}

Dist marginalize(const Dist& d, std::span<const std::string> keep) {
  const auto& vars = d.vars();
  std::vector<std::size_t> pos;
  pos.reserve(keep.size());
  std::vector<Variable> kept;
  for (const auto& name : keep) {
    pos.push_back(d.index_of(name));
    kept.push_back(vars[pos.back()]);
  }
  check_vars(kept, "marginalize");

  // stride of each source variable in the output index (0 if summed out)
  std::vector<std::size_t> out_stride(vars.size(), 0);
  std::size_t s = 1;
  for (std::size_t k = pos.size(); k-- > 0;) {
    out_stride[pos[k]] = s;
    s *= vars[pos[k]].card;
  }

  std::vector<double> out(s, 0.0);
  std::vector<std::size_t> digit(vars.size(), 0);
  std::size_t oidx = 0;
  const auto& probs = d.probs();
  for (std::size_t idx = 0;; ++idx) {
    out[oidx] += probs[idx];
    if (idx + 1 == probs.size()) break;
    for (std::size_t j = vars.size(); j-- > 0;) {
      ++digit[j];
      oidx += out_stride[j];
      if (digit[j] < vars[j].card) break;
      oidx -= out_stride[j] * vars[j].card;
      digit[j] = 0;
    }
  }
  return Dist(std::move(kept), std::move(out));
}

double entropy(const Dist& d, std::span<const std::string> subset) {
  if (subset.empty()) return 0.0;
  bool whole_in_order = subset.size() == d.vars().size();
  if (whole_in_order)
    for (std::size_t i = 0; i < subset.size(); ++i)
      if (d.vars()[i].name != subset[i]) {
        whole_in_order = false;
        break;
      }
  auto h_of = [](const std::vector<double>& probs) {
    double h = 0.0;
    for (double p : probs)
      if (p > 0.0) h -= p * std::log2(p);
    return h;
  };
  return whole_in_order ? h_of(d.probs()) : h_of(marginalize(d, subset).probs());
}

double cond_mutual_info(const Dist& d, std::span<const std::string> a,
                        std::span<const std::string> b,
                        std::span<const std::string> c) {
  std::set<std::string> seen;
  auto check_disjoint = [&](std::span<const std::string> names) {
    for (const auto& n : names) {
      (void)d.index_of(n);
      if (!seen.insert(n).second)
        throw validation_error("cond_mutual_info: subsets overlap at '" + n + "'");
    }
  };
  check_disjoint(a);
  check_disjoint(b);
  check_disjoint(c);

  std::vector<std::string> ac(a.begin(), a.end());
  ac.insert(ac.end(), c.begin(), c.end());
  std::vector<std::string> bc(b.begin(), b.end());
  bc.insert(bc.end(), c.begin(), c.end());
  std::vector<std::string> abc(a.begin(), a.end());
  abc.insert(abc.end(), b.begin(), b.end());
  abc.insert(abc.end(), c.begin(), c.end());

  const double hc = c.empty() ? 0.0 : entropy(d, c);
  double mi = entropy(d, ac) + entropy(d, bc) - entropy(d, abc) - hc;
  if (mi < 0.0) {
    if (mi < kNegMiTol)
      throw std::logic_error("cond_mutual_info: negative value " + std::to_string(mi) +
                             " beyond roundoff");
    mi = 0.0;
  }
  return mi;
}

double total_variation(const Dist& d1, const Dist& d2) {
  if (d1.vars() != d2.vars())
    throw validation_error("total_variation: distributions have different variables");
  double s = 0.0;
  for (std::size_t i = 0; i < d1.size(); ++i) s += std::abs(d1.probs()[i] - d2.probs()[i]);
  return 0.5 * s;
}

Dist tensor_product(const Dist& d1, const Dist& d2) {
  std::vector<Variable> vars(d1.vars());
  vars.insert(vars.end(), d2.vars().begin(), d2.vars().end());
  std::vector<double> probs;
  probs.reserve(d1.size() * d2.size());
  for (double p : d1.probs())
    for (double q : d2.probs()) probs.push_back(p * q);
  return Dist(std::move(vars), std::move(probs));
}

}  // namespace macfcs
