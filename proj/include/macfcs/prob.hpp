#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace macfcs {

// Thrown for invalid constructions and bad arguments (negative probabilities,
// mass not summing to one, unknown variable names, shape mismatches).
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A named finite-alphabet random variable. Symbols are 0..card-1.
struct Variable {
  std::string name;
  std::size_t card = 0;

  friend bool operator==(const Variable&, const Variable&) = default;
};

// Dense joint pmf over an ordered list of variables, row-major (the last
// variable varies fastest). Immutable after construction; construction
// validates nonnegativity and total mass within 1e-9 of one, then
// renormalizes by the exact sum so downstream sums are exact.
class Dist {
 public:
  Dist(std::vector<Variable> vars, std::vector<double> probs);

  const std::vector<Variable>& vars() const { return vars_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }

  bool has_var(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws validation_error

 private:
  std::vector<Variable> vars_;
  std::vector<double> probs_;
};

// Conditional pmf of `children` given `parents`, stored row-major over
// (parents..., children...): each parent assignment owns one child row.
// Each row must sum to one within 1e-9; rows are renormalized exactly.
// `parents` may be empty, in which case the factor is an unconditioned pmf.
class Factor {
 public:
  Factor(std::vector<Variable> children, std::vector<Variable> parents,
         std::vector<double> probs);

  static Factor from_dist(const Dist& d);

  const std::vector<Variable>& children() const { return children_; }
  const std::vector<Variable>& parents() const { return parents_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t child_block() const { return child_block_; }
  std::size_t rows() const { return child_block_ == 0 ? 0 : probs_.size() / child_block_; }

  // probs()[row * child_block() + child_index]
  double value(std::size_t row, std::size_t child_index) const {
    return probs_[row * child_block_ + child_index];
  }

 private:
  std::vector<Variable> children_;
  std::vector<Variable> parents_;
  std::vector<double> probs_;
  std::size_t child_block_ = 0;
};

// Joint from a factorization. Every factor's parents must already appear as
// children of earlier factors, and no variable may be a child twice. The
// result ranges over all children in order of first appearance, with
// p(outcome) equal to the product of factor values.
Dist chain_product(std::span<const Factor> factors);

// Marginal over `keep` (in the order given), summing out the rest.
Dist marginalize(const Dist& d, std::span<const std::string> keep);

// Shannon entropy of the marginal on `subset`, in bits. 0 log 0 = 0.
double entropy(const Dist& d, std::span<const std::string> subset);

// I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C), in bits. C may be empty.
// Tiny negative results (>= -1e-12) are clamped to zero; anything more
// negative signals an internal inconsistency and throws std::logic_error.
double cond_mutual_info(const Dist& d, std::span<const std::string> a,
                        std::span<const std::string> b,
                        std::span<const std::string> c);

// Total variation distance (1/2) sum |p1 - p2|; requires identical variable
// lists and cardinalities.
double total_variation(const Dist& d1, const Dist& d2);

// Product joint p1 x p2 over disjoint variable sets, p1's variables first.
Dist tensor_product(const Dist& d1, const Dist& d2);

// Convenience overloads for brace-init call sites.
inline Dist marginalize(const Dist& d, std::initializer_list<std::string> keep) {
  std::vector<std::string> k(keep);
  return marginalize(d, std::span<const std::string>(k));
}
inline double entropy(const Dist& d, std::initializer_list<std::string> subset) {
  std::vector<std::string> s(subset);
  return entropy(d, std::span<const std::string>(s));
}
inline double cond_mutual_info(const Dist& d, std::initializer_list<std::string> a,
                               std::initializer_list<std::string> b,
                               std::initializer_list<std::string> c) {
  std::vector<std::string> av(a), bv(b), cv(c);
  return cond_mutual_info(d, std::span<const std::string>(av),
                          std::span<const std::string>(bv),
                          std::span<const std::string>(cv));
}

}  // namespace macfcs
