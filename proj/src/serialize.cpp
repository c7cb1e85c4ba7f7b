#include "macfcs/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace macfcs {

double round_sig(double v, int digits) {
  if (!std::isfinite(v)) return v;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

namespace {

json num(double v) { return json(round_sig(v, 10)); }

void reject_unknown(const json& doc, std::initializer_list<const char*> allowed,
                    const char* what) {
  if (!doc.is_object()) throw validation_error(std::string(what) + ": expected a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  std::string unknown;
  for (const auto& [key, _] : doc.items())
    if (!ok.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  if (!unknown.empty())
    throw validation_error(std::string(what) + ": unknown field(s): " + unknown);
}

std::size_t get_card(const json& doc, const char* key, const char* what) {
  if (!doc.contains(key))
    throw validation_error(std::string(what) + ": missing field '" + key + "'");
  const auto& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw validation_error(std::string(what) + ": field '" + key + "' must be a positive integer");
  return v.get<std::size_t>();
}

std::vector<double> get_probs(const json& doc, const char* key, const char* what) {
  if (!doc.contains(key))
    throw validation_error(std::string(what) + ": missing field '" + key + "'");
  const auto& v = doc.at(key);
  if (!v.is_array()) throw validation_error(std::string(what) + ": field '" + key + "' must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) throw validation_error(std::string(what) + ": non-numeric entry in '" + key + "'");
    out.push_back(x.get<double>());
  }
  return out;
}

json probs_json(const std::vector<double>& p) {
  json a = json::array();
  for (double v : p) a.push_back(num(v));
  return a;
}

}  // namespace

Channel channel_from_json(const json& doc) {
  reject_unknown(doc, {"x1_card", "x2_card", "y1_card", "y2_card", "y3_card", "probs"}, "channel");
  const auto x1 = get_card(doc, "x1_card", "channel");
  const auto x2 = get_card(doc, "x2_card", "channel");
  const auto y1 = get_card(doc, "y1_card", "channel");
  const auto y2 = get_card(doc, "y2_card", "channel");
  const auto y3 = get_card(doc, "y3_card", "channel");
  return Channel::make(x1, x2, y1, y2, y3, get_probs(doc, "probs", "channel"));
}

json channel_to_json(const Channel& ch) {
  return json{{"x1_card", ch.x1_card}, {"x2_card", ch.x2_card}, {"y1_card", ch.y1_card},
              {"y2_card", ch.y2_card}, {"y3_card", ch.y3_card}, {"probs", probs_json(ch.law.probs())}};
}

SourcePair source_from_json(const json& doc) {
  reject_unknown(doc, {"s1_card", "s2_card", "probs", "common"}, "source");
  const auto s1 = get_card(doc, "s1_card", "source");
  const auto s2 = get_card(doc, "s2_card", "source");
  auto src = SourcePair::make(s1, s2, get_probs(doc, "probs", "source"));
  if (doc.contains("common")) {
    const auto& c = doc.at("common");
    reject_unknown(c, {"d", "e", "f"}, "source.common");
    CommonPartShape shape{get_card(c, "d", "source.common"), get_card(c, "e", "source.common"),
                          get_card(c, "f", "source.common")};
    auto ref = make_common_part_source(shape.d, shape.e, shape.f);
    if (ref.s1_card != src.s1_card || ref.s2_card != src.s2_card)
      throw validation_error("source: common part shape does not match the alphabets");
    for (std::size_t i = 0; i < ref.joint.size(); ++i)
      if (std::abs(ref.joint.probs()[i] - src.joint.probs()[i]) > 1e-9)
        throw validation_error("source: joint does not match the declared common part structure");
    src.common = shape;
  }
  return src;
}

json source_to_json(const SourcePair& src) {
  json doc{{"s1_card", src.s1_card}, {"s2_card", src.s2_card}, {"probs", probs_json(src.joint.probs())}};
  if (src.common)
    doc["common"] = json{{"d", src.common->d}, {"e", src.common->e}, {"f", src.common->f}};
  return doc;
}

namespace {

// length must be rows * card for some positive card; returns card
std::size_t infer_card(std::size_t len, std::size_t rows, const char* name) {
  if (rows == 0 || len == 0 || len % rows != 0)
    throw validation_error(std::string("candidate: '") + name + "' has length " +
                           std::to_string(len) + ", not a multiple of its " +
                           std::to_string(rows) + " parent rows");
  return len / rows;
}

}  // namespace

DFInput df_input_from_json(const json& doc, const Channel& ch) {
  reject_unknown(doc, {"type", "w0_card", "w1_card", "w2_card", "p_w0", "p_w1", "p_w2", "f_x1", "f_x2"},
                 "df candidate");
  const auto w0 = get_card(doc, "w0_card", "df candidate");
  const auto w1 = get_card(doc, "w1_card", "df candidate");
  const auto w2 = get_card(doc, "w2_card", "df candidate");
  auto fx1 = get_probs(doc, "f_x1", "df candidate");
  auto fx2 = get_probs(doc, "f_x2", "df candidate");
  const std::size_t rows = w0 * w1 * w2;
  const std::size_t x1c = infer_card(fx1.size(), rows, "f_x1");
  const std::size_t x2c = infer_card(fx2.size(), rows, "f_x2");
  if (x1c != ch.x1_card)
    throw validation_error("df candidate: f_x1 implies x1 alphabet " + std::to_string(x1c) +
                           ", channel has " + std::to_string(ch.x1_card));
  if (x2c != ch.x2_card)
    throw validation_error("df candidate: f_x2 implies x2 alphabet " + std::to_string(x2c) +
                           ", channel has " + std::to_string(ch.x2_card));
  return DFInput::make(w0, w1, w2, get_probs(doc, "p_w0", "df candidate"),
                       get_probs(doc, "p_w1", "df candidate"), get_probs(doc, "p_w2", "df candidate"),
                       std::move(fx1), std::move(fx2), x1c, x2c);
}

json df_input_to_json(const DFInput& in) {
  return json{{"type", "df"},
              {"w0_card", in.w0_card},
              {"w1_card", in.w1_card},
              {"w2_card", in.w2_card},
              {"p_w0", probs_json(in.p_w0.probs())},
              {"p_w1", probs_json(in.p_w1.probs())},
              {"p_w2", probs_json(in.p_w2.probs())},
              {"f_x1", probs_json(in.f_x1.probs())},
              {"f_x2", probs_json(in.f_x2.probs())}};
}

CFInput cf_input_from_json(const json& doc, const Channel& ch) {
  reject_unknown(doc,
                 {"type", "u1_card", "u2_card", "yt1_card", "yt2_card", "p_u1", "p_u2", "f_x1",
                  "f_x2", "f_yt1", "f_yt2"},
                 "cf candidate");
  const auto u1 = get_card(doc, "u1_card", "cf candidate");
  const auto u2 = get_card(doc, "u2_card", "cf candidate");
  const auto yt1 = get_card(doc, "yt1_card", "cf candidate");
  const auto yt2 = get_card(doc, "yt2_card", "cf candidate");
  auto fx1 = get_probs(doc, "f_x1", "cf candidate");
  auto fx2 = get_probs(doc, "f_x2", "cf candidate");
  auto fyt1 = get_probs(doc, "f_yt1", "cf candidate");
  auto fyt2 = get_probs(doc, "f_yt2", "cf candidate");
  const std::size_t x1c = infer_card(fx1.size(), u1, "f_x1");
  const std::size_t x2c = infer_card(fx2.size(), u2, "f_x2");
  if (x1c != ch.x1_card)
    throw validation_error("cf candidate: f_x1 implies x1 alphabet " + std::to_string(x1c) +
                           ", channel has " + std::to_string(ch.x1_card));
  if (x2c != ch.x2_card)
    throw validation_error("cf candidate: f_x2 implies x2 alphabet " + std::to_string(x2c) +
                           ", channel has " + std::to_string(ch.x2_card));
  if (fyt1.size() != ch.y1_card * x1c * yt1)
    throw validation_error("cf candidate: f_yt1 has length " + std::to_string(fyt1.size()) +
                           ", expected y1_card*x1_card*yt1_card = " +
                           std::to_string(ch.y1_card * x1c * yt1));
  if (fyt2.size() != ch.y2_card * x2c * yt2)
    throw validation_error("cf candidate: f_yt2 has length " + std::to_string(fyt2.size()) +
                           ", expected y2_card*x2_card*yt2_card = " +
                           std::to_string(ch.y2_card * x2c * yt2));
  return CFInput::make(u1, u2, yt1, yt2, get_probs(doc, "p_u1", "cf candidate"),
                       get_probs(doc, "p_u2", "cf candidate"), std::move(fx1), std::move(fx2),
                       std::move(fyt1), std::move(fyt2), x1c, x2c, ch.y1_card, ch.y2_card);
}

json cf_input_to_json(const CFInput& in) {
  return json{{"type", "cf"},
              {"u1_card", in.u1_card},
              {"u2_card", in.u2_card},
              {"yt1_card", in.yt1_card},
              {"yt2_card", in.yt2_card},
              {"p_u1", probs_json(in.p_u1.probs())},
              {"p_u2", probs_json(in.p_u2.probs())},
              {"f_x1", probs_json(in.f_x1.probs())},
              {"f_x2", probs_json(in.f_x2.probs())},
              {"f_yt1", probs_json(in.f_yt1.probs())},
              {"f_yt2", probs_json(in.f_yt2.probs())}};
}

std::variant<DFInput, CFInput> candidate_from_json(const json& doc, const Channel& ch) {
  const json* body = &doc;
  if (doc.is_object() && doc.contains("candidate")) body = &doc.at("candidate");
  if (!body->is_object() || !body->contains("type"))
    throw validation_error("candidate: missing 'type' field (\"df\" or \"cf\")");
  const std::string type = body->at("type").get<std::string>();
  if (type == "df") return df_input_from_json(*body, ch);
  if (type == "cf") return cf_input_from_json(*body, ch);
  throw validation_error("candidate: unknown type '" + type + "'");
}

RateConstraintSystem system_from_json(const json& doc) {
  reject_unknown(doc, {"vars", "nonneg", "ineqs"}, "system");
  RateConstraintSystem sys;
  if (!doc.contains("vars") || !doc.at("vars").is_array())
    throw validation_error("system: missing 'vars' array");
  for (const auto& v : doc.at("vars")) sys.vars.push_back(v.get<std::string>());
  sys.nonneg = doc.value("nonneg", true);
  if (!doc.contains("ineqs") || !doc.at("ineqs").is_array())
    throw validation_error("system: missing 'ineqs' array");
  std::set<std::string> labels;
  std::size_t auto_label = 0;
  for (const auto& iq : doc.at("ineqs")) {
    reject_unknown(iq, {"label", "coeffs", "op", "rhs"}, "system inequality");
    LinIneq q;
    q.label = iq.contains("label") ? iq.at("label").get<std::string>()
                                   : "i" + std::to_string(auto_label);
    ++auto_label;
    if (!labels.insert(q.label).second)
      throw validation_error("system: duplicate inequality label '" + q.label + "'");
    if (!iq.contains("coeffs") || !iq.at("coeffs").is_object())
      throw validation_error("system: inequality '" + q.label + "' missing 'coeffs' object");
    for (const auto& [name, c] : iq.at("coeffs").items()) {
      if (std::find(sys.vars.begin(), sys.vars.end(), name) == sys.vars.end())
        throw validation_error("system: inequality '" + q.label + "' uses undeclared variable '" +
                               name + "'");
      q.coeffs[name] = c.get<double>();
    }
    if (!iq.contains("rhs") || !iq.at("rhs").is_number())
      throw validation_error("system: inequality '" + q.label + "' missing numeric 'rhs'");
    q.rhs = iq.at("rhs").get<double>();
    const std::string op = iq.value("op", "<=");
    if (op == "<") {
      q.strict = true;
    } else if (op == "<=") {
      q.strict = false;
    } else if (op == ">" || op == ">=") {
      q.strict = (op == ">");
      for (auto& [_, c] : q.coeffs) c = -c;
      q.rhs = -q.rhs;
    } else {
      throw validation_error("system: inequality '" + q.label + "' has unknown op '" + op + "'");
    }
    sys.ineqs.push_back(std::move(q));
  }
  return sys;
}

json system_to_json(const RateConstraintSystem& sys) {
  json ineqs = json::array();
  for (const auto& q : sys.ineqs) {
    json coeffs = json::object();
    for (const auto& [name, c] : q.coeffs) coeffs[name] = num(c);
    ineqs.push_back(json{{"label", q.label},
                         {"coeffs", std::move(coeffs)},
                         {"op", q.strict ? "<" : "<="},
                         {"rhs", num(q.rhs)}});
  }
  return json{{"vars", sys.vars}, {"nonneg", sys.nonneg}, {"ineqs", std::move(ineqs)}};
}

json report_to_json(const FeasibilityReport& r) {
  json cs = json::array();
  for (const auto& c : r.constraints)
    cs.push_back(json{{"label", c.label},
                      {"lhs", num(c.lhs)},
                      {"rhs", num(c.rhs)},
                      {"margin", num(c.margin)},
                      {"satisfied", c.satisfied},
                      {"vacuous", c.vacuous}});
  json doc{{"constraints", std::move(cs)}, {"feasible", r.feasible}};
  doc["min_margin"] = std::isfinite(r.min_margin) ? num(r.min_margin) : json(nullptr);
  if (r.indep_tv) {
    doc["indep_tv"] = num(*r.indep_tv);
    doc["indep_tol"] = num(*r.indep_tol);
    doc["indep_ok"] = r.indep_ok;
  }
  return doc;
}

json source_stats_to_json(const SourceStats& st) {
  return json{{"h_s1", num(st.h_s1)},
              {"h_s2", num(st.h_s2)},
              {"h_s1_given_s2", num(st.h_s1_given_s2)},
              {"h_s2_given_s1", num(st.h_s2_given_s1)},
              {"h_joint", num(st.h_joint)},
              {"i_s1_s2", num(st.i_s1_s2)}};
}

json witness_to_json(const SystemFeasibility& w) {
  json doc{{"feasible", w.feasible}};
  json wit = json::object();
  for (const auto& [name, v] : w.witness) wit[name] = num(v);
  doc["witness"] = std::move(wit);
  return doc;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw validation_error("invalid JSON in " + path + ": " + e.what());
  }
  return doc;
}

}  // namespace macfcs
