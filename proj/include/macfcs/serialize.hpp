#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "macfcs/model.hpp"
#include "macfcs/regions.hpp"

namespace macfcs {

// Rounds to `digits` significant decimal digits. All JSON emitted by this
// module carries doubles rounded to 10 significant digits so serialized
// results are byte-stable and round-trip through the loaders.
double round_sig(double v, int digits);

using json = nlohmann::json;

// -- documents (loaders reject unknown fields, naming them) --

// {"x1_card","x2_card","y1_card","y2_card","y3_card","probs"} with probs
// flattened row-major over (x1,x2,y1,y2,y3).
Channel channel_from_json(const json& doc);
json channel_to_json(const Channel& ch);

// {"s1_card","s2_card","probs"} row-major over (s1,s2); optional
// "common":{"d","e","f"} declaring the uniform common-part structure.
SourcePair source_from_json(const json& doc);
json source_to_json(const SourcePair& src);

// {"type":"df","w0_card","w1_card","w2_card","p_w0","p_w1","p_w2","f_x1","f_x2"}
// f_x1/f_x2 row-major over (w0,w1,w2,x). Channel supplies the input alphabets.
DFInput df_input_from_json(const json& doc, const Channel& ch);
json df_input_to_json(const DFInput& in);

// {"type":"cf","u1_card","u2_card","yt1_card","yt2_card","p_u1","p_u2",
//  "f_x1","f_x2","f_yt1","f_yt2"}; f_yt1 row-major over (y1,x1,yt1).
CFInput cf_input_from_json(const json& doc, const Channel& ch);
json cf_input_to_json(const CFInput& in);

// A candidate document is either a bare DF/CF input or any object with a
// "candidate" field holding one (e.g. a serialized search result).
std::variant<DFInput, CFInput> candidate_from_json(const json& doc, const Channel& ch);

// {"vars":[...],"nonneg":bool,"ineqs":[{"label","coeffs":{name:c},"op","rhs"}]}
// where op is one of "<", "<=", ">", ">=" (the loader normalizes to <, <=).
RateConstraintSystem system_from_json(const json& doc);
json system_to_json(const RateConstraintSystem& sys);

json report_to_json(const FeasibilityReport& r);

json source_stats_to_json(const SourceStats& st);

json witness_to_json(const SystemFeasibility& w);

json load_json_file(const std::string& path);

}  // namespace macfcs
