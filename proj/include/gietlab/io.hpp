#pragma once

#include "gietlab/diophantine.hpp"
#include "gietlab/errors.hpp"
#include "gietlab/regularity.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace gietlab::io {

using nlohmann::json;

inline constexpr const char* kGietFormat = "gietlab.giet/1";
inline constexpr const char* kInductionFormat = "gietlab.induction/1";
inline constexpr const char* kRegularityFormat = "gietlab.regularity/1";
inline constexpr const char* kTpgFormat = "gietlab.tpg/1";

// Node descriptors: {"family": "affine"|"sine"|"quadratic", parameters as
// decimal strings, "inverse": bool}.
json node_to_json(const Node<Real>& node);
Node<Real> node_from_json(const json& j);
json chain_to_json(const Chain<Real>& chain);
Chain<Real> chain_from_json(const json& j);

// Shape-profile document with 1-based labels. Reading expects the working
// precision to be set already; `precision_bits` in the document is returned
// by document_precision.
json giet_to_json(const Giet<Real>& T);
Giet<Real> giet_from_json(const json& j, int precision_bits);
int document_precision(const json& j, int fallback);

// One JSON object per acceleration step, newline separated.
std::string induction_log(const InductionChain<Real>& chain);
json induction_record_json(const InductionChain<Real>& chain, int k);

std::string partition_csv(const DynamicalPartition<Real>& partition);

struct DecayRow {
  int k;
  Real sup_norm;
  std::vector<Real> broken;  // per tower
  Real bound;
};
std::string decay_csv(const std::vector<DecayRow>& rows, int towers);

json regularity_json(const RegularityReport<Real>& report);
std::string regularity_csv(const RegularityReport<Real>& report);

json tpg_json(const TpgReport& report);
std::string tpg_csv(const TpgReport& report);

json error_json(const Error& e);

// Integers and reals as strings, doubles rendered with 17 significant digits.
std::string decimal(const BigInt& v);
std::string decimal(const Real& v);
std::string decimal(double v);

// Text with a trailing newline.
std::string dump(const json& j);

}  // namespace gietlab::io
