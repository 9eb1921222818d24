#include "gietlab/io.hpp"

#include <cstdio>
#include <sstream>

namespace gietlab::io {

std::string decimal(const BigInt& v) { return v.str(); }
std::string decimal(const Real& v) { return to_decimal(v); }
std::string decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

namespace {

Real real_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string())
    throw Error(ErrorCode::ConfigError, std::string("expected decimal string field '") + key + "'");
  return from_decimal<Real>(j[key].get<std::string>());
}

std::vector<int> int_list(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    throw Error(ErrorCode::ConfigError, std::string("expected integer array '") + key + "'");
  std::vector<int> out;
  for (const auto& v : j[key]) {
    if (!v.is_number_integer()) throw Error(ErrorCode::ConfigError, std::string("non-integer in '") + key + "'");
    out.push_back(v.get<int>());
  }
  return out;
}

Vector<Real> real_list(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    throw Error(ErrorCode::ConfigError, std::string("expected decimal string array '") + key + "'");
  Vector<Real> out(static_cast<Eigen::Index>(j[key].size()));
  Eigen::Index i = 0;
  for (const auto& v : j[key]) {
    if (!v.is_string()) throw Error(ErrorCode::ConfigError, std::string("'") + key + "' entries must be strings");
    out[i++] = from_decimal<Real>(v.get<std::string>());
  }
  return out;
}

const char* winner_name(Winner w) { return w == Winner::Top ? "top" : "bottom"; }

}  // namespace

json node_to_json(const Node<Real>& node) {
  json j;
  switch (node.kind) {
    case NodeKind::Affine:
      j["family"] = "affine";
      j["slope"] = decimal(node.a);
      j["offset"] = decimal(node.b);
      break;
    case NodeKind::Sine:
      j["family"] = "sine";
      j["amplitude"] = decimal(node.a);
      j["frequency"] = node.frequency;
      break;
    case NodeKind::Quadratic:
      j["family"] = "quadratic";
      j["coefficient"] = decimal(node.a);
      break;
  }
  j["inverse"] = node.inverse;
  return j;
}

Node<Real> node_from_json(const json& j) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
    throw Error(ErrorCode::ConfigError, "node descriptor needs a 'family'");
  const auto family = j["family"].get<std::string>();
  Node<Real> node;
  if (family == "affine") {
    node = Node<Real>::affine(real_field(j, "slope"), real_field(j, "offset"));
  } else if (family == "sine") {
    int n = j.value("frequency", 1);
    if (n < 1) throw Error(ErrorCode::ConfigError, "sine frequency must be positive");
    node = Node<Real>::sine(real_field(j, "amplitude"), n);
  } else if (family == "quadratic") {
    node = Node<Real>::quadratic(real_field(j, "coefficient"));
  } else {
    throw Error(ErrorCode::ConfigError, "unknown node family '" + family + "'");
  }
  if (j.value("inverse", false)) node = node.inverted();
  return node;
}

json chain_to_json(const Chain<Real>& chain) {
  json out = json::array();
  for (const auto& n : chain.nodes()) out.push_back(node_to_json(n));
  return out;
}

Chain<Real> chain_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ConfigError, "profile entry must be an array of nodes");
  std::vector<Node<Real>> nodes;
  for (const auto& n : j) nodes.push_back(node_from_json(n));
  return Chain<Real>(nodes);
}

json giet_to_json(const Giet<Real>& T) {
  json j;
  j["format"] = kGietFormat;
  std::vector<int> top, bottom;
  for (int p = 0; p < T.d(); ++p) {
    top.push_back(T.combinatorics().top(p) + 1);
    bottom.push_back(T.combinatorics().bottom(p) + 1);
  }
  j["combinatorics"] = {{"top", top}, {"bottom", bottom}};
  auto lambda = T.lambda_top();
  auto rho = T.log_slopes();
  json lj = json::array(), rj = json::array(), pj = json::array();
  for (int i = 0; i < T.d(); ++i) {
    lj.push_back(decimal(lambda[i]));
    rj.push_back(decimal(rho[i]));
    pj.push_back(chain_to_json(T.profile(i)));
  }
  j["lambda_top"] = lj;
  j["log_slopes"] = rj;
  j["profile"] = pj;
  j["precision_bits"] = T.precision_bits();
  return j;
}

int document_precision(const json& j, int fallback) {
  if (j.contains("precision_bits") && j["precision_bits"].is_number_integer())
    return j["precision_bits"].get<int>();
  return fallback;
}

Giet<Real> giet_from_json(const json& j, int precision_bits) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "GIET document must be an object");
  if (j.contains("format") && j["format"] != kGietFormat)
    throw Error(ErrorCode::ConfigError, "unsupported GIET format");
  if (!j.contains("combinatorics")) throw Error(ErrorCode::ConfigError, "missing 'combinatorics'");
  auto top = int_list(j["combinatorics"], "top");
  auto bottom = int_list(j["combinatorics"], "bottom");
  auto pi = validate_combinatorics_one_based(top, bottom);
  const int d = pi.d();
  auto lambda = real_list(j, "lambda_top");
  Vector<Real> rho = Vector<Real>::Zero(d);
  if (j.contains("log_slopes")) rho = real_list(j, "log_slopes");
  if (lambda.size() != d || rho.size() != d)
    throw Error(ErrorCode::ConfigError, "length vectors must have d entries");
  std::vector<Chain<Real>> profiles(d);
  if (j.contains("profile")) {
    if (!j["profile"].is_array() || static_cast<int>(j["profile"].size()) != d)
      throw Error(ErrorCode::ConfigError, "'profile' must hold d node lists");
    for (int i = 0; i < d; ++i) profiles[i] = chain_from_json(j["profile"][i]);
  }
  return Giet<Real>::from_shape_profile(pi, lambda, rho, std::move(profiles), precision_bits);
}

json induction_record_json(const InductionChain<Real>& chain, int k) {
  const auto& rec = chain.record(k);
  json j;
  j["k"] = k;
  j["n_k"] = chain.rv_time(k + 1);
  json rows = json::array();
  for (Eigen::Index r = 0; r < rec.matrix.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < rec.matrix.cols(); ++c) row.push_back(decimal(rec.matrix(r, c)));
    rows.push_back(row);
  }
  j["A_k"] = rows;
  j["lambda_norm"] = decimal(chain.inducing_length(k + 1));
  json winners = json::array();
  for (auto w : rec.winners) winners.push_back(winner_name(w));
  j["winner_history"] = winners;
  return j;
}

std::string induction_log(const InductionChain<Real>& chain) {
  std::string out;
  for (int k = 0; k < chain.depth(); ++k) out += induction_record_json(chain, k).dump() + "\n";
  return out;
}

std::string partition_csv(const DynamicalPartition<Real>& partition) {
  std::ostringstream os;
  os << "level,tower,height,left,right\n";
  for (const auto& f : partition.floors)
    os << partition.level << ',' << f.tower + 1 << ',' << f.height << ',' << decimal(f.left) << ','
       << decimal(f.right) << '\n';
  return os.str();
}

std::string decay_csv(const std::vector<DecayRow>& rows, int towers) {
  std::ostringstream os;
  os << "k,sup_norm_fk";
  for (int j = 0; j < towers; ++j) os << ",broken_sup_" << j + 1;
  os << ",bound\n";
  for (const auto& r : rows) {
    os << r.k << ',' << decimal(to_double(r.sup_norm));
    for (int j = 0; j < towers; ++j)
      os << ',' << (j < static_cast<int>(r.broken.size()) ? decimal(to_double(r.broken[j])) : "");
    os << ',' << decimal(to_double(r.bound)) << '\n';
  }
  return os.str();
}

json regularity_json(const RegularityReport<Real>& r) {
  json j;
  j["format"] = kRegularityFormat;
  j["lambda1"] = r.lambda1;
  j["lambda2"] = r.lambda2;
  j["alpha"] = r.alpha ? json(*r.alpha) : json(nullptr);
  j["length_constant"] = r.length_constant;
  j["variation_constant"] = r.variation_constant;
  j["holder_constant"] = r.holder_constant;
  j["decay_constant"] = r.decay_constant;
  j["decay_rate"] = r.decay_rate;
  j["quantitative_distance"] = r.quantitative_distance;
  j["flags"] = {{"affine_degenerate", r.affine_degenerate},
                {"lambda_order_violation", r.lambda_order_violation},
                {"insufficient_decay", r.insufficient_decay},
                {"insufficient_levels", r.insufficient_levels},
                {"lambda2_below_one", r.lambda2 > 0 && r.lambda2 < 1}};
  json pairs = json::array();
  long used = 0;
  for (const auto& p : r.per_pair) {
    json e;
    e["k0"] = p.k0;
    e["dx"] = to_double(p.dx);
    e["dphi"] = to_double(p.dphi);
    e["covering"] = p.covering == Covering::OneFloor ? "one" : "two";
    if (!p.skipped.empty()) e["skipped"] = p.skipped;
    else ++used;
    pairs.push_back(e);
  }
  j["pairs_used"] = used;
  j["per_pair"] = pairs;
  json lb = json::array();
  for (const auto& b : r.length_bounds)
    lb.push_back({{"level", b.level}, {"min_floor", b.min_floor}, {"bound", b.bound}});
  j["length_bounds"] = lb;
  return j;
}

std::string regularity_csv(const RegularityReport<Real>& r) {
  std::ostringstream os;
  os << "index,k0,covering,dx,dphi,skipped\n";
  for (std::size_t i = 0; i < r.per_pair.size(); ++i) {
    const auto& p = r.per_pair[i];
    os << i << ',' << p.k0 << ',' << (p.covering == Covering::OneFloor ? "one" : "two") << ','
       << decimal(to_double(p.dx)) << ',' << decimal(to_double(p.dphi)) << ','
       << (p.skipped.empty() ? "" : "\"" + p.skipped + "\"") << '\n';
  }
  return os.str();
}

json tpg_json(const TpgReport& r) {
  json j;
  j["format"] = kTpgFormat;
  j["steps_requested"] = r.steps_requested;
  j["steps_probed"] = r.steps_probed;
  j["truncated"] = r.truncated;
  if (r.truncated) j["truncation"] = r.truncation;
  j["positivity"] = {{"all_positive", r.all_positive},
                     {"first_failure", r.first_non_positive < 0 ? json(nullptr) : json(r.first_non_positive)}};
  auto fit_json = [](const std::optional<LineFit>& f) {
    if (!f) return json(nullptr);
    return json{{"slope", f->slope}, {"intercept", f->intercept}, {"r2", f->r2}, {"points", f->points}};
  };
  j["subexp_fit"] = fit_json(r.step_fit);
  j["product_fit"] = fit_json(r.product_fit);
  j["rho_hat"] = r.rho_hat;
  j["K_hat"] = r.k_hat;
  j["K_low"] = r.k_low;
  j["flags"] = {{"subexponential", r.subexponential},
                {"exponential", r.exponential},
                {"submultiplicative", r.submultiplicative}};
  json steps = json::array();
  for (const auto& s : r.steps)
    steps.push_back({{"k", s.k},
                     {"step_norm", decimal(s.step_norm)},
                     {"product_norm", decimal(s.product_norm)},
                     {"positive", s.positive},
                     {"rv_steps", s.rv_steps}});
  j["steps"] = steps;
  return j;
}

std::string tpg_csv(const TpgReport& r) {
  std::ostringstream os;
  os << "k,step_norm,product_norm\n";
  for (const auto& s : r.steps) os << s.k << ',' << decimal(s.step_norm) << ',' << decimal(s.product_norm) << '\n';
  return os.str();
}

json error_json(const Error& e) {
  json j;
  j["error"] = std::string(error_name(e.code()));
  j["message"] = e.what();
  if (e.detail() >= 0) j["detail"] = e.detail();
  j["exit_status"] = exit_status(e.code());
  return j;
}

}  // namespace gietlab::io
