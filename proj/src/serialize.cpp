#include "mixident/serialize.hpp"

#include <cmath>
#include <algorithm>
#include <cstdio>

namespace mixident::io {

namespace {

void write_real(std::string& out, double x) {
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
  // Keep reals recognizable as reals after a round trip.
  if (std::string_view(buf).find_first_of(".eE") == std::string_view::npos) out += ".0";
}

void newline(std::string& out, int indent, int depth) {
  if (indent < 0) return;
  out += '\n';
  out.append(static_cast<std::size_t>(indent * depth), ' ');
}

void write(std::string& out, const Json& j, int indent, int depth) {
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(out, indent, depth + 1);
        out += Json(key).dump();
        out += indent < 0 ? ":" : ": ";
        write(out, value, indent, depth + 1);
      }
      newline(out, indent, depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(out, indent, depth + 1);
        write(out, e, indent, depth + 1);
      }
      if (!flat) newline(out, indent, depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      write_real(out, j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

Json real(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

template <class T>
Json optional_int(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    fail(ErrorCode::ParseError, std::string("missing field \"") + key + "\"");
  return j.at(key);
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("field \"") + key + "\": " + e.what());
  }
}

}  // namespace

std::string dump(const Json& j, int indent) {
  std::string out;
  write(out, j, indent, 0);
  if (indent >= 0) out += '\n';
  return out;
}

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, e.what());
  }
}

Json to_json(const Mixture& p) {
  Json comps = Json::array();
  for (const auto& c : p.components()) comps.push_back(std::vector<double>(c.probs().begin(), c.probs().end()));
  return Json{{"d", p.dim()},
              {"weights", std::vector<double>(p.weights().begin(), p.weights().end())},
              {"components", std::move(comps)}};
}

Json to_json(const GroupedDataset& data) {
  Json groups = Json::array();
  for (std::size_t g = 0; g < data.groups(); ++g) {
    const auto grp = data.group(g);
    groups.push_back(std::vector<std::uint32_t>(grp.begin(), grp.end()));
  }
  return Json{{"n", data.group_size()}, {"d", data.dim()}, {"groups", std::move(groups)}};
}

Json to_json(const MomentTensor& t) {
  return Json{{"order", t.order()},
              {"dim", t.dim()},
              {"entries", std::vector<double>(t.entries().begin(), t.entries().end())}};
}

Json to_json(const KruskalReport& r) {
  return Json{{"k", r.k},
              {"witness", r.has_witness() ? Json(r.witness) : Json(nullptr)},
              {"min_sv_at_k", real(r.min_sv_at_k)},
              {"max_sv_ratio_at_k_plus_1", real(r.max_sv_ratio_at_k_plus_1)}};
}

Json to_json(const LemmaReport& r) {
  Json j{{"k", r.powers.k},
         {"witness", r.powers.has_witness() ? Json(r.powers.witness) : Json(nullptr)},
         {"min_sv_at_k", real(r.powers.min_sv_at_k)},
         {"expected", r.expected},
         {"measured", r.measured},
         {"pass", r.pass},
         {"k_base", r.k}};
  if (r.k_prime != 0) j["k_prime"] = r.k_prime;
  return j;
}

Json to_json(const BoundVerdict& v) {
  return Json{{"m", v.m},
              {"k", v.k},
              {"n", v.n},
              {"identifiable_guaranteed", v.identifiable_guaranteed},
              {"determined_guaranteed", v.determined_guaranteed},
              {"counterexample_exists_ident", v.counterexample_exists_ident},
              {"counterexample_exists_det", v.counterexample_exists_det},
              {"notes", v.notes}};
}

Json to_json(const KruskalCondition& c) {
  return Json{{"r", c.r}, {"k1", c.k1}, {"k2", c.k2}, {"k3", c.k3}, {"satisfied", c.satisfied}};
}

Json to_json(const CertificationReport& r) {
  Json trials = Json::array();
  for (const auto& t : r.recovery) {
    Json e{{"seed", t.seed}, {"match_distance", real(t.match_distance)}};
    if (!t.route.empty()) e["route"] = t.route;
    if (!t.error.empty()) e["error"] = t.error;
    trials.push_back(std::move(e));
  }
  return Json{{"bound", to_json(r.bound)},
              {"kruskal_condition", r.kruskal_condition ? to_json(*r.kruskal_condition) : Json(nullptr)},
              {"recovery", std::move(trials)},
              {"certified", r.certified},
              {"notes", r.notes}};
}

Json to_json(const SearchOutcome& s) {
  return Json{{"witness_found", s.witness.has_value()},
              {"witness", s.witness ? to_json(*s.witness) : Json(nullptr)},
              {"witness_residual", s.witness ? real(s.witness_residual) : Json(nullptr)},
              {"witness_restart", s.witness ? Json(s.witness_restart) : Json(nullptr)},
              {"best_residual", real(s.best_residual)},
              {"restarts", s.restarts}};
}

Json to_json(const CounterexamplePair& pair) {
  const auto& v = pair.verification;
  return Json{{"construction", to_string(pair.construction)},
              {"m", pair.m},
              {"k", pair.k},
              {"n", pair.n},
              {"seed", pair.seed},
              {"base_seed", pair.base_seed},
              {"P", to_json(pair.P)},
              {"Q", to_json(pair.Q)},
              {"verification",
               Json{{"tensor_distance", real(v.tensor_distance)},
                    {"k_measured_P", v.k_measured_P},
                    {"k_measured_Q", v.k_measured_Q},
                    {"match_distance", real(v.match_distance)},
                    {"base_order", v.base_order},
                    {"base_distance", real(v.base_distance)}}}};
}

Json to_json(const MonteCarloReport& r) {
  Json per = Json::array();
  for (double x : r.per_trial_min_sv) per.push_back(real(x));
  return Json{{"d", r.dim},
              {"trials", r.trials},
              {"independent", r.independent_count},
              {"fraction_independent", double(r.independent_count) / double(r.trials)},
              {"min_observed_sv", real(r.min_observed_sv)},
              {"forced_dependence", r.forced_dependence},
              {"per_trial_min_sv", std::move(per)}};
}

Json to_json(const TopicPlan& plan) {
  return Json{{"vocab_clusters", plan.clusters},
              {"topics", plan.topics},
              {"words_per_doc", plan.words_per_doc},
              {"effective_k", plan.effective_k},
              {"identifiable", plan.identifiable},
              {"determined", plan.determined},
              {"min_words_per_doc_ident", optional_int(plan.min_words_ident)},
              {"min_words_per_doc_det", optional_int(plan.min_words_det)},
              {"min_vocab_clusters_ident", optional_int(plan.min_clusters_ident)},
              {"min_vocab_clusters_det", optional_int(plan.min_clusters_det)},
              {"notes", plan.notes}};
}

Mixture mixture_from_json(const Json& j) {
  const auto d = get<std::size_t>(j, "d");
  auto weights = get<std::vector<double>>(j, "weights");
  const auto rows = get<std::vector<std::vector<double>>>(j, "components");
  std::vector<Categorical> comps;
  comps.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.size() != d) fail(ErrorCode::DimensionMismatch, "component length differs from d");
    comps.emplace_back(row);
  }
  return make_mixture(std::move(weights), std::move(comps));
}

GroupedDataset dataset_from_json(const Json& j) {
  const auto n = get<std::size_t>(j, "n");
  const auto d = get<std::size_t>(j, "d");
  const auto groups = get<std::vector<std::vector<std::uint32_t>>>(j, "groups");
  std::vector<std::uint32_t> flat;
  for (const auto& g : groups) {
    if (g.size() != n) fail(ErrorCode::InvalidArgs, "group size differs from n");
    flat.insert(flat.end(), g.begin(), g.end());
  }
  return GroupedDataset(n, d, std::move(flat));
}

MomentTensor tensor_from_json(const Json& j) {
  return MomentTensor(get<unsigned>(j, "order"), get<std::size_t>(j, "dim"),
                      get<std::vector<double>>(j, "entries"));
}

}  // namespace mixident::io
