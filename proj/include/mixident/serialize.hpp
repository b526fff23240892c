#pragma once

// JSON schemas for every report and data type. Reals are written with 17
// significant digits; non-finite reals are written as null.

#include <string>

#include <json.hpp>

#include "mixident/core.hpp"
#include "mixident/counterexamples.hpp"
#include "mixident/identifiability.hpp"
#include "mixident/randomcheck.hpp"
#include "mixident/rank.hpp"
#include "mixident/tensor.hpp"

namespace mixident::io {

using Json = nlohmann::ordered_json;

/// Deterministic text form: fixed key order, %.17g reals, `indent` < 0 for a
/// single line.
std::string dump(const Json& j, int indent = 2);

/// Throws ParseError on malformed text.
Json parse(const std::string& text);

Json to_json(const Mixture& p);
Json to_json(const GroupedDataset& data);
Json to_json(const MomentTensor& t);
Json to_json(const KruskalReport& r);
Json to_json(const LemmaReport& r);
Json to_json(const BoundVerdict& v);
Json to_json(const KruskalCondition& c);
Json to_json(const CertificationReport& r);
Json to_json(const SearchOutcome& s);
Json to_json(const CounterexamplePair& pair);
Json to_json(const MonteCarloReport& r);
Json to_json(const TopicPlan& plan);

/// Schema violations throw ParseError; value violations keep the error of
/// the owning constructor (NotAProbability, NonPositiveWeight, ...).
Mixture mixture_from_json(const Json& j);
GroupedDataset dataset_from_json(const Json& j);
MomentTensor tensor_from_json(const Json& j);

}  // namespace mixident::io
