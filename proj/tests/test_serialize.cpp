#include <doctest.h>

#include <limits>

#include "mixident/identifiability.hpp"
#include "mixident/serialize.hpp"
#include "support.hpp"

using namespace mixident;
using testsupport::mixture;

TEST_CASE("mixture round trip") {
  const Mixture p = mixture({0.3, 0.7}, {{0.2, 0.8}, {0.9, 0.1}});
  const std::string text = io::dump(io::to_json(p));
  CHECK(io::mixture_from_json(io::parse(text)) == p);
  CHECK(text == "{\n  \"d\": 2,\n  \"weights\": [0.29999999999999999, 0.69999999999999996],\n"
                "  \"components\": [\n    [0.20000000000000001, 0.80000000000000004],\n"
                "    [0.90000000000000002, 0.10000000000000001]\n  ]\n}\n");
}

TEST_CASE("reals keep a decimal point and non-finite values become null") {
  io::Json j = io::Json::object();
  j["one"] = 1.0;
  j["inf"] = std::numeric_limits<double>::infinity();
  j["int"] = 3;
  CHECK(io::dump(j, -1) == "{\"one\":1.0,\"inf\":null,\"int\":3}");
}

TEST_CASE("tensor and dataset round trips") {
  const MomentTensor t(2, 2, {0.1, 0.2, 0.3, 0.4});
  CHECK(io::tensor_from_json(io::parse(io::dump(io::to_json(t)))) == t);
  const GroupedDataset data(2, 3, {0, 1, 2, 2});
  CHECK(io::dataset_from_json(io::parse(io::dump(io::to_json(data)))) == data);
}

TEST_CASE("malformed input") {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  CHECK(code([] { io::parse("{"); }) == ErrorCode::ParseError);
  CHECK(code([] { io::mixture_from_json(io::parse("{\"d\": 2}")); }) == ErrorCode::ParseError);
  CHECK(code([] { io::mixture_from_json(io::parse("{\"d\": 2, \"weights\": \"x\", \"components\": []}")); }) ==
        ErrorCode::ParseError);
  CHECK(code([] {
          io::mixture_from_json(io::parse("{\"d\": 3, \"weights\": [1.0], \"components\": [[0.5, 0.5]]}"));
        }) == ErrorCode::DimensionMismatch);
  CHECK(code([] {
          io::mixture_from_json(io::parse("{\"d\": 2, \"weights\": [1.0], \"components\": [[0.5, 0.6]]}"));
        }) == ErrorCode::NotAProbability);
  CHECK(code([] { io::tensor_from_json(io::parse("{\"order\": 2, \"dim\": 2, \"entries\": [1]}")); }) ==
        ErrorCode::ShapeMismatch);
}

TEST_CASE("report schemas") {
  const io::Json v = io::to_json(bound_verdict(10, 7, 4));
  CHECK(v.at("determined_guaranteed") == true);
  CHECK(v.at("notes").is_array());
  const io::Json plan = io::to_json(plan_topics(2, 5, 8));
  CHECK(plan.at("min_words_per_doc_ident") == 9);
  CHECK(io::to_json(plan_topics(3, 1, 1)).at("identifiable") == true);
}
