// mixident: command-line front end over the C API.
//
// Exit codes: 0 success, 1 verified negative result, 2 usage error,
// 3 verification failure or computation failure.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixident/mixident.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitUsage = 2;
constexpr int kExitFailure = 3;

struct Exit : std::runtime_error {
  int code;
  Exit(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

struct RunConfig {
  std::uint64_t seed = 0;
  double rel_tol = 1e-9;
  double tensor_cap = 1e7;
  std::string output;
  std::string format = "json";
  unsigned jobs = 0;

  mixident_options options(std::uint64_t seed_override) const {
    mixident_options o;
    mixident_options_default(&o);
    o.seed = seed_override;
    o.rel_tol = rel_tol;
    o.tensor_cap = static_cast<size_t>(tensor_cap);
    return o;
  }
  mixident_options options() const { return options(seed); }
};

// Library status to exit code: malformed input is a usage error, everything
// else (non-convergence, failed verification) a failure.
int exit_code_for(int status) {
  switch (status) {
    case MIXIDENT_E_INVALID_ARGS:
    case MIXIDENT_E_NON_POSITIVE_WEIGHT:
    case MIXIDENT_E_DIMENSION_MISMATCH:
    case MIXIDENT_E_NOT_A_PROBABILITY:
    case MIXIDENT_E_CAP_EXCEEDED:
    case MIXIDENT_E_SHAPE_MISMATCH:
    case MIXIDENT_E_SPLIT_MISMATCH:
    case MIXIDENT_E_N_TOO_SMALL:
    case MIXIDENT_E_TOO_MANY_COLUMNS:
    case MIXIDENT_E_INVALID_REGION:
    case MIXIDENT_E_PARSE_ERROR:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

void check(int status) {
  if (status != MIXIDENT_OK)
    throw Exit(exit_code_for(status), mixident_last_error());
}

// Owns a library-allocated string.
std::string take(char* s) {
  std::string out(s ? s : "");
  mixident_string_free(s);
  return out;
}

struct MixtureDeleter {
  void operator()(mixident_mixture* p) const { mixident_mixture_free(p); }
};
struct TensorDeleter {
  void operator()(mixident_tensor* t) const { mixident_tensor_free(t); }
};
using MixturePtr = std::unique_ptr<mixident_mixture, MixtureDeleter>;
using TensorPtr = std::unique_ptr<mixident_tensor, TensorDeleter>;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Exit(kExitUsage, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MixturePtr load_mixture(const std::string& path) {
  mixident_mixture* p = nullptr;
  check(mixident_mixture_from_json(read_file(path).c_str(), &p));
  return MixturePtr(p);
}

Json parse(const std::string& text) { return Json::parse(text); }

void write_output(const RunConfig& cfg, const std::string& text) {
  if (cfg.output.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(cfg.output, std::ios::binary);
  if (!out) throw Exit(kExitUsage, "cannot write " + cfg.output);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

void require_json(const RunConfig& cfg, const char* command) {
  if (cfg.format != "json") throw Exit(kExitUsage, std::string(command) + " supports --format json only");
}

// Reals in CSV use the same 17-digit form as the JSON output.
std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : "; ") + csv_cell(e);
    return s;
  }
  return v.dump();
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string csv_table(const std::vector<std::string>& columns, const std::vector<Json>& rows) {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < columns.size(); ++c)
      out += (c ? "," : "") + (row.contains(columns[c]) ? csv_quote(csv_cell(row.at(columns[c]))) : std::string());
    out += '\n';
  }
  return out;
}

// Rows keep grid order whatever order the workers finish in.
template <class F>
std::vector<Json> run_grid(std::size_t cells, unsigned jobs, F&& cell) {
  std::vector<Json> rows(cells);
  std::vector<std::optional<Exit>> errors(cells);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cells;) {
      try {
        rows[i] = cell(i);
      } catch (const Exit& e) {
        errors[i] = e;
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) throw *e;
  return rows;
}

struct Range {
  long lo = 0, hi = 0;
  bool grid = false;
};

Range parse_range(const std::string& text, const char* name) {
  Range r;
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      r.lo = r.hi = std::stol(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } else {
      const std::string a = text.substr(0, dots), b = text.substr(dots + 2);
      r.lo = std::stol(a, &used);
      if (used != a.size()) throw std::invalid_argument(text);
      r.hi = std::stol(b, &used);
      if (used != b.size()) throw std::invalid_argument(text);
      r.grid = true;
    }
  } catch (const std::logic_error&) {
    throw Exit(kExitUsage, std::string("--") + name + ": expected an integer or a range a..b, got '" + text + "'");
  }
  if (r.lo > r.hi) throw Exit(kExitUsage, std::string("--") + name + ": empty range " + text);
  return r;
}

int cmd_bounds(const RunConfig& cfg, const std::string& m_text, const std::string& k_text,
               const std::string& n_text) {
  const Range m = parse_range(m_text, "m"), k = parse_range(k_text, "k"), n = parse_range(n_text, "n");
  const bool grid = m.grid || k.grid || n.grid;
  struct Cell {
    long m, k, n;
  };
  std::vector<Cell> cells;
  for (long mi = m.lo; mi <= m.hi; ++mi)
    for (long ki = k.lo; ki <= k.hi; ++ki)
      for (long ni = n.lo; ni <= n.hi; ++ni) {
        // Grids skip cells outside 1 <= k <= m; a single cell must be valid.
        if (grid && (ki > mi || ki < 1 || mi < 1 || ni < 1)) continue;
        cells.push_back({mi, ki, ni});
      }
  if (cells.empty()) throw Exit(kExitUsage, "no valid (m, k, n) cell in the requested grid");
  const auto rows = run_grid(cells.size(), cfg.jobs, [&](std::size_t i) {
    char* out = nullptr;
    check(mixident_bound_verdict_json(cells[i].m, cells[i].k, cells[i].n, &out));
    return parse(take(out));
  });
  if (cfg.format == "csv") {
    write_output(cfg, csv_table({"m", "k", "n", "identifiable_guaranteed", "determined_guaranteed",
                                 "counterexample_exists_ident", "counterexample_exists_det", "notes"},
                                rows));
  } else {
    write_output(cfg, Json{{"rows", rows}}.dump(2));
  }
  return kExitOk;
}

int cmd_rank(const RunConfig& cfg, const std::string& input) {
  require_json(cfg, "rank");
  const MixturePtr p = load_mixture(input);
  const mixident_options o = cfg.options();
  char* out = nullptr;
  check(mixident_kruskal_rank_json(p.get(), &o, &out));
  write_output(cfg, take(out));
  return kExitOk;
}

int cmd_lemma_check(const RunConfig& cfg, const std::string& lemma, const std::string& d_text,
                    const std::string& m_text, const std::string& n_text, unsigned reps,
                    std::size_t support) {
  if (lemma != "kindpow" && lemma != "kpindpow") throw Exit(kExitUsage, "--lemma must be kindpow or kpindpow");
  const Range d = parse_range(d_text, "d"), m = parse_range(m_text, "m"), n = parse_range(n_text, "n");
  struct Cell {
    long d, m, n;
    unsigned rep;
  };
  std::vector<Cell> cells;
  for (long di = d.lo; di <= d.hi; ++di)
    for (long mi = m.lo; mi <= m.hi; ++mi)
      for (long ni = n.lo; ni <= n.hi; ++ni)
        for (unsigned r = 0; r < reps; ++r) cells.push_back({di, mi, ni, r});
  if (cells.empty()) throw Exit(kExitUsage, "empty grid");
  const auto rows = run_grid(cells.size(), cfg.jobs, [&](std::size_t i) {
    const Cell& c = cells[i];
    const std::uint64_t seed = mixident_derive_seed(cfg.seed, i);
    const mixident_options o = cfg.options(seed);
    char* out = nullptr;
    int pass = 0;
    if (lemma == "kindpow")
      check(mixident_kindpow_trial_json(c.d, c.m, c.n, &o, &pass, &out));
    else
      check(mixident_kpindpow_trial_json(c.d, c.m, c.n, std::min<std::size_t>(support, c.m), &o, &pass, &out));
    const Json r = parse(take(out));
    Json row{{"d", c.d}, {"m", c.m}, {"n", c.n}, {"rep", c.rep}, {"seed", seed}};
    for (const auto& [key, value] : r.items()) row[key] = value;
    return row;
  });
  const bool all_pass =
      std::all_of(rows.begin(), rows.end(), [](const Json& r) { return r.at("pass").get<bool>(); });
  if (cfg.format == "csv") {
    write_output(cfg, csv_table({"d", "m", "n", "rep", "seed", "k_base", "k_prime", "expected", "measured",
                                 "pass", "min_sv_at_k"},
                                rows));
  } else {
    write_output(cfg, Json{{"lemma", lemma}, {"all_pass", all_pass}, {"rows", rows}}.dump(2));
  }
  // The lemmas are theorems: a failing cell is a build bug.
  return all_pass ? kExitOk : kExitFailure;
}

int cmd_certify(const RunConfig& cfg, const std::string& input, unsigned n, unsigned trials) {
  require_json(cfg, "certify");
  const MixturePtr p = load_mixture(input);
  const mixident_options o = cfg.options();
  char* out = nullptr;
  int certified = 0;
  check(mixident_certify_json(p.get(), n, trials, &o, &certified, &out));
  write_output(cfg, take(out));
  return certified ? kExitOk : kExitNegative;
}

int cmd_counterexample(const RunConfig& cfg, const std::string& kind, long m, long k, long n) {
  require_json(cfg, "counterexample");
  if (kind != "ident" && kind != "det") throw Exit(kExitUsage, "--kind must be ident or det");
  const mixident_options o = cfg.options();
  char* out = nullptr;
  check(mixident_counterexample_json(kind.c_str(), m, k, n, &o, &out));
  write_output(cfg, take(out));
  return kExitOk;
}

int cmd_montecarlo(const RunConfig& cfg, std::size_t d, std::size_t trials, bool control) {
  const mixident_options o = cfg.options();
  char* out = nullptr;
  double fraction = 0.0;
  check(mixident_monte_carlo_json(d, trials, control, &o, &fraction, &out));
  const std::string text = take(out);
  if (cfg.format == "csv") {
    const Json r = parse(text);
    std::vector<Json> rows;
    std::size_t t = 0;
    for (const auto& sv : r.at("per_trial_min_sv")) rows.push_back(Json{{"trial", t++}, {"min_sv", sv}});
    write_output(cfg, csv_table({"trial", "min_sv"}, rows));
  } else {
    write_output(cfg, text);
  }
  // Random points are independent almost surely; the control never is.
  const bool expected = control ? fraction == 0.0 : fraction == 1.0;
  return expected ? kExitOk : kExitFailure;
}

int cmd_plan_topics(const RunConfig& cfg, long clusters, long topics, long words) {
  require_json(cfg, "plan-topics");
  char* out = nullptr;
  check(mixident_plan_topics_json(clusters, topics, words, &out));
  write_output(cfg, take(out));
  return kExitOk;
}

int cmd_sample(const RunConfig& cfg, const std::string& input, std::size_t n, std::size_t groups) {
  require_json(cfg, "sample");
  const MixturePtr p = load_mixture(input);
  const mixident_options o = cfg.options();
  char* out = nullptr;
  check(mixident_sample_groups_json(p.get(), n, groups, &o, &out));
  write_output(cfg, take(out));
  return kExitOk;
}

int cmd_moments(const RunConfig& cfg, const std::string& input, const std::string& data, unsigned n,
                unsigned mode) {
  if (input.empty() == data.empty()) throw Exit(kExitUsage, "give exactly one of --input or --data");
  const mixident_options o = cfg.options();
  mixident_tensor* raw = nullptr;
  if (!input.empty()) {
    if (n == 0) throw Exit(kExitUsage, "--n is required with --input");
    const MixturePtr p = load_mixture(input);
    check(mixident_moment_tensor(p.get(), n, &o, &raw));
  } else {
    check(mixident_empirical_tensor(read_file(data).c_str(), &o, &raw));
  }
  const TensorPtr t(raw);
  char* out = nullptr;
  if (cfg.format == "csv")
    check(mixident_tensor_flattening_csv(t.get(), mode, &out));
  else
    check(mixident_tensor_to_json(t.get(), &out));
  write_output(cfg, take(out));
  return kExitOk;
}

int cmd_recover(const RunConfig& cfg, const std::string& tensor, std::size_t m) {
  require_json(cfg, "recover");
  mixident_tensor* raw = nullptr;
  check(mixident_tensor_from_json(read_file(tensor).c_str(), &raw));
  const TensorPtr t(raw);
  const mixident_options o = cfg.options();
  mixident_mixture* q = nullptr;
  check(mixident_recover(t.get(), m, &o, &q));
  const MixturePtr owned(q);
  char* out = nullptr;
  check(mixident_mixture_to_json(owned.get(), &out));
  write_output(cfg, take(out));
  return kExitOk;
}

int cmd_search(const RunConfig& cfg, const std::string& input, unsigned n, std::size_t l,
               std::size_t restarts, bool expect_none) {
  require_json(cfg, "search");
  const MixturePtr p = load_mixture(input);
  const mixident_options o = cfg.options();
  char* out = nullptr;
  int found = 0;
  check(mixident_search_json(p.get(), n, l, restarts, &o, &found, &out));
  write_output(cfg, take(out));
  // With --expect-none the instance is claimed determined: a witness
  // contradicts the theorem.
  return expect_none && found ? kExitFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identifiability laboratory for grouped-sample mixture models"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  RunConfig cfg;
  app.add_option("--seed", cfg.seed, "Root seed (env MIXIDENT_SEED)")->envname("MIXIDENT_SEED");
  app.add_option("--rel-tol", cfg.rel_tol, "Relative singular-value threshold")
      ->check(CLI::Validator(
          [](std::string& s) {
            const double x = std::stod(s);
            return x > 0.0 && x < 1.0 ? std::string() : std::string("must be in (0, 1)");
          },
          "(0, 1)"));
  app.add_option("--tensor-cap", cfg.tensor_cap, "Largest dense tensor size")->check(CLI::PositiveNumber);
  app.add_option("-o,--output", cfg.output, "Write to a file instead of stdout");
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--jobs", cfg.jobs, "Worker threads for grid commands (0 = all cores)");

  std::function<int()> run;

  auto* bounds = app.add_subcommand("bounds", "Bound verdicts for (m, k, n) cells or a..b grids");
  std::string b_m, b_k, b_n;
  bounds->add_option("--m", b_m, "Components")->required();
  bounds->add_option("--k", b_k, "Kruskal rank of the components")->required();
  bounds->add_option("--n", b_n, "Group size")->required();
  bounds->callback([&] { run = [&] { return cmd_bounds(cfg, b_m, b_k, b_n); }; });

  auto* rank = app.add_subcommand("rank", "Kruskal rank of a mixture's components");
  std::string r_input;
  rank->add_option("-i,--input", r_input, "Mixture JSON")->required();
  rank->callback([&] { run = [&] { return cmd_rank(cfg, r_input); }; });

  auto* lemma = app.add_subcommand("lemma-check", "Tensor-power rank lemmas on random families");
  std::string l_lemma, l_d = "3..4", l_m = "2..7", l_n = "1..3";
  unsigned l_reps = 20;
  std::size_t l_support = 2;
  lemma->add_option("--lemma", l_lemma, "kindpow or kpindpow")->required()->check(CLI::IsMember({"kindpow", "kpindpow"}));
  lemma->add_option("--d", l_d, "Dimension range");
  lemma->add_option("--m", l_m, "Family size range");
  lemma->add_option("--n", l_n, "Power range");
  lemma->add_option("--reps", l_reps, "Repetitions per cell")->check(CLI::PositiveNumber);
  lemma->add_option("--support", l_support, "kpindpow: components combined into x")->check(CLI::Range(2, 1 << 20));
  lemma->callback([&] { run = [&] { return cmd_lemma_check(cfg, l_lemma, l_d, l_m, l_n, l_reps, l_support); }; });

  auto* certify = app.add_subcommand("certify", "Certify identifiability by recovery");
  std::string c_input;
  unsigned c_n = 0, c_trials = 5;
  certify->add_option("-i,--input", c_input, "Mixture JSON")->required();
  certify->add_option("--n", c_n, "Group size")->required()->check(CLI::PositiveNumber);
  certify->add_option("--trials", c_trials, "Recovery trials")->check(CLI::PositiveNumber);
  certify->callback([&] { run = [&] { return cmd_certify(cfg, c_input, c_n, c_trials); }; });

  auto* counter = app.add_subcommand("counterexample", "Build a lifted counterexample pair");
  std::string x_kind;
  long x_m = 0, x_k = 0, x_n = 0;
  counter->add_option("--kind", x_kind, "ident or det")->required()->check(CLI::IsMember({"ident", "det"}));
  counter->add_option("--m", x_m, "Components")->required();
  counter->add_option("--k", x_k, "Target independence")->required();
  counter->add_option("--n", x_n, "Group size")->required();
  counter->callback([&] { run = [&] { return cmd_counterexample(cfg, x_kind, x_m, x_k, x_n); }; });

  auto* mc = app.add_subcommand("montecarlo", "Independence of random simplex points");
  std::size_t mc_d = 0, mc_trials = 1000;
  bool mc_control = false;
  mc->add_option("--d", mc_d, "Dimension")->required()->check(CLI::Range(2, 1 << 16));
  mc->add_option("--trials", mc_trials, "Trials")->check(CLI::PositiveNumber);
  mc->add_flag("--control", mc_control, "Force dependence (control run)");
  mc->callback([&] { run = [&] { return cmd_montecarlo(cfg, mc_d, mc_trials, mc_control); }; });

  auto* plan = app.add_subcommand("plan-topics", "Feasibility of a topic-model design");
  long p_clusters = 0, p_topics = 0, p_words = 0;
  plan->add_option("--vocab-clusters", p_clusters, "Word clusters d'")->required();
  plan->add_option("--topics", p_topics, "Topics m")->required();
  plan->add_option("--words-per-doc", p_words, "Words per document n")->required();
  plan->callback([&] { run = [&] { return cmd_plan_topics(cfg, p_clusters, p_topics, p_words); }; });

  auto* sample = app.add_subcommand("sample", "Draw grouped samples from a mixture");
  std::string s_input;
  std::size_t s_n = 0, s_groups = 0;
  sample->add_option("-i,--input", s_input, "Mixture JSON")->required();
  sample->add_option("--n", s_n, "Group size")->required()->check(CLI::PositiveNumber);
  sample->add_option("--groups", s_groups, "Number of groups")->required()->check(CLI::PositiveNumber);
  sample->callback([&] { run = [&] { return cmd_sample(cfg, s_input, s_n, s_groups); }; });

  auto* moments = app.add_subcommand("moments", "Moment tensor of a mixture or a dataset");
  std::string mo_input, mo_data;
  unsigned mo_n = 0, mo_mode = 0;
  moments->add_option("-i,--input", mo_input, "Mixture JSON");
  moments->add_option("--data", mo_data, "Grouped dataset JSON (empirical tensor)");
  moments->add_option("--n", mo_n, "Group size (with --input)");
  moments->add_option("--mode", mo_mode, "CSV: unfolding mode of the balanced flattening")->check(CLI::Range(0, 2));
  moments->callback([&] { run = [&] { return cmd_moments(cfg, mo_input, mo_data, mo_n, mo_mode); }; });

  auto* recover = app.add_subcommand("recover", "Recover a mixture from a moment tensor");
  std::string rc_tensor;
  std::size_t rc_m = 0;
  recover->add_option("--tensor", rc_tensor, "Moment tensor JSON")->required();
  recover->add_option("--m", rc_m, "Components")->required()->check(CLI::PositiveNumber);
  recover->callback([&] { run = [&] { return cmd_recover(cfg, rc_tensor, rc_m); }; });

  auto* search = app.add_subcommand("search", "Search for a different mixture with the same V_n");
  std::string se_input;
  unsigned se_n = 0;
  std::size_t se_l = 0, se_restarts = 50;
  bool se_expect_none = false;
  search->add_option("-i,--input", se_input, "Mixture JSON")->required();
  search->add_option("--n", se_n, "Group size")->required()->check(CLI::PositiveNumber);
  search->add_option("--l", se_l, "Components of the alternative")->required()->check(CLI::PositiveNumber);
  search->add_option("--restarts", se_restarts, "Random restarts")->check(CLI::PositiveNumber);
  search->add_flag("--expect-none", se_expect_none, "Exit 3 if a witness is found");
  search->callback([&] { run = [&] { return cmd_search(cfg, se_input, se_n, se_l, se_restarts, se_expect_none); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (cfg.jobs == 0) cfg.jobs = std::max(1u, std::thread::hardware_concurrency());

  try {
    return run();
  } catch (const Exit& e) {
    std::cerr << "mixident: " << e.what() << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "mixident: " << e.what() << '\n';
    return kExitFailure;
  }
}
