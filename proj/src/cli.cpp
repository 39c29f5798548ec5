#include "popsym/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <sstream>

#include "popsym/builtins.hpp"
#include "popsym/config_graph.hpp"
#include "popsym/dsl.hpp"
#include "popsym/experiments.hpp"
#include "popsym/scripted.hpp"
#include "popsym/state_analysis.hpp"

namespace popsym {

namespace {

using json = nlohmann::ordered_json;

// Bad flag combinations; exit code 2 like CLI11's own parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scripted terminals are cross-checked by exhaustive search up to this size.
constexpr std::uint64_t kExactCheckLimit = 12;

struct Options {
  std::string file, builtin;
  unsigned x = 0, c = 0, k = 0;
  std::string coeffs;
  Count n = 0, n0 = 0, n1 = 0, na = 0, nb = 0;
  std::vector<std::string> init, input;
  std::string scheduler = "maxmatch";
  std::uint64_t seed = 1;
  std::uint64_t cap = kDefaultStepCap;
  std::string mode;
  std::string format;
  std::size_t budget = kDefaultNodeBudget;
  std::string sizes;
  unsigned reps = kDefaultRepetitions;
  unsigned threads = 0;
  std::string input_symbol = "1";
  std::string expect;
  std::string out_path, aggregate_path, fit_path;

  // The same flag is registered on several subcommands; only the parsed one counts.
  std::multimap<std::string, CLI::Option*> given;
  bool has(const std::string& flag) const {
    auto [lo, hi] = given.equal_range(flag);
    for (auto it = lo; it != hi; ++it)
      if (it->second->count() > 0) return true;
    return false;
  }
};

struct Source {
  std::optional<Builtin> builtin;
  std::shared_ptr<const Protocol> protocol;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

unsigned parse_unsigned(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(s, &used);
    if (used != s.size() || s.front() == '-') throw std::invalid_argument(s);
    return static_cast<unsigned>(v);
  } catch (const std::logic_error&) {
    throw UsageError("invalid " + what + " '" + s + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write '" + path + "'");
  f << text;
}

Source load_source(const Options& o) {
  if (o.file.empty() == o.builtin.empty()) throw UsageError("give exactly one of a protocol file or --builtin");
  Source s;
  if (!o.file.empty()) {
    s.protocol = std::make_shared<const Protocol>(parse_protocol(read_file(o.file)));
    return s;
  }
  const Family f = parse_family(o.builtin);
  auto need = [&](const char* flag) {
    if (!o.has(flag)) throw UsageError("--builtin " + o.builtin + " needs " + flag);
  };
  switch (f) {
    case Family::count_to_x:
      need("--x");
      s.builtin = Builtin::count_to_x(o.x);
      break;
    case Family::positive_lc: {
      need("--coeffs");
      need("--c");
      std::vector<unsigned> a;
      for (const auto& part : split(o.coeffs, ',')) a.push_back(parse_unsigned(part, "coefficient"));
      s.builtin = Builtin::positive_lc(a, o.c);
      break;
    }
    case Family::majority: s.builtin = Builtin::majority(); break;
    case Family::k_majority:
      need("--k");
      s.builtin = Builtin::k_majority(o.k);
      break;
    case Family::parity: s.builtin = Builtin::parity(); break;
  }
  s.protocol = s.builtin->shared_protocol();
  return s;
}

std::pair<std::string, Count> parse_assignment(const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected name=count, got '" + item + "'");
  return {item.substr(0, eq), parse_unsigned(item.substr(eq + 1), "count")};
}

Configuration load_initial(const Options& o, const Protocol& p) {
  const bool by_input = o.has("--n") || o.has("--n0") || o.has("--n1") || o.has("--na") || o.has("--nb") ||
                        o.has("--input");
  if (o.has("--init")) {
    if (by_input) throw UsageError("--init cannot be combined with input-count flags");
    std::map<std::string, Count> named;
    for (const auto& item : o.init)
      for (const auto& part : split(item, ',')) {
        auto [name, count] = parse_assignment(part);
        named[name] += count;
      }
    return Configuration::from_named(p, named);
  }
  if (!by_input) throw UsageError("no initial configuration; use --n, --n0/--n1, --na/--nb, --input or --init");
  std::map<std::string, Count> per_input;
  if (o.has("--n")) {
    if (p.inputs().size() != 1)
      throw UsageError("--n needs a single-input protocol; '" + p.name() + "' has " +
                       std::to_string(p.inputs().size()));
    per_input[p.inputs().front().symbol] += o.n;
  }
  if (o.has("--n0")) per_input["0"] += o.n0;
  if (o.has("--n1")) per_input["1"] += o.n1;
  if (o.has("--na")) per_input["a"] += o.na;
  if (o.has("--nb")) per_input["b"] += o.nb;
  for (const auto& item : o.input)
    for (const auto& part : split(item, ',')) {
      auto [sym, count] = parse_assignment(part);
      per_input[sym] += count;
    }
  return initial_configuration(p, per_input);
}

json config_json(const Protocol& p, const Configuration& c) {
  json j = json::object();
  for (StateId q = 0; q < p.num_states(); ++q) j[p.state_name(q)] = c[q];
  return j;
}

json step_json(const Protocol& p, const ParallelStep& s) {
  json j = json::array();
  for (const auto& a : s.applications())
    j.push_back({{"initiator", p.state_name(a.pair.initiator)},
                 {"responder", p.state_name(a.pair.responder)},
                 {"multiplicity", a.multiplicity}});
  return j;
}

json names(const Protocol& p, const std::vector<StateId>& qs) {
  json j = json::array();
  for (StateId q : qs) j.push_back(p.state_name(q));
  return j;
}

json tree_json(const Protocol& p, const ProductionTree& t, std::size_t v) {
  json j{{"state", p.state_name(t.nodes[v].label)}};
  if (t.nodes[v].children)
    j["children"] = json::array({tree_json(p, t, t.nodes[v].children->first),
                                 tree_json(p, t, t.nodes[v].children->second)});
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void require_format(const Options& o, std::initializer_list<const char*> allowed) {
  if (o.format.empty()) return;
  for (const char* a : allowed)
    if (o.format == a) return;
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : "|") + std::string(a);
  throw UsageError("--format must be one of " + list);
}

json analysis_json(const Source& s, bool with_trees) {
  const Protocol& p = *s.protocol;
  const auto report = analyze_states(p);
  json inputs = json::object();
  for (const auto& in : p.inputs()) inputs[in.symbol] = p.state_name(in.state);
  std::size_t max_depth = 0;
  json depths = json::object();
  for (const auto& [q, t] : report.trees) {
    depths[p.state_name(q)] = t.depth();
    max_depth = std::max(max_depth, t.depth());
  }
  json j{{"protocol", p.name()},
         {"states", p.states()},
         {"inputs", inputs},
         {"output_symbols", p.output_symbols()},
         {"effective_rules", p.effective_rules().size()},
         {"reachable", names(p, report.reachable)},
         {"output_stable", names(p, report.output_stable)},
         {"disseminating", names(p, report.disseminating)},
         {"tree_depths", depths},
         {"max_tree_depth", max_depth},
         {"tree_depth_within_bound", max_depth <= p.num_states()}};
  json lint = nullptr;
  if (s.builtin) {
    if (auto coeffs = s.builtin->linear_coefficients()) {
      const auto l = mixed_sign_stability_check(p, *coeffs);
      lint = {{"mixed_signs", l.mixed_signs}, {"consistent", l.consistent}};
    }
  }
  j["mixed_sign_lint"] = lint;
  if (with_trees) {
    json trees = json::object();
    for (const auto& [q, t] : report.trees) trees[p.state_name(q)] = tree_json(p, t, t.root);
    j["trees"] = trees;
  }
  return j;
}

int cmd_validate(const Options& o, std::ostream& out) {
  require_format(o, {"json"});
  out << dump(analysis_json(load_source(o), false));
  return 0;
}

int cmd_analyze(const Options& o, std::ostream& out) {
  require_format(o, {"json"});
  out << dump(analysis_json(load_source(o), true));
  return 0;
}

std::optional<std::size_t> exact_stable(const Protocol& p, const Configuration& c) {
  if (c.population() > kExactCheckLimit) return std::nullopt;
  return is_output_stable_config(p, c).output;
}

json scripted_json(const Builtin& b, const Configuration& c0, bool with_steps) {
  const Protocol& p = b.protocol();
  const Schedule sch = script_for(b, c0);
  const ExecutionTrace replay(p, c0, sch.steps);
  const auto stable = b.stable_output(replay.terminal());
  json j{{"mode", "scripted"},
         {"protocol", b.provenance()},
         {"schedule", sch.name},
         {"initial", config_json(p, c0)},
         {"steps", sch.steps.size()},
         {"terminal", config_json(p, replay.terminal())},
         {"achieved_min_symmetry", sch.achieved_min_symmetry},
         {"replay_min_symmetry", replay.min_symmetry()},
         {"replay_verified", replay.min_symmetry() == sch.achieved_min_symmetry && replay.terminal() == sch.terminal},
         {"symmetry_breaking", replay.symmetry_breaking()},
         {"terminal_output", stable ? json(p.output_symbols()[*stable]) : json(nullptr)},
         {"expected_output", p.output_symbols()[b.expected_output(c0)]}};
  if (c0.population() <= kExactCheckLimit) {
    const auto exact = exact_stable(p, replay.terminal());
    j["exact_terminal_output"] = exact ? json(p.output_symbols()[*exact]) : json(nullptr);
  }
  if (auto bound = check_bound(b, c0, sch.achieved_min_symmetry))
    j["bound"] = {{"formula", bound->formula},
                  {"value", bound->value},
                  {"strict", bound->strict},
                  {"satisfied", bound->satisfied}};
  else
    j["bound"] = nullptr;
  j["notes"] = sch.notes;
  if (with_steps) {
    json steps = json::array();
    for (const auto& s : sch.steps) steps.push_back(step_json(p, s));
    j["schedule_steps"] = steps;
  }
  return j;
}

std::string scripted_text(const json& j) {
  std::ostringstream os;
  os << "protocol=" << j["protocol"].get<std::string>() << " schedule=" << j["schedule"].get<std::string>()
     << " steps=" << j["steps"] << " achieved_min_symmetry=" << j["achieved_min_symmetry"]
     << " replay_verified=" << j["replay_verified"] << " terminal_output=" << j["terminal_output"];
  if (!j["bound"].is_null())
    os << " bound=" << j["bound"]["value"] << " bound_satisfied=" << j["bound"]["satisfied"];
  os << "\n";
  return os.str();
}

const Builtin& require_builtin(const Source& s, const std::string& what) {
  if (!s.builtin) throw UsageError(what + " needs --builtin");
  return *s.builtin;
}

int cmd_symmetry(const Options& o, std::ostream& out) {
  require_format(o, {"json", "text"});
  const Source s = load_source(o);
  const Protocol& p = *s.protocol;
  const Configuration c0 = load_initial(o, p);
  const std::string mode = o.mode.empty() ? "exact" : o.mode;
  if (mode == "scripted") {
    const json j = scripted_json(require_builtin(s, "scripted symmetry"), c0, false);
    out << (o.format == "text" ? scripted_text(j) : dump(j));
    return 0;
  }
  if (mode != "exact") throw UsageError("--mode must be exact or scripted");
  std::optional<std::size_t> expected;
  if (s.builtin) expected = s.builtin->expected_output(c0);
  if (!o.expect.empty()) {
    const auto& ys = p.output_symbols();
    auto it = std::find(ys.begin(), ys.end(), o.expect);
    if (it == ys.end()) throw InvalidInput("protocol has no output symbol '" + o.expect + "'");
    expected = static_cast<std::size_t>(it - ys.begin());
  }
  const auto r = exact_symmetry(p, c0, expected, o.budget);
  if (o.format == "text") {
    out << "protocol=" << p.name() << " exact_symmetry=" << r.exact_symmetry
        << " symmetry_breaking=" << r.exact_breaking << " nodes=" << r.nodes << "\n";
    return 0;
  }
  json witness = json::array();
  for (const auto& st : r.witness) witness.push_back(step_json(p, st));
  json sweep = json::array();
  for (auto [k, ok] : r.sweep) sweep.push_back({{"threshold", k}, {"reachable", ok}});
  out << dump(json{{"mode", "exact"},
                   {"protocol", s.builtin ? s.builtin->provenance() : p.name()},
                   {"initial", config_json(p, c0)},
                   {"expected_output", p.output_symbols()[r.expected_output]},
                   {"exact_symmetry", r.exact_symmetry},
                   {"symmetry_breaking", r.exact_breaking},
                   {"witness", witness},
                   {"witness_terminal", config_json(p, r.witness_terminal)},
                   {"witness_min_symmetry", r.witness_min_symmetry},
                   {"nodes", r.nodes},
                   {"thresholds_tried", r.thresholds_tried},
                   {"sweep", sweep}});
  return 0;
}

int cmd_schedule(const Options& o, std::ostream& out) {
  require_format(o, {"json", "text"});
  const Source s = load_source(o);
  const Builtin& b = require_builtin(s, "schedule");
  const Configuration c0 = load_initial(o, b.protocol());
  const json j = scripted_json(b, c0, true);
  if (o.format != "text") {
    out << dump(j);
    return 0;
  }
  out << scripted_text(j);
  const Protocol& p = b.protocol();
  const ExecutionTrace trace(p, c0, script_for(b, c0).steps);
  for (std::size_t i = 0; i < trace.steps().size(); ++i) {
    out << "step " << i + 1 << ":";
    for (const auto& a : trace.steps()[i].applications())
      out << " (" << p.state_name(a.pair.initiator) << "," << p.state_name(a.pair.responder) << ")x" << a.multiplicity;
    out << " -> " << format_configuration(p, trace.configurations()[i + 1]) << "\n";
  }
  return 0;
}

int cmd_run(const Options& o, std::ostream& out) {
  require_format(o, {"json", "text"});
  const Source s = load_source(o);
  const Protocol& p = *s.protocol;
  const Configuration c0 = load_initial(o, p);
  const Mode mode = o.mode.empty() ? Mode::until_stability : parse_mode(o.mode);

  RunResult res{{}, c0};
  std::string scheduler = o.scheduler;
  if (scheduler == "script" || scheduler.starts_with("script:")) {
    const Builtin& b = require_builtin(s, "a scripted scheduler");
    if (scheduler != "script" && scheduler.substr(7) != family_name(b.family()))
      throw UsageError("scheduler '" + scheduler + "' does not match --builtin " + family_name(b.family()));
    const Schedule sch = script_for(b, c0);
    const ExecutionTrace trace(p, c0, sch.steps);
    res.last = trace.terminal();
    res.record.n = static_cast<Count>(c0.population());
    res.record.steps = trace.steps().size();
    res.record.observed_min_symmetry = trace.min_symmetry();
    res.record.terminal = b.stable_output(res.last) ? Terminal::stable : Terminal::step_cap;
    scheduler = "script:" + family_name(b.family());
  } else {
    const SchedulerKind kind = parse_scheduler(scheduler);
    StopRule stop;
    if (s.builtin) {
      const Builtin& b = *s.builtin;
      const auto alarm = b.alarm_state();
      if (mode == Mode::until_alarm_majority && !alarm)
        throw InvalidInput(b.provenance() + " has no alarm state; until_alarm_majority does not apply");
      stop = [&, alarm](const Configuration& c) -> std::optional<Terminal> {
        if (mode == Mode::until_alarm_majority)
          return 2 * std::uint64_t{c[*alarm]} > c.population() ? std::optional(Terminal::alarm_majority)
                                                                 : std::nullopt;
        return b.stable_output(c) ? std::optional(Terminal::stable) : std::nullopt;
      };
    } else {
      if (mode != Mode::until_stability) throw UsageError("protocol files support only --mode until_stability");
      // No analytic test for an arbitrary protocol: decide stability exhaustively.
      stop = [&](const Configuration& c) -> std::optional<Terminal> {
        return is_output_stable_config(p, c, o.budget).stable ? std::optional(Terminal::stable) : std::nullopt;
      };
    }
    res = run_until(p, c0, kind, o.seed, stop, o.cap);
    res.record.mode = mode;
    scheduler = scheduler_name(kind);
  }
  const auto unanimous = unanimous_output(p, res.last);
  const std::string name = s.builtin ? s.builtin->provenance() : p.name();
  if (o.format == "json") {
    json j{{"protocol", name},
           {"scheduler", scheduler},
           {"seed", o.seed},
           {"mode", mode_name(mode)},
           {"n", res.record.n},
           {"steps", res.record.steps},
           {"min_symmetry", res.record.observed_min_symmetry},
           {"terminal", terminal_name(res.record.terminal)},
           {"output", unanimous ? json(p.output_symbols()[*unanimous]) : json(nullptr)},
           {"final", config_json(p, res.last)}};
    if (s.builtin) j["expected_output"] = p.output_symbols()[s.builtin->expected_output(c0)];
    out << dump(j);
    return 0;
  }
  out << "protocol=" << name << " scheduler=" << scheduler << " n=" << res.record.n << " steps=" << res.record.steps
      << " min_symmetry=" << res.record.observed_min_symmetry << " terminal=" << terminal_name(res.record.terminal)
      << " output=" << (unanimous ? p.output_symbols()[*unanimous] : "mixed") << "\n";
  return 0;
}

int cmd_transform(const Options& o, std::ostream& out) {
  require_format(o, {"json", "text"});
  const Source s = load_source(o);
  const Protocol t = disseminating_transform(*s.protocol);
  std::string text;
  if (o.format == "json") {
    const auto report = analyze_states(t);
    text = dump(json{{"protocol", t.name()},
                     {"states", t.states()},
                     {"effective_rules", t.effective_rules().size()},
                     {"disseminating", names(t, report.disseminating)},
                     {"text", serialize_protocol(t)}});
  } else {
    text = serialize_protocol(t);
  }
  write_output(o.out_path, text, out);
  return 0;
}

std::vector<Count> parse_sizes(const std::string& spec) {
  std::vector<Count> sizes;
  if (spec.find(':') != std::string::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw UsageError("--sizes range must be lo:hi:step");
    const unsigned lo = parse_unsigned(parts[0], "size"), hi = parse_unsigned(parts[1], "size"),
                   step = parse_unsigned(parts[2], "size step");
    if (step == 0 || lo > hi) throw UsageError("--sizes range must have lo <= hi and step >= 1");
    for (unsigned n = lo; n <= hi; n += step) sizes.push_back(n);
  } else {
    for (const auto& part : split(spec, ',')) sizes.push_back(parse_unsigned(part, "size"));
  }
  if (sizes.empty()) throw UsageError("--sizes is empty");
  return sizes;
}

int cmd_experiment(const Options& o, std::ostream& out) {
  require_format(o, {"csv", "json"});
  const Source s = load_source(o);
  ExperimentSpec spec;
  spec.builtin = require_builtin(s, "experiment");
  spec.input_symbol = o.input_symbol;
  spec.sizes = parse_sizes(o.sizes);
  spec.repetitions = o.reps;
  spec.scheduler = parse_scheduler(o.scheduler);
  spec.base_seed = o.seed;
  spec.step_cap = o.cap;
  spec.threads = o.threads;
  if (!o.mode.empty() && o.mode != "both") spec.modes = {parse_mode(o.mode)};
  if (o.mode.empty() && !spec.builtin.alarm_state()) spec.modes = {Mode::until_stability};
  const SweepResult res = run_sweep(spec);

  json fits = json::object();
  for (Mode m : spec.modes) {
    const auto curve = mean_curve(res.aggregate, m);
    fits[mode_name(m)] = curve.size() >= 5 ? json::parse(growth_fit_json(growth_fit(curve))) : json(nullptr);
  }
  json dominance = nullptr;
  if (spec.modes.size() == 2) {
    const auto a = mean_curve(res.aggregate, Mode::until_alarm_majority);
    const auto b = mean_curve(res.aggregate, Mode::until_stability);
    bool all = a.size() == b.size();
    for (std::size_t i = 0; all && i < a.size(); ++i) all = a[i].second >= b[i].second;
    dominance = all;
  }
  unsigned cap_hits = 0;
  for (const auto& row : res.aggregate) cap_hits += row.cap_hits;
  const json summary{{"protocol", spec.builtin.provenance()},
                     {"scheduler", scheduler_name(spec.scheduler)},
                     {"base_seed", spec.base_seed},
                     {"repetitions", spec.repetitions},
                     {"step_cap", spec.step_cap},
                     {"cap_hits", cap_hits},
                     {"fits", fits},
                     {"alarm_majority_dominates", dominance}};

  if (!o.aggregate_path.empty()) write_output(o.aggregate_path, aggregate_csv(res.aggregate), out);
  if (!o.fit_path.empty()) write_output(o.fit_path, dump(summary), out);
  if (o.format == "json") {
    json aggregate = json::array();
    for (const auto& r : res.aggregate)
      aggregate.push_back({{"n", r.n},
                           {"mode", mode_name(r.mode)},
                           {"mean_symmetry", r.mean_symmetry},
                           {"stddev", r.stddev},
                           {"reps", r.reps},
                           {"cap_hits", r.cap_hits}});
    json j = summary;
    j["aggregate"] = aggregate;
    write_output(o.out_path, dump(j), out);
  } else {
    write_output(o.out_path, records_csv(res.records), out);
  }
  return 0;
}

void add_source(CLI::App* sub, Options& o) {
  sub->add_option("file,--file", o.file, "Protocol file");
  o.given.emplace("--builtin", sub->add_option("--builtin", o.builtin, "count_to_x | positive_lc | majority | k_majority | parity"));
  o.given.emplace("--x", sub->add_option("--x", o.x, "Count-to-x threshold"));
  o.given.emplace("--coeffs", sub->add_option("--coeffs", o.coeffs, "Positive coefficients, comma separated"));
  o.given.emplace("--c", sub->add_option("--c", o.c, "Positive linear combination threshold"));
  o.given.emplace("--k", sub->add_option("--k", o.k, "k of k-symmetry majority"));
}

void add_initial(CLI::App* sub, Options& o) {
  o.given.emplace("--n", sub->add_option("--n", o.n, "Nodes on the single input symbol"));
  o.given.emplace("--n0", sub->add_option("--n0", o.n0, "Nodes with input 0"));
  o.given.emplace("--n1", sub->add_option("--n1", o.n1, "Nodes with input 1"));
  o.given.emplace("--na", sub->add_option("--na", o.na, "Nodes with input a"));
  o.given.emplace("--nb", sub->add_option("--nb", o.nb, "Nodes with input b"));
  o.given.emplace("--input", sub->add_option("--input", o.input, "symbol=count[,...] per input symbol"));
  o.given.emplace("--init", sub->add_option("--init", o.init, "state=count[,...] per state"));
}

std::string one_line(std::string s) {
  for (char& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Population protocol symmetry toolkit", "popsym"};
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "Check a protocol and report state-level analysis");
  auto* analyze = app.add_subcommand("analyze", "State analysis with production trees");
  auto* symmetry = app.add_subcommand("symmetry", "Exact or scripted symmetry on an initial configuration");
  auto* schedule = app.add_subcommand("schedule", "Print the scripted schedule step by step");
  auto* run = app.add_subcommand("run", "Simulate one execution");
  auto* transform = app.add_subcommand("transform", "Merge output-stable states into one disseminating state");
  auto* experiment = app.add_subcommand("experiment", "Observed-symmetry sweep under a random scheduler");

  for (auto* sub : {validate, analyze, symmetry, schedule, run, transform, experiment}) {
    add_source(sub, o);
    sub->add_option("--format", o.format, "json | csv | text where supported");
  }
  for (auto* sub : {symmetry, schedule, run}) add_initial(sub, o);
  symmetry->add_option("--mode", o.mode, "exact | scripted");
  symmetry->add_option("--expect", o.expect, "Expected output symbol for exact mode");
  for (auto* sub : {symmetry, run}) sub->add_option("--budget", o.budget, "Configuration graph node budget");
  for (auto* sub : {run, experiment}) {
    sub->add_option("--scheduler", o.scheduler, "seq | maxmatch | maximal | script[:<family>]");
    sub->add_option("--seed", o.seed, "Random seed (base seed for experiments)");
    sub->add_option("--cap", o.cap, "Step cap");
    sub->add_option("--mode", o.mode, "until_stability | until_alarm_majority (experiment also: both)");
    sub->add_option("--out", o.out_path, "Output file");
  }
  transform->add_option("--out", o.out_path, "Output file");
  experiment->add_option("--sizes", o.sizes, "lo:hi:step or comma list")->required();
  experiment->add_option("--reps", o.reps, "Repetitions per size");
  experiment->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  experiment->add_option("--input-symbol", o.input_symbol, "Input symbol every node starts with");
  experiment->add_option("--aggregate", o.aggregate_path, "Aggregate CSV output file");
  experiment->add_option("--fit", o.fit_path, "Fit summary JSON output file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (*validate) return cmd_validate(o, out);
    if (*analyze) return cmd_analyze(o, out);
    if (*symmetry) return cmd_symmetry(o, out);
    if (*schedule) return cmd_schedule(o, out);
    if (*run) return cmd_run(o, out);
    if (*transform) return cmd_transform(o, out);
    if (*experiment) return cmd_experiment(o, out);
  } catch (const UsageError& e) {
    err << "error: usage: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 2;
}

}  // namespace popsym
