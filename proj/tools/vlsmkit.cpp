// Command-line front end: scenario-driven simulation, trace checking,
// equivocation detection, and equivalence-check drivers.
//
// Exit codes: 0 success/confirmed/empty report, 1 check failure or
// counterexample, 2 usage or parse error, 3 non-empty equivocation report,
// 4 precondition failure, 5 resource cap exceeded.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

#include "vlsm/byzantine.hpp"
#include "vlsm/equiv_models.hpp"
#include "vlsm/equivocation.hpp"
#include "vlsm/serialize.hpp"

namespace {

using namespace vlsm;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDetected = 3;
constexpr int kExitPrecondition = 4;
constexpr int kExitCap = 5;

struct CommonArgs {
  std::string scenario_path;
  int64_t depth_override = -1;
  int64_t cap_override = -1;
};

Scenario load(const CommonArgs& args) {
  Scenario sc = load_scenario_file(args.scenario_path);
  if (args.depth_override >= 0) sc.depth = static_cast<size_t>(args.depth_override);
  if (args.cap_override >= 0) {
    sc.limits.max_visited = static_cast<size_t>(args.cap_override);
  } else if (const char* env = std::getenv("VLSMKIT_CAP")) {
    sc.limits.max_visited = static_cast<size_t>(std::stoull(env));
  }
  return sc;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("parse error in ") + path + ": " + e.what());
  }
  return j;
}

void emit(const json& j, const std::string& out_path) {
  std::string text = dump_canonical(j);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ParseError("cannot write file: " + out_path);
    out << text;
  }
}

int cmd_simulate(const CommonArgs& args, uint64_t seed, const std::string& out_path) {
  Scenario sc = load(args);
  Vlsm machine = build_scenario_machine(sc);
  ReachSet rs = reach(machine, sc.depth, {}, sc.limits);

  std::set<Value> pool_set;
  for (const auto& m : rs.proper_messages()) pool_set.insert(m);

  std::mt19937_64 rng(seed);
  if (machine.initial_states.empty()) throw ParseError("machine has no initial state");
  Value cur = machine.initial_states[rng() % machine.initial_states.size()];
  Trace tr{cur, {}};
  for (size_t step = 0; step < sc.depth; ++step) {
    std::vector<Value> labels = machine.enabled_labels(cur);
    std::sort(labels.begin(), labels.end());
    std::vector<std::pair<Value, OptionMessage>> choices;
    for (const auto& l : labels) {
      if (is_constrained(machine, l, cur, OptionMessage::none())) {
        choices.emplace_back(l, OptionMessage::none());
      }
      for (const auto& m : pool_set) {
        OptionMessage in = OptionMessage::proper(m);
        if (is_constrained(machine, l, cur, in)) choices.emplace_back(l, in);
      }
    }
    if (choices.empty()) break;
    const auto& [label, input] = choices[rng() % choices.size()];
    StepResult r = machine.transition(label, cur, input);
    tr.steps.push_back(TransitionRecord{label, cur, input, r.post, r.output});
    if (r.output.is_proper()) pool_set.insert(r.output.message());
    cur = r.post;
  }
  emit(trace_to_json(tr), out_path);
  return kExitOk;
}

int cmd_check(const CommonArgs& args, const std::string& trace_path,
              const std::string& mode) {
  Scenario sc = load(args);
  Vlsm machine = build_scenario_machine(sc);
  Trace tr = trace_from_json(read_json_file(trace_path));
  TraceMode tm = mode == "valid" ? TraceMode::Valid : TraceMode::Constrained;
  CheckResult res = check_trace(machine, tr, tm, sc.depth, sc.limits);
  json rep{{"mode", mode}, {"ok", res.ok}};
  if (!res.ok) {
    rep["fail_index"] = res.fail_index;
    rep["reason"] = res.reason;
  }
  emit(rep, "");
  return res.ok ? kExitOk : kExitFail;
}

int cmd_detect(const CommonArgs& args, const std::string& input_path,
               const std::string& scope) {
  Scenario sc = load(args);
  json in = read_json_file(input_path);

  Value state;
  if (in.is_object() && in.contains("steps")) {
    Trace tr = trace_from_json(in);
    state = tr.final_state();
  } else if (in.is_object() && in.contains("state")) {
    state = value_from_json(in.at("state"));
  } else {
    state = value_from_json(in);
  }

  EquivocationReport rep;
  if (scope == "local") {
    if (sc.protocol == "countdown") {
      throw ParseError("local detection needs an observer-family scenario");
    }
    if (!is_umo_state(state)) {
      throw ParseError("local detection needs a component state");
    }
    Vlsm component = scenario_components(sc).at(
        static_cast<size_t>(umo_addr(state) >= 1 && umo_addr(state) <= sc.n
                                ? umo_addr(state) - 1
                                : 0));
    rep = local_equivocators(component, state);
  } else {
    Vlsm machine = build_scenario_machine(sc);
    if (sc.adversary == "limited") {
      // Annotated states carry their equivocator set next to the base state.
      if (!(state.is_list() && state.size() == 2)) {
        throw ParseError("global detection on a limited scenario needs an "
                         "annotated state or trace");
      }
    }
    rep = global_equivocators(machine, state);
  }
  emit(report_to_json(rep), "");
  return rep.empty() ? kExitOk : kExitDetected;
}

int cmd_equivalence(const CommonArgs& args, const std::string& kind) {
  Scenario sc = load(args);
  if (sc.protocol == "countdown") {
    throw ParseError("equivalence checks need an observer-family scenario");
  }
  std::vector<Vlsm> components = scenario_components(sc);

  EquivalenceVerdict verdict;
  if (kind == "fixed") {
    EquivalenceOptions opts;
    opts.limits = sc.limits;
    verdict = check_fixed_set_equivalence(components, sc.adversary_set, sc.depth, opts);
  } else if (kind == "limited") {
    EquivalenceOptions opts;
    opts.limits = sc.limits;
    verdict =
        check_limited_equivalence(components, scenario_weights(sc), sc.depth, opts);
  } else if (kind == "byz_fixed" || kind == "byz_limited") {
    ByzantineCheckOptions opts;
    opts.limits = sc.limits;
    opts.probes = umo_structural_states(sc.n, 3);
    if (kind == "byz_fixed") {
      verdict = check_fixed_byzantine(components, sc.adversary_set, sc.depth, opts);
    } else {
      verdict = check_limited_byzantine(components, scenario_weights(sc), sc.depth, opts);
    }
  } else {
    throw ParseError("unknown equivalence kind: " + kind);
  }

  std::string status;
  int code = kExitOk;
  switch (verdict.status) {
    case EquivalenceVerdict::Status::Confirmed:
      status = "confirmed";
      code = kExitOk;
      break;
    case EquivalenceVerdict::Status::Counterexample:
      status = "counterexample";
      code = kExitFail;
      break;
    case EquivalenceVerdict::Status::PreconditionFailed:
      status = "precondition-failed";
      code = kExitPrecondition;
      break;
  }
  json rep{{"kind", kind}, {"status", status}, {"detail", verdict.detail}};
  if (verdict.witness) rep["witness"] = trace_to_json(*verdict.witness);
  emit(rep, "");
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vlsmkit: bounded analysis of validating labelled state "
               "transition and message production systems"};
  app.require_subcommand(1);

  CommonArgs common;
  uint64_t seed = 0;
  std::string out_path, trace_path, input_path;
  std::string mode = "constrained", scope = "local", kind = "fixed";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", common.scenario_path, "scenario file")->required();
    cmd->add_option("--depth", common.depth_override, "override scenario depth");
    cmd->add_option("--cap", common.cap_override,
                    "override the resource cap (also: VLSMKIT_CAP)");
  };

  CLI::App* sim = app.add_subcommand("simulate", "random constrained walk");
  add_common(sim);
  sim->add_option("--seed", seed, "random seed");
  sim->add_option("--out", out_path, "trace output file (default: stdout)");

  CLI::App* chk = app.add_subcommand("check", "check a trace file");
  add_common(chk);
  chk->add_option("--trace", trace_path, "trace file")->required();
  chk->add_option("--mode", mode, "constrained|valid")
      ->check(CLI::IsMember({"constrained", "valid"}));

  CLI::App* det = app.add_subcommand("detect", "equivocation detection");
  add_common(det);
  det->add_option("--input", input_path, "trace or state file")->required();
  det->add_option("--scope", scope, "local|global")
      ->check(CLI::IsMember({"local", "global"}));

  CLI::App* eqc = app.add_subcommand("equivalence", "equivalence-check drivers");
  add_common(eqc);
  eqc->add_option("--kind", kind, "fixed|limited|byz_fixed|byz_limited")
      ->check(CLI::IsMember({"fixed", "limited", "byz_fixed", "byz_limited"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(common, seed, out_path);
    if (chk->parsed()) return cmd_check(common, trace_path, mode);
    if (det->parsed()) return cmd_detect(common, input_path, scope);
    if (eqc->parsed()) return cmd_equivalence(common, kind);
  } catch (const ResourceLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCap;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
