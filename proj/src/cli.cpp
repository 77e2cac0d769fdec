#include "mwprob/cli.hpp"

#include "mwprob/json_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace mwprob {

namespace {

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string fmt(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

std::string join(const std::vector<WorldLabel> &labels) {
    std::string out;
    for (auto w : labels)
        out += (out.empty() ? "" : ";") + std::to_string(w);
    return out;
}

std::string quoted(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

struct Common {
    std::string format = "json";
    std::uint64_t seed = 0;
    std::string theory;
};

std::optional<TheoryKind> theory_flag(const Common &common) {
    if (common.theory.empty())
        return std::nullopt;
    auto t = parse_theory(common.theory);
    if (!t)
        throw InputError("unknown theory \"" + common.theory + "\"");
    return t;
}

class Session {
  public:
    Session(const Common &common, std::ostream &out, std::ostream &err)
        : common_(common), out_(out), err_(err) {}

    bool csv() const { return common_.format == "csv"; }

    WorldState load_state(const std::string &path) {
        std::vector<std::string> warnings;
        auto state = state_from_json(parse_json(read_file(path)),
                                     theory_flag(common_), warnings);
        warn(warnings);
        return state;
    }

    LinearTransform load_transform(const std::string &path, TheoryKind theory) {
        std::vector<std::string> warnings;
        auto parsed = transform_from_json(parse_json(read_file(path)), warnings);
        warn(warnings);
        if (parsed.theory && *parsed.theory != theory)
            throw InputError("transform is for " +
                             std::string(to_string(*parsed.theory)) +
                             " theory, state is " +
                             std::string(to_string(theory)));
        return parsed.transform;
    }

    void emit(Json j) {
        Json doc;
        doc["seed"] = common_.seed;
        for (auto &[key, value] : j.items())
            doc[key] = std::move(value);
        out_ << doc.dump(2) << "\n";
    }

    std::ostream &out() { return out_; }

  private:
    void warn(const std::vector<std::string> &warnings) {
        for (const auto &w : warnings)
            err_ << "warning: " << w << "\n";
    }

    const Common &common_;
    std::ostream &out_;
    std::ostream &err_;
};

ProbabilityRule pick_rule(const std::string &name, TheoryKind theory) {
    if (!name.empty()) {
        auto kind = parse_rule(name);
        if (!kind)
            throw InputError("unknown rule \"" + name + "\"");
        return ProbabilityRule(*kind);
    }
    auto rule = rule_for(theory);
    if (auto *r = std::get_if<ProbabilityRule>(&rule))
        return *r;
    throw InputError(std::string(to_string(theory)) +
                     " theory has no rule obeying the axioms; pass --rule");
}

void require_allowed(const WorldState &state) {
    const auto report = validate_state(state);
    if (!report.valid())
        throw InputError("state is not allowed in " +
                         std::string(to_string(state.theory())) +
                         " theory (" + report.violations.front().rule + ")");
}

void require_allowed(TheoryKind theory, const LinearTransform &t) {
    const auto report = validate_transform(theory, t);
    if (!report.valid())
        throw InputError("transform is not allowed in " +
                         std::string(to_string(theory)) + " theory (" +
                         report.violations.front().rule + ")");
}

int print_certificate(Session &s, const ImpossibilityCertificate &cert) {
    if (s.csv()) {
        s.out() << "source,constraint\n";
        for (const auto &c : cert.constraints)
            s.out() << quoted(c.source) << "," << quoted(c.text) << "\n";
    } else {
        s.emit({{"certificate", to_json(cert)}});
    }
    return kExitCheckFailed;
}

int cmd_validate(Session &s, const std::string &state_path,
                 const std::string &transform_path) {
    const auto state = s.load_state(state_path);
    auto report = validate_state(state);
    std::optional<ValidationReport> transform_report;
    if (!transform_path.empty())
        transform_report = validate_transform(
            state.theory(), s.load_transform(transform_path, state.theory()));
    const bool pass = report.valid() &&
                      (!transform_report || transform_report->valid());
    if (s.csv()) {
        s.out() << "object,rule,labels,magnitude\n";
        for (const auto &v : report.violations)
            s.out() << "state," << v.rule << "," << join(v.labels) << ","
                    << fmt(v.magnitude) << "\n";
        if (transform_report)
            for (const auto &v : transform_report->violations)
                s.out() << "transform," << v.rule << "," << join(v.labels)
                        << "," << fmt(v.magnitude) << "\n";
    } else {
        Json j;
        j["theory"] = to_string(state.theory());
        j["valid"] = pass;
        j["state"] = to_json(report);
        const auto info = support(state);
        j["support"] = {{"size", info.labels.size()}, {"bound", info.bound}};
        if (transform_report)
            j["transform"] = to_json(*transform_report);
        s.emit(std::move(j));
    }
    return pass ? kExitOk : kExitCheckFailed;
}

int cmd_prob(Session &s, const std::string &state_path,
             const std::string &rule_name) {
    const auto state = s.load_state(state_path);
    require_allowed(state);
    if (rule_name.empty()) {
        const auto found = rule_for(state.theory());
        if (const auto *none = std::get_if<Impossibility>(&found))
            return print_certificate(s, none->certificate);
    }
    const auto rule = pick_rule(rule_name, state.theory());
    const auto dist = rule(state);
    if (s.csv()) {
        s.out() << "world,p\n";
        for (const auto &e : dist.entries())
            s.out() << e.world << "," << fmt(e.p) << "\n";
    } else {
        s.emit(to_json(dist, rule.name()));
    }
    return kExitOk;
}

int cmd_axioms(Session &s, const std::string &state_path,
               const std::string &transform_path,
               const std::string &rule_name) {
    const auto state = s.load_state(state_path);
    require_allowed(state);
    const auto t = s.load_transform(transform_path, state.theory());
    require_allowed(state.theory(), t);
    const auto rule = pick_rule(rule_name, state.theory());
    const auto before = rule(state);
    const auto after = rule(apply(t, state));
    const auto axiom2 = check_axiom2(state, before);
    const auto axiom3 = check_axiom3(state, t, rule);
    const auto balances = block_balances(finest_partition(t), before, after);
    const bool pass = axiom2.valid() && axiom3.valid();
    if (s.csv()) {
        s.out() << "block,before,after,gap\n";
        for (const auto &b : balances)
            s.out() << join(b.block) << "," << fmt(b.before) << ","
                    << fmt(b.after) << "," << fmt(std::abs(b.before - b.after))
                    << "\n";
    } else {
        Json j;
        j["rule"] = rule.name();
        j["pass"] = pass;
        j["axiom2"] = to_json(axiom2);
        j["axiom3"] = to_json(axiom3);
        j["blocks"] = to_json(balances);
        s.emit(std::move(j));
    }
    return pass ? kExitOk : kExitCheckFailed;
}

int cmd_flow(Session &s, const std::string &state_path,
             const std::string &transform_path, const std::string &rule_name) {
    const auto state = s.load_state(state_path);
    require_allowed(state);
    const auto t = s.load_transform(transform_path, state.theory());
    require_allowed(state.theory(), t);
    const auto rule = pick_rule(rule_name, state.theory());
    const auto p = rule(state);
    const auto p_prime = rule(apply(t, state));
    const auto result = solve_flow(t, p, p_prime);
    std::optional<ValidationReport> check;
    if (result.feasible)
        check = verify_flow(t, p, p_prime, *result.conditional);
    const bool pass = result.feasible && check->valid();
    if (s.csv()) {
        if (result.feasible) {
            s.out() << "to,from,p\n";
            for (const auto &e : result.conditional->entries())
                s.out() << e.to << "," << e.from << "," << fmt(e.p) << "\n";
        } else {
            s.out() << "cut_columns,cut_targets,deficit\n"
                    << join(result.cut->columns) << ","
                    << join(result.cut->targets) << ","
                    << fmt(result.cut->deficit) << "\n";
        }
    } else {
        Json j;
        j["rule"] = rule.name();
        j["p"] = to_json(p, rule.name())["probabilities"];
        j["p_prime"] = to_json(p_prime, rule.name())["probabilities"];
        j["result"] = to_json(result);
        if (check)
            j["verification"] = to_json(*check);
        s.emit(std::move(j));
    }
    return pass ? kExitOk : kExitCheckFailed;
}

struct DeriveArgs {
    std::string state;
    std::string mode = "general";
    WorldLabel target = 0;
    std::int64_t resolution = 1000;
    std::vector<std::int64_t> sweep;
    std::vector<std::int64_t> m;
    std::vector<WorldLabel> pair;
    bool no_pinch = false;
};

int cmd_derive(Session &s, DeriveArgs a) {
    if (a.mode == "rational") {
        if (a.m.empty())
            throw InputError("rational mode needs --m");
        const auto trace = a.state.empty()
                               ? derive_rational(a.m, a.resolution)
                               : derive_rational(s.load_state(a.state), a.m,
                                                 a.resolution);
        if (s.csv()) {
            s.out() << "world,p,value\n";
            for (const auto &[w, r] : trace.exact_probabilities)
                s.out() << w << "," << to_string(r) << ","
                        << fmt(boost::rational_cast<double>(r)) << "\n";
        } else {
            s.emit({{"trace", to_json(trace)}});
        }
        return kExitOk;
    }

    if (a.state.empty())
        throw InputError(a.mode + " mode needs a state file");
    const auto state = s.load_state(a.state);
    require_allowed(state);

    if (a.mode == "lemma1" || a.mode == "lemma2") {
        if (a.pair.size() != 2)
            throw InputError(a.mode + " mode needs --pair A,B");
        const auto trace = a.mode == "lemma1"
                               ? lemma1_procedure(state, a.pair[0], a.pair[1])
                               : lemma2_procedure(state, a.pair[0], a.pair[1]);
        const bool all_valid =
            std::all_of(trace.steps.begin(), trace.steps.end(),
                        [](const DerivationStep &st) { return st.validated; });
        if (s.csv()) {
            s.out() << "step,description,validated\n";
            for (std::size_t i = 0; i < trace.steps.size(); ++i)
                s.out() << i << "," << quoted(trace.steps[i].description)
                        << "," << (trace.steps[i].validated ? 1 : 0) << "\n";
        } else {
            s.emit({{"trace", to_json(trace)}});
        }
        return all_valid ? kExitOk : kExitCheckFailed;
    }
    if (a.mode != "general")
        throw InputError("unknown derive mode \"" + a.mode + "\"");

    if (a.sweep.empty()) {
        const auto trace = derive(state, a.target, a.resolution, !a.no_pinch);
        if (s.csv()) {
            s.out() << "M,bound,rule_value,gap\n"
                    << a.resolution << "," << fmt(trace.lower_bound) << ","
                    << fmt(trace.rule_value) << ","
                    << fmt(trace.rule_value - trace.lower_bound) << "\n";
        } else {
            s.emit({{"trace", to_json(trace)}});
        }
        return kExitOk;
    }

    std::sort(a.sweep.begin(), a.sweep.end());
    a.sweep.erase(std::unique(a.sweep.begin(), a.sweep.end()), a.sweep.end());
    std::vector<DerivationTrace> traces;
    for (auto m : a.sweep)
        traces.push_back(derive(state, a.target, m, !a.no_pinch));
    if (s.csv()) {
        s.out() << "M,bound,rule_value,gap\n";
        for (const auto &t : traces)
            s.out() << t.resolution << "," << fmt(t.lower_bound) << ","
                    << fmt(t.rule_value) << ","
                    << fmt(t.rule_value - t.lower_bound) << "\n";
    } else {
        Json rows = Json::array();
        for (const auto &t : traces) {
            Json row;
            row["M"] = t.resolution;
            row["bound"] = t.lower_bound;
            row["tight_bound"] = t.tight_bound;
            row["rule_value"] = t.rule_value;
            row["gap"] = t.rule_value - t.lower_bound;
            if (t.pinch)
                row["closure_value"] = t.closure_value;
            rows.push_back(std::move(row));
        }
        s.emit({{"procedure", traces.front().procedure},
                {"target", a.target},
                {"sweep", std::move(rows)}});
    }
    return kExitOk;
}

int cmd_typicality(Session &s, const std::string &theory_name, double q,
                   std::vector<std::int64_t> ns, std::vector<double> epss) {
    const auto theory = parse_theory(theory_name);
    if (!theory)
        throw InputError("unknown theory \"" + theory_name + "\"");
    struct Row {
        std::int64_t n;
        double eps, typical, naive, floor;
    };
    std::vector<Row> rows;
    for (auto n : ns) {
        const auto agg = repeated_experiment(*theory, q, n);
        for (auto eps : epss)
            rows.push_back({n, eps, typical_measure(agg, eps),
                            naive_count_measure(n, q, eps),
                            hoeffding_floor(n, eps)});
    }
    if (s.csv()) {
        s.out() << "n,eps,typical_measure,naive_count_measure,"
                   "hoeffding_floor\n";
        for (const auto &r : rows)
            s.out() << r.n << "," << fmt(r.eps) << "," << fmt(r.typical)
                    << "," << fmt(r.naive) << "," << fmt(r.floor) << "\n";
    } else {
        Json list = Json::array();
        for (const auto &r : rows)
            list.push_back({{"n", r.n},
                            {"eps", r.eps},
                            {"typical_measure", r.typical},
                            {"naive_count_measure", r.naive},
                            {"hoeffding_floor", r.floor}});
        s.emit({{"theory", to_string(*theory)}, {"q", q}, {"rows", list}});
    }
    return kExitOk;
}

} // namespace

int run_cli(std::vector<std::string> args, std::ostream &out,
            std::ostream &err) {
    CLI::App app{"Probability rules for many-worlds theories", "mwprob"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--format", common.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--seed", common.seed,
                   "Seed; every construction is deterministic");
    app.add_option("--theory", common.theory,
                   "quantum | unnormalised | stochastic | discrete");

    std::string state, transform, rule;
    auto *validate = app.add_subcommand("validate", "Check a state (and "
                                                    "transform) is allowed");
    validate->add_option("state", state, "State JSON")->required();
    validate->add_option("--transform", transform, "Transform JSON");

    auto *prob = app.add_subcommand("prob", "Evaluate a probability rule");
    prob->add_option("state", state, "State JSON")->required();
    prob->add_option("--rule", rule, "Rule name (default: the theory's)");

    auto *axioms = app.add_subcommand("axioms", "Check axioms 2 and 3");
    axioms->add_option("state", state, "State JSON")->required();
    axioms->add_option("transform", transform, "Transform JSON")->required();
    axioms->add_option("--rule", rule, "Rule name (default: the theory's)");

    auto *flow = app.add_subcommand("flow", "Solve for a conditional flow");
    flow->add_option("state", state, "State JSON")->required();
    flow->add_option("transform", transform, "Transform JSON")->required();
    flow->add_option("--rule", rule, "Rule name (default: the theory's)");

    DeriveArgs d;
    auto *derive_cmd =
        app.add_subcommand("derive", "Run a derivation and report its bounds");
    derive_cmd->add_option("state", d.state, "State JSON");
    derive_cmd->add_option("--mode", d.mode)
        ->check(CLI::IsMember({"general", "rational", "lemma1", "lemma2"}));
    derive_cmd->add_option("-k,--target", d.target, "Target world");
    derive_cmd->add_option("-M,--resolution", d.resolution, "Resolution M");
    derive_cmd->add_option("--sweep", d.sweep, "Comma-separated M values")
        ->delimiter(',');
    derive_cmd->add_option("--m", d.m, "Comma-separated m_n (rational mode)")
        ->delimiter(',');
    derive_cmd->add_option("--pair", d.pair, "Two worlds (lemma modes)")
        ->delimiter(',');
    derive_cmd->add_flag("--no-pinch", d.no_pinch,
                         "Skip the normalisation pinch");

    auto *counter = app.add_subcommand(
        "counterexample", "Print the discrete impossibility certificate");

    double q = 0.5;
    std::vector<std::int64_t> ns{100};
    std::vector<double> epss{0.1};
    auto *typ = app.add_subcommand("typicality",
                                   "Typical measure of repeated experiments");
    typ->add_option("--q", q, "Per-trial probability of success");
    typ->add_option("--n", ns, "Comma-separated trial counts")->delimiter(',');
    typ->add_option("--eps", epss, "Comma-separated window radii")
        ->delimiter(',');

    for (auto *sub : app.get_subcommands({}))
        sub->fallthrough();

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    Session session(common, out, err);
    try {
        if (*validate)
            return cmd_validate(session, state, transform);
        if (*prob)
            return cmd_prob(session, state, rule);
        if (*axioms)
            return cmd_axioms(session, state, transform, rule);
        if (*flow)
            return cmd_flow(session, state, transform, rule);
        if (*derive_cmd)
            return cmd_derive(session, d);
        if (*counter)
            return print_certificate(session, discrete_counterexample());
        if (*typ)
            return cmd_typicality(session,
                                  common.theory.empty() ? "quantum"
                                                        : common.theory,
                                  q, ns, epss);
    } catch (const InputError &e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const Error &e) {
        // Preconditions of the requested procedure are properties of the
        // input files.
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}

} // namespace mwprob
