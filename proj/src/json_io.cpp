#include "mwprob/json_io.hpp"

#include <cmath>

namespace mwprob {

namespace {

const Json &field(const Json &j, const char *name, std::string_view where) {
    if (!j.is_object() || !j.contains(name))
        throw InputError(std::string(where) + ": missing \"" + name + "\"");
    return j.at(name);
}

WorldLabel label_from(const Json &j, const char *name, std::string_view where) {
    const auto &v = field(j, name, where);
    if (v.is_number_unsigned()) {
        const auto x = v.get<std::uint64_t>();
        if (x > kMaxWorldLabel)
            throw InputError(std::string(where) + ": label " +
                             std::to_string(x) + " exceeds 2^63-1");
        return x;
    }
    throw InputError(std::string(where) + ": \"" + name +
                     "\" must be a non-negative integer");
}

double number_from(const Json &j, const char *name, std::string_view where,
                   std::optional<double> fallback = {}) {
    if (j.is_object() && !j.contains(name) && fallback)
        return *fallback;
    const auto &v = field(j, name, where);
    if (!v.is_number())
        throw InputError(std::string(where) + ": \"" + name +
                         "\" must be a number");
    return v.get<double>();
}

TheoryKind theory_from(const Json &j, std::optional<TheoryKind> given,
                       std::string_view where) {
    std::optional<TheoryKind> stated;
    if (j.is_object() && j.contains("theory")) {
        const auto &t = j.at("theory");
        if (!t.is_string())
            throw InputError(std::string(where) +
                             ": \"theory\" must be a string");
        stated = parse_theory(t.get<std::string>());
        if (!stated)
            throw InputError(std::string(where) + ": unknown theory \"" +
                             t.get<std::string>() + "\"");
    }
    if (stated && given && *stated != *given)
        throw InputError(std::string(where) + ": file says " +
                         std::string(to_string(*stated)) + ", expected " +
                         std::string(to_string(*given)));
    if (stated)
        return *stated;
    if (given)
        return *given;
    throw InputError(std::string(where) + ": no theory given");
}

const Json &array_field(const Json &j, const char *name,
                        std::string_view where) {
    const auto &a = field(j, name, where);
    if (!a.is_array())
        throw InputError(std::string(where) + ": \"" + name +
                         "\" must be an array");
    return a;
}

Json labels_json(const std::vector<WorldLabel> &labels) {
    Json a = Json::array();
    for (auto w : labels)
        a.push_back(w);
    return a;
}

} // namespace

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error &e) {
        std::size_t line = 1, column = 1;
        const std::size_t stop = std::min<std::size_t>(
            e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::string reason = e.what();
        if (auto colon = reason.rfind(": "); colon != std::string::npos)
            reason = reason.substr(colon + 2);
        throw InputError("malformed JSON at line " + std::to_string(line) +
                         ", column " + std::to_string(column) + ": " + reason);
    }
}

WorldState state_from_json(const Json &j, std::optional<TheoryKind> theory,
                           std::vector<std::string> &warnings) {
    const auto kind = theory_from(j, theory, "state");
    const auto &amps = array_field(j, "amplitudes", "state");
    if (amps.empty())
        throw InputError("state: \"amplitudes\" is empty");

    try {
        if (kind == TheoryKind::Discrete) {
            std::vector<std::pair<WorldLabel, std::int64_t>> counts;
            for (const auto &a : amps) {
                const auto world = label_from(a, "world", "state entry");
                const auto &c = field(a, "count", "state entry");
                if (!c.is_number_integer())
                    throw InputError("state entry: \"count\" must be an "
                                     "integer");
                const auto value = c.get<std::int64_t>();
                if (value == 0) {
                    warnings.push_back("dropped zero count at world " +
                                       std::to_string(world));
                    continue;
                }
                counts.emplace_back(world, value);
            }
            if (counts.empty())
                throw InputError("state: every amplitude is zero");
            return WorldState::discrete(std::move(counts));
        }

        std::vector<StateEntry> entries;
        for (const auto &a : amps) {
            const auto world = label_from(a, "world", "state entry");
            const Amplitude value(number_from(a, "re", "state entry"),
                                  number_from(a, "im", "state entry", 0.0));
            if (std::abs(value) <= tolerance::kInputZero) {
                warnings.push_back("dropped negligible amplitude at world " +
                                   std::to_string(world));
                continue;
            }
            entries.push_back({world, value});
        }
        if (entries.empty())
            throw InputError("state: every amplitude is zero");
        return WorldState(kind, std::move(entries));
    } catch (const PreconditionError &e) {
        throw InputError(std::string("state: ") + e.what());
    }
}

Json to_json(const WorldState &state) {
    Json amps = Json::array();
    const auto entries = state.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        Json a;
        a["world"] = entries[i].world;
        if (state.theory() == TheoryKind::Discrete) {
            a["count"] = state.counts()[i];
        } else {
            a["re"] = entries[i].amplitude.real();
            if (is_quantum_kind(state.theory()))
                a["im"] = entries[i].amplitude.imag();
        }
        amps.push_back(std::move(a));
    }
    Json j;
    j["theory"] = to_string(state.theory());
    j["amplitudes"] = std::move(amps);
    return j;
}

ParsedTransform transform_from_json(const Json &j,
                                    std::vector<std::string> &warnings) {
    ParsedTransform out;
    if (j.is_object() && j.contains("theory"))
        out.theory = theory_from(j, std::nullopt, "transform");
    const auto &list = array_field(j, "entries", "transform");
    bool identity_outside = true;
    if (j.contains("identity_outside")) {
        if (!j.at("identity_outside").is_boolean())
            throw InputError("transform: \"identity_outside\" must be a "
                             "boolean");
        identity_outside = j.at("identity_outside").get<bool>();
    }
    std::vector<TransformEntry> entries;
    for (const auto &e : list) {
        const auto row = label_from(e, "i", "transform entry");
        const auto col = label_from(e, "j", "transform entry");
        const Amplitude value(number_from(e, "re", "transform entry"),
                              number_from(e, "im", "transform entry", 0.0));
        if (std::abs(value) <= tolerance::kInputZero) {
            warnings.push_back("dropped negligible entry (" +
                               std::to_string(row) + ", " +
                               std::to_string(col) + ")");
            continue;
        }
        entries.push_back({row, col, value});
    }
    try {
        out.transform = LinearTransform(std::move(entries), identity_outside);
    } catch (const PreconditionError &e) {
        throw InputError(std::string("transform: ") + e.what());
    }
    return out;
}

Json to_json(const LinearTransform &transform, TheoryKind theory) {
    Json entries = Json::array();
    for (const auto &e : transform.entries()) {
        Json a;
        a["i"] = e.row;
        a["j"] = e.col;
        a["re"] = e.value.real();
        if (is_quantum_kind(theory))
            a["im"] = e.value.imag();
        entries.push_back(std::move(a));
    }
    Json j;
    j["theory"] = to_string(theory);
    j["entries"] = std::move(entries);
    j["identity_outside"] = transform.identity_outside();
    return j;
}

ProbabilityDistribution distribution_from_json(const Json &j) {
    const auto &list = array_field(j, "probabilities", "distribution");
    std::vector<ProbabilityDistribution::Entry> entries;
    for (const auto &e : list) {
        const auto world = label_from(e, "world", "distribution entry");
        const double p = number_from(e, "p", "distribution entry");
        entries.push_back({world, p});
    }
    try {
        return ProbabilityDistribution(std::move(entries));
    } catch (const PreconditionError &e) {
        throw InputError(std::string("distribution: ") + e.what());
    }
}

Json to_json(const ProbabilityDistribution &dist, std::string_view rule) {
    Json list = Json::array();
    for (const auto &e : dist.entries())
        list.push_back({{"world", e.world}, {"p", e.p}});
    Json j;
    j["rule"] = rule;
    j["probabilities"] = std::move(list);
    return j;
}

Json to_json(const ValidationReport &report) {
    Json list = Json::array();
    for (const auto &v : report.violations)
        list.push_back({{"rule", v.rule},
                        {"labels", labels_json(v.labels)},
                        {"magnitude", v.magnitude}});
    return {{"valid", report.valid()}, {"violations", std::move(list)}};
}

Json to_json(const Partition &partition) {
    Json blocks = Json::array();
    for (const auto &b : partition.blocks)
        blocks.push_back(labels_json(b));
    return blocks;
}

Json to_json(const ConditionalDistribution &conditional) {
    Json list = Json::array();
    for (const auto &e : conditional.entries())
        list.push_back({{"to", e.to}, {"from", e.from}, {"p", e.p}});
    return list;
}

Json to_json(const FlowResult &result) {
    Json j;
    j["feasible"] = result.feasible;
    j["max_flow"] = result.max_flow;
    if (result.conditional)
        j["conditional"] = to_json(*result.conditional);
    if (result.cut)
        j["cut"] = {{"columns", labels_json(result.cut->columns)},
                    {"targets", labels_json(result.cut->targets)},
                    {"deficit", result.cut->deficit}};
    return j;
}

Json to_json(const BranchPlan &plan) {
    Json worlds = Json::array();
    for (const auto &w : plan.worlds)
        worlds.push_back({{"world", w.source},
                          {"m", w.whole},
                          {"eps", w.remainder},
                          {"phi", w.phase},
                          {"weight", w.weight},
                          {"fan_start", plan.fan_start(w.source)}});
    Json j;
    j["theory"] = to_string(plan.theory);
    j["N"] = plan.world_count;
    j["M"] = plan.resolution;
    j["stride"] = plan.stride;
    j["X"] = plan.total_weight;
    j["worlds"] = std::move(worlds);
    return j;
}

Json to_json(const DerivationTrace &trace) {
    Json steps = Json::array();
    for (const auto &s : trace.steps) {
        Json step;
        step["description"] = s.description;
        step["digest"] = s.digest;
        step["partition"] = to_json(s.partition);
        step["validated"] = s.validated;
        if (s.snapshot)
            step["state"] = to_json(*s.snapshot);
        steps.push_back(std::move(step));
    }
    Json inferences = Json::array();
    for (const auto &i : trace.inferences)
        inferences.push_back({{"by", i.by}, {"statement", i.statement}});

    Json j;
    j["procedure"] = trace.procedure;
    j["theory"] = to_string(trace.theory);
    j["target"] = trace.target;
    if (trace.plan) {
        j["M"] = trace.resolution;
        j["N"] = trace.world_count;
        j["plan"] = to_json(*trace.plan);
        j["delta"] = trace.delta;
        j["delta_tight"] = trace.delta_tight;
        j["lower_bound"] = trace.lower_bound;
        j["tight_bound"] = trace.tight_bound;
        j["rule_value"] = trace.rule_value;
    }
    if (trace.pinch) {
        j["pinch"] = {trace.pinch->first, trace.pinch->second};
        j["closure_value"] = trace.closure_value;
    }
    j["exact"] = trace.exact;
    if (trace.exact) {
        Json exact = Json::array();
        for (const auto &[w, r] : trace.exact_probabilities)
            exact.push_back({{"world", w}, {"p", to_string(r)}});
        j["exact_probabilities"] = std::move(exact);
    }
    j["steps"] = std::move(steps);
    j["inferences"] = std::move(inferences);
    j["conclusion"] = trace.conclusion;
    return j;
}

Json to_json(const ImpossibilityCertificate &certificate) {
    Json constraints = Json::array();
    for (const auto &c : certificate.constraints) {
        Json coefficients = Json::array();
        for (const auto &x : c.coefficients)
            coefficients.push_back(to_string(x));
        constraints.push_back({{"source", c.source},
                               {"text", c.text},
                               {"coefficients", std::move(coefficients)},
                               {"rhs", to_string(c.rhs)}});
    }
    const auto &w = certificate.witness;
    Json j;
    j["state"] = to_json(certificate.state);
    j["transform"] = to_json(certificate.transform, TheoryKind::Discrete);
    j["symbols"] = certificate.symbols;
    j["constraints"] = std::move(constraints);
    j["infeasible"] = certificate.infeasible;
    j["witness"] = {{"pre", {{"symbol", w.pre_symbol},
                             {"value", to_string(w.pre_value)}}},
                    {"post", {{"symbol", w.post_symbol},
                              {"value", to_string(w.post_value)}}},
                    {"constraint", w.constraint}};
    return j;
}

Json to_json(const std::vector<BlockBalance> &balances) {
    Json list = Json::array();
    for (const auto &b : balances)
        list.push_back({{"block", labels_json(b.block)},
                        {"before", b.before},
                        {"after", b.after}});
    return list;
}

Json to_json(const AggregatedBranchState &agg) {
    Json j;
    j["theory"] = to_string(agg.theory);
    j["trials"] = agg.trials;
    j["q"] = agg.q;
    j["class_weights"] = agg.class_weights;
    return j;
}

} // namespace mwprob
