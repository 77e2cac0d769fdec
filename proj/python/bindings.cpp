#include "mwprob/cli.hpp"
#include "mwprob/json_io.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace mwprob;

namespace {

WorldState load_state(const std::string &text) {
    std::vector<std::string> warnings;
    return state_from_json(parse_json(text), std::nullopt, warnings);
}

LinearTransform load_transform(const std::string &text) {
    std::vector<std::string> warnings;
    return transform_from_json(parse_json(text), warnings).transform;
}

ProbabilityRule rule_named(const std::optional<std::string> &name,
                           TheoryKind theory) {
    if (name) {
        auto kind = parse_rule(*name);
        if (!kind)
            throw InputError("unknown rule \"" + *name + "\"");
        return ProbabilityRule(*kind);
    }
    auto found = rule_for(theory);
    if (auto *r = std::get_if<ProbabilityRule>(&found))
        return *r;
    throw WrongTheoryError(std::string(to_string(theory)) +
                           " theory has no rule obeying the axioms");
}

TheoryKind theory_named(const std::string &name) {
    auto t = parse_theory(name);
    if (!t)
        throw InputError("unknown theory \"" + name + "\"");
    return *t;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Probability rules for many-worlds theories";

    static py::exception<Error> error(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error &e) {
            py::set_error(error, e.what());
        }
    });

    // JSON in, JSON out; the package wraps these with dicts.
    m.def("validate", [](const std::string &state, std::optional<std::string> transform) {
        std::vector<std::string> warnings;
        const auto s = state_from_json(parse_json(state), std::nullopt, warnings);
        Json j;
        j["state"] = to_json(validate_state(s));
        if (transform)
            j["transform"] = to_json(validate_transform(s.theory(), load_transform(*transform)));
        return j.dump();
    }, py::arg("state"), py::arg("transform") = py::none());

    m.def("probabilities", [](const std::string &state, std::optional<std::string> rule) {
        const auto s = load_state(state);
        const auto r = rule_named(rule, s.theory());
        return to_json(r(s), r.name()).dump();
    }, py::arg("state"), py::arg("rule") = py::none());

    m.def("apply", [](const std::string &transform, const std::string &state) {
        return to_json(apply(load_transform(transform), load_state(state))).dump();
    });

    m.def("check_axiom3", [](const std::string &state, const std::string &transform,
                             std::optional<std::string> rule) {
        const auto s = load_state(state);
        return to_json(check_axiom3(s, load_transform(transform), rule_named(rule, s.theory())))
            .dump();
    }, py::arg("state"), py::arg("transform"), py::arg("rule") = py::none());

    m.def("solve_flow", [](const std::string &state, const std::string &transform,
                           std::optional<std::string> rule) {
        const auto s = load_state(state);
        const auto t = load_transform(transform);
        const auto r = rule_named(rule, s.theory());
        return to_json(solve_flow(t, r(s), r(apply(t, s)))).dump();
    }, py::arg("state"), py::arg("transform"), py::arg("rule") = py::none());

    m.def("derive", [](const std::string &state, WorldLabel k, std::int64_t resolution,
                       bool pinch) {
        return to_json(derive(load_state(state), k, resolution, pinch)).dump();
    }, py::arg("state"), py::arg("k"), py::arg("resolution"), py::arg("pinch") = true);

    m.def("derive_rational", [](const std::vector<std::int64_t> &counts,
                                std::int64_t resolution) {
        std::vector<std::tuple<WorldLabel, std::int64_t, std::int64_t>> out;
        for (const auto &[w, r] : derive_rational(counts, resolution).exact_probabilities)
            out.emplace_back(w, r.numerator(), r.denominator());
        return out;
    }, "Exact (world, numerator, denominator) triples.");

    m.def("lemma_procedure", [](const std::string &state, int which, WorldLabel a,
                                WorldLabel b) {
        const auto s = load_state(state);
        return to_json(which == 1 ? lemma1_procedure(s, a, b) : lemma2_procedure(s, a, b))
            .dump();
    });

    m.def("counterexample", [] { return to_json(discrete_counterexample()).dump(); });

    m.def("typical_measure", [](const std::string &theory, double q, std::int64_t n,
                                double eps) {
        return typical_measure(repeated_experiment(theory_named(theory), q, n), eps);
    });
    m.def("naive_count_measure", &naive_count_measure);
    m.def("hoeffding_floor", &hoeffding_floor);

    m.def("run_cli", [](std::vector<std::string> args) {
        std::ostringstream out, err;
        const int code = run_cli(std::move(args), out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, "Runs the command-line tool in process; returns (exit code, stdout, stderr).");
}
