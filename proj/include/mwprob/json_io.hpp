#pragma once

#include "mwprob/core.hpp"
#include "mwprob/derivation.hpp"
#include "mwprob/flow.hpp"
#include "mwprob/impossibility.hpp"
#include "mwprob/probability.hpp"
#include "mwprob/transforms.hpp"
#include "mwprob/typicality.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mwprob {

using Json = nlohmann::ordered_json;

/// Malformed or schema-violating input.
class InputError : public Error {
  public:
    using Error::Error;
};

/// Parses JSON text; syntax errors are reported with line and column.
Json parse_json(std::string_view text);

/// `theory` overrides a missing "theory" field and must agree with a
/// present one. Entries of magnitude <= tolerance::kInputZero are dropped
/// and noted in `warnings`.
WorldState state_from_json(const Json &j, std::optional<TheoryKind> theory,
                           std::vector<std::string> &warnings);
Json to_json(const WorldState &state);

struct ParsedTransform {
    std::optional<TheoryKind> theory;
    LinearTransform transform;
};

ParsedTransform transform_from_json(const Json &j,
                                    std::vector<std::string> &warnings);
Json to_json(const LinearTransform &transform, TheoryKind theory);

ProbabilityDistribution distribution_from_json(const Json &j);
Json to_json(const ProbabilityDistribution &dist, std::string_view rule);

Json to_json(const ValidationReport &report);
Json to_json(const Partition &partition);
Json to_json(const ConditionalDistribution &conditional);
Json to_json(const FlowResult &result);
Json to_json(const BranchPlan &plan);
Json to_json(const DerivationTrace &trace);
Json to_json(const ImpossibilityCertificate &certificate);
Json to_json(const std::vector<BlockBalance> &balances);
Json to_json(const AggregatedBranchState &agg);

} // namespace mwprob
