#pragma once

//
// JSON schemas and deterministic serialization. Every floating-point value
// is printed with 17 significant digits so the text round-trips to the
// identical double, and identical runs produce identical bytes.
//

#include <json.hpp>

#include <stdexcept>
#include <string>

#include "vmass/michell.hpp"
#include "vmass/mollify.hpp"

namespace vmass {

using json = nlohmann::ordered_json;

// input violates a documented schema (exit code 3 at the CLI)
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string dump_json(const json& j, int indent = 2);
json parse_json_text(const std::string& text);  // wraps parse errors with line/column

struct MichellProblem {
    GroundStructure gs;
    LoadCase lc;
};

MichellProblem parse_michell_problem(const json& j);

json michell_result_payload(const GroundStructure& gs, const TrussSolution& sol,
                            const LimitShape& shape);
std::string michell_result_csv(const GroundStructure& gs, const TrussSolution& sol,
                               const LimitShape& shape);

DiscreteMeasure parse_matrix_measure(const json& j);
ScalarMeasure parse_scalar_measure(const json& j);

// result envelope shared by all subcommands; the timestamp honors
// SOURCE_DATE_EPOCH and is null otherwise, keeping output bytes stable
json make_envelope(const json& config_echo, const json& payload, const json& checks);

SymMat parse_sym_mat(const json& j);  // row-major [[...],[...]]
json sym_mat_to_json(const SymMat& m);

}  // namespace vmass
