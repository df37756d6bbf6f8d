#pragma once

#include "quantrel/incompatibility.hpp"
#include "quantrel/nonlocality.hpp"
#include "quantrel/scenario.hpp"
#include "quantrel/steering.hpp"

#include <json.hpp>

#include <string>

namespace quantrel::io {

using json = nlohmann::json;

/// Parses a file; syntax errors report line and column.
json load_json(const std::string& path);
json parse_json(const std::string& text, const std::string& source = "<input>");
void save_json(const std::string& path, const json& j);

/// Matrices are row lists of [re, im] pairs.
json to_json(const CMatrix& m);
json to_json(const HermitianOperator& h);
HermitianOperator operator_from_json(const json& j, const std::string& path);

/// {"m", "n", "d", "effects": [x][a] matrix}
json to_json(const MeasurementSet& m);
MeasurementSet measurement_set_from_json(const json& j, const std::string& path = "");

/// {"m", "n", "d", "members": [x][a] matrix}
json to_json(const Assemblage& a);
Assemblage assemblage_from_json(const json& j, const std::string& path = "");

/// {"mA", "nA", "mB", "nB", "table": [x][y][a][b], "signalling": bool}
json to_json(const Behaviour& b);
Behaviour behaviour_from_json(const json& j, const std::string& path = "");

/// {"counts": [x][y][a][b] nonnegative integers}; each setting normalized by its total.
/// The result may signal.
Behaviour behaviour_from_counts(const json& j, const std::string& path = "");

/// Problem inputs accepted by the CLI. Measurements: a measurement-set object or
/// {"measurements": spec}. Assemblage: an assemblage object or {"state": spec, "alice": spec}.
/// Behaviour: a behaviour object, a counts object, or {"state", "alice", "bob"} specs.
MeasurementSet measurements_from_input(const json& j);
Assemblage assemblage_from_input(const json& j);
Behaviour behaviour_from_input(const json& j);

json to_json(const IncompatCertificate& c);
json to_json(const SteeringCertificate& c);
json to_json(const BellCertificate& c);
json to_json(const IncompatResult& r);
json to_json(const SteeringResult& r);
json to_json(const NonlocalityResult& r);
json to_json(const LocalModel& m);
json to_json(const NsProjection& p);

}  // namespace quantrel::io
