#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "jointrdf/canonical.hpp"
#include "jointrdf/model.hpp"
#include "jointrdf/realization.hpp"
#include "jointrdf/sim.hpp"
#include "jointrdf/solver.hpp"

namespace jointrdf::io {

using json = nlohmann::json;

enum class RateUnit { Nats, Bits };

double convert_rate(double nats, RateUnit unit);
RateUnit parse_rate_unit(const std::string& s);
std::string to_string(RateUnit unit);

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

/// Source schema: { "p1": int, "p2": int, "Q": [[double]] } (row-major).
json source_to_json(const GaussianPairSource& src);
GaussianPairSource source_from_json(const json& j);
GaussianPairSource load_source(const std::filesystem::path& path);

json report_to_json(const SolveReport& rep, RateUnit unit = RateUnit::Nats);

/// { "H": [[...]], "Qv": [[...]] }
json realization_to_json(const TestChannelRealization& r);
TestChannelRealization realization_from_json(const json& j,
                                             const GaussianPairSource& src);

json canonical_to_json(const CanonicalForm& cf);
json condition1_to_json(const Condition1Report& c);
json distortion_check_to_json(const DistortionCheck& c);
json cm_report_to_json(const CmOptimalityReport& c);

}  // namespace jointrdf::io
