#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "addwav/estimator.hpp"
#include "addwav/oracle.hpp"
#include "addwav/simulator.hpp"
#include "addwav/wavelet_basis.hpp"

namespace addwav {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "addwav/1";

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// FNV-1a 64-bit digest of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

json family_to_json(const WaveletFamily& family);

json estimate_to_json(const ComponentEstimate& est);
ComponentEstimate estimate_from_json(const json& j);

json moment_report_to_json(const MomentReport& r);
json rate_fit_to_json(const RateFit& f);
json process_to_json(const MixingProcessSpec& p);
json scenario_to_json(const ScenarioSpec& s);

/// Dataset with the generating specs embedded for provenance.
struct DatasetFile {
  Dataset data;
  std::optional<MixingProcessSpec> process;
  std::optional<ScenarioSpec> scenario;
  std::string spec_hash;
};

/// Digest of the canonical JSON of (process, scenario).
std::string spec_hash(const MixingProcessSpec& p, const ScenarioSpec& s);

/// CSV with header i,y,x1..xd.
void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in, const DesignDensity& density);

json dataset_to_json(const DatasetFile& file);
DatasetFile dataset_from_json(const json& j);

}  // namespace addwav
