#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

namespace wiman {

// A run manifest is a JSON object:
//   command: analyze | scan | mc-tail | levy | fit
//   series:  {family: exp_sum | file, p, N, file}
//   system:  {kind: none | rademacher | steinhaus | complex_ms | unit, seed, stream}
//   budget:  {grid_per_axis, refine_steps, sample_count, oversample}
//   params:  {delta, delta1, delta2, eps, exponent, ...command specific}
//   workers, out
// Everything written under `out` is a function of the manifest alone.

// Throws UsageError when the manifest does not match the schema.
void validate_manifest(const nlohmann::json& manifest);

// Runs one manifest. Writes manifest.json, CSVs and summary.json into
// manifest["out"] when it is a nonempty path; the summary also goes to
// `out`. Returns 0 on success, 1 for domain errors, 2 for usage errors
// (messages go to `err`).
int run_manifest(const nlohmann::json& manifest, std::ostream& out, std::ostream& err);

// Command-line front end: parses flags into a manifest and runs it.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wiman
