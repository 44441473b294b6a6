#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "igs/algorithm.hpp"
#include "igs/collective.hpp"
#include "igs/dynamics.hpp"
#include "igs/hilbert.hpp"
#include "igs/tuner.hpp"

namespace igs::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

std::string library_version();

json to_json(const IntegratorOptions& options);
IntegratorOptions integrator_from_json(const json& j, IntegratorOptions defaults = {});

json to_json(const PulseParams& pulse, int n_ions);
std::string format_detuning_scope(DetuningScope scope);
DetuningScope parse_detuning_scope(const std::string& name);

// {"N", "marked", "oracle": {...}, "reflection": {...}, "steps", "seed", ...}
json to_json(const AlgorithmConfig& config);
// Missing keys keep the values of `defaults`; pulse addressing is derived
// from N and the marked state, so a re-ingested provenance block always
// yields a configuration that passes validate().
AlgorithmConfig algorithm_config_from_json(const json& j, AlgorithmConfig defaults = {});

json to_json(const TuneTarget& target);
TuneTarget tune_target_from_json(const json& j, TuneTarget defaults = {});

json to_json(const PhaseReport& report);

// RunResult with the full configuration under "provenance".
json run_summary(const AlgorithmConfig& config, const RunResult& result);
json tune_summary(const TuneTarget& target, const TuneResult& result);

// Columns: step, tau_elapsed, marked_population, norm.
void write_trace_csv(std::ostream& out, const RunResult& result);

// One tab-separated line per ket: index, ion bits (ion 1 leftmost), n_i, n_p.
void write_basis_tsv(std::ostream& out, const SectorBasis& basis);

// [{"j", "N_j", "couplings"}] for j = N/2 .. 0.
json chains_json(const IonConfig& ions);

// Fails with ConfigError on unreadable or malformed files.
json read_json_file(const std::string& path);

}  // namespace igs::io
