#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dbandit/env.hpp"
#include "dbandit/result.hpp"

namespace dbandit::harness {

enum class Protocol {
    kDemab,
    kDemabNoBurnin,
    kMabImmediate,
    kMabIndependent,
    kDelb,
    kDisLinUcb,
    kLinUcbPooled,
};

const char* to_string(Protocol p);
Protocol protocol_from_string(const std::string& name);
bool is_mab_protocol(Protocol p);

enum class ActionGeometry { kSphere, kCluster, kExplicit };

struct LinearSpec {
    int dim = 0;
    double noise = 1.0;
    std::vector<double> theta;
    ActionGeometry geometry = ActionGeometry::kSphere;
    int num_actions = 0;
    std::uint64_t action_seed = 1;
    double cluster_spread = 0.5;
    std::vector<std::vector<double>> explicit_actions;
};

struct RunConfig {
    Protocol protocol = Protocol::kDemab;
    int agents = 1;               // M
    std::int64_t horizon = 0;     // T
    std::uint64_t seed = 1;
    int replications = 1;
    std::optional<std::vector<double>> mab_means;
    std::optional<LinearSpec> linear;
};

// Parses the key/value experiment format. Unknown keys, unknown sections and
// duplicate keys are hard errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& file);

// Canonical text form; parse(serialize(parse(x))) == parse(x).
std::string serialize_config(const RunConfig& config);

// Throws std::invalid_argument with a diagnostic when the config is
// inconsistent (bad ranges, protocol/instance mismatch, ...).
void validate(const RunConfig& config);

env::MabInstance build_mab_instance(const RunConfig& config);
env::LinearInstance build_linear_instance(const RunConfig& config);

// Executes `replications` independent runs with seeds seed, seed+1, ...
std::vector<RunResult> run(const RunConfig& config);

// Writes <dir>/steps.csv (seed,step,cum_regret,cum_comm; one row per
// replication and step) and <dir>/summary.csv
// (seed,protocol,M,T,final_regret,final_comm). Fixed 17-significant-digit
// float formatting; byte-identical for identical inputs.
void emit_csv(const std::vector<RunResult>& results, const RunConfig& config,
              const std::filesystem::path& dir);

struct SweepRow {
    std::int64_t horizon = 0;
    double mean_final_regret = 0.0;
    double mean_final_comm = 0.0;
};

// Runs the protocol at each horizon with matched seeds.
std::vector<SweepRow> sweep(const RunConfig& base,
                            const std::vector<std::int64_t>& horizons);

}  // namespace dbandit::harness
