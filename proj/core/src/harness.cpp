#include "dbandit/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dbandit/linear.hpp"
#include "dbandit/mab.hpp"
#include "dbandit/rng.hpp"

namespace dbandit::harness {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return s.substr(b, e - b);
}

std::vector<double> parse_reals(const std::string& value, const std::string& key) {
    std::vector<double> out;
    std::istringstream in(value);
    double v = 0.0;
    while (in >> v) {
        out.push_back(v);
    }
    if (!in.eof()) {
        throw std::invalid_argument("config: bad real list for key '" + key + "'");
    }
    return out;
}

std::int64_t parse_int(const std::string& value, const std::string& key) {
    std::size_t pos = 0;
    std::int64_t v = 0;
    try {
        v = std::stoll(value, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for key '" + key + "'");
    }
    if (pos != value.size()) {
        throw std::invalid_argument("config: bad integer for key '" + key + "'");
    }
    return v;
}

double parse_real(const std::string& value, const std::string& key) {
    const auto v = parse_reals(value, key);
    if (v.size() != 1) {
        throw std::invalid_argument("config: expected one real for key '" + key + "'");
    }
    return v[0];
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

const char* to_string(Protocol p) {
    switch (p) {
        case Protocol::kDemab: return "demab";
        case Protocol::kDemabNoBurnin: return "demab-no-burnin";
        case Protocol::kMabImmediate: return "mab-immediate";
        case Protocol::kMabIndependent: return "mab-independent";
        case Protocol::kDelb: return "delb";
        case Protocol::kDisLinUcb: return "dislinucb";
        case Protocol::kLinUcbPooled: return "linucb-pooled";
    }
    return "?";
}

Protocol protocol_from_string(const std::string& name) {
    for (Protocol p : {Protocol::kDemab, Protocol::kDemabNoBurnin,
                       Protocol::kMabImmediate, Protocol::kMabIndependent,
                       Protocol::kDelb, Protocol::kDisLinUcb,
                       Protocol::kLinUcbPooled}) {
        if (name == to_string(p)) {
            return p;
        }
    }
    throw std::invalid_argument("config: unknown protocol '" + name + "'");
}

bool is_mab_protocol(Protocol p) {
    return p == Protocol::kDemab || p == Protocol::kDemabNoBurnin ||
           p == Protocol::kMabImmediate || p == Protocol::kMabIndependent;
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    LinearSpec lin;
    bool saw_linear = false;
    bool saw_mab = false;
    std::string section;
    std::map<std::string, std::string> seen;
    std::map<int, std::vector<double>> explicit_actions;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) {
            raw = raw.substr(0, hash);
        }
        const std::string line = trim(raw);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section == "mab") {
                saw_mab = true;
            } else if (section == "linear") {
                saw_linear = true;
            } else {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unknown section '" + section + "'");
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string full_key = section.empty() ? key : section + "." + key;
        if (!seen.emplace(full_key, value).second) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": duplicate key '" + full_key + "'");
        }

        if (section.empty()) {
            if (key == "protocol") {
                cfg.protocol = protocol_from_string(value);
            } else if (key == "agents") {
                cfg.agents = static_cast<int>(parse_int(value, key));
            } else if (key == "horizon") {
                cfg.horizon = parse_int(value, key);
            } else if (key == "seed") {
                cfg.seed = static_cast<std::uint64_t>(parse_int(value, key));
            } else if (key == "replications") {
                cfg.replications = static_cast<int>(parse_int(value, key));
            } else {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unknown key '" + key + "'");
            }
        } else if (section == "mab") {
            if (key == "means") {
                cfg.mab_means = parse_reals(value, key);
            } else {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unknown key 'mab." + key + "'");
            }
        } else {  // linear
            if (key == "dim") {
                lin.dim = static_cast<int>(parse_int(value, key));
            } else if (key == "noise") {
                lin.noise = parse_real(value, key);
            } else if (key == "theta") {
                lin.theta = parse_reals(value, key);
            } else if (key == "actions") {
                if (value == "sphere") {
                    lin.geometry = ActionGeometry::kSphere;
                } else if (value == "cluster") {
                    lin.geometry = ActionGeometry::kCluster;
                } else if (value == "explicit") {
                    lin.geometry = ActionGeometry::kExplicit;
                } else {
                    throw std::invalid_argument(
                        "config line " + std::to_string(line_no) +
                        ": actions must be sphere, cluster or explicit");
                }
            } else if (key == "num_actions") {
                lin.num_actions = static_cast<int>(parse_int(value, key));
            } else if (key == "action_seed") {
                lin.action_seed = static_cast<std::uint64_t>(parse_int(value, key));
            } else if (key == "cluster_spread") {
                lin.cluster_spread = parse_real(value, key);
            } else if (key.rfind("action_", 0) == 0) {
                const std::string idx_str = key.substr(7);
                std::size_t pos = 0;
                int idx = -1;
                try {
                    idx = std::stoi(idx_str, &pos);
                } catch (const std::exception&) {
                    pos = std::string::npos;
                }
                if (pos != idx_str.size() || idx < 0) {
                    throw std::invalid_argument("config line " + std::to_string(line_no) +
                                                ": unknown key 'linear." + key + "'");
                }
                explicit_actions[idx] = parse_reals(value, key);
            } else {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unknown key 'linear." + key + "'");
            }
        }
    }

    if (saw_linear) {
        if (!explicit_actions.empty()) {
            lin.explicit_actions.resize(explicit_actions.size());
            for (const auto& [idx, vec] : explicit_actions) {
                if (idx >= static_cast<int>(lin.explicit_actions.size())) {
                    throw std::invalid_argument(
                        "config: explicit action indices must be 0..n-1 with no gaps");
                }
                lin.explicit_actions[static_cast<std::size_t>(idx)] = vec;
            }
            if (lin.num_actions == 0) {
                lin.num_actions = static_cast<int>(lin.explicit_actions.size());
            }
        }
        cfg.linear = lin;
    }
    if (!saw_mab) {
        cfg.mab_means.reset();
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& config) {
    std::ostringstream out;
    out << "protocol = " << to_string(config.protocol) << "\n";
    out << "agents = " << config.agents << "\n";
    out << "horizon = " << config.horizon << "\n";
    out << "seed = " << config.seed << "\n";
    out << "replications = " << config.replications << "\n";
    if (config.mab_means) {
        out << "\n[mab]\nmeans =";
        for (double m : *config.mab_means) {
            out << " " << format_double(m);
        }
        out << "\n";
    }
    if (config.linear) {
        const auto& lin = *config.linear;
        out << "\n[linear]\n";
        out << "dim = " << lin.dim << "\n";
        out << "noise = " << format_double(lin.noise) << "\n";
        out << "theta =";
        for (double v : lin.theta) {
            out << " " << format_double(v);
        }
        out << "\n";
        switch (lin.geometry) {
            case ActionGeometry::kSphere:
                out << "actions = sphere\n";
                break;
            case ActionGeometry::kCluster:
                out << "actions = cluster\n";
                out << "cluster_spread = " << format_double(lin.cluster_spread) << "\n";
                break;
            case ActionGeometry::kExplicit:
                out << "actions = explicit\n";
                break;
        }
        out << "num_actions = " << lin.num_actions << "\n";
        out << "action_seed = " << lin.action_seed << "\n";
        if (lin.geometry == ActionGeometry::kExplicit) {
            for (std::size_t i = 0; i < lin.explicit_actions.size(); ++i) {
                out << "action_" << i << " =";
                for (double v : lin.explicit_actions[i]) {
                    out << " " << format_double(v);
                }
                out << "\n";
            }
        }
    }
    return out.str();
}

void validate(const RunConfig& config) {
    if (config.agents < 1) {
        throw std::invalid_argument("config: agents must be >= 1");
    }
    if (config.horizon <= std::max<std::int64_t>(config.agents, 2)) {
        throw std::invalid_argument("config: horizon must exceed max(agents, 2)");
    }
    if (config.replications < 1) {
        throw std::invalid_argument("config: replications must be >= 1");
    }
    if (is_mab_protocol(config.protocol)) {
        if (!config.mab_means) {
            throw std::invalid_argument(
                "config: protocol '" + std::string(to_string(config.protocol)) +
                "' needs a [mab] section");
        }
        build_mab_instance(config);
    } else {
        if (!config.linear) {
            throw std::invalid_argument(
                "config: protocol '" + std::string(to_string(config.protocol)) +
                "' needs a [linear] section");
        }
        build_linear_instance(config);
    }
}

env::MabInstance build_mab_instance(const RunConfig& config) {
    if (!config.mab_means) {
        throw std::invalid_argument("config: missing [mab] section");
    }
    return env::MabInstance(*config.mab_means);
}

env::LinearInstance build_linear_instance(const RunConfig& config) {
    if (!config.linear) {
        throw std::invalid_argument("config: missing [linear] section");
    }
    const auto& lin = *config.linear;
    if (lin.dim < 1) {
        throw std::invalid_argument("config: linear.dim must be >= 1");
    }
    if (static_cast<int>(lin.theta.size()) != lin.dim) {
        throw std::invalid_argument("config: linear.theta must have dim entries");
    }
    if (lin.num_actions < 1) {
        throw std::invalid_argument("config: linear.num_actions must be >= 1");
    }
    Eigen::VectorXd theta(lin.dim);
    for (int i = 0; i < lin.dim; ++i) {
        theta(i) = lin.theta[static_cast<std::size_t>(i)];
    }
    std::vector<Eigen::VectorXd> actions;
    actions.reserve(static_cast<std::size_t>(lin.num_actions));
    if (lin.geometry == ActionGeometry::kExplicit) {
        if (static_cast<int>(lin.explicit_actions.size()) != lin.num_actions) {
            throw std::invalid_argument(
                "config: explicit actions require action_0..action_(n-1)");
        }
        for (const auto& row : lin.explicit_actions) {
            if (static_cast<int>(row.size()) != lin.dim) {
                throw std::invalid_argument("config: explicit action has wrong dim");
            }
            Eigen::VectorXd x(lin.dim);
            for (int i = 0; i < lin.dim; ++i) {
                x(i) = row[static_cast<std::size_t>(i)];
            }
            actions.push_back(std::move(x));
        }
    } else {
        RandomStream rng(lin.action_seed);
        for (int a = 0; a < lin.num_actions; ++a) {
            Eigen::VectorXd x(lin.dim);
            for (int i = 0; i < lin.dim; ++i) {
                x(i) = rng.gaussian();
            }
            if (lin.geometry == ActionGeometry::kCluster) {
                x = theta + lin.cluster_spread * x;
            }
            const double norm = x.norm();
            if (norm == 0.0) {
                x(0) = 1.0;
            } else {
                x /= norm;
            }
            actions.push_back(std::move(x));
        }
    }
    return env::LinearInstance(std::move(actions), std::move(theta), lin.noise);
}

std::vector<RunResult> run(const RunConfig& config) {
    validate(config);
    std::vector<RunResult> results;
    results.reserve(static_cast<std::size_t>(config.replications));
    for (int r = 0; r < config.replications; ++r) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(r);
        switch (config.protocol) {
            case Protocol::kDemab: {
                const auto inst = build_mab_instance(config);
                results.push_back(
                    mab::demab_run(inst, config.agents, config.horizon, seed, true));
                break;
            }
            case Protocol::kDemabNoBurnin: {
                const auto inst = build_mab_instance(config);
                results.push_back(
                    mab::demab_run(inst, config.agents, config.horizon, seed, false));
                break;
            }
            case Protocol::kMabImmediate: {
                const auto inst = build_mab_instance(config);
                results.push_back(mab::immediate_sharing_mab_run(
                    inst, config.agents, config.horizon, seed));
                break;
            }
            case Protocol::kMabIndependent: {
                const auto inst = build_mab_instance(config);
                results.push_back(mab::independent_run(inst, config.agents,
                                                       config.horizon, seed));
                break;
            }
            case Protocol::kDelb: {
                const auto inst = build_linear_instance(config);
                results.push_back(
                    linear::delb_run(inst, config.agents, config.horizon, seed));
                break;
            }
            case Protocol::kDisLinUcb: {
                const auto inst = build_linear_instance(config);
                results.push_back(
                    linear::dislinucb_run(inst, config.agents, config.horizon, seed));
                break;
            }
            case Protocol::kLinUcbPooled: {
                const auto inst = build_linear_instance(config);
                results.push_back(linear::pooled_linucb_run(inst, config.agents,
                                                            config.horizon, seed));
                break;
            }
        }
    }
    return results;
}

void emit_csv(const std::vector<RunResult>& results, const RunConfig& config,
              const std::filesystem::path& dir) {
    if (results.empty()) {
        throw std::invalid_argument("emit_csv: no results");
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("emit_csv: cannot create directory " + dir.string());
    }

    const auto steps_path = dir / "steps.csv";
    std::ofstream steps(steps_path, std::ios::binary);
    if (!steps) {
        throw std::runtime_error("emit_csv: cannot write " + steps_path.string());
    }
    steps << "seed,step,cum_regret,cum_comm\n";
    for (const auto& r : results) {
        for (std::size_t t = 0; t < r.cum_regret.size(); ++t) {
            steps << r.seed << ',' << (t + 1) << ',' << format_double(r.cum_regret[t])
                  << ',' << r.cum_comm[t] << '\n';
        }
    }
    steps.close();
    if (!steps) {
        throw std::runtime_error("emit_csv: write failed for " + steps_path.string());
    }

    const auto summary_path = dir / "summary.csv";
    std::ofstream summary(summary_path, std::ios::binary);
    if (!summary) {
        throw std::runtime_error("emit_csv: cannot write " + summary_path.string());
    }
    summary << "seed,protocol,M,T,final_regret,final_comm\n";
    for (const auto& r : results) {
        summary << r.seed << ',' << to_string(config.protocol) << ',' << config.agents
                << ',' << config.horizon << ',' << format_double(r.final_regret())
                << ',' << r.comm_total << '\n';
    }
    summary.close();
    if (!summary) {
        throw std::runtime_error("emit_csv: write failed for " + summary_path.string());
    }
}

std::vector<SweepRow> sweep(const RunConfig& base,
                            const std::vector<std::int64_t>& horizons) {
    if (horizons.empty()) {
        throw std::invalid_argument("sweep: no horizons");
    }
    for (std::size_t i = 1; i < horizons.size(); ++i) {
        if (horizons[i] <= horizons[i - 1]) {
            throw std::invalid_argument("sweep: horizons must be ascending");
        }
    }
    std::vector<SweepRow> rows;
    rows.reserve(horizons.size());
    for (std::int64_t T : horizons) {
        RunConfig cfg = base;
        cfg.horizon = T;
        const auto results = run(cfg);
        SweepRow row;
        row.horizon = T;
        for (const auto& r : results) {
            row.mean_final_regret += r.final_regret();
            row.mean_final_comm += static_cast<double>(r.comm_total);
        }
        row.mean_final_regret /= static_cast<double>(results.size());
        row.mean_final_comm /= static_cast<double>(results.size());
        rows.push_back(row);
    }
    return rows;
}

}  // namespace dbandit::harness
