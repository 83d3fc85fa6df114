#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fimstar/agent.hpp"
#include "fimstar/common.hpp"
#include "fimstar/env.hpp"
#include "fimstar/scenario.hpp"

namespace fimstar {

namespace fs = std::filesystem;

enum class AgentKind { meta_sac, sac, random_policy };

struct RunSpec {
    std::string series;
    ScenarioConfig cfg;
    RisMode mode = RisMode::star;
    AgentKind kind = AgentKind::meta_sac;
    std::uint64_t seed = 1;
    fs::path out_csv;
};

inline constexpr std::uint64_t kAgentSeedSalt = 0x9E3779B97F4A7C15ull;
inline constexpr const char* kTrainingCsvHeader =
    "episode,reward,ee,rate,power,critic_loss,actor_loss,meta_loss";

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Atomic write: temp file in the same directory, then rename.
inline void write_file_atomic(const fs::path& path, const std::string& contents) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), "cannot open " + tmp.string() + " for writing");
        out << contents;
    }
    fs::rename(tmp, path);
}

inline std::string training_log_csv(const std::vector<EpisodeLog>& logs) {
    std::ostringstream os;
    os << kTrainingCsvHeader << "\n";
    for (const EpisodeLog& row : logs) {
        os << row.episode << ',' << format_double(row.reward) << ',' << format_double(row.ee) << ','
           << format_double(row.rate) << ',' << format_double(row.power) << ','
           << format_double(row.critic_loss) << ',' << format_double(row.actor_loss) << ','
           << format_double(row.meta_loss) << "\n";
    }
    return os.str();
}

// Executes one (series, seed) run and writes its learning-curve CSV. The
// environment stream depends only on the seed, so every agent kind sees the
// same task sequence for a given seed.
inline std::vector<EpisodeLog> run_single(const RunSpec& spec) {
    spec.cfg.validate();
    Environment env(spec.cfg, spec.mode, spec.seed);
    Rng agent_rng(spec.seed ^ kAgentSeedSalt);
    std::vector<EpisodeLog> logs;
    if (spec.kind == AgentKind::random_policy) {
        logs = run_random_policy(env, spec.cfg.episodes, agent_rng);
    } else {
        Rng init_rng(spec.seed ^ (kAgentSeedSalt >> 1));
        AgentBundle bundle = make_agent(spec.cfg, env.state_dim(), env.action_dim(), init_rng,
                                        spec.kind == AgentKind::meta_sac);
        logs = train(bundle, env, spec.cfg.episodes, agent_rng);
    }
    if (!spec.out_csv.empty()) write_file_atomic(spec.out_csv, training_log_csv(logs));
    return logs;
}

// Runs jobs on a small pool; each job is independent and single-threaded, so
// scheduling order cannot affect any output file.
inline void run_all(const std::vector<RunSpec>& specs, int threads) {
    if (threads <= 1 || specs.size() <= 1) {
        for (const RunSpec& s : specs) run_single(s);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= specs.size()) return;
            run_single(specs[i]);
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(threads, static_cast<int>(specs.size()));
    pool.reserve(n);
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
}

inline std::string seed_file_name(const std::string& series, std::uint64_t seed) {
    return series + "_seed" + std::to_string(seed) + ".csv";
}

inline std::string lr_series_name(double lr) {
    std::ostringstream os;
    os << "lr" << lr;
    return os.str();
}

// Builds the run list for one named experiment.
inline std::vector<RunSpec> experiment_runs(const std::string& name, const ScenarioConfig& cfg,
                                            const std::vector<std::uint64_t>& seeds,
                                            const fs::path& out_dir) {
    std::vector<RunSpec> runs;
    auto add = [&](std::string series, ScenarioConfig c, RisMode mode, AgentKind kind) {
        for (std::uint64_t seed : seeds)
            runs.push_back({series, c, mode, kind, seed, out_dir / seed_file_name(series, seed)});
    };

    if (name == "lr_sweep" || name == "power_curve") {
        // power_curve is the same sweep; the power column is what gets plotted.
        for (double lr : cfg.lr_grid) {
            ScenarioConfig c = cfg;
            c.lr_actor = lr;
            add(lr_series_name(lr), c, RisMode::star, AgentKind::meta_sac);
        }
    } else if (name == "user_sweep") {
        for (int users : cfg.user_grid) {
            ScenarioConfig c = cfg;
            c.users_t = (users + 1) / 2;
            c.users_r = users / 2;
            add("users" + std::to_string(users), c, RisMode::star, AgentKind::meta_sac);
        }
    } else if (name == "variant_compare") {
        add("meta_sac_star", cfg, RisMode::star, AgentKind::meta_sac);
        add("meta_sac_dris", cfg, RisMode::dris, AgentKind::meta_sac);
        add("meta_sac_noris", cfg, RisMode::none, AgentKind::meta_sac);
        add("sac_star", cfg, RisMode::star, AgentKind::sac);
        add("random_star", cfg, RisMode::star, AgentKind::random_policy);
    } else {
        throw std::invalid_argument(
            "unknown experiment '" + name +
            "' (expected lr_sweep, user_sweep, variant_compare or power_curve)");
    }
    return runs;
}

inline void run_experiment(const std::string& name, const ScenarioConfig& cfg,
                           const std::vector<std::uint64_t>& seeds, const fs::path& out_dir,
                           int threads = 0) {
    require(!seeds.empty(), "run_experiment: need at least one seed");
    if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
    run_all(experiment_runs(name, cfg, seeds, out_dir), threads);
}

// ---- complexity report ----

struct NetworkComplexity {
    std::string name;
    std::vector<int> widths;
    long long mac_sum = 0;  // sum_l nu_l * nu_{l+1}
};

struct ComplexityReport {
    int state_dim = 0;
    int action_dim = 0;
    NetworkComplexity actor, critic, meta;
    long long total = 0;
};

inline long long width_product_sum(const std::vector<int>& widths) {
    long long sum = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l)
        sum += static_cast<long long>(widths[l]) * widths[l + 1];
    return sum;
}

inline ComplexityReport complexity_report(const ScenarioConfig& cfg) {
    cfg.validate();
    ComplexityReport r;
    r.state_dim = StateLayout::from(cfg).length;
    r.action_dim = ActionLayout::from(cfg).length;
    auto fill = [](std::string name, std::vector<int> widths) {
        NetworkComplexity n;
        n.name = std::move(name);
        n.mac_sum = width_product_sum(widths);
        n.widths = std::move(widths);
        return n;
    };
    std::vector<int> aw{r.state_dim};
    aw.insert(aw.end(), cfg.actor_hidden.begin(), cfg.actor_hidden.end());
    aw.push_back(2 * r.action_dim);
    std::vector<int> cw{r.state_dim + r.action_dim};
    cw.insert(cw.end(), cfg.critic_hidden.begin(), cfg.critic_hidden.end());
    cw.push_back(1);
    std::vector<int> mw{r.state_dim + r.action_dim};
    mw.insert(mw.end(), cfg.meta_hidden.begin(), cfg.meta_hidden.end());
    mw.push_back(1);
    r.actor = fill("actor", std::move(aw));
    r.critic = fill("critic", std::move(cw));
    r.meta = fill("meta_critic", std::move(mw));
    r.total = r.actor.mac_sum + r.critic.mac_sum + r.meta.mac_sum;
    return r;
}

inline std::string complexity_report_text(const ComplexityReport& r) {
    std::ostringstream os;
    os << "state_dim " << r.state_dim << "\n";
    os << "action_dim " << r.action_dim << "\n";
    for (const NetworkComplexity* n : {&r.actor, &r.critic, &r.meta}) {
        os << n->name << " widths";
        for (int w : n->widths) os << ' ' << w;
        os << "\n" << n->name << " weight_products " << n->mac_sum << "\n";
    }
    os << "total " << r.total << "\n";
    return os.str();
}

// ---- learning-curve aggregation ----

struct SeriesCurve {
    std::string series;
    std::vector<int> episodes;
    std::vector<std::vector<double>> values;  // one inner vector per seed file
};

namespace csv_detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace csv_detail

// Reads one training CSV and extracts (episode, metric column).
inline std::pair<std::vector<int>, std::vector<double>> read_metric_column(const fs::path& path,
                                                                           const std::string& metric) {
    std::ifstream in(path);
    require(in.good(), "cannot open " + path.string());
    std::string header;
    require(static_cast<bool>(std::getline(in, header)), "empty CSV " + path.string());
    require(header == kTrainingCsvHeader, "unexpected CSV schema in " + path.string());
    const std::vector<std::string> cols = csv_detail::split(header, ',');
    int col = -1;
    for (std::size_t i = 0; i < cols.size(); ++i)
        if (cols[i] == metric) col = static_cast<int>(i);
    require(col >= 0, "metric '" + metric + "' not found in " + path.string());
    std::vector<int> episodes;
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> parts = csv_detail::split(line, ',');
        require(parts.size() == cols.size(), "ragged CSV row in " + path.string());
        episodes.push_back(std::stoi(parts[0]));
        values.push_back(std::stod(parts[col]));
    }
    return {episodes, values};
}

inline std::string series_of_file(const fs::path& path) {
    const std::string stem = path.stem().string();
    const std::size_t pos = stem.rfind("_seed");
    return pos == std::string::npos ? stem : stem.substr(0, pos);
}

// Long-format aggregation over seeds: episode, series, mean, stderr.
inline std::string emit_plot_data(const std::vector<fs::path>& inputs, const std::string& metric) {
    require(!inputs.empty(), "emit_plot_data: no input files");
    std::map<std::string, SeriesCurve> series;
    for (const fs::path& p : inputs) {
        auto [episodes, values] = read_metric_column(p, metric);
        SeriesCurve& c = series[series_of_file(p)];
        c.series = series_of_file(p);
        if (c.episodes.empty()) {
            c.episodes = episodes;
        } else {
            require(c.episodes == episodes,
                    "emit_plot_data: episode column mismatch across seeds for series " + c.series);
        }
        c.values.push_back(values);
    }
    std::ostringstream os;
    os << "episode,series,mean,stderr\n";
    for (const auto& [name, c] : series) {
        const std::size_t n_seeds = c.values.size();
        for (std::size_t e = 0; e < c.episodes.size(); ++e) {
            double mean = 0.0;
            for (const auto& v : c.values) mean += v[e];
            mean /= n_seeds;
            double se = 0.0;
            if (n_seeds > 1) {
                double var = 0.0;
                for (const auto& v : c.values) var += (v[e] - mean) * (v[e] - mean);
                var /= (n_seeds - 1);
                se = std::sqrt(var / n_seeds);
            }
            os << c.episodes[e] << ',' << name << ',' << format_double(mean) << ','
               << format_double(se) << "\n";
        }
    }
    return os.str();
}

inline void emit_plot_data_file(const std::vector<fs::path>& inputs, const fs::path& out,
                                const std::string& metric) {
    write_file_atomic(out, emit_plot_data(inputs, metric));
}

// Mean of a metric over the last `window` episodes of a training CSV.
inline double final_window_mean(const fs::path& csv, const std::string& metric, int window) {
    auto [episodes, values] = read_metric_column(csv, metric);
    require(!values.empty(), "final_window_mean: no rows in " + csv.string());
    const int n = static_cast<int>(values.size());
    const int w = std::min(window, n);
    double sum = 0.0;
    for (int i = n - w; i < n; ++i) sum += values[i];
    return sum / w;
}

inline double median(std::vector<double> v) {
    require(!v.empty(), "median: empty input");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace fimstar
