// Command-line front end: sampling, verification and the limit-theorem
// experiments. Exit codes: 0 success, 1 verification failure, 2 usage or
// configuration error.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "opdickman/experiments.hpp"
#include "opdickman/univariate.hpp"

namespace {

using opdickman::ExperimentConfig;

// flags override values taken from --config
void attach_common_flags(CLI::App* cmd, ExperimentConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "flat key=value config file");
    cmd->add_option("--q", cfg.q_spec, "operator matrix, e.g. \"1,0;0,2\"");
    cmd->add_option("--nu", cfg.nu_spec, "amplitude measure spec, e.g. \"usphere\"");
    cmd->add_option("--dim", cfg.dim, "dimension (needed by usphere)");
    cmd->add_option("--n", cfg.n, "sample count");
    cmd->add_option("--seed", cfg.seed, "RNG seed")->envname("OPDICKMAN_SEED");
    cmd->add_option("--eps", cfg.eps, "series truncation tolerance");
    cmd->add_option("--nmax", cfg.n_max, "series term cap");
    cmd->add_option("--alpha", cfg.alpha, "record-epochs success probability scale");
    cmd->add_option("--eps-schedule", cfg.eps_schedule, "small-jumps epsilon schedule")->delimiter(',');
    cmd->add_option("--n-list", cfg.n_list, "record-epochs n schedule")->delimiter(',');
    cmd->add_option("--k-list", cfg.k_list, "convolution partial-sum schedule")->delimiter(',');
    cmd->add_option("--m-samples", cfg.m_samples, "batch size inside experiments");
    cmd->add_option("--out", cfg.out, "output path (CSV or directory prefix)");
}

// re-parse: config file first, then command line on top
ExperimentConfig resolve_config(CLI::App* cmd, const ExperimentConfig& cli_values,
                                const std::string& config_path) {
    if (config_path.empty()) return cli_values;
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (cmd->count("--q")) cfg.q_spec = cli_values.q_spec;
    if (cmd->count("--nu")) cfg.nu_spec = cli_values.nu_spec;
    if (cmd->count("--dim")) cfg.dim = cli_values.dim;
    if (cmd->count("--n")) cfg.n = cli_values.n;
    if (cmd->count("--seed")) cfg.seed = cli_values.seed;
    if (cmd->count("--eps")) cfg.eps = cli_values.eps;
    if (cmd->count("--nmax")) cfg.n_max = cli_values.n_max;
    if (cmd->count("--alpha")) cfg.alpha = cli_values.alpha;
    if (cmd->count("--eps-schedule")) cfg.eps_schedule = cli_values.eps_schedule;
    if (cmd->count("--n-list")) cfg.n_list = cli_values.n_list;
    if (cmd->count("--k-list")) cfg.k_list = cli_values.k_list;
    if (cmd->count("--m-samples")) cfg.m_samples = cli_values.m_samples;
    if (cmd->count("--out")) cfg.out = cli_values.out;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"operator Dickman distributions: sampling and verification"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::string config_path;

    auto* cmd_sample = app.add_subcommand("sample", "draw samples and write a CSV");
    attach_common_flags(cmd_sample, cfg, config_path);

    auto* cmd_verify = app.add_subcommand("verify", "run the distributional check suite");
    attach_common_flags(cmd_verify, cfg, config_path);

    auto* cmd_density = app.add_subcommand("density1d", "tabulate the GD_theta density");
    double theta = 1.0, xmax = 10.0, step = 1e-3;
    std::string density_out = "density.csv";
    cmd_density->add_option("--theta", theta, "Dickman parameter");
    cmd_density->add_option("--xmax", xmax, "table end");
    cmd_density->add_option("--step", step, "grid step");
    cmd_density->add_option("--out", density_out, "output CSV");

    auto* cmd_exp = app.add_subcommand("experiment", "limit-theorem experiments");
    std::string which;
    cmd_exp->add_option("kind", which, "record-epochs | small-jumps | convolution | figures")->required();
    attach_common_flags(cmd_exp, cfg, config_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help lands here with a success code; real usage errors exit 2
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_sample->parsed()) {
            opdickman::cmd_sample(resolve_config(cmd_sample, cfg, config_path));
            return 0;
        }
        if (cmd_verify->parsed()) {
            std::string log;
            const auto results = opdickman::verify_distribution(resolve_config(cmd_verify, cfg, config_path), &log);
            bool all_pass = true;
            for (const auto& r : results) {
                std::printf("[%s] %s: %s\n", r.pass ? "pass" : "FAIL", r.name.c_str(), r.detail.c_str());
                all_pass = all_pass && r.pass;
            }
            if (!cfg.out.empty()) {
                std::FILE* f = std::fopen(cfg.out.c_str(), "a");
                if (!f) throw std::invalid_argument("cannot append to '" + cfg.out + "'");
                std::fputs(log.c_str(), f);
                std::fclose(f);
            }
            return all_pass ? 0 : 1;
        }
        if (cmd_density->parsed()) {
            opdickman::DickmanDensity table(theta, step);
            std::FILE* f = std::fopen(density_out.c_str(), "w");
            if (!f) throw std::invalid_argument("cannot write to '" + density_out + "'");
            std::fputs("x,f_theta\n", f);
            const int per_unit = static_cast<int>(std::lround(1.0 / table.step()));
            for (int j = 0; j <= static_cast<int>(xmax * per_unit); ++j) {
                const double x = static_cast<double>(j) * table.step();
                std::fprintf(f, "%s,%s\n", opdickman::format_double(x).c_str(),
                             opdickman::format_double(table(x)).c_str());
            }
            std::fclose(f);
            return 0;
        }
        if (cmd_exp->parsed()) {
            const ExperimentConfig resolved = resolve_config(cmd_exp, cfg, config_path);
            if (which == "record-epochs") {
                for (const auto& r : opdickman::experiment_record_epochs(resolved))
                    std::printf("n=%d energy=%g p=%g\n", r.n, r.energy, r.p_value);
            } else if (which == "small-jumps") {
                for (const auto& r : opdickman::experiment_small_jumps(resolved))
                    std::printf("eps=%g cf_distance=%g accept_rate=%g wedge_abs_err=%g\n", r.eps,
                                r.cf_dist, r.accept_rate, r.wedge_abs_err);
            } else if (which == "convolution") {
                for (const auto& r : opdickman::experiment_countable_convolution(resolved))
                    std::printf("K=%d energy=%g p=%g\n", r.k, r.energy, r.p_value);
            } else if (which == "figures") {
                for (const auto& path : opdickman::experiment_figures(resolved))
                    std::printf("wrote %s\n", path.c_str());
            } else {
                std::fprintf(stderr, "unknown experiment kind: %s\n", which.c_str());
                return 2;
            }
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
