// catdiff: simulate, fit, summarize and check group-difference models for
// multivariate categorical data.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "catdiff/commands.hpp"

namespace {

using namespace catdiff;
using namespace catdiff::cli;

template <typename T>
void set_if(std::optional<T>& dst, const CLI::Option* opt, const T& value) {
    if (opt->count() > 0) dst = value;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian testing of group differences in multivariate categorical data"};
    app.require_subcommand(1);

    // simulate
    SimulateOptions sim;
    int scenario = 0;
    std::string model_path, sim_out;
    auto* simulate = app.add_subcommand("simulate", "Generate a dataset from a built-in scenario or a model file");
    auto* o_scenario = simulate->add_option("--scenario", scenario, "Built-in scenario id (1, 2 or 3)");
    auto* o_model = simulate->add_option("--model", model_path, "Model JSON document to sample from");
    simulate->add_option("--n", sim.n_per_group, "Units per group (one value, or one per group)")->expected(1, -1);
    simulate->add_option("--seed", sim.seed, "Random seed");
    auto* o_sim_out = simulate->add_option("--out", sim_out, "Output directory (default $CATDIFF_OUTPUT_DIR)");

    // fit
    FitOptions fit;
    std::string config_path, fit_out, group_column = "group";
    std::vector<double> alpha;
    double gamma = 0, pr_h1 = 0, nu_conc = 0;
    int h_bar = 0, n_iter = 0, burn_in = 0, thin = 0, groups = 0;
    std::uint64_t seed = 0;
    std::vector<int> levels;
    auto* fitc = app.add_subcommand("fit", "Run the Gibbs sampler on a dataset");
    fitc->add_option("--data", fit.data_path, "Dataset CSV")->required();
    auto* o_config = fitc->add_option("--config", config_path, "Run configuration JSON");
    auto* o_alpha = fitc->add_option("--alpha", alpha, "Dirichlet concentration(s) for pi_X");
    auto* o_gamma = fitc->add_option("--gamma", gamma, "Dirichlet concentration for every pi_hj cell (default 1/d_j)");
    auto* o_pr = fitc->add_option("--pr-h1", pr_h1, "Prior probability of the alternative");
    auto* o_hbar = fitc->add_option("--h-bar", h_bar, "Truncation level");
    auto* o_nu = fitc->add_option("--nu-concentration", nu_conc, "Dirichlet concentration for mixing weights (default 1/h_bar)");
    auto* o_seed = fitc->add_option("--seed", seed, "Random seed");
    auto* o_iter = fitc->add_option("--n-iter", n_iter, "Gibbs iterations");
    auto* o_burn = fitc->add_option("--burn-in", burn_in, "Discarded initial iterations");
    auto* o_thin = fitc->add_option("--thin", thin, "Thinning interval");
    fitc->add_option("--chains", fit.chains, "Independent chains");
    fitc->add_option("--workers", fit.workers, "Worker threads (default: hardware concurrency)");
    fitc->add_option("--group-column", group_column, "Name of the group column");
    auto* o_levels = fitc->add_option("--levels", levels, "Declared level count per variable (default: inferred)");
    auto* o_groups = fitc->add_option("--groups", groups, "Declared number of groups (default: inferred)");
    auto* o_fit_out = fitc->add_option("--out", fit_out, "Output directory (default $CATDIFF_OUTPUT_DIR)");

    // summarize
    SummarizeOptions summ;
    std::string summ_out;
    double global_threshold = 0.5;
    auto* summarize = app.add_subcommand("summarize", "Posterior summaries of a fitted chain directory");
    summarize->add_option("dir", summ.chain_dir, "Fit or chain directory")->required();
    summarize->add_option("--threshold", summ.report.tau, "Exceedance threshold tau for Cramer's V");
    summarize->add_option("--level", summ.report.level, "Credible level for marginal differences");
    summarize->add_flag("--all-pairs", summ.report.all_group_pairs, "Marginal differences for every group pair");
    auto* o_global = summarize->add_option("--global-threshold", global_threshold, "Flag pr(H1|data) above this value");
    summarize->add_flag("--csv", summ.csv, "Also write CSV tables");
    auto* o_summ_out = summarize->add_option("--out", summ_out, "Output directory (default: the input directory)");

    // check
    CheckOptions check;
    auto* checkc = app.add_subcommand("check", "MCMC diagnostics of a fitted chain directory");
    checkc->add_option("dir", check.chain_dir, "Fit or chain directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (simulate->parsed()) {
            set_if(sim.scenario, o_scenario, scenario);
            set_if(sim.model_path, o_model, model_path);
            set_if(sim.out, o_sim_out, sim_out);
            return cmd_simulate(sim, std::cout);
        }
        if (fitc->parsed()) {
            auto& ov = fit.overrides;
            if (o_alpha->count()) {
                if (alpha.size() == 1) ov.alpha = alpha.front();
                else ov.alpha = alpha;
            }
            if (o_gamma->count()) ov.gamma = gamma;
            set_if(ov.pr_h1, o_pr, pr_h1);
            set_if(ov.h_bar, o_hbar, h_bar);
            set_if(ov.nu_concentration, o_nu, nu_conc);
            set_if(ov.seed, o_seed, seed);
            set_if(ov.n_iter, o_iter, n_iter);
            set_if(ov.burn_in, o_burn, burn_in);
            set_if(ov.thin, o_thin, thin);
            set_if(fit.config_path, o_config, config_path);
            set_if(fit.levels, o_levels, levels);
            set_if(fit.groups, o_groups, groups);
            set_if(fit.out, o_fit_out, fit_out);
            fit.group_column = group_column;
            return cmd_fit(fit, std::cout);
        }
        if (summarize->parsed()) {
            set_if(summ.out, o_summ_out, summ_out);
            set_if(summ.report.global_threshold, o_global, global_threshold);
            return cmd_summarize(summ, std::cout);
        }
        if (checkc->parsed()) return cmd_check(check, std::cout);
    } catch (const catdiff::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    }
    return kUsage;
}
