#include <cstdio>
#include <memory>
#include <string>

#include "common.hpp"
#include "epw/channel_fit.hpp"
#include "epw/csv.hpp"
#include "epw/parallel.hpp"

namespace epwcli {

namespace {

struct FitFlags {
    std::string config_path;
    std::string out = "fit_out";
    std::string observations = "synthetic";
    double noise = 0.01;
    std::uint64_t obs_seed = 7;
    std::size_t n_particles = 200;
    int max_generations = 12;
    double quantile = 0.5;
    double min_acceptance = 0.02;
    std::size_t budget = 0;
    double g_na = 13.0;
    double e_na = 64.3;
    std::uint64_t seed = 1;
    int workers = 0;
    std::size_t kde_points = 801;
};

void write_population_csv(const std::string& path, const epw::abc::Population& pop,
                          const std::vector<std::string>& names) {
    std::vector<std::string> header = names;
    header.push_back("weight");
    header.push_back("distance");
    std::vector<std::vector<std::string>> rows;
    for (const auto& particle : pop.particles) {
        std::vector<std::string> row;
        for (double v : particle.params) row.push_back(epw::csv::format_double(v));
        row.push_back(epw::csv::format_double(particle.weight));
        row.push_back(epw::csv::format_double(particle.distance));
        rows.push_back(std::move(row));
    }
    epw::csv::write(path, header, rows);
}

void run_fit_channel(const FitFlags& flags, const CLI::App& cmd) {
    Json config = flags.config_path.empty() ? Json::object() : load_config_file(flags.config_path);
    Resolver r(cmd, std::move(config));

    const auto out_dir = r.get<std::string>("out", "out", flags.out);
    const auto observations = r.get<std::string>("observations", "observations", flags.observations);
    const auto noise = r.get<double>("noise", "noise", flags.noise);
    const auto obs_seed = r.get<std::uint64_t>("obs-seed", "obs_seed", flags.obs_seed);
    epw::abc::AbcConfig abc;
    abc.n_particles = r.get<std::size_t>("n-particles", "n_particles", flags.n_particles);
    abc.max_generations = r.get<int>("max-generations", "max_generations", flags.max_generations);
    abc.epsilon_quantile = r.get<double>("quantile", "quantile", flags.quantile);
    abc.min_acceptance = r.get<double>("min-acceptance", "min_acceptance", flags.min_acceptance);
    abc.proposal_budget = r.get<std::size_t>("budget", "budget", flags.budget);
    epw::ion::SodiumChannelParams base;
    base.g_na = r.get<double>("g-na", "g_na", flags.g_na);
    base.e_na = r.get<double>("e-na", "e_na", flags.e_na);
    abc.seed = r.seed("seed", flags.seed, 1);
    abc.workers = r.get<int>("workers", "workers", flags.workers);
    if (abc.workers <= 0) abc.workers = epw::default_workers();
    const auto kde_points = r.get<std::size_t>("kde-points", "kde_points", flags.kde_points);
    r.finish();

    std::vector<epw::ion::SummaryCurve> observed;
    if (observations == "synthetic") {
        observed = epw::ion::synth_observations(epw::ion::SodiumChannelParams::original(),
                                           epw::ion::ProtocolSet::defaults(), noise, obs_seed);
    } else {
        observed = epw::ion::read_summary_csv(observations);
    }

    ensure_dir(out_dir);
    epw::ion::write_summary_csv(out_dir + "/observations.csv", observed);

    const auto prior = epw::ion::default_sodium_prior();
    const auto fit = epw::ion::run_abcsmc_channel(observed, base, abc, prior);

    Json summary;
    summary["n_generations"] = fit.populations.size();
    auto& gens = summary["generations"] = Json::array();
    for (const auto& pop : fit.populations) {
        char name[64];
        std::snprintf(name, sizeof name, "population_gen%02d.csv", pop.generation);
        write_population_csv(out_dir + "/" + name, pop, prior.names);
        gens.push_back({{"generation", pop.generation},
                        {"epsilon", pop.epsilon},
                        {"acceptance_rate", pop.acceptance_rate},
                        {"particles", pop.particles.size()},
                        {"complete", pop.complete}});
    }

    const auto& last = fit.populations.back();
    if (!last.particles.empty()) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t k = 0; k < prior.names.size(); ++k)
            rows.push_back({prior.names[k], epw::csv::format_double(prior.lo[k]),
                            epw::csv::format_double(prior.hi[k]),
                            epw::csv::format_double(fit.stats.mean[k]),
                            epw::csv::format_double(fit.stats.min[k]),
                            epw::csv::format_double(fit.stats.max[k])});
        epw::csv::write(out_dir + "/posterior_table.csv",
                        {"param", "prior_lo", "prior_hi", "mean", "min", "max"}, rows);

        auto& kde_files = summary["kde"] = Json::object();
        for (std::size_t k = 0; k < prior.names.size(); ++k) {
            const auto curve = epw::abc::kernel_density_1d(last, k, kde_points);
            if (curve.is_delta) {
                kde_files[prior.names[k]] = {{"delta", curve.delta_location}};
                continue;
            }
            std::vector<std::vector<std::string>> kde_rows;
            for (std::size_t g = 0; g < curve.x.size(); ++g)
                kde_rows.push_back({epw::csv::format_double(curve.x[g]),
                                    epw::csv::format_double(curve.density[g])});
            const std::string file = "kde_" + prior.names[k] + ".csv";
            epw::csv::write(out_dir + "/" + file, {"x", "density"}, kde_rows);
            kde_files[prior.names[k]] = {{"file", file}, {"bandwidth", curve.bandwidth}};
        }
    }
    write_json_file(out_dir + "/fit_summary.json", summary);
    write_resolved_config(out_dir, "fit-channel", r.resolved());

    std::printf("fit-channel: %zu generations, final acceptance %.4f -> %s\n",
                fit.populations.size(), last.acceptance_rate, out_dir.c_str());
}

}  // namespace

void register_fit_channel(CLI::App& app) {
    auto flags = std::make_shared<FitFlags>();
    CLI::App* cmd = app.add_subcommand(
        "fit-channel", "ABC-SMC recovery of sodium-channel parameters from summary curves");
    cmd->add_option("--config", flags->config_path, "JSON config file");
    cmd->add_option("--out", flags->out, "Output directory");
    cmd->add_option("--observations", flags->observations,
                    "Summary-curve CSV, or 'synthetic' for a noisy suite at original parameters");
    cmd->add_option("--noise", flags->noise, "Synthetic observation noise (fraction of range)");
    cmd->add_option("--obs-seed", flags->obs_seed, "Synthetic observation noise seed");
    cmd->add_option("--n-particles", flags->n_particles, "Particles per generation");
    cmd->add_option("--max-generations", flags->max_generations, "Generation cap");
    cmd->add_option("--quantile", flags->quantile, "Epsilon quantile of previous distances");
    cmd->add_option("--min-acceptance", flags->min_acceptance, "Stop below this acceptance rate");
    cmd->add_option("--budget", flags->budget, "Proposal budget per generation (0 = 100x particles)");
    cmd->add_option("--g-na", flags->g_na, "Fixed channel conductance");
    cmd->add_option("--e-na", flags->e_na, "Fixed reversal potential");
    cmd->add_option("--seed", flags->seed, "Sampler RNG seed");
    cmd->add_option("--workers", flags->workers, "Worker threads (0 = hardware)");
    cmd->add_option("--kde-points", flags->kde_points, "Grid points per posterior density curve");
    cmd->callback([flags, cmd] { run_fit_channel(*flags, *cmd); });
}

}  // namespace epwcli
