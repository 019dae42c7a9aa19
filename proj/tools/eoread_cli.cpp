// eoread: budget, sweep, shots and calibrate subcommands.
//
// Exit codes: 0 success, 2 configuration / precondition error, 3 numerical failure.

#include "eoread/commands.hpp"
#include "eoread/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Optical readout of a superconducting qubit through an electro-optomechanical "
                 "transducer: efficiency budgets, sweeps, single-shot Monte Carlo and "
                 "quantum-efficiency calibration."};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    eoread::CommandOptions opt;
    std::string format = "csv";
    std::string convention = "supplementary";

    app.add_option("--config", config_path, "INI configuration (applied over the bundled defaults)")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", opt.seed, "random seed")->capture_default_str();
    app.add_option("--out", opt.out_dir, "output directory (default: print to stdout)");
    app.add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "jsonl"}))
        ->capture_default_str();
    app.add_option("--workers", opt.workers, "worker threads (0 = hardware concurrency)")
        ->capture_default_str();
    app.add_option("--convention", convention,
                   "SNR convention: supplementary (power loss) or methods (amplitude loss)")
        ->check(CLI::IsMember({"methods", "supplementary"}))
        ->capture_default_str();

    auto* budget = app.add_subcommand("budget", "efficiency budget at the configured operating point");
    budget->add_flag("--exact-bandwidth", opt.exact_bandwidth,
                     "use the time-domain bandwidth factor from the full pipeline");
    budget->add_flag("--dump-model", opt.dump_model, "also write the state-space matrices");
    auto* sweep = app.add_subcommand("sweep", "eta_q over the gamma_e x gamma_o grid");
    sweep->add_flag("--exact-bandwidth", opt.exact_bandwidth,
                    "use the time-domain bandwidth factor from the full pipeline");
    app.add_subcommand("shots", "single-shot histograms, threshold, fidelity and Rabi scan");
    app.add_subcommand("calibrate", "quantum efficiency from SNR and dephasing vs drive voltage");

    CLI11_PARSE(app, argc, argv);

    opt.format = format == "jsonl" ? eoread::OutputFormat::jsonl : eoread::OutputFormat::csv;
    opt.convention = convention == "methods" ? eoread::SnrConvention::amplitude
                                             : eoread::SnrConvention::power;

    const std::map<std::string, eoread::CommandOutput (*)(const eoread::RunConfig&,
                                                          const eoread::CommandOptions&)>
        commands{{"budget", eoread::cmd_budget},
                 {"sweep", eoread::cmd_sweep},
                 {"shots", eoread::cmd_shots},
                 {"calibrate", eoread::cmd_calibrate}};

    try {
        const eoread::RunConfig cfg =
            config_path.empty() ? eoread::default_config() : eoread::load_config(config_path);
        const std::string name = app.get_subcommands().front()->get_name();
        const eoread::CommandOutput out = commands.at(name)(cfg, opt);
        eoread::write_output(out, cfg, opt, std::cout);
    } catch (const eoread::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const eoread::PreconditionError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const eoread::SingularityError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const eoread::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    }
    return 0;
}
