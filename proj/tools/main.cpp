#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "common.hpp"
#include "epw/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Electrophysiology numerical workbench"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expanded help for every subcommand");

    epwcli::register_simulate(app);
    epwcli::register_gen_dataset(app);
    epwcli::register_baseline_eval(app);
    epwcli::register_fit_channel(app);
    epwcli::register_egm(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        if (!std::string(e.what()).empty()) std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const epw::io_error& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return 2;
    } catch (const epw::numeric_error& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
