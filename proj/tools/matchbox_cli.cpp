// Command-line front end. Subcommands are registered as the library grows;
// each one maps a step of the resolution pipeline onto files on disk.

#include <cstdio>

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"matchbox: entity resolution over relational records"};
    app.require_subcommand(0, 1);
    app.set_version_flag("--version", "matchbox 0.1.0");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    if (app.get_subcommands().empty()) {
        std::puts(app.help().c_str());
        return 0;
    }
    return 0;
}
