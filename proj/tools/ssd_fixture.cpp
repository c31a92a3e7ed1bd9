// Writes the bundled synthetic corpus, vocabulary, targets, embedding store,
// annotated pairs and a pipeline config into a directory.
#include "ssd/error.hpp"
#include "ssd/synthetic.hpp"

#include <iostream>

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"Generate the synthetic ssd-kit fixture"};
    std::string out;
    ssd::synthetic::FixtureOptions options;
    app.add_option("--out-dir", out, "Directory to write into")->required();
    app.add_option("--seed", options.seed, "Generator seed")->capture_default_str();
    app.add_option("--rows", options.rows_per_period, "Rows per period")->capture_default_str();
    app.add_option("--dimension", options.dimension, "Embedding dimension")->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    try {
        const auto fixture = ssd::synthetic::make_fixture(options);
        ssd::synthetic::write_fixture(fixture, out, options.seed);
        std::cerr << "wrote " << fixture.old_docs.size() + fixture.new_docs.size() << " rows, "
                  << fixture.store.size() << " vectors to " << out << '\n';
    } catch (const ssd::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    }
    return 0;
}
