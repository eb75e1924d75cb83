// Writes one simulated replication of a scenario as a panel CSV.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "tmg/error.hpp"
#include "tmg/io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Write a simulated panel as CSV"};
    std::string scenario, out;
    std::uint64_t rep = 0;
    app.add_option("scenario", scenario, "scenario JSON")->required();
    app.add_option("out", out, "output CSV")->required();
    app.add_option("--rep", rep, "replication index")->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    try {
        tmg::Scenario s = tmg::load_scenario(scenario);
        if (!s.cfg.kappa2) s.cfg.kappa2 = tmg::calibrate_kappa(s.cfg, s.calib_reps, s.calib_n).kappa2;
        const tmg::Replication r = tmg::generate_replication(s.cfg, rep);
        std::ofstream f(out, std::ios::binary);
        tmg::write_panel_csv(f, r.panel);
    } catch (const tmg::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
