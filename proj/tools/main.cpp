// Command-line front end: simulate, compare, linearize and equilibrium
// subcommands over a JSON configuration and CSV output files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "excitasim/config.hpp"
#include "excitasim/csv.hpp"
#include "excitasim/linearize.hpp"

namespace {

// Exit codes: 0 success, 1 I/O or usage, 2 validation, 3 simulation failure.
constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSimulation = 3;

excitasim::RunConfig load_or_default(const std::string& path) {
    if (path.empty()) {
        excitasim::RunConfig cfg;
        cfg.validate();
        return cfg;
    }
    return excitasim::load_config(path);
}

bool parallel_allowed() {
    if (const char* env = std::getenv("EXCITASIM_THREADS"))
        return std::atoi(env) > 1;
    return true;
}

void print_summary(const excitasim::TimeSeries& ts, const excitasim::ScenarioConfig& sc,
                   double band) {
    const auto m = excitasim::compute_metrics(ts, 0.0, sc.duration, band);
    std::cout << "samples=" << ts.samples.size() << " iae=" << excitasim::format_number(m.iae)
              << " ise=" << excitasim::format_number(m.ise)
              << " max_abs_error=" << excitasim::format_number(m.max_abs_error)
              << " settled=" << (m.settled ? 1 : 0) << '\n';
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& adaptive, const std::string& model) {
    excitasim::RunConfig cfg = load_or_default(config_path);
    if (adaptive == "on") cfg.scenario.adaptive = true;
    else if (adaptive == "off") cfg.scenario.adaptive = false;
    if (model == "full") cfg.scenario.model = excitasim::ModelKind::Full;
    else if (model == "reduced") cfg.scenario.model = excitasim::ModelKind::Reduced;
    cfg.validate();

    const auto ts = excitasim::run_closed_loop(cfg.scenario, cfg.generator, cfg.network(),
                                               cfg.controller, cfg.tuner);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot open output file '" << out_path << "'\n";
        return kExitIo;
    }
    excitasim::write_csv(out, ts);
    if (!out.good()) return kExitIo;
    print_summary(ts, cfg.scenario, cfg.tuner.alpha);
    return kExitOk;
}

int cmd_compare(const std::string& config_path, const std::string& out_dir) {
    excitasim::RunConfig cfg = load_or_default(config_path);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create output directory '" << out_dir << "'\n";
        return kExitIo;
    }

    const auto res = excitasim::compare_adaptive(cfg.scenario, cfg.generator, cfg.network(),
                                                 cfg.controller, cfg.tuner, cfg.tuner.alpha,
                                                 parallel_allowed());

    auto write_file = [&](const char* name, auto&& writer) {
        std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
        if (!out) throw excitasim::Error(std::string("cannot open '") + name + "'");
        writer(out);
    };
    write_file("adaptive.csv", [&](std::ostream& os) { excitasim::write_csv(os, res.adaptive); });
    write_file("fixed.csv", [&](std::ostream& os) { excitasim::write_csv(os, res.fixed); });
    write_file("metrics.csv",
               [&](std::ostream& os) { excitasim::write_metrics_csv(os, res.windows); });

    std::cout << "adaptive: ";
    print_summary(res.adaptive, cfg.scenario, cfg.tuner.alpha);
    std::cout << "fixed:    ";
    print_summary(res.fixed, cfg.scenario, cfg.tuner.alpha);
    return kExitOk;
}

int cmd_linearize(const std::string& config_path, double ts) {
    excitasim::RunConfig cfg = load_or_default(config_path);
    if (!(ts > 0.0)) {
        std::cerr << "error: --ts must be positive\n";
        return kExitValidation;
    }

    const auto eq = excitasim::find_equilibrium(cfg.scenario.target_vt, cfg.scenario.target_te,
                                                cfg.generator, cfg.network(),
                                                excitasim::ModelKind::Reduced);
    const auto clm = excitasim::jacobian_reduced(excitasim::reduced_from(eq.state), eq.input,
                                                 cfg.generator, cfg.network());
    const auto dss = excitasim::discretize_zoh(clm, ts);
    const auto tf = excitasim::tf_from_state_space(dss.a_d, dss.b_d, clm.c, ts);

    std::cout << "coefficient,value\n";
    for (int k = 0; k < 4; ++k)
        std::cout << 'b' << k << ',' << excitasim::format_number(tf.b_coeffs[k]) << '\n';
    for (int k = 0; k < 4; ++k)
        std::cout << 'a' << (k + 1) << ',' << excitasim::format_number(tf.a_coeffs[k]) << '\n';
    std::cout << "ts," << excitasim::format_number(tf.ts) << '\n';
    std::cout << "delay," << tf.delay << '\n';
    return kExitOk;
}

int cmd_equilibrium(const std::string& config_path) {
    excitasim::RunConfig cfg = load_or_default(config_path);
    const auto model = cfg.scenario.model;
    const auto eq = excitasim::find_equilibrium(cfg.scenario.target_vt, cfg.scenario.target_te,
                                                cfg.generator, cfg.network(), model);

    double norm = 0.0;
    if (model == excitasim::ModelKind::Full) {
        for (double d : excitasim::derivatives_full(eq.state, eq.input, cfg.generator, cfg.network()))
            norm = std::max(norm, std::abs(d));
    } else {
        for (double d : excitasim::derivatives_reduced(excitasim::reduced_from(eq.state), eq.input,
                                                       cfg.generator, cfg.network()))
            norm = std::max(norm, std::abs(d));
    }

    auto line = [](const char* name, double v) {
        std::cout << name << ',' << excitasim::format_number(v) << '\n';
    };
    std::cout << "quantity,value\n";
    line("delta", eq.state.delta);
    line("s", eq.state.s);
    line("e_q_t", eq.state.e_q_t);
    line("e_q_st", eq.state.e_q_st);
    line("e_d_st", eq.state.e_d_st);
    line("v_f", eq.state.v_f);
    line("u", eq.input.u);
    line("t_m", eq.input.t_m);
    line("v_t", eq.outputs.v_t);
    line("t_e", eq.outputs.t_e);
    line("derivative_norm", norm);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive fuzzy excitation control simulator for a synchronous generator"};
    app.require_subcommand(1);

    std::string config_path, out_path, out_dir;
    std::string adaptive, model;
    double ts = 0.02;

    auto* simulate = app.add_subcommand("simulate", "Run one closed-loop scenario to CSV");
    simulate->add_option("--config", config_path, "JSON config file (defaults when omitted)");
    simulate->add_option("--out", out_path, "output CSV path")->required();
    simulate->add_option("--adaptive", adaptive, "override: on|off")
        ->check(CLI::IsMember({"on", "off"}));
    simulate->add_option("--model", model, "override: full|reduced")
        ->check(CLI::IsMember({"full", "reduced"}));

    auto* compare = app.add_subcommand("compare", "Run adaptive vs fixed-c and write both traces");
    compare->add_option("--config", config_path, "JSON config file");
    compare->add_option("--out-dir", out_dir, "output directory")->required();

    auto* linearize = app.add_subcommand("linearize", "Print the discrete transfer function");
    linearize->add_option("--config", config_path, "JSON config file");
    linearize->add_option("--ts", ts, "sample period in seconds");

    auto* equilibrium = app.add_subcommand("equilibrium", "Print the steady-state operating point");
    equilibrium->add_option("--config", config_path, "JSON config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitIo;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, out_path, adaptive, model);
        if (compare->parsed()) return cmd_compare(config_path, out_dir);
        if (linearize->parsed()) return cmd_linearize(config_path, ts);
        if (equilibrium->parsed()) return cmd_equilibrium(config_path);
    } catch (const excitasim::ParseError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitValidation;
    } catch (const excitasim::ValidationError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitValidation;
    } catch (const excitasim::SimulationError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitSimulation;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitIo;
    }
    return kExitIo;
}
