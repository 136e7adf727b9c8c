#include <whitney/cli.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    using namespace whitney::cli;
    CLI::App app{"ws: Whitney extension toolkit"};
    app.require_subcommand(1);
    CommandArgs args;
    std::string report;
    int samples = -1;
    std::string input, plus, minus, region, bundle, field;

    auto with_report = [&](CLI::App* c) { c->add_option("--report", report, "write the JSON report here"); };

    auto* refine = app.add_subcommand("refine", "iterate Glaeser refinement on a sampled bundle");
    refine->add_option("--input", input, "sampled-bundle fixture")->required();
    refine->add_option("--max-iter", args.max_iter, "iteration cap")->check(CLI::PositiveNumber);
    refine->add_option("--tol", args.tol, "stability tolerance on fiber offsets")->check(CLI::PositiveNumber);
    with_report(refine);

    auto* elim = app.add_subcommand("eliminate", "piecewise echelon form of a parametric linear system");
    elim->add_option("--input", input, "param-system fixture")->required();
    elim->add_option("--samples", samples, "grid points per axis or random sample count");
    with_report(elim);

    auto* helly = app.add_subcommand("helly", "select dominating members of a seminorm family");
    helly->add_option("--input", input, "seminorm-family fixture")->required();
    helly->add_option("--sphere-samples", args.sphere_samples, "unit vectors used by the sampler")->check(CLI::PositiveNumber);
    with_report(helly);

    auto* patch = app.add_subcommand("patch", "glue two pieces across a cusp strip");
    patch->add_option("--plus", plus, "upper field-piece fixture")->required();
    patch->add_option("--minus", minus, "lower field-piece fixture")->required();
    patch->add_option("--region", region, "cusp-region fixture")->required();
    patch->add_flag("--force", args.force, "glue even if the Taylor link fails, then certify");
    with_report(patch);

    auto* synth = app.add_subcommand("synthesize", "build a section over a wedge normal form");
    synth->add_option("--input", input, "wedge-normal-form fixture")->required();
    synth->add_option("--ladder", args.ladder, "number of x-ladder points");
    synth->add_option("--out", args.out, "write the fitted traces here");
    with_report(synth);

    auto* check = app.add_subcommand("check", "membership of a field's jets in a sampled bundle");
    check->add_option("--bundle", bundle, "sampled-bundle fixture")->required();
    check->add_option("--field", field, "field-piece fixture")->required();
    with_report(check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    args.files = {{"input", input}, {"plus", plus}, {"minus", minus}, {"region", region}, {"bundle", bundle}, {"field", field}};
    if (samples >= 0) args.samples = samples;
    try {
        args.seed_override = env_seed();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const RunReport r = run_command(cmd, args);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    (r.exit_code == 1 ? std::cerr : std::cout) << r.table;
    if (r.exit_code != 1) std::cout << "elapsed  " << secs << " s\n";
    if (!report.empty()) {
        std::ofstream os(report, std::ios::binary);
        if (!os) {
            std::cerr << "error: cannot write " << report << "\n";
            return 1;
        }
        os << r.body.dump(2) << "\n";
    }
    return r.exit_code;
}
