#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "hmln/commands.hpp"
#include "hmln/log.hpp"

namespace {

struct Flags {
    std::string config;
    std::string corpus, embeddings, test, out, weights;
    std::uint64_t seed = 1;
    double epsilon = 0.0, tau = 0.0;
    std::size_t samples = 0, thinning = 0, burn_in = 0;
    bool no_clip = false, null_evidence = false;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON config file");
    cmd->add_option("--corpus", f.corpus, "training corpus (JSONL)");
    cmd->add_option("--embeddings", f.embeddings, "embedding store (JSONL)");
    cmd->add_option("--test", f.test, "test instances (JSONL)");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--weights", f.weights, "weight checkpoint path");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--epsilon", f.epsilon, "match threshold epsilon");
    cmd->add_option("--tau", f.tau, "reification similarity threshold");
    cmd->add_option("--samples", f.samples, "retained Gibbs samples");
    cmd->add_option("--thinning", f.thinning, "sweeps between retained samples");
    cmd->add_option("--burn-in", f.burn_in, "burn-in sweeps");
    cmd->add_flag("--no-clip", f.no_clip, "use unclipped importance weights");
    cmd->add_flag("--null-evidence", f.null_evidence, "set every evidence factor to 1");
}

bool given(CLI::App* cmd, const char* name) { return cmd->count(name) > 0; }

hmln::RunConfig resolve(CLI::App* cmd, const Flags& f) {
    hmln::RunConfig cfg = given(cmd, "--config") ? hmln::load_config(f.config) : hmln::RunConfig{};
    if (given(cmd, "--corpus")) cfg.paths.corpus = f.corpus;
    if (given(cmd, "--embeddings")) cfg.paths.embeddings = f.embeddings;
    if (given(cmd, "--test")) cfg.paths.test = f.test;
    if (given(cmd, "--out")) cfg.paths.out = f.out;
    if (given(cmd, "--weights")) cfg.paths.weights = f.weights;
    if (given(cmd, "--seed")) cfg.apply_seed(f.seed);
    if (given(cmd, "--epsilon")) cfg.hybrid.epsilon = f.epsilon;
    if (given(cmd, "--tau")) cfg.tau = f.tau;
    if (given(cmd, "--samples")) cfg.sampler.samples = f.samples;
    if (given(cmd, "--thinning")) cfg.sampler.thinning = f.thinning;
    if (given(cmd, "--burn-in")) cfg.sampler.burn_in = f.burn_in;
    if (f.no_clip) cfg.clip = false;
    if (f.null_evidence) cfg.null_evidence = true;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    hmln::init_logging();
    CLI::App app{"Hybrid Markov logic caption explanations"};
    app.require_subcommand(1);

    Flags learn_f, explain_f, validate_f;
    auto* learn = app.add_subcommand("learn", "learn shared potential weights");
    add_run_flags(learn, learn_f);
    auto* explain = app.add_subcommand("explain", "quantify bias and select explanation examples");
    add_run_flags(explain, explain_f);
    auto* validate = app.add_subcommand("validate", "run the exact-oracle checks");
    add_run_flags(validate, validate_f);
    hmln::ValidateOptions vopts;
    validate->add_flag("--list", vopts.list, "list checks without running them");
    validate->add_option("--check", vopts.only, "run only the named checks");

    auto* synth = app.add_subcommand("synth", "write a synthetic corpus with planted roles");
    std::uint64_t synth_seed = 1;
    std::size_t synth_size = 5;
    std::string synth_out = ".";
    synth->add_option("--seed", synth_seed, "random seed");
    synth->add_option("--size", synth_size, "number of training images")->check(CLI::PositiveNumber);
    synth->add_option("--out", synth_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

    try {
        if (*learn) {
            hmln::cmd_learn(resolve(learn, learn_f));
        } else if (*explain) {
            hmln::cmd_explain(resolve(explain, explain_f));
        } else if (*validate) {
            return hmln::cmd_validate(resolve(validate, validate_f), vopts, std::cout);
        } else if (*synth) {
            hmln::cmd_synth(synth_seed, synth_size, synth_out);
        }
    } catch (const hmln::Error& e) {
        std::cerr << hmln::diagnostic(e) << std::endl;
        return hmln::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << hmln::diagnostic(e) << std::endl;
        return 1;
    }
    return 0;
}
