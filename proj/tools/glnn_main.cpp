#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "glnn/constants.hpp"
#include "glnn/experiment.hpp"

namespace {

struct CommonFlags {
    glnn::ExperimentConfig cfg;
    std::string loss_name = "proposed";
    bool momentum = true;
    std::string out;
    std::string format = "csv";
};

void add_dataset_flags(CLI::App* cmd, glnn::ExperimentConfig& cfg) {
    cmd->add_option("--images", cfg.images_path,
                    "IDX image file (gzip ok), or a .glds cache when --labels is omitted");
    cmd->add_option("--labels", cfg.labels_path, "IDX label file (gzip ok)");
    cmd->add_option("--angle-range", cfg.angle_range,
                    "rotation augmentation range in degrees, 0..45")
        ->check(CLI::Range(0.0, 45.0));
}

void add_schedule_flags(CLI::App* cmd, glnn::ExperimentConfig& cfg) {
    cmd->add_option("--epochs", cfg.epochs, "training epochs per fold");
    cmd->add_option("--batch-size", cfg.batch_size, "minibatch size");
    cmd->add_option("--folds", cfg.folds, "cross-validation folds");
    cmd->add_option("--repeats", cfg.repeats_per_fold, "training runs per fold");
    cmd->add_option("--seed", cfg.seed, "root seed for splits, init and shuffles");
}

int cmd_constants() {
    const auto c = glnn::GoldenConstants::compute();
    std::cout << std::setprecision(17);
    std::cout << "p1 = " << c.p1 << "\n";
    std::cout << "p2 = " << c.p2 << "\n";
    std::cout << "alpha = " << c.alpha << "\n";
    std::cout << "eta = " << c.eta << "\n";
    return 0;
}

int cmd_losscheck(const std::string& out) {
    if (out.empty()) {
        glnn::sweep_loss(std::cout);
    } else {
        glnn::sweep_loss(out);
        std::cerr << "wrote " << out << "\n";
    }
    return 0;
}

int cmd_gradcheck(const std::string& scale_name, std::uint64_t seed) {
    glnn::GradCheckScale scale;
    if (scale_name == "tiny") {
        scale = glnn::GradCheckScale::tiny;
    } else if (scale_name == "fig3") {
        scale = glnn::GradCheckScale::fig3;
    } else {
        throw std::invalid_argument("gradcheck: scale must be tiny or fig3");
    }
    const auto report = glnn::run_gradcheck(scale, seed);
    std::cout << std::left << std::setw(28) << "component" << std::setw(14) << "max rel err"
              << std::setw(12) << "tolerance" << "result\n";
    for (const auto& e : report.entries) {
        std::cout << std::left << std::setw(28) << e.component << std::setw(14)
                  << std::setprecision(3) << std::scientific << e.max_rel_err << std::setw(12)
                  << e.tolerance << (e.pass ? "pass" : "FAIL") << "\n"
                  << std::defaultfloat;
    }
    if (!report.all_pass()) {
        std::cerr << "gradient check failed\n";
        return 2;
    }
    return 0;
}

void print_summary(const glnn::ExperimentReport& r) {
    std::cerr << std::fixed << std::setprecision(2) << glnn::to_string(r.config.loss_kind)
              << (r.config.momentum_enabled ? " with momentum" : " without momentum")
              << ": mean accuracy " << r.mean_accuracy << "% (std " << r.std_accuracy << ") in "
              << std::setprecision(1) << r.wall_seconds << "s\n";
}

int cmd_train(CommonFlags& f) {
    f.cfg.loss_kind = glnn::loss_kind_from_string(f.loss_name);
    f.cfg.momentum_enabled = f.momentum;
    const auto report = glnn::run_experiment(f.cfg);
    if (f.format == "csv") {
        if (f.out.empty()) {
            glnn::emit_csv(report, std::cout);
        } else {
            glnn::emit_csv(report, f.out);
        }
    } else if (f.format == "markdown") {
        const std::vector<glnn::ExperimentReport> one{report};
        if (f.out.empty()) {
            glnn::emit_markdown(one, std::cout);
        } else {
            glnn::emit_markdown(one, f.out);
        }
    } else {
        throw std::invalid_argument("format must be csv or markdown");
    }
    print_summary(report);
    return 0;
}

int cmd_table1(CommonFlags& f) {
    const auto dataset = glnn::load_dataset_for(f.cfg);
    std::vector<glnn::ExperimentConfig> configs = {
        glnn::ExperimentConfig::sse_plain(),
        glnn::ExperimentConfig::sse_momentum(),
        glnn::ExperimentConfig::proposed_golden(),
    };
    std::vector<glnn::ExperimentReport> reports;
    for (auto& cfg : configs) {
        cfg.epochs = f.cfg.epochs;
        cfg.batch_size = f.cfg.batch_size;
        cfg.folds = f.cfg.folds;
        cfg.repeats_per_fold = f.cfg.repeats_per_fold;
        cfg.seed = f.cfg.seed;
        cfg.images_path = f.cfg.images_path;
        cfg.labels_path = f.cfg.labels_path;
        cfg.angle_range = f.cfg.angle_range;
        reports.push_back(glnn::run_experiment(cfg, dataset));
        print_summary(reports.back());
    }
    if (f.out.empty()) {
        glnn::emit_markdown(reports, std::cout);
    } else {
        glnn::emit_markdown(reports, f.out);
        std::cerr << "wrote " << f.out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"golden-ratio loss training toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file");

    auto* constants = app.add_subcommand("constants", "print the derived constants");

    std::string sweep_out;
    auto* losscheck = app.add_subcommand("losscheck", "emit the loss-curve sweep as CSV");
    losscheck->add_option("--out", sweep_out, "output path (default stdout)");

    std::string scale = "tiny";
    std::uint64_t gc_seed = 1;
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient audit");
    gradcheck->add_option("--scale", scale, "tiny or fig3")
        ->check(CLI::IsMember({"tiny", "fig3"}));
    gradcheck->add_option("--seed", gc_seed, "seed for probe data");

    CommonFlags train_flags;
    auto* train = app.add_subcommand("train", "train one configuration with k-fold splits");
    train->add_option("--loss", train_flags.loss_name, "sse or proposed")
        ->check(CLI::IsMember({"sse", "proposed"}));
    train->add_flag("--momentum,!--no-momentum", train_flags.momentum,
                    "momentum on/off (default on)");
    train->add_option("--eta", train_flags.cfg.eta,
                      "learning rate; 0 picks the canonical default for the config");
    train->add_option("--alpha", train_flags.cfg.alpha,
                      "momentum weight; 0 picks the canonical default");
    add_schedule_flags(train, train_flags.cfg);
    add_dataset_flags(train, train_flags.cfg);
    train->add_option("--out", train_flags.out, "report path (default stdout)");
    train->add_option("--format", train_flags.format, "csv or markdown")
        ->check(CLI::IsMember({"csv", "markdown"}));

    CommonFlags table_flags;
    auto* table1 = app.add_subcommand(
        "table1", "run the three canonical configurations and emit the comparison table");
    add_schedule_flags(table1, table_flags.cfg);
    add_dataset_flags(table1, table_flags.cfg);
    table1->add_option("--out", table_flags.out, "table path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (constants->parsed()) return cmd_constants();
        if (losscheck->parsed()) return cmd_losscheck(sweep_out);
        if (gradcheck->parsed()) return cmd_gradcheck(scale, gc_seed);
        if (train->parsed()) return cmd_train(train_flags);
        if (table1->parsed()) return cmd_table1(table_flags);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
