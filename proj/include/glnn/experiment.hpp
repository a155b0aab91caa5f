#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "glnn/data.hpp"
#include "glnn/layers.hpp"

namespace glnn {

enum class LossKind { sse, proposed };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

// a fold whose loss went non-finite; carries fold/epoch/batch in the message
struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    LossKind loss_kind = LossKind::proposed;
    bool momentum_enabled = true;
    double eta = 0.0;    // 0 means "fill from the canonical default for this config"
    double alpha = 0.0;
    std::size_t epochs = 30;
    std::size_t batch_size = 128;
    std::size_t folds = 10;
    std::size_t repeats_per_fold = 1;
    std::uint64_t seed = 1;
    std::string images_path;
    std::string labels_path;
    double angle_range = 45.0;

    // the three configurations of the headline comparison
    static ExperimentConfig sse_plain();       // eta 0.01, no momentum
    static ExperimentConfig sse_momentum();    // eta 0.01, alpha 0.9
    static ExperimentConfig proposed_golden(); // eta, alpha from the golden roots

    // replaces eta/alpha zeros with the canonical defaults for the selected
    // loss and momentum setting
    void fill_defaults();

    void validate() const;
};

struct FoldResult {
    std::size_t fold = 0;
    std::size_t repeat = 0;
    double accuracy = 0.0;              // percent
    std::vector<double> epoch_losses;   // mean training loss per epoch
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<FoldResult> folds;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  // sample standard deviation
    double wall_seconds = 0.0;
};

// k-fold cross-validated training of the digit network under cfg
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::vector<LabeledImage>& dataset);

// loads cfg.images_path/cfg.labels_path (IDX, gzip accepted), applies
// rotation augmentation, then runs
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// the dataset exactly as run_experiment(cfg) would load it: IDX pair plus
// rotation augmentation, or a native cache when labels_path is empty
std::vector<LabeledImage> load_dataset_for(const ExperimentConfig& cfg);

// argmax accuracy (percent) over the given rows; ties resolve to the lowest
// class index. Falls back to batch statistics (with the running stats rolled
// back) when no training step has primed the running estimates yet.
double evaluate_accuracy(const NetworkSpec& spec, ParamSet& params,
                         const std::vector<LabeledImage>& dataset,
                         const std::vector<std::size_t>& indices, std::size_t batch_size);

// ---- gradient checking -------------------------------------------------

enum class GradCheckScale { tiny, fig3 };

struct GradCheckEntry {
    std::string component;
    double max_rel_err = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    bool all_pass() const;
};

// fault-injection hooks for the negative-control tests
struct GradCheckHooks {
    double conv_weight_grad_offset = 0.0;  // added to analytic conv gradients
};

// finite-difference audit of the loss gradient and every layer backward
GradCheckReport run_gradcheck(GradCheckScale scale, std::uint64_t seed,
                              const GradCheckHooks& hooks = {});

// ---- report emission ----------------------------------------------------

// header loss,momentum,eta,alpha,epochs,folds,fold,accuracy + one row per fold
void emit_csv(const ExperimentReport& report, std::ostream& os);
void emit_csv(const ExperimentReport& report, const std::string& path);

// summary table, one row per report: configuration, avg. accuracy, std
void emit_markdown(const std::vector<ExperimentReport>& reports, std::ostream& os);
void emit_markdown(const std::vector<ExperimentReport>& reports, const std::string& path);

// 1000-point grid over the angular domain: d,L_I,L,Loss,dLoss_dy
void sweep_loss(std::ostream& os);
void sweep_loss(const std::string& path);

}  // namespace glnn
