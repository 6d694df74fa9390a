#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cn/model.hpp"
#include "cn/optim.hpp"

namespace cn {

struct TrainConfig {
    int max_steps = 100;  // N: outer steps (full passes over the training data)
    int disc_steps = 1;   // K: discriminator updates per minibatch
    int batch_size = 32;
    double lr_ephysician = 1e-3;
    double lr_discriminator = 1e-3;
    double lr_classifier = 1e-3;
    bool noise_enabled = true;
    bool cooperative = true;
    double convergence_tol = 1e-4;
    uint64_t seed = 0;

    void validate() const;
};

enum class StopReason { kConverged, kMaxSteps };
const char* to_string(StopReason r);

struct TrainHistory {
    std::vector<int> steps;
    std::vector<double> train_loss_c;
    std::vector<double> train_loss_d;
    std::vector<double> val_accuracy;
    StopReason stop_reason = StopReason::kMaxSteps;

    // step,L_C_train,L_D_train,val_accuracy,stop_reason
    // stop_reason is filled on the final row only.
    void write_csv(const std::string& path) const;
};

// True iff the two most recent losses differ by less than tol. Needs at
// least two recorded values.
bool convergence_check(const std::vector<double>& losses, double tol);

// Called at the end of each outer step with the full-training-set
// representations (batch statistics, running stats untouched), the noise
// block used for the recorded discriminator loss (null when disabled), and
// that step's history entries.
using StepObserver =
    std::function<void(int step, const std::vector<Matrix>& train_reps,
                       const Matrix* noise, double loss_c, double loss_d,
                       double val_acc)>;

// One outer step runs, per minibatch:
//   (a) cooperative step: minimize L_C over the classifier and, when
//       cooperative, the ePhysicians;
//   (b) adversarial step: maximize L_D over the ePhysicians only
//       (sign-flipped gradients into their Adam state);
//   (c) K discriminator steps: minimize L_D over the discriminator only.
// Each sub-step recomputes the forward pass under the parameters it is about
// to update against. The noise block is sampled once per minibatch from the
// batch-start representations. BatchNorm running statistics are folded in
// exactly once per minibatch.
//
// Training stops after max_steps outer steps, or earlier once the
// full-training-set classification loss moves less than convergence_tol
// between consecutive outer steps.
class Trainer {
public:
    // rng must outlive the trainer; all training randomness (shuffling,
    // noise draws) comes from it.
    Trainer(ConsensusModel& model, TrainConfig cfg, Rng& rng);

    TrainHistory run(const Matrix& x_train, const std::vector<int>& y_train,
                     const Matrix& x_val, const std::vector<int>& y_val,
                     const StepObserver& observer = {});

    // The minibatch sub-steps, exposed so the update-ownership contract can
    // be exercised directly. None of them touch running statistics.
    double step_cooperative(const Matrix& xb, const std::vector<int>& yb);
    double step_adversarial(const Matrix& xb, const Matrix* noise);
    double step_discriminator_once(const Matrix& xb, const Matrix* noise);

    // Full-training-set losses under batch statistics; draws one noise block
    // from the trial RNG when the noise modality is enabled.
    std::pair<double, double> evaluate_losses(const Matrix& x, const std::vector<int>& y,
                                              std::vector<Matrix>* reps_out = nullptr,
                                              Matrix* noise_out = nullptr);

    const Adam& ephysician_adam() const { return adam_eph_; }
    const Adam& discriminator_adam() const { return adam_disc_; }
    const Adam& classifier_adam() const { return adam_clf_; }

private:
    ConsensusModel& model_;
    TrainConfig cfg_;
    Rng& rng_;
    Adam adam_eph_;
    Adam adam_disc_;
    Adam adam_clf_;
};

// Plain supervised training for the size-matched MLP baseline, on the same
// outer-step/minibatch/convergence protocol as the consensus trainer. Uses
// lr_classifier; the adversarial fields of the config are ignored.
TrainHistory train_mlp_classifier(Mlp& net, const TrainConfig& cfg, Rng& rng,
                                  const Matrix& x_train, const std::vector<int>& y_train,
                                  const Matrix& x_val, const std::vector<int>& y_val);

std::vector<int> mlp_predict(Mlp& net, const Matrix& x);

}  // namespace cn
